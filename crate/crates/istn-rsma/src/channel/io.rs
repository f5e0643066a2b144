//! Ensemble serialisation.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "ISTNENS1"
//! sat_users    u32
//! cell_users   u32
//! samples      u32
//! sat_ports    u32
//! bs_ports     u32
//! pol codes    u8 per satellite user, then u8 per cellular user
//! body         f64 pairs (re, im):
//!              for each sample, for each satellite user, both receive
//!              chains of f; then for each cellular user both chains of z;
//!              finally both chains of h for each cellular user
//! ```

use std::io::{Read, Write};

use super::ensemble::{CellUserChannels, ChannelEnsemble, PolarPair, SatUserChannels};
use super::polarization::Polarization;
use crate::numeric::{CVector, C64};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"ISTNENS1";

fn put_vec<W: Write>(out: &mut W, v: &CVector) -> std::io::Result<()> {
    for c in v.iter() {
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn put_pair<W: Write>(out: &mut W, p: &PolarPair) -> std::io::Result<()> {
    put_vec(out, &p.0[0])?;
    put_vec(out, &p.0[1])
}

pub fn write_ensemble_binary<W: Write>(ens: &ChannelEnsemble, mut out: W) -> Result<()> {
    ens.validate()?;
    out.write_all(MAGIC)?;
    for n in [ens.sat_users.len(), ens.cell_users.len(), ens.samples, ens.sat_ports, ens.bs_ports] {
        let n = u32::try_from(n).map_err(|_| Error::Dimension("count exceeds u32".into()))?;
        out.write_all(&n.to_le_bytes())?;
    }
    for u in &ens.sat_users {
        out.write_all(&[u.pol.code()])?;
    }
    for u in &ens.cell_users {
        out.write_all(&[u.pol.code()])?;
    }
    for s in 0..ens.samples {
        for u in &ens.sat_users {
            put_pair(&mut out, &u.f[s])?;
        }
        for u in &ens.cell_users {
            put_pair(&mut out, &u.z[s])?;
        }
    }
    for u in &ens.cell_users {
        put_pair(&mut out, &u.h)?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Parse(format!("truncated ensemble: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes::<4>()?) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>()?))
    }

    fn pol(&mut self) -> Result<Polarization> {
        let [code] = self.bytes::<1>()?;
        Polarization::from_code(code).ok_or_else(|| Error::Parse(format!("unknown polarization code {code}")))
    }

    fn vector(&mut self, len: usize) -> Result<CVector> {
        let mut v = CVector::zeros(len);
        for i in 0..len {
            v[i] = C64::new(self.f64()?, self.f64()?);
        }
        Ok(v)
    }

    fn pair(&mut self, len: usize) -> Result<PolarPair> {
        Ok(PolarPair([self.vector(len)?, self.vector(len)?]))
    }
}

pub fn read_ensemble_binary<R: Read>(input: R) -> Result<ChannelEnsemble> {
    let mut r = Reader { inner: input };
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::Parse("bad ensemble magic".into()));
    }
    let ks = r.u32()?;
    let kt = r.u32()?;
    let samples = r.u32()?;
    let sat_ports = r.u32()?;
    let bs_ports = r.u32()?;
    let mut sat_users = Vec::with_capacity(ks);
    for _ in 0..ks {
        sat_users.push(SatUserChannels {
            pol: r.pol()?,
            f: Vec::with_capacity(samples),
        });
    }
    let mut cell_pols = Vec::with_capacity(kt);
    for _ in 0..kt {
        cell_pols.push(r.pol()?);
    }
    let mut z: Vec<Vec<PolarPair>> = vec![Vec::with_capacity(samples); kt];
    for _ in 0..samples {
        for u in sat_users.iter_mut() {
            u.f.push(r.pair(sat_ports)?);
        }
        for zk in z.iter_mut() {
            zk.push(r.pair(sat_ports)?);
        }
    }
    let mut cell_users = Vec::with_capacity(kt);
    for (pol, z) in cell_pols.into_iter().zip(z) {
        cell_users.push(CellUserChannels {
            pol,
            z,
            h: r.pair(bs_ports)?,
        });
    }
    let ens = ChannelEnsemble {
        sat_ports,
        bs_ports,
        samples,
        sat_users,
        cell_users,
    };
    ens.validate()?;
    Ok(ens)
}

/// Long-format CSV for debugging: one row per complex entry.
pub fn write_ensemble_csv<W: Write>(ens: &ChannelEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_kind", "user", "link", "sample", "rx_pol", "port", "re", "im"])?;
    let mut emit = |kind: &str, user: usize, link: &str, sample: usize, pair: &PolarPair, family: [Polarization; 2]| {
        for pol in family {
            for (port, c) in pair.get(pol).iter().enumerate() {
                w.write_record([
                    kind.to_string(),
                    user.to_string(),
                    link.to_string(),
                    sample.to_string(),
                    pol.label().to_string(),
                    port.to_string(),
                    format!("{:e}", c.re),
                    format!("{:e}", c.im),
                ])?;
            }
        }
        Ok::<_, csv::Error>(())
    };
    for (k, u) in ens.sat_users.iter().enumerate() {
        for (s, p) in u.f.iter().enumerate() {
            emit("sat", k, "f", s, p, Polarization::circular_basis())?;
        }
    }
    for (k, u) in ens.cell_users.iter().enumerate() {
        for (s, p) in u.z.iter().enumerate() {
            emit("cell", k, "z", s, p, Polarization::circular_basis())?;
        }
        emit("cell", k, "h", 0, &u.h, Polarization::linear_basis())?;
    }
    w.flush()?;
    Ok(())
}
