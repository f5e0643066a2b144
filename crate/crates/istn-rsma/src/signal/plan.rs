use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelEnsemble, Polarization};
use crate::numeric::CVector;
use crate::Error;

/// Transmitter owning a precoder column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tx {
    Sat,
    Bs,
}

/// Identity of one precoder column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Column {
    Spc,
    Cpc,
    SatPrivate(usize),
    Lpc,
    BsPrivate(usize),
}

impl Column {
    pub fn tx(self) -> Tx {
        match self {
            Self::Spc | Self::Cpc | Self::SatPrivate(_) => Tx::Sat,
            Self::Lpc | Self::BsPrivate(_) => Tx::Bs,
        }
    }

    pub fn is_common(self) -> bool {
        matches!(self, Self::Spc | Self::Cpc | Self::Lpc)
    }
}

/// Which rate budget a decoding event feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Spc,
    Cpc,
    Lpc,
    Private,
}

impl LayerKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Spc => "spc",
            Self::Cpc => "cpc",
            Self::Lpc => "lpc",
            Self::Private => "private",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserRef {
    Sat(usize),
    Cell(usize),
}

/// One stream decoded at one receiver: the desired column plus every column
/// still present as interference at that point of the decoding order.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeEvent {
    pub user: UserRef,
    pub layer: LayerKind,
    /// Receive chain the stream is decoded on.
    pub chain: Polarization,
    pub desired: Column,
    pub interference: Vec<Column>,
}

impl DecodeEvent {
    /// Desired column followed by the interferers.
    pub fn columns(&self) -> impl Iterator<Item = Column> + '_ {
        std::iter::once(self.desired).chain(self.interference.iter().copied())
    }

    /// Channel through which `tx` reaches this receiver in sample `s`, or
    /// `None` when that transmitter is not heard.
    pub fn channel<'a>(&self, ens: &'a ChannelEnsemble, tx: Tx, s: usize) -> Option<&'a CVector> {
        match (self.user, tx) {
            (UserRef::Sat(k), Tx::Sat) => Some(ens.sat_users[k].f[s].get(self.chain)),
            (UserRef::Sat(_), Tx::Bs) => None,
            (UserRef::Cell(k), Tx::Sat) => Some(ens.cell_users[k].z[s].get(self.chain)),
            (UserRef::Cell(k), Tx::Bs) => Some(ens.cell_users[k].h.get(self.chain)),
        }
    }

    /// True when every channel this event touches is sample invariant.
    pub fn is_deterministic(&self) -> bool {
        matches!(self.user, UserRef::Cell(_)) && self.columns().all(|c| c.tx() == Tx::Bs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    MdpRsma,
    RsmaPdIstn,
    SdmaIstn,
    RsmaDualPmIstn,
    RsmaOma,
    SdmaOma,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        Self::MdpRsma,
        Self::RsmaPdIstn,
        Self::SdmaIstn,
        Self::RsmaDualPmIstn,
        Self::RsmaOma,
        Self::SdmaOma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MdpRsma => "MDP-RSMA",
            Self::RsmaPdIstn => "RSMA-PD-ISTN",
            Self::SdmaIstn => "SDMA-ISTN",
            Self::RsmaDualPmIstn => "RSMA-Dual-PM-ISTN",
            Self::RsmaOma => "RSMA-OMA",
            Self::SdmaOma => "SDMA-OMA",
        }
    }

    pub fn is_oma(self) -> bool {
        matches!(self, Self::RsmaOma | Self::SdmaOma)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name().to_ascii_lowercase() == key)
            .or(match key.as_str() {
                "mdp" => Some(Self::MdpRsma),
                "pd" | "rsma-pd" => Some(Self::RsmaPdIstn),
                "sdma" => Some(Self::SdmaIstn),
                "dual-pm" | "rsma-dual-pm" => Some(Self::RsmaDualPmIstn),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// Which transmitters a plan optimises and evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NetworkScope {
    Both,
    SatOnly,
    BsOnly,
}

/// Streams, decoding events and rate structure of a scheme for a given user
/// population.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPlan {
    pub scheme: SchemeKind,
    pub sat_users: usize,
    pub cell_users: usize,
    pub sat_columns: Vec<Column>,
    pub bs_columns: Vec<Column>,
    pub events: Vec<DecodeEvent>,
    /// Factor applied to every reported rate (one half for orthogonal
    /// access).
    pub rate_scale: f64,
}

impl LayerPlan {
    /// Plan for `scheme` with the users' assigned polarizations.
    pub fn new(scheme: SchemeKind, sat_pols: &[Polarization], cell_pols: &[Polarization]) -> Self {
        Self::scoped(scheme, sat_pols, cell_pols, NetworkScope::Both)
    }

    pub fn for_ensemble(scheme: SchemeKind, ens: &ChannelEnsemble) -> Self {
        let sat: Vec<_> = ens.sat_users.iter().map(|u| u.pol).collect();
        let cell: Vec<_> = ens.cell_users.iter().map(|u| u.pol).collect();
        Self::new(scheme, &sat, &cell)
    }

    /// Sub-plan covering one network of an orthogonal-access scheme.
    pub fn oma_part(scheme: SchemeKind, sat_pols: &[Polarization], cell_pols: &[Polarization], sat: bool) -> Self {
        let scope = if sat { NetworkScope::SatOnly } else { NetworkScope::BsOnly };
        Self::scoped(scheme, sat_pols, cell_pols, scope)
    }

    fn scoped(scheme: SchemeKind, sat_pols: &[Polarization], cell_pols: &[Polarization], scope: NetworkScope) -> Self {
        let ks = sat_pols.len();
        let kt = cell_pols.len();
        let rsma = !matches!(scheme, SchemeKind::SdmaIstn | SchemeKind::SdmaOma);
        let use_sat = ks > 0 && scope != NetworkScope::BsOnly;
        let use_bs = kt > 0 && scope != NetworkScope::SatOnly;
        let has_spc = scheme == SchemeKind::MdpRsma && use_sat;
        let has_cpc = rsma && use_sat;
        let has_lpc = rsma && use_bs;
        let cross = !scheme.is_oma();
        let dual_pm = scheme == SchemeKind::RsmaDualPmIstn;

        let mut sat_columns = Vec::new();
        if use_sat {
            if has_spc {
                sat_columns.push(Column::Spc);
            }
            if has_cpc {
                sat_columns.push(Column::Cpc);
            }
            sat_columns.extend((0..ks).map(Column::SatPrivate));
        }
        let mut bs_columns = Vec::new();
        if use_bs {
            if has_lpc {
                bs_columns.push(Column::Lpc);
            }
            bs_columns.extend((0..kt).map(Column::BsPrivate));
        }

        let sat_privates: Vec<Column> = (0..ks).map(Column::SatPrivate).collect();
        let bs_privates: Vec<Column> = (0..kt).map(Column::BsPrivate).collect();
        let without = |cols: &[Column], skip: Column| -> Vec<Column> { cols.iter().copied().filter(|&c| c != skip).collect() };
        // Satellite columns still undecoded at a cellular user once the
        // super-common stream has been removed (or all of them when there
        // is no super-common stream).
        let sat_residual: Vec<Column> = if use_sat && cross {
            sat_columns.iter().copied().filter(|&c| c != Column::Spc).collect()
        } else {
            Vec::new()
        };

        let mut events = Vec::new();
        if use_sat {
            for (k, &pol) in sat_pols.iter().enumerate() {
                let user = UserRef::Sat(k);
                let own = Column::SatPrivate(k);
                if dual_pm {
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Cpc,
                        chain: Polarization::Rhcp,
                        desired: Column::Cpc,
                        interference: sat_privates.clone(),
                    });
                    let mut interference = vec![Column::Cpc];
                    interference.extend(without(&sat_privates, own));
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Private,
                        chain: Polarization::Lhcp,
                        desired: own,
                        interference,
                    });
                    continue;
                }
                if has_spc {
                    let mut interference = Vec::new();
                    if has_cpc {
                        interference.push(Column::Cpc);
                    }
                    interference.extend(sat_privates.iter().copied());
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Spc,
                        chain: pol,
                        desired: Column::Spc,
                        interference,
                    });
                }
                if has_cpc {
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Cpc,
                        chain: pol,
                        desired: Column::Cpc,
                        interference: sat_privates.clone(),
                    });
                }
                events.push(DecodeEvent {
                    user,
                    layer: LayerKind::Private,
                    chain: pol,
                    desired: own,
                    interference: without(&sat_privates, own),
                });
            }
        }
        if use_bs {
            for (k, &pol) in cell_pols.iter().enumerate() {
                let user = UserRef::Cell(k);
                let own = Column::BsPrivate(k);
                if dual_pm {
                    let mut interference = bs_privates.clone();
                    interference.extend(sat_residual.iter().copied());
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Lpc,
                        chain: Polarization::Vertical,
                        desired: Column::Lpc,
                        interference,
                    });
                    let mut interference = vec![Column::Lpc];
                    interference.extend(without(&bs_privates, own));
                    interference.extend(sat_residual.iter().copied());
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Private,
                        chain: Polarization::Horizontal,
                        desired: own,
                        interference,
                    });
                    continue;
                }
                if has_spc {
                    let mut interference = sat_residual.clone();
                    interference.extend(bs_columns.iter().copied());
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Spc,
                        chain: pol,
                        desired: Column::Spc,
                        interference,
                    });
                }
                if has_lpc {
                    let mut interference = sat_residual.clone();
                    interference.extend(bs_privates.iter().copied());
                    events.push(DecodeEvent {
                        user,
                        layer: LayerKind::Lpc,
                        chain: pol,
                        desired: Column::Lpc,
                        interference,
                    });
                }
                let mut interference = sat_residual.clone();
                interference.extend(without(&bs_privates, own));
                events.push(DecodeEvent {
                    user,
                    layer: LayerKind::Private,
                    chain: pol,
                    desired: own,
                    interference,
                });
            }
        }

        Self {
            scheme,
            sat_users: if scope == NetworkScope::BsOnly { 0 } else { ks },
            cell_users: if scope == NetworkScope::SatOnly { 0 } else { kt },
            sat_columns,
            bs_columns,
            events,
            rate_scale: if scheme.is_oma() { 0.5 } else { 1.0 },
        }
    }

    pub fn has_layer(&self, layer: LayerKind) -> bool {
        self.events.iter().any(|e| e.layer == layer)
    }

    pub fn columns(&self) -> impl Iterator<Item = Column> + '_ {
        self.sat_columns.iter().chain(self.bs_columns.iter()).copied()
    }

    /// Port (0 or 1 within each antenna pair) a column is restricted to, if
    /// any. Dual polarization multiplexing puts common streams on the first
    /// port of every pair and private streams on the second.
    pub fn port_restriction(&self, col: Column) -> Option<usize> {
        if self.scheme != SchemeKind::RsmaDualPmIstn {
            return None;
        }
        Some(if col.is_common() { 0 } else { 1 })
    }

    /// Coordinates of a column that carry optimisation variables.
    pub fn support(&self, col: Column, ports: usize) -> Vec<usize> {
        match self.port_restriction(col) {
            Some(p) => (0..ports).filter(|i| i % 2 == p).collect(),
            None => (0..ports).collect(),
        }
    }
}
