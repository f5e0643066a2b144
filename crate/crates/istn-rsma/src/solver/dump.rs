//! Plain-text form of a [`ConicProgram`], for inspection and for feeding an
//! external solver. Layout:
//!
//! ```text
//! conic-program v1
//! sense max|min
//! variables <n>
//! objective <count>        then <count> lines "j value"
//! equalities <rows> <nnz>  then <nnz> lines "i j value", then <rows> rhs lines
//! cone_rows <rows> <nnz>   same layout for G and h
//! cones <count>            then <count> lines "l <dim>" or "q <dim>"
//! end
//! ```
//!
//! Values are written with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;

use super::cones::Cone;
use super::program::{ConicProgram, Sense, SparseMatrix};
use crate::{Error, Result};

fn write_matrix(out: &mut String, tag: &str, m: &SparseMatrix, rhs: &[f64]) {
    let _ = writeln!(out, "{tag} {} {}", m.nrows(), m.nnz());
    for (i, row) in m.rows.iter().enumerate() {
        for &(j, v) in row {
            let _ = writeln!(out, "{i} {j} {v:.16e}");
        }
    }
    for v in rhs {
        let _ = writeln!(out, "{v:.16e}");
    }
}

pub fn write_program(prog: &ConicProgram) -> String {
    let mut out = String::from("conic-program v1\n");
    let sense = match prog.sense {
        Sense::Maximize => "max",
        Sense::Minimize => "min",
    };
    let _ = writeln!(out, "sense {sense}");
    let _ = writeln!(out, "variables {}", prog.variables());
    let nz: Vec<(usize, f64)> = prog.objective.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
    let _ = writeln!(out, "objective {}", nz.len());
    for (j, v) in nz {
        let _ = writeln!(out, "{j} {v:.16e}");
    }
    write_matrix(&mut out, "equalities", &prog.eq_matrix, &prog.eq_rhs);
    write_matrix(&mut out, "cone_rows", &prog.cone_matrix, &prog.cone_rhs);
    let _ = writeln!(out, "cones {}", prog.cones.len());
    for c in &prog.cones {
        let _ = match c {
            Cone::NonNeg(d) => writeln!(out, "l {d}"),
            Cone::Soc(d) => writeln!(out, "q {d}"),
        };
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        loop {
            let (n, line) = self.inner.next().ok_or_else(|| Error::Parse("unexpected end of program".into()))?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Ok((n + 1, line.split_whitespace().collect()));
            }
        }
    }

    fn header(&mut self, tag: &str) -> Result<Vec<usize>> {
        let (n, parts) = self.next()?;
        if parts.first() != Some(&tag) {
            return Err(Error::Parse(format!("line {n}: expected `{tag}`")));
        }
        parts[1..].iter().map(|p| num::<usize>(p, n)).collect()
    }
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("line {line}: bad number `{s}`")))
}

fn read_matrix(lines: &mut Lines, tag: &str, ncols: usize) -> Result<(SparseMatrix, Vec<f64>)> {
    let dims = lines.header(tag)?;
    let (rows, nnz) = match dims.as_slice() {
        [r, z] => (*r, *z),
        _ => return Err(Error::Parse(format!("`{tag}` needs rows and nnz"))),
    };
    let mut m = SparseMatrix::new(ncols);
    m.rows = vec![Vec::new(); rows];
    for _ in 0..nnz {
        let (n, p) = lines.next()?;
        if p.len() != 3 {
            return Err(Error::Parse(format!("line {n}: expected `i j value`")));
        }
        let i: usize = num(p[0], n)?;
        let j: usize = num(p[1], n)?;
        if i >= rows {
            return Err(Error::Parse(format!("line {n}: row {i} out of range")));
        }
        m.rows[i].push((j, num(p[2], n)?));
    }
    let mut rhs = Vec::with_capacity(rows);
    for _ in 0..rows {
        let (n, p) = lines.next()?;
        rhs.push(num(p[0], n)?);
    }
    Ok((m, rhs))
}

pub fn parse_program(text: &str) -> Result<ConicProgram> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (n, first) = lines.next()?;
    if first != ["conic-program", "v1"] {
        return Err(Error::Parse(format!("line {n}: missing `conic-program v1` header")));
    }
    let (n, sense) = lines.next()?;
    let sense = match sense.as_slice() {
        ["sense", "max"] => Sense::Maximize,
        ["sense", "min"] => Sense::Minimize,
        _ => return Err(Error::Parse(format!("line {n}: bad sense"))),
    };
    let vars = *lines.header("variables")?.first().ok_or_else(|| Error::Parse("variables count".into()))?;
    let count = *lines.header("objective")?.first().ok_or_else(|| Error::Parse("objective count".into()))?;
    let mut prog = ConicProgram::new(vars, sense);
    for _ in 0..count {
        let (n, p) = lines.next()?;
        let j: usize = num(p[0], n)?;
        if j >= vars || p.len() != 2 {
            return Err(Error::Parse(format!("line {n}: bad objective entry")));
        }
        prog.objective[j] = num(p[1], n)?;
    }
    (prog.eq_matrix, prog.eq_rhs) = read_matrix(&mut lines, "equalities", vars)?;
    (prog.cone_matrix, prog.cone_rhs) = read_matrix(&mut lines, "cone_rows", vars)?;
    let count = *lines.header("cones")?.first().ok_or_else(|| Error::Parse("cone count".into()))?;
    for _ in 0..count {
        let (n, p) = lines.next()?;
        let d: usize = num(p.get(1).copied().unwrap_or(""), n)?;
        prog.cones.push(match p[0] {
            "l" => Cone::NonNeg(d),
            "q" => Cone::Soc(d),
            other => return Err(Error::Parse(format!("line {n}: unknown cone `{other}`"))),
        });
    }
    let (n, end) = lines.next()?;
    if end != ["end"] {
        return Err(Error::Parse(format!("line {n}: expected `end`")));
    }
    prog.validate()?;
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Affine;

    #[test]
    fn round_trip_preserves_every_bit() {
        let mut p = ConicProgram::new(3, Sense::Maximize);
        p.objective = vec![1.0, 0.0, -1.0 / 3.0];
        p.add_equality(&Affine::var(0, 1.0).plus(1, 2.0).plus(2, std::f64::consts::PI));
        p.add_nonneg(&[Affine::var(2, 1.0), Affine::constant(0.1).plus(0, -1.0)]);
        p.add_soc(&[Affine::constant(2.0), Affine::var(0, 1.0), Affine::var(1, 1e-17)]);
        let text = write_program(&p);
        assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(parse_program("conic-program v1\nsense sideways\n").is_err());
        assert!(parse_program("").is_err());
    }
}
