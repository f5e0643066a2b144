//! Cone arithmetic: Jordan products, Nesterov-Todd scalings and step
//! lengths for orthant and second-order cone blocks.

/// One block of the product cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// `s_i >= 0` for each of the rows.
    NonNeg(usize),
    /// `s_0 >= ||s_1..||`.
    Soc(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::NonNeg(d) | Cone::Soc(d) => d,
        }
    }

    /// Contribution to the barrier degree.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::NonNeg(d) => d,
            Cone::Soc(_) => 1,
        }
    }

    /// How far `v` lies outside the cone (zero when inside).
    pub fn violation(&self, v: &[f64]) -> f64 {
        (-self.margin(v)).max(0.0)
    }

    /// Smallest "eigenvalue": positive exactly in the interior.
    pub fn margin(&self, v: &[f64]) -> f64 {
        match self {
            Cone::NonNeg(_) => v.iter().copied().fold(f64::INFINITY, f64::min),
            Cone::Soc(_) => v[0] - norm(&v[1..]),
        }
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Iterate over `(cone, row_offset)` pairs.
pub(crate) fn blocks(cones: &[Cone]) -> impl Iterator<Item = (Cone, usize)> + '_ {
    cones.iter().scan(0usize, |off, &c| {
        let start = *off;
        *off += c.dim();
        Some((c, start))
    })
}

pub(crate) fn degree(cones: &[Cone]) -> usize {
    cones.iter().map(Cone::degree).sum()
}

/// Identity element `e` of the product cone.
pub(crate) fn identity(cones: &[Cone], m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    for (c, off) in blocks(cones) {
        match c {
            Cone::NonNeg(d) => e[off..off + d].fill(1.0),
            Cone::Soc(_) => e[off] = 1.0,
        }
    }
    e
}

/// Shift `v` into the interior when it is not already strictly inside.
pub(crate) fn shift_into_interior(cones: &[Cone], v: &mut [f64]) {
    let worst = blocks(cones)
        .map(|(c, off)| -c.margin(&v[off..off + c.dim()]))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst >= 0.0 {
        let e = identity(cones, v.len());
        for (vi, ei) in v.iter_mut().zip(e) {
            *vi += (1.0 + worst) * ei;
        }
    }
}

/// Jordan product `u o v`.
pub(crate) fn jordan_product(cones: &[Cone], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for (c, off) in blocks(cones) {
        let d = c.dim();
        let (u, v, o) = (&u[off..off + d], &v[off..off + d], &mut out[off..off + d]);
        match c {
            Cone::NonNeg(_) => {
                for i in 0..d {
                    o[i] = u[i] * v[i];
                }
            }
            Cone::Soc(_) => {
                o[0] = dot(u, v);
                for i in 1..d {
                    o[i] = u[0] * v[i] + v[0] * u[i];
                }
            }
        }
    }
    out
}

/// Solve `lambda o x = v` for `x`.
pub(crate) fn jordan_divide(cones: &[Cone], lambda: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (c, off) in blocks(cones) {
        let d = c.dim();
        let (l, v, o) = (&lambda[off..off + d], &v[off..off + d], &mut out[off..off + d]);
        match c {
            Cone::NonNeg(_) => {
                for i in 0..d {
                    o[i] = v[i] / l[i];
                }
            }
            Cone::Soc(_) => {
                let det = l[0] * l[0] - dot(&l[1..], &l[1..]);
                let x0 = (l[0] * v[0] - dot(&l[1..], &v[1..])) / det;
                o[0] = x0;
                for i in 1..d {
                    o[i] = (v[i] - x0 * l[i]) / l[0];
                }
            }
        }
    }
    out
}

/// Largest `alpha` (capped at `cap`) with `x + alpha dx` in the cone.
pub(crate) fn max_step(cones: &[Cone], x: &[f64], dx: &[f64], cap: f64) -> f64 {
    let mut alpha = cap;
    for (c, off) in blocks(cones) {
        let d = c.dim();
        let (x, dx) = (&x[off..off + d], &dx[off..off + d]);
        match c {
            Cone::NonNeg(_) => {
                for i in 0..d {
                    if dx[i] < 0.0 {
                        alpha = alpha.min(-x[i] / dx[i]);
                    }
                }
            }
            Cone::Soc(_) => alpha = alpha.min(soc_step(x, dx)),
        }
    }
    alpha.max(0.0)
}

/// First positive root of `(x0 + a d0)^2 - ||x1 + a d1||^2 = 0`.
fn soc_step(x: &[f64], d: &[f64]) -> f64 {
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = x[0] * d[0] - dot(&x[1..], &d[1..]);
    let c = (x[0] * x[0] - dot(&x[1..], &x[1..])).max(0.0);
    // Also guard the sign of the leading coordinate.
    let lead = if d[0] < 0.0 { -x[0] / d[0] } else { f64::INFINITY };
    let disc = b * b - a * c;
    let root = if a.abs() <= 1e-300 * (b.abs() + c) {
        if b < 0.0 {
            -c / (2.0 * b)
        } else {
            f64::INFINITY
        }
    } else if disc < 0.0 {
        // No real crossing: the quadratic keeps the sign of `c`.
        f64::INFINITY
    } else {
        let sq = disc.sqrt();
        // Roots of a t^2 + 2 b t + c, computed without cancellation.
        let q = -(b + b.signum() * sq);
        let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (f64::INFINITY, f64::INFINITY) };
        [r1, r2].into_iter().filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min)
    };
    root.min(lead)
}

/// Nesterov-Todd scaling of one block.
#[derive(Debug, Clone)]
enum BlockScaling {
    /// `W = diag(w)`.
    Orthant(Vec<f64>),
    /// `W = eta * Wbar(wbar)` with `wbar^T J wbar = 1`.
    Soc { eta: f64, wbar: Vec<f64> },
}

/// Symmetric scaling `W` with `W z = W^{-1} s = lambda`.
#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    blocks: Vec<(usize, BlockScaling)>,
}

impl NtScaling {
    /// `None` when `s` or `z` is not strictly interior.
    pub(crate) fn new(cones: &[Cone], s: &[f64], z: &[f64]) -> Option<Self> {
        let mut out = Vec::with_capacity(cones.len());
        for (c, off) in blocks(cones) {
            let d = c.dim();
            let (s, z) = (&s[off..off + d], &z[off..off + d]);
            let scaling = match c {
                Cone::NonNeg(_) => {
                    if s.iter().chain(z).any(|&v| v <= 0.0 || !v.is_finite()) {
                        return None;
                    }
                    BlockScaling::Orthant(s.iter().zip(z).map(|(s, z)| (s / z).sqrt()).collect())
                }
                Cone::Soc(_) => {
                    let s_res = s[0] * s[0] - dot(&s[1..], &s[1..]);
                    let z_res = z[0] * z[0] - dot(&z[1..], &z[1..]);
                    if !(s_res > 0.0 && z_res > 0.0 && s[0] > 0.0 && z[0] > 0.0) {
                        return None;
                    }
                    let (sn, zn) = (s_res.sqrt(), z_res.sqrt());
                    let sb: Vec<f64> = s.iter().map(|v| v / sn).collect();
                    let zb: Vec<f64> = z.iter().map(|v| v / zn).collect();
                    let gamma = ((1.0 + dot(&sb, &zb)) / 2.0).sqrt();
                    let mut wbar = vec![0.0; d];
                    wbar[0] = (sb[0] + zb[0]) / (2.0 * gamma);
                    for i in 1..d {
                        wbar[i] = (sb[i] - zb[i]) / (2.0 * gamma);
                    }
                    if !wbar.iter().all(|v| v.is_finite()) {
                        return None;
                    }
                    BlockScaling::Soc {
                        eta: (sn / zn).sqrt(),
                        wbar,
                    }
                }
            };
            out.push((off, scaling));
        }
        Some(Self { blocks: out })
    }

    /// `W v`.
    pub(crate) fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.map(v, Mode::Forward)
    }

    /// `W^{-1} v`.
    pub(crate) fn apply_inv(&self, v: &[f64]) -> Vec<f64> {
        self.map(v, Mode::Inverse)
    }

    /// `W^2 v`.
    pub(crate) fn apply_sq(&self, v: &[f64]) -> Vec<f64> {
        self.apply(&self.apply(v))
    }

    /// `W^{-2} v`.
    pub(crate) fn apply_inv_sq(&self, v: &[f64]) -> Vec<f64> {
        self.map(v, Mode::InverseSquare)
    }

    fn map(&self, v: &[f64], mode: Mode) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (off, b) in &self.blocks {
            match b {
                BlockScaling::Orthant(w) => {
                    for (i, wi) in w.iter().enumerate() {
                        out[off + i] = match mode {
                            Mode::Forward => wi * v[off + i],
                            Mode::Inverse => v[off + i] / wi,
                            Mode::InverseSquare => v[off + i] / (wi * wi),
                        };
                    }
                }
                BlockScaling::Soc { eta, wbar } => {
                    let d = wbar.len();
                    let v = &v[*off..off + d];
                    let o = &mut out[*off..off + d];
                    let w0 = wbar[0];
                    let w1v1 = dot(&wbar[1..], &v[1..]);
                    match mode {
                        Mode::Forward => {
                            o[0] = eta * (w0 * v[0] + w1v1);
                            let k = v[0] + w1v1 / (1.0 + w0);
                            for i in 1..d {
                                o[i] = eta * (v[i] + k * wbar[i]);
                            }
                        }
                        Mode::Inverse => {
                            o[0] = (w0 * v[0] - w1v1) / eta;
                            let k = v[0] - w1v1 / (1.0 + w0);
                            for i in 1..d {
                                o[i] = (v[i] - k * wbar[i]) / eta;
                            }
                        }
                        Mode::InverseSquare => {
                            // eta^-2 (2 u u^T - J) v with u = J wbar.
                            let uv = w0 * v[0] - w1v1;
                            let e2 = eta * eta;
                            o[0] = (2.0 * uv * w0 - v[0]) / e2;
                            for i in 1..d {
                                o[i] = (-2.0 * uv * wbar[i] + v[i]) / e2;
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulate `G_k^T W_k^{-2} G_k` for every block into the dense,
    /// row-major `n x n` matrix `m`.
    pub(crate) fn add_normal_matrix(&self, g_rows: &[Vec<(usize, f64)>], n: usize, m: &mut [f64]) {
        let add_outer = |row: &[(usize, f64)], scale: f64, m: &mut [f64]| {
            for &(i, vi) in row {
                let svi = scale * vi;
                for &(j, vj) in row {
                    m[i * n + j] += svi * vj;
                }
            }
        };
        for (off, b) in &self.blocks {
            match b {
                BlockScaling::Orthant(w) => {
                    for (i, wi) in w.iter().enumerate() {
                        add_outer(&g_rows[off + i], 1.0 / (wi * wi), m);
                    }
                }
                BlockScaling::Soc { eta, wbar } => {
                    let e2 = eta * eta;
                    // q = G_k^T J wbar, kept sparse through a dense scratch.
                    let mut q = vec![0.0; n];
                    let mut touched = Vec::new();
                    for (i, wi) in wbar.iter().enumerate() {
                        let coef = if i == 0 { *wi } else { -wi };
                        for &(j, v) in &g_rows[off + i] {
                            if q[j] == 0.0 {
                                touched.push(j);
                            }
                            q[j] += coef * v;
                        }
                        let sign = if i == 0 { -1.0 } else { 1.0 };
                        add_outer(&g_rows[off + i], sign / e2, m);
                    }
                    touched.sort_unstable();
                    touched.dedup();
                    for &i in &touched {
                        let qi = 2.0 * q[i] / e2;
                        for &j in &touched {
                            m[i * n + j] += qi * q[j];
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Mode {
    Forward,
    Inverse,
    InverseSquare,
}
