use log::trace;

use super::cones::{self, degree, dot, identity, jordan_divide, jordan_product, max_step, norm, NtScaling};
use super::kkt::QuasiDefiniteLdl;
use super::program::{ConicProgram, Sense};
use super::{ConicSolution, KktResiduals, SolveStatus, SolverOptions};
use crate::Result;

const STEP_FRACTION: f64 = 0.99;
const DYNAMIC_REG: f64 = 1e-8;

/// Problem data in minimisation form.
struct Data<'a> {
    n: usize,
    p: usize,
    m: usize,
    c: Vec<f64>,
    prog: &'a ConicProgram,
}

impl Data<'_> {
    fn a(&self, x: &[f64]) -> Vec<f64> {
        self.prog.eq_matrix.mul(x)
    }
    fn at(&self, y: &[f64]) -> Vec<f64> {
        self.prog.eq_matrix.mul_t(y)
    }
    fn g(&self, x: &[f64]) -> Vec<f64> {
        self.prog.cone_matrix.mul(x)
    }
    fn gt(&self, z: &[f64]) -> Vec<f64> {
        self.prog.cone_matrix.mul_t(z)
    }
    fn b(&self) -> &[f64] {
        &self.prog.eq_rhs
    }
    fn h(&self) -> &[f64] {
        &self.prog.cone_rhs
    }
}

/// Cone scaling used inside the KKT system; `None` stands for the identity.
type Scaling<'s> = Option<&'s NtScaling>;

struct Kkt<'a> {
    ldl: QuasiDefiniteLdl,
    scaling: Scaling<'a>,
}

fn h_inv(sc: Scaling, v: &[f64]) -> Vec<f64> {
    sc.map_or_else(|| v.to_vec(), |w| w.apply_inv_sq(v))
}

fn h_apply(sc: Scaling, v: &[f64]) -> Vec<f64> {
    sc.map_or_else(|| v.to_vec(), |w| w.apply_sq(v))
}

impl<'a> Kkt<'a> {
    fn new(d: &Data, scaling: Scaling<'a>, reg: f64) -> Self {
        let (n, p) = (d.n, d.p);
        let dim = n + p;
        let mut m = vec![0.0; n * n];
        match scaling {
            Some(w) => w.add_normal_matrix(&d.prog.cone_matrix.rows, n, &mut m),
            None => {
                for row in &d.prog.cone_matrix.rows {
                    for &(i, vi) in row {
                        for &(j, vj) in row {
                            m[i * n + j] += vi * vj;
                        }
                    }
                }
            }
        }
        let mut k = vec![0.0; dim * dim];
        for i in 0..n {
            k[i * dim..i * dim + n].copy_from_slice(&m[i * n..(i + 1) * n]);
            k[i * dim + i] += reg;
        }
        for (r, row) in d.prog.eq_matrix.rows.iter().enumerate() {
            for &(j, v) in row {
                k[(n + r) * dim + j] += v;
                k[j * dim + n + r] += v;
            }
            k[(n + r) * dim + n + r] -= reg;
        }
        Self {
            ldl: QuasiDefiniteLdl::factor(k, dim, n, DYNAMIC_REG),
            scaling,
        }
    }

    fn reduced_solve(&self, d: &Data, r1: &[f64], r2: &[f64], r3: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t = h_inv(self.scaling, r3);
        let gt = d.gt(&t);
        let mut rhs: Vec<f64> = r1.iter().zip(&gt).map(|(a, b)| a + b).collect();
        rhs.extend_from_slice(r2);
        self.ldl.solve(&mut rhs);
        let dy = rhs.split_off(d.n);
        let dx = rhs;
        let gdx = d.g(&dx);
        let dz = h_inv(self.scaling, &gdx).iter().zip(&t).map(|(a, b)| a - b).collect();
        (dx, dy, dz)
    }

    /// Solve `[0 A^T G^T; A 0 0; G 0 -H] [dx; dy; dz] = [r1; r2; r3]` with
    /// iterative refinement on the unreduced system.
    fn solve(&self, d: &Data, r1: &[f64], r2: &[f64], r3: &[f64], steps: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut dx, mut dy, mut dz) = self.reduced_solve(d, r1, r2, r3);
        let scale = 1.0 + norm(r1).max(norm(r2)).max(norm(r3));
        for _ in 0..steps {
            let aty = d.at(&dy);
            let gtz = d.gt(&dz);
            let e1: Vec<f64> = (0..d.n).map(|i| r1[i] - aty[i] - gtz[i]).collect();
            let adx = d.a(&dx);
            let e2: Vec<f64> = (0..d.p).map(|i| r2[i] - adx[i]).collect();
            let gdx = d.g(&dx);
            let hdz = h_apply(self.scaling, &dz);
            let e3: Vec<f64> = (0..d.m).map(|i| r3[i] - gdx[i] + hdz[i]).collect();
            let err = norm(&e1).max(norm(&e2)).max(norm(&e3));
            if err <= 1e-15 * scale {
                break;
            }
            let (cx, cy, cz) = self.reduced_solve(d, &e1, &e2, &e3);
            axpy(1.0, &cx, &mut dx);
            axpy(1.0, &cy, &mut dy);
            axpy(1.0, &cz, &mut dz);
        }
        (dx, dy, dz)
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Metrics {
    pres: f64,
    dres: f64,
    gap_rel: f64,
    pcost: f64,
    dcost: f64,
}

fn metrics(d: &Data, it: &Iterate) -> Metrics {
    let tau = it.tau;
    let ax = d.a(&it.x);
    let ry: Vec<f64> = ax.iter().zip(d.b()).map(|(a, b)| a / tau - b).collect();
    let gx = d.g(&it.x);
    let rz: Vec<f64> = (0..d.m).map(|i| (gx[i] + it.s[i]) / tau - d.h()[i]).collect();
    let mut rx = d.at(&it.y);
    axpy(1.0, &d.gt(&it.z), &mut rx);
    for i in 0..d.n {
        rx[i] = rx[i] / tau + d.c[i];
    }
    let pres = (norm(&ry) / norm(d.b()).max(1.0)).max(norm(&rz) / norm(d.h()).max(1.0));
    let dres = norm(&rx) / norm(&d.c).max(1.0);
    let pcost = dot(&d.c, &it.x) / tau;
    let dcost = -(dot(d.b(), &it.y) + dot(d.h(), &it.z)) / tau;
    let gap = dot(&it.s, &it.z) / (tau * tau);
    Metrics {
        pres,
        dres,
        gap_rel: gap.abs().max((pcost - dcost).abs()) / pcost.abs().min(dcost.abs()).max(1.0),
        pcost,
        dcost,
    }
}

/// Solve `prog` with a homogeneous self-dual interior-point method.
pub fn solve(prog: &ConicProgram, opts: &SolverOptions) -> Result<ConicSolution> {
    prog.validate()?;
    let sign = match prog.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let d = Data {
        n: prog.variables(),
        p: prog.eq_rhs.len(),
        m: prog.cone_rhs.len(),
        c: prog.objective.iter().map(|v| sign * v).collect(),
        prog,
    };
    let cones = &prog.cones;
    let deg = degree(cones) as f64;

    // Initial point from two least-squares style systems with H = I.
    let kkt0 = Kkt::new(&d, None, opts.regularization.max(1e-8));
    let zero_n = vec![0.0; d.n];
    let zero_p = vec![0.0; d.p];
    let zero_m = vec![0.0; d.m];
    let (x0, _, zp) = kkt0.solve(&d, &zero_n, d.b(), d.h(), opts.refinement_steps);
    let mut s0: Vec<f64> = zp.iter().map(|v| -v).collect();
    cones::shift_into_interior(cones, &mut s0);
    let neg_c: Vec<f64> = d.c.iter().map(|v| -v).collect();
    let (_, y0, mut z0) = kkt0.solve(&d, &neg_c, &zero_p, &zero_m, opts.refinement_steps);
    cones::shift_into_interior(cones, &mut z0);
    let mut it = Iterate {
        x: x0,
        y: y0,
        z: z0,
        s: s0,
        tau: 1.0,
        kappa: 1.0,
    };
    let e = identity(cones, d.m);

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut best: Option<(f64, Iterate)> = None;
    let mut since_best = 0;
    for k in 0..=opts.max_iter {
        iterations = k;
        let met = metrics(&d, &it);
        trace!(
            "ipm {k:3}: pcost {:+.9e} dcost {:+.9e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
            met.pcost,
            met.dcost,
            met.pres,
            met.dres,
            met.gap_rel,
            it.tau,
            it.kappa
        );
        if !(met.pres.is_finite() && met.dres.is_finite() && met.gap_rel.is_finite()) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        if met.pres <= opts.feas_tol && met.dres <= opts.feas_tol && met.gap_rel <= opts.rel_tol.max(opts.abs_tol) {
            status = SolveStatus::Optimal;
            break;
        }
        let score = met.pres.max(met.dres).max(met.gap_rel);
        // TODO: fall back to factoring the augmented system when the normal
        // equations stall just short of the reduced tolerance.
        // Near the solution the reduced KKT system loses accuracy; once a
        // point within the reduced tolerance is known, stop as soon as
        // progress stalls or reverses.
        if let Some((b, _)) = &best {
            if *b <= opts.reduced_tol && (score > 10.0 * b || since_best >= 3) {
                status = SolveStatus::NumericalFailure;
                break;
            }
        }
        since_best += 1;
        if best.as_ref().map_or(true, |(b, _)| score < *b) {
            since_best = 0;
            best = Some((
                score,
                Iterate {
                    x: it.x.clone(),
                    y: it.y.clone(),
                    z: it.z.clone(),
                    s: it.s.clone(),
                    tau: it.tau,
                    kappa: it.kappa,
                },
            ));
        }

        // Certificates of infeasibility are scale invariant.
        let hz_by = dot(d.h(), &it.z) + dot(d.b(), &it.y);
        if hz_by < 0.0 {
            let mut r = d.at(&it.y);
            axpy(1.0, &d.gt(&it.z), &mut r);
            if norm(&r) <= opts.feas_tol * (-hz_by) && it.kappa > it.tau * 1e-3 {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        let cx = dot(&d.c, &it.x);
        if cx < 0.0 {
            let ax = d.a(&it.x);
            let gx = d.g(&it.x);
            let gs: Vec<f64> = gx.iter().zip(&it.s).map(|(a, b)| a + b).collect();
            if norm(&ax).max(norm(&gs)) <= opts.feas_tol * (-cx) && it.kappa > it.tau * 1e-3 {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if k == opts.max_iter {
            break;
        }

        let Some(w) = NtScaling::new(cones, &it.s, &it.z) else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let lambda = w.apply(&it.z);
        let kkt = Kkt::new(&d, Some(&w), opts.regularization);

        // Residuals of the embedding.
        let mut rx = d.at(&it.y);
        axpy(1.0, &d.gt(&it.z), &mut rx);
        axpy(it.tau, &d.c, &mut rx);
        let mut ry = d.a(&it.x);
        axpy(-it.tau, d.b(), &mut ry);
        let mut rz = d.g(&it.x);
        axpy(1.0, &it.s, &mut rz);
        axpy(-it.tau, d.h(), &mut rz);
        let rtau = it.kappa + dot(&d.c, &it.x) + dot(d.b(), &it.y) + dot(d.h(), &it.z);

        let (x1, y1, z1) = kkt.solve(&d, &neg_c, d.b(), d.h(), opts.refinement_steps);
        let denom1 = dot(&d.c, &x1) + dot(d.b(), &y1) + dot(d.h(), &z1) - it.kappa / it.tau;

        let direction = |ds_target: &[f64], dkappa_target: f64, eta: f64| {
            let r1: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
            let r2: Vec<f64> = ry.iter().map(|v| -eta * v).collect();
            let wl = w.apply(&jordan_divide(cones, &lambda, ds_target));
            let r3: Vec<f64> = (0..d.m).map(|i| -eta * rz[i] + wl[i]).collect();
            let (x2, y2, z2) = kkt.solve(&d, &r1, &r2, &r3, opts.refinement_steps);
            let num = dkappa_target / it.tau - eta * rtau - (dot(&d.c, &x2) + dot(d.b(), &y2) + dot(d.h(), &z2));
            let dtau = num / denom1;
            let mut dx = x2;
            axpy(dtau, &x1, &mut dx);
            let mut dy = y2;
            axpy(dtau, &y1, &mut dy);
            let mut dz = z2;
            axpy(dtau, &z1, &mut dz);
            let wdz = w.apply_sq(&dz);
            let ds: Vec<f64> = (0..d.m).map(|i| -wl[i] - wdz[i]).collect();
            let dkappa = -(dkappa_target + it.kappa * dtau) / it.tau;
            (dx, dy, dz, ds, dtau, dkappa)
        };

        let step_to_boundary = |dz: &[f64], ds: &[f64], dtau: f64, dkappa: f64| {
            let mut a = max_step(cones, &it.s, ds, f64::INFINITY).min(max_step(cones, &it.z, dz, f64::INFINITY));
            if dtau < 0.0 {
                a = a.min(-it.tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-it.kappa / dkappa);
            }
            a
        };

        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (deg + 1.0);
        let ll = jordan_product(cones, &lambda, &lambda);
        let (_, _, dz_a, ds_a, dtau_a, dkappa_a) = direction(&ll, it.tau * it.kappa, 1.0);
        let alpha_aff = step_to_boundary(&dz_a, &ds_a, dtau_a, dkappa_a).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        let corr = jordan_product(cones, &w.apply_inv(&ds_a), &w.apply(&dz_a));
        let ds_target: Vec<f64> = (0..d.m).map(|i| ll[i] + corr[i] - sigma * mu * e[i]).collect();
        let dk_target = it.tau * it.kappa + dtau_a * dkappa_a - sigma * mu;
        let (dx, dy, dz, ds, dtau, dkappa) = direction(&ds_target, dk_target, 1.0 - sigma);
        let alpha = (STEP_FRACTION * step_to_boundary(&dz, &ds, dtau, dkappa)).min(1.0);
        if !(alpha.is_finite() && alpha > 1e-14) {
            status = SolveStatus::NumericalFailure;
            break;
        }
        axpy(alpha, &dx, &mut it.x);
        axpy(alpha, &dy, &mut it.y);
        axpy(alpha, &dz, &mut it.z);
        axpy(alpha, &ds, &mut it.s);
        it.tau += alpha * dtau;
        it.kappa += alpha * dkappa;
    }

    if matches!(status, SolveStatus::MaxIter | SolveStatus::NumericalFailure) {
        if let Some((score, b)) = best {
            it = b;
            if score <= opts.reduced_tol {
                status = SolveStatus::Optimal;
            }
        }
    }
    let met = metrics(&d, &it);
    let (scale, primal_objective, dual_objective) = match status {
        SolveStatus::Infeasible | SolveStatus::Unbounded => (1.0, f64::NAN, f64::NAN),
        _ => (1.0 / it.tau, sign * met.pcost, sign * met.dcost),
    };
    let sc = |v: &[f64]| v.iter().map(|x| x * scale).collect::<Vec<f64>>();
    Ok(ConicSolution {
        status,
        x: sc(&it.x),
        y: sc(&it.y),
        z: sc(&it.z),
        s: sc(&it.s),
        primal_objective,
        dual_objective,
        iterations,
        residuals: KktResiduals {
            primal: met.pres,
            dual: met.dres,
            gap: met.gap_rel,
        },
    })
}
