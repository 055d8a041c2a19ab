use super::{observed_orders, ExperimentReport, Source, Tolerance};
use crate::error::{Error, Result};
use crate::matrices::{basis_chebyshev, MatrixSet};
use crate::mesh::{build_mesh, Mesh, PointFamily, Space};
use crate::stepper::{ChannelSolver, Dealias, FlowState, ForcingMode, StepperConfig};
use crate::transforms::{chebyshev_derivative, evaluate_chebyshev, PhysicalField};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Shift used for inverse iteration: the least stable mode at `Re = 8000`.
pub const REFERENCE_EIGENVALUE: Complex64 = Complex64 {
    re: 0.2470750602,
    im: 2.664410371e-3,
};

/// Least stable Orr-Sommerfeld mode of plane Poiseuille flow at streamwise wavenumber 1.
#[derive(Clone, Debug)]
pub struct OrrSommerfeldCase {
    pub re: f64,
    pub n_x: usize,
    pub family: PointFamily,
    pub lambda: Complex64,
    /// Coefficients in the biharmonic basis, scaled to `max |ξ| = 1` with `ξ` real at the maximum.
    pub xi: Vec<Complex64>,
    pub epsilon: f64,
    /// `‖(A - λB) ξ‖ / ‖ξ‖` of the discrete problem.
    pub residual: f64,
    pub iterations: usize,
    cheb: [Vec<f64>; 2],
    dcheb: [Vec<f64>; 2],
}

impl OrrSommerfeldCase {
    /// `(ξ(x), ξ'(x))`.
    pub fn eval(&self, x: f64) -> (Complex64, Complex64) {
        (
            Complex64::new(
                evaluate_chebyshev(&self.cheb[0], x),
                evaluate_chebyshev(&self.cheb[1], x),
            ),
            Complex64::new(
                evaluate_chebyshev(&self.dcheb[0], x),
                evaluate_chebyshev(&self.dcheb[1], x),
            ),
        )
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// Basis values `φ_j^{(d)}(x_i)` as an `n_q × n` matrix.
fn sampled_basis(n_x: usize, x: &[f64], derivative: usize) -> DMatrix<f64> {
    let n = Space::Biharmonic.len(n_x);
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut c = basis_chebyshev(Space::Biharmonic, j, n_x);
            for _ in 0..derivative {
                c = chebyshev_derivative(&c);
            }
            x.iter().map(|&x| evaluate_chebyshev(&c, x)).collect()
        })
        .collect();
    DMatrix::from_fn(x.len(), n, |i, j| cols[j][i])
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `(A, B)` of the Galerkin problem `A ξ = λ B ξ`.
fn os_matrices(
    re: f64,
    n_x: usize,
    family: PointFamily,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let set = MatrixSet::assemble(n_x, family)?;
    let k4 = set.fourth_biharmonic.to_dense();
    let k2 = set.stiffness_biharmonic.to_dense();
    let k0 = set.mass_biharmonic.to_dense();
    let n_q = n_x + 4;
    let xq = PointFamily::ChebyshevGauss.points(n_q - 1);
    let wq = PointFamily::ChebyshevGauss.weights(n_q - 1);
    let phi = sampled_basis(n_x, &xq, 0);
    let phi2 = sampled_basis(n_x, &xq, 2);
    let vw = DMatrix::from_fn(n_q, 1, |i, _| wq[i] * (1.0 - xq[i] * xq[i]));
    let weighted = DMatrix::from_fn(n_q, phi.ncols(), |i, k| phi[(i, k)] * vw[(i, 0)]);
    let vk2 = weighted.transpose() * &phi2;
    let vk0 = weighted.transpose() * &phi;
    let visc = Complex64::new(0.0, 1.0 / re);
    let a = to_complex(&(vk2 - vk0 + &k0 * 2.0)) + to_complex(&(&k4 - &k2 * 2.0 + &k0)) * visc;
    let b = to_complex(&(k2 - k0));
    Ok((a, b))
}

fn norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves the discrete Orr-Sommerfeld problem for base flow `1 - x²` by
/// shifted inverse iteration about the reference eigenvalue.
pub fn os_eigenproblem(re: f64, n_x: usize, family: PointFamily) -> Result<OrrSommerfeldCase> {
    if n_x < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_x = {n_x} too small for the eigenproblem"
        )));
    }
    let (a, b) = os_matrices(re, n_x, family)?;
    let n = a.nrows();
    let shift = REFERENCE_EIGENVALUE;
    let lu = (&a - &b * shift).lu();
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 / (1.0 + i as f64), 0.0));
    let mut lambda = shift;
    let mut converged = None;
    for it in 1..=60 {
        let y = lu
            .solve(&(&b * &x))
            .ok_or_else(|| Error::Eigen("singular shifted operator".into()))?;
        let ny = norm(&y);
        if !(ny.is_finite() && ny > 0.0) {
            return Err(Error::Eigen("inverse iteration broke down".into()));
        }
        x = y / Complex64::new(ny, 0.0);
        let ax = &a * &x;
        let bx = &b * &x;
        let next = bx.dotc(&ax) / bx.dotc(&bx);
        let delta = (next - lambda).norm();
        lambda = next;
        if it > 2 && delta <= 1e-13 * lambda.norm() {
            converged = Some(it);
            break;
        }
    }
    let iterations = converged.ok_or_else(|| {
        Error::Eigen("inverse iteration did not converge in 60 iterations".into())
    })?;
    let residual = norm(&(&a * &x - &b * &x * lambda)) / norm(&x);

    let cheb_of = |x: &DVector<Complex64>| {
        let mut c = [vec![0.0; n_x + 1], vec![0.0; n_x + 1]];
        for (k, v) in x.iter().enumerate() {
            for (i, s) in basis_chebyshev(Space::Biharmonic, k, n_x)
                .iter()
                .enumerate()
            {
                c[0][i] += s * v.re;
                c[1][i] += s * v.im;
            }
        }
        c
    };
    let c = cheb_of(&x);
    let samples = 8 * n_x;
    let mut peak = Complex64::new(0.0, 0.0);
    for j in 0..=samples {
        let xs = (PI * j as f64 / samples as f64).cos();
        let v = Complex64::new(evaluate_chebyshev(&c[0], xs), evaluate_chebyshev(&c[1], xs));
        if v.norm() > peak.norm() {
            peak = v;
        }
    }
    let scale = peak.conj() / peak.norm_sqr();
    let xi: Vec<Complex64> = x.iter().map(|v| v * scale).collect();
    let c = cheb_of(&DVector::from_vec(xi.clone()));
    let dcheb = [chebyshev_derivative(&c[0]), chebyshev_derivative(&c[1])];
    Ok(OrrSommerfeldCase {
        re,
        n_x,
        family,
        lambda,
        xi,
        epsilon: 1e-7,
        residual,
        iterations,
        cheb: c,
        dcheb,
    })
}

/// Exact linearized velocity at time `t` on `mesh`: the eigenmode travelling
/// with `e^{i(y - λt)}` on top of `1 - x²`.
pub fn os_velocity(case: &OrrSommerfeldCase, mesh: &Mesh, t: f64) -> [PhysicalField; 3] {
    let modes: Vec<(Complex64, Complex64)> = mesh.x.iter().map(|&x| case.eval(x)).collect();
    let y = mesh.y();
    let phase: Vec<Complex64> = y
        .iter()
        .map(|&y| (I * (y - case.lambda * t)).exp())
        .collect();
    let eps = case.epsilon;
    let mut u = PhysicalField::zeros(mesh);
    let mut v = PhysicalField::zeros(mesh);
    for (i, &x) in mesh.x.iter().enumerate() {
        let (xi, dxi) = modes[i];
        for (j, e) in phase.iter().enumerate() {
            let uu = -eps * (I * xi * e).re;
            let vv = 1.0 - x * x + eps * (dxi * e).re;
            for k in 0..mesh.n_z {
                u.data[[i, j, k]] = uu;
                v.data[[i, j, k]] = vv;
            }
        }
    }
    [u, v, PhysicalField::zeros(mesh)]
}

pub fn os_initial_field(case: &OrrSommerfeldCase, mesh: &Mesh) -> [PhysicalField; 3] {
    os_velocity(case, mesh, 0.0)
}

/// `Σ σ_i |a - b|²` over all mesh points and components.
fn weighted_distance(mesh: &Mesh, a: &[PhysicalField; 3], b: &[PhysicalField; 3]) -> f64 {
    let mut s = 0.0;
    for c in 0..3 {
        for (i, w) in mesh.w.iter().enumerate() {
            let pa = a[c].data.index_axis(ndarray::Axis(0), i);
            let pb = b[c].data.index_axis(ndarray::Axis(0), i);
            s += w * pa
                .iter()
                .zip(pb.iter())
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>();
        }
    }
    s
}

fn laminar(mesh: &Mesh) -> [PhysicalField; 3] {
    [
        PhysicalField::zeros(mesh),
        PhysicalField::from_fn(mesh, |x, _, _| 1.0 - x * x),
        PhysicalField::zeros(mesh),
    ]
}

/// Outcome of one linearized-perturbation run.
#[derive(Clone, Debug)]
pub struct OsRun {
    pub dt: f64,
    pub steps: u64,
    pub t: f64,
    /// `‖u - u_exact‖` at the final time.
    pub l2_error: f64,
    /// Trapezoid-rule `∫ E dt` from 0 to the final time.
    pub energy_integral: f64,
    pub energy_final: f64,
}

/// Advances the perturbed Poiseuille flow to `t_end` on an `n_x × n_y × n_z` mesh.
pub fn os_run(case: &OrrSommerfeldCase, mesh: Mesh, dt: f64, t_end: f64) -> Result<OsRun> {
    let mesh = Arc::new(mesh);
    let nu = 1.0 / case.re;
    let solver = ChannelSolver::new(
        mesh.clone(),
        StepperConfig {
            nu,
            dt,
            forcing: ForcingMode::FixedBeta(-2.0 * nu),
            dealias: Dealias::None,
            family: mesh.family,
        },
    )?;
    let base = laminar(&mesh);
    let initial = os_velocity(case, &mesh, 0.0);
    let e_ref = weighted_distance(&mesh, &initial, &base);
    let growth = 2.0 * case.lambda.im;
    let energy = |s: &FlowState| -> Result<f64> {
        let vel = solver.velocity(s)?;
        Ok(weighted_distance(&mesh, &vel, &base) / e_ref - (growth * s.t).exp())
    };
    let mut state = solver.initialize_unchecked(&initial, &os_velocity(case, &mesh, dt))?;
    let steps = (t_end / dt).round() as u64;
    let mut e_prev = 0.0;
    let mut integral = 0.0;
    if steps >= 1 {
        let e = energy(&state)?;
        integral += 0.5 * dt * (e_prev + e);
        e_prev = e;
    } else {
        state = solver.project_unchecked(&initial)?;
    }
    while state.kappa < steps {
        solver.step(&mut state)?;
        let e = energy(&state)?;
        integral += 0.5 * dt * (e_prev + e);
        e_prev = e;
    }
    let exact = os_velocity(case, &mesh, state.t);
    let l2_error = weighted_distance(&mesh, &solver.velocity(&state)?, &exact).sqrt();
    Ok(OsRun {
        dt,
        steps,
        t: state.t,
        l2_error,
        energy_integral: integral,
        energy_final: e_prev,
    })
}

#[derive(Clone, Debug)]
pub struct OsTimeOptions {
    pub dt_list: Vec<f64>,
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub family: PointFamily,
    pub re: f64,
    pub epsilon: f64,
    pub t_end: f64,
}

impl Default for OsTimeOptions {
    fn default() -> Self {
        OsTimeOptions {
            dt_list: vec![0.1, 1.0 / 15.0, 0.05, 0.04, 1.0 / 30.0, 1.0 / 35.0, 0.025],
            n_x: 128,
            n_y: 8,
            n_z: 2,
            family: PointFamily::ChebyshevGauss,
            re: 8000.0,
            epsilon: 1e-7,
            t_end: 50.0,
        }
    }
}

const TIME_TABLE: [(f64, f64, f64); 7] = [
    (0.1, 2.9005e-09, 1.2775e-02),
    (1.0 / 15.0, 1.2877e-09, 5.3068e-03),
    (0.05, 7.2559e-10, 2.8939e-03),
    (0.04, 4.6445e-10, 1.8138e-03),
    (1.0 / 30.0, 3.2257e-10, 1.2418e-03),
    (1.0 / 35.0, 2.3701e-10, 9.0307e-04),
    (0.025, 1.8148e-10, 6.8608e-04),
];

fn table_lookup<T: Copy>(table: &[(f64, T)], key: f64) -> Option<T> {
    table
        .iter()
        .find(|(k, _)| (k - key).abs() <= 1e-9 * key.abs())
        .map(|(_, v)| *v)
}

/// Temporal convergence of the perturbation error and of `∫E dt` on a fixed mesh.
pub fn os_convergence_time(opts: &OsTimeOptions) -> Result<ExperimentReport> {
    let case = os_eigenproblem(opts.re, opts.n_x, opts.family)?.with_epsilon(opts.epsilon);
    let mut report = ExperimentReport::new(
        "os_time",
        &[
            "dt",
            "l2_error",
            "l2_order",
            "energy_integral",
            "energy_order",
        ],
    );
    let mut runs = Vec::new();
    for &dt in &opts.dt_list {
        let mesh = build_mesh(
            opts.n_x,
            opts.n_y,
            opts.n_z,
            2.0 * PI,
            2.0 * PI,
            opts.family,
        )?;
        runs.push(os_run(&case, mesh, dt, opts.t_end)?);
    }
    let dts: Vec<f64> = runs.iter().map(|r| r.dt).collect();
    let l2: Vec<f64> = runs.iter().map(|r| r.l2_error).collect();
    let en: Vec<f64> = runs.iter().map(|r| r.energy_integral.abs()).collect();
    let l2_orders = observed_orders(&l2, &dts);
    let en_orders = observed_orders(&en, &dts);
    let l2_ref: Vec<(f64, f64)> = TIME_TABLE.iter().map(|r| (r.0, r.1)).collect();
    let en_ref: Vec<(f64, f64)> = TIME_TABLE.iter().map(|r| (r.0, r.2)).collect();
    let standard =
        opts.n_x == 128 && opts.re == 8000.0 && opts.epsilon == 1e-7 && opts.t_end == 50.0;
    for (i, r) in runs.iter().enumerate() {
        let (lo, eo) = if i == 0 {
            (0.0, 0.0)
        } else {
            (l2_orders[i - 1], en_orders[i - 1])
        };
        report
            .table
            .push(vec![r.dt, r.l2_error, lo, r.energy_integral, eo]);
        let p = [("dt", format!("{}", r.dt))];
        let (lref, eref) = if standard {
            (table_lookup(&l2_ref, r.dt), table_lookup(&en_ref, r.dt))
        } else {
            (None, None)
        };
        let tol = |reference: Option<f64>| {
            if reference.is_some() {
                Tolerance::Factor(3.0)
            } else {
                Tolerance::None
            }
        };
        report.push(
            &p,
            "l2_error",
            r.l2_error,
            lref,
            tol(lref),
            Source::Reference,
        );
        report.push(
            &p,
            "energy_integral",
            r.energy_integral,
            eref,
            tol(eref),
            Source::Reference,
        );
        if i > 0 {
            report.push(
                &p,
                "l2_order",
                lo,
                None,
                Tolerance::Range(1.9, 2.1),
                Source::Reference,
            );
            report.push(
                &p,
                "energy_order",
                eo,
                None,
                Tolerance::Range(1.9, 2.2),
                Source::Reference,
            );
        }
    }
    for (i, a) in runs.iter().enumerate() {
        for b in runs.iter().skip(i + 1) {
            if (a.dt / b.dt - 2.0).abs() < 1e-9 {
                report.push(
                    &[
                        ("dt", format!("{}", a.dt)),
                        ("dt_half", format!("{}", b.dt)),
                    ],
                    "halving_reduction",
                    a.l2_error / b.l2_error,
                    None,
                    Tolerance::Range(4.0 * 0.85, 4.0 * 1.15),
                    Source::Property,
                );
            }
        }
    }
    report.push(
        &[("n_x", opts.n_x.to_string())],
        "eigenvalue_error",
        (case.lambda - REFERENCE_EIGENVALUE).norm(),
        None,
        Tolerance::AtMost(1e-6),
        Source::Reference,
    );
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct OsSpaceOptions {
    pub nx_list: Vec<usize>,
    pub families: Vec<PointFamily>,
    pub n_y: usize,
    pub n_z: usize,
    pub re: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    /// The eigenmode is computed with at least this many modes.
    pub reference_n_x: usize,
}

impl Default for OsSpaceOptions {
    fn default() -> Self {
        OsSpaceOptions {
            nx_list: vec![16, 32, 64, 128, 256],
            families: vec![
                PointFamily::ChebyshevGauss,
                PointFamily::ChebyshevGaussLobatto,
            ],
            n_y: 8,
            n_z: 2,
            re: 8000.0,
            epsilon: 1e-7,
            dt: 1e-3,
            t_end: 0.05,
            reference_n_x: 128,
        }
    }
}

const SPACE_TABLE_GC: [(f64, f64); 5] = [
    (16.0, 3.23081791e-01),
    (32.0, 5.71635963e-03),
    (64.0, 6.99681587e-08),
    (128.0, 5.06389229e-08),
    (256.0, 4.89447535e-08),
];

/// Error of the perturbation after a fixed short time as a function of `n_x`.
pub fn os_convergence_space(opts: &OsSpaceOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "os_space",
        &["n_x", "family", "l2_error_over_epsilon", "energy_integral"],
    );
    let standard = opts.re == 8000.0 && opts.dt == 1e-3 && opts.t_end == 0.05;
    for &family in &opts.families {
        let mut previous: Option<f64> = None;
        let mut reference_case: Option<OrrSommerfeldCase> = None;
        for &n_x in &opts.nx_list {
            let ref_n = opts.reference_n_x.max(n_x);
            let case = match &reference_case {
                Some(c) if c.n_x == ref_n => c.clone(),
                _ => {
                    let c = os_eigenproblem(opts.re, ref_n, family)?.with_epsilon(opts.epsilon);
                    reference_case = Some(c.clone());
                    c
                }
            };
            let mesh = build_mesh(n_x, opts.n_y, opts.n_z, 2.0 * PI, 2.0 * PI, family)?;
            let run = os_run(&case, mesh, opts.dt, opts.t_end)?;
            let err = run.l2_error / opts.epsilon;
            report.table.push(vec![
                n_x as f64,
                if family == PointFamily::ChebyshevGauss {
                    0.0
                } else {
                    1.0
                },
                err,
                run.energy_integral,
            ]);
            let p = [
                ("n_x", n_x.to_string()),
                ("family", family.short_name().to_string()),
            ];
            let gc_ref = if standard && family == PointFamily::ChebyshevGauss {
                table_lookup(&SPACE_TABLE_GC, n_x as f64)
            } else {
                None
            };
            let tol = match (gc_ref, n_x) {
                (Some(_), 16 | 32) => Tolerance::Factor(3.0),
                (Some(_), 64) => Tolerance::Factor(5.0),
                _ if n_x > 64 => Tolerance::AtMost(1e-7),
                _ => Tolerance::None,
            };
            let source = if gc_ref.is_some() {
                Source::Reference
            } else {
                Source::Property
            };
            report.push(&p, "l2_error_over_epsilon", err, gc_ref, tol, source);
            report.push(
                &p,
                "energy_integral",
                run.energy_integral,
                None,
                Tolerance::None,
                Source::Measurement,
            );
            if let Some(prev) = previous {
                if n_x <= 64 {
                    report.push(
                        &p,
                        "decay",
                        err / prev,
                        None,
                        Tolerance::AtMost(1.0),
                        Source::Property,
                    );
                }
            }
            previous = Some(err);
        }
    }
    Ok(report)
}
