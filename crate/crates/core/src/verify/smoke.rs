use super::{ExperimentReport, Source, Tolerance};
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, Mesh, PointFamily, Space};
use crate::stepper::{ChannelSolver, Dealias, FlowState, ForcingMode, StepperConfig};
use crate::transforms::{
    chebyshev_derivative, evaluate_chebyshev, shen_to_chebyshev, PhysicalField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::io::BufRead;
use std::sync::Arc;

/// Laminar profile `u_c (1 - x²)` in the streamwise component plus a
/// divergence-free perturbation of peak magnitude `amplitude` that satisfies
/// no-slip and survives 2/3 truncation.
pub fn solenoidal_perturbation(
    mesh: &Mesh,
    u_c: f64,
    amplitude: f64,
    seed: u64,
) -> [PhysicalField; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let my = ((mesh.n_y as i64 - 1) / 3).min(3);
    let mz = ((mesh.n_z as i64 - 1) / 3).min(3);
    let (ky, kz) = (2.0 * PI / mesh.l_y, 2.0 * PI / mesh.l_z);
    // (k_y, k_z, amplitude, phase, which stream function)
    let mut modes = Vec::new();
    for m in -my..=my {
        for n in 0..=mz {
            if m == 0 && n == 0 {
                continue;
            }
            for which in 0..2 {
                if (which == 0 && m == 0) || (which == 1 && n == 0) {
                    continue;
                }
                modes.push((
                    ky * m as f64,
                    kz * n as f64,
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.0..2.0 * PI),
                    which,
                ));
            }
        }
    }
    let eval = |x: f64, y: f64, z: f64| {
        let s = (1.0 - x * x).powi(2);
        let ds = -4.0 * x * (1.0 - x * x);
        let mut p = [0.0; 3];
        for &(a, b, c, phi, which) in &modes {
            let arg = a * y + b * z + phi;
            let (sn, cs) = arg.sin_cos();
            if which == 0 {
                p[0] -= c * a * s * sn;
                p[1] -= c * ds * cs;
            } else {
                p[0] -= c * b * s * sn;
                p[2] -= c * ds * cs;
            }
        }
        p
    };
    let mut pert = [
        PhysicalField::zeros(mesh),
        PhysicalField::zeros(mesh),
        PhysicalField::zeros(mesh),
    ];
    let (yv, zv) = (mesh.y(), mesh.z());
    for (i, &x) in mesh.x.iter().enumerate() {
        for (j, &y) in yv.iter().enumerate() {
            for (k, &z) in zv.iter().enumerate() {
                let p = eval(x, y, z);
                for c in 0..3 {
                    pert[c].data[[i, j, k]] = p[c];
                }
            }
        }
    }
    let peak = pert.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    for f in pert.iter_mut() {
        f.data.mapv_inplace(|v| v * scale);
    }
    for (i, &x) in mesh.x.iter().enumerate() {
        pert[1]
            .data
            .index_axis_mut(ndarray::Axis(0), i)
            .mapv_inplace(|v| v + u_c * (1.0 - x * x));
    }
    pert
}

#[derive(Clone, Debug)]
pub struct SmokeOptions {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub l_y: f64,
    pub l_z: f64,
    pub re_tau: f64,
    pub dt: f64,
    pub steps: usize,
    pub bulk_velocity: f64,
    pub perturbation: f64,
    /// Hold the flux at its initial value; otherwise `beta` is fixed.
    pub constant_flux: bool,
    pub beta: f64,
    pub dealias: Dealias,
    pub family: PointFamily,
    pub seed: u64,
    pub continuity_tolerance: f64,
    pub flux_tolerance: f64,
}

impl Default for SmokeOptions {
    fn default() -> Self {
        SmokeOptions {
            n_x: 64,
            n_y: 64,
            n_z: 32,
            l_y: 4.0 * PI,
            l_z: 4.0 * PI / 3.0,
            re_tau: 180.0,
            dt: 1e-3,
            steps: 500,
            bulk_velocity: 15.7,
            perturbation: 2.0,
            constant_flux: true,
            beta: 0.0,
            dealias: Dealias::TwoThirds,
            family: PointFamily::ChebyshevGauss,
            seed: 11,
            continuity_tolerance: 1e-10,
            flux_tolerance: 0.01,
        }
    }
}

pub struct SmokeOutcome {
    pub report: ExperimentReport,
    pub solver: ChannelSolver,
    pub state: FlowState,
}

/// Runs a perturbed laminar channel for a bounded number of steps and checks
/// finiteness, bounded energy, the continuity residual after every step and,
/// under flux control, the flux. With `β = 0` and fixed forcing the energy
/// must decay monotonically.
///
/// `on_step` sees the state after every step.
pub fn channel_smoke(
    opts: &SmokeOptions,
    mut on_step: impl FnMut(&ChannelSolver, &FlowState) -> Result<()>,
) -> Result<SmokeOutcome> {
    let mesh = Arc::new(build_mesh(
        opts.n_x,
        opts.n_y,
        opts.n_z,
        opts.l_y,
        opts.l_z,
        opts.family,
    )?);
    let nu = 1.0 / opts.re_tau;
    let u0 = solenoidal_perturbation(
        &mesh,
        1.5 * opts.bulk_velocity,
        opts.perturbation,
        opts.seed,
    );
    let probe = ChannelSolver::new(
        mesh.clone(),
        StepperConfig {
            nu,
            dt: opts.dt,
            forcing: ForcingMode::FixedBeta(opts.beta),
            dealias: opts.dealias,
            family: opts.family,
        },
    )?;
    let target = probe.flux(&probe.project(&u0)?);
    let forcing = if opts.constant_flux {
        ForcingMode::ConstantFlux(target)
    } else {
        ForcingMode::FixedBeta(opts.beta)
    };
    drop(probe);
    let solver = ChannelSolver::new(
        mesh,
        StepperConfig {
            nu,
            dt: opts.dt,
            forcing,
            dealias: opts.dealias,
            family: opts.family,
        },
    )?;
    let mut state = solver.initialize(&u0, &u0)?;
    let e0 = solver.kinetic_energy(&state)?;
    let mut report = ExperimentReport::new(
        "channel_smoke",
        &[
            "step",
            "t",
            "flux",
            "beta",
            "energy",
            "continuity",
            "divergence",
        ],
    );
    let mut worst_cont = solver.continuity_residual(&state);
    let mut worst_flux = 0.0_f64;
    let mut max_energy = e0;
    let mut increases = 0usize;
    let mut prev_energy = e0;
    let mut finite = true;
    for _ in 0..opts.steps {
        match solver.step(&mut state) {
            Ok(_) => {}
            Err(Error::NonFinite(_)) => {
                finite = false;
                break;
            }
            Err(e) => return Err(e),
        }
        let cont = solver.continuity_residual(&state);
        let flux = solver.flux(&state);
        let energy = solver.kinetic_energy(&state)?;
        worst_cont = worst_cont.max(cont);
        worst_flux = worst_flux.max((flux - target).abs() / target.abs());
        max_energy = max_energy.max(energy);
        if energy > prev_energy * (1.0 + 1e-12) {
            increases += 1;
        }
        prev_energy = energy;
        report.table.push(vec![
            state.kappa as f64,
            state.t,
            flux,
            state.beta,
            energy,
            cont,
            solver.divergence_residual(&state),
        ]);
        on_step(&solver, &state)?;
    }
    let p = [
        ("steps", opts.steps.to_string()),
        ("re_tau", opts.re_tau.to_string()),
    ];
    report.push(
        &p,
        "finite",
        finite as u8 as f64,
        None,
        Tolerance::AtLeast(1.0),
        Source::Property,
    );
    report.push(
        &p,
        "max_continuity_residual",
        worst_cont,
        None,
        Tolerance::AtMost(opts.continuity_tolerance),
        Source::Property,
    );
    report.push(
        &p,
        "energy_growth",
        max_energy / e0,
        None,
        Tolerance::AtMost(4.0),
        Source::Property,
    );
    if opts.constant_flux {
        report.push(
            &p,
            "max_relative_flux_deviation",
            worst_flux,
            None,
            Tolerance::AtMost(opts.flux_tolerance),
            Source::Property,
        );
    } else if opts.beta == 0.0 {
        report.push(
            &p,
            "energy_increases",
            increases as f64,
            None,
            Tolerance::AtMost(0.0),
            Source::Property,
        );
    }
    Ok(SmokeOutcome {
        report,
        solver,
        state,
    })
}

/// Chebyshev coefficients of the plane-averaged streamwise velocity.
fn mean_coefficients(solver: &ChannelSolver, state: &FlowState) -> Vec<f64> {
    let mesh = solver.mesh();
    let plane = (mesh.n_y * mesh.n_z) as f64;
    let nd = Space::Dirichlet.len(mesh.n_x);
    let v: Vec<f64> = (0..nd)
        .map(|l| state.v.data[[l, 0, 0]].re / plane)
        .collect();
    let mut c = vec![0.0; mesh.n_x + 1];
    shen_to_chebyshev(&v, &mut c, Space::Dirichlet);
    c
}

/// Plane-averaged streamwise velocity at the wall-normal positions `x`.
pub fn mean_profile(solver: &ChannelSolver, state: &FlowState, x: &[f64]) -> Vec<(f64, f64)> {
    let c = mean_coefficients(solver, state);
    x.iter().map(|&x| (x, evaluate_chebyshev(&c, x))).collect()
}

/// Reads whitespace- or comma-separated `(a, b)` pairs; `#` starts a comment.
pub fn read_profile(reader: impl BufRead) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!("line {}: cannot parse {s:?}", no + 1))
            })
        };
        if cols.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "line {}: need two columns",
                no + 1
            )));
        }
        out.push((parse(cols[0])?, parse(cols[1])?));
    }
    Ok(out)
}

/// Compares the mean profile in wall units against reference `(y⁺, U⁺)` pairs
/// measured from the lower wall. Recorded only; no pass band.
pub fn compare_profile(
    solver: &ChannelSolver,
    state: &FlowState,
    reference: &[(f64, f64)],
) -> ExperimentReport {
    let c = mean_coefficients(solver, state);
    let dc = chebyshev_derivative(&c);
    let nu = solver.config().nu;
    let u_tau = (nu * evaluate_chebyshev(&dc, -1.0).abs()).sqrt();
    let re_tau = u_tau / nu;
    let mut report =
        ExperimentReport::new("profile", &["y_plus", "u_plus", "reference", "difference"]);
    let (mut max_diff, mut sq, mut sq_ref) = (0.0_f64, 0.0, 0.0);
    for &(yp, up) in reference {
        let x = (yp / re_tau - 1.0).clamp(-1.0, 1.0);
        let ours = evaluate_chebyshev(&c, x) / u_tau;
        report.table.push(vec![yp, ours, up, ours - up]);
        max_diff = max_diff.max((ours - up).abs());
        sq += (ours - up).powi(2);
        sq_ref += up * up;
    }
    let p = [("points", reference.len().to_string())];
    report.push(
        &p,
        "re_tau",
        re_tau,
        None,
        Tolerance::None,
        Source::Measurement,
    );
    report.push(
        &p,
        "max_difference",
        max_diff,
        None,
        Tolerance::None,
        Source::Measurement,
    );
    report.push(
        &p,
        "relative_l2_difference",
        (sq / sq_ref.max(f64::MIN_POSITIVE)).sqrt(),
        None,
        Tolerance::None,
        Source::Measurement,
    );
    report
}
