use super::smoke::solenoidal_perturbation;
use super::{ExperimentReport, Source, Tolerance};
use crate::error::Result;
use crate::matrices::MatrixSet;
use crate::mesh::{build_mesh, PointFamily};
use crate::solvers::{BiharmonicLu, HelmholtzLu};
use crate::stepper::{ChannelSolver, Dealias, ForcingMode, StepperConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::hint::black_box;
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct SolverScalingOptions {
    pub nx_list: Vec<usize>,
    pub z: f64,
    pub nu: f64,
    pub dt: f64,
    /// Minimum wall time of one trial.
    pub trial_time: Duration,
    pub trials: usize,
    /// Ratios are checked only where the smaller size is at least this.
    pub check_from: usize,
    pub seed: u64,
}

impl Default for SolverScalingOptions {
    fn default() -> Self {
        SolverScalingOptions {
            nx_list: vec![64, 128, 256, 512, 1024, 2048, 4096, 8192],
            z: 200.0,
            nu: 1.0 / 5200.0,
            dt: 1e-5,
            trial_time: Duration::from_millis(40),
            trials: 7,
            check_from: 512,
            seed: 1,
        }
    }
}

/// Smallest mean time of `f` over `trials` trials of at least `trial_time` each.
fn min_mean_time(trial_time: Duration, trials: usize, mut f: impl FnMut()) -> f64 {
    let start = Instant::now();
    let mut reps = 0usize;
    while start.elapsed() < trial_time / 4 || reps < 3 {
        f();
        reps += 1;
    }
    let per = start.elapsed().as_secs_f64() / reps as f64;
    let reps = ((trial_time.as_secs_f64() / per).ceil() as usize).max(1);
    (0..trials)
        .map(|_| {
            let t = Instant::now();
            for _ in 0..reps {
                f();
            }
            t.elapsed().as_secs_f64() / reps as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Time of one complex solve with each implicit operator as a function of
/// `n_x`, and the ratio `t(2N) / (2 t(N))`, which is unity for linear cost.
///
/// Solves run on the calling thread only.
pub fn solver_scaling(opts: &SolverScalingOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "solver_scaling",
        &[
            "n_x",
            "biharmonic",
            "biharmonic_ratio",
            "helmholtz",
            "helmholtz_ratio",
        ],
    );
    let z2 = opts.z * opts.z;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut previous: Option<(usize, f64, f64)> = None;
    for &n_x in &opts.nx_list {
        let set = MatrixSet::assemble(n_x, PointFamily::ChebyshevGauss)?;
        let bh = BiharmonicLu::from_set(&set, opts.nu, opts.dt, z2)?;
        let hh = HelmholtzLu::from_set(&set, opts.nu, opts.dt, z2)?;
        let rhs: Vec<Complex64> = (0..n_x + 1)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        let mut buf = rhs.clone();
        let tb = min_mean_time(opts.trial_time, opts.trials, || {
            buf[..bh.len()].copy_from_slice(&rhs[..bh.len()]);
            bh.solve_in_place(black_box(&mut buf[..bh.len()]));
        });
        let th = min_mean_time(opts.trial_time, opts.trials, || {
            buf[..hh.len()].copy_from_slice(&rhs[..hh.len()]);
            hh.solve_in_place(black_box(&mut buf[..hh.len()]));
        });
        let (rb, rh) = match previous {
            Some((_, pb, ph)) => (tb / (2.0 * pb), th / (2.0 * ph)),
            None => (0.0, 0.0),
        };
        report.table.push(vec![n_x as f64, tb, rb, th, rh]);
        let p = [("n_x", n_x.to_string())];
        report.push(
            &p,
            "biharmonic_seconds",
            tb,
            None,
            Tolerance::None,
            Source::Measurement,
        );
        report.push(
            &p,
            "helmholtz_seconds",
            th,
            None,
            Tolerance::None,
            Source::Measurement,
        );
        if let Some((pn, _, _)) = previous {
            let tol = if pn >= opts.check_from {
                Tolerance::Range(0.8, 1.4)
            } else {
                Tolerance::None
            };
            report.push(&p, "biharmonic_ratio", rb, None, tol, Source::Reference);
            report.push(&p, "helmholtz_ratio", rh, None, tol, Source::Reference);
        }
        previous = Some((n_x, tb, th));
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub nx_list: Vec<usize>,
    pub n_y: usize,
    pub n_z: usize,
    pub nu: f64,
    pub dt: f64,
    /// Minimum timed steps per size; the minimum over them is reported.
    pub steps: usize,
    /// Steps continue until at least this much time has passed.
    pub trial_time: Duration,
    pub check_from: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            nx_list: vec![128, 256, 512, 1024, 2048],
            n_y: 32,
            n_z: 32,
            nu: 1.0 / 590.0,
            dt: 1e-4,
            steps: 6,
            trial_time: Duration::from_millis(1500),
            check_from: 256,
            seed: 3,
        }
    }
}

/// `(t_k / t_{k-1}) (log₂N - 1) / (2 log₂N)`, unity for `N log N` growth.
pub fn nlogn_ratio(t: f64, t_prev: f64, n_x: usize) -> f64 {
    let l = (n_x as f64).log2();
    t / t_prev * (l - 1.0) / (2.0 * l)
}

/// Wall time of one full time step on an `n_x × n_y × n_z` grid with 2/3
/// dealiasing, split into right-hand-side assembly and linear solves.
pub fn pipeline_scaling(opts: &PipelineOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "pipeline_scaling",
        &[
            "n_x",
            "total",
            "total_ratio",
            "assemble",
            "assemble_ratio",
            "solve",
            "solve_ratio",
        ],
    );
    let mut previous: Option<[f64; 3]> = None;
    for &n_x in &opts.nx_list {
        let mesh = Arc::new(build_mesh(
            n_x,
            opts.n_y,
            opts.n_z,
            2.0 * PI,
            PI,
            PointFamily::ChebyshevGauss,
        )?);
        let solver = ChannelSolver::new(
            mesh.clone(),
            StepperConfig {
                nu: opts.nu,
                dt: opts.dt,
                forcing: ForcingMode::FixedBeta(-2.0 * opts.nu),
                dealias: Dealias::TwoThirds,
                family: PointFamily::ChebyshevGauss,
            },
        )?;
        let u = solenoidal_perturbation(&mesh, 1.0, 0.1, opts.seed);
        let mut state = solver.initialize(&u, &u)?;
        solver.step(&mut state)?;
        let mut best = [f64::INFINITY; 3];
        let start = Instant::now();
        let mut taken = 0;
        while taken < opts.steps || start.elapsed() < opts.trial_time {
            taken += 1;
            let t = solver.step(&mut state)?;
            best[0] = best[0].min(t.total.as_secs_f64());
            best[1] = best[1].min(t.assemble.as_secs_f64());
            best[2] = best[2].min(t.solve.as_secs_f64());
        }
        let ratios = match previous {
            Some(p) => [
                nlogn_ratio(best[0], p[0], n_x),
                nlogn_ratio(best[1], p[1], n_x),
                best[2] / (2.0 * p[2]),
            ],
            None => [0.0; 3],
        };
        report.table.push(vec![
            n_x as f64, best[0], ratios[0], best[1], ratios[1], best[2], ratios[2],
        ]);
        let p = [("n_x", n_x.to_string())];
        for (name, v) in ["total", "assemble", "solve"].iter().zip(best) {
            report.push(
                &p,
                &format!("{name}_seconds"),
                v,
                None,
                Tolerance::None,
                Source::Measurement,
            );
        }
        if previous.is_some() {
            let tol = if n_x >= opts.check_from {
                Tolerance::Range(0.8, 1.3)
            } else {
                Tolerance::None
            };
            for (name, r) in ["total_ratio", "assemble_ratio", "solve_ratio"]
                .iter()
                .zip(ratios)
            {
                report.push(&p, name, r, None, tol, Source::Reference);
            }
        }
        previous = Some(best);
    }
    Ok(report)
}
