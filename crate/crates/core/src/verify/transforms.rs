use super::{ExperimentReport, Source, Tolerance};
use crate::error::Result;
use crate::matrices::basis_chebyshev;
use crate::mesh::{build_mesh, PointFamily, Space};
use crate::transforms::{
    evaluate_chebyshev, nyquist_mask, PhysicalField, SpectralField, Transformer,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct TransformSelftestOptions {
    pub nx_list: Vec<usize>,
    pub timing_nx_list: Vec<usize>,
    pub n_y: usize,
    pub n_z: usize,
    /// Ratios are checked only where the smaller size is at least this.
    pub check_from: usize,
    pub trial_time: Duration,
    pub seed: u64,
}

impl Default for TransformSelftestOptions {
    fn default() -> Self {
        TransformSelftestOptions {
            nx_list: vec![8, 16, 32, 64],
            timing_nx_list: vec![256, 512, 1024, 2048, 4096],
            n_y: 32,
            n_z: 32,
            check_from: 512,
            trial_time: Duration::from_millis(200),
            seed: 17,
        }
    }
}

fn random_coefficients(
    mesh: &crate::mesh::Mesh,
    space: Space,
    rng: &mut ChaCha8Rng,
) -> SpectralField {
    let mut f = SpectralField::zeros(mesh, space);
    for v in f.data.iter_mut() {
        *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    f.enforce_hermitian();
    f.apply_mask(&nyquist_mask(&mesh.wavenumber_grid(space)));
    f
}

fn max_diff<'a>(
    a: impl Iterator<Item = &'a Complex64>,
    b: impl Iterator<Item = &'a Complex64>,
) -> f64 {
    a.zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

fn real_diff(a: &PhysicalField, b: &PhysicalField) -> f64 {
    a.data
        .iter()
        .zip(b.data.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Round trips, scalar products against direct summation, linearity, and the
/// growth of transform time when `n_x` doubles.
pub fn transforms_selftest(opts: &TransformSelftestOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "transforms_selftest",
        &[
            "n_x",
            "family",
            "space",
            "forward_inverse",
            "inverse_forward",
            "scalar_product",
            "linearity",
        ],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for family in [
        PointFamily::ChebyshevGauss,
        PointFamily::ChebyshevGaussLobatto,
    ] {
        for &n_x in &opts.nx_list {
            let mesh = Arc::new(build_mesh(n_x, 8, 8, 2.0, 3.0, family)?);
            let t = Transformer::new(mesh.clone());
            for (si, space) in Space::ALL.into_iter().enumerate() {
                let c = random_coefficients(&mesh, space, &mut rng);
                let u = t.inverse(&c)?;
                let back = t.forward(&u, space)?;
                let e1 = max_diff(back.data.iter(), c.data.iter()) / c.max_abs();
                let u2 = t.inverse(&back)?;
                let e2 = real_diff(&u2, &u) / u.max_abs();

                let d = random_coefficients(&mesh, space, &mut rng);
                let a = rng.random_range(-2.0..2.0);
                let sum = SpectralField {
                    space,
                    data: &c.data * a + &d.data,
                };
                let lhs = t.inverse(&sum)?;
                let rhs = PhysicalField {
                    data: &u.data * a + &t.inverse(&d)?.data,
                };
                let e3 = real_diff(&lhs, &rhs) / rhs.max_abs();

                let f = |x: f64| (2.5 * x).cos() * x + x.powi(3);
                let field = PhysicalField::from_fn(&mesh, |x, _, _| f(x));
                let sp = t.scalar_product(&field, space)?;
                let planes = (mesh.n_y * mesh.n_z) as f64;
                let mut e4 = 0.0_f64;
                let mut scale = 0.0_f64;
                for k in 0..space.len(n_x) {
                    let phi = basis_chebyshev(space, k, n_x);
                    let direct: f64 = mesh
                        .x
                        .iter()
                        .zip(&mesh.w)
                        .map(|(x, w)| f(*x) * evaluate_chebyshev(&phi, *x) * w)
                        .sum();
                    e4 = e4.max((sp.data[[k, 0, 0]] - direct * planes).norm());
                    scale = scale.max(direct.abs() * planes);
                }
                let e4 = e4 / scale;

                report.table.push(vec![
                    n_x as f64,
                    if family == PointFamily::ChebyshevGauss {
                        0.0
                    } else {
                        1.0
                    },
                    si as f64,
                    e1,
                    e2,
                    e4,
                    e3,
                ]);
                let p = [
                    ("n_x", n_x.to_string()),
                    ("family", family.short_name().to_string()),
                    ("space", space.name().to_string()),
                ];
                let tol = Tolerance::AtMost(1e-12);
                report.push(&p, "forward_inverse", e1, None, tol, Source::Property);
                report.push(&p, "inverse_forward", e2, None, tol, Source::Property);
                report.push(&p, "linearity", e3, None, tol, Source::Property);
                let sp_tol = if n_x <= 32 { tol } else { Tolerance::None };
                report.push(&p, "scalar_product", e4, None, sp_tol, Source::Derived);
            }
        }
    }
    let mut previous: Option<(usize, f64)> = None;
    for &n_x in &opts.timing_nx_list {
        let mesh = Arc::new(build_mesh(
            n_x,
            opts.n_y,
            opts.n_z,
            2.0,
            3.0,
            PointFamily::ChebyshevGauss,
        )?);
        let t = Transformer::new(mesh.clone());
        let c = random_coefficients(&mesh, Space::Dirichlet, &mut rng);
        let u = t.inverse(&c)?;
        let run = || -> Result<()> {
            let back = t.forward(&u, Space::Dirichlet)?;
            std::hint::black_box(t.inverse(&back)?);
            Ok(())
        };
        run()?;
        let mut best = f64::INFINITY;
        let start = Instant::now();
        while start.elapsed() < opts.trial_time || best == f64::INFINITY {
            let s = Instant::now();
            run()?;
            best = best.min(s.elapsed().as_secs_f64());
        }
        let p = [("n_x", n_x.to_string())];
        report.push(
            &p,
            "round_trip_seconds",
            best,
            None,
            Tolerance::None,
            Source::Measurement,
        );
        if let Some((pn, pt)) = previous {
            let tol = if pn >= opts.check_from {
                Tolerance::AtMost(2.6)
            } else {
                Tolerance::None
            };
            report.push(&p, "doubling_ratio", best / pt, None, tol, Source::Property);
        }
        previous = Some((n_x, best));
    }
    Ok(report)
}
