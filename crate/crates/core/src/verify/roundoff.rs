use super::{ExperimentReport, Source, Tolerance};
use crate::error::Result;
use crate::matrices::MatrixSet;
use crate::mesh::PointFamily;
use crate::solvers::{BiharmonicCoeffs, BiharmonicLu, HelmholtzCoeffs, HelmholtzLu};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn relative_error(u: &[f64], v: &[f64]) -> f64 {
    let num = u
        .iter()
        .zip(v)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    let den = u.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    num / den
}

fn line_seed(seed: u64, n_x: usize, z_index: usize) -> u64 {
    seed ^ ((n_x as u64) << 20) ^ ((z_index as u64) << 8)
}

/// Recovery error `max|u - H⁻¹ H u| / max|u|` of both implicit operators,
/// averaged over `runs` uniform random vectors, on Chebyshev-Gauss points.
///
/// Biharmonic errors must stay below `1e-9` and Helmholtz below `1e-12`; a
/// ninefold increase of `z` may raise either error at most tenfold.
pub fn roundoff_experiment(
    nx_list: &[usize],
    z_list: &[f64],
    nu: f64,
    dt: f64,
    runs: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("roundoff", &["n_x", "z", "biharmonic", "helmholtz"]);
    for &n_x in nx_list {
        let set = MatrixSet::assemble(n_x, PointFamily::ChebyshevGauss)?;
        let mut previous: Option<(f64, f64, f64)> = None;
        for (zi, &z) in z_list.iter().enumerate() {
            let z2 = z * z;
            let bh = BiharmonicLu::from_set(&set, nu, dt, z2)?;
            let hh = HelmholtzLu::from_set(&set, nu, dt, z2)?;
            let bc = BiharmonicCoeffs::implicit(nu, dt, z2);
            let hc = HelmholtzCoeffs::implicit(nu, dt, z2);
            let mut rng = ChaCha8Rng::seed_from_u64(line_seed(seed, n_x, zi));
            let (mut eb, mut eh) = (0.0, 0.0);
            for _ in 0..runs {
                let u: Vec<f64> = (0..bh.len()).map(|_| rng.random::<f64>()).collect();
                eb += relative_error(&u, &bh.solve(&bc.apply(&set, &u)));
                let u: Vec<f64> = (0..hh.len()).map(|_| rng.random::<f64>()).collect();
                eh += relative_error(&u, &hh.solve(&hc.apply(&set, &u)));
            }
            let (eb, eh) = (eb / runs as f64, eh / runs as f64);
            report.table.push(vec![n_x as f64, z, eb, eh]);
            let p = [("n_x", n_x.to_string()), ("z", z.to_string())];
            report.push(
                &p,
                "biharmonic",
                eb,
                None,
                Tolerance::AtMost(1e-9),
                Source::Reference,
            );
            report.push(
                &p,
                "helmholtz",
                eh,
                None,
                Tolerance::AtMost(1e-12),
                Source::Reference,
            );
            if let Some((pz, pb, ph)) = previous {
                let tol = if pz > 0.0 && (z / pz - 9.0).abs() < 1e-9 {
                    Tolerance::AtMost(10.0)
                } else {
                    Tolerance::None
                };
                report.push(
                    &p,
                    "biharmonic_growth",
                    eb / pb,
                    None,
                    tol,
                    Source::Property,
                );
                report.push(&p, "helmholtz_growth", eh / ph, None, tol, Source::Property);
            }
            previous = Some((z, eb, eh));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_case_is_reproducible() {
        let a = roundoff_experiment(&[64], &[0.0, 200.0], 1.0 / 5200.0, 1e-5, 5, 7).unwrap();
        let b = roundoff_experiment(&[64], &[0.0, 200.0], 1.0 / 5200.0, 1e-5, 5, 7).unwrap();
        assert_eq!(a.table, b.table);
        assert!(a.table.iter().all(|r| r[2] < 1e-12 && r[3] < 1e-13));
    }
}
