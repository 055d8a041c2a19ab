mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use shenchannel::matrices::dense_oracle;
use shenchannel::mesh::build_mesh;
use shenchannel::solvers::{solve_field, BiharmonicCoeffs, FactorizationSet, HelmholtzCoeffs};
use shenchannel::{BiharmonicLu, HelmholtzLu, MatrixSet, PointFamily, Space, SpectralField};

const NU: f64 = 1.0 / 5200.0;
const DT: f64 = 1e-5;

fn family(gl: bool) -> PointFamily {
    if gl {
        PointFamily::ChebyshevGaussLobatto
    } else {
        PointFamily::ChebyshevGauss
    }
}

#[test]
fn helmholtz_matches_dense_solve_n32() {
    let set = MatrixSet::assemble(32, PointFamily::ChebyshevGauss).unwrap();
    let c = HelmholtzCoeffs::implicit(NU, DT, 0.0);
    let dense = c.dense(&set);
    let lu = HelmholtzLu::from_set(&set, NU, DT, 0.0).unwrap();
    let mut r = rng(1);
    for _ in 0..10 {
        let b = random_complex(&mut r, lu.len());
        assert!(max_rel(&lu.solve(&b), &dense_lu_solve(&dense, &b)) < 1e-12);
    }
}

#[test]
fn biharmonic_matches_dense_solve_n20() {
    let set = MatrixSet::assemble(20, PointFamily::ChebyshevGauss).unwrap();
    let c = BiharmonicCoeffs::implicit(NU, DT, 100.0);
    let dense = c.dense(&set);
    let lu = BiharmonicLu::from_set(&set, NU, DT, 100.0).unwrap();
    let mut r = rng(2);
    for _ in 0..10 {
        let b = random_complex(&mut r, lu.len());
        assert!(max_rel(&lu.solve(&b), &dense_lu_solve(&dense, &b)) < 1e-10);
    }
}

#[test]
fn operators_built_from_quadrature_agree_with_closed_forms() {
    for fam in [
        PointFamily::ChebyshevGauss,
        PointFamily::ChebyshevGaussLobatto,
    ] {
        let n_x = 24;
        let set = MatrixSet::assemble(n_x, fam).unwrap();
        let c = BiharmonicCoeffs::implicit(0.01, 0.1, 9.0);
        let q = dense_oracle(Space::Biharmonic, Space::Biharmonic, 4, n_x, fam);
        let a = dense_oracle(Space::Biharmonic, Space::Biharmonic, 2, n_x, fam);
        let b = dense_oracle(Space::Biharmonic, Space::Biharmonic, 0, n_x, fam);
        let oracle = q * c.xi0 + a * c.xi1 + b * c.xi2;
        assert!(max_rel_matrix(&c.dense(&set), &oracle) < 1e-12);
    }
}

#[test]
fn biharmonic_upper_factor_matches_dense_lu() {
    let n_x = 24;
    let set = MatrixSet::assemble(n_x, PointFamily::ChebyshevGauss).unwrap();
    let c = BiharmonicCoeffs::implicit(NU, DT, 1800.0 * 1800.0);
    let h = c.dense(&set);
    let lu = BiharmonicLu::from_set(&set, NU, DT, 1800.0 * 1800.0).unwrap();
    let (l, u) = lu.dense_factors();
    assert!(max_rel_matrix(&(&l * &u), &h) < 1e-10);
    for k in 0..l.nrows() {
        assert_eq!(l[(k, k)], 1.0);
        for j in 0..k {
            if k - j != 2 && k - j != 4 {
                assert_eq!(l[(k, j)], 0.0, "L[{k},{j}]");
            }
        }
    }
}

#[test]
fn solve_field_matches_per_pair_dense_solve() {
    let mesh = build_mesh(16, 8, 8, 2.0, 3.0, PointFamily::ChebyshevGauss).unwrap();
    let set = MatrixSet::assemble(16, mesh.family).unwrap();
    let grid = mesh.wavenumber_grid(Space::Biharmonic);
    let (nu, dt) = (0.01, 0.05);
    let factors =
        FactorizationSet::build(&grid, |z2| BiharmonicLu::from_set(&set, nu, dt, z2)).unwrap();
    let mut r = rng(3);
    let rhs = random_spectral(&mesh, Space::Biharmonic, &mut r);
    let x = solve_field(&factors, &rhs).unwrap();
    for m in 0..grid.n_y() {
        for n in 0..grid.n_zh() {
            let dense = BiharmonicCoeffs::implicit(nu, dt, grid.z2(m, n)).dense(&set);
            let b = rhs.line(m, n);
            if b.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            assert!(
                max_rel(&x.line(m, n), &dense_lu_solve(&dense, &b)) < 1e-10,
                "({m},{n})"
            );
        }
    }
}

#[test]
fn solve_field_of_zero_is_zero() {
    let mesh = build_mesh(16, 4, 4, 2.0, 3.0, PointFamily::ChebyshevGauss).unwrap();
    let set = MatrixSet::assemble(16, mesh.family).unwrap();
    let grid = mesh.wavenumber_grid(Space::Dirichlet);
    let factors =
        FactorizationSet::build(&grid, |z2| HelmholtzLu::from_set(&set, 0.1, 0.1, z2)).unwrap();
    let zero = SpectralField::zeros(&mesh, Space::Dirichlet);
    assert_eq!(solve_field(&factors, &zero).unwrap(), zero);
}

#[test]
fn missing_factorization_is_reported() {
    let mesh = build_mesh(16, 4, 4, 2.0, 3.0, PointFamily::ChebyshevGauss).unwrap();
    let factors: FactorizationSet<HelmholtzLu> = FactorizationSet::empty(4, 3);
    let rhs = SpectralField::zeros(&mesh, Space::Dirichlet);
    assert!(solve_field(&factors, &rhs).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn biharmonic_recovers_random_vector(half in 4usize..64, z in 0.0f64..600.0, gl: bool, seed: u64) {
        let n_x = 2 * half;
        let set = MatrixSet::assemble(n_x, family(gl)).unwrap();
        let lu = BiharmonicLu::from_set(&set, NU, DT, z * z).unwrap();
        let c = BiharmonicCoeffs::implicit(NU, DT, z * z);
        let x = random_complex(&mut rng(seed), lu.len());
        let back = lu.solve(&c.apply(&set, &x));
        prop_assert!(max_rel(&back, &x) < 1e-10);
        prop_assert!(lu.stored_reals() < 7 * n_x);
    }

    #[test]
    fn helmholtz_recovers_random_vector(half in 4usize..64, z in 0.0f64..600.0, gl: bool, seed: u64) {
        let set = MatrixSet::assemble(2 * half, family(gl)).unwrap();
        let lu = HelmholtzLu::from_set(&set, NU, DT, z * z).unwrap();
        let c = HelmholtzCoeffs::implicit(NU, DT, z * z);
        let x = random_complex(&mut rng(seed), lu.len());
        prop_assert!(max_rel(&lu.solve(&c.apply(&set, &x)), &x) < 1e-12);
    }

    #[test]
    fn parities_solve_the_same_concurrently(half in 4usize..40, z in 0.0f64..100.0, seed: u64) {
        let set = MatrixSet::assemble(2 * half, PointFamily::ChebyshevGauss).unwrap();
        let mut r = rng(seed);
        let bl = BiharmonicLu::from_set(&set, 0.01, 0.01, z * z).unwrap();
        let b = random_complex(&mut r, bl.len());
        let (mut s, mut p) = (b.clone(), b);
        bl.solve_in_place(&mut s);
        bl.solve_in_place_concurrent(&mut p);
        prop_assert_eq!(s, p);
        let hl = HelmholtzLu::from_set(&set, 0.01, 0.01, z * z).unwrap();
        let b = random_complex(&mut r, hl.len());
        let (mut s, mut p) = (b.clone(), b);
        hl.solve_in_place(&mut s);
        hl.solve_in_place_concurrent(&mut p);
        prop_assert_eq!(s, p);
    }

    #[test]
    fn real_and_complex_solves_agree(half in 4usize..40, seed: u64) {
        let set = MatrixSet::assemble(2 * half, PointFamily::ChebyshevGauss).unwrap();
        let lu = BiharmonicLu::from_set(&set, 0.01, 0.01, 4.0).unwrap();
        let mut r = rng(seed);
        let re: Vec<f64> = random_complex(&mut r, lu.len()).iter().map(|c| c.re).collect();
        let z: Vec<Complex64> = re.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        let a = lu.solve(&re);
        let b = lu.solve(&z);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y.re).abs() <= 1e-14 * x.abs().max(1.0) && y.im == 0.0);
        }
    }
}
