#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shenchannel::mesh::Mesh;
use shenchannel::transforms::nyquist_mask;
use shenchannel::{Space, SpectralField};

/// Doolittle LU without pivoting, solved against a complex right-hand side.
pub fn dense_lu_solve(a: &DMatrix<f64>, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut lu = a.clone();
    for k in 0..n {
        let p = lu[(k, k)];
        assert!(p.abs() > 1e-300, "zero pivot at {k}");
        for i in k + 1..n {
            let l = lu[(i, k)] / p;
            lu[(i, k)] = l;
            if l != 0.0 {
                for j in k + 1..n {
                    lu[(i, j)] -= l * lu[(k, j)];
                }
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            let l = lu[(i, j)];
            y[i] = y[i] - y[j] * l;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let u = lu[(i, j)];
            y[i] = y[i] - y[j] * u;
        }
        y[i] /= lu[(i, i)];
    }
    y
}

pub fn dense_mul(a: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| x[j] * a[(i, j)]).sum())
        .collect()
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()));
    let den = b.iter().fold(0.0_f64, |m, y| m.max(y.norm()));
    num / den.max(1e-300)
}

pub fn max_rel_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random coefficients of a real field with the unpaired Nyquist modes removed.
pub fn random_spectral(mesh: &Mesh, space: Space, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut f = SpectralField::zeros(mesh, space);
    for v in f.data.iter_mut() {
        *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    f.enforce_hermitian();
    f.apply_mask(&nyquist_mask(&mesh.wavenumber_grid(space)));
    f
}

pub fn field_rel(a: &SpectralField, b: &SpectralField) -> f64 {
    let num = a
        .data
        .iter()
        .zip(b.data.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()));
    num / b.max_abs().max(1e-300)
}
