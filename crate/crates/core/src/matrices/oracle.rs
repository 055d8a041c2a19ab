//! Brute-force quadrature of `(φ_j^{(d)}, φ_k)_σ` on the collocation points.
//!
//! O(N³); meant for tests and small sizes only.

use super::stencil;
use crate::mesh::{PointFamily, Space};
use crate::transforms::{chebyshev_derivative, evaluate_chebyshev};
use nalgebra::DMatrix;

/// Chebyshev coefficients (length `n_x + 1`) of basis function `k` of `space`.
pub fn basis_chebyshev(space: Space, k: usize, n_x: usize) -> Vec<f64> {
    let mut c = vec![0.0; n_x + 1];
    for (i, v) in stencil(space, k) {
        c[i] += v;
    }
    c
}

fn sample(coeffs: &[f64], x: &[f64]) -> Vec<f64> {
    x.iter().map(|x| evaluate_chebyshev(coeffs, *x)).collect()
}

/// Dense matrix `M[k, j] = Σ_i φ_j^{(d)}(x_i) ψ_k(x_i) w_i` with `ψ` from
/// `row` and `φ` from `col`.
pub fn dense_oracle(
    row: Space,
    col: Space,
    derivative: usize,
    n_x: usize,
    family: PointFamily,
) -> DMatrix<f64> {
    assert!(derivative <= 4, "derivative order must be at most 4");
    let x = family.points(n_x);
    let w = family.weights(n_x);
    let rows: Vec<Vec<f64>> = (0..row.len(n_x))
        .map(|k| sample(&basis_chebyshev(row, k, n_x), &x))
        .collect();
    let cols: Vec<Vec<f64>> = (0..col.len(n_x))
        .map(|j| {
            let mut c = basis_chebyshev(col, j, n_x);
            for _ in 0..derivative {
                c = chebyshev_derivative(&c);
            }
            sample(&c, &x)
        })
        .collect();
    DMatrix::from_fn(rows.len(), cols.len(), |k, j| {
        rows[k]
            .iter()
            .zip(&cols[j])
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum()
    })
}
