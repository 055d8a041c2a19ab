//! O(N) LU factorization of `H̃ = ξ₀ Q̃ + ξ₁ Ã + ξ₂ B̃`.
//!
//! Within one parity `H̃` has two subdiagonals, the diagonal, two
//! superdiagonals and the rank-two tail `ξ₀(p_k q_j + r_k s_j)`. Elimination
//! preserves the tail's column factors, so row `k` of `U` beyond the second
//! superdiagonal is `ξ₀(a_k q_j + b_k s_j)` with `a`, `b` obtained by the same
//! row operations applied to `p`, `r`.

use super::banded::PIVOT_FLOOR;
use super::LineSolver;
use crate::error::{Error, Result};
use crate::matrices::{BandedMatrix, MatrixSet, Tail, TailMatrix};
use crate::Coeff;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

/// Scalars of `H̃ = ξ₀ Q̃ + ξ₁ Ã + ξ₂ B̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiharmonicCoeffs {
    pub xi0: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl BiharmonicCoeffs {
    pub fn implicit(nu: f64, dt: f64, z2: f64) -> Self {
        BiharmonicCoeffs {
            xi0: -0.5 * nu * dt,
            xi1: 1.0 + nu * dt * z2,
            xi2: -0.5 * (2.0 * z2 + nu * dt * z2 * z2),
        }
    }

    /// `y += alpha (ξ₀ Q̃ + ξ₁ Ã + ξ₂ B̃) x`.
    pub fn apply_acc<T: Coeff>(&self, set: &MatrixSet, alpha: f64, x: &[T], y: &mut [T]) {
        set.fourth_biharmonic.apply_acc(alpha * self.xi0, x, y);
        set.stiffness_biharmonic.apply_acc(alpha * self.xi1, x, y);
        set.mass_biharmonic.apply_acc(alpha * self.xi2, x, y);
    }

    pub fn apply<T: Coeff>(&self, set: &MatrixSet, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        self.apply_acc(set, 1.0, x, &mut y);
        y
    }

    pub fn dense(&self, set: &MatrixSet) -> DMatrix<f64> {
        set.fourth_biharmonic.to_dense() * self.xi0
            + set.stiffness_biharmonic.to_dense() * self.xi1
            + set.mass_biharmonic.to_dense() * self.xi2
    }
}

#[derive(Clone, Debug, Default)]
struct Part {
    l2: Vec<f64>,
    l1: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Compressed LU factors of `H̃`; storage is below `7 N_x` reals.
#[derive(Clone, Debug)]
pub struct BiharmonicLu {
    n: usize,
    xi0: f64,
    q: Arc<Vec<f64>>,
    s: Arc<Vec<f64>>,
    parts: [Part; 2],
}

impl BiharmonicLu {
    pub fn build(
        fourth: &TailMatrix,
        stiffness: &BandedMatrix,
        mass: &BandedMatrix,
        nu: f64,
        dt: f64,
        z2: f64,
    ) -> Result<Self> {
        if !(nu > 0.0 && dt > 0.0 && z2 >= 0.0)
            || !(nu.is_finite() && dt.is_finite() && z2.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "need ν > 0, Δt > 0, z² ≥ 0 (got ν={nu}, Δt={dt}, z²={z2})"
            )));
        }
        Self::build_with(
            fourth,
            stiffness,
            mass,
            BiharmonicCoeffs::implicit(nu, dt, z2),
        )
    }

    pub fn from_set(set: &MatrixSet, nu: f64, dt: f64, z2: f64) -> Result<Self> {
        Self::build(
            &set.fourth_biharmonic,
            &set.stiffness_biharmonic,
            &set.mass_biharmonic,
            nu,
            dt,
            z2,
        )
    }

    /// Factorizes `ξ₀ Q̃ + ξ₁ Ã + ξ₂ B̃` for arbitrary scalars with `ξ₀ ≠ 0`.
    pub fn build_with(
        fourth: &TailMatrix,
        stiffness: &BandedMatrix,
        mass: &BandedMatrix,
        c: BiharmonicCoeffs,
    ) -> Result<Self> {
        let (p, r, q, s) = match &fourth.tail {
            Tail::LowRank {
                start: 2,
                p,
                r,
                q,
                s,
            } => (p, r, q, s),
            _ => {
                return Err(Error::InvalidParameter(
                    "fourth-derivative matrix must have a rank-two tail".into(),
                ))
            }
        };
        let n = mass.rows;
        let xi0 = c.xi0;
        let h = |k: usize, j: usize| {
            xi0 * fourth.get(k, j) + c.xi1 * stiffness.get(k, j) + c.xi2 * mass.get(k, j)
        };
        let mut parts = [Part::default(), Part::default()];
        for (par, part) in parts.iter_mut().enumerate() {
            let np = (n + 1 - par) / 2;
            let g = |i: usize| 2 * i + par;
            let mut l2 = vec![0.0; np];
            let mut l1 = vec![0.0; np];
            let mut u0 = vec![0.0; np];
            let mut u1 = vec![0.0; np];
            let mut u2 = vec![0.0; np];
            let mut a = vec![0.0; np];
            let mut b = vec![0.0; np];
            let tail = |a: &[f64], b: &[f64], i: usize, j: usize| xi0 * (a[i] * q[j] + b[i] * s[j]);
            for i in 0..np {
                let k = g(i);
                let hm2 = if i >= 2 { h(k, k - 4) } else { 0.0 };
                let hm1 = if i >= 1 { h(k, k - 2) } else { 0.0 };
                let h0 = h(k, k);
                let h1 = if i + 1 < np { h(k, k + 2) } else { 0.0 };
                let h2 = if i + 2 < np { h(k, k + 4) } else { 0.0 };
                let (mut tm1, mut t0, mut t1, mut t2) = (hm1, h0, h1, h2);
                if i >= 2 {
                    let l = hm2 / u0[i - 2];
                    l2[i] = l;
                    tm1 -= l * u1[i - 2];
                    t0 -= l * u2[i - 2];
                    if i + 1 < np {
                        t1 -= l * tail(&a, &b, i - 2, k + 2);
                    }
                    if i + 2 < np {
                        t2 -= l * tail(&a, &b, i - 2, k + 4);
                    }
                }
                if i >= 1 {
                    let l = tm1 / u0[i - 1];
                    l1[i] = l;
                    t0 -= l * u1[i - 1];
                    t1 -= l * u2[i - 1];
                    if i + 2 < np {
                        t2 -= l * tail(&a, &b, i - 1, k + 4);
                    }
                }
                if !(t0.abs() >= PIVOT_FLOOR) {
                    return Err(Error::ZeroPivot {
                        row: k,
                        value: t0.abs(),
                    });
                }
                u0[i] = t0;
                u1[i] = t1;
                u2[i] = t2;
                let (a1, b1) = if i >= 1 {
                    (a[i - 1], b[i - 1])
                } else {
                    (0.0, 0.0)
                };
                let (a2, b2) = if i >= 2 {
                    (a[i - 2], b[i - 2])
                } else {
                    (0.0, 0.0)
                };
                a[i] = p[k] - l1[i] * a1 - l2[i] * a2;
                b[i] = r[k] - l1[i] * b1 - l2[i] * b2;
            }
            // keep only entries that are ever used
            if !l1.is_empty() {
                l1.remove(0);
            }
            l2.drain(..2.min(l2.len()));
            u1.truncate(np.saturating_sub(1));
            u2.truncate(np.saturating_sub(2));
            a.truncate(np.saturating_sub(3));
            b.truncate(np.saturating_sub(3));
            *part = Part {
                l2,
                l1,
                u0,
                u1,
                u2,
                a,
                b,
            };
        }
        Ok(BiharmonicLu {
            n,
            xi0,
            q: q.clone(),
            s: s.clone(),
            parts,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// `(a_0, b_0)` of the even system.
    pub fn first_tail_factors(&self) -> Option<(f64, f64)> {
        let p = &self.parts[0];
        Some((*p.a.first()?, *p.b.first()?))
    }

    /// Solves the system of one parity in place; `x` holds that parity contiguously.
    pub fn solve_parity<T: Coeff>(&self, parity: usize, x: &mut [T]) {
        let part = &self.parts[parity];
        let np = part.u0.len();
        assert_eq!(x.len(), np);
        for i in 1..np {
            let mut v = x[i] - x[i - 1] * part.l1[i - 1];
            if i >= 2 {
                v -= x[i - 2] * part.l2[i - 2];
            }
            x[i] = v;
        }
        let mut sum_q = T::zero();
        let mut sum_s = T::zero();
        for i in (0..np).rev() {
            let mut v = x[i];
            if i + 1 < np {
                v -= x[i + 1] * part.u1[i];
            }
            if i + 2 < np {
                v -= x[i + 2] * part.u2[i];
            }
            if i + 3 < np {
                let j = 2 * (i + 3) + parity;
                sum_q += x[i + 3] * self.q[j];
                sum_s += x[i + 3] * self.s[j];
                v -= (sum_q * part.a[i] + sum_s * part.b[i]) * self.xi0;
            }
            x[i] = v / part.u0[i];
        }
    }

    pub fn solve_in_place<T: Coeff>(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.n);
        let (mut even, mut odd) = super::split_parity(x);
        self.solve_parity(0, &mut even);
        self.solve_parity(1, &mut odd);
        super::merge_parity(x, &even, &odd);
    }

    /// Same as [`solve_in_place`](Self::solve_in_place) with the two parities on separate threads.
    pub fn solve_in_place_concurrent<T: Coeff>(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.n);
        let (mut even, mut odd) = super::split_parity(x);
        rayon::join(
            || self.solve_parity(0, &mut even),
            || self.solve_parity(1, &mut odd),
        );
        super::merge_parity(x, &even, &odd);
    }

    pub fn solve<T: Coeff>(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Dense `L` (unit diagonal) and `U`, including the reconstructed tail.
    pub fn dense_factors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut l = DMatrix::identity(n, n);
        let mut u = DMatrix::zeros(n, n);
        for (par, part) in self.parts.iter().enumerate() {
            let np = part.u0.len();
            for i in 0..np {
                let k = 2 * i + par;
                if i >= 1 {
                    l[(k, k - 2)] = part.l1[i - 1];
                }
                if i >= 2 {
                    l[(k, k - 4)] = part.l2[i - 2];
                }
                u[(k, k)] = part.u0[i];
                if i + 1 < np {
                    u[(k, k + 2)] = part.u1[i];
                }
                if i + 2 < np {
                    u[(k, k + 4)] = part.u2[i];
                }
                if i + 3 < np {
                    for j in (k + 6..n).step_by(2) {
                        u[(k, j)] = self.xi0 * (part.a[i] * self.q[j] + part.b[i] * self.s[j]);
                    }
                }
            }
        }
        (l, u)
    }

    /// Number of reals owned by this factorization (the shared `q`, `s` excluded).
    pub fn stored_reals(&self) -> usize {
        1 + self
            .parts
            .iter()
            .map(|p| {
                p.l1.len()
                    + p.l2.len()
                    + p.u0.len()
                    + p.u1.len()
                    + p.u2.len()
                    + p.a.len()
                    + p.b.len()
            })
            .sum::<usize>()
    }
}

impl LineSolver for BiharmonicLu {
    fn len(&self) -> usize {
        self.n
    }

    fn solve_line(&self, x: &mut [Complex64]) {
        self.solve_in_place(x);
    }
}
