//! O(N) LU factorization of `H̆ = -(νΔt/2) Ă + (1 + νΔt z²/2) B̆`.
//!
//! Per parity `H̆` is upper Hessenberg: one subdiagonal, the diagonal, one
//! superdiagonal and a constant tail `H̆_{k,j} = t_k` for `j ≥ k+4`. The
//! elimination keeps that shape, so `U` is stored as two diagonals plus a
//! tail constant per row.

use super::banded::PIVOT_FLOOR;
use super::LineSolver;
use crate::error::{Error, Result};
use crate::matrices::{BandedMatrix, MatrixSet, Tail, TailMatrix};
use crate::Coeff;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Scalars of `H̆ = c_a Ă + c_b B̆`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelmholtzCoeffs {
    pub c_a: f64,
    pub c_b: f64,
}

impl HelmholtzCoeffs {
    pub fn implicit(nu: f64, dt: f64, z2: f64) -> Self {
        HelmholtzCoeffs {
            c_a: -0.5 * nu * dt,
            c_b: 1.0 + 0.5 * nu * dt * z2,
        }
    }

    /// `y += alpha (c_a Ă + c_b B̆) x`.
    pub fn apply_acc<T: Coeff>(&self, set: &MatrixSet, alpha: f64, x: &[T], y: &mut [T]) {
        set.stiffness_dirichlet.apply_acc(alpha * self.c_a, x, y);
        set.mass_dirichlet.apply_acc(alpha * self.c_b, x, y);
    }

    pub fn apply<T: Coeff>(&self, set: &MatrixSet, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        self.apply_acc(set, 1.0, x, &mut y);
        y
    }

    pub fn dense(&self, set: &MatrixSet) -> DMatrix<f64> {
        set.stiffness_dirichlet.to_dense() * self.c_a + set.mass_dirichlet.to_dense() * self.c_b
    }
}

#[derive(Clone, Debug, Default)]
struct Part {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    tau: Vec<f64>,
}

/// Compressed LU factors of `H̆`, even and odd systems stored separately.
#[derive(Clone, Debug)]
pub struct HelmholtzLu {
    n: usize,
    parts: [Part; 2],
}

fn check_params(nu: f64, dt: f64, z2: f64) -> Result<()> {
    if !(nu > 0.0 && dt > 0.0 && z2 >= 0.0) || !(nu.is_finite() && dt.is_finite() && z2.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "need ν > 0, Δt > 0, z² ≥ 0 (got ν={nu}, Δt={dt}, z²={z2})"
        )));
    }
    Ok(())
}

impl HelmholtzLu {
    pub fn build(
        stiffness: &TailMatrix,
        mass: &BandedMatrix,
        nu: f64,
        dt: f64,
        z2: f64,
    ) -> Result<Self> {
        check_params(nu, dt, z2)?;
        Self::build_with(stiffness, mass, HelmholtzCoeffs::implicit(nu, dt, z2))
    }

    pub fn from_set(set: &MatrixSet, nu: f64, dt: f64, z2: f64) -> Result<Self> {
        Self::build(&set.stiffness_dirichlet, &set.mass_dirichlet, nu, dt, z2)
    }

    /// Factorizes `c_a Ă + c_b B̆` for arbitrary scalars.
    pub fn build_with(
        stiffness: &TailMatrix,
        mass: &BandedMatrix,
        c: HelmholtzCoeffs,
    ) -> Result<Self> {
        let n = mass.rows;
        let tail = match &stiffness.tail {
            Tail::Constant { start: 2, value } => value,
            _ => {
                return Err(Error::InvalidParameter(
                    "Helmholtz stiffness matrix must have a constant tail".into(),
                ))
            }
        };
        let h = |k: usize, j: usize| c.c_a * stiffness.get(k, j) + c.c_b * mass.get(k, j);
        let mut parts = [Part::default(), Part::default()];
        for (p, part) in parts.iter_mut().enumerate() {
            let np = (n + 1 - p) / 2;
            part.l = vec![0.0; np];
            part.u0 = vec![0.0; np];
            part.u1 = vec![0.0; np];
            part.tau = vec![0.0; np];
            for i in 0..np {
                let k = 2 * i + p;
                let h0 = h(k, k);
                let h1 = if i + 1 < np { h(k, k + 2) } else { 0.0 };
                let ht = c.c_a * tail[k];
                if i == 0 {
                    part.u0[0] = h0;
                    part.u1[0] = h1;
                    part.tau[0] = ht;
                } else {
                    let l = h(k, k - 2) / part.u0[i - 1];
                    part.l[i] = l;
                    part.u0[i] = h0 - l * part.u1[i - 1];
                    part.u1[i] = h1 - l * part.tau[i - 1];
                    part.tau[i] = ht - l * part.tau[i - 1];
                }
                if !(part.u0[i].abs() >= PIVOT_FLOOR) {
                    return Err(Error::ZeroPivot {
                        row: k,
                        value: part.u0[i].abs(),
                    });
                }
            }
        }
        Ok(HelmholtzLu { n, parts })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Solves the system of one parity in place; `x` holds that parity contiguously.
    pub fn solve_parity<T: Coeff>(&self, parity: usize, x: &mut [T]) {
        let part = &self.parts[parity];
        let np = part.u0.len();
        assert_eq!(x.len(), np);
        for i in 1..np {
            let prev = x[i - 1];
            x[i] -= prev * part.l[i];
        }
        let mut sum = T::zero();
        for i in (0..np).rev() {
            let mut v = x[i];
            if i + 1 < np {
                v -= x[i + 1] * part.u1[i];
            }
            if i + 2 < np {
                sum += x[i + 2];
                v -= sum * part.tau[i];
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

    /// Dense `L` (unit diagonal) and `U` in global ordering.
    pub fn dense_factors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut l = DMatrix::identity(n, n);
        let mut u = DMatrix::zeros(n, n);
        for (p, part) in self.parts.iter().enumerate() {
            let np = part.u0.len();
            for i in 0..np {
                let k = 2 * i + p;
                if i > 0 {
                    l[(k, k - 2)] = part.l[i];
                }
                u[(k, k)] = part.u0[i];
                if i + 1 < np {
                    u[(k, k + 2)] = part.u1[i];
                }
                for j in (k + 4..n).step_by(2) {
                    u[(k, j)] = part.tau[i];
                }
            }
        }
        (l, u)
    }

    /// Number of stored reals.
    pub fn stored_reals(&self) -> usize {
        self.parts
            .iter()
            .map(|p| p.l.len() + p.u0.len() + p.u1.len() + p.tau.len())
            .sum()
    }
}

impl LineSolver for HelmholtzLu {
    fn len(&self) -> usize {
        self.n
    }

    fn solve_line(&self, x: &mut [Complex64]) {
        self.solve_in_place(x);
    }
}
