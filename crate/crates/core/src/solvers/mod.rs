//! Direct solvers for the implicit Helmholtz and biharmonic systems.

mod banded;
mod biharmonic;
mod helmholtz;

pub use banded::ParityBandedLu;
pub use biharmonic::{BiharmonicCoeffs, BiharmonicLu};
pub use helmholtz::{HelmholtzCoeffs, HelmholtzLu};

use crate::error::{Error, Result};
use crate::mesh::{signed_index, WavenumberGrid};
use crate::transforms::SpectralField;
use crate::Coeff;
use ndarray::{Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

pub(crate) fn split_parity<T: Coeff>(x: &[T]) -> (Vec<T>, Vec<T>) {
    (
        x.iter().step_by(2).copied().collect(),
        x.iter().skip(1).step_by(2).copied().collect(),
    )
}

pub(crate) fn merge_parity<T: Coeff>(x: &mut [T], even: &[T], odd: &[T]) {
    for (i, v) in even.iter().enumerate() {
        x[2 * i] = *v;
    }
    for (i, v) in odd.iter().enumerate() {
        x[2 * i + 1] = *v;
    }
}

/// A factorization that solves one wall-normal line.
pub trait LineSolver: Send + Sync {
    fn len(&self) -> usize;
    fn solve_line(&self, x: &mut [Complex64]);
}

/// One factorization per `(m, n)` pair. Pairs with equal `z²` share storage.
pub struct FactorizationSet<L> {
    n_y: usize,
    n_zh: usize,
    factors: Vec<Option<Arc<L>>>,
}

impl<L: LineSolver> FactorizationSet<L> {
    /// Builds factorizations for all pairs from `build(z²)`.
    pub fn build(grid: &WavenumberGrid, build: impl Fn(f64) -> Result<L> + Sync) -> Result<Self> {
        let n_y = grid.n_y();
        let n_zh = grid.n_zh();
        let key = |m: usize, n: usize| (signed_index(m, n_y).unsigned_abs() as usize, n);
        let mut keys: Vec<(usize, usize, f64)> = Vec::new();
        let mut seen = HashMap::new();
        for m in 0..n_y {
            for n in 0..n_zh {
                if seen.insert(key(m, n), ()).is_none() {
                    keys.push((key(m, n).0, n, grid.z2(m, n)));
                }
            }
        }
        let built: Vec<Arc<L>> = keys
            .par_iter()
            .map(|(_, _, z2)| build(*z2).map(Arc::new))
            .collect::<Result<_>>()?;
        let lookup: HashMap<(usize, usize), Arc<L>> = keys
            .iter()
            .zip(built)
            .map(|((a, n, _), f)| ((*a, *n), f))
            .collect();
        let factors = (0..n_y)
            .flat_map(|m| (0..n_zh).map(move |n| (m, n)))
            .map(|(m, n)| lookup.get(&key(m, n)).cloned())
            .collect();
        Ok(FactorizationSet { n_y, n_zh, factors })
    }

    /// A set with no factorizations; pairs are added with [`insert`](Self::insert).
    pub fn empty(n_y: usize, n_zh: usize) -> Self {
        FactorizationSet {
            n_y,
            n_zh,
            factors: vec![None; n_y * n_zh],
        }
    }

    pub fn insert(&mut self, m: usize, n: usize, lu: L) {
        self.factors[m * self.n_zh + n] = Some(Arc::new(lu));
    }

    pub fn get(&self, m: usize, n: usize) -> Result<&L> {
        self.factors
            .get(m * self.n_zh + n)
            .and_then(|f| f.as_deref())
            .ok_or(Error::MissingFactorization { m, n })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_y, self.n_zh)
    }
}

/// Solves the 1-D system along x for every `(m, n)` pair of `rhs`.
pub fn solve_field<L: LineSolver>(
    set: &FactorizationSet<L>,
    rhs: &SpectralField,
) -> Result<SpectralField> {
    let [len, n_y, n_zh] = rhs.shape();
    if (n_y, n_zh) != set.shape() {
        return Err(Error::ShapeMismatch {
            expected: vec![len, set.n_y, set.n_zh],
            found: vec![len, n_y, n_zh],
        });
    }
    for m in 0..n_y {
        for n in 0..n_zh {
            let lu = set.get(m, n)?;
            if lu.len() != len {
                return Err(Error::ShapeMismatch {
                    expected: vec![lu.len(), n_y, n_zh],
                    found: vec![len, n_y, n_zh],
                });
            }
        }
    }
    let mut out = rhs.clone();
    let mut lanes: Vec<_> = Vec::with_capacity(n_y * n_zh);
    Zip::indexed(out.data.lanes_mut(Axis(0))).for_each(|(m, n), lane| lanes.push((m, n, lane)));
    lanes.into_par_iter().for_each(|(m, n, mut lane)| {
        let lu = set.get(m, n).expect("checked above");
        let mut buf: Vec<Complex64> = lane.to_vec();
        lu.solve_line(&mut buf);
        lane.iter_mut().zip(&buf).for_each(|(a, b)| *a = *b);
    });
    Ok(out)
}
