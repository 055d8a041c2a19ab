//! Unpivoted banded LU for matrices that couple only equal-parity indices.

use crate::error::{Error, Result};
use crate::matrices::BandedMatrix;
use crate::Coeff;

pub(crate) const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Clone, Debug)]
struct Band {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl Band {
    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        r * (self.kl + self.ku + 1) + (c + self.kl - r)
    }

    fn factor(&mut self, parity: usize) -> Result<()> {
        for i in 0..self.n {
            let piv = self.a[self.idx(i, i)];
            if !(piv.abs() >= PIVOT_FLOOR) {
                return Err(Error::ZeroPivot {
                    row: 2 * i + parity,
                    value: piv.abs(),
                });
            }
            for r in i + 1..=(i + self.kl).min(self.n - 1) {
                let ri = self.idx(r, i);
                let l = self.a[ri] / piv;
                self.a[ri] = l;
                for c in i + 1..=(i + self.ku).min(self.n - 1) {
                    let rc = self.idx(r, c);
                    let ic = self.idx(i, c);
                    self.a[rc] -= l * self.a[ic];
                }
            }
        }
        Ok(())
    }

    fn solve<T: Coeff>(&self, x: &mut [T], parity: usize) {
        let g = |i: usize| 2 * i + parity;
        for r in 0..self.n {
            let mut v = x[g(r)];
            for c in r.saturating_sub(self.kl)..r {
                v -= x[g(c)] * self.a[self.idx(r, c)];
            }
            x[g(r)] = v;
        }
        for r in (0..self.n).rev() {
            let mut v = x[g(r)];
            for c in r + 1..=(r + self.ku).min(self.n - 1) {
                v -= x[g(c)] * self.a[self.idx(r, c)];
            }
            x[g(r)] = v / self.a[self.idx(r, r)];
        }
    }
}

/// LU factors of a square banded matrix with even offsets, one band system per parity.
#[derive(Clone, Debug)]
pub struct ParityBandedLu {
    n: usize,
    parts: [Band; 2],
}

impl ParityBandedLu {
    pub fn new(m: &BandedMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::ShapeMismatch {
                expected: vec![m.rows, m.rows],
                found: vec![m.rows, m.cols],
            });
        }
        if m.offsets.iter().any(|o| o % 2 != 0) {
            return Err(Error::InvalidParameter(
                "parity-split LU needs even diagonal offsets".into(),
            ));
        }
        let n = m.rows;
        let kl = m
            .offsets
            .iter()
            .map(|o| (-o).max(0) as usize / 2)
            .max()
            .unwrap_or(0);
        let ku = m
            .offsets
            .iter()
            .map(|o| (*o).max(0) as usize / 2)
            .max()
            .unwrap_or(0);
        let build = |p: usize| -> Result<Band> {
            let np = (n + 1 - p) / 2;
            let mut band = Band {
                n: np,
                kl,
                ku,
                a: vec![0.0; np * (kl + ku + 1)],
            };
            for r in 0..np {
                for c in r.saturating_sub(kl)..=(r + ku).min(np.saturating_sub(1)) {
                    let i = band.idx(r, c);
                    band.a[i] = m.get(2 * r + p, 2 * c + p);
                }
            }
            band.factor(p)?;
            Ok(band)
        };
        Ok(ParityBandedLu {
            n,
            parts: [build(0)?, build(1)?],
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn solve_in_place<T: Coeff>(&self, x: &mut [T]) {
        assert_eq!(x.len(), self.n);
        self.parts[0].solve(x, 0);
        self.parts[1].solve(x, 1);
    }
}
