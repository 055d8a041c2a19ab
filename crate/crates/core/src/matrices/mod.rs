//! One-dimensional scalar-product matrices `(φ_j^{(d)}, φ_k)_σ`.
//!
//! Row index `k` belongs to the test function, column index `j` to the trial
//! function. Mass matrices are assembled from the basis stencils (exact under
//! the discrete Chebyshev orthogonality of both point families), derivative
//! matrices from closed forms. The stiffness matrices use the sign
//! `Ã = (φ̃''_j, φ̃_k)_σ`, `Ă = (φ̆''_j, φ̆_k)_σ`.

mod oracle;

pub use oracle::{basis_chebyshev, dense_oracle};

use crate::error::{Error, Result};
use crate::mesh::{PointFamily, Space};
use crate::Coeff;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Matrix stored by diagonals: `diagonals[d][k] = M[k, k + offsets[d]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix {
    pub rows: usize,
    pub cols: usize,
    pub offsets: Vec<isize>,
    pub diagonals: Vec<Vec<f64>>,
    pub symmetric: bool,
}

impl BandedMatrix {
    pub fn from_fn(
        rows: usize,
        cols: usize,
        offsets: &[isize],
        symmetric: bool,
        f: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let diagonals = offsets
            .iter()
            .map(|&o| {
                (0..rows)
                    .map(|k| {
                        let j = k as isize + o;
                        if j >= 0 && (j as usize) < cols {
                            f(k, j as usize)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        BandedMatrix {
            rows,
            cols,
            offsets: offsets.to_vec(),
            diagonals,
            symmetric,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        if k >= self.rows || j >= self.cols {
            return 0.0;
        }
        let o = j as isize - k as isize;
        self.offsets
            .iter()
            .position(|&d| d == o)
            .map_or(0.0, |d| self.diagonals[d][k])
    }

    /// `y += alpha * M x`.
    pub fn apply_acc<T: Coeff>(&self, alpha: f64, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (o, d) in self.offsets.iter().zip(&self.diagonals) {
            let k0 = if *o < 0 { (-o) as usize } else { 0 };
            let k1 = (self.cols as isize - o).clamp(0, self.rows as isize) as usize;
            for k in k0..k1 {
                let j = (k as isize + o) as usize;
                y[k] += x[j] * (alpha * d[k]);
            }
        }
    }

    pub fn apply<T: Coeff>(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.apply_acc(1.0, x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |k, j| self.get(k, j))
    }
}

/// Upper tail of a [`TailMatrix`]; applies to `j = k + start, k + start + 2, …`.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// `M[k, j] = p_k q_j + r_k s_j`.
    LowRank {
        start: usize,
        p: Vec<f64>,
        r: Vec<f64>,
        q: Arc<Vec<f64>>,
        s: Arc<Vec<f64>>,
    },
    /// `M[k, j] = value_k`.
    Constant { start: usize, value: Vec<f64> },
}

impl Tail {
    fn start(&self) -> usize {
        match self {
            Tail::LowRank { start, .. } | Tail::Constant { start, .. } => *start,
        }
    }
}

/// Banded matrix plus a structured, parity-coupled upper tail.
#[derive(Clone, Debug, PartialEq)]
pub struct TailMatrix {
    pub band: BandedMatrix,
    pub tail: Tail,
}

impl TailMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.band.shape()
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        let mut v = self.band.get(k, j);
        let start = self.tail.start();
        if k < self.band.rows && j < self.band.cols && j >= k + start && (j - k - start) % 2 == 0 {
            v += match &self.tail {
                Tail::LowRank { p, r, q, s, .. } => p[k] * q[j] + r[k] * s[j],
                Tail::Constant { value, .. } => value[k],
            };
        }
        v
    }

    /// `y += alpha * M x` in O(N), accumulating the tail with running parity sums.
    pub fn apply_acc<T: Coeff>(&self, alpha: f64, x: &[T], y: &mut [T]) {
        self.band.apply_acc(alpha, x, y);
        let (rows, cols) = self.shape();
        let start = self.tail.start();
        let mut sum_a = [T::zero(); 2];
        let mut sum_b = [T::zero(); 2];
        for k in (0..rows).rev() {
            let j = k + start;
            let par = j % 2;
            match &self.tail {
                Tail::LowRank { p, r, q, s, .. } => {
                    if j < cols {
                        sum_a[par] += x[j] * q[j];
                        sum_b[par] += x[j] * s[j];
                    }
                    y[k] += sum_a[par] * (alpha * p[k]) + sum_b[par] * (alpha * r[k]);
                }
                Tail::Constant { value, .. } => {
                    if j < cols {
                        sum_a[par] += x[j];
                    }
                    y[k] += sum_a[par] * (alpha * value[k]);
                }
            }
        }
    }

    pub fn apply<T: Coeff>(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.band.rows];
        self.apply_acc(1.0, x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (r, c) = self.shape();
        DMatrix::from_fn(r, c, |k, j| self.get(k, j))
    }
}

/// `c_k` of the discrete Chebyshev norm `(T_k, T_k) = c_k π/2`.
pub fn norm_factor(k: usize, n_x: usize, family: PointFamily) -> f64 {
    if k == 0 {
        2.0
    } else if k == n_x {
        family.last_norm_factor()
    } else {
        1.0
    }
}

/// Chebyshev stencil of basis function `k`: `φ_k = Σ coef · T_idx`.
pub fn stencil(space: Space, k: usize) -> Vec<(usize, f64)> {
    let kf = k as f64;
    match space {
        Space::Full => vec![(k, 1.0)],
        Space::Dirichlet => vec![(k, 1.0), (k + 2, -1.0)],
        Space::Biharmonic => vec![
            (k, 1.0),
            (k + 2, -2.0 * (kf + 2.0) / (kf + 3.0)),
            (k + 4, (kf + 1.0) / (kf + 3.0)),
        ],
    }
}

fn mass_entry(row: Space, k: usize, col: Space, j: usize, n_x: usize, family: PointFamily) -> f64 {
    let mut v = 0.0;
    for (a, ca) in stencil(row, k) {
        for (b, cb) in stencil(col, j) {
            if a == b {
                v += ca * cb * norm_factor(a, n_x, family) * PI / 2.0;
            }
        }
    }
    v
}

/// `B = (T_j, T_k)`, diagonal.
pub fn mass(n_x: usize, family: PointFamily) -> BandedMatrix {
    BandedMatrix::from_fn(n_x + 1, n_x + 1, &[0], true, |k, j| {
        mass_entry(Space::Full, k, Space::Full, j, n_x, family)
    })
}

/// `B̆ = (φ̆_j, φ̆_k)`.
pub fn mass_dirichlet(n_x: usize, family: PointFamily) -> BandedMatrix {
    let n = Space::Dirichlet.len(n_x);
    BandedMatrix::from_fn(n, n, &[-2, 0, 2], true, |k, j| {
        mass_entry(Space::Dirichlet, k, Space::Dirichlet, j, n_x, family)
    })
}

/// `B̃ = (φ̃_j, φ̃_k)`.
pub fn mass_biharmonic(n_x: usize, family: PointFamily) -> BandedMatrix {
    let n = Space::Biharmonic.len(n_x);
    BandedMatrix::from_fn(n, n, &[-4, -2, 0, 2, 4], true, |k, j| {
        mass_entry(Space::Biharmonic, k, Space::Biharmonic, j, n_x, family)
    })
}

/// `M̃ = (φ̆_j, φ̃_k)`, biharmonic rows, Dirichlet columns.
pub fn mixed_biharmonic(n_x: usize, family: PointFamily) -> BandedMatrix {
    BandedMatrix::from_fn(
        Space::Biharmonic.len(n_x),
        Space::Dirichlet.len(n_x),
        &[-2, 0, 2, 4],
        false,
        |k, j| mass_entry(Space::Biharmonic, k, Space::Dirichlet, j, n_x, family),
    )
}

/// `Ã = (φ̃''_j, φ̃_k)`.
pub fn stiffness_biharmonic(n_x: usize) -> BandedMatrix {
    let n = Space::Biharmonic.len(n_x);
    BandedMatrix::from_fn(n, n, &[-2, 0, 2], false, |k, j| {
        let kf = k as f64;
        if j + 2 == k {
            2.0 * PI * (kf + 2.0) * (kf - 1.0)
        } else if j == k {
            -4.0 * PI * (kf + 1.0) * (kf + 2.0).powi(2) / (kf + 3.0)
        } else {
            2.0 * PI * (kf + 1.0) * (kf + 2.0)
        }
    })
}

/// `Ă = (φ̆''_j, φ̆_k)`: diagonal plus a constant tail per row.
pub fn stiffness_dirichlet(n_x: usize) -> TailMatrix {
    let n = Space::Dirichlet.len(n_x);
    let band = BandedMatrix::from_fn(n, n, &[0], false, |k, _| {
        -2.0 * PI * (k as f64 + 1.0) * (k as f64 + 2.0)
    });
    let value = (0..n).map(|k| -4.0 * PI * (k as f64 + 1.0)).collect();
    TailMatrix {
        band,
        tail: Tail::Constant { start: 2, value },
    }
}

/// Column factors `q_j = 1/(j+3)`, `s_j = (j+2)²/(j+3)` of the fourth-derivative tail.
pub fn fourth_tail_columns(n_x: usize) -> (Arc<Vec<f64>>, Arc<Vec<f64>>) {
    let n = Space::Biharmonic.len(n_x);
    let q = (0..n).map(|j| 1.0 / (j as f64 + 3.0)).collect();
    let s = (0..n)
        .map(|j| (j as f64 + 2.0).powi(2) / (j as f64 + 3.0))
        .collect();
    (Arc::new(q), Arc::new(s))
}

/// `Q̃ = (φ̃''''_j, φ̃_k)`: diagonal plus the rank-two tail `p_k q_j + r_k s_j`.
pub fn fourth_biharmonic(n_x: usize) -> TailMatrix {
    let n = Space::Biharmonic.len(n_x);
    let band = BandedMatrix::from_fn(n, n, &[0], false, |k, _| {
        let kf = k as f64;
        8.0 * PI * (kf + 1.0).powi(2) * (kf + 2.0) * (kf + 4.0)
    });
    let p = (0..n)
        .map(|k| {
            let kf = k as f64;
            8.0 * PI * kf * (kf + 1.0) * (kf + 2.0) * (kf + 4.0)
        })
        .collect();
    let r = (0..n)
        .map(|k| 24.0 * PI * (k as f64 + 1.0) * (k as f64 + 2.0))
        .collect();
    let (q, s) = fourth_tail_columns(n_x);
    TailMatrix {
        band,
        tail: Tail::LowRank {
            start: 2,
            p,
            r,
            q,
            s,
        },
    }
}

/// `C̃ = (φ̆'_j, φ̃_k)`, biharmonic rows, Dirichlet columns.
pub fn derivative_biharmonic(n_x: usize) -> BandedMatrix {
    BandedMatrix::from_fn(
        Space::Biharmonic.len(n_x),
        Space::Dirichlet.len(n_x),
        &[-1, 1, 3],
        false,
        |k, j| {
            let kf = k as f64;
            if j + 1 == k {
                -PI * (kf + 1.0)
            } else if j == k + 1 {
                2.0 * PI * (kf + 1.0)
            } else {
                -PI * (kf + 1.0)
            }
        },
    )
}

/// `C̆ = (φ̃'_j, φ̆_k)`, Dirichlet rows, biharmonic columns.
pub fn derivative_dirichlet(n_x: usize) -> BandedMatrix {
    BandedMatrix::from_fn(
        Space::Dirichlet.len(n_x),
        Space::Biharmonic.len(n_x),
        &[-3, -1, 1],
        false,
        |k, j| {
            let kf = k as f64;
            if j + 3 == k {
                PI * (kf - 2.0) * (kf + 1.0) / kf
            } else if j + 1 == k {
                -2.0 * PI * (kf + 1.0).powi(2) / (kf + 2.0)
            } else {
                PI * (kf + 1.0)
            }
        },
    )
}

/// `C = (φ̆'_j, T_k)`, Chebyshev rows, Dirichlet columns.
pub fn derivative_full(n_x: usize) -> TailMatrix {
    let rows = Space::Full.len(n_x);
    let band = BandedMatrix::from_fn(rows, Space::Dirichlet.len(n_x), &[-1], false, |k, _| {
        -PI * (k as f64 + 1.0)
    });
    TailMatrix {
        band,
        tail: Tail::Constant {
            start: 1,
            value: vec![-2.0 * PI; rows],
        },
    }
}

/// Identifier of each matrix in a [`MatrixSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixId {
    Mass,
    MassDirichlet,
    MassBiharmonic,
    StiffnessBiharmonic,
    StiffnessDirichlet,
    FourthBiharmonic,
    DerivativeBiharmonic,
    DerivativeDirichlet,
    DerivativeFull,
    MixedBiharmonic,
}

impl MatrixId {
    pub const ALL: [MatrixId; 10] = [
        MatrixId::Mass,
        MatrixId::MassDirichlet,
        MatrixId::MassBiharmonic,
        MatrixId::StiffnessBiharmonic,
        MatrixId::StiffnessDirichlet,
        MatrixId::FourthBiharmonic,
        MatrixId::DerivativeBiharmonic,
        MatrixId::DerivativeDirichlet,
        MatrixId::DerivativeFull,
        MatrixId::MixedBiharmonic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixId::Mass => "B",
            MatrixId::MassDirichlet => "B-dirichlet",
            MatrixId::MassBiharmonic => "B-biharmonic",
            MatrixId::StiffnessBiharmonic => "A-biharmonic",
            MatrixId::StiffnessDirichlet => "A-dirichlet",
            MatrixId::FourthBiharmonic => "Q-biharmonic",
            MatrixId::DerivativeBiharmonic => "C-biharmonic",
            MatrixId::DerivativeDirichlet => "C-dirichlet",
            MatrixId::DerivativeFull => "C",
            MatrixId::MixedBiharmonic => "M-biharmonic",
        }
    }

    /// `(row space, column space, derivative order)` of the defining scalar product.
    pub fn signature(self) -> (Space, Space, usize) {
        use Space::*;
        match self {
            MatrixId::Mass => (Full, Full, 0),
            MatrixId::MassDirichlet => (Dirichlet, Dirichlet, 0),
            MatrixId::MassBiharmonic => (Biharmonic, Biharmonic, 0),
            MatrixId::StiffnessBiharmonic => (Biharmonic, Biharmonic, 2),
            MatrixId::StiffnessDirichlet => (Dirichlet, Dirichlet, 2),
            MatrixId::FourthBiharmonic => (Biharmonic, Biharmonic, 4),
            MatrixId::DerivativeBiharmonic => (Biharmonic, Dirichlet, 1),
            MatrixId::DerivativeDirichlet => (Dirichlet, Biharmonic, 1),
            MatrixId::DerivativeFull => (Full, Dirichlet, 1),
            MatrixId::MixedBiharmonic => (Biharmonic, Dirichlet, 0),
        }
    }
}

impl fmt::Display for MatrixId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MatrixId::ALL
            .iter()
            .copied()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<_> = MatrixId::ALL.iter().map(|i| i.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown matrix '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

/// All one-dimensional matrices for a given `n_x` and point family.
#[derive(Clone, Debug)]
pub struct MatrixSet {
    pub n_x: usize,
    pub family: PointFamily,
    pub mass: BandedMatrix,
    pub mass_dirichlet: BandedMatrix,
    pub mass_biharmonic: BandedMatrix,
    pub stiffness_biharmonic: BandedMatrix,
    pub stiffness_dirichlet: TailMatrix,
    pub fourth_biharmonic: TailMatrix,
    pub derivative_biharmonic: BandedMatrix,
    pub derivative_dirichlet: BandedMatrix,
    pub derivative_full: TailMatrix,
    pub mixed_biharmonic: BandedMatrix,
}

impl MatrixSet {
    pub fn assemble(n_x: usize, family: PointFamily) -> Result<Self> {
        if n_x < 8 {
            return Err(Error::InvalidMesh(format!("n_x = {n_x} < 8")));
        }
        Ok(MatrixSet {
            n_x,
            family,
            mass: mass(n_x, family),
            mass_dirichlet: mass_dirichlet(n_x, family),
            mass_biharmonic: mass_biharmonic(n_x, family),
            stiffness_biharmonic: stiffness_biharmonic(n_x),
            stiffness_dirichlet: stiffness_dirichlet(n_x),
            fourth_biharmonic: fourth_biharmonic(n_x),
            derivative_biharmonic: derivative_biharmonic(n_x),
            derivative_dirichlet: derivative_dirichlet(n_x),
            derivative_full: derivative_full(n_x),
            mixed_biharmonic: mixed_biharmonic(n_x, family),
        })
    }

    pub fn dense(&self, id: MatrixId) -> DMatrix<f64> {
        match id {
            MatrixId::Mass => self.mass.to_dense(),
            MatrixId::MassDirichlet => self.mass_dirichlet.to_dense(),
            MatrixId::MassBiharmonic => self.mass_biharmonic.to_dense(),
            MatrixId::StiffnessBiharmonic => self.stiffness_biharmonic.to_dense(),
            MatrixId::StiffnessDirichlet => self.stiffness_dirichlet.to_dense(),
            MatrixId::FourthBiharmonic => self.fourth_biharmonic.to_dense(),
            MatrixId::DerivativeBiharmonic => self.derivative_biharmonic.to_dense(),
            MatrixId::DerivativeDirichlet => self.derivative_dirichlet.to_dense(),
            MatrixId::DerivativeFull => self.derivative_full.to_dense(),
            MatrixId::MixedBiharmonic => self.mixed_biharmonic.to_dense(),
        }
    }

    /// O(N) product of matrix `id` with `x`.
    pub fn apply<T: Coeff>(&self, id: MatrixId, x: &[T]) -> Vec<T> {
        match id {
            MatrixId::Mass => self.mass.apply(x),
            MatrixId::MassDirichlet => self.mass_dirichlet.apply(x),
            MatrixId::MassBiharmonic => self.mass_biharmonic.apply(x),
            MatrixId::StiffnessBiharmonic => self.stiffness_biharmonic.apply(x),
            MatrixId::StiffnessDirichlet => self.stiffness_dirichlet.apply(x),
            MatrixId::FourthBiharmonic => self.fourth_biharmonic.apply(x),
            MatrixId::DerivativeBiharmonic => self.derivative_biharmonic.apply(x),
            MatrixId::DerivativeDirichlet => self.derivative_dirichlet.apply(x),
            MatrixId::DerivativeFull => self.derivative_full.apply(x),
            MatrixId::MixedBiharmonic => self.mixed_biharmonic.apply(x),
        }
    }
}

/// Dense text grid of a matrix, one row per line.
pub fn dump_dense(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for k in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:>14.6e}", m[(k, j)]))
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
