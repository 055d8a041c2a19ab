//! Collocation points, quadrature weights and wavenumber grids.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Chebyshev quadrature family used in the wall-normal direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointFamily {
    /// Gauss points, all strictly inside (-1, 1).
    ChebyshevGauss,
    /// Gauss-Lobatto points, including both walls.
    ChebyshevGaussLobatto,
}

impl PointFamily {
    /// Points `x_i`, `i = 0..=n_x`, in decreasing order.
    pub fn points(self, n_x: usize) -> Vec<f64> {
        match self {
            PointFamily::ChebyshevGauss => (0..=n_x)
                .map(|i| ((2 * i + 1) as f64 * PI / (2 * n_x + 2) as f64).cos())
                .collect(),
            PointFamily::ChebyshevGaussLobatto => (0..=n_x)
                .map(|i| {
                    // exact symmetry and exact zero at the midpoint
                    if 2 * i == n_x {
                        0.0
                    } else if 2 * i < n_x {
                        (i as f64 * PI / n_x as f64).cos()
                    } else {
                        -(((n_x - i) as f64) * PI / n_x as f64).cos()
                    }
                })
                .collect(),
        }
    }

    /// Quadrature weights for the Chebyshev weight `σ = (1-x²)^{-1/2}`.
    pub fn weights(self, n_x: usize) -> Vec<f64> {
        match self {
            PointFamily::ChebyshevGauss => vec![PI / (n_x + 1) as f64; n_x + 1],
            PointFamily::ChebyshevGaussLobatto => (0..=n_x)
                .map(|i| {
                    if i == 0 || i == n_x {
                        PI / (2 * n_x) as f64
                    } else {
                        PI / n_x as f64
                    }
                })
                .collect(),
        }
    }

    /// `c_{N_x}` of the discrete Chebyshev norm: 2 on Gauss-Lobatto, 1 on Gauss.
    pub fn last_norm_factor(self) -> f64 {
        match self {
            PointFamily::ChebyshevGauss => 1.0,
            PointFamily::ChebyshevGaussLobatto => 2.0,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            PointFamily::ChebyshevGauss => "GC",
            PointFamily::ChebyshevGaussLobatto => "GL",
        }
    }
}

impl fmt::Display for PointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for PointFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gc" | "gauss" | "chebyshev-gauss" => Ok(PointFamily::ChebyshevGauss),
            "gl" | "lobatto" | "gauss-lobatto" | "chebyshev-gauss-lobatto" => {
                Ok(PointFamily::ChebyshevGaussLobatto)
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown point family '{s}' (expected GC or GL)"
            ))),
        }
    }
}

/// Wall-normal function space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Plain Chebyshev polynomials `T_k`, `k ≤ N_x`.
    Full,
    /// Dirichlet basis `T_k - T_{k+2}`, `k ≤ N_x - 2`.
    Dirichlet,
    /// Biharmonic (clamped) basis, `k ≤ N_x - 4`.
    Biharmonic,
}

impl Space {
    pub fn l_max(self, n_x: usize) -> usize {
        match self {
            Space::Full => n_x,
            Space::Dirichlet => n_x - 2,
            Space::Biharmonic => n_x - 4,
        }
    }

    /// Number of retained modes, `l_max + 1`.
    pub fn len(self, n_x: usize) -> usize {
        self.l_max(n_x) + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::Full => "chebyshev",
            Space::Dirichlet => "dirichlet",
            Space::Biharmonic => "biharmonic",
        }
    }

    pub const ALL: [Space; 3] = [Space::Full, Space::Dirichlet, Space::Biharmonic];
}

/// Tensor-product mesh of the channel.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub l_y: f64,
    pub l_z: f64,
    pub family: PointFamily,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

pub fn build_mesh(
    n_x: usize,
    n_y: usize,
    n_z: usize,
    l_y: f64,
    l_z: f64,
    family: PointFamily,
) -> Result<Mesh> {
    if n_x < 8 {
        return Err(Error::InvalidMesh(format!("n_x = {n_x} < 8")));
    }
    for (name, n) in [("n_y", n_y), ("n_z", n_z)] {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidMesh(format!(
                "{name} = {n} must be even and at least 2"
            )));
        }
    }
    for (name, l) in [("l_y", l_y), ("l_z", l_z)] {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidMesh(format!("{name} = {l} must be positive")));
        }
    }
    Ok(Mesh {
        n_x,
        n_y,
        n_z,
        l_y,
        l_z,
        family,
        x: family.points(n_x),
        w: family.weights(n_x),
    })
}

impl Mesh {
    pub fn physical_shape(&self) -> [usize; 3] {
        [self.n_x + 1, self.n_y, self.n_z]
    }

    pub fn spectral_shape(&self, space: Space) -> [usize; 3] {
        [space.len(self.n_x), self.n_y, self.n_z / 2 + 1]
    }

    /// Periodic coordinates `y_j = j L_y / N_y`.
    pub fn y(&self) -> Vec<f64> {
        (0..self.n_y)
            .map(|j| j as f64 * self.l_y / self.n_y as f64)
            .collect()
    }

    pub fn z(&self) -> Vec<f64> {
        (0..self.n_z)
            .map(|k| k as f64 * self.l_z / self.n_z as f64)
            .collect()
    }

    pub fn wavenumber_grid(&self, space: Space) -> WavenumberGrid {
        wavenumber_grid(self, space)
    }
}

/// Scaled wavenumbers of the periodic directions for one wall-normal space.
///
/// `m_scaled` follows the FFT layout `0, 1, …, N_y/2-1, -N_y/2, …, -1`;
/// `n_scaled` is the half spectrum `0, …, N_z/2`.
#[derive(Clone, Debug)]
pub struct WavenumberGrid {
    pub space: Space,
    pub l_max: usize,
    pub m_scaled: Vec<f64>,
    pub n_scaled: Vec<f64>,
}

pub fn wavenumber_grid(mesh: &Mesh, space: Space) -> WavenumberGrid {
    let m_scaled = (0..mesh.n_y)
        .map(|j| 2.0 * PI * signed_index(j, mesh.n_y) as f64 / mesh.l_y)
        .collect();
    let n_scaled = (0..=mesh.n_z / 2)
        .map(|k| 2.0 * PI * k as f64 / mesh.l_z)
        .collect();
    WavenumberGrid {
        space,
        l_max: space.l_max(mesh.n_x),
        m_scaled,
        n_scaled,
    }
}

/// Signed wavenumber of FFT slot `j` for a transform of length `n`.
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl WavenumberGrid {
    pub fn z2(&self, m: usize, n: usize) -> f64 {
        self.m_scaled[m] * self.m_scaled[m] + self.n_scaled[n] * self.n_scaled[n]
    }

    pub fn n_y(&self) -> usize {
        self.m_scaled.len()
    }

    /// Length of the half spectrum in z.
    pub fn n_zh(&self) -> usize {
        self.n_scaled.len()
    }

    /// True for the unpaired modes `m = -N_y/2` or `n = N_z/2`.
    pub fn is_nyquist(&self, m: usize, n: usize) -> bool {
        m == self.n_y() / 2 || n == self.n_zh() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lobatto_points_and_weights_n4() {
        let x = PointFamily::ChebyshevGaussLobatto.points(4);
        let h = (PI / 4.0).cos();
        for (a, b) in x.iter().zip([1.0, h, 0.0, -h, -1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let w = PointFamily::ChebyshevGaussLobatto.weights(4);
        for (a, b) in w
            .iter()
            .zip([PI / 8.0, PI / 4.0, PI / 4.0, PI / 4.0, PI / 8.0])
        {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn gauss_weights_sum_to_pi() {
        let s: f64 = PointFamily::ChebyshevGauss.weights(7).iter().sum();
        assert_abs_diff_eq!(s, PI, epsilon = 1e-15);
    }

    #[test]
    fn points_decrease_and_family_interior() {
        for n in [8, 9, 16, 33] {
            let g = PointFamily::ChebyshevGauss.points(n);
            let l = PointFamily::ChebyshevGaussLobatto.points(n);
            assert!(g.windows(2).all(|p| p[0] > p[1]));
            assert!(l.windows(2).all(|p| p[0] > p[1]));
            assert!(g.iter().all(|x| x.abs() < 1.0));
            assert_eq!(l[0], 1.0);
            assert_eq!(l[n], -1.0);
        }
    }

    fn weighted_moment(d: usize) -> f64 {
        // ∫ x^d (1-x²)^{-1/2} dx = π (d-1)!!/d!! for even d
        if d % 2 == 1 {
            return 0.0;
        }
        let mut v = PI;
        let mut k = 1;
        while k < d {
            v *= k as f64 / (k + 1) as f64;
            k += 2;
        }
        v
    }

    #[test]
    fn quadrature_exact_for_low_monomials() {
        for family in [
            PointFamily::ChebyshevGauss,
            PointFamily::ChebyshevGaussLobatto,
        ] {
            for n in [8, 12, 17] {
                let x = family.points(n);
                let w = family.weights(n);
                for d in 0..=6 {
                    let s: f64 = x.iter().zip(&w).map(|(x, w)| x.powi(d as i32) * w).sum();
                    assert_abs_diff_eq!(s, weighted_moment(d), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn build_mesh_rejects_bad_sizes() {
        let f = PointFamily::ChebyshevGauss;
        assert!(build_mesh(4, 4, 4, 1.0, 1.0, f).is_err());
        assert!(build_mesh(8, 3, 4, 1.0, 1.0, f).is_err());
        assert!(build_mesh(8, 4, 5, 1.0, 1.0, f).is_err());
        assert!(build_mesh(8, 4, 4, 0.0, 1.0, f).is_err());
        let m = build_mesh(9, 2, 2, 1.0, 1.0, f).unwrap();
        assert_eq!(m.x.len(), 10);
        assert!(m.w.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn wavenumbers_follow_fft_layout() {
        let mesh = build_mesh(16, 4, 6, 2.0 * PI, PI, PointFamily::ChebyshevGauss).unwrap();
        let g = mesh.wavenumber_grid(Space::Biharmonic);
        assert_eq!(g.m_scaled, vec![0.0, 1.0, -2.0, -1.0]);
        assert_eq!(g.n_scaled, vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(g.l_max, 12);
        assert_eq!(mesh.wavenumber_grid(Space::Dirichlet).l_max, 14);
        assert_eq!(mesh.wavenumber_grid(Space::Full).l_max, 16);
        assert!(g.is_nyquist(2, 0) && g.is_nyquist(0, 3) && !g.is_nyquist(1, 2));
        assert_abs_diff_eq!(g.z2(3, 1), 5.0);
    }
}
