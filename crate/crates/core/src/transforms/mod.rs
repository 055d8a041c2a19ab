//! Forward and inverse transforms between the physical mesh and the
//! spectral spaces.
//!
//! Fourier transforms in the periodic directions are unnormalized in the
//! forward direction; the inverse carries the factor `1/(N_y N_z)`. The z
//! direction keeps the half spectrum `n = 0..=N_z/2` of a real field.

mod chebyshev;

pub use chebyshev::{
    chebyshev_derivative, chebyshev_scalar, evaluate_chebyshev, shen_scalar,
    shen_scalar_from_chebyshev, shen_to_chebyshev, ChebyshevLine, ComplexChebyshevLine,
    LineTransform,
};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Space, WavenumberGrid};
use ndarray::{Array2, Array3, Axis, Zip};
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Real samples of a scalar on the collocation mesh, shape `(n_x+1, n_y, n_z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    pub data: Array3<f64>,
}

impl PhysicalField {
    pub fn zeros(mesh: &Mesh) -> Self {
        PhysicalField {
            data: Array3::zeros(mesh.physical_shape()),
        }
    }

    /// Samples `f(x, y, z)` on the mesh.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let y = mesh.y();
        let z = mesh.z();
        let data =
            Array3::from_shape_fn(mesh.physical_shape(), |(i, j, k)| f(mesh.x[i], y[j], z[k]));
        PhysicalField { data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Complex expansion coefficients, shape `(l_max+1, n_y, n_z/2+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub space: Space,
    pub data: Array3<Complex64>,
}

impl SpectralField {
    pub fn zeros(mesh: &Mesh, space: Space) -> Self {
        SpectralField {
            space,
            data: Array3::zeros(mesh.spectral_shape(space)),
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        let s = self.data.shape();
        [s[0], s[1], s[2]]
    }

    pub fn line(&self, m: usize, n: usize) -> Vec<Complex64> {
        self.data.slice(ndarray::s![.., m, n]).to_vec()
    }

    pub fn set_line(&mut self, m: usize, n: usize, values: &[Complex64]) {
        self.data
            .slice_mut(ndarray::s![.., m, n])
            .iter_mut()
            .zip(values)
            .for_each(|(d, v)| *d = *v);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Makes the `n = 0` (and `n = N_z/2`) planes Hermitian in `m`, so the
    /// coefficients represent a real field.
    pub fn enforce_hermitian(&mut self) {
        let n_y = self.data.shape()[1];
        let n_zh = self.data.shape()[2];
        let planes: Vec<usize> = if n_zh > 1 { vec![0, n_zh - 1] } else { vec![0] };
        for n in planes {
            for m in 0..n_y {
                let mp = (n_y - m) % n_y;
                if mp < m {
                    continue;
                }
                for l in 0..self.data.shape()[0] {
                    if mp == m {
                        self.data[[l, m, n]].im = 0.0;
                    } else {
                        let a = 0.5 * (self.data[[l, m, n]] + self.data[[l, mp, n]].conj());
                        self.data[[l, m, n]] = a;
                        self.data[[l, mp, n]] = a.conj();
                    }
                }
            }
        }
    }

    /// Multiplies every `(m, n)` line by `mask[[m, n]]`.
    pub fn apply_mask(&mut self, mask: &Array2<f64>) {
        for mut plane in self.data.axis_iter_mut(Axis(0)) {
            Zip::from(&mut plane).and(mask).for_each(|v, s| *v *= *s);
        }
    }
}

/// Mask that zeroes the unpaired Nyquist modes `m = -N_y/2`, `n = N_z/2`.
pub fn nyquist_mask(grid: &WavenumberGrid) -> Array2<f64> {
    Array2::from_shape_fn((grid.n_y(), grid.n_zh()), |(m, n)| {
        if grid.is_nyquist(m, n) {
            0.0
        } else {
            1.0
        }
    })
}

/// 2/3-rule truncation mask: keeps `3|m| < N_y` and `3n < N_z`.
pub fn dealias_mask(grid: &WavenumberGrid) -> Array2<f64> {
    let n_y = grid.n_y() as i64;
    let n_z = 2 * (grid.n_zh() as i64 - 1);
    Array2::from_shape_fn((grid.n_y(), grid.n_zh()), |(m, n)| {
        let ms = crate::mesh::signed_index(m, n_y as usize).abs();
        if 3 * ms < n_y && 3 * (n as i64) < n_z && !grid.is_nyquist(m, n) {
            1.0
        } else {
            0.0
        }
    })
}

/// Applies `f` to every lane along axis 0, staging a few neighbouring lanes
/// at a time in contiguous buffers.
pub(crate) fn map_lanes<S>(
    src: &Array3<Complex64>,
    dst: &mut Array3<Complex64>,
    init: impl Fn() -> S + Sync,
    f: impl Fn(&[Complex64], &mut [Complex64], &mut S) + Sync,
) {
    const CHUNK: usize = 4;
    let (ls, ld) = (src.shape()[0], dst.shape()[0]);
    Zip::from(dst.axis_iter_mut(Axis(1)))
        .and(src.axis_iter(Axis(1)))
        .par_for_each(|mut d, s| {
            let nz = s.ncols();
            let mut sb = vec![Complex64::default(); ls * CHUNK];
            let mut db = vec![Complex64::default(); ld * CHUNK];
            let mut scratch = init();
            for n0 in (0..nz).step_by(CHUNK) {
                let w = CHUNK.min(nz - n0);
                for (i, row) in s.outer_iter().enumerate() {
                    for c in 0..w {
                        sb[c * ls + i] = row[n0 + c];
                    }
                }
                for c in 0..w {
                    f(
                        &sb[c * ls..(c + 1) * ls],
                        &mut db[c * ld..(c + 1) * ld],
                        &mut scratch,
                    );
                }
                for (i, mut row) in d.outer_iter_mut().enumerate() {
                    for c in 0..w {
                        row[n0 + c] = db[c * ld + i];
                    }
                }
            }
        });
}

/// Planned transforms for one mesh, shared by all fields on it.
#[derive(Clone)]
pub struct Transformer {
    mesh: Arc<Mesh>,
    lines: [LineTransform; 3],
    fft_y: Arc<dyn Fft<f64>>,
    ifft_y: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

fn space_index(space: Space) -> usize {
    match space {
        Space::Full => 0,
        Space::Dirichlet => 1,
        Space::Biharmonic => 2,
    }
}

impl Transformer {
    pub fn new(mesh: Arc<Mesh>) -> Self {
        let lines = Space::ALL.map(|s| LineTransform::new(mesh.n_x, mesh.family, s));
        let mut planner = FftPlanner::new();
        let fft_y = planner.plan_fft_forward(mesh.n_y);
        let ifft_y = planner.plan_fft_inverse(mesh.n_y);
        let mut rplanner = RealFftPlanner::new();
        let r2c = rplanner.plan_fft_forward(mesh.n_z);
        let c2r = rplanner.plan_fft_inverse(mesh.n_z);
        Transformer {
            mesh,
            lines,
            fft_y,
            ifft_y,
            r2c,
            c2r,
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn line(&self, space: Space) -> &LineTransform {
        &self.lines[space_index(space)]
    }

    fn check_physical(&self, field: &PhysicalField) -> Result<()> {
        let expected = self.mesh.physical_shape();
        if field.data.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_vec(),
                found: field.data.shape().to_vec(),
            });
        }
        Ok(())
    }

    fn check_spectral(&self, field: &SpectralField) -> Result<()> {
        let expected = self.mesh.spectral_shape(field.space);
        if field.data.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected: expected.to_vec(),
                found: field.data.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Unnormalized Fourier transform over z (real-to-half-complex) and y, per x-plane.
    pub fn fourier_forward(&self, data: &Array3<f64>) -> Array3<Complex64> {
        let [nxp, n_y, n_z] = self.mesh.physical_shape();
        let n_zh = n_z / 2 + 1;
        let mut out = Array3::<Complex64>::zeros((nxp, n_y, n_zh));
        Zip::from(out.axis_iter_mut(Axis(0)))
            .and(data.axis_iter(Axis(0)))
            .par_for_each(|mut o, d| {
                let mut rin = vec![0.0; n_z];
                let mut rout = vec![Complex64::default(); n_zh];
                let mut rscr = self.r2c.make_scratch_vec();
                for j in 0..n_y {
                    rin.iter_mut().zip(d.row(j)).for_each(|(a, b)| *a = *b);
                    self.r2c
                        .process_with_scratch(&mut rin, &mut rout, &mut rscr)
                        .expect("buffer sizes match the plan");
                    o.row_mut(j)
                        .iter_mut()
                        .zip(&rout)
                        .for_each(|(a, b)| *a = *b);
                }
                let mut col = vec![Complex64::default(); n_y];
                let mut scr = vec![Complex64::default(); self.fft_y.get_inplace_scratch_len()];
                for n in 0..n_zh {
                    col.iter_mut().zip(o.column(n)).for_each(|(a, b)| *a = *b);
                    self.fft_y.process_with_scratch(&mut col, &mut scr);
                    o.column_mut(n)
                        .iter_mut()
                        .zip(&col)
                        .for_each(|(a, b)| *a = *b);
                }
            });
        out
    }

    /// Inverse of [`fourier_forward`](Self::fourier_forward), including `1/(N_y N_z)`.
    pub fn fourier_inverse(&self, data: &Array3<Complex64>) -> Array3<f64> {
        let [nxp, n_y, n_z] = self.mesh.physical_shape();
        let n_zh = n_z / 2 + 1;
        let scale = 1.0 / (n_y * n_z) as f64;
        let mut out = Array3::<f64>::zeros((nxp, n_y, n_z));
        Zip::from(out.axis_iter_mut(Axis(0)))
            .and(data.axis_iter(Axis(0)))
            .par_for_each(|mut o, d| {
                let mut plane = d.to_owned();
                let mut col = vec![Complex64::default(); n_y];
                let mut scr = vec![Complex64::default(); self.ifft_y.get_inplace_scratch_len()];
                for n in 0..n_zh {
                    col.iter_mut()
                        .zip(plane.column(n))
                        .for_each(|(a, b)| *a = *b);
                    self.ifft_y.process_with_scratch(&mut col, &mut scr);
                    plane
                        .column_mut(n)
                        .iter_mut()
                        .zip(&col)
                        .for_each(|(a, b)| *a = *b);
                }
                let mut cin = vec![Complex64::default(); n_zh];
                let mut rout = vec![0.0; n_z];
                let mut rscr = self.c2r.make_scratch_vec();
                for j in 0..n_y {
                    cin.iter_mut().zip(plane.row(j)).for_each(|(a, b)| *a = *b);
                    cin[0].im = 0.0;
                    cin[n_zh - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(&mut cin, &mut rout, &mut rscr)
                        .expect("buffer sizes match the plan");
                    o.row_mut(j)
                        .iter_mut()
                        .zip(&rout)
                        .for_each(|(a, b)| *a = *b * scale);
                }
            });
        out
    }

    fn lines_forward(&self, hat: &Array3<Complex64>, out: &mut SpectralField, project: bool) {
        let line = self.line(out.space);
        let init = || vec![Complex64::default(); line.complex_work_len()];
        map_lanes(hat, &mut out.data, init, |src, dst, work| {
            if project {
                line.forward_complex(src, dst, work);
            } else {
                line.scalar_complex(src, dst, work);
            }
        });
    }

    /// Full forward transform into `space` (Fourier, Shen scalar product, mass solve).
    pub fn forward(&self, field: &PhysicalField, space: Space) -> Result<SpectralField> {
        self.check_physical(field)?;
        let hat = self.fourier_forward(&field.data);
        let mut out = SpectralField::zeros(&self.mesh, space);
        self.lines_forward(&hat, &mut out, true);
        Ok(out)
    }

    /// Fourier transforms followed by the Shen scalar product, without the mass solve.
    pub fn scalar_product(&self, field: &PhysicalField, space: Space) -> Result<SpectralField> {
        self.check_physical(field)?;
        let hat = self.fourier_forward(&field.data);
        let mut out = SpectralField::zeros(&self.mesh, space);
        self.lines_forward(&hat, &mut out, false);
        Ok(out)
    }

    /// Inverse transform of coefficients in any space back to the mesh.
    pub fn inverse(&self, coeffs: &SpectralField) -> Result<PhysicalField> {
        self.check_spectral(coeffs)?;
        let line = self.line(coeffs.space);
        let nxp = self.mesh.n_x + 1;
        let [_, n_y, n_zh] = coeffs.shape();
        let mut hat = Array3::<Complex64>::zeros((nxp, n_y, n_zh));
        let init = || vec![Complex64::default(); line.complex_work_len()];
        map_lanes(&coeffs.data, &mut hat, init, |src, dst, work| {
            line.inverse_complex(src, dst, work);
        });
        Ok(PhysicalField {
            data: self.fourier_inverse(&hat),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, PointFamily};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn mesh(family: PointFamily) -> Arc<Mesh> {
        Arc::new(build_mesh(8, 8, 8, 2.0 * PI, 2.0 * PI, family).unwrap())
    }

    #[test]
    fn single_mode_field() {
        for family in [
            PointFamily::ChebyshevGauss,
            PointFamily::ChebyshevGaussLobatto,
        ] {
            let mesh = mesh(family);
            let t = Transformer::new(mesh.clone());
            let mut c = vec![0.0; 9];
            let mut e3 = vec![0.0; 7];
            e3[3] = 1.0;
            shen_to_chebyshev(&e3, &mut c, Space::Dirichlet);
            let f = PhysicalField::from_fn(&mesh, |x, y, _| y.cos() * evaluate_chebyshev(&c, x));
            let s = t.forward(&f, Space::Dirichlet).unwrap();
            let expect = 0.5 * (mesh.n_y * mesh.n_z) as f64;
            for ((l, m, n), v) in s.data.indexed_iter() {
                let e = if l == 3 && (m == 1 || m == 7) && n == 0 {
                    expect
                } else {
                    0.0
                };
                assert_abs_diff_eq!(v.re, e, epsilon = 1e-11);
                assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn inverse_of_constant_dirichlet_mode() {
        let mesh = mesh(PointFamily::ChebyshevGauss);
        let t = Transformer::new(mesh.clone());
        let mut s = SpectralField::zeros(&mesh, Space::Dirichlet);
        s.data[[0, 0, 0]] = Complex64::new((mesh.n_y * mesh.n_z) as f64, 0.0);
        let f = t.inverse(&s).unwrap();
        for ((i, _, _), v) in f.data.indexed_iter() {
            let x = mesh.x[i];
            assert_abs_diff_eq!(*v, 1.0 - (2.0 * x * x - 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let mesh = mesh(PointFamily::ChebyshevGaussLobatto);
        let t = Transformer::new(mesh.clone());
        for space in Space::ALL {
            let s = t.forward(&PhysicalField::zeros(&mesh), space).unwrap();
            assert_eq!(s.max_abs(), 0.0);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mesh = mesh(PointFamily::ChebyshevGauss);
        let t = Transformer::new(mesh);
        let bad = PhysicalField {
            data: Array3::zeros((3, 8, 8)),
        };
        assert!(matches!(
            t.forward(&bad, Space::Full),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn dealias_mask_two_thirds() {
        let mesh = build_mesh(8, 12, 12, 1.0, 1.0, PointFamily::ChebyshevGauss).unwrap();
        let g = mesh.wavenumber_grid(Space::Full);
        let mask = dealias_mask(&g);
        let kept_m: Vec<usize> = (0..12).filter(|m| mask[[*m, 0]] == 1.0).collect();
        assert_eq!(kept_m, vec![0, 1, 2, 3, 9, 10, 11]);
        let kept_n: Vec<usize> = (0..7).filter(|n| mask[[0, *n]] == 1.0).collect();
        assert_eq!(kept_n, vec![0, 1, 2, 3]);
    }
}
