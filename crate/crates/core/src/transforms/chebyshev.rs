//! One-dimensional Chebyshev and Shen transforms along a wall-normal line.

use crate::matrices::{mass_biharmonic, mass_dirichlet};
use crate::mesh::{PointFamily, Space};
use crate::solvers::ParityBandedLu;
use crate::Coeff;
use num_complex::Complex64;
use rustdct::{Dct1, DctPlanner, TransformType2And3};
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone)]
enum Plan {
    Gauss(Arc<dyn TransformType2And3<f64>>),
    Lobatto(Arc<dyn Dct1<f64>>),
}

/// Fast Chebyshev scalar products and evaluations on `n_x + 1` points.
#[derive(Clone)]
pub struct ChebyshevLine {
    n_x: usize,
    family: PointFamily,
    plan: Plan,
}

impl ChebyshevLine {
    pub fn new(n_x: usize, family: PointFamily) -> Self {
        let mut planner = DctPlanner::new();
        let plan = match family {
            PointFamily::ChebyshevGauss => Plan::Gauss(planner.plan_dct2(n_x + 1)),
            PointFamily::ChebyshevGaussLobatto => Plan::Lobatto(planner.plan_dct1(n_x + 1)),
        };
        ChebyshevLine { n_x, family, plan }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn family(&self) -> PointFamily {
        self.family
    }

    pub fn scratch_len(&self) -> usize {
        match &self.plan {
            Plan::Gauss(p) => p.get_scratch_len(),
            Plan::Lobatto(p) => p.get_scratch_len(),
        }
    }

    /// Overwrites point values `f(x_i)` with `w_k = Σ_i f(x_i) T_k(x_i) w_i`.
    pub fn scalar_in_place(&self, buf: &mut [f64], scratch: &mut [f64]) {
        assert_eq!(buf.len(), self.n_x + 1);
        match &self.plan {
            Plan::Gauss(p) => {
                p.process_dct2_with_scratch(buf, scratch);
                let s = PI / (self.n_x + 1) as f64;
                buf.iter_mut().for_each(|v| *v *= s);
            }
            Plan::Lobatto(p) => {
                p.process_dct1_with_scratch(buf, scratch);
                let s = PI / self.n_x as f64;
                buf.iter_mut().for_each(|v| *v *= s);
            }
        }
    }

    /// Overwrites Chebyshev coefficients with point values `Σ_k c_k T_k(x_i)`.
    pub fn evaluate_in_place(&self, buf: &mut [f64], scratch: &mut [f64]) {
        assert_eq!(buf.len(), self.n_x + 1);
        let f0 = buf[0];
        match &self.plan {
            Plan::Gauss(p) => {
                p.process_dct3_with_scratch(buf, scratch);
                buf.iter_mut().for_each(|v| *v += 0.5 * f0);
            }
            Plan::Lobatto(p) => {
                let f_last = buf[self.n_x];
                p.process_dct1_with_scratch(buf, scratch);
                for (j, v) in buf.iter_mut().enumerate() {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    *v += 0.5 * f0 + 0.5 * sign * f_last;
                }
            }
        }
    }
}

/// [`ChebyshevLine`] for complex lines, with one complex FFT per line.
///
/// Gauss points use the even/odd reordering of the input into an FFT of
/// length `n_x + 1`; Lobatto points use the even extension of length `2 n_x`.
#[derive(Clone)]
pub struct ComplexChebyshevLine {
    n_x: usize,
    family: PointFamily,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
}

impl ComplexChebyshevLine {
    pub fn new(n_x: usize, family: PointFamily) -> Self {
        let mut planner = FftPlanner::new();
        let (len, twiddle) = match family {
            PointFamily::ChebyshevGauss => {
                let m = n_x + 1;
                let tw = (0..m)
                    .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * m) as f64))
                    .collect();
                (m, tw)
            }
            PointFamily::ChebyshevGaussLobatto => (2 * n_x, Vec::new()),
        };
        ComplexChebyshevLine {
            n_x,
            family,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            twiddle,
        }
    }

    fn fft_len(&self) -> usize {
        self.fwd.len()
    }

    pub fn scratch_len(&self) -> usize {
        self.fft_len()
            + self
                .fwd
                .get_inplace_scratch_len()
                .max(self.inv.get_inplace_scratch_len())
    }

    fn lobatto_sum(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.n_x;
        let (ext, fs) = scratch.split_at_mut(2 * n);
        ext[..=n].copy_from_slice(buf);
        for i in 1..n {
            ext[2 * n - i] = buf[i];
        }
        self.fwd.process_with_scratch(ext, fs);
        for (b, e) in buf.iter_mut().zip(ext.iter()) {
            *b = e * 0.5;
        }
    }

    /// Complex counterpart of [`ChebyshevLine::scalar_in_place`].
    pub fn scalar_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n_x + 1);
        match self.family {
            PointFamily::ChebyshevGauss => {
                let m = self.n_x + 1;
                let (v, fs) = scratch.split_at_mut(m);
                for (n, x) in buf.iter().enumerate() {
                    let idx = if n % 2 == 0 { n / 2 } else { m - 1 - n / 2 };
                    v[idx] = *x;
                }
                self.fwd.process_with_scratch(v, fs);
                let s = PI / m as f64;
                buf[0] = v[0] * s;
                let s = 0.5 * s;
                for k in 1..m {
                    let w = self.twiddle[k];
                    buf[k] = (w * v[k] + w.conj() * v[m - k]) * s;
                }
            }
            PointFamily::ChebyshevGaussLobatto => {
                self.lobatto_sum(buf, scratch);
                let s = PI / self.n_x as f64;
                buf.iter_mut().for_each(|v| *v *= s);
            }
        }
    }

    /// Complex counterpart of [`ChebyshevLine::evaluate_in_place`].
    pub fn evaluate_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n_x + 1);
        let c0 = buf[0];
        match self.family {
            PointFamily::ChebyshevGauss => {
                let m = self.n_x + 1;
                let (z, fs) = scratch.split_at_mut(m);
                const NEG_I: Complex64 = Complex64 { re: 0.0, im: -1.0 };
                z[0] = buf[0];
                for k in 1..m {
                    z[k] = (buf[k] + NEG_I * buf[m - k]) * self.twiddle[k].conj();
                }
                self.inv.process_with_scratch(z, fs);
                for n in 0..m {
                    let idx = if n % 2 == 0 { n / 2 } else { m - 1 - n / 2 };
                    buf[n] = z[idx] * 0.5 + c0 * 0.5;
                }
            }
            PointFamily::ChebyshevGaussLobatto => {
                let c_last = buf[self.n_x];
                self.lobatto_sum(buf, scratch);
                for (j, v) in buf.iter_mut().enumerate() {
                    let sign = if j % 2 == 0 { 0.5 } else { -0.5 };
                    *v += c0 * 0.5 + c_last * sign;
                }
            }
        }
    }
}

/// Turns Chebyshev scalar products `w` (length `n_x + 1`) into scalar products
/// with the basis of `space`; writes `space.len(n_x)` entries of `out`.
pub fn shen_scalar_from_chebyshev<T: Coeff>(w: &[T], out: &mut [T], space: Space) {
    let n_x = w.len() - 1;
    match space {
        Space::Full => out[..=n_x].copy_from_slice(w),
        Space::Dirichlet => {
            for k in 0..=n_x - 2 {
                out[k] = w[k] - w[k + 2];
            }
        }
        Space::Biharmonic => {
            for k in 0..=n_x - 4 {
                let kf = k as f64;
                out[k] = w[k] - w[k + 2] * (2.0 * (kf + 2.0) / (kf + 3.0))
                    + w[k + 4] * ((kf + 1.0) / (kf + 3.0));
            }
        }
    }
}

/// Divides Chebyshev scalar products by the diagonal mass `c_k π/2`.
fn chebyshev_mass_solve<T: Coeff>(out: &mut [T], family: PointFamily) {
    let n_x = out.len() - 1;
    for v in out.iter_mut() {
        *v = *v * (2.0 / PI);
    }
    out[0] = out[0] * 0.5;
    out[n_x] = out[n_x] / family.last_norm_factor();
}

/// Expands coefficients of `space` into Chebyshev coefficients of length `n_x + 1`.
pub fn shen_to_chebyshev<T: Coeff>(coeffs: &[T], out: &mut [T], space: Space) {
    out.iter_mut().for_each(|v| *v = T::zero());
    match space {
        Space::Full => out.copy_from_slice(coeffs),
        Space::Dirichlet => {
            for (k, &c) in coeffs.iter().enumerate() {
                out[k] += c;
                out[k + 2] -= c;
            }
        }
        Space::Biharmonic => {
            for (k, &c) in coeffs.iter().enumerate() {
                let kf = k as f64;
                out[k] += c;
                out[k + 2] -= c * (2.0 * (kf + 2.0) / (kf + 3.0));
                out[k + 4] += c * ((kf + 1.0) / (kf + 3.0));
            }
        }
    }
}

/// Chebyshev scalar product `Σ_i f(x_i) T_k(x_i) w_i` of a sampled function.
pub fn chebyshev_scalar(values: &[f64], family: PointFamily) -> Vec<f64> {
    let line = ChebyshevLine::new(values.len() - 1, family);
    let mut buf = values.to_vec();
    let mut scratch = vec![0.0; line.scratch_len()];
    line.scalar_in_place(&mut buf, &mut scratch);
    buf
}

/// Scalar products with the basis functions of `space`.
pub fn shen_scalar(values: &[f64], family: PointFamily, space: Space) -> Vec<f64> {
    let n_x = values.len() - 1;
    let w = chebyshev_scalar(values, family);
    let mut out = vec![0.0; space.len(n_x)];
    shen_scalar_from_chebyshev(&w, &mut out, space);
    out
}

/// Forward and inverse transforms of one space along a wall-normal line.
#[derive(Clone)]
pub struct LineTransform {
    space: Space,
    family: PointFamily,
    cheb: ChebyshevLine,
    complex: ComplexChebyshevLine,
    mass: Option<ParityBandedLu>,
}

impl LineTransform {
    pub fn new(n_x: usize, family: PointFamily, space: Space) -> Self {
        let mass = match space {
            Space::Full => None,
            Space::Dirichlet => Some(
                ParityBandedLu::new(&mass_dirichlet(n_x, family))
                    .expect("Dirichlet mass matrix is positive definite"),
            ),
            Space::Biharmonic => Some(
                ParityBandedLu::new(&mass_biharmonic(n_x, family))
                    .expect("biharmonic mass matrix is positive definite"),
            ),
        };
        LineTransform {
            space,
            family,
            cheb: ChebyshevLine::new(n_x, family),
            complex: ComplexChebyshevLine::new(n_x, family),
            mass,
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n_x(&self) -> usize {
        self.cheb.n_x
    }

    pub fn len(&self) -> usize {
        self.space.len(self.cheb.n_x)
    }

    /// Work buffer size needed by [`forward`](Self::forward) and [`inverse`](Self::inverse).
    pub fn work_len(&self) -> usize {
        2 * (self.cheb.n_x + 1) + self.cheb.scratch_len()
    }

    /// Point values (length `n_x + 1`) to expansion coefficients (length [`len`](Self::len)).
    pub fn forward(&self, values: &[f64], out: &mut [f64], work: &mut [f64]) {
        let n = self.cheb.n_x + 1;
        let (buf, rest) = work.split_at_mut(n);
        let scratch = &mut rest[n..];
        buf.copy_from_slice(values);
        self.cheb.scalar_in_place(buf, scratch);
        shen_scalar_from_chebyshev(buf, out, self.space);
        self.mass_solve(out);
    }

    fn mass_solve<T: Coeff>(&self, out: &mut [T]) {
        match &self.mass {
            Some(lu) => lu.solve_in_place(out),
            None => chebyshev_mass_solve(out, self.family),
        }
    }

    /// Expansion coefficients to point values.
    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64], work: &mut [f64]) {
        let n = self.cheb.n_x + 1;
        let scratch = &mut work[..self.cheb.scratch_len()];
        shen_to_chebyshev(coeffs, out, self.space);
        debug_assert_eq!(out.len(), n);
        self.cheb.evaluate_in_place(out, scratch);
    }

    /// Shen scalar product only, without the mass-matrix solve.
    pub fn scalar(&self, values: &[f64], out: &mut [f64], work: &mut [f64]) {
        let n = self.cheb.n_x + 1;
        let (buf, rest) = work.split_at_mut(n);
        let scratch = &mut rest[n..];
        buf.copy_from_slice(values);
        self.cheb.scalar_in_place(buf, scratch);
        shen_scalar_from_chebyshev(buf, out, self.space);
    }

    /// Work buffer size of the complex methods.
    pub fn complex_work_len(&self) -> usize {
        self.cheb.n_x + 1 + self.complex.scratch_len()
    }

    /// Complex counterpart of [`forward`](Self::forward).
    pub fn forward_complex(
        &self,
        values: &[Complex64],
        out: &mut [Complex64],
        work: &mut [Complex64],
    ) {
        self.scalar_complex(values, out, work);
        self.mass_solve(out);
    }

    /// Complex counterpart of [`scalar`](Self::scalar).
    pub fn scalar_complex(
        &self,
        values: &[Complex64],
        out: &mut [Complex64],
        work: &mut [Complex64],
    ) {
        let (buf, scratch) = work.split_at_mut(self.cheb.n_x + 1);
        buf.copy_from_slice(values);
        self.complex.scalar_in_place(buf, scratch);
        shen_scalar_from_chebyshev(buf, out, self.space);
    }

    /// Complex counterpart of [`inverse`](Self::inverse).
    pub fn inverse_complex(
        &self,
        coeffs: &[Complex64],
        out: &mut [Complex64],
        work: &mut [Complex64],
    ) {
        shen_to_chebyshev(coeffs, out, self.space);
        self.complex.evaluate_in_place(out, work);
    }
}

/// Evaluates a Chebyshev series at arbitrary points (Clenshaw recurrence).
pub fn evaluate_chebyshev(coeffs: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// Chebyshev coefficients of the derivative of a Chebyshev series (same length).
pub fn chebyshev_derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for k in (0..n - 1).rev() {
        let next = if k + 2 < n { d[k + 2] } else { 0.0 };
        d[k] = next + 2.0 * (k + 1) as f64 * coeffs[k + 1];
    }
    d[0] *= 0.5;
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_scalar(values: &[f64], family: PointFamily) -> Vec<f64> {
        let n = values.len() - 1;
        let x = family.points(n);
        let w = family.weights(n);
        (0..=n)
            .map(|k| {
                (0..=n)
                    .map(|i| values[i] * (k as f64 * x[i].acos()).cos() * w[i])
                    .sum()
            })
            .collect()
    }

    const FAMILIES: [PointFamily; 2] = [
        PointFamily::ChebyshevGauss,
        PointFamily::ChebyshevGaussLobatto,
    ];

    #[test]
    fn fast_scalar_matches_quadrature_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for family in FAMILIES {
            for n in [4, 8, 9, 16, 31, 32] {
                let f: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let fast = chebyshev_scalar(&f, family);
                let slow = brute_scalar(&f, family);
                for (a, b) in fast.iter().zip(&slow) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn scalar_of_t3_on_gauss() {
        let x = PointFamily::ChebyshevGauss.points(8);
        let f: Vec<f64> = x.iter().map(|x| 4.0 * x * x * x - 3.0 * x).collect();
        let w = chebyshev_scalar(&f, PointFamily::ChebyshevGauss);
        for (k, v) in w.iter().enumerate() {
            let e = if k == 3 { PI / 2.0 } else { 0.0 };
            assert_abs_diff_eq!(*v, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn scalar_of_one_on_lobatto() {
        let w = chebyshev_scalar(&[1.0; 9], PointFamily::ChebyshevGaussLobatto);
        assert_abs_diff_eq!(w[0], PI, epsilon = 1e-14);
        for v in &w[1..] {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn lobatto_last_coefficient_correction() {
        let n = 8;
        let line = ChebyshevLine::new(n, PointFamily::ChebyshevGaussLobatto);
        let mut buf = vec![0.0; n + 1];
        buf[n] = 1.0;
        let mut scratch = vec![0.0; line.scratch_len()];
        line.evaluate_in_place(&mut buf, &mut scratch);
        for (j, v) in buf.iter().enumerate() {
            let e = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(*v, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn evaluation_matches_clenshaw() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for family in FAMILIES {
            for n in [8, 13, 32] {
                let c: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let line = ChebyshevLine::new(n, family);
                let mut buf = c.clone();
                let mut scratch = vec![0.0; line.scratch_len()];
                line.evaluate_in_place(&mut buf, &mut scratch);
                for (x, v) in family.points(n).iter().zip(&buf) {
                    assert_abs_diff_eq!(*v, evaluate_chebyshev(&c, *x), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn shen_scalar_of_biharmonic_phi0() {
        let family = PointFamily::ChebyshevGauss;
        let n = 16;
        let mut c = vec![0.0; n + 1];
        shen_to_chebyshev(&[1.0], &mut c[..], Space::Biharmonic);
        let f: Vec<f64> = family
            .points(n)
            .iter()
            .map(|x| evaluate_chebyshev(&c, *x))
            .collect();
        let y = shen_scalar(&f, family, Space::Biharmonic);
        assert_abs_diff_eq!(
            y[0],
            PI / 2.0 * (2.0 + 16.0 / 9.0 + 1.0 / 9.0),
            epsilon = 1e-13
        );
        let b = mass_biharmonic(n, family);
        assert_abs_diff_eq!(y[2], b.get(2, 0), epsilon = 1e-13);
        for (k, v) in y.iter().enumerate() {
            if k != 0 && k != 2 && k != 4 {
                assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn line_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for family in FAMILIES {
            for space in Space::ALL {
                for n in [8, 9, 16, 64] {
                    let t = LineTransform::new(n, family, space);
                    let c: Vec<f64> = (0..t.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let mut work = vec![0.0; t.work_len()];
                    let mut vals = vec![0.0; n + 1];
                    t.inverse(&c, &mut vals, &mut work);
                    let mut back = vec![0.0; t.len()];
                    t.forward(&vals, &mut back, &mut work);
                    for (a, b) in c.iter().zip(&back) {
                        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn complex_line_matches_real_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for family in FAMILIES {
            for n in [8, 9, 16, 33, 64] {
                let real = ChebyshevLine::new(n, family);
                let cplx = ComplexChebyshevLine::new(n, family);
                let re: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let im: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut rs = vec![0.0; real.scratch_len()];
                let mut cs = vec![Complex64::default(); cplx.scratch_len()];
                for evaluate in [false, true] {
                    let (mut a, mut b) = (re.clone(), im.clone());
                    let mut z: Vec<Complex64> = re
                        .iter()
                        .zip(&im)
                        .map(|(r, i)| Complex64::new(*r, *i))
                        .collect();
                    if evaluate {
                        real.evaluate_in_place(&mut a, &mut rs);
                        real.evaluate_in_place(&mut b, &mut rs);
                        cplx.evaluate_in_place(&mut z, &mut cs);
                    } else {
                        real.scalar_in_place(&mut a, &mut rs);
                        real.scalar_in_place(&mut b, &mut rs);
                        cplx.scalar_in_place(&mut z, &mut cs);
                    }
                    for ((a, b), z) in a.iter().zip(&b).zip(&z) {
                        assert_abs_diff_eq!(*a, z.re, epsilon = 1e-12);
                        assert_abs_diff_eq!(*b, z.im, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn derivative_of_t3() {
        let d = chebyshev_derivative(&[0.0, 0.0, 0.0, 1.0]);
        // T_3' = 3 T_0 + 6 T_2
        assert_eq!(d, vec![3.0, 0.0, 6.0, 0.0]);
    }
}
