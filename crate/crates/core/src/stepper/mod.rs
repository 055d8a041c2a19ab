//! Time integration of the wall-normal velocity / vorticity equations.
//!
//! Each step advances `û` (biharmonic space) and `ĝ` (Dirichlet space) with
//! Crank-Nicolson for the viscous terms and Adams-Bashforth for the
//! convection, recovers `f̂` from `B̆ f̂ = C̆ û`, then the streamwise and
//! spanwise velocities algebraically. The plane-averaged mode `m = n = 0` is
//! advanced with its own momentum equations, driven by `β`.

mod checkpoint;
mod stats;

pub use checkpoint::{read_checkpoint, write_checkpoint, CheckpointHeader};
pub use stats::StatsWriter;

use crate::error::{Error, Result};
use crate::matrices::MatrixSet;
use crate::mesh::{Mesh, PointFamily, Space, WavenumberGrid};
use crate::solvers::{
    BiharmonicCoeffs, BiharmonicLu, FactorizationSet, HelmholtzCoeffs, HelmholtzLu, ParityBandedLu,
};
use crate::transforms::{dealias_mask, nyquist_mask, PhysicalField, SpectralField, Transformer};
use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// How the mean streamwise flow is driven.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ForcingMode {
    /// Constant `β`.
    FixedBeta(f64),
    /// `β` is corrected every step so the bulk flux stays at the target.
    ConstantFlux(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dealias {
    None,
    TwoThirds,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub nu: f64,
    pub dt: f64,
    pub forcing: ForcingMode,
    pub dealias: Dealias,
    pub family: PointFamily,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ν = {} must be positive",
                self.nu
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Δt = {} must be positive",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Velocity coefficients, auxiliary fields and nonlinear history.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub u: SpectralField,
    pub v: SpectralField,
    pub w: SpectralField,
    pub g: SpectralField,
    pub f: SpectralField,
    /// Nonlinear term at the previous step.
    pub h_prev: [SpectralField; 3],
    /// Nonlinear term of the current velocity.
    pub h_curr: [SpectralField; 3],
    pub beta: f64,
    pub t: f64,
    pub kappa: u64,
}

impl FlowState {
    pub fn zeros(mesh: &Mesh) -> Self {
        let d = || SpectralField::zeros(mesh, Space::Dirichlet);
        FlowState {
            u: SpectralField::zeros(mesh, Space::Biharmonic),
            v: d(),
            w: d(),
            g: d(),
            f: d(),
            h_prev: [d(), d(), d()],
            h_curr: [d(), d(), d()],
            beta: 0.0,
            t: 0.0,
            kappa: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.w, &self.g, &self.f]
            .iter()
            .all(|f| f.is_finite())
            && self
                .h_prev
                .iter()
                .chain(&self.h_curr)
                .all(|f| f.is_finite())
            && self.beta.is_finite()
    }
}

/// Wall-clock split of one step.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepTimings {
    /// Nonlinear term and right-hand sides.
    pub assemble: Duration,
    /// Linear solves and velocity recovery.
    pub solve: Duration,
    pub total: Duration,
}

/// Precomputed operators and factorizations for one mesh and configuration.
pub struct ChannelSolver {
    mesh: Arc<Mesh>,
    config: StepperConfig,
    matrices: Arc<MatrixSet>,
    transforms: Transformer,
    grid: WavenumberGrid,
    biharmonic: FactorizationSet<BiharmonicLu>,
    helmholtz: FactorizationSet<HelmholtzLu>,
    mass_dirichlet: ParityBandedLu,
    mask: Array2<f64>,
    flux_weights: Vec<f64>,
    flux_response: Vec<f64>,
    flux_response_value: f64,
}

/// `∫_{-1}^{1} T_k dx`.
pub fn chebyshev_integral(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (1.0 - (k * k) as f64)
    }
}

fn line_pairs(n_y: usize, n_zh: usize) -> Vec<(usize, usize)> {
    (0..n_y)
        .flat_map(|m| (0..n_zh).map(move |n| (m, n)))
        .collect()
}

struct RhsLines {
    u: Vec<Complex64>,
    g: Vec<Complex64>,
    mean: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

struct SolvedLines {
    u: Vec<Complex64>,
    g: Vec<Complex64>,
    f: Vec<Complex64>,
    v: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl ChannelSolver {
    pub fn new(mesh: Arc<Mesh>, config: StepperConfig) -> Result<Self> {
        config.validate()?;
        if config.family != mesh.family {
            return Err(Error::InvalidParameter(format!(
                "configured point family {} differs from mesh family {}",
                config.family, mesh.family
            )));
        }
        let matrices = Arc::new(MatrixSet::assemble(mesh.n_x, mesh.family)?);
        let transforms = Transformer::new(mesh.clone());
        let grid = mesh.wavenumber_grid(Space::Dirichlet);
        let (nu, dt) = (config.nu, config.dt);
        let biharmonic =
            FactorizationSet::build(&grid, |z2| BiharmonicLu::from_set(&matrices, nu, dt, z2))?;
        let helmholtz =
            FactorizationSet::build(&grid, |z2| HelmholtzLu::from_set(&matrices, nu, dt, z2))?;
        let mass_dirichlet = ParityBandedLu::new(&matrices.mass_dirichlet)?;
        let mask = match config.dealias {
            Dealias::None => nyquist_mask(&grid),
            Dealias::TwoThirds => dealias_mask(&grid),
        };
        let nd = Space::Dirichlet.len(mesh.n_x);
        let flux_weights: Vec<f64> = (0..nd)
            .map(|l| chebyshev_integral(l) - chebyshev_integral(l + 2))
            .collect();
        let mut e0 = vec![0.0; nd];
        e0[0] = dt * PI * (mesh.n_y * mesh.n_z) as f64;
        let flux_response = helmholtz.get(0, 0)?.solve(&e0);
        let flux_response_value = flux_weights
            .iter()
            .zip(&flux_response)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / (mesh.n_y * mesh.n_z) as f64;
        Ok(ChannelSolver {
            mesh,
            config,
            matrices,
            transforms,
            grid,
            biharmonic,
            helmholtz,
            mass_dirichlet,
            mask,
            flux_weights,
            flux_response,
            flux_response_value,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Replaces the forcing; nothing precomputed depends on it.
    pub fn set_forcing(&mut self, forcing: ForcingMode) {
        self.config.forcing = forcing;
    }

    pub fn config(&self) -> &StepperConfig {
        &self.config
    }

    pub fn matrices(&self) -> &MatrixSet {
        &self.matrices
    }

    pub fn transforms(&self) -> &Transformer {
        &self.transforms
    }

    pub fn grid(&self) -> &WavenumberGrid {
        &self.grid
    }

    fn plane_size(&self) -> f64 {
        (self.mesh.n_y * self.mesh.n_z) as f64
    }

    fn im_m(&self, m: usize) -> Complex64 {
        I * self.grid.m_scaled[m]
    }

    fn im_n(&self, n: usize) -> Complex64 {
        I * self.grid.n_scaled[n]
    }

    /// `x`-derivative of a Dirichlet-space field, projected to the Chebyshev space.
    fn dx_dirichlet(&self, field: &SpectralField) -> SpectralField {
        let mut out = SpectralField::zeros(&self.mesh, Space::Full);
        let c = &self.matrices.derivative_full;
        let b = &self.matrices.mass.diagonals[0];
        Zip::from(out.data.lanes_mut(ndarray::Axis(0)))
            .and(field.data.lanes(ndarray::Axis(0)))
            .par_for_each(|mut o, v| {
                let x = v.to_vec();
                let y = c.apply(&x);
                for (k, d) in o.iter_mut().enumerate() {
                    *d = y[k] / b[k];
                }
            });
        out
    }

    fn times_wavenumber(&self, field: &SpectralField, along_y: bool) -> SpectralField {
        let mut out = field.clone();
        let grid = &self.grid;
        for mut plane in out.data.axis_iter_mut(ndarray::Axis(0)) {
            Zip::indexed(&mut plane).for_each(|(m, n), v| {
                let k = if along_y {
                    grid.m_scaled[m]
                } else {
                    grid.n_scaled[n]
                };
                *v *= I * k;
            });
        }
        out
    }

    fn masked(&self, field: &SpectralField) -> SpectralField {
        let mut f = field.clone();
        f.apply_mask(&self.mask);
        f
    }

    /// Velocity components on the mesh.
    pub fn velocity(&self, state: &FlowState) -> Result<[PhysicalField; 3]> {
        Ok([
            self.transforms.inverse(&state.u)?,
            self.transforms.inverse(&state.v)?,
            self.transforms.inverse(&state.w)?,
        ])
    }

    /// `Ĥ = T̆(u × ω)` for the velocity of `state`, truncated by the dealiasing mask.
    pub fn compute_nonlinear(&self, state: &FlowState) -> Result<[SpectralField; 3]> {
        let t = &self.transforms;
        let u_hat = self.masked(&state.u);
        let v_hat = self.masked(&state.v);
        let w_hat = self.masked(&state.w);
        let g_hat = self.masked(&state.g);
        let u = t.inverse(&u_hat)?;
        let v = t.inverse(&v_hat)?;
        let w = t.inverse(&w_hat)?;
        let wx = t.inverse(&g_hat)?;
        let du_dy = t.inverse(&self.times_wavenumber(&u_hat, true))?;
        let du_dz = t.inverse(&self.times_wavenumber(&u_hat, false))?;
        let dv_dx = t.inverse(&self.dx_dirichlet(&v_hat))?;
        let dw_dx = t.inverse(&self.dx_dirichlet(&w_hat))?;
        let mut oy = du_dz;
        Zip::from(&mut oy.data)
            .and(&dw_dx.data)
            .par_for_each(|a, b| *a -= b);
        let mut oz = dv_dx;
        Zip::from(&mut oz.data)
            .and(&du_dy.data)
            .par_for_each(|a, b| *a -= b);
        let mut hx = PhysicalField::zeros(&self.mesh);
        let mut hy = PhysicalField::zeros(&self.mesh);
        let mut hz = PhysicalField::zeros(&self.mesh);
        Zip::from(&mut hx.data)
            .and(&mut hy.data)
            .and(&mut hz.data)
            .and(&u.data)
            .and(&v.data)
            .and(&w.data)
            .par_for_each(|hx, hy, hz, u, v, w| {
                *hx = *v;
                *hy = *w;
                *hz = *u;
            });
        Zip::from(&mut hx.data)
            .and(&mut hy.data)
            .and(&mut hz.data)
            .and(&wx.data)
            .and(&oy.data)
            .and(&oz.data)
            .par_for_each(|hx, hy, hz, ox, oy, oz| {
                let (v, w, u) = (*hx, *hy, *hz);
                *hx = v * oz - w * oy;
                *hy = w * ox - u * oz;
                *hz = u * oy - v * ox;
            });
        let mut out = [
            t.forward(&hx, Space::Dirichlet)?,
            t.forward(&hy, Space::Dirichlet)?,
            t.forward(&hz, Space::Dirichlet)?,
        ];
        for h in out.iter_mut() {
            h.apply_mask(&self.mask);
        }
        Ok(out)
    }

    fn ab2(&self, state: &FlowState, c: usize, m: usize, n: usize) -> Vec<Complex64> {
        let cur = state.h_curr[c].line(m, n);
        let prev = state.h_prev[c].line(m, n);
        cur.iter()
            .zip(&prev)
            .map(|(a, b)| a * 1.5 - b * 0.5)
            .collect()
    }

    fn rhs_lines(&self, state: &FlowState, m: usize, n: usize) -> RhsLines {
        let mats = &*self.matrices;
        let (nu, dt) = (self.config.nu, self.config.dt);
        let z2 = self.grid.z2(m, n);
        let hx = self.ab2(state, 0, m, n);
        let hy = self.ab2(state, 1, m, n);
        let hz = self.ab2(state, 2, m, n);
        let (im, inn) = (self.im_m(m), self.im_n(n));

        let imp = BiharmonicCoeffs::implicit(nu, dt, z2);
        let explicit = BiharmonicCoeffs {
            xi0: -imp.xi0,
            xi1: 2.0 - imp.xi1,
            xi2: -2.0 * z2 - imp.xi2,
        };
        let u = state.u.line(m, n);
        let mut rhs_u = explicit.apply(mats, &u);
        let sx: Vec<Complex64> = hx.iter().map(|h| h * (-z2)).collect();
        let syz: Vec<Complex64> = hy
            .iter()
            .zip(&hz)
            .map(|(y, z)| -(im * y + inn * z))
            .collect();
        mats.mixed_biharmonic.apply_acc(dt, &sx, &mut rhs_u);
        mats.derivative_biharmonic.apply_acc(dt, &syz, &mut rhs_u);

        let himp = HelmholtzCoeffs::implicit(nu, dt, z2);
        let hexp = HelmholtzCoeffs {
            c_a: -himp.c_a,
            c_b: 2.0 - himp.c_b,
        };
        let g = state.g.line(m, n);
        let mut rhs_g = hexp.apply(mats, &g);
        let sg: Vec<Complex64> = hz.iter().zip(&hy).map(|(z, y)| im * z - inn * y).collect();
        mats.mass_dirichlet.apply_acc(dt, &sg, &mut rhs_g);

        let mean = (m == 0 && n == 0).then(|| {
            let mut rv = hexp.apply(mats, &state.v.line(0, 0));
            mats.mass_dirichlet.apply_acc(dt, &hy, &mut rv);
            let mut rw = hexp.apply(mats, &state.w.line(0, 0));
            mats.mass_dirichlet.apply_acc(dt, &hz, &mut rw);
            (rv, rw)
        });
        RhsLines {
            u: rhs_u,
            g: rhs_g,
            mean,
        }
    }

    /// Right-hand side of the implicit equation for `û`.
    pub fn assemble_rhs_u(&self, state: &FlowState) -> SpectralField {
        let mut out = SpectralField::zeros(&self.mesh, Space::Biharmonic);
        for (m, n) in line_pairs(self.grid.n_y(), self.grid.n_zh()) {
            out.set_line(m, n, &self.rhs_lines(state, m, n).u);
        }
        out
    }

    /// Right-hand side of the implicit equation for `ĝ`.
    pub fn assemble_rhs_g(&self, state: &FlowState) -> SpectralField {
        let mut out = SpectralField::zeros(&self.mesh, Space::Dirichlet);
        for (m, n) in line_pairs(self.grid.n_y(), self.grid.n_zh()) {
            out.set_line(m, n, &self.rhs_lines(state, m, n).g);
        }
        out
    }

    fn f_from_u(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut f = self.matrices.derivative_dirichlet.apply(u);
        self.mass_dirichlet.solve_in_place(&mut f);
        f
    }

    /// Rebuilds `f̂` from `û`, e.g. after reading a checkpoint.
    pub fn recompute_f(&self, state: &mut FlowState) {
        for (m, n) in line_pairs(self.grid.n_y(), self.grid.n_zh()) {
            let f = self.f_from_u(&state.u.line(m, n));
            state.f.set_line(m, n, &f);
        }
    }

    fn solve_lines(&self, m: usize, n: usize, rhs: RhsLines, beta: f64) -> Result<SolvedLines> {
        let mut u = rhs.u;
        self.biharmonic.get(m, n)?.solve_in_place(&mut u);
        let mut g = rhs.g;
        let hh = self.helmholtz.get(m, n)?;
        hh.solve_in_place(&mut g);
        let f = self.f_from_u(&u);
        let (v, w) = match rhs.mean {
            Some((mut rv, mut rw)) => {
                rv[0] -= self.config.dt * PI * self.plane_size() * beta;
                hh.solve_in_place(&mut rv);
                hh.solve_in_place(&mut rw);
                (rv, rw)
            }
            None => {
                let z2 = self.grid.z2(m, n);
                let (im, inn) = (self.im_m(m), self.im_n(n));
                let v = f
                    .iter()
                    .zip(&g)
                    .map(|(f, g)| (im * f + inn * g) / z2)
                    .collect();
                let w = f
                    .iter()
                    .zip(&g)
                    .map(|(f, g)| (inn * f - im * g) / z2)
                    .collect();
                (v, w)
            }
        };
        Ok(SolvedLines { u, g, f, v, w })
    }

    /// Bulk flux `∫_{-1}^{1} ⟨v⟩ dx` of the plane-averaged streamwise velocity.
    pub fn flux(&self, state: &FlowState) -> f64 {
        self.flux_weights
            .iter()
            .enumerate()
            .map(|(l, w)| w * state.v.data[[l, 0, 0]].re)
            .sum::<f64>()
            / self.plane_size()
    }

    /// `β` that brings the flux of `state` to `target` when applied over the next step.
    pub fn adjust_beta(&self, state: &FlowState, target_flux: f64) -> f64 {
        state.beta + (self.flux(state) - target_flux) / self.flux_response_value
    }

    /// Advances `state` by one time step.
    pub fn step(&self, state: &mut FlowState) -> Result<StepTimings> {
        let t0 = Instant::now();
        let pairs = line_pairs(self.grid.n_y(), self.grid.n_zh());
        let rhs: Vec<RhsLines> = pairs
            .par_iter()
            .map(|&(m, n)| self.rhs_lines(state, m, n))
            .collect();
        let t1 = Instant::now();
        let beta = state.beta;
        let solved: Vec<SolvedLines> = pairs
            .par_iter()
            .zip(rhs.into_par_iter())
            .map(|(&(m, n), r)| self.solve_lines(m, n, r, beta))
            .collect::<Result<_>>()?;
        for (&(m, n), s) in pairs.iter().zip(&solved) {
            state.u.set_line(m, n, &s.u);
            state.g.set_line(m, n, &s.g);
            state.f.set_line(m, n, &s.f);
            state.v.set_line(m, n, &s.v);
            state.w.set_line(m, n, &s.w);
        }
        if let ForcingMode::ConstantFlux(target) = self.config.forcing {
            let new_beta = self.adjust_beta(state, target);
            let d = new_beta - state.beta;
            for (l, r) in self.flux_response.iter().enumerate() {
                state.v.data[[l, 0, 0]] -= d * r;
            }
            state.beta = new_beta;
        }
        let t2 = Instant::now();
        let h = self.compute_nonlinear(state)?;
        state.h_prev = std::mem::replace(&mut state.h_curr, h);
        state.kappa += 1;
        state.t += self.config.dt;
        let t3 = Instant::now();
        if !state.is_finite() {
            return Err(Error::NonFinite(format!("state at step {}", state.kappa)));
        }
        Ok(StepTimings {
            assemble: (t1 - t0) + (t3 - t2),
            solve: t2 - t1,
            total: t3 - t0,
        })
    }

    /// Spectral state of a physical velocity field (no nonlinear history).
    pub fn project(&self, velocity: &[PhysicalField; 3]) -> Result<FlowState> {
        self.project_inner(velocity, true)
    }

    /// Like [`project`](Self::project) but without the wall check; the
    /// Galerkin projection imposes the boundary conditions.
    pub fn project_unchecked(&self, velocity: &[PhysicalField; 3]) -> Result<FlowState> {
        self.project_inner(velocity, false)
    }

    fn project_inner(&self, velocity: &[PhysicalField; 3], check: bool) -> Result<FlowState> {
        let scale = velocity.iter().map(|c| c.max_abs()).fold(1.0_f64, f64::max);
        let mut wall = 0.0_f64;
        for c in velocity.iter().filter(|_| check) {
            let full = self.transforms.forward(c, Space::Full)?;
            for lane in full.data.lanes(ndarray::Axis(0)) {
                let top: Complex64 = lane.iter().sum();
                let bottom: Complex64 = lane
                    .iter()
                    .enumerate()
                    .map(|(k, v)| if k % 2 == 0 { *v } else { -v })
                    .sum();
                wall = wall.max(top.norm()).max(bottom.norm());
            }
        }
        let wall = wall / self.plane_size();
        if wall > 1e-12 * scale {
            return Err(Error::NoSlip(wall));
        }
        let nyq = nyquist_mask(&self.grid);
        let mut s = FlowState::zeros(&self.mesh);
        s.u = self.transforms.forward(&velocity[0], Space::Biharmonic)?;
        s.v = self.transforms.forward(&velocity[1], Space::Dirichlet)?;
        s.w = self.transforms.forward(&velocity[2], Space::Dirichlet)?;
        for f in [&mut s.u, &mut s.v, &mut s.w] {
            f.apply_mask(&nyq);
        }
        let grid = &self.grid;
        let mut g = SpectralField::zeros(&self.mesh, Space::Dirichlet);
        Zip::indexed(&mut g.data)
            .and(&s.v.data)
            .and(&s.w.data)
            .for_each(|(_, m, n), g, v, w| {
                *g = I * grid.m_scaled[m] * w - I * grid.n_scaled[n] * v;
            });
        s.g = g;
        for (m, n) in line_pairs(grid.n_y(), grid.n_zh()) {
            let f = self.f_from_u(&s.u.line(m, n));
            s.f.set_line(m, n, &f);
        }
        Ok(s)
    }

    /// State at `t = Δt` from velocities at `t = 0` and `t = Δt`.
    pub fn initialize(
        &self,
        u0: &[PhysicalField; 3],
        u1: &[PhysicalField; 3],
    ) -> Result<FlowState> {
        self.initialize_inner(u0, u1, true)
    }

    /// [`initialize`](Self::initialize) with [`project_unchecked`](Self::project_unchecked).
    pub fn initialize_unchecked(
        &self,
        u0: &[PhysicalField; 3],
        u1: &[PhysicalField; 3],
    ) -> Result<FlowState> {
        self.initialize_inner(u0, u1, false)
    }

    fn initialize_inner(
        &self,
        u0: &[PhysicalField; 3],
        u1: &[PhysicalField; 3],
        check: bool,
    ) -> Result<FlowState> {
        let s0 = self.project_inner(u0, check)?;
        let mut s1 = self.project_inner(u1, check)?;
        s1.h_prev = self.compute_nonlinear(&s0)?;
        s1.h_curr = self.compute_nonlinear(&s1)?;
        s1.beta = match self.config.forcing {
            ForcingMode::FixedBeta(b) => b,
            ForcingMode::ConstantFlux(target) => -1.5 * self.config.nu * target,
        };
        s1.t = self.config.dt;
        s1.kappa = 1;
        Ok(s1)
    }

    /// Largest `|B̆ f̂ - C̆ û|` over all pairs, in units of the physical field.
    pub fn continuity_residual(&self, state: &FlowState) -> f64 {
        let pairs = line_pairs(self.grid.n_y(), self.grid.n_zh());
        pairs
            .par_iter()
            .map(|&(m, n)| {
                let bf = self.matrices.mass_dirichlet.apply(&state.f.line(m, n));
                let cu = self
                    .matrices
                    .derivative_dirichlet
                    .apply(&state.u.line(m, n));
                bf.iter()
                    .zip(&cu)
                    .fold(0.0_f64, |a, (x, y)| a.max((x - y).norm()))
            })
            .reduce(|| 0.0, f64::max)
            / self.plane_size()
    }

    /// Largest `|B̆(i m̲ v̂ + i n̲ ŵ) + C̆ û|` over all pairs except `m = n = 0`,
    /// i.e. the discrete divergence of the velocity tested against the Dirichlet basis.
    pub fn divergence_residual(&self, state: &FlowState) -> f64 {
        let pairs = line_pairs(self.grid.n_y(), self.grid.n_zh());
        pairs
            .par_iter()
            .filter(|&&(m, n)| m != 0 || n != 0)
            .map(|&(m, n)| {
                let (im, inn) = (self.im_m(m), self.im_n(n));
                let v = state.v.line(m, n);
                let w = state.w.line(m, n);
                let div: Vec<Complex64> = v.iter().zip(&w).map(|(v, w)| im * v + inn * w).collect();
                let mut r = self
                    .matrices
                    .derivative_dirichlet
                    .apply(&state.u.line(m, n));
                self.matrices.mass_dirichlet.apply_acc(1.0, &div, &mut r);
                r.iter().fold(0.0_f64, |a, x| a.max(x.norm()))
            })
            .reduce(|| 0.0, f64::max)
            / self.plane_size()
    }

    /// Volume-averaged kinetic energy `½⟨|u|²⟩`.
    pub fn kinetic_energy(&self, state: &FlowState) -> Result<f64> {
        let vel = self.velocity(state)?;
        let nxp = self.mesh.n_x + 1;
        let plane = self.plane_size();
        let mut e = vec![0.0; nxp];
        for c in vel.iter() {
            for (i, p) in c.data.outer_iter().enumerate() {
                e[i] += p.iter().map(|v| v * v).sum::<f64>() / plane;
            }
        }
        let line = self.transforms.line(Space::Full);
        let mut coef = vec![0.0; nxp];
        let mut work = vec![0.0; line.work_len()];
        line.forward(&e, &mut coef, &mut work);
        let integral: f64 = coef
            .iter()
            .enumerate()
            .map(|(k, c)| c * chebyshev_integral(k))
            .sum();
        Ok(0.25 * integral)
    }
}
