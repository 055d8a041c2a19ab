//! Spectral-Galerkin solver for incompressible channel flow.
//!
//! The wall-normal direction `x ∈ [-1, 1]` is discretized with Shen's
//! Chebyshev-based Dirichlet and biharmonic bases, the two periodic
//! directions `y`, `z` with Fourier series. Time integration uses the
//! wall-normal velocity / vorticity formulation with Crank-Nicolson for the
//! viscous terms and Adams-Bashforth for the convection.
//!
//! Module overview:
//!
//! * [`mesh`] - quadrature points, weights and wavenumber grids
//! * [`transforms`] - fast forward/backward transforms for all spaces
//! * [`matrices`] - scalar-product matrices in closed form, plus a dense
//!   quadrature oracle
//! * [`solvers`] - O(N) Helmholtz and biharmonic LU solvers
//! * [`stepper`] - the time integrator, flux control and checkpoints
//! * [`verify`] - verification experiments (roundoff, Orr-Sommerfeld,
//!   scaling, smoke runs)

pub mod error;
pub mod matrices;
pub mod mesh;
pub mod solvers;
pub mod stepper;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use matrices::{BandedMatrix, MatrixId, MatrixSet, TailMatrix};
pub use mesh::{build_mesh, Mesh, PointFamily, Space, WavenumberGrid};
pub use solvers::{BiharmonicLu, HelmholtzLu};
pub use stepper::{ChannelSolver, FlowState, ForcingMode, StepperConfig};
pub use transforms::{PhysicalField, SpectralField, Transformer};

use num_complex::Complex64;
use num_traits::Zero;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Scalar type the banded operators and solvers act on (`f64` or `Complex64`).
pub trait Coeff:
    Copy
    + Send
    + Sync
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + AddAssign
    + SubAssign
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + std::fmt::Debug
{
    fn modulus(self) -> f64;
}

impl Coeff for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Coeff for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}
