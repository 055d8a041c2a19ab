//! Binary checkpoints.
//!
//! Layout (all little-endian): 8-byte magic `SHENCHAN`, `u32` version,
//! `u64` N_x, N_y, N_z, `f64` L_y, L_z, ν, Δt, t, `u64` κ, `f64` β, `u8`
//! family (0 = GC, 1 = GL), then the coefficient arrays û, v̂, ŵ, ĝ,
//! Ĥ_curr (x, y, z), Ĥ_prev (x, y, z), each in row-major `(l, m, n)` order
//! with real and imaginary parts interleaved.

use super::FlowState;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, PointFamily, Space};
use crate::transforms::SpectralField;
use ndarray::Array3;
use num_complex::Complex64;
use std::io::{Read, Write};

const MAGIC: &[u8; 8] = b"SHENCHAN";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointHeader {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub l_y: f64,
    pub l_z: f64,
    pub nu: f64,
    pub dt: f64,
    pub t: f64,
    pub kappa: u64,
    pub beta: f64,
    pub family: PointFamily,
}

fn write_field(w: &mut impl Write, f: &SpectralField) -> Result<()> {
    for v in f.data.iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_checkpoint(
    w: &mut impl Write,
    mesh: &Mesh,
    nu: f64,
    dt: f64,
    state: &FlowState,
) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in [mesh.n_x, mesh.n_y, mesh.n_z] {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in [mesh.l_y, mesh.l_z, nu, dt, state.t] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&state.kappa.to_le_bytes())?;
    w.write_all(&state.beta.to_le_bytes())?;
    let fam = match mesh.family {
        PointFamily::ChebyshevGauss => 0u8,
        PointFamily::ChebyshevGaussLobatto => 1u8,
    };
    w.write_all(&[fam])?;
    for f in [&state.u, &state.v, &state.w, &state.g] {
        write_field(w, f)?;
    }
    for f in state.h_curr.iter().chain(&state.h_prev) {
        write_field(w, f)?;
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Checkpoint(format!("truncated file: {e}")))?;
    Ok(b)
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array::<8>(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array::<8>(r)?))
}

fn read_field(r: &mut impl Read, space: Space, shape: [usize; 3]) -> Result<SpectralField> {
    let mut data = Array3::<Complex64>::zeros(shape);
    for v in data.iter_mut() {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        *v = Complex64::new(re, im);
    }
    Ok(SpectralField { space, data })
}

/// Reads a checkpoint; `f̂` is left zero and must be recomputed from `û` by the caller.
pub fn read_checkpoint(r: &mut impl Read) -> Result<(CheckpointHeader, FlowState)> {
    if &read_array::<8>(r)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array::<4>(r)?);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n_x = read_u64(r)? as usize;
    let n_y = read_u64(r)? as usize;
    let n_z = read_u64(r)? as usize;
    let l_y = read_f64(r)?;
    let l_z = read_f64(r)?;
    let nu = read_f64(r)?;
    let dt = read_f64(r)?;
    let t = read_f64(r)?;
    let kappa = read_u64(r)?;
    let beta = read_f64(r)?;
    let family = match read_array::<1>(r)?[0] {
        0 => PointFamily::ChebyshevGauss,
        1 => PointFamily::ChebyshevGaussLobatto,
        b => return Err(Error::Checkpoint(format!("unknown family tag {b}"))),
    };
    let mesh = crate::mesh::build_mesh(n_x, n_y, n_z, l_y, l_z, family)
        .map_err(|e| Error::Checkpoint(format!("invalid mesh in header: {e}")))?;
    let header = CheckpointHeader {
        n_x,
        n_y,
        n_z,
        l_y,
        l_z,
        nu,
        dt,
        t,
        kappa,
        beta,
        family,
    };
    let sb = mesh.spectral_shape(Space::Biharmonic);
    let sd = mesh.spectral_shape(Space::Dirichlet);
    let mut state = FlowState::zeros(&mesh);
    state.u = read_field(r, Space::Biharmonic, sb)?;
    state.v = read_field(r, Space::Dirichlet, sd)?;
    state.w = read_field(r, Space::Dirichlet, sd)?;
    state.g = read_field(r, Space::Dirichlet, sd)?;
    for h in state.h_curr.iter_mut() {
        *h = read_field(r, Space::Dirichlet, sd)?;
    }
    for h in state.h_prev.iter_mut() {
        *h = read_field(r, Space::Dirichlet, sd)?;
    }
    state.t = t;
    state.kappa = kappa;
    state.beta = beta;
    Ok((header, state))
}
