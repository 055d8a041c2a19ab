mod common;

use common::*;
use num_complex::Complex64;
use shenchannel::matrices::dense_oracle;
use shenchannel::mesh::build_mesh;
use shenchannel::stepper::{read_checkpoint, write_checkpoint, Dealias};
use shenchannel::transforms::dealias_mask;
use shenchannel::verify::{channel_smoke, solenoidal_perturbation, SmokeOptions};
use shenchannel::{
    ChannelSolver, FlowState, ForcingMode, PhysicalField, PointFamily, Space, StepperConfig,
};
use std::f64::consts::PI;
use std::sync::Arc;

fn solver(
    n_x: usize,
    n_y: usize,
    n_z: usize,
    nu: f64,
    dt: f64,
    forcing: ForcingMode,
) -> ChannelSolver {
    let mesh =
        Arc::new(build_mesh(n_x, n_y, n_z, 2.0 * PI, PI, PointFamily::ChebyshevGauss).unwrap());
    ChannelSolver::new(
        mesh,
        StepperConfig {
            nu,
            dt,
            forcing,
            dealias: Dealias::TwoThirds,
            family: PointFamily::ChebyshevGauss,
        },
    )
    .unwrap()
}

fn streamwise(s: &ChannelSolver, f: impl Fn(f64) -> f64) -> [PhysicalField; 3] {
    let mesh = s.mesh();
    [
        PhysicalField::zeros(mesh),
        PhysicalField::from_fn(mesh, |x, _, _| f(x)),
        PhysicalField::zeros(mesh),
    ]
}

#[test]
fn laminar_profile_is_steady() {
    let nu = 1.0 / 180.0;
    let s = solver(32, 8, 8, nu, 1e-3, ForcingMode::FixedBeta(-2.0 * nu));
    let u = streamwise(&s, |x| 1.0 - x * x);
    let mut st = s.initialize(&u, &u).unwrap();
    let v0 = st.v.clone();
    for _ in 0..100 {
        s.step(&mut st).unwrap();
    }
    let drift =
        st.v.data
            .iter()
            .zip(v0.data.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
            / v0.max_abs();
    assert!(drift <= 1e-10, "drift {drift:e}");
    assert!(st.g.max_abs() == 0.0);
}

#[test]
fn mean_mode_follows_crank_nicolson_heat_equation() {
    let (n_x, nu, dt) = (24, 0.05, 0.01);
    let s = solver(n_x, 4, 4, nu, dt, ForcingMode::FixedBeta(0.0));
    let u = streamwise(&s, |x| 1.0 - x.powi(4) + 0.3 * x * (1.0 - x * x));
    let mut st = s.initialize(&u, &u).unwrap();
    let a = dense_oracle(
        Space::Dirichlet,
        Space::Dirichlet,
        2,
        n_x,
        PointFamily::ChebyshevGauss,
    );
    let b = dense_oracle(
        Space::Dirichlet,
        Space::Dirichlet,
        0,
        n_x,
        PointFamily::ChebyshevGauss,
    );
    let lhs = &b - &a * (0.5 * nu * dt);
    let rhs = &b + &a * (0.5 * nu * dt);
    let mut c: Vec<Complex64> = st.v.line(0, 0);
    for _ in 0..20 {
        s.step(&mut st).unwrap();
        c = dense_lu_solve(&lhs, &dense_mul(&rhs, &c));
    }
    assert!(max_rel(&st.v.line(0, 0), &c) < 1e-12);
}

#[test]
fn energy_decays_without_forcing() {
    let opts = SmokeOptions {
        n_x: 24,
        n_y: 8,
        n_z: 8,
        l_y: 2.0 * PI,
        l_z: PI,
        re_tau: 100.0,
        dt: 1e-3,
        steps: 100,
        bulk_velocity: 0.0,
        perturbation: 1.0,
        constant_flux: false,
        beta: 0.0,
        ..SmokeOptions::default()
    };
    let out = channel_smoke(&opts, |_, _| Ok(())).unwrap();
    assert!(out.report.passed(), "{}", out.report.summary());
    let energy: Vec<f64> = out.report.table.iter().map(|r| r[4]).collect();
    assert!(energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn continuity_and_divergence_hold_every_step() {
    let nu = 1.0 / 100.0;
    let s = solver(24, 8, 8, nu, 1e-3, ForcingMode::FixedBeta(-2.0 * nu));
    let u = solenoidal_perturbation(s.mesh(), 1.0, 0.5, 4);
    let mut st = s.initialize(&u, &u).unwrap();
    for _ in 0..20 {
        s.step(&mut st).unwrap();
        assert!(s.continuity_residual(&st) <= 1e-10);
        assert!(s.divergence_residual(&st) <= 1e-10);
    }
}

#[test]
fn velocity_stays_real() {
    let nu = 1.0 / 100.0;
    let s = solver(16, 8, 8, nu, 1e-3, ForcingMode::FixedBeta(-2.0 * nu));
    let u = solenoidal_perturbation(s.mesh(), 1.0, 0.5, 8);
    let mut st = s.initialize(&u, &u).unwrap();
    for _ in 0..5 {
        s.step(&mut st).unwrap();
    }
    let n_y = s.mesh().n_y;
    for field in [&st.u, &st.v, &st.w] {
        let scale = field.max_abs();
        for m in 0..n_y {
            let mp = (n_y - m) % n_y;
            for l in 0..field.data.shape()[0] {
                let d = field.data[[l, m, 0]] - field.data[[l, mp, 0]].conj();
                assert!(d.norm() <= 1e-12 * scale);
            }
        }
    }
}

#[test]
fn nonlinear_term_is_truncated() {
    let s = solver(16, 12, 12, 0.01, 1e-3, ForcingMode::FixedBeta(0.0));
    let u = solenoidal_perturbation(s.mesh(), 1.0, 1.0, 2);
    let st = s.project(&u).unwrap();
    let h = s.compute_nonlinear(&st).unwrap();
    let mask = dealias_mask(&s.mesh().wavenumber_grid(Space::Dirichlet));
    for c in &h {
        for ((_, m, n), v) in c.data.indexed_iter() {
            if mask[[m, n]] == 0.0 {
                assert_eq!(v.norm(), 0.0);
            }
        }
    }
    let zero = FlowState::zeros(s.mesh());
    assert!(s
        .compute_nonlinear(&zero)
        .unwrap()
        .iter()
        .all(|c| c.max_abs() == 0.0));
}

#[test]
fn doubled_flux_decelerates() {
    let s = solver(16, 4, 4, 0.01, 1e-3, ForcingMode::ConstantFlux(4.0 / 3.0));
    let u = streamwise(&s, |x| 2.0 * (1.0 - x * x));
    let st = s.initialize(&u, &u).unwrap();
    assert!(s.adjust_beta(&st, 4.0 / 3.0) > st.beta);
    let u = streamwise(&s, |x| 1.0 - x * x);
    let st = s.initialize(&u, &u).unwrap();
    assert!((s.adjust_beta(&st, 4.0 / 3.0) - st.beta).abs() < 1e-12);
}

#[test]
fn checkpoint_restart_continues_identically() {
    let nu = 1.0 / 100.0;
    let s = solver(16, 8, 8, nu, 1e-3, ForcingMode::FixedBeta(-2.0 * nu));
    let u = solenoidal_perturbation(s.mesh(), 1.0, 0.5, 6);
    let mut st = s.initialize(&u, &u).unwrap();
    for _ in 0..3 {
        s.step(&mut st).unwrap();
    }
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, s.mesh(), nu, 1e-3, &st).unwrap();
    let (header, mut restored) = read_checkpoint(&mut buf.as_slice()).unwrap();
    assert_eq!(header.kappa, st.kappa);
    s.recompute_f(&mut restored);
    assert!(field_rel(&restored.f, &st.f) < 1e-14);
    for _ in 0..3 {
        s.step(&mut st).unwrap();
        s.step(&mut restored).unwrap();
    }
    assert!(field_rel(&restored.v, &st.v) < 1e-14);
    assert_eq!(restored.kappa, st.kappa);
}
