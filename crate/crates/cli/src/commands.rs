//! One function per subcommand. Each writes its outputs into the run
//! directory and returns whether every check passed.

use crate::config::{Forcing, RunConfig};
use shenchannel::matrices::{dense_oracle, dump_dense};
use shenchannel::stepper::{read_checkpoint, write_checkpoint, StatsWriter};
use shenchannel::verify::{
    compare_profile, csv_number, mean_profile, os_convergence_space, os_convergence_time,
    pipeline_scaling, read_profile, roundoff_experiment, solenoidal_perturbation, solver_scaling,
    transforms_selftest, ExperimentReport, OsSpaceOptions, OsTimeOptions, PipelineOptions,
    SolverScalingOptions, Source, Tolerance, TransformSelftestOptions,
};
use shenchannel::{
    build_mesh, ChannelSolver, Error, ForcingMode, MatrixId, MatrixSet, PointFamily, StepperConfig,
};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug)]
pub enum Failure {
    /// Bad configuration, arguments or input files.
    Config(String),
    /// Numerical or I/O failure during the run.
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

pub struct RunDir {
    path: PathBuf,
}

impl RunDir {
    pub fn create(path: PathBuf) -> Result<Self, Failure> {
        std::fs::create_dir_all(&path).map_err(|e| io_error(&path, e))?;
        Ok(RunDir { path })
    }

    pub fn file(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        let p = self.path.join(name);
        File::create(&p)
            .map(BufWriter::new)
            .map_err(|e| io_error(&p, e))
    }

    fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<(), Failure> {
        let p = self.path.join(name);
        let mut w = self.file(name)?;
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| io_error(&p, e))
    }

    /// Writes the effective configuration as `config.toml`.
    pub fn echo(&self, cfg: &RunConfig) -> Result<(), Failure> {
        let text = cfg.to_toml();
        self.write_with("config.toml", |w| w.write_all(text.as_bytes()))
    }

    /// `table.csv`, `checks.csv` and the summary on stdout.
    fn report(&self, report: &ExperimentReport) -> Result<bool, Failure> {
        self.report_as(report, "table.csv", "checks.csv")
    }

    fn report_as(
        &self,
        report: &ExperimentReport,
        table: &str,
        checks: &str,
    ) -> Result<bool, Failure> {
        self.write_with(table, |w| report.write_table_csv(w))?;
        self.write_with(checks, |w| report.write_checks_csv(w))?;
        print!("{}", report.summary());
        let failed = report.failures().count();
        println!(
            "{}: {} checks, {} failed, outputs in {}",
            report.id,
            report.rows.len(),
            failed,
            self.path.display()
        );
        Ok(failed == 0)
    }
}

pub fn roundoff(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.roundoff;
    let report = roundoff_experiment(&c.nx, &c.z, c.nu, c.dt, c.runs, cfg.seed)?;
    dir.report(&report)
}

pub fn bench_solve(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.bench_solve;
    let report = solver_scaling(&SolverScalingOptions {
        nx_list: c.nx.clone(),
        z: c.z,
        nu: c.nu,
        dt: c.dt,
        trial_time: Duration::from_millis(c.trial_ms),
        trials: c.trials,
        check_from: c.check_from,
        seed: cfg.seed,
    })?;
    dir.write_with("bench_solve.csv", |w| {
        writeln!(w, "n_x,operator,mean_solve_seconds,scaling_ratio")?;
        for (i, row) in report.table.iter().enumerate() {
            for (name, t, r) in [
                ("biharmonic", row[1], row[2]),
                ("helmholtz", row[3], row[4]),
            ] {
                let ratio = if i == 0 { String::new() } else { csv_number(r) };
                writeln!(w, "{},{name},{},{ratio}", csv_number(row[0]), csv_number(t))?;
            }
        }
        Ok(())
    })?;
    dir.report(&report)
}

pub fn bench_step(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.bench_step;
    let report = pipeline_scaling(&PipelineOptions {
        nx_list: c.nx.clone(),
        n_y: c.n_y,
        n_z: c.n_z,
        nu: c.nu,
        dt: c.dt,
        steps: c.steps,
        trial_time: Duration::from_millis(c.trial_ms),
        check_from: c.check_from,
        seed: cfg.seed,
    })?;
    dir.report(&report)
}

pub fn os_time(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.os_time;
    let report = os_convergence_time(&OsTimeOptions {
        dt_list: c.dt.clone(),
        n_x: c.n_x,
        n_y: c.n_y,
        n_z: c.n_z,
        family: c.family.into(),
        re: c.re,
        epsilon: c.epsilon,
        t_end: c.t_end,
    })?;
    dir.report(&report)
}

pub fn os_space(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.os_space;
    let report = os_convergence_space(&OsSpaceOptions {
        nx_list: c.nx.clone(),
        families: c.families.iter().map(|&f| f.into()).collect(),
        n_y: c.n_y,
        n_z: c.n_z,
        re: c.re,
        epsilon: c.epsilon,
        dt: c.dt,
        t_end: c.t_end,
        reference_n_x: c.reference_n_x,
    })?;
    dir.report(&report)
}

pub fn transforms(cfg: &RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let c = &cfg.transforms;
    let report = transforms_selftest(&TransformSelftestOptions {
        nx_list: c.nx.clone(),
        timing_nx_list: c.timing_nx.clone(),
        n_y: c.n_y,
        n_z: c.n_z,
        check_from: c.check_from,
        trial_time: Duration::from_millis(c.trial_ms),
        seed: cfg.seed,
    })?;
    dir.report(&report)
}

pub fn dump_matrix(
    cfg: &RunConfig,
    dir: &RunDir,
    name: &str,
    oracle: bool,
) -> Result<bool, Failure> {
    let id: MatrixId = name.parse()?;
    let family: PointFamily = cfg.mesh.family.into();
    let n_x = cfg.mesh.n_x;
    let dense = if oracle {
        let (row, col, d) = id.signature();
        dense_oracle(row, col, d, n_x, family)
    } else {
        MatrixSet::assemble(n_x, family)?.dense(id)
    };
    let text = dump_dense(&dense);
    print!("{text}");
    let file = format!(
        "{}_{}_{}{}.txt",
        id.name(),
        family,
        n_x,
        if oracle { "_oracle" } else { "" }
    );
    dir.write_with(&file, |w| w.write_all(text.as_bytes()))?;
    Ok(true)
}

pub fn channel(cfg: &mut RunConfig, dir: &RunDir) -> Result<bool, Failure> {
    let restored = match cfg.run.restart.clone() {
        Some(path) => {
            let file = File::open(&path).map_err(|e| {
                Failure::Config(format!("cannot open checkpoint {}: {e}", path.display()))
            })?;
            let (header, state) = read_checkpoint(&mut BufReader::new(file))?;
            cfg.mesh.n_x = header.n_x;
            cfg.mesh.n_y = header.n_y;
            cfg.mesh.n_z = header.n_z;
            cfg.mesh.l_y = header.l_y;
            cfg.mesh.l_z = header.l_z;
            cfg.mesh.family = header
                .family
                .short_name()
                .parse()
                .map_err(Failure::Config)?;
            cfg.physics.nu = Some(header.nu);
            cfg.physics.dt = header.dt;
            Some(state)
        }
        None => None,
    };
    let reference = match &cfg.run.profile {
        Some(path) => {
            let file = File::open(path).map_err(|e| {
                Failure::Config(format!("cannot open profile {}: {e}", path.display()))
            })?;
            Some(read_profile(BufReader::new(file)).map_err(|e| Failure::Config(e.to_string()))?)
        }
        None => None,
    };
    dir.echo(cfg)?;

    let m = &cfg.mesh;
    let p = &cfg.physics;
    let family: PointFamily = m.family.into();
    let mesh = Arc::new(build_mesh(m.n_x, m.n_y, m.n_z, m.l_y, m.l_z, family)?);
    let nu = p.viscosity();
    let mut solver = ChannelSolver::new(
        mesh.clone(),
        StepperConfig {
            nu,
            dt: p.dt,
            forcing: ForcingMode::FixedBeta(p.beta),
            dealias: p.dealias.into(),
            family,
        },
    )?;
    let initial = match restored {
        Some(s) => Ok(s),
        None => Err(solenoidal_perturbation(
            &mesh,
            1.5 * p.bulk_velocity,
            p.perturbation,
            cfg.seed,
        )),
    };
    let target = match (p.forcing, p.flux) {
        (Forcing::FixedBeta, _) => None,
        (Forcing::ConstantFlux, Some(f)) => Some(f),
        (Forcing::ConstantFlux, None) => Some(match &initial {
            Ok(s) => solver.flux(s),
            Err(u0) => solver.flux(&solver.project(u0)?),
        }),
    };
    if let Some(t) = target {
        solver.set_forcing(ForcingMode::ConstantFlux(t));
    }
    let mut state = match initial {
        Ok(mut s) => {
            solver.recompute_f(&mut s);
            if target.is_none() {
                s.beta = p.beta;
            }
            s
        }
        Err(u0) => solver.initialize(&u0, &u0)?,
    };

    let steps = cfg.run.step_count(p.dt);
    let mut stats = StatsWriter::new(dir.file("stats.csv")?)?;
    let mut table = ExperimentReport::new(
        "channel",
        &["step", "t", "flux", "beta", "energy", "continuity"],
    );
    let mut sample =
        |solver: &ChannelSolver, state: &shenchannel::FlowState| -> Result<(), Failure> {
            let flux = solver.flux(state);
            let energy = solver.kinetic_energy(state)?;
            stats.record(state.t, flux, state.beta, energy)?;
            table.table.push(vec![
                state.kappa as f64,
                state.t,
                flux,
                state.beta,
                energy,
                solver.continuity_residual(state),
            ]);
            Ok(())
        };
    sample(&solver, &state)?;
    let mut worst_cont = solver.continuity_residual(&state);
    let mut worst_flux = 0.0_f64;
    let checkpoint = |state: &shenchannel::FlowState, name: &str| -> Result<(), Failure> {
        let mut w = dir.file(name)?;
        write_checkpoint(&mut w, &mesh, nu, p.dt, state)?;
        w.flush().map_err(|e| Failure::Runtime(e.to_string()))
    };
    for i in 1..=steps {
        solver.step(&mut state)?;
        worst_cont = worst_cont.max(solver.continuity_residual(&state));
        if let Some(t) = target {
            worst_flux = worst_flux.max((solver.flux(&state) - t).abs() / t.abs());
        }
        if cfg.run.stats_interval > 0 && i % cfg.run.stats_interval == 0 {
            sample(&solver, &state)?;
        }
        if cfg.run.checkpoint_interval > 0 && i % cfg.run.checkpoint_interval == 0 {
            checkpoint(&state, &format!("checkpoint_{:08}.bin", state.kappa))?;
        }
    }
    if cfg.run.stats_interval == 0 || steps % cfg.run.stats_interval != 0 {
        sample(&solver, &state)?;
    }
    drop(sample);
    stats.flush()?;
    checkpoint(&state, "checkpoint.bin")?;

    let profile = mean_profile(&solver, &state, &mesh.x);
    dir.write_with("profile.csv", |w| {
        writeln!(w, "x,mean_velocity")?;
        for (x, v) in &profile {
            writeln!(w, "{},{}", csv_number(*x), csv_number(*v))?;
        }
        Ok(())
    })?;
    if let Some(reference) = reference {
        let cmp = compare_profile(&solver, &state, &reference);
        dir.report_as(&cmp, "profile_comparison.csv", "profile_checks.csv")?;
    }

    let params = [("steps", steps.to_string()), ("n_x", m.n_x.to_string())];
    table.push(
        &params,
        "max_continuity_residual",
        worst_cont,
        None,
        Tolerance::AtMost(cfg.run.continuity_tolerance),
        Source::Property,
    );
    if target.is_some() {
        table.push(
            &params,
            "max_relative_flux_deviation",
            worst_flux,
            None,
            Tolerance::AtMost(cfg.run.flux_tolerance),
            Source::Property,
        );
    }
    dir.report(&table)
}
