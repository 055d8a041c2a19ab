mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use config::{Family, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Channel-flow solver and verification experiments.
#[derive(Parser, Debug)]
#[command(name = "shenchannel", version)]
struct Cli {
    /// TOML run configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory (default `runs/<subcommand>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Turbulent channel run with statistics, checkpoints and a mean profile.
    Channel(ChannelArgs),
    /// Recovery error of the implicit solvers against `n_x` and `z`.
    Roundoff(RoundoffArgs),
    /// Solve time of both implicit operators against `n_x`.
    BenchSolve(BenchSolveArgs),
    /// Time per step of the full pipeline against `n_x`.
    BenchStep(BenchStepArgs),
    /// Temporal convergence on the Orr-Sommerfeld eigenmode.
    OrrSommerfeldTime(OsTimeArgs),
    /// Spatial convergence on the Orr-Sommerfeld eigenmode.
    OrrSommerfeldSpace(OsSpaceArgs),
    /// Transform accuracy and cost.
    TransformsSelftest(TransformsArgs),
    /// Prints one scalar-product matrix densely.
    DumpMatrix(DumpArgs),
}

#[derive(Args, Debug)]
struct ChannelArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    nz: Option<usize>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    re_tau: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    restart: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RoundoffArgs {
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    z: Option<Vec<f64>>,
    #[arg(long)]
    runs: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchSolveArgs {
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Args, Debug)]
struct BenchStepArgs {
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug)]
struct OsTimeArgs {
    #[arg(long, value_delimiter = ',')]
    dt: Option<Vec<f64>>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug)]
struct OsSpaceArgs {
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    family: Option<Vec<Family>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args, Debug)]
struct TransformsArgs {
    #[arg(long, value_delimiter = ',')]
    nx: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    timing_nx: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    /// Matrix name, e.g. `Q-biharmonic`.
    #[arg(long)]
    name: String,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    family: Option<Family>,
    /// Use the quadrature oracle instead of the closed forms.
    #[arg(long)]
    oracle: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Channel(_) => "channel",
            Command::Roundoff(_) => "roundoff",
            Command::BenchSolve(_) => "bench-solve",
            Command::BenchStep(_) => "bench-step",
            Command::OrrSommerfeldTime(_) => "orr-sommerfeld-time",
            Command::OrrSommerfeldSpace(_) => "orr-sommerfeld-space",
            Command::TransformsSelftest(_) => "transforms-selftest",
            Command::DumpMatrix(_) => "dump-matrix",
        }
    }

    fn timed(&self) -> bool {
        matches!(
            self,
            Command::BenchSolve(_) | Command::BenchStep(_) | Command::TransformsSelftest(_)
        )
    }

    fn apply(&self, c: &mut RunConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        match self {
            Command::Channel(a) => {
                set(&mut c.mesh.n_x, &a.nx);
                set(&mut c.mesh.n_y, &a.ny);
                set(&mut c.mesh.n_z, &a.nz);
                set(&mut c.mesh.family, &a.family);
                set(&mut c.physics.re_tau, &a.re_tau);
                if a.re_tau.is_some() {
                    c.physics.nu = None;
                }
                set(&mut c.physics.dt, &a.dt);
                if a.steps.is_some() {
                    c.run.steps = a.steps;
                    c.run.t_end = None;
                }
                if a.restart.is_some() {
                    c.run.restart = a.restart.clone();
                }
                if a.profile.is_some() {
                    c.run.profile = a.profile.clone();
                }
            }
            Command::Roundoff(a) => {
                set(&mut c.roundoff.nx, &a.nx);
                set(&mut c.roundoff.z, &a.z);
                set(&mut c.roundoff.runs, &a.runs);
            }
            Command::BenchSolve(a) => {
                set(&mut c.bench_solve.nx, &a.nx);
                set(&mut c.bench_solve.z, &a.z);
            }
            Command::BenchStep(a) => {
                set(&mut c.bench_step.nx, &a.nx);
                set(&mut c.bench_step.steps, &a.steps);
            }
            Command::OrrSommerfeldTime(a) => {
                set(&mut c.os_time.dt, &a.dt);
                set(&mut c.os_time.n_x, &a.nx);
                set(&mut c.os_time.family, &a.family);
                set(&mut c.os_time.t_end, &a.t_end);
            }
            Command::OrrSommerfeldSpace(a) => {
                set(&mut c.os_space.nx, &a.nx);
                set(&mut c.os_space.families, &a.family);
                set(&mut c.os_space.dt, &a.dt);
                set(&mut c.os_space.t_end, &a.t_end);
            }
            Command::TransformsSelftest(a) => {
                set(&mut c.transforms.nx, &a.nx);
                set(&mut c.transforms.timing_nx, &a.timing_nx);
            }
            Command::DumpMatrix(a) => {
                set(&mut c.mesh.n_x, &a.nx);
                set(&mut c.mesh.family, &a.family);
            }
        }
    }
}

/// Thread count from `SHENCHANNEL_THREADS`, all cores when unset.
fn thread_count(timed: bool) -> Result<usize, commands::Failure> {
    if timed {
        return Ok(1);
    }
    match std::env::var("SHENCHANNEL_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(commands::Failure::Config(format!(
                "SHENCHANNEL_THREADS = {s:?} is not a positive integer"
            ))),
        },
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> Result<bool, commands::Failure> {
    use commands::Failure;
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Config(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cli.command.apply(&mut cfg);
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;

    let threads = thread_count(cli.command.timed())?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;

    let dir = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let ctx = commands::RunDir::create(dir)?;
    if !matches!(cli.command, Command::Channel(_)) {
        ctx.echo(&cfg)?;
    }
    match &cli.command {
        Command::Channel(_) => commands::channel(&mut cfg, &ctx),
        Command::Roundoff(_) => commands::roundoff(&cfg, &ctx),
        Command::BenchSolve(_) => commands::bench_solve(&cfg, &ctx),
        Command::BenchStep(_) => commands::bench_step(&cfg, &ctx),
        Command::OrrSommerfeldTime(_) => commands::os_time(&cfg, &ctx),
        Command::OrrSommerfeldSpace(_) => commands::os_space(&cfg, &ctx),
        Command::TransformsSelftest(_) => commands::transforms(&cfg, &ctx),
        Command::DumpMatrix(a) => commands::dump_matrix(&cfg, &ctx, &a.name, a.oracle),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
