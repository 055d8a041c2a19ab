//! Run configuration: a TOML file with one section per concern. Every field
//! has a default, unknown keys are rejected.

use serde::{Deserialize, Serialize};
use shenchannel::stepper::Dealias;
use shenchannel::PointFamily;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Forcing {
    ConstantFlux,
    FixedBeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DealiasName {
    None,
    TwoThirds,
}

impl From<DealiasName> for Dealias {
    fn from(d: DealiasName) -> Self {
        match d {
            DealiasName::None => Dealias::None,
            DealiasName::TwoThirds => Dealias::TwoThirds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    GC,
    GL,
}

impl From<Family> for PointFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::GC => PointFamily::ChebyshevGauss,
            Family::GL => PointFamily::ChebyshevGaussLobatto,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.parse::<PointFamily>().map_err(|e| e.to_string())? {
            PointFamily::ChebyshevGauss => Ok(Family::GC),
            PointFamily::ChebyshevGaussLobatto => Ok(Family::GL),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub l_y: f64,
    pub l_z: f64,
    pub family: Family,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            n_x: 64,
            n_y: 64,
            n_z: 32,
            l_y: 4.0 * PI,
            l_z: 4.0 * PI / 3.0,
            family: Family::GC,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    /// `ν = 1 / re_tau` unless `nu` is given.
    pub re_tau: f64,
    pub nu: Option<f64>,
    pub dt: f64,
    pub forcing: Forcing,
    /// Driving term for `fixed-beta`; unused under `constant-flux`.
    pub beta: f64,
    /// Target flux for `constant-flux`; the flux of the initial state when absent.
    pub flux: Option<f64>,
    /// Mean velocity of the initial laminar profile.
    pub bulk_velocity: f64,
    /// Peak amplitude of the initial solenoidal perturbation.
    pub perturbation: f64,
    pub dealias: DealiasName,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection {
            re_tau: 180.0,
            nu: None,
            dt: 1e-3,
            forcing: Forcing::ConstantFlux,
            beta: 0.0,
            flux: None,
            bulk_velocity: 15.7,
            perturbation: 2.0,
            dealias: DealiasName::TwoThirds,
        }
    }
}

impl PhysicsSection {
    pub fn viscosity(&self) -> f64 {
        self.nu.unwrap_or(1.0 / self.re_tau)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub steps: Option<u64>,
    pub t_end: Option<f64>,
    /// Steps between checkpoints; 0 writes only the final one.
    pub checkpoint_interval: u64,
    /// Steps between rows of the statistics stream.
    pub stats_interval: u64,
    pub restart: Option<PathBuf>,
    /// Optional two-column `(y⁺, U⁺)` file to compare the final mean profile against.
    pub profile: Option<PathBuf>,
    pub continuity_tolerance: f64,
    pub flux_tolerance: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            steps: None,
            t_end: None,
            checkpoint_interval: 0,
            stats_interval: 10,
            restart: None,
            profile: None,
            continuity_tolerance: 1e-10,
            flux_tolerance: 0.01,
        }
    }
}

impl RunSection {
    pub fn step_count(&self, dt: f64) -> u64 {
        match (self.steps, self.t_end) {
            (Some(s), _) => s,
            (None, Some(t)) => (t / dt - 1e-9).ceil().max(0.0) as u64,
            (None, None) => 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoundoffSection {
    pub nx: Vec<usize>,
    pub z: Vec<f64>,
    pub nu: f64,
    pub dt: f64,
    pub runs: usize,
}

impl Default for RoundoffSection {
    fn default() -> Self {
        RoundoffSection {
            nx: vec![64, 128, 256, 512, 1024, 2048, 4096],
            z: vec![0.0, 200.0, 1800.0, 5400.0],
            nu: 1.0 / 5200.0,
            dt: 1e-5,
            runs: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSolveSection {
    pub nx: Vec<usize>,
    pub z: f64,
    pub nu: f64,
    pub dt: f64,
    pub trial_ms: u64,
    pub trials: usize,
    pub check_from: usize,
}

impl Default for BenchSolveSection {
    fn default() -> Self {
        BenchSolveSection {
            nx: vec![64, 128, 256, 512, 1024, 2048, 4096, 8192],
            z: 200.0,
            nu: 1.0 / 5200.0,
            dt: 1e-5,
            trial_ms: 40,
            trials: 7,
            check_from: 512,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchStepSection {
    pub nx: Vec<usize>,
    pub n_y: usize,
    pub n_z: usize,
    pub nu: f64,
    pub dt: f64,
    pub steps: usize,
    pub trial_ms: u64,
    pub check_from: usize,
}

impl Default for BenchStepSection {
    fn default() -> Self {
        BenchStepSection {
            nx: vec![128, 256, 512, 1024, 2048],
            n_y: 32,
            n_z: 32,
            nu: 1.0 / 590.0,
            dt: 1e-4,
            steps: 6,
            trial_ms: 1500,
            check_from: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OsTimeSection {
    pub dt: Vec<f64>,
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub family: Family,
    pub re: f64,
    pub epsilon: f64,
    pub t_end: f64,
}

impl Default for OsTimeSection {
    fn default() -> Self {
        OsTimeSection {
            dt: vec![0.1, 1.0 / 15.0, 0.05, 0.04, 1.0 / 30.0, 1.0 / 35.0, 0.025],
            n_x: 128,
            n_y: 8,
            n_z: 2,
            family: Family::GC,
            re: 8000.0,
            epsilon: 1e-7,
            t_end: 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OsSpaceSection {
    pub nx: Vec<usize>,
    pub families: Vec<Family>,
    pub n_y: usize,
    pub n_z: usize,
    pub re: f64,
    pub epsilon: f64,
    pub dt: f64,
    pub t_end: f64,
    pub reference_n_x: usize,
}

impl Default for OsSpaceSection {
    fn default() -> Self {
        OsSpaceSection {
            nx: vec![16, 32, 64, 128, 256],
            families: vec![Family::GC, Family::GL],
            n_y: 8,
            n_z: 2,
            re: 8000.0,
            epsilon: 1e-7,
            dt: 1e-3,
            t_end: 0.05,
            reference_n_x: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformsSection {
    pub nx: Vec<usize>,
    pub timing_nx: Vec<usize>,
    pub n_y: usize,
    pub n_z: usize,
    pub check_from: usize,
    pub trial_ms: u64,
}

impl Default for TransformsSection {
    fn default() -> Self {
        TransformsSection {
            nx: vec![8, 16, 32, 64],
            timing_nx: vec![256, 512, 1024, 2048, 4096],
            n_y: 32,
            n_z: 32,
            check_from: 512,
            trial_ms: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Run directory; `runs/<subcommand>` when empty.
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub mesh: MeshSection,
    pub physics: PhysicsSection,
    pub run: RunSection,
    pub roundoff: RoundoffSection,
    pub bench_solve: BenchSolveSection,
    pub bench_step: BenchStepSection,
    pub os_time: OsTimeSection,
    pub os_space: OsSpaceSection,
    pub transforms: TransformsSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Checks every section; run before anything is allocated.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.mesh;
        if m.n_x < 8 {
            return invalid(format!("mesh.n_x = {} must be at least 8", m.n_x));
        }
        for (name, n) in [("mesh.n_y", m.n_y), ("mesh.n_z", m.n_z)] {
            if n < 2 || n % 2 != 0 {
                return invalid(format!("{name} = {n} must be even and at least 2"));
            }
        }
        positive("mesh.l_y", m.l_y)?;
        positive("mesh.l_z", m.l_z)?;
        let p = &self.physics;
        positive("physics.dt", p.dt)?;
        positive("physics.re_tau", p.re_tau)?;
        if let Some(nu) = p.nu {
            positive("physics.nu", nu)?;
        }
        if !p.beta.is_finite() || !p.bulk_velocity.is_finite() || !p.perturbation.is_finite() {
            return invalid("physics.beta, bulk_velocity and perturbation must be finite");
        }
        if let Some(f) = p.flux {
            if !f.is_finite() {
                return invalid("physics.flux must be finite");
            }
        }
        let r = &self.run;
        if r.steps.is_some() && r.t_end.is_some() {
            return invalid("give either run.steps or run.t_end, not both");
        }
        if let Some(t) = r.t_end {
            positive("run.t_end", t)?;
        }
        positive("run.continuity_tolerance", r.continuity_tolerance)?;
        positive("run.flux_tolerance", r.flux_tolerance)?;

        let ro = &self.roundoff;
        sizes("roundoff.nx", &ro.nx, 8)?;
        if ro.z.is_empty() || ro.z.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
            return invalid("roundoff.z must be a non-empty list of non-negative numbers");
        }
        positive("roundoff.nu", ro.nu)?;
        positive("roundoff.dt", ro.dt)?;
        if ro.runs == 0 {
            return invalid("roundoff.runs must be positive");
        }

        let bs = &self.bench_solve;
        sizes("bench_solve.nx", &bs.nx, 8)?;
        positive("bench_solve.nu", bs.nu)?;
        positive("bench_solve.dt", bs.dt)?;
        if !(bs.z.is_finite() && bs.z >= 0.0) || bs.trials == 0 || bs.trial_ms == 0 {
            return invalid("bench_solve needs z >= 0, trials > 0 and trial_ms > 0");
        }

        let bt = &self.bench_step;
        sizes("bench_step.nx", &bt.nx, 8)?;
        even("bench_step.n_y", bt.n_y)?;
        even("bench_step.n_z", bt.n_z)?;
        positive("bench_step.nu", bt.nu)?;
        positive("bench_step.dt", bt.dt)?;
        if bt.steps == 0 {
            return invalid("bench_step.steps must be positive");
        }

        let ot = &self.os_time;
        if ot.dt.is_empty() || ot.dt.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return invalid("os_time.dt must be a non-empty list of positive steps");
        }
        if ot.n_x < 16 {
            return invalid("os_time.n_x must be at least 16");
        }
        even("os_time.n_y", ot.n_y)?;
        even("os_time.n_z", ot.n_z)?;
        positive("os_time.re", ot.re)?;
        positive("os_time.epsilon", ot.epsilon)?;
        positive("os_time.t_end", ot.t_end)?;

        let os = &self.os_space;
        sizes("os_space.nx", &os.nx, 16)?;
        if os.families.is_empty() {
            return invalid("os_space.families must not be empty");
        }
        even("os_space.n_y", os.n_y)?;
        even("os_space.n_z", os.n_z)?;
        positive("os_space.re", os.re)?;
        positive("os_space.epsilon", os.epsilon)?;
        positive("os_space.dt", os.dt)?;
        positive("os_space.t_end", os.t_end)?;
        if os.reference_n_x < 16 {
            return invalid("os_space.reference_n_x must be at least 16");
        }

        let tr = &self.transforms;
        sizes("transforms.nx", &tr.nx, 8)?;
        sizes("transforms.timing_nx", &tr.timing_nx, 8)?;
        even("transforms.n_y", tr.n_y)?;
        even("transforms.n_z", tr.n_z)?;
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        invalid(format!("{name} = {v} must be positive"))
    }
}

fn even(name: &str, n: usize) -> Result<(), ConfigError> {
    if n >= 2 && n % 2 == 0 {
        Ok(())
    } else {
        invalid(format!("{name} = {n} must be even and at least 2"))
    }
}

fn sizes(name: &str, list: &[usize], min: usize) -> Result<(), ConfigError> {
    if list.is_empty() || list.iter().any(|&n| n < min) {
        invalid(format!("{name} must be a non-empty list of sizes >= {min}"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let back = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[mesh]\nnx = 4\n").is_err());
        assert!(RunConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn sections_are_partial() {
        let c = RunConfig::parse("seed = 3\n[physics]\nforcing = \"fixed-beta\"\nbeta = -0.01\n")
            .unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.physics.forcing, Forcing::FixedBeta);
        assert_eq!(c.mesh, MeshSection::default());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = RunConfig::default();
        c.mesh.n_y = 7;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.run.steps = Some(5);
        c.run.t_end = Some(1.0);
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.physics.dt = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn step_count_from_end_time() {
        let r = RunSection {
            t_end: Some(0.5),
            ..Default::default()
        };
        assert_eq!(r.step_count(0.1), 5);
    }
}
