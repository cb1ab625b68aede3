//! Flat `key = value` run configuration.
//!
//! ```text
//! # reduced units, hbar = 1
//! atom.omega0 = 1
//! material.omega_s = 10
//! trajectory.kind = ramp
//! sweep.variable = v
//! sweep.min = 0.005
//! sweep.max = 0.02
//! sweep.points = 6
//! models = PA, PB
//! ```

use crate::CliError;
use qfrict::friction::{MarkovMode, NonEqMode, PowerMode};
use qfrict::quadrature::QuadSpec;
use qfrict::trajectory::AccelSamples;
use qfrict::{AtomParams, DopplerMode, MaterialParams, Trajectory, TrajectoryKind};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelTag {
    PA,
    PB,
    P1,
    ForceO4,
    Markov,
    NonEq,
}

impl ModelTag {
    pub const ALL: [ModelTag; 6] = [Self::PA, Self::PB, Self::P1, Self::ForceO4, Self::Markov, Self::NonEq];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.tag().eq_ignore_ascii_case(s.trim()))
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::PA => "PA",
            Self::PB => "PB",
            Self::P1 => "P1",
            Self::ForceO4 => "ForceO4",
            Self::Markov => "Markov",
            Self::NonEq => "NonEq",
        }
    }

    pub fn is_force(self) -> bool {
        matches!(self, Self::ForceO4 | Self::Markov | Self::NonEq)
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepVar {
    V,
    Z,
    Tau,
    Omega0,
}

impl SweepVar {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v" => Some(Self::V),
            "z" => Some(Self::Z),
            "tau" => Some(Self::Tau),
            "omega0" => Some(Self::Omega0),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::V => "v",
            Self::Z => "z",
            Self::Tau => "tau",
            Self::Omega0 => "omega0",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub variable: SweepVar,
    pub grid: Vec<f64>,
}

impl Sweep {
    /// `n` log-spaced points from `lo` to `hi` inclusive.
    pub fn log_spaced(variable: SweepVar, lo: f64, hi: f64, n: usize) -> Result<Self, CliError> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(CliError::Config(format!("sweep range must satisfy 0 < min < max, got [{lo}, {hi}]")));
        }
        if n < 2 {
            return Err(CliError::Config(format!("sweep.points must be at least 2, got {n}")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let mut grid: Vec<f64> = (0..n).map(|j| (a + (b - a) * j as f64 / (n - 1) as f64).exp()).collect();
        grid[0] = lo;
        grid[n - 1] = hi;
        Ok(Self { variable, grid })
    }
}

/// Evaluation choices per model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelOptions {
    pub doppler: DopplerMode,
    pub pa_mode: PowerMode,
    pub markov_mode: MarkovMode,
    pub noneq_mode: NonEqMode,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            doppler: DopplerMode::Leading,
            pa_mode: PowerMode::Quadrature,
            markov_mode: MarkovMode::FullIntegral,
            noneq_mode: NonEqMode::FullIntegral,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub atom: AtomParams,
    pub material: MaterialParams,
    pub trajectory: Trajectory,
    /// Observation time for the fourth-order force.
    pub t_obs: f64,
    pub sweep: Option<Sweep>,
    pub models: Vec<ModelTag>,
    pub quad: QuadSpec,
    /// None: every integral keeps the budget of its own dimension.
    pub max_evals: Option<usize>,
    pub options: ModelOptions,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            atom: AtomParams::new(1.0, 1.0, 1.0).unwrap(),
            material: MaterialParams::new(10.0 * 2f64.sqrt(), 10.0, 0.5).unwrap(),
            trajectory: Trajectory::sudden(0.01),
            t_obs: 0.0,
            sweep: None,
            models: vec![ModelTag::PA],
            quad: QuadSpec::default(),
            max_evals: None,
            options: ModelOptions::default(),
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)));
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if let Some((first, _)) = kv.get(&k) {
                return Err(CliError::Config(format!("line {}: `{k}` already set on line {first}", i + 1)));
            }
            kv.insert(k, (i + 1, v));
        }
        Raw { kv }.build(base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Spec for an integral of dimension `n`, honouring quad.max_evals.
    pub fn spec_for_dim(&self, n: usize) -> QuadSpec {
        let d = QuadSpec::for_dim(n);
        QuadSpec { rel_tol: self.quad.rel_tol, abs_tol: self.quad.abs_tol, max_evals: self.max_evals.unwrap_or(d.max_evals), strategy: d.strategy }
    }

    pub fn sweep_value(&self, var: SweepVar) -> f64 {
        match var {
            SweepVar::V => self.trajectory.v,
            SweepVar::Z => self.atom.z,
            SweepVar::Tau => self.trajectory.tau,
            SweepVar::Omega0 => self.atom.omega0,
        }
    }

    /// The configuration at one sweep point.
    pub fn at(&self, var: SweepVar, x: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        match var {
            SweepVar::V => c.trajectory = c.trajectory.with_speed(x),
            SweepVar::Z => c.atom = AtomParams::new(c.atom.omega0, c.atom.alpha0, x)?,
            SweepVar::Tau => {
                c.trajectory = match c.trajectory.kind {
                    TrajectoryKind::Custom => {
                        Trajectory::custom(c.trajectory.custom_accel.clone().expect("custom path carries samples"), x)?
                    }
                    k => Trajectory::new(k, c.trajectory.v, x)?,
                }
            }
            SweepVar::Omega0 => c.atom = AtomParams::new(x, c.atom.alpha0, c.atom.z)?,
        }
        Ok(c)
    }

    /// (v/Ωz, Ωτ, Γ/ω_S, Ω/ω_S)
    pub fn groups(&self) -> [f64; 4] {
        let (a, m, t) = (&self.atom, &self.material, &self.trajectory);
        [t.v / (a.omega0 * a.z), a.omega0 * t.tau, m.gamma_damp / m.omega_s, a.omega0 / m.omega_s]
    }
}

const KEYS: &[&str] = &[
    "atom.omega0",
    "atom.alpha0",
    "atom.z",
    "material.omega_p",
    "material.omega_s",
    "material.gamma_damp",
    "trajectory.kind",
    "trajectory.v",
    "trajectory.tau",
    "trajectory.file",
    "trajectory.t_obs",
    "sweep.variable",
    "sweep.min",
    "sweep.max",
    "sweep.points",
    "sweep.values",
    "quad.rel_tol",
    "quad.abs_tol",
    "quad.max_evals",
    "models",
    "models.doppler",
    "models.pa_mode",
    "models.markov_mode",
    "models.noneq_mode",
    "output.path",
];

struct Raw {
    kv: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.kv.get(key) {
            Some((line, _)) => CliError::Config(format!("line {line}: {key}: {msg}")),
            None => CliError::Config(format!("{key}: {msg}")),
        }
    }

    fn wrap<T>(&self, key: &str, r: qfrict::Result<T>) -> Result<T, CliError> {
        r.map_err(|e| self.err(key, e))
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.kv.get(key).map(|(_, v)| v.as_str())
    }

    fn num(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(s) => s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.err(key, format!("not a number: `{s}`"))),
        }
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.str(key).map(|_| self.num(key, 0.0)).transpose()
    }

    fn choice<T>(&self, key: &str, default: T, parse: fn(&str) -> Option<T>) -> Result<T, CliError> {
        match self.str(key) {
            None => Ok(default),
            Some(s) => parse(s).ok_or_else(|| self.err(key, format!("unrecognised value `{s}`"))),
        }
    }

    fn build(&self, base_dir: &Path) -> Result<RunConfig, CliError> {
        let d = RunConfig::default();

        let atom = AtomParams::new(
            self.num("atom.omega0", d.atom.omega0)?,
            self.num("atom.alpha0", d.atom.alpha0)?,
            self.num("atom.z", d.atom.z)?,
        );
        let atom = self.wrap("atom", atom)?;
        let material = MaterialParams::new(
            self.num("material.omega_p", d.material.omega_p)?,
            self.num("material.omega_s", d.material.omega_s)?,
            self.num("material.gamma_damp", d.material.gamma_damp)?,
        );
        let material = self.wrap("material", material)?;

        let kind = self.choice("trajectory.kind", TrajectoryKind::SuddenBoost, TrajectoryKind::parse)?;
        let v = self.num("trajectory.v", d.trajectory.v)?;
        let tau = self.num("trajectory.tau", 1.0)?;
        let trajectory = if kind == TrajectoryKind::Custom {
            let file = self.str("trajectory.file").ok_or_else(|| self.err("trajectory.file", "required for a custom trajectory"))?;
            let samples = self.wrap("trajectory.file", AccelSamples::load(&base_dir.join(file)))?;
            self.wrap("trajectory", Trajectory::custom(samples, tau))?
        } else {
            if self.str("trajectory.file").is_some() {
                return Err(self.err("trajectory.file", "only valid with trajectory.kind = custom"));
            }
            self.wrap("trajectory", Trajectory::new(kind, v, tau))?
        };
        let t_obs = self.num("trajectory.t_obs", 0.0)?;

        let sweep = self.sweep()?;

        let models = match self.str("models") {
            None => d.models,
            Some(s) => {
                let mut out = Vec::new();
                for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    let m = ModelTag::parse(part).ok_or_else(|| self.err("models", format!("unknown model tag `{part}`")))?;
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
                if out.is_empty() {
                    return Err(self.err("models", "no model requested"));
                }
                out
            }
        };

        let rel_tol = self.num("quad.rel_tol", d.quad.rel_tol)?;
        // loose tolerances are accepted so that oracle-check can be exercised with them
        if !(rel_tol > 1e-14 && rel_tol < 1.0) {
            return Err(self.err("quad.rel_tol", format!("must lie in (1e-14, 1), got {rel_tol}")));
        }
        let abs_tol = self.num("quad.abs_tol", 0.0)?;
        if abs_tol < 0.0 {
            return Err(self.err("quad.abs_tol", "must be non-negative"));
        }
        let max_evals = match self.str("quad.max_evals") {
            None => None,
            Some(s) => {
                let n: usize = s.parse().map_err(|_| self.err("quad.max_evals", format!("not an integer: `{s}`")))?;
                if n < 1000 {
                    return Err(self.err("quad.max_evals", format!("at least 1000 required, got {n}")));
                }
                Some(n)
            }
        };
        let quad = QuadSpec::default().with_rel_tol(rel_tol).with_abs_tol(abs_tol);

        let options = ModelOptions {
            doppler: self.choice("models.doppler", d.options.doppler, DopplerMode::parse)?,
            pa_mode: self.choice("models.pa_mode", d.options.pa_mode, PowerMode::parse)?,
            markov_mode: self.choice("models.markov_mode", d.options.markov_mode, MarkovMode::parse)?,
            noneq_mode: self.choice("models.noneq_mode", d.options.noneq_mode, NonEqMode::parse)?,
        };
        let output_path = self.str("output.path").map(PathBuf::from);
        let cfg = RunConfig { atom, material, trajectory, t_obs, sweep, models, quad, max_evals, options, output_path };
        if let Some(s) = &cfg.sweep {
            // every point must be a valid configuration
            for &x in &s.grid {
                cfg.at(s.variable, x).map_err(|e| self.err("sweep", e))?;
            }
        }
        Ok(cfg)
    }

    fn sweep(&self) -> Result<Option<Sweep>, CliError> {
        let var = match self.str("sweep.variable") {
            None => {
                if let Some(k) = ["sweep.min", "sweep.max", "sweep.points", "sweep.values"].into_iter().find(|k| self.str(k).is_some()) {
                    return Err(self.err(k, "sweep.variable is not set"));
                }
                return Ok(None);
            }
            Some(_) => self.choice("sweep.variable", SweepVar::V, SweepVar::parse)?,
        };
        if let Some(list) = self.str("sweep.values") {
            if ["sweep.min", "sweep.max", "sweep.points"].iter().any(|k| self.str(k).is_some()) {
                return Err(self.err("sweep.values", "give either sweep.values or sweep.min/max/points"));
            }
            let mut grid = Vec::new();
            for p in list.split(',').map(str::trim) {
                let x: f64 = p.parse().ok().filter(|x: &f64| x.is_finite()).ok_or_else(|| self.err("sweep.values", format!("not a number: `{p}`")))?;
                grid.push(x);
            }
            if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
                return Err(self.err("sweep.values", "need at least 2 strictly increasing values"));
            }
            return Ok(Some(Sweep { variable: var, grid }));
        }
        let lo = self.opt_num("sweep.min")?.ok_or_else(|| self.err("sweep.min", "required"))?;
        let hi = self.opt_num("sweep.max")?.ok_or_else(|| self.err("sweep.max", "required"))?;
        let n = match self.str("sweep.points") {
            None => 6,
            Some(s) => s.parse().map_err(|_| self.err("sweep.points", format!("not an integer: `{s}`")))?,
        };
        Sweep::log_spaced(var, lo, hi, n).map(Some).map_err(|e| self.err("sweep", e))
    }
}
