//! The five subcommands as library functions.

use crate::config::{ModelTag, RunConfig, SweepVar};
use crate::fit::fit_power_law;
use crate::observables::evaluate_row;
use crate::oracle::{run_checks, CheckRow, CheckStatus};
use crate::report::{fmt_f64, Row};
use crate::CliError;
use rayon::prelude::*;

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))
}

fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| a.model.tag().cmp(b.model.tag()).then(a.x.unwrap_or(0.0).total_cmp(&b.x.unwrap_or(0.0))));
}

/// Every (model, point) pair on `jobs` workers; the first failure in task
/// order wins so that errors are reproducible too.
fn run_tasks(cfg: &RunConfig, points: &[Option<(SweepVar, f64)>], jobs: usize) -> Result<Vec<Row>, CliError> {
    let tasks: Vec<(ModelTag, Option<(SweepVar, f64)>)> =
        cfg.models.iter().flat_map(|&m| points.iter().map(move |&p| (m, p))).collect();
    let results: Vec<Result<Row, CliError>> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(m, p)| {
                let c = match p {
                    Some((var, x)) => cfg.at(var, x)?,
                    None => cfg.clone(),
                };
                evaluate_row(m, &c, p)
            })
            .collect()
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

fn sweep_points(cfg: &RunConfig, min_points: usize) -> Result<Vec<Option<(SweepVar, f64)>>, CliError> {
    let s = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("sweep.variable and a grid are required".into()))?;
    if s.grid.len() < min_points {
        return Err(CliError::Config(format!("sweep needs at least {min_points} points, got {}", s.grid.len())));
    }
    Ok(s.grid.iter().map(|&x| Some((s.variable, x))).collect())
}

/// One row per model at the base configuration; any sweep block is ignored.
pub fn cmd_compute(cfg: &RunConfig, jobs: usize) -> Result<Vec<Row>, CliError> {
    run_tasks(cfg, &[None], jobs)
}

pub fn cmd_sweep(cfg: &RunConfig, jobs: usize) -> Result<Vec<Row>, CliError> {
    let pts = sweep_points(cfg, 2)?;
    run_tasks(cfg, &pts, jobs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitRow {
    pub model: ModelTag,
    pub variable: SweepVar,
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
}

pub fn cmd_fit_exponent(cfg: &RunConfig, jobs: usize) -> Result<Vec<FitRow>, CliError> {
    let pts = sweep_points(cfg, 4)?;
    let rows = run_tasks(cfg, &pts, jobs)?;
    let var = cfg.sweep.as_ref().expect("checked above").variable;
    let mut models = cfg.models.clone();
    models.sort_by_key(|m| m.tag());
    models
        .into_iter()
        .map(|m| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.model == m).map(|r| (r.x.unwrap(), r.value)).unzip();
            let f = fit_power_law(&xs, &ys).map_err(|e| match e {
                CliError::DegenerateFit(s) => CliError::DegenerateFit(format!("{m}: {s}")),
                e => e,
            })?;
            Ok(FitRow { model: m, variable: var, slope: f.slope, stderr: f.stderr, points: xs.len() })
        })
        .collect()
}

pub fn fit_records(fits: &[FitRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["model", "sweep_variable", "slope", "stderr", "points"].map(String::from).to_vec();
    let recs = fits
        .iter()
        .map(|f| vec![f.model.tag().into(), f.variable.name().into(), fmt_f64(f.slope), fmt_f64(f.stderr), f.points.to_string()])
        .collect();
    (header, recs)
}

/// Side-by-side values with derived ratios; one entry per parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareTable {
    pub variable: Option<SweepVar>,
    pub xs: Vec<Option<f64>>,
    pub v: Vec<f64>,
    pub models: Vec<ModelTag>,
    /// values[model][point]
    pub values: Vec<Vec<f64>>,
    /// (column name, per-point ratio)
    pub ratios: Vec<(String, Vec<f64>)>,
}

impl CompareTable {
    pub fn value(&self, m: ModelTag, point: usize) -> Option<f64> {
        self.models.iter().position(|&x| x == m).map(|i| self.values[i][point])
    }

    pub fn ratio(&self, name: &str) -> Option<&[f64]> {
        self.ratios.iter().find(|r| r.0 == name).map(|r| r.1.as_slice())
    }

    pub fn records(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut header = vec!["sweep_variable".to_string(), "sweep_value".to_string(), "v".to_string()];
        header.extend(self.models.iter().map(|m| m.tag().to_string()));
        header.extend(self.ratios.iter().map(|r| r.0.clone()));
        let recs = (0..self.xs.len())
            .map(|j| {
                let mut r = vec![
                    self.variable.map(|v| v.name().to_string()).unwrap_or_default(),
                    self.xs[j].map(fmt_f64).unwrap_or_default(),
                    fmt_f64(self.v[j]),
                ];
                r.extend(self.values.iter().map(|col| fmt_f64(col[j])));
                r.extend(self.ratios.iter().map(|c| fmt_f64(c.1[j])));
                r
            })
            .collect();
        (header, recs)
    }
}

/// Ratios emitted when both members of a pair are requested.
const RATIOS: [(&str, ModelTag, ModelTag); 3] = [
    ("noneq_power_over_pa", ModelTag::NonEq, ModelTag::PA),
    ("markov_power_over_pb", ModelTag::Markov, ModelTag::PB),
    ("force_o4_power_over_pa", ModelTag::ForceO4, ModelTag::PA),
];

pub fn cmd_compare_models(cfg: &RunConfig, jobs: usize) -> Result<CompareTable, CliError> {
    if cfg.models.len() < 2 {
        return Err(CliError::Config(format!("compare-models needs at least 2 models, got {}", cfg.models.len())));
    }
    let pts = if cfg.sweep.is_some() { sweep_points(cfg, 2)? } else { vec![None] };
    let rows = run_tasks(cfg, &pts, jobs)?;
    let mut models = cfg.models.clone();
    models.sort_by_key(|m| m.tag());
    let xs: Vec<Option<f64>> = pts.iter().map(|p| p.map(|p| p.1)).collect();
    let v: Vec<f64> = pts
        .iter()
        .map(|p| match p {
            Some((var, x)) => cfg.at(*var, *x).map(|c| c.trajectory.v),
            None => Ok(cfg.trajectory.v),
        })
        .collect::<Result<_, _>>()?;
    let values: Vec<Vec<f64>> = models
        .iter()
        .map(|&m| {
            xs.iter()
                .map(|x| rows.iter().find(|r| r.model == m && r.x == *x).map(|r| r.value).expect("every task produced a row"))
                .collect()
        })
        .collect();
    let mut t = CompareTable { variable: cfg.sweep.as_ref().map(|s| s.variable), xs, v, models, values, ratios: Vec::new() };
    for (name, force, power) in RATIOS {
        if let (Some(fi), Some(pi)) = (t.models.iter().position(|&m| m == force), t.models.iter().position(|&m| m == power)) {
            let col = (0..t.xs.len()).map(|j| -t.values[fi][j] * t.v[j] / t.values[pi][j]).collect();
            t.ratios.push((name.to_string(), col));
        }
    }
    Ok(t)
}

/// Runs the invariant suite; fails with exit code 5 naming every failed check.
pub fn cmd_oracle_check(cfg: &RunConfig, jobs: usize) -> Result<Vec<CheckRow>, (Vec<CheckRow>, CliError)> {
    let rows = run_checks(cfg, jobs);
    let failed: Vec<String> = rows.iter().filter(|r| r.status == CheckStatus::Fail).map(|r| r.name.clone()).collect();
    if failed.is_empty() {
        Ok(rows)
    } else {
        Err((rows, CliError::Invariant(failed)))
    }
}
