//! One model evaluated at one configuration.

use crate::config::{ModelTag, RunConfig};
use crate::report::Row;
use crate::CliError;
use qfrict::friction::{
    force_fourth_order, launch_powers, markov_force, noneq_force, noneq_spectral, power_pa_asymptotic, power_pa_quadrature, LaunchGrid,
    PowerMode,
};
use qfrict::TrajectoryKind;

/// Value and error estimate of `model` at `cfg`. Powers are P ≥ 0 or P₁ ≤ 0;
/// forces are the x component (negative for drag).
pub fn evaluate(model: ModelTag, cfg: &RunConfig) -> Result<(f64, f64, String), CliError> {
    let (atom, m, traj) = (&cfg.atom, &cfg.material, &cfg.trajectory);
    let v = traj.v;
    let o = cfg.options;
    let launched = v > 0.0 && traj.kind != TrajectoryKind::ConstantVelocity;
    let out = match model {
        ModelTag::PA => {
            let mode = o.pa_mode.name().to_string();
            match o.pa_mode {
                _ if v == 0.0 => (0.0, 0.0, mode),
                PowerMode::Asymptotic => (power_pa_asymptotic(atom, m, v), 0.0, mode),
                PowerMode::Quadrature => {
                    let r = power_pa_quadrature(atom, m, v, &cfg.spec_for_dim(5))?;
                    (r.value, r.err_estimate, mode)
                }
            }
        }
        ModelTag::PB | ModelTag::P1 => {
            let mode = o.doppler.name().to_string();
            if !launched {
                (0.0, 0.0, mode)
            } else {
                let (b, one) = launch_powers(atom, m, traj, o.doppler, &LaunchGrid::default())?;
                let r = if model == ModelTag::PB { b } else { one };
                (r.value, r.err_estimate, mode)
            }
        }
        ModelTag::ForceO4 => {
            let mode = format!("pa-{}", o.pa_mode.name());
            if v == 0.0 {
                (0.0, 0.0, mode)
            } else {
                let f = force_fourth_order(atom, m, v, cfg.t_obs, o.pa_mode, &cfg.spec_for_dim(1))?;
                (f.force.f[0], f.force.err_estimate, mode)
            }
        }
        ModelTag::Markov => {
            let f = markov_force(atom, m, v, o.markov_mode, &cfg.spec_for_dim(1))?;
            (f.f[0], f.err_estimate, o.markov_mode.name().to_string())
        }
        ModelTag::NonEq => {
            let mode = o.noneq_mode.name().to_string();
            if v == 0.0 {
                (0.0, 0.0, mode)
            } else {
                let ns = noneq_spectral(atom, m, v, &cfg.spec_for_dim(1))?;
                let f = noneq_force(&ns, o.noneq_mode)?;
                (f.f[0], f.err_estimate, mode)
            }
        }
    };
    Ok(out)
}

/// `evaluate` packaged as an output row.
pub fn evaluate_row(model: ModelTag, cfg: &RunConfig, sweep: Option<(crate::SweepVar, f64)>) -> Result<Row, CliError> {
    let (value, err_estimate, mode) = evaluate(model, cfg).map_err(|e| match e {
        CliError::Numeric(s) => CliError::Numeric(format!("{model}: {s}")),
        CliError::Config(s) => CliError::Config(format!("{model}: {s}")),
        e => e,
    })?;
    Ok(Row { model, variable: sweep.map(|s| s.0), x: sweep.map(|s| s.1), value, err_estimate, mode, groups: cfg.groups() })
}
