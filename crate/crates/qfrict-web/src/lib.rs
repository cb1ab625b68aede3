//! wasm-bindgen surface for the static demo page in `www/`.
//!
//! Parameters arrive in reduced units (Ω = 1, z = 1), with the material given
//! by Ω/ω_S and Γ/ω_S and ω_p = √2 ω_S.

use qfrict::friction::{launch_powers, power_pa_asymptotic, LaunchGrid};
use qfrict::trajectory::shape_factor;
use qfrict::{AtomParams, DopplerMode, MaterialParams, Trajectory, TrajectoryKind};
use wasm_bindgen::prelude::*;

fn setup(omega_ratio: f64, gamma_ratio: f64) -> Result<(AtomParams, MaterialParams), JsError> {
    let ws = 1.0 / omega_ratio;
    let m = MaterialParams::new(2f64.sqrt() * ws, ws, gamma_ratio * ws).map_err(|e| JsError::new(&e.to_string()))?;
    Ok((AtomParams::new(1.0, 1.0, 1.0).unwrap(), m))
}

fn kind(name: &str) -> Result<TrajectoryKind, JsError> {
    TrajectoryKind::parse(name).ok_or_else(|| JsError::new(&format!("unknown trajectory `{name}`")))
}

/// Re Σ(x) at `n` points on [0, x_max]; Σ is real for the built-in launches.
#[wasm_bindgen]
pub fn shape_factor_curve(trajectory: &str, x_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let tr = Trajectory::new(kind(trajectory)?, 1.0, 1.0).map_err(|e| JsError::new(&e.to_string()))?;
    let n = n.clamp(2, 4096);
    (0..n)
        .map(|j| {
            let x = x_max * j as f64 / (n - 1) as f64;
            shape_factor(&tr, x).map(|s| s.re).map_err(|e| JsError::new(&e.to_string()))
        })
        .collect()
}

/// Closed-form P_A at `n` log-spaced speeds in [v_min, v_max], as
/// interleaved (v, P_A) pairs.
#[wasm_bindgen]
pub fn pa_curve(omega_ratio: f64, gamma_ratio: f64, v_min: f64, v_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    if !(v_min > 0.0 && v_max > v_min) {
        return Err(JsError::new("need 0 < v_min < v_max"));
    }
    let (at, m) = setup(omega_ratio, gamma_ratio)?;
    let n = n.clamp(2, 1024);
    let (a, b) = (v_min.ln(), v_max.ln());
    Ok((0..n)
        .flat_map(|j| {
            let v = (a + (b - a) * j as f64 / (n - 1) as f64).exp();
            [v, power_pa_asymptotic(&at, &m, v)]
        })
        .collect())
}

/// [P_B, P₁, |P_B + P₁|/P_B] for one launch at speed v and duration Ωτ.
#[wasm_bindgen]
pub fn launch_balance(trajectory: &str, v: f64, omega_tau: f64, omega_ratio: f64, gamma_ratio: f64) -> Result<Vec<f64>, JsError> {
    let (at, m) = setup(omega_ratio, gamma_ratio)?;
    let tr = Trajectory::new(kind(trajectory)?, v, omega_tau).map_err(|e| JsError::new(&e.to_string()))?;
    let (b, one) = launch_powers(&at, &m, &tr, DopplerMode::Leading, &LaunchGrid::default()).map_err(|e| JsError::new(&e.to_string()))?;
    let r = if b.value > 0.0 { (b.value + one.value).abs() / b.value } else { 0.0 };
    Ok(vec![b.value, one.value, r])
}
