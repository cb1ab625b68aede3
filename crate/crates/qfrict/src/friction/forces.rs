use super::powers::{power_pa_asymptotic, power_pa_quadrature, PowerMode};
use super::{ForceModel, ForceResult};
use crate::amplitudes::{gamma_ground, ground_resonant_integral, lamb_shift_ground};
use crate::error::{QfError, Result};
use crate::material::{im_reflection, AtomParams, MaterialParams};
use crate::quadrature::{integrate_1d, integrate_exp_damped, QuadResult, QuadSpec};
use std::f64::consts::PI;

/// Recoil force of one-photon emission from the ground state,
/// F⁽²⁾ = −(αΩ/π)∫d²k k_x k e^{−2kz} Im R(k·v − Ω) on k·v ≥ Ω.
pub fn force_second_order(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<ForceResult> {
    if v < 0.0 {
        return Err(QfError::Domain(format!("speed must be non-negative, got {v}")));
    }
    let r = ground_resonant_integral(atom, m, v, true, spec)?;
    Ok(ForceResult::along_x(-r.value, r.err_estimate, ForceModel::PerturbativeO4))
}

/// Momentum carried off per unit time by emitted photons, ∫dw₁ k_x, in
/// Cartesian (k_x, k_y). Independent of the polar route used for F⁽²⁾.
pub fn recoil_momentum_rate(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    if v <= 0.0 {
        return Ok(QuadResult { value: 0.0, err_estimate: 0.0, evals: 0, converged: true });
    }
    let (om, z) = (atom.omega0, atom.z);
    let kmin = om / v;
    let bad = std::cell::Cell::new(false);
    let f = |kx: f64| {
        // ∫dk_y k e^{−2z(k − k_x)} over the real line
        let g = |ky: f64| {
            let k = kx.hypot(ky);
            k * (-2.0 * z * (k - kx)).exp()
        };
        let r = integrate_1d(g, 0.0, f64::INFINITY, spec);
        bad.set(bad.get() || !r.converged);
        2.0 * r.value * kx * im_reflection(kx * v - om, m) * (-2.0 * z * (kx - kmin)).exp()
    };
    let mut r = integrate_exp_damped(f, kmin, 2.0 * z, spec);
    r.converged &= !bad.get();
    Ok(r.scale(atom.alpha0 * om / PI * (-2.0 * z * kmin).exp()).require("photon recoil rate")?)
}

/// F⁽⁴⁾ and its pieces along x.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourthOrderForce {
    pub force: ForceResult,
    /// −P_A/v
    pub dominant: f64,
    /// −γ_g t F⁽²⁾
    pub growth: f64,
    /// −∂_v(γ_g δE_g), central differences with step 0.01·v; diagnostic.
    pub gradient: f64,
    pub p_a: f64,
    pub p_a_err: f64,
}

impl FourthOrderForce {
    /// |growth + gradient| / |dominant|.
    pub fn exponential_fraction(&self) -> f64 {
        (self.growth.abs() + self.gradient.abs()) / self.dominant.abs()
    }

    /// −F·v − P_A, relative to P_A, using the dominant term only.
    pub fn energy_identity_residual(&self, v: f64) -> f64 {
        (-self.dominant * v - self.p_a) / self.p_a
    }
}

/// Fourth-order average force on an atom in uniform motion since the
/// remote past, observed at time t.
pub fn force_fourth_order(
    atom: &AtomParams,
    m: &MaterialParams,
    v: f64,
    t: f64,
    pa_mode: PowerMode,
    spec: &QuadSpec,
) -> Result<FourthOrderForce> {
    if !(v > 0.0) {
        return Err(QfError::Domain(format!("fourth-order force needs v > 0, got {v}")));
    }
    let (p_a, p_a_err) = match pa_mode {
        PowerMode::Asymptotic => (power_pa_asymptotic(atom, m, v), 0.0),
        PowerMode::Quadrature => {
            let r = power_pa_quadrature(atom, m, v, &spec.with_max_evals(spec.max_evals.max(QuadSpec::for_dim(5).max_evals)))?;
            (r.value, r.err_estimate)
        }
    };
    let dominant = -p_a / v;
    let s1 = spec.with_abs_tol(0.0);
    let gamma = gamma_ground(atom, m, v, &s1)?.value;
    let f2 = force_second_order(atom, m, v, &s1)?.f[0];
    let growth = -gamma * t * f2;
    let h = 0.01 * v;
    let gd = |u: f64| -> Result<f64> {
        let g = gamma_ground(atom, m, u, &s1)?.value;
        if g == 0.0 {
            return Ok(0.0);
        }
        Ok(g * lamb_shift_ground(atom, m, u, &s1)?.value)
    };
    let gradient = -(gd(v + h)? - gd(v - h)?) / (2.0 * h);
    let fx = dominant + growth + gradient;
    Ok(FourthOrderForce {
        force: ForceResult::along_x(fx, p_a_err / v, ForceModel::PerturbativeO4),
        dominant,
        growth,
        gradient,
        p_a,
        p_a_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (AtomParams, MaterialParams) {
        (AtomParams::new(1.0, 1.0, 1.0).unwrap(), MaterialParams::new(2f64.sqrt(), 1.0, 0.1).unwrap())
    }

    #[test]
    fn second_order_recoil() {
        let (at, m) = setup();
        let s = QuadSpec::default().with_rel_tol(1e-9);
        assert_eq!(force_second_order(&at, &m, 0.0, &s).unwrap().f[0], 0.0);
        let f = force_second_order(&at, &m, 0.3, &s).unwrap();
        assert!(f.f[0] < 0.0);
        let p = recoil_momentum_rate(&at, &m, 0.3, &s).unwrap();
        assert!((f.f[0] + p.value).abs() < 1e-7 * p.value, "{} {}", f.f[0], p.value);
    }

    #[test]
    fn fourth_order_is_dominated_by_two_plasmon_power() {
        let (at, m) = setup();
        let v = 0.02;
        let r = force_fourth_order(&at, &m, v, 100.0, PowerMode::Asymptotic, &QuadSpec::default()).unwrap();
        assert!(r.force.f[0] < 0.0);
        assert!(r.exponential_fraction() < 1e-6);
        assert!(r.energy_identity_residual(v).abs() < 1e-14);
    }
}
