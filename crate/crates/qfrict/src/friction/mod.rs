//! Friction observables: the two-photon powers P_A and P_B, the one-photon
//! power P₁ that cancels P_B, the perturbative force, the Markov force and
//! the non-equilibrium force.
//!
//! Every energy carries ħ = 1; v is the speed along x.

mod forces;
mod markov;
mod noneq;
mod powers;

pub use forces::{force_fourth_order, force_second_order, recoil_momentum_rate, FourthOrderForce};
pub use markov::{markov_force, wick_frequency_integral, MarkovLinewidths, MarkovMode, WickIntegral};
pub use noneq::{dipole_spectrum, noneq_force, noneq_spectral, NonEqMode, NonEqSpectralFunctions};
pub use powers::{
    k_constant_pa, k_constant_pa_restricted, k_constant_pb, launch_powers, power_breakdown, power_p1, power_pa_asymptotic,
    power_pa_quadrature, power_pa_quadrature_restricted, power_pa_scaling_limit, power_pb, power_pb_sudden_asymptotic, LaunchGrid, PowerBreakdown, PowerMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ForceModel {
    PerturbativeO4,
    MarkovQED,
    NonEqFDT,
}

impl ForceModel {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "perturbativeo4" | "perturbative" | "o4" => Some(Self::PerturbativeO4),
            "markovqed" | "markov" => Some(Self::MarkovQED),
            "noneqfdt" | "noneq" => Some(Self::NonEqFDT),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::PerturbativeO4 => "perturbative-o4",
            Self::MarkovQED => "markov-qed",
            Self::NonEqFDT => "noneq-fdt",
        }
    }

    /// Power of v the force follows at small speed.
    pub fn velocity_exponent(self) -> f64 {
        match self {
            Self::MarkovQED => 1.0,
            _ => 3.0,
        }
    }
}

/// In-plane force; the path runs along x so f[1] vanishes up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceResult {
    pub f: [f64; 2],
    pub model: ForceModel,
    pub velocity_exponent_hint: f64,
    pub err_estimate: f64,
}

impl ForceResult {
    pub(crate) fn along_x(fx: f64, err: f64, model: ForceModel) -> Self {
        Self { f: [fx, 0.0], model, velocity_exponent_hint: model.velocity_exponent(), err_estimate: err }
    }

    /// −F·v: the power dissipated by the drag.
    pub fn dissipated_power(&self, v: f64) -> f64 {
        -self.f[0] * v
    }
}

/// k = s/((1−s)z): maps [0, 1) onto [0, ∞) with e^{−2kz} flat to all
/// orders at s = 1. Returns (k, dk/ds).
pub(crate) fn rational_k(s: f64, z: f64) -> (f64, f64) {
    let d = 1.0 - s;
    (s / (d * z), 1.0 / (d * d * z))
}
