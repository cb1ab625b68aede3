//! Surface response of the half-space and the atom's parameters.

use crate::error::{QfError, Result};
use std::f64::consts::PI;

/// Single-pole surface response: plasma frequency, surface-plasmon
/// resonance and linewidth. ω_S is independent of ω_p (see
/// [`drude_consistency`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    pub omega_p: f64,
    pub omega_s: f64,
    pub gamma_damp: f64,
}

impl MaterialParams {
    pub fn new(omega_p: f64, omega_s: f64, gamma_damp: f64) -> Result<Self> {
        for (name, v) in [("omega_p", omega_p), ("omega_s", omega_s), ("gamma_damp", gamma_damp)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(QfError::Config(format!("material.{name} must be positive, got {v}")));
            }
        }
        Ok(Self { omega_p, omega_s, gamma_damp })
    }

    /// Γ/ω_S < 0.2: the regime where the narrow-resonance closed forms apply.
    pub fn is_narrow(&self) -> bool {
        self.gamma_damp / self.omega_s < 0.2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomParams {
    /// Bohr frequency Ω.
    pub omega0: f64,
    /// Static polarizability α.
    pub alpha0: f64,
    /// Height above the surface.
    pub z: f64,
}

impl AtomParams {
    pub fn new(omega0: f64, alpha0: f64, z: f64) -> Result<Self> {
        for (name, v) in [("omega0", omega0), ("alpha0", alpha0), ("z", z)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(QfError::Config(format!("atom.{name} must be positive, got {v}")));
            }
        }
        Ok(Self { omega0, alpha0, z })
    }

    /// d² = α Ω / 2.
    pub fn dipole_squared(&self) -> f64 {
        0.5 * self.alpha0 * self.omega0
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }
}

/// Im R(ω) = (ω Γ ω_p²/2) / [(ω² − ω_S²)² + ω²Γ²], odd in ω.
pub fn im_reflection(omega: f64, m: &MaterialParams) -> f64 {
    let w2 = omega * omega;
    let d = w2 - m.omega_s * m.omega_s;
    0.5 * omega * m.gamma_damp * m.omega_p * m.omega_p / (d * d + w2 * m.gamma_damp * m.gamma_damp)
}

/// d Im R / dω at ω = 0: Γ ω_p² / (2 ω_S⁴).
pub fn im_reflection_slope0(m: &MaterialParams) -> f64 {
    m.gamma_damp * m.omega_p * m.omega_p / (2.0 * m.omega_s.powi(4))
}

/// Central-difference cross-check of [`im_reflection_slope0`].
pub fn im_reflection_slope0_fd(m: &MaterialParams, h: f64) -> f64 {
    (im_reflection(h, m) - im_reflection(-h, m)) / (2.0 * h)
}

/// |φ_{kω}|² = (1/2π²) (e^{−2kz}/k) Im R(ω).
pub fn coupling_density(kmag: f64, omega: f64, z: f64, m: &MaterialParams) -> Result<f64> {
    if !(kmag > 0.0) {
        return Err(QfError::Domain(format!("wavenumber must be positive, got {kmag}")));
    }
    Ok((-2.0 * kmag * z).exp() / (2.0 * PI * PI * kmag) * im_reflection(omega, m))
}

/// |ω_S − ω_p/√2| / ω_S. Diagnostic only.
pub fn drude_consistency(m: &MaterialParams) -> f64 {
    (m.omega_s - m.omega_p / 2f64.sqrt()).abs() / m.omega_s
}
