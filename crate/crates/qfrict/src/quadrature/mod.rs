//! Integration engines: adaptive Gauss–Kronrod in 1-D, Genz–Malik cubature
//! up to 5-D, principal values and Filon-type oscillatory integrals.
//!
//! Delta functions never reach this module; callers eliminate them first.

mod cubature;
mod gauss_kronrod;
mod gauss_legendre;
mod oscillatory;
mod principal;

pub use cubature::integrate_nd;
pub use gauss_kronrod::{integrate_1d, integrate_1d_complex, integrate_exp_damped};
pub use gauss_legendre::gauss_legendre;
pub use oscillatory::{filon_samples, integrate_oscillatory, integrate_oscillatory_whole_line};
pub use principal::{principal_value, principal_value_excision};

use crate::error::{QfError, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Adaptive1D,
    TensorAdaptive,
    Oscillatory,
    PrincipalValue,
    SemiInfiniteExp,
}

/// Tolerances and budget for one integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub strategy: Strategy,
}

impl QuadSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_evals: usize, strategy: Strategy) -> Result<Self> {
        if !(rel_tol > 1e-14 && rel_tol < 1e-1) {
            return Err(QfError::Config(format!("rel_tol {rel_tol} outside (1e-14, 1e-1)")));
        }
        if max_evals < 1000 {
            return Err(QfError::Config(format!("max_evals {max_evals} below 1000")));
        }
        if !(abs_tol >= 0.0) {
            return Err(QfError::Config(format!("abs_tol {abs_tol} must be non-negative")));
        }
        Ok(Self { rel_tol, abs_tol, max_evals, strategy })
    }

    /// Default spec for an integral of dimension `n`.
    pub fn for_dim(n: usize) -> Self {
        let max_evals = if n >= 4 { 50_000_000 } else { 1_000_000 };
        let strategy = if n >= 2 { Strategy::TensorAdaptive } else { Strategy::Adaptive1D };
        Self { rel_tol: 1e-6, abs_tol: 0.0, max_evals, strategy }
    }

    /// Same budget, different relative tolerance. Not validated, so that
    /// deliberately loose tolerances can still be exercised.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self::for_dim(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T = f64> {
    pub value: T,
    pub err_estimate: f64,
    pub evals: usize,
    pub converged: bool,
}

impl<T: QuadValue> QuadResult<T> {
    /// Converts a non-converged result into an error naming the integral.
    pub fn require(self, name: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(QfError::Numeric { name: name.to_string(), residual: self.err_estimate })
        }
    }

    pub fn map<U: QuadValue>(self, f: impl FnOnce(T) -> U, err_scale: f64) -> QuadResult<U> {
        QuadResult {
            value: f(self.value),
            err_estimate: self.err_estimate * err_scale.abs(),
            evals: self.evals,
            converged: self.converged,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        QuadResult {
            value: self.value * c,
            err_estimate: self.err_estimate * c.abs(),
            evals: self.evals,
            converged: self.converged,
        }
    }
}

/// Adds partial results; errors add linearly.
pub fn sum_results<T: QuadValue>(parts: &[QuadResult<T>]) -> QuadResult<T> {
    let mut out = QuadResult { value: T::zero(), err_estimate: 0.0, evals: 0, converged: true };
    for p in parts {
        out.value = out.value + p.value;
        out.err_estimate += p.err_estimate;
        out.evals += p.evals;
        out.converged &= p.converged;
    }
    out
}

/// Values an engine can accumulate: real or complex scalars.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(self) -> f64 {
        self.norm()
    }
}

/// Integrates over [0, ∞) a function with the plasmon structure of Im R:
/// breakpoints at ω_S ± 5Γ and 20 ω_S, rational map on the tail.
pub fn integrate_plasmon_axis<F: Fn(f64) -> f64>(
    f: F,
    omega_s: f64,
    gamma: f64,
    extra_breaks: &[f64],
    spec: &QuadSpec,
) -> QuadResult {
    let mut breaks = vec![0.0, omega_s + 5.0 * gamma, 20.0 * omega_s];
    if omega_s - 5.0 * gamma > 0.0 {
        breaks.push(omega_s - 5.0 * gamma);
    }
    breaks.extend(extra_breaks.iter().copied().filter(|&b| b > 0.0 && b.is_finite()));
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    let mut parts = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        parts.push(integrate_1d(&f, w[0], w[1], spec));
    }
    parts.push(integrate_1d(&f, *breaks.last().unwrap(), f64::INFINITY, spec));
    let mut total = sum_results(&parts);
    total.converged = parts.iter().all(|p| p.converged)
        && total.err_estimate <= spec.target(total.value).max(1e-300) * parts.len() as f64;
    total
}
