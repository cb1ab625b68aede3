use super::{ForceModel, ForceResult};
use crate::error::{QfError, Result};
use crate::material::{im_reflection, AtomParams, MaterialParams};
use crate::quadrature::{integrate_1d, integrate_exp_damped, integrate_plasmon_axis, QuadResult, QuadSpec};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkovMode {
    FullIntegral,
    SmallV,
    ClosedForm,
}

impl MarkovMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fullintegral" | "full" => Some(Self::FullIntegral),
            "smallv" => Some(Self::SmallV),
            "closedform" | "closed" => Some(Self::ClosedForm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FullIntegral => "full-integral",
            Self::SmallV => "small-v",
            Self::ClosedForm => "closed-form",
        }
    }
}

/// Surface-induced decay rates of the excited dipole: γ_η = q_η γ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkovLinewidths {
    /// γ = αΩ Im R(Ω)/(4z³)
    pub gamma_perp: f64,
    /// (q_xx, q_yy, q_zz)
    pub q_tensor: [f64; 3],
}

impl MarkovLinewidths {
    pub fn new(atom: &AtomParams, m: &MaterialParams) -> Self {
        let gamma_perp = atom.alpha0 * atom.omega0 * im_reflection(atom.omega0, m) / (4.0 * atom.z.powi(3));
        Self { gamma_perp, q_tensor: [0.5, 0.5, 1.0] }
    }

    pub fn rates(&self) -> [f64; 3] {
        self.q_tensor.map(|q| q * self.gamma_perp)
    }

    /// Σ_η |η·k̃|²γ_η with k̃ = (k_x, k_y, ik).
    pub fn weighted_sum(&self, kx: f64, ky: f64) -> f64 {
        let r = self.rates();
        let k2 = kx * kx + ky * ky;
        r[0] * kx * kx + r[1] * ky * ky + r[2] * k2
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WickIntegral {
    pub quadrature: QuadResult,
    /// πω_p²/[4ω_S(Ω+ω_S)³]
    pub first_term: f64,
    /// ω_p²Γ/(4Ωω_S⁴)
    pub second_term: f64,
}

impl WickIntegral {
    pub fn two_term(&self) -> f64 {
        self.first_term + self.second_term
    }
}

/// ∫₀^∞ dω Im R(ω)/(Ω+ω)³ on the real axis, with its narrow-resonance
/// approximation.
pub fn wick_frequency_integral(atom: &AtomParams, m: &MaterialParams, spec: &QuadSpec) -> Result<WickIntegral> {
    let om = atom.omega0;
    let q = integrate_plasmon_axis(|w| im_reflection(w, m) / (om + w).powi(3), m.omega_s, m.gamma_damp, &[], spec)
        .require("frequency integral ∫Im R/(Ω+ω)³")?;
    let wp2 = m.omega_p * m.omega_p;
    Ok(WickIntegral {
        quadrature: q,
        first_term: PI * wp2 / (4.0 * m.omega_s * (om + m.omega_s).powi(3)),
        second_term: wp2 * m.gamma_damp / (4.0 * om * m.omega_s.powi(4)),
    })
}

/// Lateral force with Markovian dipole correlations.
pub fn markov_force(atom: &AtomParams, m: &MaterialParams, v: f64, mode: MarkovMode, spec: &QuadSpec) -> Result<ForceResult> {
    let (om, z, a) = (atom.omega0, atom.z, atom.alpha0);
    let lw = MarkovLinewidths::new(atom, m);
    let done = |fx: f64, err: f64| Ok(ForceResult::along_x(fx, err, ForceModel::MarkovQED));
    match mode {
        MarkovMode::ClosedForm => {
            if (om - m.omega_s).abs() < 3.0 * m.gamma_damp {
                return Err(QfError::Resonance(format!(
                    "|Ω − ω_S| = {} is within 3Γ = {}; the closed form needs an off-resonant atom",
                    (om - m.omega_s).abs(),
                    3.0 * m.gamma_damp
                )));
            }
            let d = om * om - m.omega_s * m.omega_s;
            let fx = -v * 9.0 * a * a * om.powi(3) / (512.0 * z.powi(8)) * m.omega_p.powi(4) * m.gamma_damp
                / (m.omega_s * (om + m.omega_s).powi(3) * d * d);
            done(fx, 0.0)
        }
        MarkovMode::SmallV => {
            if v == 0.0 {
                return done(0.0, 0.0);
            }
            // Σ_η|η·k̃|²γ_η = (3/2)γk², angular average of k_x² is π k²
            let wick = wick_frequency_integral(atom, m, spec)?.quadrature;
            let radial = integrate_exp_damped(|k| k.powi(4) * (-2.0 * k * z).exp(), 0.0, 2.0 * z, spec).require("radial moment")?;
            let c = -(a * om / (2.0 * PI * PI)) * 1.5 * lw.gamma_perp * v * PI;
            let fx = c * radial.value * wick.value;
            let err = (c * radial.value * wick.err_estimate).abs() + (c * wick.value * radial.err_estimate).abs();
            done(fx, err)
        }
        MarkovMode::FullIntegral => {
            if v == 0.0 {
                return done(0.0, 0.0);
            }
            let rates = lw.rates();
            let bad = std::cell::Cell::new(false);
            let f_k = |k: f64| {
                let f_th = |th: f64| {
                    let (c, s) = (th.cos(), th.sin());
                    let b = k * c * v;
                    let w8 = [k * k * c * c, k * k * s * s, k * k];
                    // Lorentzian(a − b) − Lorentzian(a + b), without cancellation
                    let f_w = |w: f64| {
                        let a = om + w;
                        let mut sum = 0.0;
                        for (wt, g) in w8.iter().zip(rates) {
                            let h2 = 0.25 * g * g;
                            sum += wt * g * 4.0 * a * b / (((a - b).powi(2) + h2) * ((a + b).powi(2) + h2));
                        }
                        im_reflection(w, m) * sum
                    };
                    let r = integrate_plasmon_axis(f_w, m.omega_s, m.gamma_damp, &[b - om], spec);
                    bad.set(bad.get() || !r.converged);
                    c * r.value
                };
                let r = integrate_1d(f_th, 0.0, 0.5 * PI, spec);
                bad.set(bad.get() || !r.converged);
                k * (-2.0 * k * z).exp() * r.value
            };
            let mut r = integrate_exp_damped(f_k, 0.0, 2.0 * z, spec);
            r.converged &= !bad.get();
            let r = r.scale(-2.0 * a * om / (4.0 * PI * PI)).require("Markov force")?;
            done(r.value, r.err_estimate)
        }
    }
}
