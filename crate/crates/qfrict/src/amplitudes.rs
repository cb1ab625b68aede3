//! Perturbative amplitudes for a moving two-level atom: the one-photon
//! amplitude 𝓐 and its launch part 𝓑, the two-photon amplitude 𝓜, the
//! excitation probability left behind by the launch, and the ground-state
//! rate and shift.
//!
//! The atom moves along x, so for a mode κ = (k, ω) the Doppler shift is
//! k·v = k_x v.

use crate::error::{QfError, Result};
use crate::material::{im_reflection, AtomParams, MaterialParams};
use crate::quadrature::{
    integrate_1d, integrate_1d_complex, integrate_exp_damped, integrate_nd, integrate_oscillatory,
    integrate_plasmon_axis, principal_value, sum_results, QuadResult, QuadSpec,
};
use crate::trajectory::{shape_factor, Trajectory, TrajectoryKind};
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Whether Doppler shifts are kept everywhere or dropped where they only
/// contribute at higher order in v.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DopplerMode {
    Full,
    Leading,
}

impl DopplerMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Some(Self::Full),
            "leading" => Some(Self::Leading),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Leading => "leading",
        }
    }
}

/// Field mode κ: in-plane wavevector and frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeIndex {
    pub k: [f64; 2],
    pub omega: f64,
}

impl ModeIndex {
    pub fn new(kx: f64, ky: f64, omega: f64) -> Result<Self> {
        if !(omega >= 0.0) || !kx.is_finite() || !ky.is_finite() {
            return Err(QfError::Domain(format!("mode ({kx}, {ky}, {omega}) needs finite k and ω ≥ 0")));
        }
        Ok(Self { k: [kx, ky], omega })
    }

    pub fn kmag(&self) -> f64 {
        self.k[0].hypot(self.k[1])
    }

    /// k·v for motion along x at speed v.
    pub fn k_dot_v(&self, v: f64) -> f64 {
        self.k[0] * v
    }

    /// ω′ = ω − k·v.
    pub fn doppler(&self, v: f64) -> f64 {
        self.omega - self.k_dot_v(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaunchAmplitude {
    pub b_value: Complex64,
    pub b_abs2: f64,
}

/// The adiabatic switching rate λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationParams {
    pub lambda_adiabatic: f64,
    /// Evaluate at λ·{10, 3, 1} and extrapolate to λ → 0.
    pub extrapolate: bool,
}

impl RegularizationParams {
    pub fn new(lambda_adiabatic: f64, extrapolate: bool, atom: &AtomParams) -> Result<Self> {
        if !(lambda_adiabatic > 0.0 && lambda_adiabatic <= 1e-4 * atom.omega0) {
            return Err(QfError::Config(format!(
                "lambda_adiabatic must lie in (0, 1e-4·Ω], got {lambda_adiabatic}"
            )));
        }
        Ok(Self { lambda_adiabatic, extrapolate })
    }

    /// λ = 1e-6·Ω with extrapolation.
    pub fn production(atom: &AtomParams) -> Self {
        Self { lambda_adiabatic: 1e-6 * atom.omega0, extrapolate: true }
    }

    fn lambdas(&self) -> Vec<f64> {
        if self.extrapolate {
            [10.0, 3.0, 1.0].iter().map(|c| c * self.lambda_adiabatic).collect()
        } else {
            vec![self.lambda_adiabatic]
        }
    }
}

/// Polynomial (Neville) extrapolation of samples y(x) to x = 0; the error
/// estimate is the distance to the sample nearest zero.
fn neville_at_zero(xs: &[f64], ys: &[Complex64]) -> (Complex64, f64) {
    let n = xs.len();
    let mut p = ys.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (p[i + 1] * xi - p[i] * xj) / (xi - xj);
        }
    }
    (p[0], (p[0] - ys[n - 1]).norm())
}

/// 𝓑 = i(k·v) e^{−ik·r(0)} Σ((Ω+ω)τ)/(Ω+ω)².
pub fn amplitude_b(kappa: &ModeIndex, traj: &Trajectory, atom: &AtomParams) -> Result<LaunchAmplitude> {
    let a = atom.omega0 + kappa.omega;
    let q = kappa.k_dot_v(traj.v);
    if traj.kind == TrajectoryKind::ConstantVelocity || q == 0.0 {
        return Ok(LaunchAmplitude { b_value: Complex64::new(0.0, 0.0), b_abs2: 0.0 });
    }
    let sigma = shape_factor(traj, a * traj.tau)?;
    let phase = Complex64::from_polar(1.0, -kappa.k[0] * traj.position(0.0)?);
    let b_value = I * q * phase * sigma / (a * a);
    Ok(LaunchAmplitude { b_value, b_abs2: b_value.norm_sqr() })
}

/// Times outside of which the path is x = const (before) and x = v t + c (after).
fn launch_window(traj: &Trajectory) -> Result<(f64, f64)> {
    let tau = traj.tau;
    Ok(match traj.kind {
        TrajectoryKind::ConstantVelocity => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        TrajectoryKind::SuddenBoost => (0.0, 0.0),
        TrajectoryKind::LinearRamp => (-tau, tau),
        // e^{−40} tails, far below any quadrature tolerance
        TrajectoryKind::SmoothBoost => (-40.0 * tau, 40.0 * tau),
        TrajectoryKind::Custom => {
            let s = traj.custom_accel.as_ref().ok_or_else(|| QfError::Config("custom path without samples".into()))?;
            (s.t0, s.t0 + s.dt * (s.a.len() - 1) as f64)
        }
    })
}

/// Direct evaluation of 𝓐(t) = ∫_{−∞}^t dt₁ e^{i(Ω+ω)t₁} e^{−ik·r(t₁)}.
///
/// Before the launch window the path is at rest and the λ-damped tail is
/// elementary; it is evaluated for several λ and extrapolated. The window
/// itself goes through oscillatory quadrature and the uniform-motion part
/// after it is elementary again.
pub fn amplitude_a_oracle(
    kappa: &ModeIndex,
    traj: &Trajectory,
    atom: &AtomParams,
    t: f64,
    reg: &RegularizationParams,
    spec: &QuadSpec,
) -> Result<QuadResult<Complex64>> {
    let a = atom.omega0 + kappa.omega;
    let kx = kappa.k[0];
    if traj.kind == TrajectoryKind::ConstantVelocity || kx * traj.v == 0.0 {
        // uniform motion from the remote past
        let nu = a - kx * traj.v;
        let lams = reg.lambdas();
        let ys: Vec<Complex64> = lams.iter().map(|&l| (Complex64::new(l, nu) * t).exp() / Complex64::new(l, nu)).collect();
        let (value, err) = if traj.v == 0.0 || kx == 0.0 {
            ((I * a * t).exp() / (I * a), 0.0)
        } else {
            neville_at_zero(&lams, &ys)
        };
        return Ok(QuadResult { value, err_estimate: err, evals: 0, converged: true });
    }
    let (t0, t1) = launch_window(traj)?;
    let x_pre = traj.position(t0)?;
    let tail_end = t.min(t0);
    let lams = reg.lambdas();
    let ys: Vec<Complex64> = lams
        .iter()
        .map(|&l| {
            let z = Complex64::new(l, a);
            (z * tail_end).exp() / z
        })
        .collect();
    let (tail, tail_err) = neville_at_zero(&lams, &ys);
    let mut value = tail * Complex64::from_polar(1.0, -kx * x_pre);
    let mut err = tail_err;
    let mut evals = 0;
    let mut converged = true;
    if t > t0 && t1 > t0 {
        let hi = t.min(t1);
        let envelope = |s: f64| Complex64::from_polar(1.0, -kx * traj.position(s).unwrap_or(0.0));
        let mid = integrate_oscillatory(envelope, a, t0, hi, spec);
        value += mid.value;
        err += mid.err_estimate;
        evals += mid.evals;
        converged &= mid.converged;
    }
    if t > t1 {
        let c = traj.position(t1)? - traj.v * t1;
        let nu = a - kx * traj.v;
        let post = Complex64::from_polar(1.0, -kx * c) * ((I * nu * t).exp() - (I * nu * t1).exp()) / (I * nu);
        value += post;
    }
    let r = QuadResult { value, err_estimate: err, evals, converged };
    r.require("one-photon amplitude")
}

/// Long-time form of 𝓐: the adiabatic term at the final velocity plus the
/// launch constant, e^{i(Ω+ω′)t}/(i(Ω+ω′)) + i(k·v)Σ((Ω+ω)τ)/(Ω+ω)²; before
/// the launch, e^{i(Ω+ω)t}/(i(Ω+ω)).
pub fn amplitude_a_late(kappa: &ModeIndex, traj: &Trajectory, atom: &AtomParams, t: f64) -> Result<Complex64> {
    let a = atom.omega0 + kappa.omega;
    let q = kappa.k_dot_v(traj.v);
    let (t0, t1) = launch_window(traj)?;
    if traj.kind != TrajectoryKind::ConstantVelocity && t <= t0 {
        return Ok((I * a * t).exp() / (I * a));
    }
    if t <= t1 && traj.kind != TrajectoryKind::ConstantVelocity {
        return Err(QfError::Domain(format!("t = {t} lies inside the launch window")));
    }
    let adiabatic = (I * (a - q) * t).exp() / (I * (a - q));
    if traj.kind == TrajectoryKind::ConstantVelocity {
        return Ok(adiabatic);
    }
    Ok(adiabatic + I * q * shape_factor(traj, a * traj.tau)? / (a * a))
}

/// Late-time pieces of 𝓜(κ₁, κ₂; t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPhotonTerms {
    /// −e^{i(ω₁′+ω₂′)t}/[(Ω+ω₁′)(ω₁′+ω₂′)]
    pub adiabatic_term: Complex64,
    /// 𝓑_{κ₁} e^{i(ω₂′−Ω)t}/[i(ω₂′−Ω)]
    pub launch_term: Complex64,
    /// t-independent part, already symmetrized under 1 ↔ 2, to first order in v.
    pub const_term: Complex64,
}

fn two_photon_unsym(k1: &ModeIndex, k2: &ModeIndex, traj: &Trajectory, atom: &AtomParams, t: f64) -> Result<(Complex64, Complex64)> {
    let om = atom.omega0;
    let (w1p, w2p) = (k1.doppler(traj.v), k2.doppler(traj.v));
    let nu_a = w1p + w2p;
    if nu_a == 0.0 {
        return Err(QfError::Domain("ω₁′ + ω₂′ = 0: use the pair rate instead of the amplitude".into()));
    }
    let adiabatic = -(I * nu_a * t).exp() / ((om + w1p) * nu_a);
    let b = amplitude_b(k1, traj, atom)?;
    let launch = if b.b_abs2 == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        let nu_b = w2p - om;
        if nu_b == 0.0 {
            return Err(QfError::Domain("ω₂′ = Ω: use the launch rate instead of the amplitude".into()));
        }
        b.b_value * (I * nu_b * t).exp() / (I * nu_b)
    };
    Ok((adiabatic, launch))
}

/// Constant part of the symmetrized 𝓜 to first order in v:
/// 2Ω/(ω₁+ω₂)² {k₁·v/(Ω²−ω₂²) + k₂·v/(Ω²−ω₁²)} Σ((ω₁+ω₂)τ).
fn const_term_sym(k1: &ModeIndex, k2: &ModeIndex, traj: &Trajectory, atom: &AtomParams) -> Result<Complex64> {
    if traj.kind == TrajectoryKind::ConstantVelocity {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let om = atom.omega0;
    let (w1, w2) = (k1.omega, k2.omega);
    let s = w1 + w2;
    let bracket = k1.k_dot_v(traj.v) / (om * om - w2 * w2) + k2.k_dot_v(traj.v) / (om * om - w1 * w1);
    Ok(shape_factor(traj, s * traj.tau)? * (2.0 * om / (s * s) * bracket))
}

/// Three-term decomposition of 𝓜₁₂ for t past the launch.
pub fn amplitude_m_asymptotic(
    k1: &ModeIndex,
    k2: &ModeIndex,
    traj: &Trajectory,
    atom: &AtomParams,
    t: f64,
) -> Result<TwoPhotonTerms> {
    let (_, t1) = launch_window(traj)?;
    if t <= t1 {
        return Err(QfError::Domain(format!("t = {t} is not past the launch")));
    }
    let (adiabatic_term, launch_term) = two_photon_unsym(k1, k2, traj, atom, t)?;
    Ok(TwoPhotonTerms { adiabatic_term, launch_term, const_term: const_term_sym(k1, k2, traj, atom)? })
}

/// Same decomposition with the adiabatic and launch terms summed over 1 ↔ 2.
pub fn amplitude_m_symmetrized(
    k1: &ModeIndex,
    k2: &ModeIndex,
    traj: &Trajectory,
    atom: &AtomParams,
    t: f64,
) -> Result<TwoPhotonTerms> {
    let a = amplitude_m_asymptotic(k1, k2, traj, atom, t)?;
    let (ad21, la21) = two_photon_unsym(k2, k1, traj, atom, t)?;
    Ok(TwoPhotonTerms {
        adiabatic_term: a.adiabatic_term + ad21,
        launch_term: a.launch_term + la21,
        const_term: a.const_term,
    })
}

/// Weight of δ(ω₁′+ω₂′) in the long-time rate of the symmetrized adiabatic
/// amplitude, divided by 2π: (2Ω+ω₁′+ω₂′)²/[(Ω+ω₁′)²(Ω+ω₂′)²].
pub fn adiabatic_pair_weight(omega1p: f64, omega2p: f64, atom: &AtomParams) -> f64 {
    let om = atom.omega0;
    let n = 2.0 * om + omega1p + omega2p;
    n * n / ((om + omega1p) * (om + omega2p)).powi(2)
}

/// ∫ dν g(ν) |𝓜₊^(A)(t) + (1↔2)|²/t with the mollifier g(ν) = e^{−ν²/2w²},
/// ν = ω₁′ + ω₂′ at fixed ω₁′ and t_a = 0. Since g(0) = 1 this tends to 2π
/// times [`adiabatic_pair_weight`] at ν = 0 for t·w ≫ 1.
pub fn mollified_pair_rate(omega1p: f64, atom: &AtomParams, t: f64, width: f64, spec: &QuadSpec) -> QuadResult {
    let om = atom.omega0;
    let f = |nu: f64| {
        let w2p = nu - omega1p;
        let g = (-0.5 * (nu / width).powi(2)).exp();
        // |e^{iνt} − 1|²/ν² = 4 sin²(νt/2)/ν²
        let fejer = if nu.abs() * t < 1e-6 { t * t } else { (2.0 * (0.5 * nu * t).sin() / nu).powi(2) };
        let c = (2.0 * om + nu) / ((om + omega1p) * (om + w2p));
        g * fejer * c * c / t
    };
    let span = 10.0 * width;
    // resolve the Fejér kernel's central lobe separately
    let lobe = (4.0 * PI / t).min(span);
    let parts = [
        integrate_1d(&f, -span, -lobe, spec),
        integrate_1d(&f, -lobe, lobe, spec),
        integrate_1d(&f, lobe, span, spec),
    ];
    sum_results(&parts)
}

/// Time-domain value of the t-independent part of 𝓜₁₂ + 𝓜₂₁ after the
/// launch: the exact amplitude minus its adiabatic and launch oscillations.
/// Used to validate `const_term`.
pub fn m_constant_oracle(
    k1: &ModeIndex,
    k2: &ModeIndex,
    traj: &Trajectory,
    atom: &AtomParams,
    spec: &QuadSpec,
) -> Result<Complex64> {
    let one = m_const_ordered(k1, k2, traj, atom, spec)?;
    let two = m_const_ordered(k2, k1, traj, atom, spec)?;
    Ok(one + two)
}

fn m_const_ordered(k1: &ModeIndex, k2: &ModeIndex, traj: &Trajectory, atom: &AtomParams, spec: &QuadSpec) -> Result<Complex64> {
    let om = atom.omega0;
    let v = traj.v;
    let (t0, t1) = launch_window(traj)?;
    let a1 = om + k1.omega;
    let q1 = k1.k_dot_v(v);
    let reg = RegularizationParams::production(atom);
    // before the launch: A₁ = e^{ia₁t}/(ia₁), path at rest at x(t0)
    let s = k1.omega + k2.omega;
    let x_pre = traj.position(t0)?;
    let pre = Complex64::from_polar(1.0, -(k1.k[0] + k2.k[0]) * x_pre) * (I * s * t0).exp() / (I * a1 * I * s);
    // launch window, nested quadrature over the exact A₁
    let inner = |t2: f64| -> Complex64 {
        let a = amplitude_a_oracle(k1, traj, atom, t2, &reg, spec).map(|r| r.value).unwrap_or(Complex64::new(f64::NAN, 0.0));
        let x = traj.position(t2).unwrap_or(0.0);
        a * Complex64::from_polar(1.0, (k2.omega - om) * t2 - k2.k[0] * x)
    };
    let mid = if t1 > t0 { integrate_1d_complex(inner, t0, t1, spec).require("launch-window two-photon integral")?.value } else { Complex64::new(0.0, 0.0) };
    // after: A₁ = C₁ + e^{i(a₁−q₁)t}/(i(a₁−q₁)) e^{−ik₁c}, path x = v t + c
    let c = traj.position(t1)? - v * t1;
    let a_t1 = amplitude_a_oracle(k1, traj, atom, t1, &reg, spec)?.value;
    let ph1 = Complex64::from_polar(1.0, -k1.k[0] * c);
    let ph2 = Complex64::from_polar(1.0, -k2.k[0] * c);
    let c1 = a_t1 - ph1 * (I * (a1 - q1) * t1).exp() / (I * (a1 - q1));
    let nu_b = k2.doppler(v) - om;
    let nu_a = k1.doppler(v) + k2.doppler(v);
    // lower-limit pieces of the elementary post-launch integrals
    let post_const = -ph2 * c1 * (I * nu_b * t1).exp() / (I * nu_b) - ph1 * ph2 * (I * nu_a * t1).exp() / (I * (a1 - q1) * I * nu_a);
    Ok(pre + mid + post_const)
}

/// γ_g = (αΩ/π)∫d²k k e^{−2kz} Im R(k·v − Ω) on k·v ≥ Ω.
pub fn gamma_ground(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    ground_resonant_integral(atom, m, v, false, spec)
}

/// Shared by γ_g and the second-order recoil force: the δ(Ω+ω−k·v) shell
/// in polar coordinates, optionally weighted by k_x.
pub(crate) fn ground_resonant_integral(
    atom: &AtomParams,
    m: &MaterialParams,
    v: f64,
    weight_kx: bool,
    spec: &QuadSpec,
) -> Result<QuadResult> {
    let v = v.abs();
    if v == 0.0 {
        return Ok(QuadResult { value: 0.0, err_estimate: 0.0, evals: 0, converged: true });
    }
    let (om, z) = (atom.omega0, atom.z);
    let kmin = om / v;
    let inner_ok = std::cell::Cell::new(true);
    let f = |k: f64| {
        let th_max = (kmin / k).min(1.0).acos();
        if th_max <= 0.0 {
            return 0.0;
        }
        let g = |th: f64| {
            let w = k * v * th.cos() - om;
            let kx = if weight_kx { k * th.cos() } else { 1.0 };
            im_reflection(w, m) * kx
        };
        let r = integrate_1d(g, 0.0, th_max, spec);
        if !r.converged {
            inner_ok.set(false);
        }
        // k dk (polar) × k (coupling), ×2 for ±θ; e^{−2kz} relative to k_min
        2.0 * k * k * r.value * (-2.0 * z * (k - kmin)).exp()
    };
    let mut r = integrate_exp_damped(f, kmin, 2.0 * z, spec);
    r = r.scale((-2.0 * z * kmin).exp() * atom.alpha0 * om / PI);
    r.converged &= inner_ok.get();
    r.require("ground-state resonance shell")
}

/// δE_g = −(αΩ/2π²) P∫d³κ k e^{−2kz} Im R(ω)/(Ω+ω−k·v). Negative v is
/// accepted and mirrors the path.
pub fn lamb_shift_ground(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    let (om, z) = (atom.omega0, atom.z);
    let pref = -atom.alpha0 * om / (2.0 * PI * PI);
    let freq = |c: f64| -> Result<QuadResult> {
        // ∫₀^∞ Im R(ω)/(ω − c) dω with c = k·v − Ω
        if c > 0.0 {
            principal_value(|w| im_reflection(w, m), c, 0.0, f64::INFINITY, spec)
        } else {
            Ok(integrate_plasmon_axis(|w| im_reflection(w, m) / (w - c), m.omega_s, m.gamma_damp, &[], spec))
        }
    };
    if v == 0.0 {
        // ∫d²k k e^{−2kz} = 2π·2/(8z³)
        let w = freq(-om)?.require("ground-state shift frequency integral")?;
        return Ok(w.scale(pref * PI / (2.0 * z.powi(3))));
    }
    let bad = std::cell::Cell::new(false);
    let f_k = |k: f64| {
        let g = |th: f64| match freq(k * v * th.cos() - om) {
            Ok(r) => {
                if !r.converged {
                    bad.set(true);
                }
                r.value
            }
            Err(_) => {
                bad.set(true);
                0.0
            }
        };
        let r = integrate_1d(g, 0.0, PI, spec);
        if !r.converged {
            bad.set(true);
        }
        2.0 * k * k * r.value * (-2.0 * k * z).exp()
    };
    let mut r = integrate_exp_damped(f_k, 0.0, 2.0 * z, spec).scale(pref);
    r.converged &= !bad.get();
    r.require("ground-state shift")
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitationProbability {
    pub value: f64,
    pub err_estimate: f64,
    /// p_e > 0.1: first-order perturbation theory is strained.
    pub strained: bool,
}

/// ∫₀^∞ dω Im R(ω)|Σ((Ω+ω)τ)|²/(Ω+ω)⁴.
pub fn excitation_frequency_integral(atom: &AtomParams, m: &MaterialParams, traj: &Trajectory, spec: &QuadSpec) -> Result<QuadResult> {
    let om = atom.omega0;
    let failed = std::cell::Cell::new(false);
    let f = |w: f64| {
        let a = om + w;
        let s = shape_factor(traj, a * traj.tau).map(|s| s.norm_sqr()).unwrap_or_else(|_| {
            failed.set(true);
            0.0
        });
        im_reflection(w, m) * s / a.powi(4)
    };
    let r = integrate_plasmon_axis(f, m.omega_s, m.gamma_damp, &[], spec);
    if failed.get() {
        return Err(QfError::Numeric { name: "shape factor inside p_e".into(), residual: f64::NAN });
    }
    r.require("excitation frequency integral")
}

/// p_e = (αΩ/2π²)(3πv²/4z⁵)∫dω Im R|Σ|²/(Ω+ω)⁴, with the k-integral done exactly.
pub fn excitation_probability(atom: &AtomParams, m: &MaterialParams, traj: &Trajectory, spec: &QuadSpec) -> Result<ExcitationProbability> {
    let v = traj.v;
    if v == 0.0 || traj.kind == TrajectoryKind::ConstantVelocity {
        return Ok(ExcitationProbability { value: 0.0, err_estimate: 0.0, strained: false });
    }
    let kint = 3.0 * PI * v * v / (4.0 * atom.z.powi(5));
    let w = excitation_frequency_integral(atom, m, traj, spec)?;
    let c = atom.alpha0 * atom.omega0 / (2.0 * PI * PI) * kint;
    let value = c * w.value;
    Ok(ExcitationProbability { value, err_estimate: c * w.err_estimate, strained: value > 0.1 })
}

/// p_e as a genuine 3-D quadrature over κ of Σ_η d²|η·k̃|²|φ_κ|²|𝓑_κ|².
/// The k-axis is mapped with e^{−2kz} = u and the ω-axis with a Cauchy map
/// centred on the plasmon peak.
pub fn excitation_probability_cubature(atom: &AtomParams, m: &MaterialParams, traj: &Trajectory, spec: &QuadSpec) -> Result<QuadResult> {
    let z = atom.z;
    let (c, h) = (m.omega_s, 0.5 * m.gamma_damp);
    let s_lo = (-c / h).atan();
    let s_hi = 0.5 * PI;
    let d2 = atom.dipole_squared();
    let f = |x: &[f64]| {
        let (u, th, s) = (x[0], x[1], x[2]);
        if u <= 0.0 || u >= 1.0 || s >= s_hi {
            return 0.0;
        }
        let k = -u.ln() / (2.0 * z);
        let w = (c + h * s.tan()).max(0.0);
        let jac_w = h / s.cos().powi(2);
        let mode = ModeIndex { k: [k * th.cos(), k * th.sin()], omega: w };
        let b2 = match amplitude_b(&mode, traj, atom) {
            Ok(b) => b.b_abs2,
            Err(_) => f64::NAN,
        };
        // 2k² d² × Im R/(2π² k) × k dk dθ, with e^{−2kz}dk = du/(2z)
        2.0 * k * k * d2 * im_reflection(w, m) / (2.0 * PI * PI * k) * b2 * k / (2.0 * z) * jac_w
    };
    let r = integrate_nd(f, &[0.0, 0.0, s_lo], &[1.0, 2.0 * PI, s_hi], spec);
    if !r.value.is_finite() {
        return Err(QfError::Numeric { name: "p_e cubature".into(), residual: f64::NAN });
    }
    r.require("p_e cubature")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom() -> AtomParams {
        AtomParams::new(1.0, 1.0, 1.0).unwrap()
    }

    fn drude(gamma: f64) -> MaterialParams {
        MaterialParams::new(2f64.sqrt(), 1.0, gamma).unwrap()
    }

    #[test]
    fn doppler_shift() {
        let k = ModeIndex::new(0.5, -0.2, 1.3).unwrap();
        assert_eq!(k.doppler(0.1), 1.3 - 0.05);
        assert!(ModeIndex::new(0.1, 0.0, -1.0).is_err());
    }

    #[test]
    fn launch_amplitude_closed_forms() {
        let at = atom();
        let k = ModeIndex::new(0.8, 0.3, 0.4).unwrap();
        let a = 1.4f64;
        let q = 0.8 * 0.02;
        assert_eq!(amplitude_b(&k, &Trajectory::constant(0.02), &at).unwrap().b_abs2, 0.0);
        let s = amplitude_b(&k, &Trajectory::sudden(0.02), &at).unwrap();
        assert!((s.b_abs2 - q * q / a.powi(4)).abs() < 1e-15 * s.b_abs2);
        assert!((s.b_abs2 - s.b_value.norm_sqr()).abs() == 0.0);
        let tau = 0.7;
        let sm = amplitude_b(&k, &Trajectory::smooth(0.02, tau), &at).unwrap();
        let x = PI * a * tau;
        let expect = q * q / a.powi(4) * (x / x.sinh()).powi(2);
        assert!((sm.b_abs2 / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn launch_amplitude_quadratic_in_speed() {
        let at = atom();
        let k = ModeIndex::new(0.8, 0.3, 0.4).unwrap();
        for tr in [Trajectory::sudden(0.01), Trajectory::ramp(0.01, 2.0), Trajectory::smooth(0.01, 0.3)] {
            let b1 = amplitude_b(&k, &tr, &at).unwrap().b_abs2;
            let b2 = amplitude_b(&k, &tr.with_speed(0.02), &at).unwrap().b_abs2;
            assert!((b2 / b1 - 4.0).abs() < 1e-6, "{:?}", tr.kind);
        }
    }

    #[test]
    fn regularization_bounds() {
        let at = atom();
        assert!(RegularizationParams::new(1e-3, true, &at).is_err());
        assert!(RegularizationParams::new(1e-6, true, &at).is_ok());
        assert!(RegularizationParams::production(&at).lambda_adiabatic <= 1e-4);
    }

    #[test]
    fn oracle_before_launch_and_at_rest() {
        let at = atom();
        let reg = RegularizationParams::production(&at);
        let spec = QuadSpec::default().with_rel_tol(1e-10);
        let k = ModeIndex::new(1.0, 0.0, 0.5).unwrap();
        let a = 1.5;
        for tr in [Trajectory::ramp(0.05, 1.0), Trajectory::sudden(0.05), Trajectory::smooth(0.05, 0.2)] {
            let t = -45.0;
            let r = amplitude_a_oracle(&k, &tr, &at, t, &reg, &spec).unwrap();
            let expect = (I * a * t).exp() / (I * a);
            assert!((r.value - expect).norm() < 1e-9, "{:?}", tr.kind);
        }
        let rest = Trajectory::ramp(0.0, 1.0);
        let r = amplitude_a_oracle(&k, &rest, &at, 3.0, &reg, &spec).unwrap();
        assert_eq!(r.value, (I * a * 3.0).exp() / (I * a));
    }

    #[test]
    fn oracle_approaches_late_form() {
        let at = atom();
        let reg = RegularizationParams::production(&at);
        let spec = QuadSpec::default().with_rel_tol(1e-11);
        let tau = 1.0;
        let mut prev = f64::INFINITY;
        for q in [0.2, 0.1, 0.05] {
            let k = ModeIndex::new(1.0, 0.0, 0.5).unwrap();
            let tr = Trajectory::ramp(q, tau);
            let mut worst = 0.0f64;
            for j in 0..16 {
                let t = 5.0 * tau + j as f64;
                let o = amplitude_a_oracle(&k, &tr, &at, t, &reg, &spec).unwrap().value;
                let l = amplitude_a_late(&k, &tr, &at, t).unwrap();
                worst = worst.max((o - l).norm());
            }
            assert!(prev / worst > 3.5, "{prev} {worst}");
            prev = worst;
        }
    }

    #[test]
    fn sudden_oracle_is_exact_late() {
        let at = atom();
        let reg = RegularizationParams::production(&at);
        let k = ModeIndex::new(1.0, 0.0, 0.5).unwrap();
        let tr = Trajectory::sudden(0.1);
        let o = amplitude_a_oracle(&k, &tr, &at, 7.0, &reg, &QuadSpec::default()).unwrap().value;
        let l = amplitude_a_late(&k, &tr, &at, 7.0).unwrap();
        // exact for a sudden boost up to O(q²/a³)
        assert!((o - l).norm() < 0.1 * 0.1 / 1.5f64.powi(3) * 2.0);
    }

    #[test]
    fn m_terms_vanish_without_launch() {
        let at = atom();
        let k1 = ModeIndex::new(0.5, 0.1, 0.3).unwrap();
        let k2 = ModeIndex::new(-0.2, 0.4, 0.7).unwrap();
        let t = amplitude_m_asymptotic(&k1, &k2, &Trajectory::constant(0.05), &at, 10.0).unwrap();
        assert_eq!(t.launch_term, Complex64::new(0.0, 0.0));
        assert_eq!(t.const_term, Complex64::new(0.0, 0.0));
        let w1p = k1.doppler(0.05);
        let w2p = k2.doppler(0.05);
        let expect = -(I * (w1p + w2p) * 10.0).exp() / ((1.0 + w1p) * (w1p + w2p));
        assert!((t.adiabatic_term - expect).norm() < 1e-15);
    }

    #[test]
    fn symmetrized_adiabatic_numerator() {
        let at = atom();
        let k1 = ModeIndex::new(0.5, 0.1, 0.3).unwrap();
        let k2 = ModeIndex::new(-0.2, 0.4, 0.7).unwrap();
        let tr = Trajectory::constant(0.05);
        let s = amplitude_m_symmetrized(&k1, &k2, &tr, &at, 4.0).unwrap();
        let (w1p, w2p) = (k1.doppler(0.05), k2.doppler(0.05));
        let nu = w1p + w2p;
        let expect = -(2.0 + nu) * (I * nu * 4.0).exp() / ((1.0 + w1p) * (1.0 + w2p) * nu);
        assert!((s.adiabatic_term - expect).norm() < 1e-14);
    }

    #[test]
    fn mollified_rate_tends_to_delta_weight() {
        let at = atom();
        let w1p = -0.2;
        let width = 1e-3 * at.omega0;
        let r = mollified_pair_rate(w1p, &at, 1e7, width, &QuadSpec::default().with_rel_tol(1e-9));
        let expect = 2.0 * PI * adiabatic_pair_weight(w1p, -w1p, &at);
        assert!((r.value / expect - 1.0).abs() < 1e-3, "{} {}", r.value, expect);
    }

    #[test]
    fn constant_term_matches_time_domain() {
        let at = atom();
        let spec = QuadSpec::default().with_rel_tol(1e-10);
        let mut prev = f64::INFINITY;
        for v in [0.08, 0.04, 0.02] {
            let tr = Trajectory::ramp(v, 1.0);
            let k1 = ModeIndex::new(1.0, 0.3, 0.3).unwrap();
            let k2 = ModeIndex::new(-0.6, 0.2, 0.5).unwrap();
            let oracle = m_constant_oracle(&k1, &k2, &tr, &at, &spec).unwrap();
            let model = amplitude_m_asymptotic(&k1, &k2, &tr, &at, 5.0).unwrap().const_term;
            let res = (oracle - model).norm();
            assert!(prev / res > 3.5, "{prev} {res}");
            prev = res;
        }
    }

    #[test]
    fn ground_rate_vanishes_at_rest_and_grows() {
        let at = atom();
        let m = drude(0.1);
        let s = QuadSpec::default();
        assert_eq!(gamma_ground(&at, &m, 0.0, &s).unwrap().value, 0.0);
        let g1 = gamma_ground(&at, &m, 0.1, &s).unwrap().value;
        let g2 = gamma_ground(&at, &m, 0.2, &s).unwrap().value;
        assert!(g1 > 0.0 && g2 > g1);
    }

    #[test]
    fn lamb_shift_attractive_and_cubic() {
        let at = atom();
        let m = drude(0.1);
        let s = QuadSpec::default().with_rel_tol(1e-9);
        let e1 = lamb_shift_ground(&at, &m, 0.0, &s).unwrap().value;
        let e2 = lamb_shift_ground(&at.with_z(2.0), &m, 0.0, &s).unwrap().value;
        assert!(e1 < 0.0);
        assert!(((e1 / e2).log2() - 3.0).abs() < 1e-9);
        let ev = lamb_shift_ground(&at, &m, 0.05, &s).unwrap().value;
        assert!((ev / e1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn excitation_probability_suppressed_by_smooth_launch() {
        let at = atom();
        let m = drude(0.1);
        let s = QuadSpec::default().with_rel_tol(1e-9);
        let sudden = excitation_probability(&at, &m, &Trajectory::sudden(0.01), &s).unwrap();
        let smooth = excitation_probability(&at, &m, &Trajectory::smooth(0.01, 50.0), &s).unwrap();
        assert!(sudden.value > 1e3 * smooth.value);
        assert!(!sudden.strained);
        assert_eq!(excitation_probability(&at, &m, &Trajectory::sudden(0.0), &s).unwrap().value, 0.0);
    }
}
