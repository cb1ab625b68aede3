//! The invariant and closed-form cross-check suite behind `oracle-check`.
//!
//! Pass thresholds are fixed; only the quadrature effort follows the
//! configuration, so a loose quad.rel_tol shows up as failed agreement.

use crate::config::RunConfig;
use crate::report::fmt_f64;
use qfrict::amplitudes::{
    amplitude_a_late, amplitude_a_oracle, excitation_frequency_integral, excitation_probability_cubature, ModeIndex, RegularizationParams,
};
use qfrict::friction::*;
use qfrict::material::{im_reflection, im_reflection_slope0, im_reflection_slope0_fd};
use qfrict::trajectory::{shape_factor, shape_factor_numeric};
use qfrict::{DopplerMode, Trajectory, TrajectoryKind};
use rayon::prelude::*;
use std::f64::consts::PI;


#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

impl CheckStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Skip => "SKIP",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub status: CheckStatus,
    /// The measured deviation (or ratio, see `detail`).
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckRow {
    pub fn record(&self) -> Vec<String> {
        vec![self.name.clone(), self.status.name().into(), fmt_f64(self.measured), fmt_f64(self.tolerance), self.detail.clone()]
    }

    pub fn header() -> Vec<String> {
        ["check", "status", "measured", "tolerance", "detail"].map(String::from).to_vec()
    }
}

type Check = fn(&RunConfig) -> Outcome;

enum Outcome {
    /// deviation, tolerance, detail; passes when deviation ≤ tolerance
    Below(f64, f64, String),
    /// value, lower bound, detail; passes when value ≥ bound
    Above(f64, f64, String),
    Skip(String),
}

const CHECKS: &[(&str, Check)] = &[
    ("reflection-odd-and-dissipative", reflection_parity),
    ("ohmic-slope", ohmic_slope),
    ("shape-factor-ramp", |c| shape_check(c, TrajectoryKind::LinearRamp)),
    ("shape-factor-smooth", |c| shape_check(c, TrajectoryKind::SmoothBoost)),
    ("linewidth-identity", linewidth_identity),
    ("pa-quartic-in-v", pa_quartic),
    ("pa-quadrature-vs-closed-form", pa_quadrature),
    ("k-constant-pa", k_constant_a),
    ("k-constant-pb", k_constant_b),
    ("launch-power-cancellation", cancellation),
    ("markov-closed-vs-small-v", markov_closed),
    ("drag-opposes-motion", drag_sign),
    ("fd-relation-at-rest", fd_relation),
    ("excitation-k-integral", excitation_k),
    ("ramp-oracle-beta-squared", ramp_oracle),
];

pub fn run_checks(cfg: &RunConfig, jobs: usize) -> Vec<CheckRow> {
    let run = || {
        CHECKS
            .par_iter()
            .map(|(name, f)| {
                let (status, measured, tolerance, detail) = match f(cfg) {
                    Outcome::Below(d, t, s) => (if d <= t { CheckStatus::Pass } else { CheckStatus::Fail }, d, t, s),
                    Outcome::Above(d, t, s) => (if d >= t { CheckStatus::Pass } else { CheckStatus::Fail }, d, t, s),
                    Outcome::Skip(s) => (CheckStatus::Skip, f64::NAN, f64::NAN, s),
                };
                CheckRow { name: name.to_string(), status, measured, tolerance, detail }
            })
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p.install(run),
        Err(_) => run(),
    }
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    Outcome::Below(f64::INFINITY, 0.0, format!("error: {e}"))
}

macro_rules! tryo {
    ($e:expr) => {
        match $e {
            Ok(x) => x,
            Err(e) => return failed(e),
        }
    };
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Narrow, off-resonant, slow: where the closed forms are meant to hold.
fn scaling_regime(c: &RunConfig) -> Option<String> {
    let [vz, _, g, w] = c.groups();
    if vz > 0.05 || w > 0.3 || g > 0.1 {
        Some(format!("outside the scaling regime (v/Ωz = {vz}, Ω/ω_S = {w}, Γ/ω_S = {g})"))
    } else {
        None
    }
}

fn reflection_parity(c: &RunConfig) -> Outcome {
    let m = &c.material;
    let mut worst = 0.0f64;
    for j in 1..=200 {
        let w = 0.02 * j as f64 * m.omega_s;
        let a = im_reflection(w, m);
        if !(a > 0.0) {
            return Outcome::Below(f64::INFINITY, 0.0, format!("Im R({w}) = {a} is not positive"));
        }
        worst = worst.max((a + im_reflection(-w, m)).abs() / a);
    }
    Outcome::Below(worst, 0.0, "max |Im R(ω) + Im R(−ω)|/Im R(ω) on (0, 4ω_S]".into())
}

fn ohmic_slope(c: &RunConfig) -> Outcome {
    let m = &c.material;
    let d = rel(im_reflection_slope0_fd(m, 1e-5 * m.omega_s), im_reflection_slope0(m));
    Outcome::Below(d, 1e-6, "finite-difference vs analytic Im R′(0)".into())
}

fn shape_check(c: &RunConfig, kind: TrajectoryKind) -> Outcome {
    let tr = tryo!(Trajectory::new(kind, 1.0, 1.0));
    let spec = c.spec_for_dim(1);
    let mut worst = 0.0f64;
    for x in [0.1, 1.0, 3.0, 10.0, 30.0] {
        let exact = tryo!(shape_factor(&tr, x));
        let num = tryo!(shape_factor_numeric(&tr, x, &spec));
        worst = worst.max((num.value - exact).norm());
    }
    Outcome::Below(worst, 1e-6, "max |Σ_numeric − Σ_closed| over x ∈ {0.1, 1, 3, 10, 30}".into())
}

fn linewidth_identity(c: &RunConfig) -> Outcome {
    let lw = MarkovLinewidths::new(&c.atom, &c.material);
    let mut worst = 0.0f64;
    for (kx, ky) in [(1.0, 0.0), (0.3, -2.0), (-1.7, 0.4)] {
        let want = 1.5 * lw.gamma_perp * (kx * kx + ky * ky);
        worst = worst.max(rel(lw.weighted_sum(kx, ky), want));
    }
    Outcome::Below(worst, 1e-12, "Σ_η |η·k̃|²γ_η vs (3/2)γk²".into())
}

fn check_speed(c: &RunConfig) -> f64 {
    if c.trajectory.v > 0.0 {
        c.trajectory.v
    } else {
        0.01 * c.atom.omega0 * c.atom.z
    }
}

fn pa_quartic(c: &RunConfig) -> Outcome {
    let v = check_speed(c);
    let r = power_pa_asymptotic(&c.atom, &c.material, 2.0 * v) / power_pa_asymptotic(&c.atom, &c.material, v);
    Outcome::Below((r / 16.0 - 1.0).abs(), 1e-12, "P_A(2v)/P_A(v) vs 16".into())
}

fn pa_quadrature(c: &RunConfig) -> Outcome {
    if let Some(s) = scaling_regime(c) {
        return Outcome::Skip(s);
    }
    let v = check_speed(c);
    let q = tryo!(power_pa_quadrature(&c.atom, &c.material, v, &c.spec_for_dim(5)));
    let d = rel(q.value, power_pa_asymptotic(&c.atom, &c.material, v));
    Outcome::Below(d, 0.02, "full P_A quadrature vs closed form".into())
}

fn k_constant_a(c: &RunConfig) -> Outcome {
    let z = c.atom.z;
    let q = tryo!(k_constant_pa(z, &c.spec_for_dim(4)));
    Outcome::Below(rel(q.value, 27.0 * PI * PI / (16.0 * z.powi(10))), 5e-3, "4-D constant vs 27π²/(16z¹⁰)".into())
}

fn k_constant_b(c: &RunConfig) -> Outcome {
    let (z, v) = (c.atom.z, check_speed(c));
    let q = tryo!(k_constant_pb(z, v, &c.spec_for_dim(4)));
    Outcome::Below(rel(q.value, 9.0 * PI * PI * v * v / (16.0 * z.powi(8))), 5e-3, "4-D constant vs 9π²v²/(16z⁸)".into())
}

fn launched(c: &RunConfig) -> Trajectory {
    let t = &c.trajectory;
    if t.kind == TrajectoryKind::ConstantVelocity || t.v == 0.0 {
        Trajectory::sudden(check_speed(c))
    } else {
        t.clone()
    }
}

fn cancellation(c: &RunConfig) -> Outcome {
    let tr = launched(c);
    let (b, one) = tryo!(launch_powers(&c.atom, &c.material, &tr, DopplerMode::Leading, &LaunchGrid::default()));
    if !(b.value > 0.0 && one.value < 0.0) {
        return Outcome::Below(f64::INFINITY, 1e-3, format!("wrong signs: P_B = {}, P₁ = {}", b.value, one.value));
    }
    Outcome::Below((b.value + one.value).abs() / b.value, 1e-3, format!("|P₁ + P_B|/P_B for a {} launch", tr.kind.name()))
}

fn markov_closed(c: &RunConfig) -> Outcome {
    let (a, m) = (&c.atom, &c.material);
    if (a.omega0 - m.omega_s).abs() < 3.0 * m.gamma_damp || !m.is_narrow() {
        return Outcome::Skip("resonant or broad material".into());
    }
    let s = c.spec_for_dim(1);
    // the closed form keeps only the resonant Wick term
    let w = tryo!(wick_frequency_integral(a, m, &s));
    if w.second_term > 0.05 * w.first_term {
        return Outcome::Skip(format!("off-resonant Wick term is {:.3} of the resonant one", w.second_term / w.first_term));
    }
    let v = check_speed(c);
    let closed = tryo!(markov_force(a, m, v, MarkovMode::ClosedForm, &s)).f[0];
    let small = tryo!(markov_force(a, m, v, MarkovMode::SmallV, &s)).f[0];
    Outcome::Below(rel(closed, small), 0.05, "closed-form vs small-v Markov force".into())
}

fn drag_sign(c: &RunConfig) -> Outcome {
    let v = check_speed(c);
    let s = c.spec_for_dim(1);
    let markov = tryo!(markov_force(&c.atom, &c.material, v, MarkovMode::SmallV, &s)).f[0];
    let ns = tryo!(noneq_spectral(&c.atom, &c.material, v, &s));
    let noneq = tryo!(noneq_force(&ns, NonEqMode::SmallV)).f[0];
    let worst = (markov * v).max(noneq * v);
    Outcome::Below(worst, 0.0, format!("max F·v over Markov ({markov:e}) and non-equilibrium ({noneq:e})"))
}

fn fd_relation(c: &RunConfig) -> Outcome {
    let ns = tryo!(noneq_spectral(&c.atom, &c.material, 0.0, &c.spec_for_dim(1)));
    let mut worst = 0.0f64;
    for j in 0..=12 {
        let w = c.atom.omega0 * (0.1 + 2.9 * j as f64 / 12.0);
        let s = tryo!(dipole_spectrum(&ns, w));
        let t = tryo!(ns.alpha_dressed_im_tensor(w));
        for i in 0..3 {
            worst = worst.max(rel(s[i][i].re, 2.0 * t[i][i].re));
            for k in 0..3 {
                worst = worst.max((s[i][k] - 2.0 * t[i][k]).norm() / s[2][2].re);
            }
        }
    }
    Outcome::Below(worst, 1e-6, "S_ij(ω; 0) vs 2 Im α̃_ij(ω) over ω ∈ [0.1, 3]Ω".into())
}

fn excitation_k(c: &RunConfig) -> Outcome {
    let tr = launched(c);
    let (a, m) = (&c.atom, &c.material);
    let cub = tryo!(excitation_probability_cubature(a, m, &tr, &c.spec_for_dim(3)));
    let w = tryo!(excitation_frequency_integral(a, m, &tr, &c.spec_for_dim(1)));
    let got = cub.value / w.value / (a.alpha0 * a.omega0 / (2.0 * PI * PI));
    let want = 3.0 * PI * tr.v * tr.v / (4.0 * a.z.powi(5));
    Outcome::Below(rel(got, want), 5e-3, "3-D p_e cubature over ω-only integral vs 3πv²/(4z⁵)".into())
}

/// Worst |𝓐_oracle − 𝓐_late| over t ∈ [5τ, 20τ] for a ramp with β = k·vτ.
pub fn ramp_residual(c: &RunConfig, beta: f64) -> qfrict::Result<f64> {
    let tau = 1.0 / c.atom.omega0;
    let k = ModeIndex::new(1.0 / (c.atom.omega0 * tau), 0.0, 0.5 * c.atom.omega0)?;
    let tr = Trajectory::ramp(beta / (k.k[0] * tau), tau);
    let reg = RegularizationParams::production(&c.atom);
    let spec = c.spec_for_dim(1);
    let mut worst = 0.0f64;
    for j in 0..=30 {
        let t = tau * (5.0 + 0.5 * j as f64);
        let o = amplitude_a_oracle(&k, &tr, &c.atom, t, &reg, &spec)?.value;
        let l = amplitude_a_late(&k, &tr, &c.atom, t)?;
        worst = worst.max((o - l).norm());
    }
    Ok(worst)
}

fn ramp_oracle(c: &RunConfig) -> Outcome {
    let mut res = Vec::new();
    for b in [0.2, 0.1, 0.05, 0.025] {
        res.push(tryo!(ramp_residual(c, b)));
    }
    let worst = res.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
    let list: Vec<String> = res.iter().map(|r| format!("{r:.3e}")).collect();
    Outcome::Above(worst, 3.5, format!("smallest residual reduction per halving of β (residuals {})", list.join(" ")))
}
