use super::rational_k;
use crate::amplitudes::{amplitude_b, DopplerMode, ModeIndex};
use crate::error::{QfError, Result};
use crate::material::{im_reflection, im_reflection_slope0, AtomParams, MaterialParams};
use crate::quadrature::{gauss_legendre, integrate_1d, integrate_nd, QuadResult, QuadSpec};
use crate::trajectory::{Trajectory, TrajectoryKind};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PowerMode {
    Asymptotic,
    Quadrature,
}

impl PowerMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asymptotic" => Some(Self::Asymptotic),
            "quadrature" => Some(Self::Quadrature),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Asymptotic => "asymptotic",
            Self::Quadrature => "quadrature",
        }
    }
}

/// Energy bookkeeping of the launched atom. `err` is ordered (p_a, p_b, p_one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerBreakdown {
    pub p_a: f64,
    pub p_b: f64,
    pub p_one: f64,
    pub total: f64,
    pub err: [f64; 3],
    pub mode: PowerMode,
}

/// P_A = (9/512π) v⁴α²ω_p⁴Γ²/(ω_S⁸z¹⁰).
pub fn power_pa_asymptotic(atom: &AtomParams, m: &MaterialParams, v: f64) -> f64 {
    9.0 / (512.0 * PI) * v.powi(4) * atom.alpha0.powi(2) * m.omega_p.powi(4) * m.gamma_damp.powi(2)
        / (m.omega_s.powi(8) * atom.z.powi(10))
}

/// (k₁k₂ − k₁·k₂)²/(k₁k₂) times the polar measure k₁k₂ and e^{−2(k₁+k₂)z}.
#[inline]
fn pair_geometry(k1: f64, k2: f64, cos_d: f64, z: f64) -> f64 {
    let p = k1 * k2 * (1.0 - cos_d);
    p * p * (-2.0 * (k1 + k2) * z).exp()
}

/// ∫_{W≥0} d²k₁d²k₂ e^{−2(k₁+k₂)z}(k₁k₂−k₁·k₂)²/(k₁k₂) W⁴ with
/// W = (k₁+k₂)·x̂. The integrand is even under (k₁,k₂) → −(k₁,k₂), which
/// flips W, so the restricted domain is half the full one; the full domain
/// is integrated. Expected 27π²/(16z¹⁰).
pub fn k_constant_pa(z: f64, spec: &QuadSpec) -> Result<QuadResult> {
    let f = |x: &[f64]| {
        if x[0] >= 1.0 || x[2] >= 1.0 {
            return 0.0;
        }
        let (k1, j1) = rational_k(x[0], z);
        let (k2, j2) = rational_k(x[2], z);
        let w = k1 * x[1].cos() + k2 * x[3].cos();
        pair_geometry(k1, k2, (x[1] - x[3]).cos(), z) * w.powi(4) * j1 * j2
    };
    let r = integrate_nd(f, &[0.0, 0.0, 0.0, 0.0], &[1.0, 2.0 * PI, 1.0, 2.0 * PI], spec);
    r.scale(0.5).require("P_A k-integral")
}

/// The same integral with the W ≥ 0 restriction imposed by an indicator
/// instead of the reflection symmetry.
pub fn k_constant_pa_restricted(z: f64, spec: &QuadSpec) -> Result<QuadResult> {
    let f = |x: &[f64]| {
        if x[0] >= 1.0 || x[2] >= 1.0 {
            return 0.0;
        }
        let (k1, j1) = rational_k(x[0], z);
        let (k2, j2) = rational_k(x[2], z);
        let w = k1 * x[1].cos() + k2 * x[3].cos();
        if w <= 0.0 {
            return 0.0;
        }
        pair_geometry(k1, k2, (x[1] - x[3]).cos(), z) * w.powi(4) * j1 * j2
    };
    integrate_nd(f, &[0.0, 0.0, 0.0, 0.0], &[1.0, 2.0 * PI, 1.0, 2.0 * PI], spec).require("restricted P_A k-integral")
}

/// ∫d²k₁d²k₂ e^{−2(k₁+k₂)z}(k₁k₂−k₁·k₂)²/(k₁k₂)(k₁·v)². Expected 9π²v²/(16z⁸).
pub fn k_constant_pb(z: f64, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    let f = |x: &[f64]| {
        if x[0] >= 1.0 || x[2] >= 1.0 {
            return 0.0;
        }
        let (k1, j1) = rational_k(x[0], z);
        let (k2, j2) = rational_k(x[2], z);
        let q = k1 * x[1].cos() * v;
        pair_geometry(k1, k2, (x[1] - x[3]).cos(), z) * q * q * j1 * j2
    };
    if v == 0.0 {
        return Ok(QuadResult { value: 0.0, err_estimate: 0.0, evals: 0, converged: true });
    }
    integrate_nd(f, &[0.0, 0.0, 0.0, 0.0], &[1.0, 2.0 * PI, 1.0, 2.0 * PI], spec).require("P_B k-integral")
}

/// P_A with Im R replaced by its Ohmic slope: α²(Im R′(0))²v⁴/(24π³) times
/// [`k_constant_pa`].
pub fn power_pa_scaling_limit(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    let s0 = im_reflection_slope0(m);
    let k = k_constant_pa(atom.z, spec)?;
    Ok(k.scale(atom.alpha0.powi(2) * s0 * s0 * v.powi(4) / (24.0 * PI.powi(3))))
}

/// The 5-D P_A integrand in (s₁, θ₁, s₂, θ₂, σ), with ω₁ = σW and
/// ω₂ = W − ω₁ from δ(ω₁′+ω₂′), W = (k₁+k₂)·v. `restrict` zeroes W < 0.
fn pa_integrand(x: &[f64], atom: &AtomParams, m: &MaterialParams, v: f64, restrict: bool) -> f64 {
    let (om, z) = (atom.omega0, atom.z);
    if x[0] >= 1.0 || x[2] >= 1.0 {
        return 0.0;
    }
    let (k1, j1) = rational_k(x[0], z);
    let (k2, j2) = rational_k(x[2], z);
    let (c1, c2) = (x[1].cos(), x[3].cos());
    let w = v * (k1 * c1 + k2 * c2);
    if restrict && w <= 0.0 {
        return 0.0;
    }
    let w1 = x[4] * w;
    let w1p = w1 - k1 * c1 * v;
    let d = (om + w1p) * (om - w1p);
    if d == 0.0 {
        return 0.0;
    }
    let spectral = im_reflection(w1, m) * im_reflection(w - w1, m);
    pair_geometry(k1, k2, (x[1] - x[3]).cos(), z) * j1 * j2 * w * w * spectral / (d * d)
}

/// s at k = Ω/(4v) under k = s/((1−s)z).
fn s_cut(atom: &AtomParams, v: f64) -> f64 {
    let kz = atom.omega0 * atom.z / (4.0 * v);
    kz / (1.0 + kz)
}

/// Two-plasmon power of the uniformly moving atom by 5-D cubature.
///
/// The integrand (with ω₁ = σW) is invariant under (k₁, k₂) → −(k₁, k₂),
/// which maps W → −W, so the anomalous-Doppler domain W ≥ 0 is lifted and
/// the result halved; the y-reflection folds θ₁ onto [0, π] and doubles it
/// back. The integrand is then smooth.
///
/// Both wavenumbers are cut at Ω/(4v): beyond that |ω₁′| can reach Ω and
/// the denominators have a double pole, but the weight there is
/// e^{−Ωz/(2v)} relative to the bulk.
pub fn power_pa_quadrature(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    if !(v > 0.0) {
        return Err(QfError::Domain(format!("P_A quadrature needs v > 0, got {v}")));
    }
    let pref = atom.alpha0.powi(2) * atom.omega0.powi(4) / (4.0 * PI.powi(3));
    // the σ-axis is nearly polynomial: Gauss–Kronrod inside, cubature outside
    let inner = spec.with_rel_tol((0.01 * spec.rel_tol).max(1e-13)).with_max_evals(2000);
    let bad = std::cell::Cell::new(false);
    let f = |x: &[f64]| {
        let r = integrate_1d(|s| pa_integrand(&[x[0], x[1], x[2], x[3], s], atom, m, v, false), 0.0, 1.0, &inner);
        bad.set(bad.get() || !r.converged);
        r.value
    };
    let sm = s_cut(atom, v);
    let mut r = integrate_nd(f, &[0.0, 0.0, 0.0, -PI], &[sm, PI, sm, PI], spec);
    r.converged &= !bad.get();
    r.scale(pref).require("P_A cubature")
}

/// [`power_pa_quadrature`] on the restricted domain W ≥ 0 as written,
/// without the reflection symmetry. Slow to converge; an oracle.
pub fn power_pa_quadrature_restricted(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<QuadResult> {
    if !(v > 0.0) {
        return Err(QfError::Domain(format!("P_A quadrature needs v > 0, got {v}")));
    }
    let pref = 2.0 * atom.alpha0.powi(2) * atom.omega0.powi(4) / (4.0 * PI.powi(3));
    let f = |x: &[f64]| pa_integrand(x, atom, m, v, true);
    let sm = s_cut(atom, v);
    let r = integrate_nd(f, &[0.0, 0.0, 0.0, -PI, 0.0], &[sm, PI, sm, PI, 1.0], spec);
    r.scale(pref).require("restricted P_A cubature")
}

/// Fixed tensor grid shared by P_B and P₁: Gauss–Legendre in s for each
/// k = s/((1−s)z), the periodic trapezoid rule in each angle and composite
/// Gauss–Legendre panels along ω.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaunchGrid {
    pub n_k: usize,
    pub n_theta: usize,
    pub panel_order: usize,
}

impl Default for LaunchGrid {
    fn default() -> Self {
        Self { n_k: 32, n_theta: 32, panel_order: 12 }
    }
}

impl LaunchGrid {
    /// The grid used for the error estimate.
    pub fn coarse(&self) -> Self {
        Self { n_k: (self.n_k * 3 / 4).max(4), n_theta: (self.n_theta * 3 / 4).max(4), panel_order: (self.panel_order * 3 / 4).max(3) }
    }
}

struct GridNodes {
    k: Vec<(f64, f64)>,
    theta: Vec<(f64, f64)>,
    omega: Vec<(f64, f64)>,
}

fn gl01(n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
}

impl GridNodes {
    fn new(grid: &LaunchGrid, atom: &AtomParams, m: &MaterialParams, traj: &Trajectory) -> Self {
        let z = atom.z;
        let k = gl01(grid.n_k)
            .into_iter()
            .map(|(s, w)| {
                let (k, j) = rational_k(s, z);
                (k, w * j)
            })
            .collect();
        let nt = grid.n_theta;
        let theta = (0..nt).map(|j| (2.0 * PI * j as f64 / nt as f64, 2.0 * PI / nt as f64)).collect();
        // panels no wider than the plasmon width or the launch time scale
        let (ws, g) = (m.omega_s, m.gamma_damp);
        let mut breaks = vec![0.0, ws + 8.0 * g, 4.0 * ws.max(atom.omega0) + 8.0 * g];
        if ws - 8.0 * g > 0.0 {
            breaks.push(ws - 8.0 * g);
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        let launch_scale = match traj.kind {
            TrajectoryKind::LinearRamp | TrajectoryKind::Custom => 1.0 / traj.tau,
            _ => f64::INFINITY,
        };
        let rule = gl01(grid.panel_order);
        let mut omega = Vec::new();
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            let near_peak = a >= ws - 8.0 * g - 1e-12 && b <= ws + 8.0 * g + 1e-12;
            let width = if near_peak { g } else { 0.25 * ws.min(atom.omega0).max(g) }.min(launch_scale);
            let n = ((b - a) / width).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for i in 0..n {
                for &(x, w) in &rule {
                    omega.push((a + h * (i as f64 + x), h * w));
                }
            }
        }
        // tail ω = b/u
        let b = *breaks.last().unwrap();
        for (u, w) in gl01(2 * grid.panel_order) {
            omega.push((b / u, w * b / (u * u)));
        }
        Self { k, theta, omega }
    }
}

/// P_B and P₁ evaluated on one grid. Each has its own integrand; they
/// share the k-nodes, the ω-nodes and 𝓑.
fn launch_powers_on(
    nodes: &GridNodes,
    atom: &AtomParams,
    m: &MaterialParams,
    traj: &Trajectory,
    doppler: DopplerMode,
) -> Result<(f64, f64)> {
    let (om, z, v) = (atom.omega0, atom.z, traj.v);
    let pref = atom.alpha0.powi(2) * om * om / (8.0 * PI.powi(3));
    // |𝓑|² for unit k_x: the k-dependence is the factor k_x²
    let mut b_unit = Vec::with_capacity(nodes.omega.len());
    for &(w, _) in &nodes.omega {
        b_unit.push(amplitude_b(&ModeIndex::new(1.0, 0.0, w)?, traj, atom)?.b_abs2);
    }
    let (mut j0, mut j1, mut j_one) = (0.0, 0.0, 0.0);
    for (&(w, dw), b) in nodes.omega.iter().zip(&b_unit) {
        let r = im_reflection(w, m) * b * dw;
        j0 += r;
        j1 += w * r;
        j_one += (om + w) * r;
    }

    let mut p_b = 0.0;
    for &(k1, wk1) in &nodes.k {
        for &(th1, wt1) in &nodes.theta {
            let k1x = k1 * th1.cos();
            for &(k2, wk2) in &nodes.k {
                for &(th2, wt2) in &nodes.theta {
                    let g = pair_geometry(k1, k2, (th1 - th2).cos(), z) * wk1 * wt1 * wk2 * wt2 * k1x * k1x;
                    // ω₂ from δ(ω₂′ − Ω) or δ(ω₂ − Ω)
                    let w2 = match doppler {
                        DopplerMode::Leading => om,
                        DopplerMode::Full => om + k2 * th2.cos() * v,
                    };
                    if w2 <= 0.0 {
                        continue;
                    }
                    // (ω₁ + ω₂) Im R(ω₁)|𝓑_{κ₁}|² summed over ω₁
                    p_b += g * im_reflection(w2, m) * (j1 + w2 * j0);
                }
            }
        }
    }
    p_b *= pref;

    // κ carries 𝓑, κ₁ sits on δ(ω₁′ − Ω)
    let mut p_one = 0.0;
    for &(k, wk) in &nodes.k {
        for &(th, wt) in &nodes.theta {
            let kx = k * th.cos();
            let mut inner = 0.0;
            for &(k1, wk1) in &nodes.k {
                for &(th1, wt1) in &nodes.theta {
                    let w1 = match doppler {
                        DopplerMode::Leading => om,
                        DopplerMode::Full => om + k1 * th1.cos() * v,
                    };
                    if w1 <= 0.0 {
                        continue;
                    }
                    inner += wk1 * wt1 * pair_geometry(k1, k, (th - th1).cos(), z) * im_reflection(w1, m);
                }
            }
            p_one += wk * wt * kx * kx * inner;
        }
    }
    p_one *= -pref * j_one;
    Ok((p_b, p_one))
}

/// (P_B, P₁) on `grid`, with the difference to the coarser grid as the
/// error estimate.
pub fn launch_powers(
    atom: &AtomParams,
    m: &MaterialParams,
    traj: &Trajectory,
    doppler: DopplerMode,
    grid: &LaunchGrid,
) -> Result<(QuadResult, QuadResult)> {
    if traj.kind == TrajectoryKind::ConstantVelocity || traj.v == 0.0 {
        let zero = QuadResult { value: 0.0, err_estimate: 0.0, evals: 0, converged: true };
        return Ok((zero, zero));
    }
    let fine = GridNodes::new(grid, atom, m, traj);
    let coarse = GridNodes::new(&grid.coarse(), atom, m, traj);
    let (b, one) = launch_powers_on(&fine, atom, m, traj, doppler)?;
    let (b_c, one_c) = launch_powers_on(&coarse, atom, m, traj, doppler)?;
    let evals = fine.k.len().pow(2) * fine.theta.len().pow(2) + fine.omega.len();
    let mk = |v: f64, c: f64| QuadResult { value: v, err_estimate: (v - c).abs(), evals, converged: v.is_finite() };
    Ok((mk(b, b_c), mk(one, one_c)))
}

pub fn power_pb(atom: &AtomParams, m: &MaterialParams, traj: &Trajectory, doppler: DopplerMode) -> Result<QuadResult> {
    Ok(launch_powers(atom, m, traj, doppler, &LaunchGrid::default())?.0)
}

pub fn power_p1(atom: &AtomParams, m: &MaterialParams, traj: &Trajectory, doppler: DopplerMode) -> Result<QuadResult> {
    Ok(launch_powers(atom, m, traj, doppler, &LaunchGrid::default())?.1)
}

/// Sudden-boost P_B at small v with the two-term frequency integral:
/// (9/128)(αΩv²/z⁵)γ[ω_p²/(ω_S(Ω+ω_S)³) + ω_p²Γ/(πΩω_S⁴)], γ = αΩ Im R(Ω)/(4z³).
/// `first_term_only` drops the Γ-correction.
pub fn power_pb_sudden_asymptotic(atom: &AtomParams, m: &MaterialParams, v: f64, first_term_only: bool) -> f64 {
    let (om, z, a) = (atom.omega0, atom.z, atom.alpha0);
    let gamma = a * om * im_reflection(om, m) / (4.0 * z.powi(3));
    let wp2 = m.omega_p * m.omega_p;
    let mut bracket = wp2 / (m.omega_s * (om + m.omega_s).powi(3));
    if !first_term_only {
        bracket += wp2 * m.gamma_damp / (PI * om * m.omega_s.powi(4));
    }
    9.0 / 128.0 * a * om * v * v / z.powi(5) * gamma * bracket
}

/// All three powers for one launch. `Asymptotic` takes P_A from its closed
/// form; P_B and P₁ always come from the shared grid.
pub fn power_breakdown(
    atom: &AtomParams,
    m: &MaterialParams,
    traj: &Trajectory,
    mode: PowerMode,
    doppler: DopplerMode,
    spec: &QuadSpec,
) -> Result<PowerBreakdown> {
    let v = traj.v;
    let (p_a, e_a) = match mode {
        PowerMode::Asymptotic => (power_pa_asymptotic(atom, m, v), 0.0),
        PowerMode::Quadrature if v > 0.0 => {
            let r = power_pa_quadrature(atom, m, v, spec)?;
            (r.value, r.err_estimate)
        }
        PowerMode::Quadrature => (0.0, 0.0),
    };
    let (b, one) = launch_powers(atom, m, traj, doppler, &LaunchGrid::default())?;
    Ok(PowerBreakdown {
        p_a,
        p_b: b.value,
        p_one: one.value,
        total: p_a + b.value + one.value,
        err: [e_a, b.err_estimate, one.err_estimate],
        mode,
    })
}
