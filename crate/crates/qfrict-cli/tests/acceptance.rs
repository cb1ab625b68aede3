//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --release --test acceptance`.

use qfrict::amplitudes::{excitation_frequency_integral, excitation_probability_cubature, gamma_ground};
use qfrict::friction::*;
use qfrict::quadrature::QuadSpec;
use qfrict::trajectory::{shape_factor, shape_factor_numeric};
use qfrict::{AtomParams, DopplerMode, MaterialParams, Trajectory, TrajectoryKind};
use qfrict_cli::oracle::ramp_residual;
use qfrict_cli::{cmd_fit_exponent, ModelTag, RunConfig, Sweep, SweepVar};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Ω = 1, z = 1 and a Drude material at the given ratios.
fn setup(omega_ratio: f64, gamma_ratio: f64) -> (AtomParams, MaterialParams) {
    let ws = 1.0 / omega_ratio;
    (AtomParams::new(1.0, 1.0, 1.0).unwrap(), MaterialParams::new(2f64.sqrt() * ws, ws, gamma_ratio * ws).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn c1() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let v = 0.01;
    let q = match power_pa_quadrature(&at, &m, v, &QuadSpec::for_dim(5)) {
        Ok(q) => q,
        Err(e) => return verdict(false, e.to_string()),
    };
    let exact = power_pa_asymptotic(&at, &m, v);
    let d = rel(q.value, exact);
    verdict(d <= 0.02, format!("P_A quadrature {:.6e} vs closed form {exact:.6e}: rel {d:.2e} (tol 2e-2)", q.value))
}

fn c2() -> Verdict {
    let (z, v) = (1.0, 0.01);
    let s = QuadSpec::for_dim(4);
    let (a, b) = match (k_constant_pa(z, &s), k_constant_pb(z, v, &s)) {
        (Ok(a), Ok(b)) => (a.value, b.value),
        (Err(e), _) | (_, Err(e)) => return verdict(false, e.to_string()),
    };
    let da = rel(a, 27.0 * PI * PI / (16.0 * z.powi(10)));
    let db = rel(b, 9.0 * PI * PI * v * v / (16.0 * z.powi(8)));
    verdict(da <= 5e-3 && db <= 5e-3, format!("27π²/16 rel {da:.2e}, 9π²v²/16 rel {db:.2e} (tol 5e-3)"))
}

fn c3() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let v = 0.01;
    let paths = [
        ("sudden", Trajectory::sudden(v)),
        ("ramp Ωτ=1", Trajectory::ramp(v, 1.0)),
        ("ramp Ωτ=10", Trajectory::ramp(v, 10.0)),
        ("smooth Ωτ=1", Trajectory::smooth(v, 1.0)),
        ("smooth Ωτ=10", Trajectory::smooth(v, 10.0)),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (name, tr) in paths {
        match launch_powers(&at, &m, &tr, DopplerMode::Leading, &LaunchGrid::default()) {
            Ok((b, one)) => {
                let r = (b.value + one.value).abs() / b.value;
                worst = worst.max(if b.value > 0.0 { r } else { f64::INFINITY });
                parts.push(format!("{name} {r:.1e}"));
            }
            Err(e) => return verdict(false, format!("{name}: {e}")),
        }
    }
    verdict(worst <= 1e-3, format!("|P₁+P_B|/P_B: {} (tol 1e-3)", parts.join(", ")))
}

fn c4() -> Verdict {
    let spec = QuadSpec::default();
    let mut worst = 0.0f64;
    for kind in [TrajectoryKind::SuddenBoost, TrajectoryKind::LinearRamp, TrajectoryKind::SmoothBoost] {
        let tr = Trajectory::new(kind, 0.01, 1.0).unwrap();
        for x in [0.1f64, 1.0, 3.0, 10.0, 30.0] {
            let closed = match kind {
                TrajectoryKind::SuddenBoost => 1.0,
                TrajectoryKind::LinearRamp => x.sin() / x,
                _ => PI * x / (PI * x).sinh(),
            };
            let num = match shape_factor_numeric(&tr, x, &spec) {
                Ok(r) => r.value,
                Err(e) => return verdict(false, e.to_string()),
            };
            worst = worst.max((num.re - closed).abs() + num.im.abs());
            worst = worst.max((shape_factor(&tr, x).unwrap().re - closed).abs());
        }
    }
    verdict(worst <= 1e-6, format!("max |Σ_numeric − Σ_closed| = {worst:.2e} (tol 1e-6)"))
}

fn fit(model: ModelTag, var: SweepVar, lo: f64, hi: f64, base: &RunConfig) -> Result<f64, String> {
    let mut c = base.clone();
    c.models = vec![model];
    c.sweep = Some(Sweep::log_spaced(var, lo, hi, 6).map_err(|e| e.to_string())?);
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let f = cmd_fit_exponent(&c, jobs).map_err(|e| e.to_string())?;
    Ok(f[0].slope)
}

fn c5() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let base = RunConfig { atom: at, material: m, trajectory: Trajectory::sudden(0.01), ..RunConfig::default() };
    let cases = [
        ("P_A v", ModelTag::PA, SweepVar::V, (0.005, 0.02), 4.0, 0.02),
        ("P_A z", ModelTag::PA, SweepVar::Z, (0.8, 1.6), -10.0, 0.1),
        ("P_B v", ModelTag::PB, SweepVar::V, (0.005, 0.02), 2.0, 0.02),
        ("P_B z", ModelTag::PB, SweepVar::Z, (0.8, 1.6), -8.0, 0.1),
        ("NonEq v", ModelTag::NonEq, SweepVar::V, (0.005, 0.02), 3.0, 0.05),
        ("ForceO4 v", ModelTag::ForceO4, SweepVar::V, (0.005, 0.02), 3.0, 0.05),
        ("Markov v", ModelTag::Markov, SweepVar::V, (0.005, 0.02), 1.0, 0.02),
        ("Markov z", ModelTag::Markov, SweepVar::Z, (0.8, 1.6), -8.0, 0.1),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, model, var, (lo, hi), want, tol) in cases {
        match fit(model, var, lo, hi, &base) {
            Ok(s) => {
                let good = (s - want).abs() <= tol;
                ok &= good;
                parts.push(format!("{name} {s:.4}{}", if good { "" } else { " (off)" }));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} error {e}"));
            }
        }
    }
    verdict(ok, parts.join(", "))
}

fn c6() -> Verdict {
    let (at, m) = setup(0.3, 0.02);
    let v = 0.01;
    let s = QuadSpec::default();
    let (closed, small) = match (markov_force(&at, &m, v, MarkovMode::ClosedForm, &s), markov_force(&at, &m, v, MarkovMode::SmallV, &s)) {
        (Ok(a), Ok(b)) => (a.f[0], b.f[0]),
        (Err(e), _) | (_, Err(e)) => return verdict(false, e.to_string()),
    };
    let pb = power_pb_sudden_asymptotic(&at, &m, v, true);
    let d1 = rel(closed, small);
    let ratio = -closed * v / pb;
    verdict(
        d1 <= 0.05 && (ratio - 1.0).abs() <= 0.10,
        format!("closed vs small-v rel {d1:.2e} (tol 5e-2); −F·v/P_B(first term) = {ratio:.4} (want 1 ± 0.10)"),
    )
}

fn c7() -> Verdict {
    let (at, m) = setup(0.05, 0.05);
    let v = 0.01;
    let f = match noneq_spectral(&at, &m, v, &QuadSpec::default()).and_then(|ns| noneq_force(&ns, NonEqMode::FullIntegral)) {
        Ok(f) => f.f[0],
        Err(e) => return verdict(false, e.to_string()),
    };
    let ratio = -f * v / power_pa_asymptotic(&at, &m, v);
    verdict((4.75..=5.25).contains(&ratio), format!("(−F_noneq·v)/P_A = {ratio:.4} (want [4.75, 5.25])"))
}

fn c8() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let ns = match noneq_spectral(&at, &m, 0.0, &QuadSpec::default()) {
        Ok(n) => n,
        Err(e) => return verdict(false, e.to_string()),
    };
    let mut worst = 0.0f64;
    for j in 0..=58 {
        let w = 0.1 + 0.05 * j as f64;
        let (s, t) = (dipole_spectrum(&ns, w).unwrap(), ns.alpha_dressed_im_tensor(w).unwrap());
        for i in 0..3 {
            worst = worst.max(rel(s[i][i].re, 2.0 * t[i][i].re));
            for k in 0..3 {
                worst = worst.max((s[i][k] - 2.0 * t[i][k]).norm() / s[2][2].re);
            }
        }
    }
    verdict(worst <= 1e-6, format!("max rel |S − 2 Im α̃| on ω ∈ [0.1, 3]Ω = {worst:.2e} (tol 1e-6)"))
}

fn c9() -> Verdict {
    let cfg = RunConfig::default();
    let mut res = Vec::new();
    for b in [0.2, 0.1, 0.05, 0.025] {
        match ramp_residual(&cfg, b) {
            Ok(r) => res.push(r),
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    let ratios: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|&r| r >= 3.5);
    let txt: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    verdict(ok, format!("residual reduction per halving of β: {} (want ≥ 3.5)", txt.join(", ")))
}

fn c10() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let s = QuadSpec::default().with_abs_tol(0.0);
    let mut us = Vec::new();
    let mut ys = Vec::new();
    for j in 0..6 {
        let v = 0.05 * 4f64.powf(j as f64 / 5.0);
        match gamma_ground(&at, &m, v, &s) {
            Ok(g) => {
                us.push(at.omega0 * at.z / v);
                ys.push(g.value.ln());
            }
            Err(e) => return verdict(false, e.to_string()),
        }
    }
    // ln γ_g = c − 2u + slowly varying terms, u = Ωz/v
    let n = us.len() as f64;
    let (mu, my) = (us.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = us.iter().zip(&ys).map(|(u, y)| (u - mu) * (y - my)).sum::<f64>() / us.iter().map(|u| (u - mu).powi(2)).sum::<f64>();
    let d = (slope / -2.0 - 1.0).abs();
    verdict(d <= 0.10, format!("d ln γ_g / d(Ωz/v) = {slope:.4} (want −2 within 10%)"))
}

fn c11() -> Verdict {
    let (at, m) = setup(0.1, 0.05);
    let tr = Trajectory::sudden(0.01);
    let (cub, w) = match (excitation_probability_cubature(&at, &m, &tr, &QuadSpec::for_dim(3)), excitation_frequency_integral(&at, &m, &tr, &QuadSpec::default())) {
        (Ok(a), Ok(b)) => (a.value, b.value),
        (Err(e), _) | (_, Err(e)) => return verdict(false, e.to_string()),
    };
    let got = cub / w / (at.alpha0 * at.omega0 / (2.0 * PI * PI));
    let want = 3.0 * PI * tr.v * tr.v / (4.0 * at.z.powi(5));
    let d = rel(got, want);
    verdict(d <= 5e-3, format!("k-integral {got:.6e} vs 3πv²/(4z⁵) {want:.6e}: rel {d:.2e} (tol 5e-3)"))
}

fn main() {
    let criteria: [(u32, fn() -> Verdict, u64); 11] = [
        (1, c1, 600),
        (2, c2, 240),
        (3, c3, 300),
        (4, c4, 10),
        (5, c5, 2700),
        (6, c6, 300),
        (7, c7, 900),
        (8, c8, 120),
        (9, c9, 300),
        (10, c10, 300),
        (11, c11, 120),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, f, budget) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let v = f();
        let dt = t0.elapsed();
        let in_time = dt <= Duration::from_secs(budget);
        let pass = v.pass && in_time;
        let timing = format!("{:.1} s of {budget} s{}", dt.as_secs_f64(), if in_time { "" } else { ", over budget" });
        println!("criterion {n:>2}: {} : {} [{timing}]", if pass { "PASS" } else { "FAIL" }, v.detail);
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
