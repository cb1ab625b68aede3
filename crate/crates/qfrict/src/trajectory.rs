//! Launch paths parallel to the surface (motion along x) and the shape
//! factor Σ(x), the Fourier transform of the acceleration at x = (Ω+ω)τ.

use crate::error::{QfError, Result};
use crate::quadrature::{filon_samples, integrate_oscillatory, integrate_oscillatory_whole_line, QuadResult, QuadSpec};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrajectoryKind {
    ConstantVelocity,
    SuddenBoost,
    LinearRamp,
    SmoothBoost,
    Custom,
}

impl TrajectoryKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "constant" | "constantvelocity" | "constant_velocity" => Some(Self::ConstantVelocity),
            "sudden" | "suddenboost" | "sudden_boost" => Some(Self::SuddenBoost),
            "ramp" | "linearramp" | "linear_ramp" => Some(Self::LinearRamp),
            "smooth" | "smoothboost" | "smooth_boost" => Some(Self::SmoothBoost),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ConstantVelocity => "constant",
            Self::SuddenBoost => "sudden",
            Self::LinearRamp => "ramp",
            Self::SmoothBoost => "smooth",
            Self::Custom => "custom",
        }
    }
}

/// Acceleration a(t) on a uniform grid, zero outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct AccelSamples {
    pub t0: f64,
    pub dt: f64,
    pub a: Vec<f64>,
    // running velocity and position integrals at the grid points
    vel: Vec<f64>,
    pos: Vec<f64>,
}

impl AccelSamples {
    pub fn new(t0: f64, dt: f64, a: Vec<f64>) -> Result<Self> {
        if a.len() < 3 {
            return Err(QfError::Config("custom acceleration needs at least 3 samples".into()));
        }
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(QfError::Config(format!("custom acceleration spacing must be positive, got {dt}")));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(QfError::Config("custom acceleration contains non-finite values".into()));
        }
        let n = a.len();
        let mut vel = vec![0.0; n];
        let mut pos = vec![0.0; n];
        for j in 1..n {
            vel[j] = vel[j - 1] + 0.5 * dt * (a[j - 1] + a[j]);
            // exact for the piecewise-linear interpolant of a
            pos[j] = pos[j - 1] + dt * vel[j - 1] + dt * dt * (a[j - 1] / 3.0 + a[j] / 6.0);
        }
        Ok(Self { t0, dt, a, vel, pos })
    }

    /// Parses a two-column `t a` file with a `# t a` header line.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| QfError::Config("empty acceleration file".into()))?;
        let cols: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
        if !header.starts_with('#') || cols != ["t", "a"] {
            return Err(QfError::Config(format!("expected header `# t a`, found `{header}`")));
        }
        let mut t = Vec::new();
        let mut a = Vec::new();
        for (i, l) in lines.enumerate() {
            if l.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 2 {
                return Err(QfError::Config(format!("line {}: expected two columns", i + 2)));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| QfError::Config(format!("line {}: bad number `{s}`", i + 2)))
            };
            t.push(parse(f[0])?);
            a.push(parse(f[1])?);
        }
        if t.len() < 3 {
            return Err(QfError::Config("custom acceleration needs at least 3 samples".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        for (j, &tj) in t.iter().enumerate() {
            let expect = t[0] + dt * j as f64;
            if (tj - expect).abs() > 1e-9 * dt.abs().max(1e-300) + 1e-12 * expect.abs() {
                return Err(QfError::Config(format!("non-uniform spacing at sample {j} (t = {tj})")));
            }
        }
        Self::new(t[0], dt, a)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QfError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn final_speed(&self) -> f64 {
        *self.vel.last().unwrap()
    }

    fn t_end(&self) -> f64 {
        self.t0 + self.dt * (self.a.len() - 1) as f64
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let j = (((t - self.t0) / self.dt).floor() as usize).min(self.a.len() - 2);
        (j, t - (self.t0 + self.dt * j as f64))
    }

    fn accel(&self, t: f64) -> f64 {
        if t < self.t0 || t > self.t_end() {
            return 0.0;
        }
        let (j, s) = self.locate(t);
        self.a[j] + (self.a[j + 1] - self.a[j]) * s / self.dt
    }

    fn velocity(&self, t: f64) -> f64 {
        if t <= self.t0 {
            return 0.0;
        }
        if t >= self.t_end() {
            return self.final_speed();
        }
        let (j, s) = self.locate(t);
        let slope = (self.a[j + 1] - self.a[j]) / self.dt;
        self.vel[j] + self.a[j] * s + 0.5 * slope * s * s
    }

    /// Position with the origin fixed by x(t) → v·t at late times.
    fn position(&self, t: f64) -> f64 {
        let v = self.final_speed();
        let offset = v * self.t_end() - *self.pos.last().unwrap();
        if t <= self.t0 {
            return offset;
        }
        if t >= self.t_end() {
            return v * t;
        }
        let (j, s) = self.locate(t);
        let slope = (self.a[j + 1] - self.a[j]) / self.dt;
        offset + self.pos[j] + self.vel[j] * s + 0.5 * self.a[j] * s * s + slope * s * s * s / 6.0
    }

    fn is_monotonic(&self) -> bool {
        let scale = self.a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.a.iter().all(|&x| x >= -1e-12 * scale)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub v: f64,
    pub tau: f64,
    pub custom_accel: Option<AccelSamples>,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, v: f64, tau: f64) -> Result<Self> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(QfError::Config(format!("trajectory.v must be non-negative, got {v}")));
        }
        if matches!(kind, TrajectoryKind::LinearRamp | TrajectoryKind::SmoothBoost | TrajectoryKind::Custom)
            && !(tau > 0.0 && tau.is_finite())
        {
            return Err(QfError::Config(format!("trajectory.tau must be positive for {}, got {tau}", kind.name())));
        }
        if kind == TrajectoryKind::Custom {
            return Err(QfError::Config("custom trajectory requires acceleration samples".into()));
        }
        Ok(Self { kind, v, tau, custom_accel: None })
    }

    /// Custom launch. The final speed is ∫a dt; `tau` sets the x ↔ frequency scale of Σ.
    pub fn custom(samples: AccelSamples, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(QfError::Config(format!("trajectory.tau must be positive for custom, got {tau}")));
        }
        let v = samples.final_speed();
        if !(v >= 0.0) {
            return Err(QfError::Config(format!("custom acceleration integrates to negative speed {v}")));
        }
        Ok(Self { kind: TrajectoryKind::Custom, v, tau, custom_accel: Some(samples) })
    }

    pub fn constant(v: f64) -> Self {
        Self { kind: TrajectoryKind::ConstantVelocity, v, tau: 0.0, custom_accel: None }
    }

    pub fn sudden(v: f64) -> Self {
        Self { kind: TrajectoryKind::SuddenBoost, v, tau: 0.0, custom_accel: None }
    }

    pub fn ramp(v: f64, tau: f64) -> Self {
        Self { kind: TrajectoryKind::LinearRamp, v, tau, custom_accel: None }
    }

    pub fn smooth(v: f64, tau: f64) -> Self {
        Self { kind: TrajectoryKind::SmoothBoost, v, tau, custom_accel: None }
    }

    /// Same path family at a different final speed.
    pub fn with_speed(&self, v: f64) -> Self {
        let mut t = self.clone();
        if let Some(s) = &self.custom_accel {
            let r = if s.final_speed() != 0.0 { v / s.final_speed() } else { 0.0 };
            t.custom_accel = AccelSamples::new(s.t0, s.dt, s.a.iter().map(|a| a * r).collect()).ok();
        }
        t.v = v;
        t
    }

    fn samples(&self) -> Result<&AccelSamples> {
        self.custom_accel
            .as_ref()
            .ok_or_else(|| QfError::Config("custom trajectory requires acceleration samples".into()))
    }

    /// x(t); y = 0 and the height is fixed.
    pub fn position(&self, t: f64) -> Result<f64> {
        let (v, tau) = (self.v, self.tau);
        Ok(match self.kind {
            TrajectoryKind::ConstantVelocity => v * t,
            TrajectoryKind::SuddenBoost => {
                if t > 0.0 {
                    v * t
                } else {
                    0.0
                }
            }
            TrajectoryKind::LinearRamp => {
                if t <= -tau {
                    0.0
                } else if t <= tau {
                    v * (t + tau).powi(2) / (4.0 * tau)
                } else {
                    v * t
                }
            }
            TrajectoryKind::SmoothBoost => {
                let s = t / tau;
                // vτ ln(1 + e^{t/τ}) without overflow
                v * tau * (s.max(0.0) + (-s.abs()).exp().ln_1p())
            }
            TrajectoryKind::Custom => self.samples()?.position(t),
        })
    }

    pub fn velocity(&self, t: f64) -> Result<f64> {
        let (v, tau) = (self.v, self.tau);
        Ok(match self.kind {
            TrajectoryKind::ConstantVelocity => v,
            TrajectoryKind::SuddenBoost => {
                if t > 0.0 {
                    v
                } else {
                    0.0
                }
            }
            TrajectoryKind::LinearRamp => {
                if t <= -tau {
                    0.0
                } else if t <= tau {
                    v * (t + tau) / (2.0 * tau)
                } else {
                    v
                }
            }
            TrajectoryKind::SmoothBoost => v / (1.0 + (-t / tau).exp()),
            TrajectoryKind::Custom => self.samples()?.velocity(t),
        })
    }

    /// ẍ(t). The sudden boost's v·δ(t) is not representable and reads 0.
    pub fn acceleration(&self, t: f64) -> Result<f64> {
        let (v, tau) = (self.v, self.tau);
        Ok(match self.kind {
            TrajectoryKind::ConstantVelocity | TrajectoryKind::SuddenBoost => 0.0,
            TrajectoryKind::LinearRamp => {
                if t > -tau && t < tau {
                    v / (2.0 * tau)
                } else {
                    0.0
                }
            }
            TrajectoryKind::SmoothBoost => {
                let s = t / tau;
                if s.abs() > 700.0 {
                    0.0
                } else {
                    v / (tau * (2.0 + 2.0 * s.cosh()))
                }
            }
            TrajectoryKind::Custom => self.samples()?.accel(t),
        })
    }

    /// Launch paths whose velocity is not monotonic fall outside the regime
    /// the launch bookkeeping was derived for.
    pub fn outside_modelled_regime(&self) -> bool {
        match (&self.kind, &self.custom_accel) {
            (TrajectoryKind::Custom, Some(s)) => !s.is_monotonic(),
            _ => false,
        }
    }

    pub fn is_accelerating(&self) -> bool {
        self.kind != TrajectoryKind::ConstantVelocity
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn pi_x_over_sinh(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 1e-4 {
        1.0 - y * y / 6.0
    } else if y.abs() > 700.0 {
        0.0
    } else {
        y / y.sinh()
    }
}

/// Σ(x) for x = (Ω+ω)τ.
pub fn shape_factor(traj: &Trajectory, x: f64) -> Result<Complex64> {
    Ok(match traj.kind {
        TrajectoryKind::ConstantVelocity => Complex64::new(0.0, 0.0),
        TrajectoryKind::SuddenBoost => Complex64::new(1.0, 0.0),
        TrajectoryKind::LinearRamp => Complex64::new(sinc(x), 0.0),
        TrajectoryKind::SmoothBoost => Complex64::new(pi_x_over_sinh(x), 0.0),
        TrajectoryKind::Custom => shape_factor_numeric(traj, x / traj.tau, &QuadSpec::default())?.value,
    })
}

/// (1/v) ∫ a(t) e^{i ω_sum t} dt evaluated by oscillatory quadrature.
pub fn shape_factor_numeric(traj: &Trajectory, omega_sum: f64, spec: &QuadSpec) -> Result<QuadResult<Complex64>> {
    let exact = |v: Complex64| QuadResult { value: v, err_estimate: 0.0, evals: 0, converged: true };
    let tau = traj.tau;
    let r = match traj.kind {
        TrajectoryKind::ConstantVelocity => return Ok(exact(Complex64::new(0.0, 0.0))),
        TrajectoryKind::SuddenBoost => return Ok(exact(Complex64::new(1.0, 0.0))),
        TrajectoryKind::LinearRamp => {
            integrate_oscillatory(|_| Complex64::new(1.0 / (2.0 * tau), 0.0), omega_sum, -tau, tau, spec)
        }
        TrajectoryKind::SmoothBoost => integrate_oscillatory_whole_line(
            |t| {
                let s = t / tau;
                let a = if s.abs() > 700.0 { 0.0 } else { 1.0 / (tau * (2.0 + 2.0 * s.cosh())) };
                Complex64::new(a, 0.0)
            },
            omega_sum,
            &spec.with_abs_tol(spec.abs_tol.max(1e-14)),
        ),
        TrajectoryKind::Custom => {
            let s = traj.samples()?;
            let v = s.final_speed();
            if v == 0.0 {
                return Ok(exact(Complex64::new(0.0, 0.0)));
            }
            filon_samples(s.t0, s.dt, &s.a, omega_sum).scale(1.0 / v)
        }
    };
    r.require("shape factor Fourier transform")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_at_reference_times() {
        let s = Trajectory::sudden(0.3);
        assert_eq!(s.position(-1.0).unwrap(), 0.0);
        assert!((s.position(2.0).unwrap() - 0.6).abs() < 1e-15);
        let r = Trajectory::ramp(0.3, 1.0);
        assert!((r.position(0.0).unwrap() - 0.3 / 4.0).abs() < 1e-15);
        let c = Trajectory::constant(0.3);
        assert!((c.position(5.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn late_time_origin_convention() {
        let sm = Trajectory::smooth(1.0, 0.5);
        assert!((sm.position(40.0).unwrap() - 40.0).abs() < 1e-12);
        assert!(sm.position(-40.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn velocity_is_derivative_of_position() {
        let samples: Vec<f64> = (0..=400).map(|j| {
            let t = -2.0 + 0.01 * j as f64;
            (-(t * t)).exp()
        }).collect();
        let custom = Trajectory::custom(AccelSamples::new(-2.0, 0.01, samples).unwrap(), 1.0).unwrap();
        for traj in [
            Trajectory::constant(0.7),
            Trajectory::sudden(0.7),
            Trajectory::ramp(0.7, 1.3),
            Trajectory::smooth(0.7, 1.3),
            custom,
        ] {
            let tau = if traj.tau > 0.0 { traj.tau } else { 1.0 };
            for t in [-3.0 * tau, 0.0, 3.0 * tau] {
                if traj.kind == TrajectoryKind::SuddenBoost && t == 0.0 {
                    continue;
                }
                let h = 1e-5;
                let d = (traj.position(t + h).unwrap() - traj.position(t - h).unwrap()) / (2.0 * h);
                assert!((d - traj.velocity(t).unwrap()).abs() < 1e-8, "{:?} t={t}", traj.kind);
            }
        }
    }

    #[test]
    fn analytic_shape_values() {
        assert_eq!(shape_factor(&Trajectory::sudden(1.0), 7.0).unwrap().re, 1.0);
        assert!(shape_factor(&Trajectory::ramp(1.0, 1.0), PI).unwrap().norm() < 1e-15);
        assert_eq!(shape_factor(&Trajectory::smooth(1.0, 1.0), 0.0).unwrap().re, 1.0);
        assert_eq!(shape_factor(&Trajectory::constant(1.0), 2.0).unwrap().norm(), 0.0);
    }

    #[test]
    fn numeric_shape_matches_closed_forms() {
        let spec = QuadSpec::default().with_rel_tol(1e-10);
        let sm = Trajectory::smooth(1.0, 1.0);
        let r = shape_factor_numeric(&sm, 2.0, &spec).unwrap();
        assert!((r.value.re - 2.0 * PI / (2.0 * PI).sinh()).abs() < 1e-6 && r.value.im.abs() < 1e-6);
        let rp = Trajectory::ramp(1.0, 1.0);
        let r = shape_factor_numeric(&rp, PI / 2.0, &spec).unwrap();
        assert!((r.value.re - 2.0 / PI).abs() < 1e-6);
        let r = shape_factor_numeric(&Trajectory::constant(1.0), 3.0, &spec).unwrap();
        assert_eq!(r.value.norm(), 0.0);
    }

    #[test]
    fn custom_file_parsing() {
        let text = "# t a\n-1 0\n0 1\n1 0\n";
        let s = AccelSamples::from_text(text).unwrap();
        assert!((s.final_speed() - 1.0).abs() < 1e-15);
        assert!(AccelSamples::from_text("# t v\n0 1\n1 1\n2 1\n").is_err());
        assert!(AccelSamples::from_text("# t a\n0 1\n1 1\n3 1\n").is_err());
        let overshoot = AccelSamples::from_text("# t a\n0 0\n1 2\n2 -1\n3 0\n").unwrap();
        assert!(Trajectory::custom(overshoot, 1.0).unwrap().outside_modelled_regime());
        assert!(Trajectory::new(TrajectoryKind::Custom, 1.0, 1.0).is_err());
    }

    #[test]
    fn acceleration_integrates_to_speed() {
        let spec = QuadSpec::default().with_rel_tol(1e-12);
        for traj in [Trajectory::ramp(0.4, 2.0), Trajectory::smooth(0.4, 2.0)] {
            let r = crate::quadrature::integrate_1d(|t| traj.acceleration(t).unwrap(), -200.0, 200.0, &spec);
            assert!((r.value - 0.4).abs() < 1e-9, "{:?}", traj.kind);
        }
    }
}
