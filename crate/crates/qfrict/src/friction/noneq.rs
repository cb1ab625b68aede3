use super::{ForceModel, ForceResult};
use crate::error::{QfError, Result};
use crate::material::{im_reflection, im_reflection_slope0, AtomParams, MaterialParams};
use crate::quadrature::{integrate_1d, integrate_1d_complex, integrate_exp_damped, principal_value, QuadSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NonEqMode {
    FullIntegral,
    SmallV,
}

impl NonEqMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fullintegral" | "full" => Some(Self::FullIntegral),
            "smallv" => Some(Self::SmallV),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FullIntegral => "full-integral",
            Self::SmallV => "small-v",
        }
    }
}

/// |η·k̃|² in polar angle, divided by k², for η = x, y, z.
#[inline]
fn axis_weight(i: usize, th: f64) -> f64 {
    match i {
        0 => th.cos().powi(2),
        1 => th.sin().powi(2),
        _ => 1.0,
    }
}

/// Spectral functions of the moving atom in its steady state. The
/// polarizability is diagonal in (x, y, z); components are indexed 0..3.
#[derive(Clone, Debug)]
pub struct NonEqSpectralFunctions {
    atom: AtomParams,
    m: MaterialParams,
    v: f64,
    spec: QuadSpec,
    /// ∫d²k e^{−2kz} k̃_i k̃_j*/k, by quadrature
    geometry: [[Complex64; 3]; 3],
}

/// ∫d²k F(k, θ) e^{−2kz} k̃_i k̃_j*/k over the plane, as (Re, Im).
///
/// Each part is integrated together with ∫|weight·F| in the imaginary
/// slot, so elements that vanish by symmetry still meet a tolerance set
/// by the size of their integrand.
fn plane_tensor_element<F: Fn(f64, f64) -> f64>(i: usize, j: usize, z: f64, f: F, spec: &QuadSpec) -> Result<Complex64> {
    // k̃_i k̃_j* / k times the measure k: components of (kc, ks, ik)(kc, ks, −ik)
    let elem = |th: f64| -> Complex64 {
        let v = [Complex64::new(th.cos(), 0.0), Complex64::new(th.sin(), 0.0), Complex64::new(0.0, 1.0)];
        v[i] * v[j].conj()
    };
    let bad = std::cell::Cell::new(false);
    let part = |take_im: bool| {
        // k = −ln(u)/2z carries e^{−2kz} into the measure
        let f_u = |u: f64| {
            if u <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let k = -u.ln() / (2.0 * z);
            let g = |th: f64| {
                let e = elem(th);
                let w = if take_im { e.im } else { e.re };
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let x = f(k, th);
                Complex64::new(w * x, (w * x).abs())
            };
            let r = integrate_1d_complex(g, 0.0, 2.0 * PI, spec);
            bad.set(bad.get() || !r.converged);
            r.value * (k * k / (2.0 * z))
        };
        integrate_1d_complex(f_u, 0.0, 1.0, spec)
    };
    let re = part(false);
    let im = part(true);
    if bad.get() || !re.converged || !im.converged {
        return Err(QfError::Numeric { name: format!("plane tensor ({i},{j})"), residual: re.err_estimate + im.err_estimate });
    }
    Ok(Complex64::new(re.value.re, im.value.re))
}

/// Builds the spectral functions for velocity `v` along x; a negative v
/// mirrors the path.
pub fn noneq_spectral(atom: &AtomParams, m: &MaterialParams, v: f64, spec: &QuadSpec) -> Result<NonEqSpectralFunctions> {
    if !v.is_finite() {
        return Err(QfError::Domain(format!("velocity must be finite, got {v}")));
    }
    let s = spec.with_abs_tol(0.0);
    let mut geometry = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let c = plane_tensor_element(i, j, atom.z, |_, _| 1.0, &s)?;
            geometry[i][j] = c;
            geometry[j][i] = c.conj();
        }
    }
    Ok(NonEqSpectralFunctions { atom: *atom, m: *m, v, spec: s, geometry })
}

impl NonEqSpectralFunctions {
    pub fn speed(&self) -> f64 {
        self.v
    }

    /// Same atom and surface at another velocity; the rest geometry is reused.
    pub fn with_speed(&self, v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(QfError::Domain(format!("velocity must be finite, got {v}")));
        }
        Ok(Self { v, ..self.clone() })
    }

    /// ∫d²k e^{−2kz} k̃_i k̃_j*/k; at rest this is π/(4z³) diag(1, 1, 2).
    pub fn geometry(&self) -> [[Complex64; 3]; 3] {
        self.geometry
    }

    fn mu_at(&self, i: usize, omega: f64, v: f64) -> Result<f64> {
        let d2 = self.atom.dipole_squared();
        let m = &self.m;
        if v == 0.0 {
            return Ok(2.0 * d2 / PI * im_reflection(omega, m).abs() * self.geometry[i][i].re);
        }
        let z = self.atom.z;
        let bad = std::cell::Cell::new(false);
        let f_k = |k: f64| {
            // sign(x) Im R(x) = |Im R(x)|; θ and −θ contribute equally
            let g = |th: f64| axis_weight(i, th) * im_reflection(omega + k * v * th.cos(), m).abs();
            let r = integrate_1d(g, 0.0, PI, &self.spec);
            bad.set(bad.get() || !r.converged);
            2.0 * k * k * r.value * (-2.0 * k * z).exp()
        };
        let r = integrate_exp_damped(f_k, 0.0, 2.0 * z, &self.spec);
        if bad.get() || !r.converged {
            return Err(QfError::Numeric { name: "μ(ω; v)".into(), residual: r.err_estimate });
        }
        Ok(2.0 * d2 / PI * r.value)
    }

    /// μ_η(ω; v) = (2d²/π)∫d²k sign(ω + k·v)|η·k̃|²/k e^{−2kz} Im R(ω + k·v).
    pub fn mu(&self, i: usize, omega: f64) -> Result<f64> {
        self.mu_at(i, omega, self.v)
    }

    /// γ(ω; v) = μ/2.
    pub fn gamma_damp_atom(&self, i: usize, omega: f64) -> Result<f64> {
        Ok(0.5 * self.mu(i, omega)?)
    }

    fn delta_at(&self, i: usize, omega: f64, v: f64) -> Result<f64> {
        let w = omega.abs();
        if w == 0.0 {
            return Ok(0.0);
        }
        let failed = std::cell::Cell::new(false);
        let f = |wp: f64| match self.mu_at(i, wp, v) {
            Ok(mu) => mu / (wp + w),
            Err(_) => {
                failed.set(true);
                0.0
            }
        };
        let pv = principal_value(f, w, 0.0, f64::INFINITY, &self.spec)?;
        if failed.get() {
            return Err(QfError::Numeric { name: "μ inside Δ".into(), residual: f64::NAN });
        }
        let pv = pv.require("Δ(ω) principal value")?;
        Ok(-(w * w) / (PI * self.atom.omega0.powi(2)) * pv.value)
    }

    /// Δ(ω; v) = −P∫₀^∞ (dω′/π)(ω²/Ω²) μ(ω′)/(ω′² − ω²).
    pub fn delta_shift(&self, i: usize, omega: f64) -> Result<f64> {
        self.delta_at(i, omega, self.v)
    }

    fn alpha_at(&self, i: usize, omega: f64, v: f64) -> Result<Complex64> {
        let om2 = self.atom.omega0.powi(2);
        let delta = self.delta_at(i, omega, v)?;
        let gamma = 0.5 * self.mu_at(i, omega, v)?;
        let den = Complex64::new(om2 * (1.0 - delta) - omega * omega, -omega * gamma);
        Ok(self.atom.alpha0 * om2 / den)
    }

    /// α_ii(ω; v) = αΩ²/[Ω²(1 − Δ_i) − ω² − iωγ_i].
    pub fn alpha(&self, i: usize, omega: f64) -> Result<Complex64> {
        self.alpha_at(i, omega, self.v)
    }

    /// The polarizability of the atom at rest.
    pub fn alpha_rest(&self, i: usize, omega: f64) -> Result<Complex64> {
        self.alpha_at(i, omega, 0.0)
    }

    /// Im α̃_ij(ω) = Im R(ω) α_ii(ω;0) α_jj*(ω;0) ∫d²k e^{−2kz} k̃_i k̃_j*/k.
    pub fn alpha_dressed_im_tensor(&self, omega: f64) -> Result<[[Complex64; 3]; 3]> {
        let r = im_reflection(omega, &self.m);
        let a = [self.alpha_rest(0, omega)?, self.alpha_rest(1, omega)?, self.alpha_rest(2, omega)?];
        let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = a[i] * self.geometry[i][j] * a[j].conj() * r;
            }
        }
        Ok(out)
    }

    /// Diagonal element Im α̃_ii(ω).
    pub fn alpha_dressed_im(&self, i: usize, omega: f64) -> Result<f64> {
        Ok(im_reflection(omega, &self.m) * self.alpha_rest(i, omega)?.norm_sqr() * self.geometry[i][i].re)
    }

    /// d Im α̃_ii/dω at 0 by symmetric differences, h = 1e-4·Ω and h/2,
    /// Richardson-combined.
    pub fn alpha_dressed_slope0(&self, i: usize) -> Result<f64> {
        let h = 1e-4 * self.atom.omega0;
        let d = |h: f64| -> Result<f64> { Ok((self.alpha_dressed_im(i, h)? - self.alpha_dressed_im(i, -h)?) / (2.0 * h)) };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        Ok((4.0 * d2 - d1) / 3.0)
    }

    /// Im α̃′(0) as it enters the small-speed force: (5a′_xx + a′_yy + 6a′_zz)/6,
    /// which is a′_xx + a′_zz when a′_zz = 2a′_xx = 2a′_yy.
    pub fn alpha_dressed_slope0_scalar(&self) -> Result<f64> {
        Ok((5.0 * self.alpha_dressed_slope0(0)? + self.alpha_dressed_slope0(1)? + 6.0 * self.alpha_dressed_slope0(2)?) / 6.0)
    }
}

/// S_ij(ω; v) = 2α_ii α_jj* ∫d²k θ(ω + k·v) Im R(ω + k·v) e^{−2kz} k̃_i k̃_j*/k.
///
/// The tensor is Hermitian. The diagonal is real and even in v; S_xz =
/// S_zx* is odd in v and vanishes at rest.
pub fn dipole_spectrum(ns: &NonEqSpectralFunctions, omega: f64) -> Result<[[Complex64; 3]; 3]> {
    let (m, v) = (ns.m, ns.v);
    let a = [ns.alpha(0, omega)?, ns.alpha(1, omega)?, ns.alpha(2, omega)?];
    let kernel = |k: f64, th: f64| {
        let x = omega + k * v * th.cos();
        if x > 0.0 {
            im_reflection(x, &m)
        } else {
            0.0
        }
    };
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let t = plane_tensor_element(i, j, ns.atom.z, kernel, &ns.spec)?;
            out[i][j] = 2.0 * a[i] * t * a[j].conj();
            if j != i {
                out[j][i] = 2.0 * a[j] * t.conj() * a[i].conj();
            }
        }
    }
    Ok(out)
}

/// Steady-state friction force from the generalized fluctuation–dissipation
/// relation, with the perturbative dressed polarizability at rest.
pub fn noneq_force(ns: &NonEqSpectralFunctions, mode: NonEqMode) -> Result<ForceResult> {
    let (atom, m, v) = (ns.atom, ns.m, ns.v);
    let z = atom.z;
    let done = |fx: f64, err: f64| Ok(ForceResult::along_x(fx, err, ForceModel::NonEqFDT));
    match mode {
        NonEqMode::SmallV => {
            let slope = ns.alpha_dressed_slope0_scalar()?;
            let fx = -45.0 * v.powi(3) / (64.0 * PI * z.powi(7)) * slope * im_reflection_slope0(&m);
            done(fx, 0.0)
        }
        NonEqMode::FullIntegral => {
            if !(v > 0.0) {
                return Err(QfError::Domain(format!("full non-equilibrium force needs v > 0, got {v}")));
            }
            let spec = ns.spec;
            let bad = std::cell::Cell::new(false);
            let a_ii = |i: usize, w: f64| match ns.alpha_dressed_im(i, w) {
                Ok(x) => x,
                Err(_) => {
                    bad.set(true);
                    0.0
                }
            };
            let f_k = |k: f64| {
                let f_th = |th: f64| {
                    let (c, s) = (th.cos(), th.sin());
                    let q = k * c * v;
                    let f_w = |w: f64| {
                        let u = q - w;
                        im_reflection(w, &m) * (c * c * a_ii(0, u) + s * s * a_ii(1, u) + a_ii(2, u))
                    };
                    let r = integrate_1d(f_w, 0.0, q, &spec);
                    bad.set(bad.get() || !r.converged);
                    c * k * k * r.value
                };
                let r = integrate_1d(f_th, 0.0, 0.5 * PI, &spec);
                bad.set(bad.get() || !r.converged);
                k * (-2.0 * k * z).exp() * r.value
            };
            let mut r = integrate_exp_damped(f_k, 0.0, 2.0 * z, &spec.with_abs_tol(1e-300));
            r.converged &= !bad.get();
            // θ ∈ (−π/2, π/2) folded onto [0, π/2]
            let r = r.scale(-2.0 * 2.0 / (PI * PI)).require("non-equilibrium force")?;
            done(r.value, r.err_estimate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(alpha: f64) -> (AtomParams, MaterialParams) {
        (AtomParams::new(1.0, alpha, 1.0).unwrap(), MaterialParams::new(2f64.sqrt(), 1.0, 0.1).unwrap())
    }

    fn spec() -> QuadSpec {
        QuadSpec::default().with_rel_tol(1e-9)
    }

    #[test]
    fn geometry_at_rest() {
        let (at, m) = setup(1.0);
        let ns = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        let g = ns.geometry();
        let c = PI / 4.0;
        for (i, want) in [c, c, 2.0 * c].iter().enumerate() {
            assert!((g[i][i].re - want).abs() < 1e-9 && g[i][i].im.abs() < 1e-12);
        }
        assert!(g[0][2].norm() < 1e-12 && g[0][1].norm() < 1e-12);
    }

    #[test]
    fn mu_is_even_and_reduces_at_rest() {
        let (at, m) = setup(1.0);
        let ns = noneq_spectral(&at, &m, 0.05, &spec()).unwrap();
        for w in [0.2, 0.9, 1.4] {
            for i in 0..3 {
                let (a, b) = (ns.mu(i, w).unwrap(), ns.mu(i, -w).unwrap());
                assert!((a - b).abs() < 1e-8 * a.abs().max(1e-12), "{a} {b}");
            }
        }
        let rest = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        let w: f64 = 0.7;
        let expect = at.alpha0 * at.omega0 * im_reflection(w, &m) / (4.0 * at.z.powi(3));
        assert!((rest.mu(0, w).unwrap() / expect - 1.0).abs() < 1e-9);
        assert!((rest.mu(2, w).unwrap() / (2.0 * expect) - 1.0).abs() < 1e-9);
        // the moving-atom μ tends to the rest value
        let slow = noneq_spectral(&at, &m, 1e-4, &spec()).unwrap();
        assert!((slow.mu(0, w).unwrap() / expect - 1.0).abs() < 1e-3);
    }

    #[test]
    fn delta_even_and_alpha_dressed_odd() {
        let (at, m) = setup(0.1);
        let ns = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        let (a, b) = (ns.delta_shift(0, 0.6).unwrap(), ns.delta_shift(0, -0.6).unwrap());
        assert!((a - b).abs() < 1e-14);
        let (a, b) = (ns.alpha_dressed_im(2, 0.6).unwrap(), ns.alpha_dressed_im(2, -0.6).unwrap());
        assert!(a > 0.0 && (a + b).abs() < 1e-12 * a);
    }

    #[test]
    fn fluctuation_dissipation_at_rest() {
        let (at, m) = setup(0.2);
        let ns = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        for w in [0.1, 0.8, 2.5] {
            let s = dipole_spectrum(&ns, w).unwrap();
            let t = ns.alpha_dressed_im_tensor(w).unwrap();
            for i in 0..3 {
                assert!((s[i][i].re / (2.0 * t[i][i].re) - 1.0).abs() < 1e-6);
                for j in 0..3 {
                    assert!((s[i][j] - 2.0 * t[i][j]).norm() < 1e-6 * s[2][2].re);
                }
            }
        }
        let s = dipole_spectrum(&ns, -0.5).unwrap();
        assert!(s.iter().flatten().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn alpha_dressed_scales_as_inverse_cube() {
        let (at, m) = setup(1e-3);
        let w = 0.5;
        let f = |z: f64| noneq_spectral(&at.with_z(z), &m, 0.0, &spec()).unwrap().alpha_dressed_im(0, w).unwrap();
        let slope = (f(1.25) / f(0.8)).ln() / (1.25f64 / 0.8).ln();
        assert!((slope + 3.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn slope_combination_matches_pattern() {
        let (at, m) = setup(0.1);
        let ns = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        let (x, y, z) = (ns.alpha_dressed_slope0(0).unwrap(), ns.alpha_dressed_slope0(1).unwrap(), ns.alpha_dressed_slope0(2).unwrap());
        assert!((x - y).abs() < 1e-10 * x && (z / x - 2.0).abs() < 1e-6);
        let exact = im_reflection_slope0(&m) * at.alpha0.powi(2) * PI / 4.0;
        assert!((x / exact - 1.0).abs() < 1e-6, "{x} {exact}");
    }

    #[test]
    fn spectrum_near_resonance_is_lorentzian() {
        let ws = 1.0 / 0.3;
        let m = MaterialParams::new(2f64.sqrt() * ws, ws, 0.02 * ws).unwrap();
        let at = AtomParams::new(1.0, 0.01, 1.0).unwrap();
        let ns = noneq_spectral(&at, &m, 0.0, &spec()).unwrap();
        let g = ns.gamma_damp_atom(0, 1.0).unwrap();
        let centre = (1.0 - ns.delta_shift(0, 1.0).unwrap()).sqrt();
        let sxx = |w: f64| dipole_spectrum(&ns, w).unwrap()[0][0].re;
        let n = 400;
        let grid: Vec<f64> = (0..=n).map(|j| centre + g * (-3.0 + 6.0 * j as f64 / n as f64)).collect();
        let vals: Vec<f64> = grid.iter().map(|&w| sxx(w)).collect();
        let (jmax, &smax) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let peak = grid[jmax];
        assert!((peak - centre).abs() < g, "{peak} {centre} {g}");
        let half = |mut lo: f64, mut hi: f64| {
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (sxx(mid) > 0.5 * smax) == (sxx(lo) > 0.5 * smax) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let fwhm = half(peak, peak + 3.0 * g) - half(peak, peak - 3.0 * g);
        assert!((fwhm / g - 1.0).abs() < 0.1, "{fwhm} {g}");
    }

    #[test]
    fn moving_spectrum_is_hermitian_with_definite_parity() {
        let (at, m) = setup(0.2);
        let ns = noneq_spectral(&at, &m, 0.05, &spec()).unwrap();
        let back = ns.with_speed(-0.05).unwrap();
        let w = 0.4;
        let (s, r) = (dipole_spectrum(&ns, w).unwrap(), dipole_spectrum(&back, w).unwrap());
        let scale = s[2][2].re;
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[i][j] - s[j][i].conj()).norm() < 1e-10 * scale);
                assert!((s[i][j].re - s[j][i].re).abs() < 1e-10 * scale);
                // the x–z correlation flips with the direction of motion
                let parity = if i + j == 2 && i != j { -1.0 } else { 1.0 };
                assert!((s[i][j] - parity * r[i][j]).norm() < 1e-8 * scale, "{i}{j}");
            }
        }
        // the Doppler-odd correlation between x and z
        assert!(s[0][2].im.abs() > 1e-6 * scale);
    }
}
