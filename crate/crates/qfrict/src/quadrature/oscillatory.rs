//! Filon-type quadrature for ∫ g(t) e^{iνt} dt.
//!
//! On each panel the envelope is expanded in Legendre polynomials; the
//! moments ∫ P_n(x) e^{iωx} dx = 2 iⁿ j_n(ω) are exact, so the cost does
//! not grow with the number of oscillations inside a panel.

use super::{gauss_legendre, QuadResult, QuadSpec};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

const ORDER: usize = 24;
const MAX_PANEL_PHASE: f64 = 40.0;

struct Legendre {
    x: [f64; ORDER],
    w: [f64; ORDER],
    // p[n][j] = P_n(x_j)
    p: Vec<[f64; ORDER]>,
}

fn legendre_table() -> &'static Legendre {
    static TABLE: OnceLock<Legendre> = OnceLock::new();
    TABLE.get_or_init(|| {
        let (xs, ws) = gauss_legendre(ORDER);
        let mut x = [0.0; ORDER];
        let mut w = [0.0; ORDER];
        x.copy_from_slice(&xs);
        w.copy_from_slice(&ws);
        let mut p = vec![[0.0; ORDER]; ORDER];
        for j in 0..ORDER {
            let mut p0 = 1.0;
            let mut p1 = x[j];
            p[0][j] = 1.0;
            p[1][j] = p1;
            for k in 2..ORDER {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x[j] * p1 - (kf - 1.0) * p0) / kf;
                p[k][j] = p2;
                p0 = p1;
                p1 = p2;
            }
        }
        Legendre { x, w, p }
    })
}

/// Spherical Bessel functions j_0..j_{ORDER-1} at real argument.
fn spherical_bessel(x: f64) -> [f64; ORDER] {
    let mut out = [0.0; ORDER];
    let ax = x.abs();
    if ax < 1.0 {
        // power series, (2n+1)!! built incrementally
        let mut dfact = 1.0;
        let mut xn = 1.0;
        for (n, o) in out.iter_mut().enumerate() {
            if n > 0 {
                dfact *= (2 * n + 1) as f64;
                xn *= ax;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..30 {
                term *= -0.5 * ax * ax / (k as f64 * (2 * n + 2 * k + 1) as f64);
                sum += term;
                if term.abs() < 1e-17 * sum.abs() {
                    break;
                }
            }
            *o = xn / dfact * sum;
        }
    } else {
        // Miller backward recurrence normalised with Σ(2n+1)j_n² = 1
        let start = (ORDER as f64 + ax + 10.0 * ax.sqrt() + 40.0) as usize;
        let mut jp1 = 0.0;
        let mut j = 1.0;
        let mut buf = vec![0.0; start + 1];
        buf[start] = j;
        let mut norm = (2 * start + 1) as f64 * j * j;
        for n in (1..=start).rev() {
            let jm1 = (2 * n + 1) as f64 / ax * j - jp1;
            jp1 = j;
            j = jm1;
            buf[n - 1] = j;
            norm += (2 * n - 1) as f64 * j * j;
            if j.abs() > 1e100 {
                for b in buf.iter_mut().skip(n - 1) {
                    *b *= 1e-100;
                }
                jp1 *= 1e-100;
                j *= 1e-100;
                norm *= 1e-200;
            }
        }
        let s = 1.0 / norm.sqrt();
        // fix the overall sign with j_0 or j_1, whichever is larger
        let j0 = ax.sin() / ax;
        let j1 = ax.sin() / (ax * ax) - ax.cos() / ax;
        let sign = if j0.abs() > j1.abs() { j0.signum() * buf[0].signum() } else { j1.signum() * buf[1].signum() };
        for n in 0..ORDER {
            out[n] = sign * s * buf[n];
        }
    }
    if x < 0.0 {
        for (n, o) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *o = -*o;
            }
        }
    }
    out
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn panel<G: Fn(f64) -> Complex64>(g: &G, nu: f64, a: f64, b: f64) -> (Complex64, f64) {
    let t = legendre_table();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut gv = [Complex64::new(0.0, 0.0); ORDER];
    for j in 0..ORDER {
        gv[j] = g(c + h * t.x[j]);
    }
    let jn = spherical_bessel(nu * h);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    let mut scale = 0.0;
    for n in 0..ORDER {
        let mut cn = Complex64::new(0.0, 0.0);
        for j in 0..ORDER {
            cn += gv[j] * (t.w[j] * t.p[n][j]);
        }
        cn *= (2 * n + 1) as f64 / 2.0;
        sum += cn * i_pow(n) * (2.0 * jn[n]);
        scale = f64::max(scale, cn.norm());
        if n + 4 >= ORDER {
            tail += cn.norm();
        }
    }
    let value = sum * Complex64::from_polar(h, nu * c);
    let mut err = 2.0 * h.abs() * tail;
    err = err.max(100.0 * f64::EPSILON * 2.0 * h.abs() * scale);
    (value, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}
impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then_with(|| o.a.total_cmp(&self.a))
    }
}

fn finite<G: Fn(f64) -> Complex64>(g: &G, nu: f64, a: f64, b: f64, spec: &QuadSpec) -> QuadResult<Complex64> {
    if a == b {
        return QuadResult { value: Complex64::new(0.0, 0.0), err_estimate: 0.0, evals: 0, converged: true };
    }
    let pieces0 = ((nu.abs() * (b - a).abs() / (2.0 * MAX_PANEL_PHASE)).ceil() as usize).max(1);
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_err = 0.0;
    for k in 0..pieces0 {
        let x0 = a + (b - a) * k as f64 / pieces0 as f64;
        let x1 = a + (b - a) * (k + 1) as f64 / pieces0 as f64;
        let (v, e) = panel(g, nu, x0, x1);
        evals += ORDER;
        total += v;
        total_err += e;
        heap.push(Piece { a: x0, b: x1, value: v, err: e });
    }
    let mut converged = false;
    loop {
        if total_err <= spec.target(total.norm()) {
            converged = true;
            break;
        }
        if evals + 2 * ORDER > spec.max_evals {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a.min(p.b) && m < p.a.max(p.b)) {
            heap.push(p);
            break;
        }
        let (v1, e1) = panel(g, nu, p.a, m);
        let (v2, e2) = panel(g, nu, m, p.b);
        evals += 2 * ORDER;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, err: e2 });
    }
    let mut pieces = heap.into_vec();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = pieces.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let err: f64 = pieces.iter().map(|p| p.err).sum();
    QuadResult { value, err_estimate: err, evals, converged: converged || err <= spec.target(value.norm()) }
}

/// ∫_a^b g(t) e^{iνt} dt. `b` may be +∞, in which case the envelope must
/// decay; panels of doubling length are added until they stop contributing.
pub fn integrate_oscillatory<G: Fn(f64) -> Complex64>(
    envelope: G,
    phase_rate: f64,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> QuadResult<Complex64> {
    if b.is_finite() {
        return finite(&envelope, phase_rate, a, b, spec);
    }
    let mut len = 1.0f64.max(a.abs());
    let mut lo = a;
    let mut parts: Vec<QuadResult<Complex64>> = Vec::new();
    let mut quiet = 0;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..64 {
        let hi = lo + len;
        let r = finite(&envelope, phase_rate, lo, hi, spec);
        let contribution = r.value.norm() + r.err_estimate;
        acc += r.value;
        parts.push(r);
        let tiny = contribution <= 1e-3 * spec.target(acc.norm()).max(f64::MIN_POSITIVE)
            && envelope(hi).norm() * len <= 1e-3 * spec.target(acc.norm()).max(f64::MIN_POSITIVE);
        quiet = if tiny { quiet + 1 } else { 0 };
        if quiet >= 2 {
            break;
        }
        lo = hi;
        len *= 2.0;
    }
    let value = parts.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    QuadResult {
        value,
        err_estimate: parts.iter().map(|p| p.err_estimate).sum(),
        evals: parts.iter().map(|p| p.evals).sum(),
        converged: quiet >= 2 && parts.iter().all(|p| p.converged),
    }
}

/// ∫_{-∞}^{∞} g(t) e^{iνt} dt for a decaying envelope.
pub fn integrate_oscillatory_whole_line<G: Fn(f64) -> Complex64>(
    envelope: G,
    phase_rate: f64,
    spec: &QuadSpec,
) -> QuadResult<Complex64> {
    let right = integrate_oscillatory(&envelope, phase_rate, 0.0, f64::INFINITY, spec);
    let left = integrate_oscillatory(|t| envelope(-t), -phase_rate, 0.0, f64::INFINITY, spec);
    QuadResult {
        value: right.value + left.value,
        err_estimate: right.err_estimate + left.err_estimate,
        evals: right.evals + left.evals,
        converged: right.converged && left.converged,
    }
}

/// Filon rule for uniformly sampled data: the piecewise-linear interpolant
/// times e^{iνt} is integrated exactly. Error estimated against spacing 2h.
pub fn filon_samples(t0: f64, dt: f64, samples: &[f64], nu: f64) -> QuadResult<Complex64> {
    let fine = filon_linear(t0, dt, samples, nu, 1);
    let coarse = if samples.len() >= 5 { filon_linear(t0, dt, samples, nu, 2) } else { fine };
    let err = (fine - coarse).norm() / 3.0;
    QuadResult { value: fine, err_estimate: err, evals: samples.len(), converged: true }
}

fn filon_linear(t0: f64, dt: f64, samples: &[f64], nu: f64, stride: usize) -> Complex64 {
    let h = dt * stride as f64;
    let th = nu * h;
    let i = Complex64::new(0.0, 1.0);
    let (i0, i1) = if th.abs() < 1e-3 {
        (
            Complex64::new(1.0 - th * th / 6.0, th / 2.0 - th.powi(3) / 24.0) * h,
            Complex64::new(0.5 - th * th / 8.0, th / 3.0 - th.powi(3) / 30.0) * h,
        )
    } else {
        let e = Complex64::from_polar(1.0, th);
        let i0 = (e - 1.0) / (i * nu);
        let i1 = (e * h / (i * nu) - (e - 1.0) / ((i * nu) * (i * nu))) / h;
        (i0, i1)
    };
    let last = (samples.len() - 1) / stride * stride;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut j = 0;
    while j + stride <= last {
        let t = t0 + dt * j as f64;
        let phase = Complex64::from_polar(1.0, nu * t);
        sum += phase * ((i0 - i1) * samples[j] + i1 * samples[j + stride]);
        j += stride;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_matches_closed_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 40.0, 150.0] {
            let j = spherical_bessel(x);
            let j0 = x.sin() / x;
            let j1 = x.sin() / (x * x) - x.cos() / x;
            let j2 = (3.0 / (x * x) - 1.0) * x.sin() / x - 3.0 * x.cos() / (x * x);
            assert!((j[0] - j0).abs() < 1e-13, "x={x}");
            assert!((j[1] - j1).abs() < 1e-13, "x={x}");
            assert!((j[2] - j2).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn damped_exponential_semi_infinite() {
        let r = integrate_oscillatory(|t| Complex64::new((-t).exp(), 0.0), 10.0, 0.0, f64::INFINITY, &QuadSpec::default().with_rel_tol(1e-12));
        let exact = Complex64::new(1.0, 10.0) / 101.0;
        assert!((r.value - exact).norm() < 1e-10, "{:?}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn zero_rate_is_length() {
        let r = integrate_oscillatory(|_| Complex64::new(1.0, 0.0), 0.0, 0.0, 3.5, &QuadSpec::default());
        assert!((r.value - 3.5).norm() < 1e-13);
    }

    #[test]
    fn very_oscillatory_window() {
        // |ν|(b−a) = 1e4
        let nu = 1e4;
        let r = integrate_oscillatory(|t| Complex64::new(t * t, 0.0), nu, 0.0, 1.0, &QuadSpec::default().with_rel_tol(1e-10));
        let i = Complex64::new(0.0, 1.0);
        let e = Complex64::from_polar(1.0, nu);
        // ∫ t² e^{iνt} = e^{iν}(1/(iν) + 2/ν² - 2/(iν³)) - 2/(iν³)·(-1)... evaluated directly
        let prim = |t: f64| Complex64::from_polar(1.0, nu * t) * (t * t / (i * nu) + 2.0 * t / (nu * nu) - 2.0 / (i * nu * nu * nu));
        let exact = prim(1.0) - prim(0.0);
        let _ = e;
        assert!((r.value - exact).norm() < 1e-10 * exact.norm(), "{:?} {:?}", r.value, exact);
    }

    #[test]
    fn filon_samples_linear_exact() {
        let n = 101;
        let dt = 0.01;
        let s: Vec<f64> = (0..n).map(|k| 1.0 + 2.0 * k as f64 * dt).collect();
        let r = filon_samples(0.0, dt, &s, 7.0);
        let i = Complex64::new(0.0, 1.0);
        let prim = |t: f64| Complex64::from_polar(1.0, 7.0 * t) * ((1.0 + 2.0 * t) / (i * 7.0) - 2.0 / ((i * 7.0) * (i * 7.0)));
        assert!((r.value - (prim(1.0) - prim(0.0))).norm() < 1e-12);
    }
}
