use super::{integrate_1d, QuadResult, QuadSpec};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const MAX_DIM: usize = 5;

struct Region {
    center: [f64; MAX_DIM],
    half: [f64; MAX_DIM],
    value: f64,
    err: f64,
    split_dim: usize,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| {
            for i in 0..MAX_DIM {
                let c = other.center[i].total_cmp(&self.center[i]);
                if c != Ordering::Equal {
                    return c;
                }
            }
            Ordering::Equal
        })
    }
}

/// Genz–Malik degree-7 rule with embedded degree-5 error estimate.
struct GenzMalik {
    n: usize,
    w: [f64; 5],
    we: [f64; 4],
}

const L2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const L4: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)
const L5: f64 = 0.688_247_201_611_685_3; // sqrt(9/19)

impl GenzMalik {
    fn new(n: usize) -> Self {
        let nf = n as f64;
        let w = [
            (12824.0 - 9120.0 * nf + 400.0 * nf * nf) / 19683.0,
            980.0 / 6561.0,
            (1820.0 - 400.0 * nf) / 19683.0,
            200.0 / 19683.0,
            6859.0 / 19683.0 / f64::powi(2.0, n as i32),
        ];
        let we = [
            (729.0 - 950.0 * nf + 50.0 * nf * nf) / 729.0,
            245.0 / 486.0,
            (265.0 - 100.0 * nf) / 1458.0,
            25.0 / 729.0,
        ];
        Self { n, w, we }
    }

    fn evals(&self) -> usize {
        let n = self.n;
        1 + 4 * n + 2 * n * (n - 1) + (1 << n)
    }

    fn apply<F: Fn(&[f64]) -> f64>(&self, f: &F, c: &[f64; MAX_DIM], h: &[f64; MAX_DIM]) -> (f64, f64, usize) {
        let n = self.n;
        let mut x = *c;
        let f0 = f(&x[..n]);
        let mut s2 = 0.0;
        let mut s3 = 0.0;
        let mut best = 0;
        let mut best_diff = -1.0;
        let ratio = (L2 * L2) / (L4 * L4);
        for i in 0..n {
            x[i] = c[i] - L2 * h[i];
            let a = f(&x[..n]);
            x[i] = c[i] + L2 * h[i];
            let b = f(&x[..n]);
            x[i] = c[i] - L4 * h[i];
            let cc = f(&x[..n]);
            x[i] = c[i] + L4 * h[i];
            let d = f(&x[..n]);
            x[i] = c[i];
            s2 += a + b;
            s3 += cc + d;
            let diff = (a + b - 2.0 * f0 - ratio * (cc + d - 2.0 * f0)).abs();
            // ties go to the widest side
            if diff > best_diff * (1.0 + 1e-12) || (diff >= best_diff * (1.0 - 1e-12) && h[i] > h[best]) {
                best_diff = diff;
                best = i;
            }
        }
        let mut s4 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                for (si, sj) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
                    x[i] = c[i] + si * L4 * h[i];
                    x[j] = c[j] + sj * L4 * h[j];
                    s4 += f(&x[..n]);
                }
                x[i] = c[i];
                x[j] = c[j];
            }
        }
        let mut s5 = 0.0;
        for mask in 0..(1usize << n) {
            for i in 0..n {
                let s = if mask & (1 << i) != 0 { 1.0 } else { -1.0 };
                x[i] = c[i] + s * L5 * h[i];
            }
            s5 += f(&x[..n]);
        }
        let vol: f64 = h[..n].iter().map(|v| 2.0 * v).product();
        let r7 = vol * (self.w[0] * f0 + self.w[1] * s2 + self.w[2] * s3 + self.w[3] * s4 + self.w[4] * s5);
        let r5 = vol * (self.we[0] * f0 + self.we[1] * s2 + self.we[2] * s3 + self.we[3] * s4);
        let mut err = (r7 - r5).abs();
        let floor = 50.0 * f64::EPSILON * r7.abs();
        if err < floor {
            err = floor;
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        (r7, err, best)
    }
}

/// Globally adaptive cubature over the box `[lo, hi]` (finite bounds,
/// dimension 1..=5). One dimension falls back to Gauss–Kronrod.
pub fn integrate_nd<F: Fn(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64], spec: &QuadSpec) -> QuadResult {
    let n = lo.len();
    assert!(n == hi.len() && (1..=MAX_DIM).contains(&n), "integrate_nd supports 1..=5 dimensions");
    assert!(
        lo.iter().chain(hi.iter()).all(|v| v.is_finite()),
        "integrate_nd needs finite bounds; map infinite axes first"
    );
    if n == 1 {
        return integrate_1d(|x| f(&[x]), lo[0], hi[0], spec);
    }
    let rule = GenzMalik::new(n);
    let per = rule.evals();
    let mut c = [0.0; MAX_DIM];
    let mut h = [0.0; MAX_DIM];
    for i in 0..n {
        c[i] = 0.5 * (lo[i] + hi[i]);
        h[i] = 0.5 * (hi[i] - lo[i]);
    }
    let (v, e, d) = rule.apply(&f, &c, &h);
    let mut evals = per;
    let mut heap = BinaryHeap::new();
    heap.push(Region { center: c, half: h, value: v, err: e, split_dim: d });
    let mut total = v;
    let mut total_err = e;
    let mut converged = false;
    let mut refresh = 0usize;
    loop {
        if total_err <= spec.target(total) {
            converged = true;
            break;
        }
        if evals + 2 * per > spec.max_evals {
            break;
        }
        let Some(r) = heap.pop() else { break };
        let d = r.split_dim;
        let mut h2 = r.half;
        h2[d] *= 0.5;
        let mut c1 = r.center;
        c1[d] -= h2[d];
        let mut c2 = r.center;
        c2[d] += h2[d];
        let (v1, e1, d1) = rule.apply(&f, &c1, &h2);
        let (v2, e2, d2) = rule.apply(&f, &c2, &h2);
        evals += 2 * per;
        total += v1 + v2 - r.value;
        total_err += e1 + e2 - r.err;
        heap.push(Region { center: c1, half: h2, value: v1, err: e1, split_dim: d1 });
        heap.push(Region { center: c2, half: h2, value: v2, err: e2, split_dim: d2 });
        refresh += 1;
        if refresh % 4096 == 0 {
            // bound drift of the running sums
            total = heap.iter().map(|r| r.value).sum();
            total_err = heap.iter().map(|r| r.err).sum();
        }
    }
    let mut regions = heap.into_vec();
    regions.sort_by(|a, b| {
        for i in 0..n {
            let c = a.center[i].total_cmp(&b.center[i]);
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    });
    let value: f64 = regions.iter().map(|r| r.value).sum();
    let err: f64 = regions.iter().map(|r| r.err).sum();
    let converged = (converged && err <= spec.target(value) * (1.0 + 1e-6)) || err == 0.0;
    QuadResult { value, err_estimate: err, evals, converged }
}
