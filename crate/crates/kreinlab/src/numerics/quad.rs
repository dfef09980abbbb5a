use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{NumericsError, Scalar};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Target: |Q - I| <= tol * (1 + |Q|).
    pub tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<S> {
    pub value: S,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<S: Scalar, F: Fn(f64) -> S>(f: &F, a: f64, b: f64) -> (S, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.scale(WGK[7]);
    let mut gauss = fc.scale(WG[3]);
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += s.scale(WGK[i]);
        if i % 2 == 1 {
            gauss += s.scale(WG[i / 2]);
        }
    }
    let kron = kron.scale(h);
    let gauss = gauss.scale(h);
    (kron, (kron - gauss).modulus())
}

struct Interval<S> {
    a: f64,
    b: f64,
    value: S,
    error: f64,
}

impl<S> PartialEq for Interval<S> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<S> Eq for Interval<S> {}
impl<S> PartialOrd for Interval<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for Interval<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`.
pub fn adaptive_quad<S: Scalar, F: Fn(f64) -> S>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<S, NumericsError> {
    adaptive_quad_with(f, a, b, &[], QuadOptions::with_tol(tol)).map(|r| r.value)
}

/// Adaptive quadrature with forced subdivision points.
pub fn adaptive_quad_with<S: Scalar, F: Fn(f64) -> S>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<S>, NumericsError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::Domain(
            "integration bounds must be finite".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(NumericsError::Domain("tolerance must be positive".into()));
    }
    if a > b {
        return Err(NumericsError::Domain(format!(
            "reversed interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: S::zero(),
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Interval<S>> = Vec::new();
    let mut evaluations = 0;
    for w in cuts.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        evaluations += 15;
        heap.push(Interval {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }
    loop {
        let mut total = S::zero();
        let mut err = 0.0;
        for iv in heap.iter().chain(frozen.iter()) {
            total += iv.value;
            err += iv.error;
        }
        if !err.is_finite() || !total.modulus().is_finite() {
            return Err(NumericsError::NonConvergence {
                best: total.to_c64(),
                achieved: f64::INFINITY,
            });
        }
        let target = opts.tol * (1.0 + total.modulus());
        if err <= target || heap.is_empty() {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if heap.len() + frozen.len() >= opts.max_intervals {
            return Err(NumericsError::NonConvergence {
                best: total.to_c64(),
                achieved: err,
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, lo, hi);
            evaluations += 15;
            heap.push(Interval {
                a: lo,
                b: hi,
                value,
                error,
            });
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> QuadRule {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
            break;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    QuadRule { nodes, weights }
}

impl QuadRule {
    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

pub fn fixed_quad<S: Scalar, F: Fn(f64) -> S>(f: F, a: f64, b: f64, rule: &QuadRule) -> S {
    rule.mapped(a, b)
        .fold(S::zero(), |acc, (x, w)| acc + f(x).scale(w))
}

fn wynn_epsilon<S: Scalar>(s: &[S]) -> S {
    let n = s.len();
    let mut best = s[n - 1];
    let mut prev = vec![S::zero(); n + 1];
    let mut cur = s.to_vec();
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for j in 0..n - k {
            let d = cur[j + 1] - cur[j];
            if d.modulus() <= 1e-300 {
                return best;
            }
            next.push(prev[j + 1] + S::one() / d);
        }
        if k % 2 == 0 {
            let candidate = next[n - k - 1];
            if !candidate.modulus().is_finite() {
                return best;
            }
            best = candidate;
        }
        prev = cur;
        cur = next;
    }
    best
}

/// `∫_start^∞ f` for an integrand that changes sign at each point yielded by
/// `zeros` (increasing, first one `>= start`). Panels between consecutive
/// zeros are integrated adaptively and the alternating partial sums are
/// accelerated with the Wynn epsilon algorithm.
pub fn alternating_tail<S, F, Z>(
    f: F,
    start: f64,
    zeros: Z,
    opts: QuadOptions,
    max_panels: usize,
) -> Result<QuadResult<S>, NumericsError>
where
    S: Scalar,
    F: Fn(f64) -> S,
    Z: IntoIterator<Item = f64>,
{
    const WINDOW: usize = 24;
    const MIN_PANELS: usize = 10;
    let panel_opts = QuadOptions {
        tol: opts.tol * 0.1,
        max_intervals: opts.max_intervals,
    };
    let mut sums: Vec<S> = Vec::new();
    let mut estimates: Vec<S> = Vec::new();
    let mut acc = S::zero();
    let mut evaluations = 0;
    let mut left = start;
    for z in zeros.into_iter().take(max_panels) {
        if z < left {
            return Err(NumericsError::Domain("zeros must be increasing".into()));
        }
        if z > left {
            let r = adaptive_quad_with(&f, left, z, &[], panel_opts)?;
            evaluations += r.evaluations;
            acc += r.value;
        }
        left = z;
        sums.push(acc);
        if sums.len() >= MIN_PANELS {
            let lo = sums.len().saturating_sub(WINDOW);
            estimates.push(wynn_epsilon(&sums[lo..]));
            let m = estimates.len();
            if m >= 3 {
                let d1 = (estimates[m - 1] - estimates[m - 2]).modulus();
                let d2 = (estimates[m - 2] - estimates[m - 3]).modulus();
                let best = estimates[m - 1];
                if d1.max(d2) <= opts.tol * (1.0 + best.modulus()) {
                    return Ok(QuadResult {
                        value: best,
                        error: d1 + d2,
                        evaluations,
                    });
                }
            }
        }
    }
    let best = estimates.last().copied().unwrap_or(acc);
    let m = estimates.len();
    let achieved = if m >= 2 {
        (estimates[m - 1] - estimates[m - 2]).modulus()
    } else {
        f64::INFINITY
    };
    Err(NumericsError::NonConvergence {
        best: best.to_c64(),
        achieved,
    })
}
