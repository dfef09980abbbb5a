//! Orthogonal polynomials on the unit circle: the Szegő recursion,
//! Christoffel products, Bernstein–Szegő weights and order estimates for
//! Verblunsky sequences and the Szegő function.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{coeffs_multi_radius, NumericsError};
use crate::parse::{parse_complex, parse_real};
use crate::report::fmt_num;

/// Order estimates above this are reported as infinite.
pub const INFINITE_ORDER: f64 = 50.0;
/// Nonzero coefficients needed for a finite order estimate.
pub const MIN_NONZERO: usize = 8;
/// Sampled coefficients within this multiple of their round-off bound are
/// treated as zero.
const NOISE_FACTOR: f64 = 100.0;
const RADIUS_CAP: f64 = 1e250;

#[derive(Debug, Error)]
pub enum OpucError {
    #[error("|alpha_{index}| = {modulus} is not below 1")]
    Modulus { index: usize, modulus: f64 },
    #[error("invalid Verblunsky specification: {0}")]
    Spec(String),
    #[error("Phi_N^* vanishes on the circle at theta = {theta}")]
    VanishingPhiStar { theta: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqKind {
    /// Explicit list; coefficients past the end are zero.
    Finite,
    /// Prefix of an infinite rule.
    Rule { name: String, scale: f64 },
}

/// Finite list of Verblunsky coefficients, each inside the unit disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerblunskySeq {
    alphas: Vec<Complex64>,
    kind: SeqKind,
}

impl VerblunskySeq {
    pub fn new(alphas: Vec<Complex64>) -> Result<Self, OpucError> {
        Self::with_kind(alphas, SeqKind::Finite)
    }

    fn with_kind(alphas: Vec<Complex64>, kind: SeqKind) -> Result<Self, OpucError> {
        for (index, a) in alphas.iter().enumerate() {
            let modulus = a.norm();
            if !(modulus < 1.0) {
                return Err(OpucError::Modulus { index, modulus });
            }
        }
        Ok(Self { alphas, kind })
    }

    /// `α_n = c / n!` for `n < len`.
    pub fn factorial(c: f64, len: usize) -> Result<Self, OpucError> {
        let mut v = Vec::with_capacity(len);
        let mut f = 1.0;
        for n in 0..len {
            if n > 0 {
                f *= n as f64;
            }
            v.push(Complex64::new(c / f, 0.0));
        }
        Self::with_kind(
            v,
            SeqKind::Rule {
                name: "factorial".into(),
                scale: c,
            },
        )
    }

    /// `α_n = c e^{−n²}` for `n < len`.
    pub fn gaussian(c: f64, len: usize) -> Result<Self, OpucError> {
        let v = (0..len)
            .map(|n| Complex64::new(c * (-((n * n) as f64)).exp(), 0.0))
            .collect();
        Self::with_kind(
            v,
            SeqKind::Rule {
                name: "gaussian".into(),
                scale: c,
            },
        )
    }

    /// Comma-separated complex list, e.g. `0.5,0.1-0.2i`.
    pub fn from_list(spec: &str) -> Result<Self, OpucError> {
        let alphas = spec
            .split(',')
            .map(|s| parse_complex(s.trim()).map_err(|e| OpucError::Spec(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(alphas)
    }

    /// `factorial:c,len` or `gaussian:c,len`.
    pub fn from_rule(spec: &str) -> Result<Self, OpucError> {
        let (name, args) = spec
            .split_once(':')
            .ok_or_else(|| OpucError::Spec(format!("expected name:c,len in '{spec}'")))?;
        let (c, len) = args
            .split_once(',')
            .ok_or_else(|| OpucError::Spec(format!("expected c,len in '{args}'")))?;
        let c = parse_real(c.trim()).map_err(|e| OpucError::Spec(e.to_string()))?;
        let len: usize = len
            .trim()
            .parse()
            .map_err(|_| OpucError::Spec(format!("bad length '{len}'")))?;
        match name.trim() {
            "factorial" => Self::factorial(c, len),
            "gaussian" => Self::gaussian(c, len),
            other => Err(OpucError::Spec(format!("unknown rule '{other}'"))),
        }
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn kind(&self) -> &SeqKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alpha(&self, n: usize) -> Complex64 {
        self.alphas.get(n).copied().unwrap_or_default()
    }

    /// CSV with header `n,Re_alpha,Im_alpha,lambda_n`, where `lambda_n` is
    /// the Christoffel product over `k < n`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "Re_alpha", "Im_alpha", "lambda_n"])?;
        let mut lambda = 1.0;
        for (n, a) in self.alphas.iter().enumerate() {
            out.write_record([n.to_string(), fmt_num(a.re), fmt_num(a.im), fmt_num(lambda)])?;
            lambda *= 1.0 - a.norm_sqr();
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for VerblunskySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SeqKind::Finite => write!(f, "list[{}]", self.alphas.len()),
            SeqKind::Rule { name, scale } => write!(f, "{name}:{scale},{}", self.alphas.len()),
        }
    }
}

/// `Φ_n(z)` and `Φ_n^*(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpucState {
    pub z: Complex64,
    pub n: usize,
    pub phi: Complex64,
    pub phi_star: Complex64,
}

/// `Φ_{k+1} = zΦ_k − ᾱ_k Φ_k^*`, `Φ_{k+1}^* = Φ_k^* − α_k z Φ_k` from `(1, 1)`.
pub fn szego_recursion(v: &VerblunskySeq, z: Complex64, n: usize) -> OpucState {
    let (mut phi, mut star) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..n {
        let a = v.alpha(k);
        let next = z * phi - a.conj() * star;
        star -= a * z * phi;
        phi = next;
    }
    OpucState {
        z,
        n,
        phi,
        phi_star: star,
    }
}

/// `λ_n(0) = ∏_{k<n} (1 − |α_k|²)`.
pub fn christoffel_lambda(v: &VerblunskySeq, n: usize) -> f64 {
    (0..n).map(|k| 1.0 - v.alpha(k).norm_sqr()).product()
}

/// `Π(0) = λ_∞(0)^{−1/2}`.
pub fn pi_at_zero(v: &VerblunskySeq) -> f64 {
    christoffel_lambda(v, v.len()).powf(-0.5)
}

/// `Π(z) = Π(0) Φ_N^*(z)`.
pub fn pi_from_phis(v: &VerblunskySeq, z: Complex64) -> Complex64 {
    szego_recursion(v, z, v.len()).phi_star * pi_at_zero(v)
}

/// Bernstein–Szegő density `|Π(e^{iθ})|^{−2}`.
pub fn bs_weight(v: &VerblunskySeq, theta: f64) -> Result<f64, OpucError> {
    let star = szego_recursion(v, Complex64::from_polar(1.0, theta), v.len()).phi_star;
    let m = star.norm_sqr();
    if !(m > 1e-300) {
        return Err(OpucError::VanishingPhiStar { theta });
    }
    Ok(christoffel_lambda(v, v.len()) / m)
}

const GRAM_START_POINTS: usize = 256;
const GRAM_MAX_POINTS: usize = 1 << 20;
const GRAM_TOL: f64 = 1e-13;

/// Trapezoid sums of `Φ_j conj(Φ_k) w` over the points `θ_i = 2π(offset + i·stride)/m`.
fn gram_partial(
    v: &VerblunskySeq,
    n: usize,
    m: usize,
    offset: usize,
    stride: usize,
) -> Result<Vec<Vec<Complex64>>, OpucError> {
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    let mut phis = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut i = offset;
    while i < m {
        let theta = 2.0 * PI * i as f64 / m as f64;
        let z = Complex64::from_polar(1.0, theta);
        let w = bs_weight(v, theta)?;
        let (mut phi, mut star) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for (k, slot) in phis.iter_mut().enumerate() {
            *slot = phi;
            if k < n {
                let a = v.alpha(k);
                let next = z * phi - a.conj() * star;
                star -= a * z * phi;
                phi = next;
            }
        }
        for j in 0..=n {
            for k in 0..=n {
                acc[j][k] += phis[j] * phis[k].conj() * w;
            }
        }
        i += stride;
    }
    Ok(acc)
}

/// Gram matrix of `Φ_0..=Φ_n` under the Bernstein–Szegő weight. The trapezoid
/// rule is refined by doubling until successive sums agree, since zeros of
/// `Φ_N` near the circle slow its geometric convergence.
pub fn gram_matrix(v: &VerblunskySeq, n: usize) -> Result<Vec<Vec<Complex64>>, OpucError> {
    let mut m = GRAM_START_POINTS;
    let mut sum = gram_partial(v, n, m, 0, 1)?;
    let scale = |s: &Vec<Vec<Complex64>>, m: usize| -> Vec<Vec<Complex64>> {
        s.iter()
            .map(|row| row.iter().map(|x| x / m as f64).collect())
            .collect()
    };
    loop {
        let odd = gram_partial(v, n, 2 * m, 1, 2)?;
        let coarse = scale(&sum, m);
        for (row, extra) in sum.iter_mut().zip(odd) {
            for (x, y) in row.iter_mut().zip(extra) {
                *x += y;
            }
        }
        m *= 2;
        let fine = scale(&sum, m);
        let size = fine.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
        let change = fine
            .iter()
            .flatten()
            .zip(coarse.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if change <= GRAM_TOL * (1.0 + size) || m >= GRAM_MAX_POINTS {
            return Ok(fine);
        }
    }
}

/// `⟨Φ_j, Φ_k⟩` under the Bernstein–Szegő weight.
pub fn orthogonality_check(v: &VerblunskySeq, j: usize, k: usize) -> Result<Complex64, OpucError> {
    Ok(gram_matrix(v, j.max(k))?[j][k])
}

/// Largest off-diagonal modulus of a Gram matrix.
pub fn max_off_diagonal(g: &[Vec<Complex64>]) -> f64 {
    let mut m = 0.0_f64;
    for (j, row) in g.iter().enumerate() {
        for (k, x) in row.iter().enumerate() {
            if j != k {
                m = m.max(x.norm());
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderEstimate {
    /// Finitely many nonzero coefficients: order 0.
    Polynomial,
    Finite {
        rho: f64,
        /// Index range used for the estimate.
        window: (usize, usize),
    },
    Infinite,
}

impl OrderEstimate {
    /// Numeric order (0 for polynomials, ∞ for infinite).
    pub fn value(&self) -> f64 {
        match self {
            OrderEstimate::Polynomial => 0.0,
            OrderEstimate::Finite { rho, .. } => *rho,
            OrderEstimate::Infinite => f64::INFINITY,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, OrderEstimate::Polynomial)
    }
}

/// Order of an entire function from Taylor coefficients.
///
/// On the trailing half of the nonzero coefficients `−ln|f_n|` is fitted by
/// least squares to `β n ln n + γ n + δ`; the order is `1/β`. Sequences that
/// end in a run of zeros covering that half, or have fewer than
/// `MIN_NONZERO` nonzero entries past index 0, are polynomial.
pub fn order_estimate(coeffs: &[Complex64]) -> OrderEstimate {
    let nonzero: Vec<usize> = (1..coeffs.len())
        .filter(|&n| coeffs[n].norm() > 0.0)
        .collect();
    if nonzero.len() < MIN_NONZERO {
        return OrderEstimate::Polynomial;
    }
    let last = *nonzero.last().expect("nonempty");
    if coeffs.len() - 1 - last >= coeffs.len() / 2 {
        return OrderEstimate::Polynomial;
    }
    let used: Vec<usize> = nonzero[nonzero.len() / 2..]
        .iter()
        .copied()
        .filter(|&n| n >= 2)
        .collect();
    let rows: Vec<[f64; 3]> = used
        .iter()
        .map(|&n| {
            let x = n as f64;
            [x * x.ln(), x, 1.0]
        })
        .collect();
    let y: Vec<f64> = used.iter().map(|&n| -coeffs[n].norm().ln()).collect();
    let beta = match least_squares3(&rows, &y) {
        Some(b) => b[0],
        None => return OrderEstimate::Infinite,
    };
    if !(beta > 1.0 / INFINITE_ORDER) {
        return OrderEstimate::Infinite;
    }
    OrderEstimate::Finite {
        rho: 1.0 / beta,
        window: (used[0], *used.last().expect("nonempty")),
    }
}

/// Normal-equation solve for three regressors.
fn least_squares3(rows: &[[f64; 3]], y: &[f64]) -> Option<[f64; 3]> {
    if rows.len() < 3 {
        return None;
    }
    // Column scaling keeps the normal matrix well conditioned.
    let mut scale = [0.0_f64; 3];
    for r in rows {
        for i in 0..3 {
            scale[i] = scale[i].max(r[i].abs());
        }
    }
    let mut a = nalgebra::Matrix3::<f64>::zeros();
    let mut b = nalgebra::Vector3::<f64>::zeros();
    for (r, yi) in rows.iter().zip(y) {
        let s = [r[0] / scale[0], r[1] / scale[1], r[2] / scale[2]];
        for i in 0..3 {
            b[i] += s[i] * yi;
            for j in 0..3 {
                a[(i, j)] += s[i] * s[j];
            }
        }
    }
    let x = a.lu().solve(&b)?;
    Some([x[0] / scale[0], x[1] / scale[1], x[2] / scale[2]])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderComparison {
    pub rho_alpha: OrderEstimate,
    pub rho_pi: OrderEstimate,
    /// Taylor coefficients of `Π` kept as reliable.
    pub pi_coefficients: usize,
}

/// Taylor coefficients of `Π` from samples on several circles; entries
/// within `NOISE_FACTOR` times their round-off bound are zero.
pub fn pi_taylor_coeffs(v: &VerblunskySeq, degree: usize) -> Result<Vec<Complex64>, OpucError> {
    let mut radii: Vec<f64> = vec![1.5];
    while let Some(&r) = radii.last() {
        let next = 2.0 * r;
        if next.powi(degree.max(1) as i32) >= RADIUS_CAP || radii.len() >= 200 {
            break;
        }
        radii.push(next);
    }
    let est = coeffs_multi_radius(|z| pi_from_phis(v, z), degree, &radii)?;
    Ok(est
        .into_iter()
        .map(|c| {
            if c.value.norm() <= NOISE_FACTOR * c.error_bound {
                Complex64::new(0.0, 0.0)
            } else {
                c.value
            }
        })
        .collect())
}

/// Orders of `Σ α_n zⁿ` and of `Π`.
pub fn compare_orders(v: &VerblunskySeq) -> Result<OrderComparison, OpucError> {
    match v.kind {
        SeqKind::Finite => {
            // Pad so the terminating zeros are visible to the estimator.
            let pad = v.len() + MIN_NONZERO;
            let mut alphas = v.alphas.clone();
            alphas.resize(v.len() + pad, Complex64::new(0.0, 0.0));
            let pi = pi_taylor_coeffs(v, v.len() + pad)?;
            Ok(OrderComparison {
                rho_alpha: order_estimate(&alphas),
                rho_pi: order_estimate(&pi),
                pi_coefficients: pi.len(),
            })
        }
        SeqKind::Rule { .. } => {
            // Π of a prefix is a polynomial of degree N; keep the reliable
            // coefficients below the top one.
            let degree = v.len().saturating_sub(1);
            let mut pi = pi_taylor_coeffs(v, degree)?;
            if let Some(cut) = pi.iter().skip(1).position(|c| c.norm() == 0.0) {
                pi.truncate(cut + 1);
            }
            Ok(OrderComparison {
                rho_alpha: order_estimate(&v.alphas),
                rho_pi: order_estimate(&pi),
                pi_coefficients: pi.len(),
            })
        }
    }
}
