//! Ordered exponentials of `A = ((−q, p), (p, q))` on `[0, 1]`, the Gram
//! determinant `F_A(s)`, its Taylor coefficients and the variation
//! statistics that bound them.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, SVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{gauss_legendre, integrate, Grid, NumericsError, OdeOptions, Scalar};

/// Intervals of the shared uniform t-grid on `[0, 1]`.
pub const GRID_INTERVALS: usize = 2048;
/// Tail estimate above which a truncated series carries a warning.
pub const SERIES_TOL: f64 = 1e-8;
/// Default ODE tolerance for `F_A`.
pub const F_TOL: f64 = 1e-12;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Cumulative integral on a uniform grid with the local cubic rule
/// (exact for cubics).
pub fn cumulative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() - 1;
    let mut out = vec![0.0; n + 1];
    if n == 0 {
        return out;
    }
    if n < 3 {
        for j in 0..n {
            out[j + 1] = out[j] + 0.5 * h * (values[j] + values[j + 1]);
        }
        return out;
    }
    let f = values;
    for j in 0..n {
        let seg = if j == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else if j == n - 1 {
            f[n - 3] - 5.0 * f[n - 2] + 19.0 * f[n - 1] + 9.0 * f[n]
        } else {
            -f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]
        };
        out[j + 1] = out[j] + h / 24.0 * seg;
    }
    out
}

fn cumulative_mat(values: &[Matrix2<f64>], h: f64) -> Vec<Matrix2<f64>> {
    let mut out = vec![Matrix2::zeros(); values.len()];
    for i in 0..2 {
        for j in 0..2 {
            let col: Vec<f64> = values.iter().map(|m| m[(i, j)]).collect();
            for (k, v) in cumulative(&col, h).into_iter().enumerate() {
                out[k][(i, j)] = v;
            }
        }
    }
    out
}

/// Cubic Lagrange interpolation of grid values at `t ∈ [0, 1]`.
fn interp(values: &[f64], t: f64) -> f64 {
    let n = values.len() - 1;
    let x = t * n as f64;
    let j = x.round();
    if (x - j).abs() < 1e-9 {
        return values[j as usize];
    }
    let base = (x.floor() as usize)
        .saturating_sub(1)
        .min(n.saturating_sub(3));
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (x - (base + b) as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * values[base + a];
    }
    acc
}

fn interp_mat(values: &[Matrix2<f64>], t: f64) -> Matrix2<f64> {
    let mut out = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let col: Vec<f64> = values.iter().map(|m| m[(i, j)]).collect();
            out[(i, j)] = interp(&col, t);
        }
    }
    out
}

fn t_nodes() -> Vec<f64> {
    (0..=GRID_INTERVALS)
        .map(|k| k as f64 / GRID_INTERVALS as f64)
        .collect()
}

const H: f64 = 1.0 / GRID_INTERVALS as f64;

/// Pair of real coefficient functions on `[0, 1]`.
#[derive(Clone)]
pub struct CoeffPair {
    p: RealFn,
    q: RealFn,
    breakpoints: Vec<f64>,
    label: String,
}

impl fmt::Debug for CoeffPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoeffPair({})", self.label)
    }
}

impl CoeffPair {
    pub fn new(
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        q: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            p: Arc::new(p),
            q: Arc::new(q),
            breakpoints: Vec::new(),
            label: "custom".into(),
        }
    }

    pub fn constant(p0: f64, q0: f64) -> Self {
        Self::new(move |_| p0, move |_| q0).labelled(format!("p={p0}, q={q0}"))
    }

    pub fn zero() -> Self {
        Self::constant(0.0, 0.0)
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Points in `(0, 1)` where `p` or `q` may jump.
    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self, t: f64) -> f64 {
        (self.p)(t)
    }

    pub fn q(&self, t: f64) -> f64 {
        (self.q)(t)
    }

    pub fn p_fn(&self) -> RealFn {
        self.p.clone()
    }

    pub fn q_fn(&self) -> RealFn {
        self.q.clone()
    }

    /// `A(t) = ((−q, p), (p, q))`.
    pub fn generator(&self, t: f64) -> Matrix2<f64> {
        let (p, q) = (self.p(t), self.q(t));
        Matrix2::new(-q, p, p, q)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let (p, q) = (self.p.clone(), self.q.clone());
        Self {
            p: Arc::new(move |t| s * p(t)),
            q: Arc::new(move |t| s * q(t)),
            breakpoints: self.breakpoints.clone(),
            label: format!("{s}*({})", self.label),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Trigonometric polynomials of frequency ≤ `max_freq` with prescribed
    /// L² norms on `[0, 1]`.
    pub fn random_trig<R: Rng>(rng: &mut R, max_freq: usize, norm_p: f64, norm_q: f64) -> Self {
        let p = random_trig_fn(rng, max_freq, norm_p);
        let q = random_trig_fn(rng, max_freq, norm_q);
        Self {
            p,
            q,
            breakpoints: Vec::new(),
            label: format!("trig(freq<={max_freq}, |p|={norm_p:.3}, |q|={norm_q:.3})"),
        }
    }

    fn samples(&self) -> (Vec<f64>, Vec<f64>) {
        let t = t_nodes();
        (
            t.iter().map(|&x| self.p(x)).collect(),
            t.iter().map(|&x| self.q(x)).collect(),
        )
    }

    /// `g_p` and `g_q` on the shared grid.
    pub fn antiderivatives(&self) -> (Vec<f64>, Vec<f64>) {
        let (p, q) = self.samples();
        (cumulative(&p, H), cumulative(&q, H))
    }
}

/// `a_0 + Σ a_k cos(2πkt) + b_k sin(2πkt)` scaled to the given L² norm.
pub fn random_trig_fn<R: Rng>(rng: &mut R, max_freq: usize, norm: f64) -> RealFn {
    let a0: f64 = rng.gen_range(-1.0..1.0);
    let ab: Vec<(f64, f64)> = (0..max_freq)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let raw = (a0 * a0 + 0.5 * ab.iter().map(|(a, b)| a * a + b * b).sum::<f64>()).sqrt();
    let scale = if raw > 0.0 { norm / raw } else { 0.0 };
    Arc::new(move |t: f64| {
        let mut v = a0;
        for (k, (a, b)) in ab.iter().enumerate() {
            let w = 2.0 * std::f64::consts::PI * (k + 1) as f64 * t;
            v += a * w.cos() + b * w.sin();
        }
        scale * v
    })
}

/// Trigonometric functions with `‖f‖ ≤ delta_max`; their antiderivatives
/// satisfy `D(F) ≤ ‖f‖² ≤ delta_max²`.
pub fn random_admissible_family<R: Rng>(rng: &mut R, size: usize, delta_max: f64) -> Vec<RealFn> {
    (0..size)
        .map(|_| {
            let freq = rng.gen_range(1..=4);
            let norm = rng.gen_range(0.2..=1.0) * delta_max;
            random_trig_fn(rng, freq, norm)
        })
        .collect()
}

/// Path of `(f₁⋯f_n)_t` on the shared grid, innermost integral first.
pub fn iterated_integral_path(fs: &[&dyn Fn(f64) -> f64]) -> Result<Vec<f64>, NumericsError> {
    if fs.is_empty() {
        return Err(NumericsError::Domain("empty list of integrands".into()));
    }
    let t = t_nodes();
    let mut inner: Option<Vec<f64>> = None;
    for f in fs.iter().rev() {
        let vals: Vec<f64> = match &inner {
            None => t.iter().map(|&x| f(x)).collect(),
            Some(prev) => t.iter().zip(prev).map(|(&x, v)| f(x) * v).collect(),
        };
        inner = Some(cumulative(&vals, H));
    }
    Ok(inner.expect("nonempty list"))
}

/// `(f₁⋯f_n)_t = ∫_0^t f₁(t₁) ∫_0^{t₁} f₂(t₂) ⋯ dt_n ⋯ dt₁`.
pub fn iterated_integral(fs: &[&dyn Fn(f64) -> f64], t: f64) -> Result<f64, NumericsError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(NumericsError::Domain(format!("t = {t} outside [0, 1]")));
    }
    Ok(interp(&iterated_integral_path(fs)?, t))
}

/// `∫_0^1 (f₁⋯f_n)_t dt`.
pub fn iterated_integral_mean(fs: &[&dyn Fn(f64) -> f64]) -> Result<f64, NumericsError> {
    let path = iterated_integral_path(fs)?;
    Ok(*cumulative(&path, H).last().expect("nonempty grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExpMode {
    Series { n_terms: usize },
    Ode { tol: f64 },
}

#[derive(Debug, Clone)]
pub struct OrderedExp {
    pub x: Matrix2<f64>,
    /// Largest entry of the last retained series term (series mode only).
    pub tail_estimate: Option<f64>,
    pub warning: Option<String>,
}

/// `X_A` on the shared grid.
#[derive(Debug, Clone)]
pub struct MatrixPath {
    pub t: Vec<f64>,
    pub x: Vec<Matrix2<f64>>,
}

impl MatrixPath {
    pub fn at(&self, t: f64) -> Matrix2<f64> {
        interp_mat(&self.x, t)
    }
}

/// `M_0 = I`, `M_k(t) = ∫_0^t A M_{k−1}` on the shared grid.
fn series_terms(a: &CoeffPair, n: usize) -> Vec<Vec<Matrix2<f64>>> {
    let t = t_nodes();
    let gens: Vec<Matrix2<f64>> = t.iter().map(|&x| a.generator(x)).collect();
    let mut terms = vec![vec![Matrix2::identity(); t.len()]];
    for k in 1..=n {
        let prod: Vec<Matrix2<f64>> = gens.iter().zip(&terms[k - 1]).map(|(g, m)| g * m).collect();
        terms.push(cumulative_mat(&prod, H));
    }
    terms
}

fn ode_opts(a: &CoeffPair, tol: f64) -> OdeOptions {
    OdeOptions {
        h_max: 0.05,
        ..OdeOptions::with_tol(tol).breakpoints(a.breakpoints.clone())
    }
}

/// Solve `X' = AX`, `X(0) = I` with the generator scaled by `s`.
fn ode_path<S: Scalar>(
    a: &CoeffPair,
    s: S,
    t_end: f64,
    samples: &[f64],
    tol: f64,
) -> Result<(Vec<SVector<S, 4>>, SVector<S, 4>), NumericsError> {
    let y0 = SVector::<S, 4>::new(S::one(), S::zero(), S::zero(), S::one());
    let sol = integrate(
        |t, y: &SVector<S, 4>| {
            let g = a.generator(t);
            let (m00, m01, m10, m11) = (
                S::from_real(g[(0, 0)]) * s,
                S::from_real(g[(0, 1)]) * s,
                S::from_real(g[(1, 0)]) * s,
                S::from_real(g[(1, 1)]) * s,
            );
            SVector::<S, 4>::new(
                m00 * y[0] + m01 * y[2],
                m00 * y[1] + m01 * y[3],
                m10 * y[0] + m11 * y[2],
                m10 * y[1] + m11 * y[3],
            )
        },
        0.0,
        y0,
        t_end,
        samples,
        &ode_opts(a, tol),
    )?;
    Ok((sol.samples, sol.final_state))
}

fn as_matrix(y: &SVector<f64, 4>) -> Matrix2<f64> {
    Matrix2::new(y[0], y[1], y[2], y[3])
}

/// `X_A(t)` by truncated series or by ODE integration.
pub fn ordered_exp(a: &CoeffPair, t: f64, mode: ExpMode) -> Result<OrderedExp, NumericsError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(NumericsError::Domain(format!("t = {t} outside [0, 1]")));
    }
    match mode {
        ExpMode::Series { n_terms } => {
            let terms = series_terms(a, n_terms);
            let mut x = Matrix2::zeros();
            for term in &terms {
                x += interp_mat(term, t);
            }
            let last = interp_mat(&terms[n_terms], t).abs().max();
            let tail = if n_terms == 0 { f64::INFINITY } else { last };
            let warning = (tail > SERIES_TOL)
                .then(|| format!("series tail estimate {tail:e} exceeds {SERIES_TOL:e}"));
            Ok(OrderedExp {
                x,
                tail_estimate: Some(tail),
                warning,
            })
        }
        ExpMode::Ode { tol } => {
            let (_, end) = ode_path(a, 1.0, t, &[], tol)?;
            Ok(OrderedExp {
                x: as_matrix(&end),
                tail_estimate: None,
                warning: None,
            })
        }
    }
}

/// `X_A` on a grid in `[0, 1]`.
pub fn ordered_exp_path(
    a: &CoeffPair,
    grid: &Grid,
    mode: ExpMode,
) -> Result<MatrixPath, NumericsError> {
    if grid.last() > 1.0 {
        return Err(NumericsError::Domain("grid must lie in [0, 1]".into()));
    }
    let t = grid.points().to_vec();
    let x = match mode {
        ExpMode::Series { n_terms } => {
            let terms = series_terms(a, n_terms);
            t.iter()
                .map(|&ti| terms.iter().map(|m| interp_mat(m, ti)).sum())
                .collect()
        }
        ExpMode::Ode { tol } => {
            let (samples, _) = ode_path(a, 1.0, grid.last(), &t, tol)?;
            samples.iter().map(as_matrix).collect()
        }
    };
    Ok(MatrixPath { t, x })
}

fn gram_det<S: Scalar>(a: &CoeffPair, s: S, tol: f64) -> Result<S, NumericsError> {
    // State: X (row-major) and the upper triangle of ∫ X Xᵀ.
    let y0 = SVector::<S, 7>::from_column_slice(&[
        S::one(),
        S::zero(),
        S::zero(),
        S::one(),
        S::zero(),
        S::zero(),
        S::zero(),
    ]);
    let sol = integrate(
        |t, y: &SVector<S, 7>| {
            let g = a.generator(t);
            let m = |i: usize, j: usize| S::from_real(g[(i, j)]) * s;
            let (x00, x01, x10, x11) = (y[0], y[1], y[2], y[3]);
            SVector::<S, 7>::from_column_slice(&[
                m(0, 0) * x00 + m(0, 1) * x10,
                m(0, 0) * x01 + m(0, 1) * x11,
                m(1, 0) * x00 + m(1, 1) * x10,
                m(1, 0) * x01 + m(1, 1) * x11,
                x00 * x00 + x01 * x01,
                x00 * x10 + x01 * x11,
                x10 * x10 + x11 * x11,
            ])
        },
        0.0,
        y0,
        1.0,
        &[],
        &ode_opts(a, tol),
    )?;
    let y = sol.final_state;
    Ok(y[4] * y[6] - y[5] * y[5])
}

/// `F_A(s) = det ∫_0^1 X_{sA} X_{sA}ᵀ dt`.
pub fn f_of_s(a: &CoeffPair, s: f64) -> Result<f64, NumericsError> {
    gram_det(a, s, F_TOL)
}

/// `F_A` continued to complex `s`.
pub fn f_of_s_complex(a: &CoeffPair, s: Complex64) -> Result<Complex64, NumericsError> {
    gram_det(a, s, F_TOL)
}

/// `det(M + N) − det M − det N`.
pub fn mixed_det(m: &Matrix2<f64>, n: &Matrix2<f64>) -> f64 {
    (m + n).determinant() - m.determinant() - n.determinant()
}

/// Structural Taylor coefficients `a_0..=a_{n_max}` of `F_A` from the
/// moments `L_k = ∫_0^1 Σ_{m≤k} M_m M_{k−m}ᵀ`.
pub fn taylor_a(a: &CoeffPair, n_max: usize) -> Result<Vec<f64>, NumericsError> {
    if !n_max.is_multiple_of(2) {
        return Err(NumericsError::Domain(format!(
            "n_max must be even, got {n_max}"
        )));
    }
    let terms = series_terms(a, n_max);
    let len = terms[0].len();
    let l: Vec<Matrix2<f64>> = (0..=n_max)
        .map(|k| {
            let nk: Vec<Matrix2<f64>> = (0..len)
                .map(|j| {
                    (0..=k)
                        .map(|m| terms[m][j] * terms[k - m][j].transpose())
                        .sum()
                })
                .collect();
            *cumulative_mat(&nk, H).last().expect("nonempty grid")
        })
        .collect();
    let mut out = vec![0.0; n_max + 1];
    for n in 0..=n_max / 2 {
        let mut v = l[n].determinant();
        for k in 0..n {
            v += mixed_det(&l[k], &l[2 * n - k]);
        }
        out[2 * n] = v;
    }
    Ok(out)
}

/// `(2^n/n!) ∬ (g(x) − g(y))^n dx dy` by tensor Gauss–Legendre quadrature.
pub fn diagonal_a_n(g: &dyn Fn(f64) -> f64, n: u32) -> f64 {
    const PANELS: usize = 4;
    let rule = gauss_legendre(20);
    let nodes: Vec<(f64, f64)> = (0..PANELS)
        .flat_map(|k| {
            let lo = k as f64 / PANELS as f64;
            let hi = (k + 1) as f64 / PANELS as f64;
            rule.mapped(lo, hi).collect::<Vec<_>>()
        })
        .collect();
    let gv: Vec<f64> = nodes.iter().map(|&(x, _)| g(x)).collect();
    let mut acc = 0.0;
    for (i, &(_, wi)) in nodes.iter().enumerate() {
        for (j, &(_, wj)) in nodes.iter().enumerate() {
            acc += wi * wj * (gv[i] - gv[j]).powi(n as i32);
        }
    }
    let mut factor = 1.0;
    for k in 1..=n {
        factor *= 2.0 / k as f64;
    }
    factor * acc
}

/// Mean, variation, derivative norm and `γ = ε^{1/2} + ε^{1/4} δ^{1/2}` of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationStats {
    pub c_f: f64,
    pub d_f: f64,
    pub delta: f64,
    pub gamma: f64,
}

pub fn gamma_of(eps: f64, delta: f64) -> f64 {
    eps.sqrt() + eps.powf(0.25) * delta.sqrt()
}

fn stats_from(values: &[f64], delta: f64) -> VariationStats {
    let c_f = *cumulative(values, H).last().expect("nonempty grid");
    let centered: Vec<f64> = values.iter().map(|v| (v - c_f) * (v - c_f)).collect();
    let d_f = cumulative(&centered, H)
        .last()
        .expect("nonempty grid")
        .max(0.0);
    VariationStats {
        c_f,
        d_f,
        delta,
        gamma: gamma_of(d_f, delta),
    }
}

/// Statistics of `F` with `δ = ‖F'‖` from fourth-order differences.
pub fn gamma_stats(f: &dyn Fn(f64) -> f64) -> VariationStats {
    let t = t_nodes();
    let vals: Vec<f64> = t.iter().map(|&x| f(x)).collect();
    let n = vals.len() - 1;
    let deriv: Vec<f64> = (0..=n)
        .map(|j| {
            let v = |k: usize| vals[k];
            if j >= 2 && j + 2 <= n {
                (v(j - 2) - 8.0 * v(j - 1) + 8.0 * v(j + 1) - v(j + 2)) / (12.0 * H)
            } else if j < 2 {
                (-25.0 * v(j) + 48.0 * v(j + 1) - 36.0 * v(j + 2) + 16.0 * v(j + 3)
                    - 3.0 * v(j + 4))
                    / (12.0 * H)
            } else {
                (25.0 * v(j) - 48.0 * v(j - 1) + 36.0 * v(j - 2) - 16.0 * v(j - 3) + 3.0 * v(j - 4))
                    / (12.0 * H)
            }
        })
        .collect();
    let sq: Vec<f64> = deriv.iter().map(|d| d * d).collect();
    let delta = cumulative(&sq, H).last().expect("nonempty grid").sqrt();
    stats_from(&vals, delta)
}

/// Statistics of `F = ∫_0^t f` with `δ = ‖f‖` computed directly.
pub fn gamma_stats_from_derivative(f: &dyn Fn(f64) -> f64) -> VariationStats {
    let t = t_nodes();
    let fv: Vec<f64> = t.iter().map(|&x| f(x)).collect();
    let sq: Vec<f64> = fv.iter().map(|v| v * v).collect();
    let delta = cumulative(&sq, H).last().expect("nonempty grid").sqrt();
    stats_from(&cumulative(&fv, H), delta)
}

/// `4 D(g_p) + 4 D(g_q)`.
pub fn a2_variation(a: &CoeffPair) -> f64 {
    let (gp, gq) = a.antiderivatives();
    4.0 * stats_from(&gp, 0.0).d_f + 4.0 * stats_from(&gq, 0.0).d_f
}

/// Fourth Taylor coefficient from its explicit eleven-term expression in
/// iterated integrals of `p` and `q`.
pub fn a4_explicit(a: &CoeffPair) -> Result<f64, NumericsError> {
    let p = a.p_fn();
    let q = a.q_fn();
    let pf: &dyn Fn(f64) -> f64 = &*p;
    let qf: &dyn Fn(f64) -> f64 = &*q;
    let m = |w: &[&dyn Fn(f64) -> f64]| iterated_integral_mean(w);
    let (i_q, i_p) = (m(&[qf])?, m(&[pf])?);
    let (i_qq, i_pp) = (m(&[qf, qf])?, m(&[pf, pf])?);
    let bracket = 2.0 * m(&[qf, qf, qf, qf])? - 2.0 * m(&[qf, qf, qf])? * i_q
        + i_qq * i_qq
        + 2.0 * m(&[pf, pf, pf, pf])?
        - 2.0 * m(&[pf, pf, pf])? * i_p
        + i_pp * i_pp
        + 2.0 * m(&[qf, qf, pf, pf])?
        + 2.0 * m(&[pf, pf, qf, qf])?
        + 2.0 * i_qq * i_pp
        - 2.0 * i_q * m(&[qf, pf, pf])?
        - 2.0 * i_p * m(&[pf, qf, qf])?;
    Ok(16.0 * bracket)
}

/// `max_t |(f₁⋯f_n)_t|` over the shared grid.
pub fn iterated_integral_sup(fs: &[&dyn Fn(f64) -> f64]) -> Result<f64, NumericsError> {
    Ok(iterated_integral_path(fs)?
        .iter()
        .fold(0.0, |m, v| m.max(v.abs())))
}

/// `|F_A(s) − 1 − s² a₂| / (s² a₂)`: relative size of the quartic and
/// higher terms at scale `s`.
pub fn scaling_defect(a: &CoeffPair, s: f64) -> Result<f64, NumericsError> {
    let a2 = a2_variation(a) * s * s;
    if !(a2 > 0.0) {
        return Err(NumericsError::Domain(
            "quadratic coefficient vanishes".into(),
        ));
    }
    Ok((f_of_s(a, s)? - 1.0 - a2).abs() / a2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_is_exact_on_cubics() {
        let t = t_nodes();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x * x * x - x + 2.0).collect();
        let c = cumulative(&v, H);
        for (x, ci) in t.iter().zip(&c) {
            let exact = 0.75 * x.powi(4) - 0.5 * x * x + 2.0 * x;
            assert!((ci - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn iterated_integral_examples() {
        let one = |_: f64| 1.0;
        let id = |x: f64| x;
        assert!((iterated_integral(&[&one], 0.3).unwrap() - 0.3).abs() < 1e-13);
        assert!((iterated_integral(&[&one, &one], 1.0).unwrap() - 0.5).abs() < 1e-13);
        assert!((iterated_integral(&[&one, &id], 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-9);
        assert!(iterated_integral(&[], 0.5).is_err());
    }

    #[test]
    fn mixed_det_examples() {
        let i = Matrix2::identity();
        assert_eq!(mixed_det(&i, &i), 2.0);
        assert_eq!(mixed_det(&i, &Matrix2::zeros()), 0.0);
        let a = Matrix2::new(1.0, 0.0, 0.0, 0.0);
        let b = Matrix2::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(mixed_det(&a, &b), 1.0);
    }

    #[test]
    fn diagonal_formula() {
        let g = |t: f64| t;
        assert!((diagonal_a_n(&g, 2) - 1.0 / 3.0).abs() < 1e-12);
        assert!((diagonal_a_n(&g, 4) - 2.0 / 45.0).abs() < 1e-8);
        let h = |t: f64| (3.0 * t).sin() + t * t;
        assert!(diagonal_a_n(&h, 3).abs() < 1e-10);
        assert!(diagonal_a_n(&h, 5).abs() < 1e-10);
    }

    #[test]
    fn a2_examples() {
        assert_eq!(a2_variation(&CoeffPair::zero()), 0.0);
        assert!((a2_variation(&CoeffPair::constant(0.0, 1.0)) - 1.0 / 3.0).abs() < 1e-12);
        assert!((a2_variation(&CoeffPair::constant(1.0, 1.0)) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn a4_examples() {
        assert!((a4_explicit(&CoeffPair::constant(0.0, 1.0)).unwrap() - 2.0 / 45.0).abs() < 1e-7);
        assert_eq!(a4_explicit(&CoeffPair::zero()).unwrap(), 0.0);
    }

    #[test]
    fn gamma_examples() {
        let s = gamma_stats(&|t| t);
        assert!((s.c_f - 0.5).abs() < 1e-12);
        assert!((s.d_f - 1.0 / 12.0).abs() < 1e-12);
        assert!((s.delta - 1.0).abs() < 1e-10);
        assert!((s.gamma - ((1.0f64 / 12.0).sqrt() + (1.0f64 / 12.0).powf(0.25))).abs() < 1e-9);
        let z = gamma_stats(&|_| 0.0);
        assert_eq!((z.c_f, z.d_f, z.delta, z.gamma), (0.0, 0.0, 0.0, 0.0));
        let tp = 2.0 * std::f64::consts::PI;
        let w = gamma_stats(&|t| (tp * t).sin() / tp);
        assert!(w.c_f.abs() < 1e-12);
        assert!((w.d_f - 1.0 / (2.0 * tp * tp)).abs() < 1e-9);
        assert!((w.delta - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn f_examples() {
        let a = CoeffPair::constant(0.0, 1.0);
        assert!((f_of_s(&a, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((f_of_s(&a, 1.0).unwrap() - 1f64.sinh().powi(2)).abs() < 1e-7);
    }

    #[test]
    fn taylor_examples() {
        let c = taylor_a(&CoeffPair::constant(0.0, 1.0), 8).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[2] - 1.0 / 3.0).abs() < 1e-7);
        assert!((c[4] - 2.0 / 45.0).abs() < 1e-7);
        assert_eq!(c[1], 0.0);
        assert_eq!(c[3], 0.0);
        assert!(taylor_a(&CoeffPair::zero(), 3).is_err());
    }
}
