//! Dirac transfer matrix `N_a`, the local entropy `E_a`, the variation `D_a`
//! and the scans comparing them.

use std::io::Write;

use nalgebra::{Matrix2, SVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    fit_decay, gauss_legendre, integrate, DecayFit, Grid, NumericsError, OdeOptions, DEFAULT_FLOOR,
};
use crate::ordexp::{f_of_s, CoeffPair};
use crate::potential::{Potential, PotentialError};
use crate::report::fmt_num;

pub const DEFAULT_TOL: f64 = 1e-12;
/// Relative agreement required between the two routes to `E_a`.
pub const ROUTE_TOL: f64 = 1e-6;
/// `D_a` below this is not used as a ratio denominator.
pub const RATIO_FLOOR: f64 = 1e-12;
/// ξ-step of the Sobolev quadrature grid.
pub const XI_STEP: f64 = 0.05;
const MAX_XI_POINTS: usize = 20_001;
const PANEL_ORDER: usize = 10;
/// Sign-change panels in an entropy window above which the ordered
/// exponential cross-check is skipped.
pub const BRIDGE_PANEL_LIMIT: usize = 400;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("entropy routes disagree at r = {r}: determinant {det_route:e}, ordered exponential {bridge_route:e}")]
    RouteDisagreement {
        r: f64,
        det_route: f64,
        bridge_route: f64,
    },
}

/// `Q(r) = ((−q, p), (p, q))` with `p = −2 Re a(2r)`, `q = 2 Im a(2r)`.
pub struct DiracMatrixQ<'a> {
    pot: &'a Potential,
}

impl<'a> DiracMatrixQ<'a> {
    pub fn new(pot: &'a Potential) -> Self {
        Self { pot }
    }

    pub fn pq(&self, r: f64) -> (f64, f64) {
        let a = self.pot.eval_truncated(2.0 * r);
        (-2.0 * a.re, 2.0 * a.im)
    }

    pub fn q_matrix(&self, r: f64) -> Matrix2<f64> {
        let (p, q) = self.pq(r);
        Matrix2::new(-q, p, p, q)
    }

    /// `JQ = ((p, q), (q, −p))` with `J = ((0, 1), (−1, 0))`.
    pub fn jq(&self, r: f64) -> Matrix2<f64> {
        let (p, q) = self.pq(r);
        Matrix2::new(p, q, q, -p)
    }

    /// Jumps of `Q` inside `(lo, hi)`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.pot
            .breakpoints(2.0 * lo, 2.0 * hi)
            .into_iter()
            .map(|b| 0.5 * b)
            .collect()
    }

    /// Q vanishes for r at or past this point.
    pub fn support(&self) -> f64 {
        0.5 * self
            .pot
            .support_bound()
            .unwrap_or(f64::INFINITY)
            .min(self.pot.r_max())
    }
}

fn check_r(r: f64) -> Result<(), EntropyError> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(EntropyError::Domain(format!(
            "r = {r} must be finite and nonnegative"
        )))
    }
}

/// Solution of `N' = JQ N`, `N(0) = I`.
pub fn n_matrix(pot: &Potential, r: f64, tol: f64) -> Result<Matrix2<f64>, EntropyError> {
    check_r(r)?;
    let q = DiracMatrixQ::new(pot);
    let end = r.min(q.support());
    let opts = OdeOptions::with_tol(tol).breakpoints(q.breakpoints(0.0, end));
    let y0 = SVector::<f64, 4>::new(1.0, 0.0, 0.0, 1.0);
    let sol = integrate(
        |s, y: &SVector<f64, 4>| {
            let m = q.jq(s);
            SVector::<f64, 4>::new(
                m[(0, 0)] * y[0] + m[(0, 1)] * y[2],
                m[(0, 0)] * y[1] + m[(0, 1)] * y[3],
                m[(1, 0)] * y[0] + m[(1, 1)] * y[2],
                m[(1, 0)] * y[1] + m[(1, 1)] * y[3],
            )
        },
        0.0,
        y0,
        end,
        &[],
        &opts,
    )?;
    let y = sol.final_state;
    Ok(Matrix2::new(y[0], y[1], y[2], y[3]))
}

/// Calls `f(g(x), w)` at panel quadrature nodes of `[lo, hi]`, where
/// `g(x) = ∫_lo^x a` for the truncated coefficient. Past the support `g` is
/// constant and is visited once, weighted by the remaining length.
fn visit_antiderivative(pot: &Potential, lo: f64, hi: f64, mut f: impl FnMut(Complex64, f64)) {
    let end = hi
        .min(pot.support_bound().unwrap_or(f64::INFINITY))
        .min(pot.r_max())
        .max(lo);
    let rule = gauss_legendre(PANEL_ORDER);
    let a_on =
        |x0: f64, x1: f64| -> Complex64 { rule.mapped(x0, x1).map(|(y, v)| pot.eval(y) * v).sum() };
    let mut g0 = Complex64::new(0.0, 0.0);
    if end > lo {
        for w in pot.panel_cuts(lo, end).windows(2) {
            let (x0, x1) = (w[0], w[1]);
            for (x, wx) in rule.mapped(x0, x1) {
                f(g0 + a_on(x0, x), wx);
            }
            g0 += a_on(x0, x1);
        }
    }
    if hi > end {
        f(g0, hi - end);
    }
}

/// `E_a(r)` by the determinant route.
///
/// With `X = N N(r)⁻¹` and `det N = 1`, `det ∫_r^{r+2} NᵀN = det ∫ XᵀX`.
/// For real `a` the generator `JQ = diag(p, −p)` commutes with itself and
/// `X = diag(e^φ, e^{−φ})` with `φ(s) = −∫_{2r}^{2s} a`; then
/// `∫ XᵀX = diag(2 + u, 2 + v)` and `E = 2(u + v) + uv`. Complex `a` is
/// integrated numerically.
pub fn entropy_e_det(pot: &Potential, r: f64, tol: f64) -> Result<f64, EntropyError> {
    check_r(r)?;
    let q = DiracMatrixQ::new(pot);
    if pot.is_zero() || r >= q.support() {
        return Ok(0.0);
    }
    if !pot.is_real() {
        return entropy_e_ode(&q, r, tol);
    }
    // Substituting x = 2s halves every weight.
    let (mut u, mut v, mut sum) = (0.0, 0.0, 0.0);
    visit_antiderivative(pot, 2.0 * r, 2.0 * r + 4.0, |g, w| {
        let phi = -g.re;
        u += 0.5 * w * (2.0 * phi).exp_m1();
        v += 0.5 * w * (-2.0 * phi).exp_m1();
        sum += 0.5 * w * 4.0 * phi.sinh().powi(2);
    });
    Ok(2.0 * sum + u * v)
}

/// Writing `X = I + Y` and `∫ XᵀX = 2I + S` gives `E = 2 tr S + det S`,
/// which keeps small values accurate.
fn entropy_e_ode(q: &DiracMatrixQ<'_>, r: f64, tol: f64) -> Result<f64, EntropyError> {
    let opts = OdeOptions::with_tol(tol).breakpoints(q.breakpoints(r, r + 2.0));
    let y0 = SVector::<f64, 7>::zeros();
    let sol = integrate(
        |s, y: &SVector<f64, 7>| {
            let b = q.jq(s);
            let x = Matrix2::new(1.0 + y[0], y[1], y[2], 1.0 + y[3]);
            let dy = b * x;
            let ymat = Matrix2::new(y[0], y[1], y[2], y[3]);
            let ds = ymat + ymat.transpose() + ymat.transpose() * ymat;
            SVector::<f64, 7>::from_column_slice(&[
                dy[(0, 0)],
                dy[(0, 1)],
                dy[(1, 0)],
                dy[(1, 1)],
                ds[(0, 0)],
                ds[(0, 1)],
                ds[(1, 1)],
            ])
        },
        r,
        y0,
        (r + 2.0).min(q.support()),
        &[],
        &opts,
    )?;
    let y = sol.final_state;
    // Past the support X is frozen.
    let rest = (r + 2.0 - q.support()).max(0.0);
    let ym = Matrix2::new(y[0], y[1], y[2], y[3]);
    let extra = (ym + ym.transpose() + ym.transpose() * ym) * rest;
    let (s00, s01, s11) = (
        y[4] + extra[(0, 0)],
        y[5] + extra[(0, 1)],
        y[6] + extra[(1, 1)],
    );
    Ok(2.0 * (s00 + s11) + s00 * s11 - s01 * s01)
}

/// `A_r(t) = 2 J Q(r + 2t)` as a coefficient pair on `[0, 1]`.
pub fn bridge_pair(pot: &Potential, r: f64) -> CoeffPair {
    let q = DiracMatrixQ::new(pot);
    let breaks: Vec<f64> = q
        .breakpoints(r, r + 2.0)
        .into_iter()
        .map(|s| 0.5 * (s - r))
        .collect();
    let (pa, pb) = (pot.clone(), pot.clone());
    CoeffPair::new(
        move |t| 4.0 * pa.eval_truncated(2.0 * r + 4.0 * t).im,
        move |t| 4.0 * pb.eval_truncated(2.0 * r + 4.0 * t).re,
    )
    .with_breakpoints(breaks)
    .labelled(format!("A_{r} of {pot}"))
}

/// Whether the window of `E_a(r)` is smooth enough for the ordered
/// exponential route.
pub fn bridge_affordable(pot: &Potential, r: f64) -> bool {
    let end = (2.0 * r + 4.0)
        .min(pot.support_bound().unwrap_or(f64::INFINITY))
        .min(pot.r_max());
    end <= 2.0 * r || pot.panel_cuts(2.0 * r, end).len() <= BRIDGE_PANEL_LIMIT + 1
}

/// `E_a(r)` through the ordered exponential: `4 (F_{A_r}(1) − 1)`.
pub fn entropy_e_bridge(pot: &Potential, r: f64) -> Result<f64, EntropyError> {
    check_r(r)?;
    if pot.is_zero() || r >= DiracMatrixQ::new(pot).support() {
        return Ok(0.0);
    }
    Ok(4.0 * (f_of_s(&bridge_pair(pot, r), 1.0)? - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyRoutes {
    pub r: f64,
    pub det_route: f64,
    /// Absent where the window oscillates too fast for the ODE route.
    pub bridge_route: Option<f64>,
}

impl EntropyRoutes {
    /// `|det − bridge| / (1 + |det|)`.
    pub fn residual(&self) -> Option<f64> {
        self.bridge_route
            .map(|b| (self.det_route - b).abs() / (1.0 + self.det_route.abs()))
    }
}

pub fn entropy_routes(pot: &Potential, r: f64, tol: f64) -> Result<EntropyRoutes, EntropyError> {
    let bridge_route = if bridge_affordable(pot, r) {
        Some(entropy_e_bridge(pot, r)?)
    } else {
        None
    };
    Ok(EntropyRoutes {
        r,
        det_route: entropy_e_det(pot, r, tol)?,
        bridge_route,
    })
}

/// `E_a(r) = det ∫_r^{r+2} NᵀN − 4`, cross-checked against the ordered
/// exponential route where that route is affordable.
pub fn entropy_e(pot: &Potential, r: f64, tol: f64) -> Result<f64, EntropyError> {
    let routes = entropy_routes(pot, r, tol)?;
    if let (Some(res), Some(b)) = (routes.residual(), routes.bridge_route) {
        if res > ROUTE_TOL {
            return Err(EntropyError::RouteDisagreement {
                r,
                det_route: routes.det_route,
                bridge_route: b,
            });
        }
    }
    Ok(routes.det_route)
}

/// `D_a(r) = 2 ∫_r^{r+2} |g|² − |∫_r^{r+2} g|²` with `g(t) = ∫_r^t a`.
pub fn variation_d(pot: &Potential, r: f64) -> f64 {
    if pot.is_zero() {
        return 0.0;
    }
    let mut sum_g = Complex64::new(0.0, 0.0);
    let mut sum_g2 = 0.0;
    visit_antiderivative(pot, r, r + 2.0, |g, w| {
        sum_g += g * w;
        sum_g2 += g.norm_sqr() * w;
    });
    2.0 * sum_g2 - sum_g.norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySum {
    pub value: f64,
    pub terms: usize,
    /// `|E_a(N)|`, a truncation indicator.
    pub last_term: f64,
}

/// `Σ_{n=0}^{N} E_a(n)`.
pub fn entropy_sum(pot: &Potential, n: usize, tol: f64) -> Result<EntropySum, EntropyError> {
    let terms = (0..=n)
        .into_par_iter()
        .map(|k| entropy_e(pot, k as f64, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EntropySum {
        value: terms.iter().sum(),
        terms: n + 1,
        last_term: terms[n].abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    pub value: f64,
    pub cutoff: f64,
    pub points: usize,
    /// Bound on the omitted `|ξ| > cutoff` part: `‖a‖²_{L²} / (1 + cutoff²)`.
    pub tail_bound: f64,
}

/// `∫_{−C}^{C} |(Fa)(ξ)|² / (1 + ξ²) dξ` by Simpson's rule on a uniform ξ-grid.
pub fn sobolev_h_minus1(pot: &Potential, cutoff: f64) -> Result<SobolevEstimate, EntropyError> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(EntropyError::Domain(format!(
            "cutoff {cutoff} must be positive"
        )));
    }
    let mut intervals = (2.0 * cutoff / XI_STEP).ceil() as usize;
    intervals = intervals.clamp(2, MAX_XI_POINTS - 1);
    if intervals % 2 == 1 {
        intervals += 1;
    }
    let tail_bound = pot.l2_norm().powi(2) / (1.0 + cutoff * cutoff);
    if pot.is_zero() {
        return Ok(SobolevEstimate {
            value: 0.0,
            cutoff,
            points: intervals + 1,
            tail_bound,
        });
    }
    let h = 2.0 * cutoff / intervals as f64;
    let half = intervals / 2;
    // |Fa(−ξ)| = |Fa(ξ)| for real a.
    let real = pot.is_real();
    let density = |k: usize| -> Result<f64, EntropyError> {
        let xi = -cutoff + h * k as f64;
        if real && k < half {
            return Ok(f64::NAN);
        }
        Ok(pot.fourier(xi)?.norm_sqr() / (1.0 + xi * xi))
    };
    let mut vals = (0..=intervals)
        .into_par_iter()
        .map(density)
        .collect::<Result<Vec<_>, _>>()?;
    if real {
        for k in 0..half {
            vals[k] = vals[intervals - k];
        }
    }
    let mut acc = vals[0] + vals[intervals];
    for (k, v) in vals.iter().enumerate().take(intervals).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(SobolevEstimate {
        value: acc * h / 3.0,
        cutoff,
        points: intervals + 1,
        tail_bound,
    })
}

/// `E_a`, `D_a`, their ratio and decay fits on an r-grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyScan {
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub d: Vec<f64>,
    /// `E/D` where `D > RATIO_FLOOR`.
    pub ratio: Vec<Option<f64>>,
    pub fit_e: DecayFit,
    pub fit_d: DecayFit,
}

impl EntropyScan {
    /// CSV with header `r,E,D,ratio`; the ratio is empty where undefined.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "E", "D", "ratio"])?;
        for i in 0..self.r.len() {
            out.write_record([
                fmt_num(self.r[i]),
                fmt_num(self.e[i]),
                fmt_num(self.d[i]),
                self.ratio[i].map(fmt_num).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Decay fit of a sampled functional that vanishes identically from
/// `zero_from` on.
fn fit_functional(r: &[f64], v: &[f64], zero_from: Option<f64>) -> Result<DecayFit, EntropyError> {
    let last = *r.last().expect("nonempty grid");
    if let Some(z) = zero_from {
        if z <= last {
            return Ok(DecayFit::IdenticallyZeroTail {
                window: (z.max(r[0]), last),
            });
        }
    }
    let samples: Vec<(f64, f64)> = r.iter().zip(v).map(|(&x, &y)| (x, y.max(0.0))).collect();
    Ok(fit_decay(&samples, DEFAULT_FLOOR)?)
}

pub fn equivalence_scan(
    pot: &Potential,
    grid: &Grid,
    tol: f64,
) -> Result<EntropyScan, EntropyError> {
    let r = grid.points().to_vec();
    let pairs = r
        .par_iter()
        .map(|&x| Ok((entropy_e(pot, x, tol)?, variation_d(pot, x))))
        .collect::<Result<Vec<_>, EntropyError>>()?;
    let (e, d): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let ratio = e
        .iter()
        .zip(&d)
        .map(|(&ei, &di)| (di > RATIO_FLOOR).then(|| ei / di))
        .collect();
    let support = pot.support_bound();
    Ok(EntropyScan {
        fit_e: fit_functional(&r, &e, support.map(|s| 0.5 * s))?,
        fit_d: fit_functional(&r, &d, support)?,
        r,
        e,
        d,
        ratio,
    })
}

/// Decay class of `D_a` on the grid, a computable stand-in for the decay
/// class of the entropy function.
pub fn classify_alpha(pot: &Potential, grid: &Grid) -> Result<DecayFit, EntropyError> {
    let r = grid.points().to_vec();
    let d: Vec<f64> = r.par_iter().map(|&x| variation_d(pot, x)).collect();
    fit_functional(&r, &d, pot.support_bound())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_e(c: f64) -> f64 {
        let k = 8.0 * c;
        (1.0 - (-k).exp()) * (k.exp() - 1.0) / (16.0 * c * c) - 4.0
    }

    #[test]
    fn n_matrix_examples() {
        let z = n_matrix(&Potential::zero(), 3.0, DEFAULT_TOL).unwrap();
        assert_eq!(z, Matrix2::identity());
        let c = 0.3;
        let n = n_matrix(&Potential::constant(c, None).unwrap(), 1.5, DEFAULT_TOL).unwrap();
        assert!((n[(0, 0)] - (-2.0 * c * 1.5f64).exp()).abs() < 1e-8);
        assert!((n[(1, 1)] - (2.0 * c * 1.5f64).exp()).abs() < 1e-8);
        assert!(n[(0, 1)].abs() < 1e-12);
        let b = Potential::box_(1.0, 1.0).unwrap();
        for r in [1.0, 2.0, 5.0] {
            assert!((n_matrix(&b, r, DEFAULT_TOL).unwrap().determinant() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            entropy_e(&Potential::zero(), 1.0, DEFAULT_TOL).unwrap(),
            0.0
        );
        let c = Potential::constant(0.25, None).unwrap();
        let want = (1f64.exp().powi(2) - 1.0) * (1.0 - (-2f64).exp()) - 4.0;
        assert!((want - 1.5243914).abs() < 1e-7);
        assert!((closed_e(0.25) - want).abs() < 1e-12);
        for r in [0.0, 1.3, 4.0] {
            assert!((entropy_e(&c, r, DEFAULT_TOL).unwrap() - want).abs() < 1e-6);
        }
        let b = Potential::box_(1.0, 1.0).unwrap();
        assert!(entropy_e(&b, 5.0, DEFAULT_TOL).unwrap().abs() < 1e-8);
        assert!(entropy_e(&b, 0.0, DEFAULT_TOL).unwrap() > 0.0);
    }

    #[test]
    fn variation_examples() {
        assert_eq!(variation_d(&Potential::zero(), 0.0), 0.0);
        let b = Potential::box_(1.0, 1.0).unwrap();
        assert!((variation_d(&b, 0.0) - 5.0 / 12.0).abs() < 1e-12);
        assert_eq!(variation_d(&b, 1.0), 0.0);
        let c = Potential::constant(0.25, None).unwrap();
        assert!((variation_d(&c, 3.0) - 1.0 / 12.0).abs() < 1e-12);
        let g = Potential::gaussian(1.0, 1.0).unwrap();
        let d1 = variation_d(&g, 0.7);
        assert!((variation_d(&g.scaled(3.0), 0.7) - 9.0 * d1).abs() < 1e-10 * (1.0 + d1));
    }

    #[test]
    fn sobolev_scaling() {
        let b = Potential::box_(1.0, 1.0).unwrap();
        let s1 = sobolev_h_minus1(&b, 50.0).unwrap();
        let s2 = sobolev_h_minus1(&b.scaled(2.0), 50.0).unwrap();
        assert!((s2.value - 4.0 * s1.value).abs() < 1e-8);
        assert_eq!(
            sobolev_h_minus1(&Potential::zero(), 10.0).unwrap().value,
            0.0
        );
    }
}
