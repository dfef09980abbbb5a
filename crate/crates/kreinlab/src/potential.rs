//! Coefficients `a ∈ L²(ℝ₊)`: example families, tail antiderivatives and
//! decay classification of the tails.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    adaptive_quad_with, alternating_tail, fit_decay, gauss_legendre, DecayFit, Grid, NumericsError,
    QuadOptions, DEFAULT_FLOOR,
};
use crate::parse::{parse_complex, parse_real};

pub const DEFAULT_R_MAX: f64 = 40.0;
/// The oscillating example needs `~e^r` steps per unit length; beyond this
/// horizon its ODE numerics treat it as zero.
pub const FIGURE1_R_MAX: f64 = 12.0;

/// Above this many sign changes a finite oscillatory integral is taken as a
/// difference of extrapolated tails.
const MAX_DIRECT_PANELS: f64 = 200_000.0;
/// `e^{-x²}` is below the smallest subnormal past this many scale units.
const GAUSSIAN_REACH: f64 = 28.0;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("unknown potential family '{0}'")]
    UnknownFamily(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Zero,
    /// `c` on `[0, cutoff)`; without a cutoff the coefficient is not in L².
    Constant {
        c: Complex64,
        cutoff: Option<f64>,
    },
    /// `c` on `[0, length)`.
    Box {
        c: Complex64,
        length: f64,
    },
    /// `c·exp(-(r/scale)²)`.
    Gaussian {
        c: Complex64,
        scale: f64,
    },
    /// `sin(e^r)/(1+r)`.
    Figure1,
    /// Linear interpolation of the samples, zero outside the sampled range.
    Sampled {
        grid: Vec<f64>,
        values: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Potential {
    family: Family,
    gain: Complex64,
    r_max: f64,
    l2_norm: f64,
    support_bound: Option<f64>,
}

/// `A(r) = ∫_r^∞ a` on a grid together with a decay fit of `|A|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailProfile {
    pub r_grid: Vec<f64>,
    pub tail: Vec<Complex64>,
    pub fit: DecayFit,
}

fn figure1(r: f64) -> f64 {
    r.exp().sin() / (1.0 + r)
}

/// Sign changes `ln(kπ)` of `sin(e^r)` at or after `r`.
fn figure1_zeros(r: f64) -> impl Iterator<Item = f64> {
    let k0 = (r.exp() / PI).ceil().max(1.0) as u64;
    (k0..)
        .map(|k| (k as f64 * PI).ln())
        .filter(move |&z| z >= r)
}

fn panel_quad<F: Fn(f64) -> Complex64>(
    f: F,
    cuts: &[f64],
    tol: f64,
) -> Result<Complex64, NumericsError> {
    let opts = QuadOptions {
        tol,
        max_intervals: 2000,
    };
    let mut acc = ZERO;
    for w in cuts.windows(2) {
        acc += adaptive_quad_with(&f, w[0], w[1], &[], opts)?.value;
    }
    Ok(acc)
}

/// Cut points of `[lo, hi]` containing `marks`, with gaps at most `width`.
fn cuts_with(lo: f64, hi: f64, marks: &[f64], width: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(marks.iter().copied().filter(|&m| m > lo && m < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(if k == n {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * k as f64 / n as f64
            });
        }
    }
    out
}

impl Potential {
    pub fn zero() -> Self {
        Self::build(Family::Zero).expect("zero potential is valid")
    }

    pub fn constant(c: impl Into<Complex64>, cutoff: Option<f64>) -> Result<Self, PotentialError> {
        Self::build(Family::Constant {
            c: c.into(),
            cutoff,
        })
    }

    pub fn box_(c: impl Into<Complex64>, length: f64) -> Result<Self, PotentialError> {
        Self::build(Family::Box {
            c: c.into(),
            length,
        })
    }

    pub fn gaussian(c: impl Into<Complex64>, scale: f64) -> Result<Self, PotentialError> {
        Self::build(Family::Gaussian { c: c.into(), scale })
    }

    pub fn figure1() -> Self {
        Self::build(Family::Figure1).expect("figure1 potential is valid")
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<Complex64>) -> Result<Self, PotentialError> {
        Self::build(Family::Sampled { grid, values })
    }

    /// Validate parameters and compute metadata.
    pub fn build(family: Family) -> Result<Self, PotentialError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(PotentialError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        let finite_c = |c: &Complex64| {
            if c.re.is_finite() && c.im.is_finite() {
                Ok(())
            } else {
                Err(PotentialError::InvalidParameter(
                    "amplitude must be finite".into(),
                ))
            }
        };
        let (support_bound, r_max) = match &family {
            Family::Zero => (Some(0.0), DEFAULT_R_MAX),
            Family::Constant { c, cutoff } => {
                finite_c(c)?;
                if let Some(l) = cutoff {
                    positive("cutoff", *l)?;
                }
                (*cutoff, DEFAULT_R_MAX)
            }
            Family::Box { c, length } => {
                finite_c(c)?;
                positive("length", *length)?;
                (Some(*length), DEFAULT_R_MAX)
            }
            Family::Gaussian { c, scale } => {
                finite_c(c)?;
                positive("scale", *scale)?;
                (None, DEFAULT_R_MAX)
            }
            Family::Figure1 => (None, FIGURE1_R_MAX),
            Family::Sampled { grid, values } => {
                if grid.len() < 2 {
                    return Err(PotentialError::InvalidSamples(
                        "need at least two samples".into(),
                    ));
                }
                if grid.len() != values.len() {
                    return Err(PotentialError::InvalidSamples(format!(
                        "{} abscissae but {} values",
                        grid.len(),
                        values.len()
                    )));
                }
                Grid::new(grid.clone())
                    .map_err(|e| PotentialError::InvalidSamples(e.to_string()))?;
                if values
                    .iter()
                    .any(|v| !v.re.is_finite() || !v.im.is_finite())
                {
                    return Err(PotentialError::InvalidSamples("non-finite value".into()));
                }
                let last = grid[grid.len() - 1];
                (Some(last), DEFAULT_R_MAX.max(last))
            }
        };
        let mut p = Self {
            family,
            gain: Complex64::new(1.0, 0.0),
            r_max,
            l2_norm: 0.0,
            support_bound,
        };
        p.l2_norm = p.compute_l2()?;
        Ok(p)
    }

    /// Parse `zero`, `constant:c[,cutoff]`, `box:c,length`, `gaussian:c,scale`,
    /// `figure1` or `sampled:path.csv`.
    pub fn from_spec(spec: &str) -> Result<Self, PotentialError> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a)),
            None => (spec.trim(), None),
        };
        let fields: Vec<&str> = args
            .map(|a| a.split(',').map(str::trim).collect())
            .unwrap_or_default();
        let need = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(PotentialError::InvalidParameter(format!(
                    "'{name}' takes {n} parameter(s), got {}",
                    fields.len()
                )))
            }
        };
        let cplx = |s: &str| parse_complex(s).map_err(PotentialError::InvalidParameter);
        let real = |s: &str| parse_real(s).map_err(PotentialError::InvalidParameter);
        match name {
            "zero" => {
                need(0)?;
                Ok(Self::zero())
            }
            "constant" => match fields.len() {
                1 => Self::constant(cplx(fields[0])?, None),
                2 => Self::constant(cplx(fields[0])?, Some(real(fields[1])?)),
                n => Err(PotentialError::InvalidParameter(format!(
                    "'constant' takes 1 or 2 parameters, got {n}"
                ))),
            },
            "box" => {
                need(2)?;
                Self::box_(cplx(fields[0])?, real(fields[1])?)
            }
            "gaussian" => {
                need(2)?;
                Self::gaussian(cplx(fields[0])?, real(fields[1])?)
            }
            "figure1" => {
                need(0)?;
                Ok(Self::figure1())
            }
            "sampled" => {
                let path = args.ok_or_else(|| {
                    PotentialError::InvalidParameter("'sampled' needs a csv path".into())
                })?;
                Self::from_csv_path(path)
            }
            other => Err(PotentialError::UnknownFamily(other.to_string())),
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, PotentialError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| PotentialError::Csv(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Read samples from CSV with header exactly `r,re,im`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, PotentialError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| PotentialError::Csv(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "re", "im"] {
            return Err(PotentialError::Csv(format!(
                "expected header 'r,re,im', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| PotentialError::Csv(e.to_string()))?;
            if rec.len() != 3 {
                return Err(PotentialError::Csv(format!(
                    "row {}: expected 3 fields, got {}",
                    line + 2,
                    rec.len()
                )));
            }
            let num = |k: usize| {
                parse_real(&rec[k])
                    .map_err(|e| PotentialError::Csv(format!("row {}: {e}", line + 2)))
            };
            grid.push(num(0)?);
            values.push(Complex64::new(num(1)?, num(2)?));
        }
        Self::sampled(grid, values)
    }

    /// Multiply the coefficient by `s`.
    pub fn scaled(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let mut p = self.clone();
        p.gain *= s;
        p.l2_norm *= s.norm();
        p
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn support_bound(&self) -> Option<f64> {
        self.support_bound
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, Family::Zero) || self.gain == ZERO
    }

    /// Whether `a` takes only real values.
    pub fn is_real(&self) -> bool {
        let real_c = |c: &Complex64| (c * self.gain).im == 0.0;
        match &self.family {
            Family::Zero => true,
            Family::Constant { c, .. } | Family::Box { c, .. } | Family::Gaussian { c, .. } => {
                real_c(c)
            }
            Family::Figure1 => self.gain.im == 0.0,
            Family::Sampled { values, .. } => values.iter().all(real_c),
        }
    }

    /// Closed-form value of `a(r)` (zero for `r < 0`).
    pub fn eval(&self, r: f64) -> Complex64 {
        if r < 0.0 {
            return ZERO;
        }
        let v = match &self.family {
            Family::Zero => ZERO,
            Family::Constant { c, cutoff } => match cutoff {
                Some(l) if r >= *l => ZERO,
                _ => *c,
            },
            Family::Box { c, length } => {
                if r < *length {
                    *c
                } else {
                    ZERO
                }
            }
            Family::Gaussian { c, scale } => {
                let x = r / scale;
                c * (-x * x).exp()
            }
            Family::Figure1 => Complex64::new(figure1(r), 0.0),
            Family::Sampled { grid, values } => {
                let n = grid.len();
                if r < grid[0] || r > grid[n - 1] {
                    ZERO
                } else {
                    let k = grid.partition_point(|&g| g <= r).clamp(1, n - 1);
                    let (r0, r1) = (grid[k - 1], grid[k]);
                    let w = (r - r0) / (r1 - r0);
                    values[k - 1] * (1.0 - w) + values[k] * w
                }
            }
        };
        v * self.gain
    }

    /// `a(r)` cut off at the numerical horizon `r_max`; this is what ODE
    /// solvers see.
    pub fn eval_truncated(&self, r: f64) -> Complex64 {
        if r > self.r_max {
            ZERO
        } else {
            self.eval(r)
        }
    }

    /// Discontinuities of the truncated coefficient inside `(lo, hi)`.
    pub fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = vec![self.r_max];
        match &self.family {
            Family::Constant {
                cutoff: Some(l), ..
            } => b.push(*l),
            Family::Box { length, .. } => b.push(*length),
            Family::Sampled { grid, .. } => b.extend_from_slice(grid),
            _ => {}
        }
        b.retain(|&x| x > lo && x < hi);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn quad_cuts(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut marks = self.breakpoints(lo, hi);
        marks.retain(|&x| x != self.r_max);
        if let Some(s) = self.support_bound {
            marks.push(s);
        }
        let width = match &self.family {
            Family::Gaussian { scale, .. } => 0.5 * scale,
            _ => 1.0,
        };
        cuts_with(lo, hi, &marks, width)
    }

    /// `∫_lo^hi g(a(r), r) dr` for a pointwise functional `g` that vanishes
    /// wherever `a` does.
    fn integrate_map<G>(
        &self,
        lo: f64,
        hi: f64,
        g: G,
        tol: f64,
    ) -> Result<Complex64, PotentialError>
    where
        G: Fn(Complex64, f64) -> Complex64,
    {
        if hi <= lo || self.is_zero() {
            return Ok(ZERO);
        }
        let hi = match self.support_bound {
            Some(s) => hi.min(s),
            None => hi,
        };
        if hi <= lo {
            return Ok(ZERO);
        }
        let f = |r: f64| g(self.eval(r), r);
        if let Family::Figure1 = self.family {
            let count = (hi.exp() - lo.exp()) / PI;
            if count > MAX_DIRECT_PANELS {
                return Err(PotentialError::Numerics(NumericsError::Domain(format!(
                    "too many oscillations on [{lo}, {hi}]"
                ))));
            }
            let mut cuts = vec![lo];
            cuts.extend(
                figure1_zeros(lo)
                    .take_while(|&z| z < hi)
                    .filter(|&z| z > lo),
            );
            cuts.push(hi);
            let cuts = cuts_with(lo, hi, &cuts, 0.5);
            return Ok(panel_quad(f, &cuts, tol)?);
        }
        Ok(panel_quad(f, &self.quad_cuts(lo, hi), tol)?)
    }

    /// `∫_lo^hi a` of the untruncated coefficient.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<Complex64, PotentialError> {
        if hi < lo {
            return Ok(-self.integral(hi, lo)?);
        }
        if let Family::Figure1 = self.family {
            if (hi.exp() - lo.exp()) / PI > MAX_DIRECT_PANELS {
                return Ok(self.tail_integral(lo)? - self.tail_integral(hi)?);
            }
        }
        self.integrate_map(lo, hi, |a, _| a, 1e-14)
    }

    /// `A(r) = ∫_r^∞ a(x) dx`.
    pub fn tail_integral(&self, r: f64) -> Result<Complex64, PotentialError> {
        if !(r >= 0.0) {
            return Err(PotentialError::InvalidParameter(format!(
                "tail start must be nonnegative, got {r}"
            )));
        }
        if self.is_zero() {
            return Ok(ZERO);
        }
        match &self.family {
            Family::Constant { cutoff: None, .. } => Err(PotentialError::Divergent(
                "constant coefficient without cutoff".into(),
            )),
            Family::Gaussian { c, scale } => {
                // Factor out a(r) so the quadrature tolerance is relative.
                let s = *scale;
                let reach = r + GAUSSIAN_REACH * s;
                let ratio = |x: f64| Complex64::new((-(x - r) * (x + r) / (s * s)).exp(), 0.0);
                let cuts = cuts_with(r, reach, &[], 0.5 * s);
                let rel = panel_quad(ratio, &cuts, 1e-15)?;
                let x = r / s;
                Ok(c * self.gain * (-x * x).exp() * rel)
            }
            Family::Figure1 => {
                let opts = QuadOptions::with_tol(1e-14);
                let res = alternating_tail(
                    |x: f64| Complex64::new(figure1(x), 0.0),
                    r,
                    figure1_zeros(r),
                    opts,
                    4000,
                )?;
                Ok(res.value * self.gain)
            }
            _ => {
                let end = self
                    .support_bound
                    .expect("remaining families are supported");
                if r >= end {
                    Ok(ZERO)
                } else {
                    self.integral(r, end)
                }
            }
        }
    }

    /// `∫_lo^hi |a|`.
    pub fn l1_norm_on(&self, lo: f64, hi: f64) -> Result<f64, PotentialError> {
        Ok(self
            .integrate_map(lo, hi, |a, _| Complex64::new(a.norm(), 0.0), 1e-13)?
            .re)
    }

    fn compute_l2(&self) -> Result<f64, PotentialError> {
        match &self.family {
            Family::Zero => Ok(0.0),
            Family::Constant { cutoff: None, c } => {
                Ok(if c.norm() == 0.0 { 0.0 } else { f64::INFINITY })
            }
            Family::Figure1 => {
                // sin² = (1 - cos(2e^r))/2 and ∫_0^∞ (1+r)^{-2} = 1.
                let zeros = (0u64..)
                    .map(|k| ((k as f64 + 0.5) * PI / 2.0).ln())
                    .filter(|&z| z >= 0.0);
                let osc = alternating_tail(
                    |x: f64| (2.0 * x.exp()).cos() / ((1.0 + x) * (1.0 + x)),
                    0.0,
                    zeros,
                    QuadOptions::with_tol(1e-14),
                    4000,
                )?;
                Ok((0.5 - 0.5 * osc.value).sqrt())
            }
            Family::Gaussian { scale, .. } => {
                let v =
                    self.integrate_map(0.0, GAUSSIAN_REACH * scale, |a, _| a * a.conj(), 1e-15)?;
                Ok(v.re.sqrt())
            }
            _ => {
                let end = self.support_bound.unwrap_or(self.r_max);
                let v = self.integrate_map(0.0, end, |a, _| a * a.conj(), 1e-15)?;
                Ok(v.re.sqrt())
            }
        }
    }

    /// `(2π)^{-1/2} ∫_0^∞ e^{-itξ} a(t) dt`.
    pub fn fourier(&self, xi: f64) -> Result<Complex64, PotentialError> {
        if self.is_zero() {
            return Ok(ZERO);
        }
        let norm = 1.0 / (2.0 * PI).sqrt();
        let kernel = move |a: Complex64, t: f64| a * Complex64::from_polar(1.0, -t * xi);
        let width = if xi == 0.0 {
            1.0
        } else {
            (PI / xi.abs()).min(1.0)
        };
        let panels = |lo: f64, hi: f64, marks: &[f64]| -> Result<Complex64, PotentialError> {
            let cuts = cuts_with(lo, hi, marks, width);
            Ok(panel_quad(|t| kernel(self.eval(t), t), &cuts, 1e-14)?)
        };
        let value = match &self.family {
            Family::Constant { cutoff: None, .. } => {
                return Err(PotentialError::Divergent(
                    "constant coefficient without cutoff".into(),
                ))
            }
            Family::Gaussian { scale, .. } => panels(0.0, GAUSSIAN_REACH * scale, &[])?,
            Family::Figure1 => {
                let t0 = (4.0 * xi.abs() + 4.0).ln().max(2.0);
                let mut marks: Vec<f64> = figure1_zeros(0.0).take_while(|&z| z < t0).collect();
                marks.push(t0);
                let head = panels(0.0, t0, &marks)?;
                let tail = alternating_tail(
                    |t: f64| kernel(self.eval(t), t),
                    t0,
                    figure1_zeros(t0),
                    QuadOptions::with_tol(1e-13),
                    4000,
                )?;
                head + tail.value
            }
            _ => {
                let end = self
                    .support_bound
                    .expect("remaining families are supported");
                panels(0.0, end, &self.quad_cuts(0.0, end))?
            }
        };
        Ok(value * norm)
    }

    /// Tail integrals on the window and a decay fit of their modulus.
    pub fn oscillation_classify(&self, window: &Grid) -> Result<TailProfile, PotentialError> {
        let r_grid = window.points().to_vec();
        let tail = r_grid
            .par_iter()
            .map(|&r| self.tail_integral(r))
            .collect::<Result<Vec<_>, _>>()?;
        let fit = match self.support_bound {
            Some(s) => DecayFit::IdenticallyZeroTail {
                window: (s.max(window.first()), window.last().max(s)),
            },
            None => {
                let samples: Vec<(f64, f64)> = r_grid
                    .iter()
                    .zip(&tail)
                    .map(|(&r, a)| (r, a.norm()))
                    .collect();
                fit_decay(&samples, DEFAULT_FLOOR)?
            }
        };
        Ok(TailProfile { r_grid, tail, fit })
    }

    /// Panel boundaries on `[lo, hi]`: sign changes of the oscillating
    /// example or jumps, refined to width at most 0.05.
    pub fn panel_cuts(&self, lo: f64, hi: f64) -> Vec<f64> {
        let marks: Vec<f64> = match self.family {
            Family::Figure1 => figure1_zeros(lo)
                .take_while(|&z| z < hi)
                .filter(|&z| z > lo)
                .collect(),
            _ => {
                let mut m = self.breakpoints(lo, hi);
                m.retain(|&x| x != self.r_max);
                m
            }
        };
        cuts_with(lo, hi, &marks, 0.05)
    }

    /// Gauss–Legendre nodes of each panel from [`Potential::panel_cuts`].
    pub fn panel_nodes(&self, lo: f64, hi: f64, order: usize) -> Vec<Vec<(f64, f64)>> {
        let rule = gauss_legendre(order);
        self.panel_cuts(lo, hi)
            .windows(2)
            .map(|w| rule.mapped(w[0], w[1]).collect())
            .collect()
    }
}

/// Rows `(r, f(r), ∫_r^∞ f)` of the oscillating example on a grid.
pub fn figure1_table(grid: &Grid) -> Result<Vec<[f64; 3]>, PotentialError> {
    let p = Potential::figure1();
    grid.points()
        .par_iter()
        .map(|&r| Ok([r, p.eval(r).re, p.tail_integral(r)?.re]))
        .collect()
}

/// CSV with header `r,f,tail`.
pub fn write_figure1_csv<W: std::io::Write>(rows: &[[f64; 3]], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["r", "f", "tail"])?;
    for row in rows {
        out.write_record(row.iter().map(|&x| crate::report::fmt_num(x)))?;
    }
    out.flush()?;
    Ok(())
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |c: &Complex64| {
            let v = c * self.gain;
            if v.im == 0.0 {
                format!("{}", v.re)
            } else {
                format!("{}{:+}i", v.re, v.im)
            }
        };
        match &self.family {
            Family::Zero => write!(f, "zero"),
            Family::Constant { c: v, cutoff: None } => write!(f, "constant:{}", c(v)),
            Family::Constant {
                c: v,
                cutoff: Some(l),
            } => write!(f, "constant:{},{}", c(v), l),
            Family::Box { c: v, length } => write!(f, "box:{},{}", c(v), length),
            Family::Gaussian { c: v, scale } => write!(f, "gaussian:{},{}", c(v), scale),
            Family::Figure1 if self.gain == Complex64::new(1.0, 0.0) => write!(f, "figure1"),
            Family::Figure1 => write!(f, "figure1*{}", c(&Complex64::new(1.0, 0.0))),
            Family::Sampled { grid, .. } => write!(f, "sampled[{} nodes]", grid.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn box_values_and_tail() {
        let p = Potential::box_(1.0, 1.0).unwrap();
        assert_eq!(p.eval(0.5), c(1.0));
        assert_eq!(p.eval(2.0), c(0.0));
        assert!((p.tail_integral(0.5).unwrap() - 0.5).norm() < 1e-14);
        assert_eq!(p.tail_integral(2.0).unwrap(), c(0.0));
        assert!((p.l2_norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn figure1_value() {
        let p = Potential::figure1();
        assert!((p.eval(0.0).re - 1f64.sin()).abs() < 1e-15);
        assert!((p.eval(0.0).re - 0.841471).abs() < 1e-6);
        assert_eq!(p.r_max(), FIGURE1_R_MAX);
    }

    #[test]
    fn zero_norm() {
        assert_eq!(Potential::zero().l2_norm(), 0.0);
    }

    #[test]
    fn gaussian_norm_closed_form() {
        let p = Potential::gaussian(1.0, 1.0).unwrap();
        let exact = ((2.0 * PI).sqrt() / 4.0).sqrt();
        assert!(((p.l2_norm() - exact) / exact).abs() < 1e-12);
    }

    #[test]
    fn unbounded_constant() {
        let p = Potential::constant(1.0, None).unwrap();
        assert!(p.l2_norm().is_infinite());
        assert!(matches!(
            p.tail_integral(0.0),
            Err(PotentialError::Divergent(_))
        ));
    }

    #[test]
    fn spec_strings() {
        assert!(Potential::from_spec("box:1,1").is_ok());
        assert!(Potential::from_spec("gaussian:1,1").is_ok());
        assert!(Potential::from_spec("figure1").is_ok());
        assert!(Potential::from_spec("constant:0.25,3").is_ok());
        assert!(matches!(
            Potential::from_spec("wavy:1"),
            Err(PotentialError::UnknownFamily(_))
        ));
        assert!(Potential::from_spec("box:1").is_err());
        assert!(Potential::from_spec("box:1,-1").is_err());
        assert_eq!(
            Potential::from_spec("box:1,1").unwrap().to_string(),
            "box:1,1"
        );
    }

    #[test]
    fn sampled_interpolation_and_validation() {
        let p = Potential::sampled(vec![0.0, 1.0, 2.0], vec![c(0.0), c(1.0), c(0.0)]).unwrap();
        assert!((p.eval(0.5).re - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(3.0), c(0.0));
        assert!((p.tail_integral(0.0).unwrap().re - 1.0).abs() < 1e-14);
        assert!(Potential::sampled(vec![0.0, 0.0], vec![c(1.0), c(1.0)]).is_err());
        assert!(Potential::sampled(vec![0.0, 1.0], vec![c(1.0), c(f64::NAN)]).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let ok = "r,re,im\n0,1,0\n1,0.5,0.25\n2,0,0\n";
        let p = Potential::from_csv_reader(ok.as_bytes()).unwrap();
        assert!((p.eval(1.0) - Complex64::new(0.5, 0.25)).norm() < 1e-15);
        assert!(Potential::from_csv_reader("x,y,z\n0,1,0\n1,1,0\n".as_bytes()).is_err());
        assert!(Potential::from_csv_reader("r,re,im\n0,NaN,0\n1,1,0\n".as_bytes()).is_err());
        assert!(Potential::from_csv_reader("r,re,im\n0,1\n1,1,0\n".as_bytes()).is_err());
        assert!(Potential::from_csv_reader("r,re,im\n1,1,0\n0,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn scaling() {
        let p = Potential::gaussian(1.0, 1.0).unwrap();
        let q = p.scaled(0.5);
        assert!((q.eval(0.3) - p.eval(0.3) * 0.5).norm() < 1e-16);
        assert!((q.l2_norm() - 0.5 * p.l2_norm()).abs() < 1e-15);
    }
}
