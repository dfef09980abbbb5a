use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Magnitudes at or below this are treated as numerical zero.
pub const DEFAULT_FLOOR: f64 = 1e-13;

const ALPHA_MIN: f64 = 0.1;
const ALPHA_MAX: f64 = 8.0;
const ALPHA_STEP: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub alpha_hat: f64,
    pub c_hat: f64,
    /// Additive offset `d` in `-ln m ≈ c r^α + d`.
    pub offset: f64,
    /// RMS misfit of `ln(-ln m)` against `ln(c r^α + d)`.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples_used: usize,
    pub sub_exponential: bool,
}

/// Stretched-exponential decay class of a sampled magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayFit {
    IdenticallyZeroTail { window: (f64, f64) },
    Fitted(FitParams),
}

impl DecayFit {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            DecayFit::Fitted(p) => Some(p.alpha_hat),
            DecayFit::IdenticallyZeroTail { .. } => None,
        }
    }

    pub fn params(&self) -> Option<&FitParams> {
        match self {
            DecayFit::Fitted(p) => Some(p),
            DecayFit::IdenticallyZeroTail { .. } => None,
        }
    }

    pub fn is_zero_tail(&self) -> bool {
        matches!(self, DecayFit::IdenticallyZeroTail { .. })
    }
}

struct Line {
    slope: f64,
    intercept: f64,
    sse: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Option<Line> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if !(sxx > 0.0) || !sxx.is_finite() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    Some(Line {
        slope,
        intercept,
        sse,
    })
}

fn profile(r: &[f64], y: &[f64], alpha: f64) -> Option<Line> {
    let x: Vec<f64> = r.iter().map(|ri| ri.powf(alpha)).collect();
    least_squares(&x, y).filter(|l| l.slope > 0.0)
}

/// Fit `m(r) ≈ exp(-c r^α - d)` to the decreasing envelope of the samples.
///
/// For each α on a fine grid the rate `c` and offset `d` come from linear
/// least squares on `-ln m`; α minimizing the profile misfit is then refined
/// by golden-section search.
pub fn fit_decay(samples: &[(f64, f64)], floor: f64) -> Result<DecayFit, NumericsError> {
    if !(floor > 0.0) {
        return Err(NumericsError::Domain("floor must be positive".into()));
    }
    if samples.is_empty() {
        return Err(NumericsError::InsufficientData {
            usable: 0,
            needed: 4,
        });
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(NumericsError::Domain(
                "sample abscissae must increase".into(),
            ));
        }
    }
    if samples
        .iter()
        .any(|&(r, m)| !r.is_finite() || r < 0.0 || !m.is_finite() || m < 0.0)
    {
        return Err(NumericsError::Domain(
            "samples must be finite with r >= 0 and m >= 0".into(),
        ));
    }
    let window_all = (samples[0].0, samples[samples.len() - 1].0);
    if samples.iter().all(|&(_, m)| m <= floor) {
        return Ok(DecayFit::IdenticallyZeroTail { window: window_all });
    }

    let mut envelope = vec![0.0; samples.len()];
    let mut running = 0.0_f64;
    for (i, &(_, m)) in samples.iter().enumerate().rev() {
        running = running.max(m);
        envelope[i] = running;
    }
    let (r, y): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .zip(&envelope)
        .filter(|(_, &e)| e > floor && e < 1.0)
        .map(|(&(ri, _), &e)| (ri, -e.ln()))
        .unzip();
    if r.len() < 4 {
        return Err(NumericsError::InsufficientData {
            usable: r.len(),
            needed: 4,
        });
    }

    let steps = ((ALPHA_MAX - ALPHA_MIN) / ALPHA_STEP).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..=steps {
        let alpha = ALPHA_MIN + ALPHA_STEP * k as f64;
        if let Some(l) = profile(&r, &y, alpha) {
            if best.is_none_or(|(_, s)| l.sse < s) {
                best = Some((alpha, l.sse));
            }
        }
    }
    let (alpha0, _) = best.ok_or_else(|| {
        NumericsError::Domain("samples do not decay along any stretched exponential".into())
    })?;

    let sse = |a: f64| profile(&r, &y, a).map_or(f64::INFINITY, |l| l.sse);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (
        (alpha0 - ALPHA_STEP).max(ALPHA_MIN),
        (alpha0 + ALPHA_STEP).min(ALPHA_MAX),
    );
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let (mut f1, mut f2) = (sse(x1), sse(x2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = sse(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = sse(x2);
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    if sse(alpha) > sse(alpha0) {
        alpha = alpha0;
    }
    let line = profile(&r, &y, alpha).expect("profile exists at the optimum");
    let (c, d) = (line.slope, line.intercept);
    let residual = (r
        .iter()
        .zip(&y)
        .map(|(ri, yi)| {
            let model = (c * ri.powf(alpha) + d).max(f64::MIN_POSITIVE);
            (yi.ln() - model.ln()).powi(2)
        })
        .sum::<f64>()
        / r.len() as f64)
        .sqrt();
    Ok(DecayFit::Fitted(FitParams {
        alpha_hat: alpha,
        c_hat: c,
        offset: d,
        residual,
        window: (r[0], r[r.len() - 1]),
        samples_used: r.len(),
        sub_exponential: alpha < 1.0,
    }))
}
