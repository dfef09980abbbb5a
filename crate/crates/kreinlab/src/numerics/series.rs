use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NumericsError;

fn sample_count(degree: usize) -> usize {
    (2 * (degree + 1)).max(64).next_power_of_two()
}

fn dft_coeffs(samples: &[Complex64], degree: usize, radius: f64) -> Vec<Complex64> {
    let m = samples.len();
    (0..=degree)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let idx = (j * k) % m;
                let theta = -2.0 * std::f64::consts::PI * idx as f64 / m as f64;
                acc += v * Complex64::from_polar(1.0, theta);
            }
            acc / (m as f64 * radius.powi(k as i32))
        })
        .collect()
}

fn circle_samples<F: Fn(Complex64) -> Complex64>(f: &F, m: usize, radius: f64) -> Vec<Complex64> {
    (0..m)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            f(Complex64::from_polar(radius, theta))
        })
        .collect()
}

/// Taylor coefficients `c_0..=c_degree` at the origin from equispaced samples
/// on the circle `|s| = radius`.
pub fn series_coeffs_from_samples<F: Fn(Complex64) -> Complex64>(
    f: F,
    degree: usize,
    radius: f64,
) -> Result<Vec<Complex64>, NumericsError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(NumericsError::Domain(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    let m = sample_count(degree);
    let samples = circle_samples(&f, m, radius);
    Ok(dft_coeffs(&samples, degree, radius))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffEstimate {
    pub value: Complex64,
    /// Round-off bound `ε · max|f| / ρ^k` on the chosen circle.
    pub error_bound: f64,
    pub radius: f64,
}

/// Coefficients extracted on several circles; each index keeps the radius
/// with the smallest round-off bound.
pub fn coeffs_multi_radius<F: Fn(Complex64) -> Complex64>(
    f: F,
    degree: usize,
    radii: &[f64],
) -> Result<Vec<CoeffEstimate>, NumericsError> {
    if radii.is_empty() {
        return Err(NumericsError::Domain("no radii supplied".into()));
    }
    let m = sample_count(degree);
    let mut best: Vec<Option<CoeffEstimate>> = vec![None; degree + 1];
    for &rho in radii {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(NumericsError::Domain(format!("bad radius {rho}")));
        }
        let samples = circle_samples(&f, m, rho);
        let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !peak.is_finite() {
            continue;
        }
        let coeffs = dft_coeffs(&samples, degree, rho);
        for (k, c) in coeffs.into_iter().enumerate() {
            let bound = 8.0 * f64::EPSILON * peak / rho.powi(k as i32);
            if best[k].is_none_or(|b| bound < b.error_bound) {
                best[k] = Some(CoeffEstimate {
                    value: c,
                    error_bound: bound,
                    radius: rho,
                });
            }
        }
    }
    best.into_iter()
        .map(|b| b.ok_or_else(|| NumericsError::Domain("no finite samples on any circle".into())))
        .collect()
}
