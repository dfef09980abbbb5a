//! Shared numerical primitives: quadrature, ODE integration, decay fitting
//! and Taylor coefficient extraction.

mod fit;
mod ode;
mod quad;
mod series;

pub use fit::{fit_decay, DecayFit, FitParams, DEFAULT_FLOOR};
pub use ode::{
    integrate, solve_fundamental_2x2, solve_linear_ode, solve_linear_ode_with, DenseSolution,
    OdeOptions, OdeSolution,
};
pub use quad::{
    adaptive_quad, adaptive_quad_with, alternating_tail, fixed_quad, gauss_legendre, QuadOptions,
    QuadResult, QuadRule,
};
pub use series::{coeffs_multi_radius, series_coeffs_from_samples, CoeffEstimate};

use nalgebra::ComplexField;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scalar types the kernel integrates: `f64` and `Complex64`.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.real(), self.imaginary())
    }
}

impl Scalar for f64 {}
impl Scalar for Complex64 {}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature did not converge: best estimate {best}, achieved error {achieved:e}")]
    NonConvergence { best: Complex64, achieved: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64, state: Vec<Complex64> },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget {
        t: f64,
        max_steps: usize,
        state: Vec<Complex64>,
    },
    #[error("insufficient data: {usable} usable samples, need {needed}")]
    InsufficientData { usable: usize, needed: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Strictly increasing, finite, nonempty set of abscissae with nonnegative left end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self, NumericsError> {
        if points.is_empty() {
            return Err(NumericsError::InvalidGrid("empty".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(NumericsError::InvalidGrid("non-finite abscissa".into()));
        }
        if points[0] < 0.0 {
            return Err(NumericsError::InvalidGrid(format!(
                "left endpoint {} is negative",
                points[0]
            )));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NumericsError::InvalidGrid("not strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// `n` intervals of equal width on `[a, b]`, endpoints exact.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, NumericsError> {
        if n == 0 || !(b > a) {
            return Err(NumericsError::InvalidGrid(format!(
                "uniform grid needs a < b and n > 0 (got [{a}, {b}], n = {n})"
            )));
        }
        let h = (b - a) / n as f64;
        let mut points: Vec<f64> = (0..=n).map(|k| a + h * k as f64).collect();
        points[n] = b;
        Self::new(points)
    }

    /// Points `a, a+step, ...` up to `b` (inclusive within a relative slack).
    pub fn stepped(a: f64, b: f64, step: f64) -> Result<Self, NumericsError> {
        if !(step > 0.0) {
            return Err(NumericsError::InvalidGrid("step must be positive".into()));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        let points = (0..=n).map(|k| a + step * k as f64).collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

impl TryFrom<Vec<f64>> for Grid {
    type Error = NumericsError;
    fn try_from(points: Vec<f64>) -> Result<Self, Self::Error> {
        Grid::new(points)
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.points
    }
}
