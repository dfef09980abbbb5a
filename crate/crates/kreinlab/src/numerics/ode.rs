use nalgebra::{Matrix2, SMatrix, SVector};

use super::{Grid, NumericsError, Scalar};

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Local error per unit length, relative to `1 + |y_i|` componentwise.
    pub tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Points the stepper must land on (discontinuities of the right-hand side).
    pub breakpoints: Vec<f64>,
    pub keep_dense: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            h_max: 0.25,
            max_steps: 5_000_000,
            breakpoints: Vec::new(),
            keep_dense: false,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn dense(mut self) -> Self {
        self.keep_dense = true;
        self
    }
}

#[derive(Debug, Clone)]
struct DenseStep<S: Scalar, const N: usize> {
    t: f64,
    h: f64,
    r: [SVector<S, N>; 5],
}

impl<S: Scalar, const N: usize> DenseStep<S, N> {
    fn eval(&self, t: f64) -> SVector<S, N> {
        let th = ((t - self.t) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.r;
        r1 + (r2 + (r3 + (r4 + r5 * S::from_real(th1)) * S::from_real(th)) * S::from_real(th1))
            * S::from_real(th)
    }
}

/// Continuous extension of an accepted trajectory.
#[derive(Debug, Clone)]
pub struct DenseSolution<S: Scalar, const N: usize> {
    steps: Vec<DenseStep<S, N>>,
}

impl<S: Scalar, const N: usize> DenseSolution<S, N> {
    pub fn eval(&self, t: f64) -> SVector<S, N> {
        let idx = self
            .steps
            .partition_point(|s| s.t + s.h < t)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(t)
    }

    /// Step boundaries, including both ends.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.steps.iter().map(|s| s.t).collect();
        if let Some(last) = self.steps.last() {
            m.push(last.t + last.h);
        }
        m
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map(|s| s.t + s.h).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution<S: Scalar, const N: usize> {
    pub samples: Vec<SVector<S, N>>,
    pub final_state: SVector<S, N>,
    pub dense: Option<DenseSolution<S, N>>,
    pub accepted: usize,
    pub rejected: usize,
}

fn to_c64_vec<S: Scalar, const N: usize>(y: &SVector<S, N>) -> Vec<num_complex::Complex64> {
    y.iter().map(|v| v.to_c64()).collect()
}

/// Integrate `y' = rhs(t, y)` from `t0` to `t_end` with the Dormand–Prince
/// 5(4) pair, sampling the dense output at `sample_at` (increasing, inside
/// `[t0, t_end]`).
pub fn integrate<S, const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: SVector<S, N>,
    t_end: f64,
    sample_at: &[f64],
    opts: &OdeOptions,
) -> Result<OdeSolution<S, N>, NumericsError>
where
    S: Scalar,
    F: FnMut(f64, &SVector<S, N>) -> SVector<S, N>,
{
    if !(t_end >= t0) {
        return Err(NumericsError::Domain(format!(
            "integration interval [{t0}, {t_end}] is reversed"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(NumericsError::Domain("tolerance must be positive".into()));
    }
    if sample_at.windows(2).any(|w| w[1] < w[0])
        || sample_at
            .iter()
            .any(|&t| t < t0 - 1e-12 || t > t_end + 1e-12)
    {
        return Err(NumericsError::Domain(
            "sample points must be increasing and inside the interval".into(),
        ));
    }
    let tol = opts.tol.max(1e-14);
    let mut stops: Vec<f64> = opts
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0 && b < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t_end);

    let mut samples = Vec::with_capacity(sample_at.len());
    let mut next_sample = 0;
    while next_sample < sample_at.len() && sample_at[next_sample] <= t0 {
        samples.push(y0);
        next_sample += 1;
    }
    let mut dense = if opts.keep_dense {
        Some(Vec::new())
    } else {
        None
    };
    let mut t = t0;
    let mut y = y0;
    let mut accepted = 0;
    let mut rejected = 0;
    let span = (t_end - t0).max(f64::MIN_POSITIVE);
    let mut h = (0.01 * span).min(opts.h_max).min(0.01);

    for &stop in &stops {
        if stop <= t {
            continue;
        }
        // One-sided limits at segment ends so jumps at breakpoints are not
        // sampled; the margin survives affine reparametrizations of t.
        let seg_start = t;
        let margin = |x: f64| 1e-12 * x.abs().max(1.0);
        let inside = |tt: f64| -> f64 {
            if tt >= stop - margin(stop) {
                stop - margin(stop)
            } else if seg_start > t0 && tt <= seg_start + margin(seg_start) {
                seg_start + margin(seg_start)
            } else {
                tt
            }
        };
        let mut k1 = rhs(inside(t), &y);
        while t < stop {
            if accepted + rejected >= opts.max_steps {
                return Err(NumericsError::StepBudget {
                    t,
                    max_steps: opts.max_steps,
                    state: to_c64_vec(&y),
                });
            }
            let remaining = stop - t;
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            } else if h > 0.5 * remaining {
                h = 0.5 * remaining;
            }
            let hs = S::from_real(h);
            let k2 = rhs(inside(t + C2 * h), &(y + k1 * (hs * S::from_real(A21))));
            let k3 = rhs(
                inside(t + C3 * h),
                &(y + (k1 * S::from_real(A31) + k2 * S::from_real(A32)) * hs),
            );
            let k4 = rhs(
                inside(t + C4 * h),
                &(y + (k1 * S::from_real(A41) + k2 * S::from_real(A42) + k3 * S::from_real(A43))
                    * hs),
            );
            let k5 = rhs(
                inside(t + C5 * h),
                &(y + (k1 * S::from_real(A51)
                    + k2 * S::from_real(A52)
                    + k3 * S::from_real(A53)
                    + k4 * S::from_real(A54))
                    * hs),
            );
            let t_new = if last { stop } else { t + h };
            let k6 = rhs(
                inside(t_new),
                &(y + (k1 * S::from_real(A61)
                    + k2 * S::from_real(A62)
                    + k3 * S::from_real(A63)
                    + k4 * S::from_real(A64)
                    + k5 * S::from_real(A65))
                    * hs),
            );
            let y_new = y
                + (k1 * S::from_real(A71)
                    + k3 * S::from_real(A73)
                    + k4 * S::from_real(A74)
                    + k5 * S::from_real(A75)
                    + k6 * S::from_real(A76))
                    * hs;
            let k7 = rhs(inside(t_new), &y_new);
            let err_vec = (k1 * S::from_real(E1)
                + k3 * S::from_real(E3)
                + k4 * S::from_real(E4)
                + k5 * S::from_real(E5)
                + k6 * S::from_real(E6)
                + k7 * S::from_real(E7))
                * hs;
            let mut err = 0.0_f64;
            for i in 0..N {
                let scale = tol * h * (1.0 + y[i].modulus().max(y_new[i].modulus()));
                err = err.max(err_vec[i].modulus() / scale);
            }
            if !err.is_finite() {
                err = 1e10;
            }
            if err <= 1.0 {
                accepted += 1;
                let ydiff = y_new - y;
                let bspl = k1 * hs - ydiff;
                let step = DenseStep {
                    t,
                    h: t_new - t,
                    r: [
                        y,
                        ydiff,
                        bspl,
                        ydiff - k7 * hs - bspl,
                        (k1 * S::from_real(D1)
                            + k3 * S::from_real(D3)
                            + k4 * S::from_real(D4)
                            + k5 * S::from_real(D5)
                            + k6 * S::from_real(D6)
                            + k7 * S::from_real(D7))
                            * hs,
                    ],
                };
                while next_sample < sample_at.len() && sample_at[next_sample] <= t_new {
                    let ts = sample_at[next_sample];
                    samples.push(if ts >= t_new { y_new } else { step.eval(ts) });
                    next_sample += 1;
                }
                if let Some(d) = dense.as_mut() {
                    d.push(step);
                }
                t = t_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.25)).clamp(0.2, 5.0)
                };
                h = (h * fac).min(opts.h_max);
            } else {
                rejected += 1;
                h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(NumericsError::StepUnderflow {
                        t,
                        state: to_c64_vec(&y),
                    });
                }
            }
        }
    }
    while next_sample < sample_at.len() {
        samples.push(y);
        next_sample += 1;
    }
    Ok(OdeSolution {
        samples,
        final_state: y,
        dense: dense.map(|steps| DenseSolution { steps }),
        accepted,
        rejected,
    })
}

/// Solve `y' = coeff(t) y` on the grid, `y(grid[0]) = y0`.
pub fn solve_linear_ode<S, const N: usize, F>(
    coeff: F,
    y0: SVector<S, N>,
    grid: &Grid,
    tol: f64,
) -> Result<Vec<SVector<S, N>>, NumericsError>
where
    S: Scalar,
    F: Fn(f64) -> SMatrix<S, N, N>,
{
    let opts = OdeOptions::with_tol(tol);
    solve_linear_ode_with(coeff, y0, grid, &opts)
}

pub fn solve_linear_ode_with<S, const N: usize, F>(
    coeff: F,
    y0: SVector<S, N>,
    grid: &Grid,
    opts: &OdeOptions,
) -> Result<Vec<SVector<S, N>>, NumericsError>
where
    S: Scalar,
    F: Fn(f64) -> SMatrix<S, N, N>,
{
    let pts = grid.points();
    let sol = integrate(
        |t, y: &SVector<S, N>| coeff(t) * y,
        pts[0],
        y0,
        pts[pts.len() - 1],
        pts,
        opts,
    )?;
    Ok(sol.samples)
}

/// Fundamental matrix of `X' = coeff(t) X`, `X(grid[0]) = I`, on the grid.
pub fn solve_fundamental_2x2<S, F>(
    coeff: F,
    grid: &Grid,
    opts: &OdeOptions,
) -> Result<Vec<Matrix2<S>>, NumericsError>
where
    S: Scalar,
    F: Fn(f64) -> Matrix2<S>,
{
    let pts = grid.points();
    let y0 = SVector::<S, 4>::new(S::one(), S::zero(), S::zero(), S::one());
    let sol = integrate(
        |t, y: &SVector<S, 4>| {
            let x = Matrix2::new(y[0], y[1], y[2], y[3]);
            let d = coeff(t) * x;
            SVector::<S, 4>::new(d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)])
        },
        pts[0],
        y0,
        pts[pts.len() - 1],
        pts,
        opts,
    )?;
    Ok(sol
        .samples
        .iter()
        .map(|y| Matrix2::new(y[0], y[1], y[2], y[3]))
        .collect())
}
