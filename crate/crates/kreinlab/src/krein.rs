//! Krein system `P' = iλP − ā P_*`, `P_*' = −a P`, `P(0) = P_*(0) = 1`, and
//! the identities, Christoffel functions and Szegő limits built on it.

use std::f64::consts::PI;

use nalgebra::SVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{
    fit_decay, gauss_legendre, integrate, DecayFit, DenseSolution, Grid, NumericsError, OdeOptions,
    OdeSolution, DEFAULT_FLOOR,
};
use crate::potential::{Potential, PotentialError};
use crate::report::fmt_num;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_HORIZON: f64 = 40.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

type State = SVector<Complex64, 3>;

#[derive(Debug, Error)]
pub enum KreinError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Newton iteration did not converge after {} steps (last |P_*| = {:e})", .trace.len(), .trace.last().map(|t| t.1).unwrap_or(f64::NAN))]
    NoConvergence { trace: Vec<(Complex64, f64)> },
    #[error("converged to {z}, which lies in the open upper half-plane")]
    RejectedRoot { z: Complex64 },
}

/// `(P, P_*)` and `∫_0^r |P|²` on an r-grid for fixed λ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KreinPath {
    pub lambda: Complex64,
    pub r_grid: Grid,
    pub p: Vec<Complex64>,
    pub p_star: Vec<Complex64>,
    pub cum_p2: Vec<f64>,
}

impl KreinPath {
    /// CSV with header `r,ReP,ImP,RePstar,ImPstar,cumP2`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "ReP", "ImP", "RePstar", "ImPstar", "cumP2"])?;
        for (i, r) in self.r_grid.points().iter().enumerate() {
            out.write_record([
                fmt_num(*r),
                fmt_num(self.p[i].re),
                fmt_num(self.p[i].im),
                fmt_num(self.p_star[i].re),
                fmt_num(self.p_star[i].im),
                fmt_num(self.cum_p2[i]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `P_*(horizon, λ)` as an approximation of `Π(λ)` (up to a unimodular phase).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SzegoValue {
    pub lambda: Complex64,
    pub value: Complex64,
    pub horizon: f64,
    /// `|P_*(horizon) − P_*(horizon/2)|`.
    pub est_error: f64,
    pub warning: Option<String>,
}

/// State of the Krein system at a single r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KreinState {
    pub p: Complex64,
    pub p_star: Complex64,
    pub cum_p2: f64,
}

fn krein_solve(
    pot: &Potential,
    lambda: Complex64,
    r_end: f64,
    sample_at: &[f64],
    tol: f64,
    dense: bool,
) -> Result<OdeSolution<Complex64, 3>, KreinError> {
    if !(r_end >= 0.0) || !r_end.is_finite() {
        return Err(KreinError::Domain(format!("bad integration end {r_end}")));
    }
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(KreinError::Domain(
            "spectral parameter must be finite".into(),
        ));
    }
    // Past the support P_* is frozen and P is a pure phase; continue in closed form.
    let support = pot
        .support_bound()
        .unwrap_or(f64::INFINITY)
        .min(pot.r_max());
    if !dense && support < r_end {
        let inner: Vec<f64> = sample_at
            .iter()
            .copied()
            .filter(|&r| r <= support)
            .collect();
        let sol = krein_solve(pot, lambda, support, &inner, tol, false)?;
        let end = sol.final_state;
        let extend = |r: f64| {
            let t = r - support;
            let kappa = lambda.im;
            let weight = if kappa == 0.0 {
                t
            } else {
                -(-2.0 * kappa * t).exp_m1() / (2.0 * kappa)
            };
            State::new(
                end[0] * (I * lambda * t).exp(),
                end[1],
                Complex64::new(end[2].re + end[0].norm_sqr() * weight, 0.0),
            )
        };
        let mut samples = sol.samples;
        samples.extend(
            sample_at
                .iter()
                .filter(|&&r| r > support)
                .map(|&r| extend(r)),
        );
        return Ok(OdeSolution {
            samples,
            final_state: extend(r_end),
            dense: None,
            accepted: sol.accepted,
            rejected: sol.rejected,
        });
    }
    let mut opts = OdeOptions::with_tol(tol).breakpoints(pot.breakpoints(0.0, r_end));
    opts.keep_dense = dense;
    let rhs = |r: f64, y: &State| {
        let a = pot.eval_truncated(r);
        State::new(
            I * lambda * y[0] - a.conj() * y[1],
            -a * y[0],
            Complex64::new(y[0].norm_sqr(), 0.0),
        )
    };
    let y0 = State::new(ONE, ONE, Complex64::new(0.0, 0.0));
    Ok(integrate(rhs, 0.0, y0, r_end, sample_at, &opts)?)
}

fn state_of(y: &State) -> KreinState {
    KreinState {
        p: y[0],
        p_star: y[1],
        cum_p2: y[2].re,
    }
}

/// Integrate the Krein system from 0 and sample it on `r_grid`.
pub fn solve_krein(
    pot: &Potential,
    lambda: Complex64,
    r_grid: &Grid,
    tol: f64,
) -> Result<KreinPath, KreinError> {
    let sol = krein_solve(pot, lambda, r_grid.last(), r_grid.points(), tol, false)?;
    let mut p = Vec::with_capacity(r_grid.len());
    let mut p_star = Vec::with_capacity(r_grid.len());
    let mut cum_p2 = Vec::with_capacity(r_grid.len());
    for y in &sol.samples {
        p.push(y[0]);
        p_star.push(y[1]);
        cum_p2.push(y[2].re);
    }
    Ok(KreinPath {
        lambda,
        r_grid: r_grid.clone(),
        p,
        p_star,
        cum_p2,
    })
}

/// `(P, P_*, ∫|P|²)` at a single r.
pub fn krein_at(
    pot: &Potential,
    lambda: Complex64,
    r: f64,
    tol: f64,
) -> Result<KreinState, KreinError> {
    let sol = krein_solve(pot, lambda, r, &[], tol, false)?;
    Ok(state_of(&sol.final_state))
}

fn dense_path(
    pot: &Potential,
    lambda: Complex64,
    r: f64,
    tol: f64,
) -> Result<(KreinState, DenseSolution<Complex64, 3>), KreinError> {
    let sol = krein_solve(pot, lambda, r, &[], tol, true)?;
    let dense = sol.dense.expect("dense output requested");
    Ok((state_of(&sol.final_state), dense))
}

/// `∫_0^r P(s, λ) conj(P(s, μ)) ds` from two dense paths. The interpolants
/// are quartic per step, so Gauss–Legendre with 8 nodes on the merged mesh
/// integrates their product exactly.
fn cross_integral(
    a: &DenseSolution<Complex64, 3>,
    b: &DenseSolution<Complex64, 3>,
    r: f64,
) -> Complex64 {
    let mut mesh = a.mesh();
    mesh.extend(b.mesh());
    mesh.retain(|&t| t >= 0.0 && t <= r);
    mesh.push(0.0);
    mesh.push(r);
    mesh.sort_by(f64::total_cmp);
    mesh.dedup();
    let rule = gauss_legendre(8);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in mesh.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            acc += a.eval(t)[0] * b.eval(t)[0].conj() * wt;
        }
    }
    acc
}

/// `|P(r,z) − e^{izr} conj(P_*(r, z̄))|` from two independent solves.
pub fn reflection_residual(
    pot: &Potential,
    z: Complex64,
    r: f64,
    tol: f64,
) -> Result<f64, KreinError> {
    let at_z = krein_at(pot, z, r, tol)?;
    let at_conj = krein_at(pot, z.conj(), r, tol)?;
    Ok((at_z.p - (I * z * r).exp() * at_conj.p_star.conj()).norm())
}

/// Both sides of the Christoffel–Darboux formula at r.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CdSides {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl CdSides {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn christoffel_darboux_sides(
    pot: &Potential,
    lambda: Complex64,
    mu: Complex64,
    r: f64,
    tol: f64,
) -> Result<CdSides, KreinError> {
    let (sl, dl) = dense_path(pot, lambda, r, tol)?;
    let (sm, dm) = if mu == lambda {
        (sl, dl.clone())
    } else {
        dense_path(pot, mu, r, tol)?
    };
    let lhs = sl.p * sm.p.conj() - sl.p_star * sm.p_star.conj();
    let rhs = I * (lambda - mu.conj()) * cross_integral(&dl, &dm, r);
    Ok(CdSides { lhs, rhs })
}

/// `|LHS − RHS|` of the Christoffel–Darboux formula.
pub fn christoffel_darboux_residual(
    pot: &Potential,
    lambda: Complex64,
    mu: Complex64,
    r: f64,
) -> Result<f64, KreinError> {
    Ok(christoffel_darboux_sides(pot, lambda, mu, r, DEFAULT_TOL)?.residual())
}

/// `m_r(z) = (∫_0^r |P(s,z)|² ds)^{-1}`.
pub fn christoffel_m(pot: &Potential, z: Complex64, r: f64) -> Result<f64, KreinError> {
    if !(r > 0.0) {
        return Err(KreinError::Domain(format!(
            "Christoffel function needs r > 0, got {r}"
        )));
    }
    let s = krein_at(pot, z, r, DEFAULT_TOL)?;
    if !(s.cum_p2 > 0.0) {
        return Err(KreinError::Domain("vanishing norm integral".into()));
    }
    Ok(1.0 / s.cum_p2)
}

/// `k_{r,z}(w) = (2π)^{-1} ∫_0^r P(s, w) conj(P(s, z)) ds`.
pub fn reproducing_kernel(
    pot: &Potential,
    z: Complex64,
    r: f64,
    eval_at: Complex64,
) -> Result<Complex64, KreinError> {
    if !(r > 0.0) {
        return Err(KreinError::Domain(format!("kernel needs r > 0, got {r}")));
    }
    let (_, dz) = dense_path(pot, z, r, DEFAULT_TOL)?;
    let dw = if eval_at == z {
        dz.clone()
    } else {
        dense_path(pot, eval_at, r, DEFAULT_TOL)?.1
    };
    Ok(cross_integral(&dw, &dz, r) / (2.0 * PI))
}

/// `P_*(horizon, λ)` with a half-horizon error estimate.
pub fn szego_limit(
    pot: &Potential,
    lambda: Complex64,
    horizon: f64,
    tol: f64,
) -> Result<SzegoValue, KreinError> {
    if !pot.l2_norm().is_finite() {
        return Err(KreinError::Domain(
            "coefficient is not square integrable".into(),
        ));
    }
    if !(horizon > 0.0) {
        return Err(KreinError::Domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let sol = krein_solve(
        pot,
        lambda,
        horizon,
        &[0.5 * horizon, horizon],
        DEFAULT_TOL,
        false,
    )?;
    let half = sol.samples[0][1];
    let value = sol.samples[1][1];
    let est_error = (value - half).norm();
    let warning = (est_error > tol)
        .then(|| format!("half-horizon difference {est_error:e} exceeds tolerance {tol:e}"));
    Ok(SzegoValue {
        lambda,
        value,
        horizon,
        est_error,
        warning,
    })
}

/// `| |P_*(H)|² − 2 Im λ ∫_0^H |P|² | / |P_*(H)|²` for Im λ > 0.
pub fn pi_modulus_check(
    pot: &Potential,
    lambda: Complex64,
    horizon: f64,
) -> Result<f64, KreinError> {
    if !(lambda.im > 0.0) {
        return Err(KreinError::Domain(format!(
            "spectral parameter must lie in the upper half-plane, got {lambda}"
        )));
    }
    let s = krein_at(pot, lambda, horizon, DEFAULT_TOL)?;
    let pi2 = s.p_star.norm_sqr();
    Ok((pi2 - 2.0 * lambda.im * s.cum_p2).abs() / pi2)
}

/// Upper bound `exp(‖a‖_{L¹[0,r]} + r (Im z)₋)` on `|P_*(r,z)|`.
pub fn p_star_bound(pot: &Potential, z: Complex64, r: f64) -> Result<f64, KreinError> {
    let l1 = pot.l1_norm_on(0.0, r.min(pot.r_max()))?;
    Ok((l1 + r * (-z.im).max(0.0)).exp())
}

/// Rectangle and resolution of the resonance scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroSearch {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub target: f64,
    pub max_iter: usize,
    pub step: f64,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        Self {
            re_range: (-10.0, 10.0),
            im_range: (-5.0, 0.0),
            nx: 200,
            ny: 100,
            target: 1e-10,
            max_iter: 60,
            step: 1e-6,
        }
    }
}

/// A located zero of `λ ↦ P_*(horizon, λ)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiZero {
    pub z: Complex64,
    pub residual: f64,
    pub iterations: usize,
    pub horizon: f64,
}

/// Local minima of `|P_*(horizon, ·)|` on the scan rectangle, smallest first.
pub fn scan_pi_modulus(
    pot: &Potential,
    horizon: f64,
    search: &ZeroSearch,
) -> Result<Vec<(Complex64, f64)>, KreinError> {
    let (nx, ny) = (search.nx.max(2), search.ny.max(2));
    let node = |i: usize, j: usize| {
        Complex64::new(
            search.re_range.0
                + (search.re_range.1 - search.re_range.0) * i as f64 / (nx - 1) as f64,
            search.im_range.0
                + (search.im_range.1 - search.im_range.0) * j as f64 / (ny - 1) as f64,
        )
    };
    let values: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let z = node(k % nx, k / nx);
            krein_at(pot, z, horizon, 1e-8).map(|s| s.p_star.norm())
        })
        .collect::<Result<_, _>>()?;
    let at = |i: usize, j: usize| values[j * nx + i];
    let mut minima = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = at(i, j);
            let mut is_min = true;
            for (di, dj) in [
                (-1i64, 0i64),
                (1, 0),
                (0, -1),
                (0, 1),
                (-1, -1),
                (1, 1),
                (-1, 1),
                (1, -1),
            ] {
                let (ii, jj) = (i as i64 + di, j as i64 + dj);
                if ii >= 0
                    && jj >= 0
                    && (ii as usize) < nx
                    && (jj as usize) < ny
                    && at(ii as usize, jj as usize) < v
                {
                    is_min = false;
                    break;
                }
            }
            if is_min {
                minima.push((node(i, j), v));
            }
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(minima)
}

/// Newton iteration on `λ ↦ P_*(horizon, λ)` from `seed`.
pub fn find_pi_zero(pot: &Potential, seed: Complex64, horizon: f64) -> Result<PiZero, KreinError> {
    find_pi_zero_with(pot, seed, horizon, &ZeroSearch::default())
}

pub fn find_pi_zero_with(
    pot: &Potential,
    seed: Complex64,
    horizon: f64,
    search: &ZeroSearch,
) -> Result<PiZero, KreinError> {
    let f = |z: Complex64| krein_at(pot, z, horizon, DEFAULT_TOL).map(|s| s.p_star);
    let h = search.step;
    let mut z = seed;
    let mut fz = f(z)?;
    let mut trace = vec![(z, fz.norm())];
    for it in 0..search.max_iter {
        if fz.norm() < search.target {
            if z.im > 1e-10 {
                return Err(KreinError::RejectedRoot { z });
            }
            return Ok(PiZero {
                z,
                residual: fz.norm(),
                iterations: it,
                horizon,
            });
        }
        let hr = Complex64::new(h, 0.0);
        let hi = Complex64::new(0.0, h);
        let d_re = (f(z + hr)? - f(z - hr)?) / (2.0 * hr);
        let d_im = (f(z + hi)? - f(z - hi)?) / (2.0 * hi);
        let deriv = 0.5 * (d_re + d_im);
        if !(deriv.norm() > 0.0) || !deriv.norm().is_finite() {
            return Err(KreinError::NoConvergence { trace });
        }
        let mut step = fz / deriv;
        let mut accepted = false;
        for _ in 0..12 {
            let cand = z - step;
            let fc = f(cand)?;
            if fc.norm() < fz.norm() {
                z = cand;
                fz = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trace.push((z, fz.norm()));
        if !accepted {
            break;
        }
    }
    if fz.norm() < search.target {
        if z.im > 1e-10 {
            return Err(KreinError::RejectedRoot { z });
        }
        return Ok(PiZero {
            z,
            residual: fz.norm(),
            iterations: trace.len() - 1,
            horizon,
        });
    }
    Err(KreinError::NoConvergence { trace })
}

/// Scan the rectangle, then polish the deepest minima by Newton until one
/// converges.
pub fn locate_pi_zero(
    pot: &Potential,
    horizon: f64,
    search: &ZeroSearch,
) -> Result<PiZero, KreinError> {
    let minima = scan_pi_modulus(pot, horizon, search)?;
    let mut last_err = KreinError::NoConvergence { trace: Vec::new() };
    for (seed, _) in minima.into_iter().take(8) {
        match find_pi_zero_with(pot, seed, horizon, search) {
            Ok(z) => return Ok(z),
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

/// `(r, |P(r, z₀)|)` on the window.
pub fn decay_probe_samples(
    pot: &Potential,
    z0: Complex64,
    window: &Grid,
) -> Result<Vec<(f64, f64)>, KreinError> {
    let path = solve_krein(pot, z0, window, DEFAULT_TOL)?;
    Ok(window
        .points()
        .iter()
        .zip(&path.p)
        .map(|(&r, p)| (r, p.norm()))
        .collect())
}

/// Decay class of `|P(r, z₀)|` on the window.
pub fn decay_probe_d(
    pot: &Potential,
    z0: Complex64,
    window: &Grid,
) -> Result<DecayFit, KreinError> {
    if !(z0.im > 0.0) {
        return Err(KreinError::Domain(format!(
            "probe point must lie in the upper half-plane, got {z0}"
        )));
    }
    let samples = decay_probe_samples(pot, z0, window)?;
    Ok(fit_decay(&samples, DEFAULT_FLOOR)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_system() {
        let s = krein_at(&Potential::zero(), c(2.0, 0.0), 1.0, DEFAULT_TOL).unwrap();
        assert!((s.p - c(0.0, 2.0).exp()).norm() < 1e-10);
        assert_eq!(s.p_star, c(1.0, 0.0));
    }

    #[test]
    fn initial_values_exact() {
        let grid = Grid::uniform(0.0, 2.0, 20).unwrap();
        let path = solve_krein(
            &Potential::gaussian(1.0, 1.0).unwrap(),
            c(0.3, 0.2),
            &grid,
            1e-10,
        )
        .unwrap();
        assert_eq!(path.p[0], c(1.0, 0.0));
        assert_eq!(path.p_star[0], c(1.0, 0.0));
        assert_eq!(path.cum_p2[0], 0.0);
    }

    #[test]
    fn christoffel_free_values() {
        let z = Potential::zero();
        assert!((christoffel_m(&z, c(1.0, 0.0), 2.0).unwrap() - 0.5).abs() < 1e-12);
        let exact = 2.0 / (1.0 - (-2.0f64).exp());
        assert!((christoffel_m(&z, c(0.0, 1.0), 1.0).unwrap() - exact).abs() < 1e-9);
        assert!(christoffel_m(&z, c(0.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn free_kernel() {
        let z = Potential::zero();
        let k = reproducing_kernel(&z, c(0.0, 1.0), 1.0, c(0.0, 1.0)).unwrap();
        let exact = (1.0 - (-2.0f64).exp()) / (4.0 * PI);
        assert!((k - exact).norm() < 1e-10);
        let k = reproducing_kernel(&z, c(0.7, 0.0), 3.0, c(0.7, 0.0)).unwrap();
        assert!((k - 3.0 / (2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn zero_potential_has_no_resonance() {
        assert!(find_pi_zero(&Potential::zero(), c(1.0, -1.0), 5.0).is_err());
    }

    #[test]
    fn pi_check_needs_upper_half_plane() {
        assert!(pi_modulus_check(&Potential::zero(), c(1.0, 0.0), 5.0).is_err());
    }
}
