use std::f64::consts::PI;

use kreinlab::entropy;
use kreinlab::krein::{self, ZeroSearch};
use kreinlab::numerics::{adaptive_quad, Grid};
use kreinlab::ordexp::{f_of_s, CoeffPair};
use kreinlab::Potential;
use num_complex::Complex64;

/// Two integration-by-parts terms of `∫_{e^r}^∞ sin(u) g(u) du` with
/// `g(u) = 1/(u(1+ln u))`.
fn two_term_tail(r: f64) -> f64 {
    let u = r.exp();
    let l = u.ln();
    let g = 1.0 / (u * (1.0 + l));
    let dg = -(2.0 + l) / (u * u * (1.0 + l).powi(2));
    u.cos() * g - u.sin() * dg
}

#[test]
fn figure1_tail_matches_two_term_asymptote() {
    let pot = Potential::figure1();
    for r in [5.0, 6.0, 7.0, 8.0] {
        let tail = pot.tail_integral(r).unwrap().re;
        assert!(
            (tail - two_term_tail(r)).abs() < 1e-7,
            "r = {r}: {tail} vs {}",
            two_term_tail(r)
        );
    }
    let tail3 = pot.tail_integral(3.0).unwrap().re;
    assert!((tail3 - 0.0047802).abs() < 1e-6, "{tail3}");
    assert!((tail3 - two_term_tail(3.0)).abs() < 5e-5);
}

#[test]
fn box_solution_is_frozen_past_support() {
    let pot = Potential::box_(Complex64::new(0.7, -0.4), 1.0).unwrap();
    let lambda = Complex64::new(1.3, 0.4);
    let grid = Grid::uniform(0.0, 4.0, 40).unwrap();
    let path = krein::solve_krein(&pot, lambda, &grid, krein::DEFAULT_TOL).unwrap();
    let i1 = 10;
    assert_eq!(grid.points()[i1], 1.0);
    for (i, &r) in grid.points().iter().enumerate().skip(i1) {
        let phase = (Complex64::i() * lambda * (r - 1.0)).exp();
        assert!((path.p[i] - phase * path.p[i1]).norm() < 1e-9);
        assert!((path.p_star[i] - path.p_star[i1]).norm() < 1e-9);
    }
}

#[test]
fn constant_potential_at_zero_decays_exponentially() {
    let pot = Potential::constant(0.6, None).unwrap();
    let grid = Grid::uniform(0.0, 6.0, 30).unwrap();
    let path =
        krein::solve_krein(&pot, Complex64::new(0.0, 0.0), &grid, krein::DEFAULT_TOL).unwrap();
    for (i, &r) in grid.points().iter().enumerate() {
        assert!((path.p_star[i] - (-0.6 * r).exp()).norm() < 1e-10);
    }
}

#[test]
fn gaussian_pi_zero_on_imaginary_axis() {
    let pot = Potential::gaussian(1.0, 1.0).unwrap();
    let search = ZeroSearch {
        re_range: (-2.0, 2.0),
        im_range: (-2.0, 0.0),
        nx: 20,
        ny: 20,
        ..ZeroSearch::default()
    };
    let zero = krein::locate_pi_zero(&pot, 10.0, &search).unwrap();
    assert!(zero.residual < 1e-10);
    assert!(zero.z.im < 0.0);
    assert!(
        (zero.z - Complex64::new(0.0, -0.7345998254)).norm() < 1e-7,
        "{}",
        zero.z
    );
}

#[test]
fn szego_function_of_free_system_is_one() {
    let v = krein::szego_limit(&Potential::zero(), Complex64::new(0.3, 1.0), 20.0, 1e-12).unwrap();
    assert!((v.value - 1.0).norm() < 1e-12);
}

#[test]
fn constant_pair_gives_sinh_squared() {
    let a = CoeffPair::constant(0.0, 1.0);
    for s in [0.25f64, 0.5, 1.5] {
        let want = (s.sinh() / s).powi(2);
        assert!((f_of_s(&a, s).unwrap() - want).abs() < 1e-10);
    }
}

#[test]
fn box_sobolev_norm_matches_transform() {
    let b = Potential::box_(1.0, 1.0).unwrap();
    let h = entropy::sobolev_h_minus1(&b, 50.0).unwrap();
    let density = |x: f64| {
        let ft = if x.abs() < 1e-4 {
            (1.0 - x * x / 12.0) / (2.0 * PI)
        } else {
            (1.0 - x.cos()) / (PI * x * x)
        };
        ft / (1.0 + x * x)
    };
    let exact = 2.0 * adaptive_quad(density, 0.0, 50.0, 1e-13).unwrap();
    assert!((h.value - exact).abs() < 1e-6);
}

#[test]
fn box_variation_closed_form() {
    let b = Potential::box_(1.0, 1.0).unwrap();
    assert!((entropy::variation_d(&b, 0.0) - 5.0 / 12.0).abs() < 1e-12);
    assert!(entropy::variation_d(&b, 1.0).abs() < 1e-14);
}
