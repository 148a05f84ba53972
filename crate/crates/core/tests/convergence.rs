//! Grid-refinement studies: errors against analytic solutions should drop by
//! about 4x per halving of h.

use std::f64::consts::PI;

use pjgrid::diffops::jacobian_det;
use pjgrid::field::{GridSpec, ScalarField, Transformation};
use pjgrid::poisson::{laplacian5, PoissonSolver};

fn unit(n: usize) -> GridSpec {
    GridSpec::uniform(n, n, [0.0, 1.0, 0.0, 1.0]).unwrap()
}

fn bump(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

fn jacobian_error(n: usize) -> f64 {
    let g = unit(n);
    let (a, b) = (0.08, 0.05);
    // T = (x + a sin(πx) sin(πy), y + b sin(2πx) sin(πy))
    let t = Transformation::from_fn(g, |x, y| {
        (
            x + a * bump(x, y),
            y + b * (2.0 * PI * x).sin() * (PI * y).sin(),
        )
    });
    let exact = |x: f64, y: f64| {
        let t1x = 1.0 + a * PI * (PI * x).cos() * (PI * y).sin();
        let t1y = a * PI * (PI * x).sin() * (PI * y).cos();
        let t2x = b * 2.0 * PI * (2.0 * PI * x).cos() * (PI * y).sin();
        let t2y = 1.0 + b * PI * (2.0 * PI * x).sin() * (PI * y).cos();
        t1x * t2y - t1y * t2x
    };
    let jac = jacobian_det(&t);
    g.interior_nodes()
        .map(|(i, j)| (jac.get(i, j) - exact(g.x(i), g.y(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn jacobian_is_second_order() {
    for n in [17, 33, 65] {
        let ratio = jacobian_error(n) / jacobian_error(2 * n - 1);
        assert!((3.5..=4.5).contains(&ratio), "n={n}: ratio {ratio}");
    }
}

#[test]
fn laplacian_of_sine_bump_is_second_order() {
    let err = |n: usize| {
        let g = unit(n);
        let l = laplacian5(&ScalarField::from_fn(g, bump));
        g.interior_nodes()
            .map(|(i, j)| (l.get(i, j) + 2.0 * PI * PI * bump(g.x(i), g.y(j))).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(17) / err(33);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

pub fn manufactured_error(n: usize) -> f64 {
    let g = unit(n);
    let rhs = ScalarField::from_fn(g, |x, y| -2.0 * PI * PI * bump(x, y));
    let u = PoissonSolver::new(g).solve_zero(&rhs).unwrap();
    g.nodes()
        .map(|(i, j)| (u.get(i, j) - bump(g.x(i), g.y(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn manufactured_poisson_solution_is_second_order() {
    for n in [9, 17, 33, 65] {
        let ratio = manufactured_error(n) / manufactured_error(2 * n - 1);
        assert!((3.5..=4.5).contains(&ratio), "n={n}: ratio {ratio}");
    }
}

#[test]
fn manufactured_rectangle() {
    // anisotropic spacing exercises hx != hy
    let err = |n: usize| {
        let g = GridSpec::uniform(n, 2 * n - 1, [0.0, 2.0, -1.0, 0.5]).unwrap();
        let u = |x: f64, y: f64| (PI * x / 2.0).sin() * (PI * (y + 1.0) / 1.5).sin();
        let lap = -(PI * PI / 4.0 + PI * PI / 2.25);
        let rhs = ScalarField::from_fn(g, |x, y| lap * u(x, y));
        let s = PoissonSolver::new(g).solve_zero(&rhs).unwrap();
        g.nodes()
            .map(|(i, j)| (s.get(i, j) - u(g.x(i), g.y(j))).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(17) / err(33);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}
