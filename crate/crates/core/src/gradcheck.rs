//! Finite-difference verification of the adjoint gradient.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{Component, GridSpec, ScalarField, Transformation, VectorField};
use crate::objective::{ControlField, Problem};
use crate::optimizer::fd_gradient_probe;
use crate::synth::{min_interior_jacobian, monitors_from_map};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub node: (usize, usize),
    pub component: Component,
    pub adjoint: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradientCheck {
    pub probes: Vec<Probe>,
    pub max_rel_error: f64,
}

/// Recovery problem with a random smooth target (sums of low sine modes,
/// boundary fixed) on an identity base, plus a random control whose
/// displacement peaks at half a grid spacing. Same seed, same problem.
pub fn random_recovery_problem(spec: GridSpec, seed: u64) -> Result<(Problem, ControlField)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = [[[0.0; 3]; 3]; 2];
    for c in coeffs.iter_mut().flatten().flatten() {
        *c = rng.random_range(-1.0..1.0);
    }
    let mut amplitude = rng.random_range(0.5..1.5);
    let t0 = loop {
        let t0 = sine_mode_map(spec, &coeffs, amplitude);
        if min_interior_jacobian(&t0).0 > 0.2 {
            break t0;
        }
        amplitude *= 0.5;
    };
    let monitors = monitors_from_map(&t0)?;
    let alpha = rng.random_range(0.2..5.0);
    let problem = Problem::new(Transformation::identity(spec), monitors, alpha, true)?;

    let noise = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..spec.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        ScalarField::from_values(spec, v)
    };
    let raw = ControlField::new(VectorField::new(noise(&mut rng)?, noise(&mut rng)?)?);
    let (u, _) = crate::objective::assemble_transformation(problem.solver(), problem.base(), &raw)?;
    let scale = 0.5 * spec.hx().min(spec.hy()) / u.max_abs().max(f64::MIN_POSITIVE);
    let control = ControlField::new(VectorField::new(
        raw.field().x().scaled(scale),
        raw.field().y().scaled(scale),
    )?);
    Ok((problem, control))
}

fn sine_mode_map(spec: GridSpec, coeffs: &[[[f64; 3]; 3]; 2], amplitude: f64) -> Transformation {
    let disp = |c: &[[f64; 3]; 3], h: f64| {
        ScalarField::from_node_fn(spec, |i, j| {
            if spec.is_boundary(i, j) {
                return 0.0;
            }
            let (s, t) = spec.unit_coords(i, j);
            let mut v = 0.0;
            for (m, row) in c.iter().enumerate() {
                for (n, a) in row.iter().enumerate() {
                    v += a * ((m + 1) as f64 * PI * s).sin() * ((n + 1) as f64 * PI * t).sin();
                }
            }
            amplitude * h * v / 3.0
        })
    };
    let d = VectorField::new(disp(&coeffs[0], spec.hx()), disp(&coeffs[1], spec.hy()))
        .expect("components share a grid");
    Transformation::identity(spec)
        .displaced(&d)
        .expect("same grid")
}

/// Compares `n_probes` random interior gradient entries against central
/// finite differences with step `eps`.
pub fn check_gradient(
    problem: &Problem,
    control: &ControlField,
    n_probes: usize,
    eps: f64,
    seed: u64,
) -> Result<GradientCheck> {
    let g = *problem.spec();
    let t = problem.evaluate(control)?.t;
    let grad = problem.gradient_at(&t)?;
    // entries this far below the gradient scale only carry rounding noise
    let floor = 1e-9 * grad.max_abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut probes = Vec::with_capacity(n_probes);
    for _ in 0..n_probes {
        let node = (
            rng.random_range(1..g.nx() - 1),
            rng.random_range(1..g.ny() - 1),
        );
        let component = if rng.random_bool(0.5) {
            Component::X
        } else {
            Component::Y
        };
        let adjoint = grad.component(component).get(node.0, node.1);
        let finite_difference = fd_gradient_probe(problem, control, node, component, eps)?;
        let scale = adjoint.abs().max(finite_difference.abs()).max(floor);
        let rel_error = if scale > 0.0 {
            (adjoint - finite_difference).abs() / scale
        } else {
            0.0
        };
        probes.push(Probe {
            node,
            component,
            adjoint,
            finite_difference,
            rel_error,
        });
    }
    let max_rel_error = probes.iter().map(|p| p.rel_error).fold(0.0, f64::max);
    Ok(GradientCheck {
        probes,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_problem_is_reproducible() {
        let g = GridSpec::unit_square(9).unwrap();
        let (p1, c1) = random_recovery_problem(g, 7).unwrap();
        let (p2, c2) = random_recovery_problem(g, 7).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(p1.monitors(), p2.monitors());
        let (_, c3) = random_recovery_problem(g, 8).unwrap();
        assert_ne!(c1, c3);
    }

    #[test]
    fn small_grid_gradient_check() {
        let g = GridSpec::unit_square(9).unwrap();
        let (p, c) = random_recovery_problem(g, 3).unwrap();
        let check = check_gradient(&p, &c, 10, 1e-5, 3).unwrap();
        assert_eq!(check.probes.len(), 10);
        assert!(check.max_rel_error <= 1e-5, "{:?}", check);
    }
}
