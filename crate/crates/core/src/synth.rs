//! Synthetic target maps for recovery experiments and boundary-matching base
//! maps.
//!
//! The targets are smooth sine perturbations of the identity with nonzero
//! curl. Amplitudes are in node units: a displacement of amplitude 1 moves a
//! node by one grid spacing.

use std::f64::consts::PI;

use crate::diffops::{curl2d, jacobian_det};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, Transformation, VectorField};
use crate::objective::MonitorPair;
use crate::poisson::PoissonSolver;

pub const DEFAULT_FIXED_AMPLITUDE: f64 = 2.0;
pub const DEFAULT_MOVING_AMPLITUDE: f64 = 1.0;

/// `id + amplitude * (hx sin(2πs) sin(πt), hy sin(πs) sin(2πt))`.
///
/// The displacement is exactly zero on the boundary. Fails if the map folds
/// (some interior Jacobian is not positive).
pub fn default_fixed_boundary_map(spec: GridSpec, amplitude: f64) -> Result<Transformation> {
    check_amplitude(amplitude)?;
    let t = Transformation::identity(spec).displaced(&fixed_displacement(spec, amplitude))?;
    check_unfolded(&t)?;
    Ok(t)
}

fn fixed_displacement(spec: GridSpec, amplitude: f64) -> VectorField {
    let bump = |i: usize, j: usize, fx: f64, fy: f64, h: f64| {
        if spec.is_boundary(i, j) {
            return 0.0;
        }
        let (s, t) = spec.unit_coords(i, j);
        amplitude * h * (fx * PI * s).sin() * (fy * PI * t).sin()
    };
    VectorField::new(
        ScalarField::from_node_fn(spec, |i, j| bump(i, j, 2.0, 1.0, spec.hx())),
        ScalarField::from_node_fn(spec, |i, j| bump(i, j, 1.0, 2.0, spec.hy())),
    )
    .expect("components share a grid")
}

/// [`default_fixed_boundary_map`] at the default amplitude, with boundary
/// nodes slid tangentially by `amplitude * sin(2π r)` (`r` the fraction of
/// edge length) and the slide blended inward with `cos^2`. Corners stay put.
pub fn default_moving_boundary_map(spec: GridSpec, amplitude: f64) -> Result<Transformation> {
    moving_boundary_map(spec, DEFAULT_FIXED_AMPLITUDE, amplitude)
}

/// Fixed-boundary target with interior amplitude `interior` plus a boundary
/// slide of amplitude `slide`.
pub fn moving_boundary_map(spec: GridSpec, interior: f64, slide: f64) -> Result<Transformation> {
    check_amplitude(interior)?;
    check_amplitude(slide)?;
    let (nx, ny) = (spec.nx(), spec.ny());
    // x slide vanishes on the left/right edges, y slide on the bottom/top
    let sx = ScalarField::from_node_fn(spec, |i, j| {
        if i == 0 || i + 1 == nx {
            return 0.0;
        }
        let (s, t) = spec.unit_coords(i, j);
        slide * spec.hx() * (2.0 * PI * s).sin() * (PI * t).cos().powi(2)
    });
    let sy = ScalarField::from_node_fn(spec, |i, j| {
        if j == 0 || j + 1 == ny {
            return 0.0;
        }
        let (s, t) = spec.unit_coords(i, j);
        slide * spec.hy() * (2.0 * PI * t).sin() * (PI * s).cos().powi(2)
    });
    let d = fixed_displacement(spec, interior).axpy(1.0, &VectorField::new(sx, sy)?)?;
    let t = Transformation::identity(spec).displaced(&d)?;
    check_simple_boundary(&t)?;
    check_unfolded(&t)?;
    Ok(t)
}

/// `f0 = J(T0)`, `g0 = curl(T0)` with the same stencils as the objective.
pub fn monitors_from_map(t0: &Transformation) -> Result<MonitorPair> {
    MonitorPair::new(jacobian_det(t0), curl2d(t0))
}

/// Base map `T* = id + w` whose boundary equals the boundary of `target`
/// (interior entries of `target` are ignored), with each component of `w`
/// discretely harmonic. The boundary of `T*` is copied bitwise.
pub fn harmonic_boundary_match(spec: GridSpec, target: &Transformation) -> Result<Transformation> {
    spec.check_same(target.spec(), "boundary target")?;
    let id = Transformation::identity(spec);
    let offset = target.displacement_from(&id)?;
    let solver = PoissonSolver::new(spec);
    let zero = ScalarField::zeros(spec);
    let w = VectorField::new(
        solver.solve(&zero, offset.x())?,
        solver.solve(&zero, offset.y())?,
    )?;
    let (mut t1, mut t2) = id.displaced(&w)?.into_positions().into_components();
    for (i, j) in spec.boundary_nodes() {
        let (x, y) = target.position(i, j);
        t1.set(i, j, x);
        t2.set(i, j, y);
    }
    Ok(Transformation::from_positions(VectorField::new(t1, t2)?))
}

fn check_amplitude(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "amplitude must be non-negative, got {a}"
        )))
    }
}

/// Smallest interior Jacobian determinant and where it occurs.
pub fn min_interior_jacobian(t: &Transformation) -> (f64, (usize, usize)) {
    let jac = jacobian_det(t);
    t.spec()
        .interior_nodes()
        .map(|(i, j)| (jac.get(i, j), (i, j)))
        .fold(
            (f64::INFINITY, (0, 0)),
            |a, b| if b.0 < a.0 { b } else { a },
        )
}

fn check_unfolded(t: &Transformation) -> Result<()> {
    let (min_jacobian, (i, j)) = min_interior_jacobian(t);
    if min_jacobian > 0.0 {
        Ok(())
    } else {
        Err(Error::Folded { min_jacobian, i, j })
    }
}

/// Each edge must stay monotone along its own direction.
fn check_simple_boundary(t: &Transformation) -> Result<()> {
    let g = *t.spec();
    let (nx, ny) = (g.nx(), g.ny());
    let monotone = |n: usize, f: &dyn Fn(usize) -> f64| (1..n).all(|k| f(k) > f(k - 1));
    let ok = monotone(nx, &|i| t.position(i, 0).0)
        && monotone(nx, &|i| t.position(i, ny - 1).0)
        && monotone(ny, &|j| t.position(0, j).1)
        && monotone(ny, &|j| t.position(nx - 1, j).1);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "boundary slide makes the boundary self-intersect".into(),
        ))
    }
}
