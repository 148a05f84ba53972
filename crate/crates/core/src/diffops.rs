//! Finite-difference operators on a uniform grid.
//!
//! Interior nodes use second-order central differences. Boundary entries of
//! [`partials`] (and so of [`jacobian_det`] and [`curl2d`]) come from
//! second-order one-sided stencils and exist for diagnostic output only: the
//! objective and its adjoint never read them.

use crate::field::{GridSpec, ScalarField, Transformation, VectorField};

/// First derivatives `(f_x, f_y)` at every node.
pub fn partials(f: &ScalarField) -> (ScalarField, ScalarField) {
    let g = *f.spec();
    let fx = ScalarField::from_node_fn(g, |i, j| diff_along(g.nx(), g.hx(), i, |k| f.get(k, j)));
    let fy = ScalarField::from_node_fn(g, |i, j| diff_along(g.ny(), g.hy(), j, |k| f.get(i, k)));
    (fx, fy)
}

#[inline]
fn diff_along(n: usize, h: f64, k: usize, f: impl Fn(usize) -> f64) -> f64 {
    if k == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if k + 1 == n {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(k + 1) - f(k - 1)) / (2.0 * h)
    }
}

/// The four partials of a map, `T1x, T1y, T2x, T2y`.
#[derive(Debug, Clone)]
pub struct MapPartials {
    pub t1x: ScalarField,
    pub t1y: ScalarField,
    pub t2x: ScalarField,
    pub t2y: ScalarField,
}

impl MapPartials {
    pub fn of(t: &Transformation) -> Self {
        let (t1x, t1y) = partials(t.t1());
        let (t2x, t2y) = partials(t.t2());
        MapPartials { t1x, t1y, t2x, t2y }
    }

    pub fn jacobian(&self) -> ScalarField {
        let g = *self.t1x.spec();
        ScalarField::from_node_fn(g, |i, j| {
            self.t1x.get(i, j) * self.t2y.get(i, j) - self.t1y.get(i, j) * self.t2x.get(i, j)
        })
    }

    pub fn curl(&self) -> ScalarField {
        let g = *self.t1x.spec();
        ScalarField::from_node_fn(g, |i, j| self.t2x.get(i, j) - self.t1y.get(i, j))
    }
}

/// `T1x T2y - T1y T2x` at every node.
pub fn jacobian_det(t: &Transformation) -> ScalarField {
    MapPartials::of(t).jacobian()
}

/// Scalar curl `T2x - T1y` at every node.
pub fn curl2d(t: &Transformation) -> ScalarField {
    MapPartials::of(t).curl()
}

/// Central-difference gradient at interior nodes, zero on the boundary.
///
/// This is the operator `D` whose negative transpose is [`adjoint_divergence`].
pub fn interior_gradient(v: &ScalarField) -> VectorField {
    let g = *v.spec();
    let (hx, hy) = (g.hx(), g.hy());
    let gx = ScalarField::from_node_fn(g, |i, j| {
        if g.is_boundary(i, j) {
            0.0
        } else {
            (v.get(i + 1, j) - v.get(i - 1, j)) / (2.0 * hx)
        }
    });
    let gy = ScalarField::from_node_fn(g, |i, j| {
        if g.is_boundary(i, j) {
            0.0
        } else {
            (v.get(i, j + 1) - v.get(i, j - 1)) / (2.0 * hy)
        }
    });
    VectorField::new(gx, gy).expect("components share a grid")
}

/// Discrete divergence defined as `-D^T` for the interior gradient `D`.
///
/// For any `v` vanishing on the boundary,
/// `sum_int a . Dv = - sum_int div(a) v` (both with weight `hx hy`). Boundary
/// entries of `a` are ignored and the result is zero on the boundary. Next to
/// the boundary this differs from a plain central-difference divergence.
pub fn adjoint_divergence(a: &VectorField) -> ScalarField {
    let g = *a.spec();
    let (hx, hy) = (g.hx(), g.hy());
    let ax = |i: usize, j: usize| interior_or_zero(&g, a.x(), i, j);
    let ay = |i: usize, j: usize| interior_or_zero(&g, a.y(), i, j);
    ScalarField::from_node_fn(g, |i, j| {
        if g.is_boundary(i, j) {
            0.0
        } else {
            (ax(i + 1, j) - ax(i - 1, j)) / (2.0 * hx) + (ay(i, j + 1) - ay(i, j - 1)) / (2.0 * hy)
        }
    })
}

#[inline]
fn interior_or_zero(g: &GridSpec, f: &ScalarField, i: usize, j: usize) -> f64 {
    if g.is_boundary(i, j) {
        0.0
    } else {
        f.get(i, j)
    }
}
