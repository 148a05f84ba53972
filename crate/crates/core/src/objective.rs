//! Least-squares mismatch of `(J(T), curl(T))` against a monitor pair, and
//! its exact discrete gradient with respect to the Poisson control.
//!
//! With `u = L^{-1} f` (zero Dirichlet data), `T = T* + u`, residuals
//! `P = J(T) - f0` and `Q = alpha (curl(T) - g0)`, the objective is
//!
//! ```text
//! ssd = 1/2 sum_int [P^2 + Q^2 / alpha] hx hy
//! ```
//!
//! Its variation is `sum_int (-a1 . D du1 - a2 . D du2) hx hy`, so with
//! `div = -D^T` and `L` symmetric the gradient is `g_i = L^{-1} div(a_i)`.
//! Every step is the transpose of a discrete operator actually applied in
//! the forward map, so `g` is the derivative of the discrete objective, not
//! an approximation of the continuous one.

use crate::diffops::{adjoint_divergence, MapPartials};
use crate::error::{Error, Result};
use crate::field::{interior_sum, GridSpec, ScalarField, Transformation, VectorField};
use crate::poisson::PoissonSolver;

/// Prescribed Jacobian determinant `f0` and curl `g0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorPair {
    f0: ScalarField,
    g0: ScalarField,
}

impl MonitorPair {
    /// Requires a shared grid and `f0 > 0` at interior nodes.
    pub fn new(f0: ScalarField, g0: ScalarField) -> Result<Self> {
        f0.spec().check_same(g0.spec(), "monitor pair")?;
        if let Some((i, j)) = f0
            .spec()
            .interior_nodes()
            .find(|&(i, j)| f0.get(i, j).is_nan() || f0.get(i, j) <= 0.0)
        {
            return Err(Error::InfeasibleMonitor(format!(
                "Jacobian target {} at node ({i}, {j}) is not positive",
                f0.get(i, j)
            )));
        }
        Ok(MonitorPair { f0, g0 })
    }

    pub fn spec(&self) -> &GridSpec {
        self.f0.spec()
    }

    pub fn f0(&self) -> &ScalarField {
        &self.f0
    }

    pub fn g0(&self) -> &ScalarField {
        &self.g0
    }
}

/// Right-hand side `f = (f1, f2)` of `Δu = f`. Boundary entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlField {
    f: VectorField,
}

impl ControlField {
    pub fn zeros(spec: GridSpec) -> Self {
        ControlField {
            f: VectorField::zeros(spec),
        }
    }

    /// Wraps `f`, discarding its boundary entries.
    pub fn new(f: VectorField) -> Self {
        let (x, y) = f.into_components();
        ControlField {
            f: VectorField::new(x.with_zero_boundary(), y.with_zero_boundary())
                .expect("components share a grid"),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.f.spec()
    }

    pub fn field(&self) -> &VectorField {
        &self.f
    }

    pub fn into_field(self) -> VectorField {
        self.f
    }

    /// `self - step * g`, keeping the boundary at zero.
    pub fn stepped(&self, step: f64, g: &VectorField) -> Result<ControlField> {
        Ok(ControlField::new(self.f.axpy(-step, g)?))
    }
}

/// Objective value with its two terms reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveReport {
    /// `ssd_j + alpha * ssd_curl`.
    pub ssd: f64,
    /// `1/2 sum_int (J(T) - f0)^2 hx hy`.
    pub ssd_j: f64,
    /// `1/2 sum_int (curl(T) - g0)^2 hx hy`, unweighted.
    pub ssd_curl: f64,
    pub alpha: f64,
}

impl ObjectiveReport {
    /// The quantity being minimized: the full `ssd`, or `ssd_j` alone when
    /// the curl term is switched off.
    pub fn minimized(&self, curl: bool) -> f64 {
        if curl {
            self.ssd
        } else {
            self.ssd_j
        }
    }
}

/// `P = J(T) - f0` and `Q = alpha (curl(T) - g0)`, zero on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPair {
    pub p: ScalarField,
    pub q: ScalarField,
}

impl ResidualPair {
    /// Residuals of the Jacobian-only objective.
    pub fn without_curl(self) -> ResidualPair {
        let q = ScalarField::zeros(*self.q.spec());
        ResidualPair { p: self.p, q }
    }

    pub fn without_jacobian(self) -> ResidualPair {
        let p = ScalarField::zeros(*self.p.spec());
        ResidualPair { p, q: self.q }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "curl weight alpha must be positive, got {alpha}"
        )))
    }
}

/// `u_i = L^{-1} f_i` and `T = base + u`.
pub fn assemble_transformation(
    solver: &PoissonSolver,
    base: &Transformation,
    control: &ControlField,
) -> Result<(VectorField, Transformation)> {
    base.spec()
        .check_same(control.spec(), "base map and control")?;
    let u = VectorField::new(
        solver.solve_zero(control.field().x())?,
        solver.solve_zero(control.field().y())?,
    )?;
    let t = base.displaced(&u)?;
    Ok((u, t))
}

pub fn evaluate_ssd(
    t: &Transformation,
    monitors: &MonitorPair,
    alpha: f64,
) -> Result<ObjectiveReport> {
    check_alpha(alpha)?;
    t.spec()
        .check_same(monitors.spec(), "transformation and monitors")?;
    let d = MapPartials::of(t);
    let g = *t.spec();
    let half_w = 0.5 * g.cell_area();
    let ssd_j = interior_sum(&g, |i, j| {
        let jac = d.t1x.get(i, j) * d.t2y.get(i, j) - d.t1y.get(i, j) * d.t2x.get(i, j);
        (jac - monitors.f0.get(i, j)).powi(2)
    }) * half_w;
    let ssd_curl = interior_sum(&g, |i, j| {
        (d.t2x.get(i, j) - d.t1y.get(i, j) - monitors.g0.get(i, j)).powi(2)
    }) * half_w;
    Ok(ObjectiveReport {
        ssd: ssd_j + alpha * ssd_curl,
        ssd_j,
        ssd_curl,
        alpha,
    })
}

pub fn residual_fields(
    t: &Transformation,
    monitors: &MonitorPair,
    alpha: f64,
) -> Result<ResidualPair> {
    check_alpha(alpha)?;
    t.spec()
        .check_same(monitors.spec(), "transformation and monitors")?;
    let d = MapPartials::of(t);
    let p = d.jacobian().axpy(-1.0, &monitors.f0)?.with_zero_boundary();
    let q = d
        .curl()
        .axpy(-1.0, &monitors.g0)?
        .scaled(alpha)
        .with_zero_boundary();
    Ok(ResidualPair { p, q })
}

/// Adjoint fields, stored with the sign already applied:
///
/// ```text
/// a1 = -[P (T2y, -T2x) + Q (0, -1)]
/// a2 = -[P (-T1y, T1x) + Q (1, 0)]
/// ```
pub fn adjoint_vector_fields(
    t: &Transformation,
    residuals: &ResidualPair,
) -> Result<(VectorField, VectorField)> {
    let g = *t.spec();
    g.check_same(residuals.p.spec(), "transformation and residuals")?;
    g.check_same(residuals.q.spec(), "transformation and residuals")?;
    let d = MapPartials::of(t);
    let (p, q) = (&residuals.p, &residuals.q);
    let interior = |f: &dyn Fn(usize, usize) -> f64| {
        ScalarField::from_node_fn(g, |i, j| if g.is_boundary(i, j) { 0.0 } else { f(i, j) })
    };
    let a1 = VectorField::new(
        interior(&|i, j| -p.get(i, j) * d.t2y.get(i, j)),
        interior(&|i, j| p.get(i, j) * d.t2x.get(i, j) + q.get(i, j)),
    )?;
    let a2 = VectorField::new(
        interior(&|i, j| p.get(i, j) * d.t1y.get(i, j) - q.get(i, j)),
        interior(&|i, j| -p.get(i, j) * d.t1x.get(i, j)),
    )?;
    Ok((a1, a2))
}

/// `g_i = L^{-1} div(a_i)`: the gradient of ssd with respect to `(f1, f2)`
/// under the interior quadrature inner product.
pub fn control_gradient(
    solver: &PoissonSolver,
    a1: &VectorField,
    a2: &VectorField,
) -> Result<VectorField> {
    VectorField::new(
        solver.solve_zero(&adjoint_divergence(a1))?,
        solver.solve_zero(&adjoint_divergence(a2))?,
    )
}

/// One recovery or generation problem: base map, targets and weighting,
/// plus the Poisson plan for its grid.
#[derive(Debug, Clone)]
pub struct Problem {
    solver: PoissonSolver,
    base: Transformation,
    monitors: MonitorPair,
    alpha: f64,
    curl: bool,
}

/// State reached from a control: displacement, map, objective.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub u: VectorField,
    pub t: Transformation,
    pub report: ObjectiveReport,
}

impl Problem {
    /// `curl = false` drops the curl term from the minimized objective
    /// (`Q = 0`); the report still carries both terms.
    pub fn new(
        base: Transformation,
        monitors: MonitorPair,
        alpha: f64,
        curl: bool,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        base.spec()
            .check_same(monitors.spec(), "base map and monitors")?;
        Ok(Problem {
            solver: PoissonSolver::new(*base.spec()),
            base,
            monitors,
            alpha,
            curl,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        self.base.spec()
    }

    pub fn solver(&self) -> &PoissonSolver {
        &self.solver
    }

    pub fn base(&self) -> &Transformation {
        &self.base
    }

    pub fn monitors(&self) -> &MonitorPair {
        &self.monitors
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn curl(&self) -> bool {
        self.curl
    }

    pub fn evaluate(&self, control: &ControlField) -> Result<Evaluation> {
        let (u, t) = assemble_transformation(&self.solver, &self.base, control)?;
        let report = evaluate_ssd(&t, &self.monitors, self.alpha)?;
        Ok(Evaluation { u, t, report })
    }

    /// Value actually minimized at `control`.
    pub fn objective(&self, control: &ControlField) -> Result<f64> {
        Ok(self.evaluate(control)?.report.minimized(self.curl))
    }

    /// Gradient of the minimized objective at the state whose map is `t`.
    pub fn gradient_at(&self, t: &Transformation) -> Result<VectorField> {
        let mut r = residual_fields(t, &self.monitors, self.alpha)?;
        if !self.curl {
            r = r.without_curl();
        }
        let (a1, a2) = adjoint_vector_fields(t, &r)?;
        control_gradient(&self.solver, &a1, &a2)
    }
}
