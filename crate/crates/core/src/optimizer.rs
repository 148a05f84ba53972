//! Gradient descent on the Poisson control.
//!
//! Each iteration computes the adjoint gradient `g` at the current map,
//! updates `f <- f - tstep * g`, re-solves for `u` and rebuilds
//! `T = base + u`. With the line search on, every iteration starts from
//! `tstep` and halves it until the minimized objective strictly decreases.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Component, Transformation, VectorField};
use crate::objective::{ControlField, Evaluation, MonitorPair, ObjectiveReport, Problem};

/// Relative-change window for the tolerance test.
const TOL_WINDOW: usize = 10;
const MAX_HALVINGS: usize = 30;
/// Abort once the objective exceeds this multiple of its starting value.
const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOptions {
    /// Fixed step for plain descent; first trial step for the line search.
    pub tstep: f64,
    pub max_iters: usize,
    /// Stop when the objective changes by less than this fraction over
    /// ten iterations.
    pub tol: f64,
    pub alpha: f64,
    /// Include the curl term in the minimized objective.
    pub curl: bool,
    pub line_search: bool,
    /// Keep every n-th history row (the last row is always kept).
    pub record_every: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            tstep: 1.0,
            max_iters: 2000,
            tol: 1e-10,
            alpha: 1.0,
            curl: true,
            line_search: true,
            record_every: 1,
        }
    }
}

impl DescentOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.tstep > 0.0 && self.tstep.is_finite()) {
            return bad(format!("tstep must be positive, got {}", self.tstep));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.tol.is_nan() || self.tol < 0.0 {
            return bad(format!("tol must be non-negative, got {}", self.tol));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    /// Relative change below tolerance, or an exact stationary point.
    Tolerance,
    /// The line search found no decreasing step within 30 halvings.
    Stalled,
    /// Objective grew past ten times its starting value.
    Divergence,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxIters => "max_iters",
            StopReason::Tolerance => "tolerance",
            StopReason::Stalled => "stalled",
            StopReason::Divergence => "divergence",
        })
    }
}

/// Objective terms and gradient size after `iter` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iter: usize,
    pub ssd: f64,
    pub ssd_j: f64,
    pub ssd_curl: f64,
    pub max_grad: f64,
}

impl HistoryRow {
    fn new(iter: usize, r: &ObjectiveReport, max_grad: f64) -> Self {
        HistoryRow {
            iter,
            ssd: r.ssd,
            ssd_j: r.ssd_j,
            ssd_curl: r.ssd_curl,
            max_grad,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_control: ControlField,
    pub final_u: VectorField,
    pub final_t: Transformation,
    pub final_report: ObjectiveReport,
    pub initial_report: ObjectiveReport,
    pub history: Vec<HistoryRow>,
    /// Number of control updates applied.
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    /// Step accepted on the last update (0 if none).
    pub last_step: f64,
}

pub fn run_descent(
    base: &Transformation,
    monitors: &MonitorPair,
    opts: &DescentOptions,
) -> Result<RunResult> {
    opts.validate()?;
    let problem = Problem::new(base.clone(), monitors.clone(), opts.alpha, opts.curl)?;
    descend(&problem, opts)
}

/// Runs the descent loop on a prepared problem. `opts.alpha` and
/// `opts.curl` are ignored in favour of the problem's own weighting.
pub fn descend(problem: &Problem, opts: &DescentOptions) -> Result<RunResult> {
    opts.validate()?;
    let curl = problem.curl();
    let mut control = ControlField::zeros(*problem.spec());
    let mut state = problem.evaluate(&control)?;
    let initial_report = state.report;
    let initial = initial_report.minimized(curl);

    let mut history = Vec::new();
    let mut window: VecDeque<f64> = VecDeque::with_capacity(TOL_WINDOW + 1);
    let mut last_step = 0.0;
    let mut k = 0;

    let stop_reason = loop {
        let value = state.report.minimized(curl);
        let grad = problem.gradient_at(&state.t)?;
        let max_grad = grad.max_abs();
        let row = HistoryRow::new(k, &state.report, max_grad);
        if k % opts.record_every == 0 {
            history.push(row);
        }

        window.push_back(value);
        if window.len() > TOL_WINDOW + 1 {
            window.pop_front();
        }

        if value == 0.0 || max_grad == 0.0 {
            break finish(&mut history, row, StopReason::Tolerance);
        }
        if window.len() == TOL_WINDOW + 1 {
            let old = window[0];
            if (old - value).abs() <= opts.tol * old.abs() {
                break finish(&mut history, row, StopReason::Tolerance);
            }
        }
        if k == opts.max_iters {
            break finish(&mut history, row, StopReason::MaxIters);
        }

        let next = if opts.line_search {
            match line_search(problem, &control, &grad, value, opts.tstep)? {
                Some((accepted, c, e)) => {
                    last_step = accepted;
                    (c, e)
                }
                None => break finish(&mut history, row, StopReason::Stalled),
            }
        } else {
            let c = control.stepped(opts.tstep, &grad)?;
            let e = problem.evaluate(&c)?;
            last_step = opts.tstep;
            (c, e)
        };

        control = next.0;
        state = next.1;
        k += 1;

        let value = state.report.minimized(curl);
        if !value.is_finite() || value > DIVERGENCE_FACTOR * initial {
            let row = HistoryRow::new(k, &state.report, f64::NAN);
            break finish(&mut history, row, StopReason::Divergence);
        }
    };

    Ok(RunResult {
        final_control: control,
        final_u: state.u,
        final_t: state.t,
        final_report: state.report,
        initial_report,
        history,
        iterations_run: k,
        stop_reason,
        last_step,
    })
}

fn finish(history: &mut Vec<HistoryRow>, row: HistoryRow, reason: StopReason) -> StopReason {
    if history.last().map(|r| r.iter) != Some(row.iter) {
        history.push(row);
    }
    reason
}

fn line_search(
    problem: &Problem,
    control: &ControlField,
    grad: &VectorField,
    value: f64,
    first: f64,
) -> Result<Option<(f64, ControlField, Evaluation)>> {
    let mut trial = first;
    for _ in 0..=MAX_HALVINGS {
        let c = control.stepped(trial, grad)?;
        let e = problem.evaluate(&c)?;
        if e.report.minimized(problem.curl()) < value {
            return Ok(Some((trial, c, e)));
        }
        trial *= 0.5;
    }
    Ok(None)
}

/// Central difference of the minimized objective with respect to one
/// interior control entry, divided by the node weight `hx hy` so it is
/// directly comparable to the gradient entry.
pub fn fd_gradient_probe(
    problem: &Problem,
    control: &ControlField,
    node: (usize, usize),
    component: Component,
    eps: f64,
) -> Result<f64> {
    let g = *problem.spec();
    let (i, j) = node;
    if i >= g.nx() || j >= g.ny() {
        return Err(Error::InvalidParameter(format!(
            "node ({i}, {j}) is outside the grid"
        )));
    }
    if g.is_boundary(i, j) {
        return Err(Error::BoundaryNode { i, j });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "perturbation must be positive, got {eps}"
        )));
    }
    let shifted = |delta: f64| -> Result<f64> {
        let mut f = control.field().clone();
        let c = f.component_mut(component);
        let v = c.get(i, j);
        c.set(i, j, v + delta);
        problem.objective(&ControlField::new(f))
    };
    let plus = shifted(eps)?;
    let minus = shifted(-eps)?;
    Ok((plus - minus) / (2.0 * eps) / g.cell_area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffops::{curl2d, jacobian_det};
    use crate::field::{GridSpec, ScalarField};

    #[test]
    fn options_validation() {
        assert!(DescentOptions::default().validate().is_ok());
        for bad in [
            DescentOptions {
                tstep: 0.0,
                ..Default::default()
            },
            DescentOptions {
                max_iters: 0,
                ..Default::default()
            },
            DescentOptions {
                tol: -1.0,
                ..Default::default()
            },
            DescentOptions {
                alpha: 0.0,
                ..Default::default()
            },
            DescentOptions {
                record_every: 0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn own_monitors_is_a_fixed_point() {
        let g = GridSpec::unit_square(9).unwrap();
        let base = Transformation::from_fn(g, |x, y| (x + 0.03 * (x * y).sin(), y + 0.02 * x));
        let m = MonitorPair::new(jacobian_det(&base), curl2d(&base)).unwrap();
        let r = run_descent(&base, &m, &DescentOptions::default()).unwrap();
        assert_eq!(r.stop_reason, StopReason::Tolerance);
        assert_eq!(r.iterations_run, 0);
        assert_eq!(r.final_report.ssd, 0.0);
        assert_eq!(r.final_t, base);
        assert_eq!(r.history.len(), 1);
    }

    #[test]
    fn identity_targets_keep_identity() {
        let g = GridSpec::unit_square(11).unwrap();
        let id = Transformation::identity(g);
        let m = MonitorPair::new(ScalarField::constant(g, 1.0), ScalarField::zeros(g)).unwrap();
        let r = run_descent(&id, &m, &DescentOptions::default()).unwrap();
        assert!(r.history[0].max_grad <= 1e-12);
        assert_eq!(r.final_t, id);
    }

    #[test]
    fn probe_rejects_bad_input() {
        let g = GridSpec::unit_square(7).unwrap();
        let id = Transformation::identity(g);
        let m = MonitorPair::new(ScalarField::constant(g, 1.2), ScalarField::zeros(g)).unwrap();
        let p = Problem::new(id, m, 1.0, true).unwrap();
        let c = ControlField::zeros(g);
        assert!(matches!(
            fd_gradient_probe(&p, &c, (0, 3), Component::X, 1e-5),
            Err(Error::BoundaryNode { .. })
        ));
        assert!(fd_gradient_probe(&p, &c, (3, 3), Component::X, 0.0).is_err());
        assert!(fd_gradient_probe(&p, &c, (3, 9), Component::Y, 1e-5).is_err());
        assert!(fd_gradient_probe(&p, &c, (3, 3), Component::Y, 1e-5).is_ok());
    }

    #[test]
    fn plain_descent_takes_fixed_steps() {
        let g = GridSpec::unit_square(9).unwrap();
        let id = Transformation::identity(g);
        let m = MonitorPair::new(
            ScalarField::from_fn(g, |x, y| 1.0 + 0.05 * (x * 0.5).sin() * (y * 0.4).cos()),
            ScalarField::zeros(g),
        )
        .unwrap();
        let opts = DescentOptions {
            tstep: 1e-3,
            max_iters: 5,
            line_search: false,
            ..Default::default()
        };
        let r = run_descent(&id, &m, &opts).unwrap();
        assert_eq!(r.iterations_run, 5);
        assert_eq!(r.stop_reason, StopReason::MaxIters);
        assert_eq!(r.last_step, 1e-3);
        assert_eq!(r.history.len(), 6);
    }

    #[test]
    fn huge_fixed_step_is_reported_as_divergence() {
        let g = GridSpec::unit_square(9).unwrap();
        let id = Transformation::identity(g);
        let m =
            MonitorPair::new(ScalarField::constant(g, 1.3), ScalarField::constant(g, 0.2)).unwrap();
        let opts = DescentOptions {
            tstep: 1e4,
            line_search: false,
            ..Default::default()
        };
        let r = run_descent(&id, &m, &opts).unwrap();
        assert_eq!(r.stop_reason, StopReason::Divergence);
        assert!(r.iterations_run >= 1);
    }
}
