//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured values; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::thread;
use std::time::{Duration, Instant};

use pjgrid::diffops::{adjoint_divergence, interior_gradient};
use pjgrid::field::{weighted_l2_inner, GridSpec, ScalarField, Transformation, VectorField};
use pjgrid::gradcheck::{check_gradient, random_recovery_problem};
use pjgrid::metrics::{compare_report, ComparisonReport};
use pjgrid::objective::{MonitorPair, Problem};
use pjgrid::optimizer::{run_descent, DescentOptions, RunResult};
use pjgrid::poisson::{laplacian5, PoissonSolver};
use pjgrid::synth::{
    default_fixed_boundary_map, default_moving_boundary_map, harmonic_boundary_match,
    monitors_from_map, DEFAULT_FIXED_AMPLITUDE, DEFAULT_MOVING_AMPLITUDE,
};

const GRADCHECK_TOL: f64 = 1e-5;
const GRADCHECK_BUDGET: Duration = Duration::from_secs(10);
const POISSON_RATIO: (f64, f64) = (3.5, 4.5);
const POISSON_ROUND_TRIP: f64 = 1e-11;
const POISSON_BUDGET: Duration = Duration::from_secs(5);
const FIXED_POINT_GRAD: f64 = 1e-12;
const ABLATION_AVG_FACTOR: f64 = 0.5;
const ABLATION_BUDGET: Duration = Duration::from_secs(60);
const ALPHA_SPREAD: f64 = 2.0;
const SBP_TOL: f64 = 1e-13;

fn verdict(n: u32, ok: bool, detail: String) {
    println!(
        "{} criterion {n}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

struct Run {
    label: &'static str,
    curl: bool,
    result: RunResult,
    report: ComparisonReport,
    elapsed: Duration,
}

struct Case {
    t0: Transformation,
    base: Transformation,
    runs: Vec<Run>,
}

impl Case {
    fn get(&self, label: &str) -> &Run {
        self.runs
            .iter()
            .find(|r| r.label == label)
            .expect("run label")
    }
}

fn solve_case(
    t0: Transformation,
    base: Transformation,
    configs: &[(&'static str, bool, f64)],
) -> Case {
    let monitors = monitors_from_map(&t0).unwrap();
    let runs = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|&(label, curl, alpha)| {
                let (t0, base, monitors) = (&t0, &base, &monitors);
                s.spawn(move || {
                    let start = Instant::now();
                    let opts = DescentOptions {
                        alpha,
                        curl,
                        ..Default::default()
                    };
                    let result = run_descent(base, monitors, &opts).unwrap();
                    let elapsed = start.elapsed();
                    let report = compare_report(&result.final_t, t0, monitors, alpha).unwrap();
                    Run {
                        label,
                        curl,
                        result,
                        report,
                        elapsed,
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    Case { t0, base, runs }
}

fn grid65() -> GridSpec {
    GridSpec::unit_square(65).unwrap()
}

fn fixed_case() -> &'static Case {
    static CASE: OnceLock<Case> = OnceLock::new();
    CASE.get_or_init(|| {
        let g = grid65();
        let t0 = default_fixed_boundary_map(g, DEFAULT_FIXED_AMPLITUDE).unwrap();
        solve_case(
            t0,
            Transformation::identity(g),
            &[
                ("J", false, 1.0),
                ("JC", true, 1.0),
                ("JC a=0.1", true, 0.1),
                ("JC a=10", true, 10.0),
            ],
        )
    })
}

fn moving_case() -> &'static Case {
    static CASE: OnceLock<Case> = OnceLock::new();
    CASE.get_or_init(|| {
        let g = grid65();
        let t0 = default_moving_boundary_map(g, DEFAULT_MOVING_AMPLITUDE).unwrap();
        let base = harmonic_boundary_match(g, &t0).unwrap();
        solve_case(t0, base, &[("J", false, 1.0), ("JC", true, 1.0)])
    })
}

fn ablation(case: &Case) -> (bool, String) {
    let (j, jc) = (&case.get("J").report, &case.get("JC").report);
    let slowest = case.runs.iter().map(|r| r.elapsed).max().unwrap();
    let ok = jc.avg_distance <= ABLATION_AVG_FACTOR * j.avg_distance
        && jc.max_distance < j.max_distance
        && slowest < ABLATION_BUDGET;
    let detail = format!(
        "avg {:.3e} (J) vs {:.3e} (J+curl), max {:.3e} vs {:.3e}, slowest run {:.1}s",
        j.avg_distance,
        jc.avg_distance,
        j.max_distance,
        jc.max_distance,
        slowest.as_secs_f64()
    );
    (ok, detail)
}

#[test]
fn criterion_1_adjoint_gradient_matches_finite_differences() {
    let start = Instant::now();
    let g = GridSpec::unit_square(17).unwrap();
    let (problem, control) = random_recovery_problem(g, 2024).unwrap();
    let check = check_gradient(&problem, &control, 20, 1e-5, 2024).unwrap();
    let elapsed = start.elapsed();
    verdict(
        1,
        check.probes.len() == 20
            && check.max_rel_error <= GRADCHECK_TOL
            && elapsed < GRADCHECK_BUDGET,
        format!(
            "17x17, {} probes, max rel error {:.2e} (tol {GRADCHECK_TOL:.0e}), {:.2}s",
            check.probes.len(),
            check.max_rel_error,
            elapsed.as_secs_f64()
        ),
    );
}

fn manufactured_error(n: usize) -> f64 {
    let g = GridSpec::uniform(n, n, [0.0, 1.0, 0.0, 1.0]).unwrap();
    let exact = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let rhs = ScalarField::from_fn(g, |x, y| -2.0 * PI * PI * exact(x, y));
    let u = PoissonSolver::new(g).solve_zero(&rhs).unwrap();
    g.nodes()
        .map(|(i, j)| (u.get(i, j) - exact(g.x(i), g.y(j))).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_2_poisson_solver_is_second_order_and_exact() {
    let start = Instant::now();
    let ratios: Vec<f64> = [17, 33, 65]
        .iter()
        .map(|&n| manufactured_error(n) / manufactured_error(2 * n - 1))
        .collect();
    let mut round_trip = 0.0_f64;
    for n in [5, 17, 65] {
        let g = GridSpec::uniform(n, n + 3, [0.0, 1.0, -1.0, 2.0]).unwrap();
        let v = ScalarField::from_fn(g, |x, y| (3.0 * x + y * y).cos() * x).with_zero_boundary();
        let u = PoissonSolver::new(g).solve_zero(&laplacian5(&v)).unwrap();
        round_trip = round_trip.max(u.axpy(-1.0, &v).unwrap().max_abs() / v.max_abs());
    }
    let elapsed = start.elapsed();
    let ok = ratios
        .iter()
        .all(|r| (POISSON_RATIO.0..=POISSON_RATIO.1).contains(r))
        && round_trip <= POISSON_ROUND_TRIP
        && elapsed < POISSON_BUDGET;
    verdict(
        2,
        ok,
        format!(
            "refinement ratios {:?}, round trip {round_trip:.2e}, {:.2}s",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_identity_is_a_fixed_point() {
    let g = grid65();
    let id = Transformation::identity(g);
    let monitors = MonitorPair::new(ScalarField::constant(g, 1.0), ScalarField::zeros(g)).unwrap();
    let problem = Problem::new(id.clone(), monitors.clone(), 1.0, true).unwrap();
    let grad = problem.gradient_at(&id).unwrap().max_abs();
    let opts = DescentOptions {
        max_iters: 100,
        tol: 0.0,
        ..Default::default()
    };
    let r = run_descent(&id, &monitors, &opts).unwrap();
    let drift = r.final_t.displacement_from(&id).unwrap().max_abs();
    verdict(
        3,
        grad <= FIXED_POINT_GRAD && drift == 0.0 && r.final_report.ssd == 0.0,
        format!(
            "max|grad| {grad:.1e}, max drift {drift:.1e}, stop {} after {} iterations",
            r.stop_reason, r.iterations_run
        ),
    );
}

#[test]
fn criterion_4_curl_term_improves_fixed_boundary_recovery() {
    let (ok, detail) = ablation(fixed_case());
    verdict(4, ok, format!("fixed boundary 65x65: {detail}"));
}

#[test]
fn criterion_5_recovery_is_insensitive_to_alpha() {
    let case = fixed_case();
    let avgs: Vec<(&str, f64)> = ["JC a=0.1", "JC", "JC a=10"]
        .iter()
        .map(|l| (*l, case.get(l).report.avg_distance))
        .collect();
    let hi = avgs.iter().map(|a| a.1).fold(0.0, f64::max);
    let lo = avgs.iter().map(|a| a.1).fold(f64::INFINITY, f64::min);
    verdict(
        5,
        hi <= ALPHA_SPREAD * lo,
        format!(
            "avg distance for alpha 0.1/1/10: {:.3e}/{:.3e}/{:.3e}, spread {:.2} (limit {ALPHA_SPREAD})",
            avgs[0].1,
            avgs[1].1,
            avgs[2].1,
            hi / lo
        ),
    );
}

#[test]
fn criterion_6_moving_boundary_recovery() {
    let case = moving_case();
    let g = grid65();
    let exact_base = g
        .boundary_nodes()
        .into_iter()
        .all(|(i, j)| case.base.position(i, j) == case.t0.position(i, j));
    let exact_final = case.runs.iter().all(|r| {
        g.boundary_nodes()
            .into_iter()
            .all(|(i, j)| r.result.final_t.position(i, j) == case.t0.position(i, j))
    });
    let (ordered, detail) = ablation(case);
    verdict(
        6,
        exact_base && exact_final && ordered,
        format!(
            "moving boundary 65x65, boundary exact {}: {detail}",
            exact_base && exact_final
        ),
    );
}

#[test]
fn criterion_7_objective_history_is_monotone() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, case) in [("fixed", fixed_case()), ("moving", moving_case())] {
        for run in &case.runs {
            let h = &run.result.history;
            let value = |k: usize| if run.curl { h[k].ssd } else { h[k].ssd_j };
            let rises = (1..h.len()).filter(|&k| value(k) > value(k - 1)).count();
            ok &= rises == 0;
            lines.push(format!(
                "{name} {} {} rows, {rises} rises",
                run.label,
                h.len()
            ));
        }
    }
    verdict(7, ok, lines.join("; "));
}

#[test]
fn criterion_8_discrete_identities_hold_across_grids() {
    let mut worst_sbp = 0.0_f64;
    let mut worst_boundary = 0.0_f64;
    let mut worst_alpha = 0.0_f64;
    for n in [5, 9, 17, 33, 65] {
        let g = GridSpec::uniform(n, n, [0.0, 1.0, 0.0, 2.0]).unwrap();
        let v =
            ScalarField::from_fn(g, |x, y| (2.0 * x - y).sin() + x * y * y).with_zero_boundary();
        let a = VectorField::new(
            ScalarField::from_fn(g, |x, y| (x + 3.0 * y).cos()),
            ScalarField::from_fn(g, |x, y| x * x - y),
        )
        .unwrap();
        let lhs = interior_gradient(&v).inner(&a).unwrap();
        let rhs = -weighted_l2_inner(&v, &adjoint_divergence(&a)).unwrap();
        let scale = v.interior_max_abs() * a.max_abs() * g.interior_area();
        worst_sbp = worst_sbp.max((lhs - rhs).abs() / scale);

        let t0 = Transformation::from_fn(g, |x, y| {
            (
                x + 0.02 * (PI * x).sin() * (PI * y / 2.0).sin(),
                y + 0.03 * (PI * x).sin() * (PI * y / 2.0).sin(),
            )
        });
        let monitors = monitors_from_map(&t0).unwrap();
        let id = Transformation::identity(g);
        let g1 = Problem::new(id.clone(), monitors.clone(), 1.0, true)
            .unwrap()
            .gradient_at(&id)
            .unwrap();
        let g3 = Problem::new(id.clone(), monitors, 3.0, true)
            .unwrap()
            .gradient_at(&id)
            .unwrap();
        let g2 = Problem::new(id.clone(), monitors_from_map(&t0).unwrap(), 2.0, true)
            .unwrap()
            .gradient_at(&id)
            .unwrap();
        // the gradient is affine in alpha: g(3) = 2 g(2) - g(1)
        let pred = g2.axpy(1.0, &g2).unwrap().axpy(-1.0, &g1).unwrap();
        worst_alpha = worst_alpha.max(g3.axpy(-1.0, &pred).unwrap().max_abs() / g3.max_abs());
        for (i, j) in g.boundary_nodes() {
            worst_boundary = worst_boundary
                .max(g1.x().get(i, j).abs())
                .max(g1.y().get(i, j).abs());
        }
    }
    verdict(
        8,
        worst_sbp <= SBP_TOL && worst_alpha <= 1e-12 && worst_boundary == 0.0,
        format!(
            "grids 5..65: summation by parts {worst_sbp:.1e}, alpha affinity {worst_alpha:.1e}, boundary gradient {worst_boundary:.1e}"
        ),
    );
}
