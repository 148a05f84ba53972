//! Comparison of a constructed map against a reference map.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::field::Transformation;
use crate::objective::{evaluate_ssd, MonitorPair};

/// One column of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub ssd_j: f64,
    pub ssd: f64,
    pub max_distance: f64,
    pub avg_distance: f64,
    /// Degrees.
    pub max_angle_diff: f64,
    /// Degrees.
    pub avg_angle_diff: f64,
}

pub const CSV_HEADER: &str = "ssd_J,ssd,max_distance,avg_distance,max_angle_diff,avg_angle_diff";

const ROW_LABELS: [&str; 6] = [
    "ssd_J",
    "ssd",
    "maximal distance",
    "average distance",
    "maximal angle difference",
    "average angle difference",
];

impl ComparisonReport {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.ssd_j,
            self.ssd,
            self.max_distance,
            self.avg_distance,
            self.max_angle_diff,
            self.avg_angle_diff,
        ]
    }

    /// Values in [`CSV_HEADER`] order, full precision.
    pub fn csv_row(&self) -> String {
        self.as_array().map(|v| v.to_string()).join(",")
    }
}

/// Human-readable table with one column per labelled report.
pub fn format_table(columns: &[(&str, &ComparisonReport)]) -> String {
    let label_w = ROW_LABELS.iter().map(|l| l.len()).max().unwrap_or(0);
    let col_w = columns
        .iter()
        .map(|(n, _)| n.len().max(10))
        .collect::<Vec<_>>();
    let mut out = String::new();
    let _ = write!(out, "{:label_w$}", "");
    for ((name, _), w) in columns.iter().zip(&col_w) {
        let _ = write!(out, " | {name:>w$}");
    }
    out.push('\n');
    for (r, label) in ROW_LABELS.iter().enumerate() {
        let _ = write!(out, "{label:label_w$}");
        for ((_, rep), w) in columns.iter().zip(&col_w) {
            let _ = write!(out, " | {:>w$.4}", rep.as_array()[r]);
        }
        out.push('\n');
    }
    out
}

/// Max and mean of `|T(x) - T0(x)|_2` over all nodes.
pub fn distance_stats(t: &Transformation, t0: &Transformation) -> Result<(f64, f64)> {
    t.spec().check_same(t0.spec(), "compared transformations")?;
    let g = t.spec();
    let (max, sum) = g.nodes().fold((0.0_f64, 0.0), |(max, sum), (i, j)| {
        let (a, b) = (t.position(i, j), t0.position(i, j));
        let d = (a.0 - b.0).hypot(a.1 - b.1);
        (max.max(d), sum + d)
    });
    Ok((max, sum / g.len() as f64))
}

/// Interior angles (degrees) of cell `(i, j)`, counter-clockwise from its
/// lower-left corner.
pub fn cell_angles(t: &Transformation, i: usize, j: usize) -> Result<[f64; 4]> {
    let c = [
        t.position(i, j),
        t.position(i + 1, j),
        t.position(i + 1, j + 1),
        t.position(i, j + 1),
    ];
    let mut out = [0.0; 4];
    for k in 0..4 {
        let (p, next, prev) = (c[k], c[(k + 1) % 4], c[(k + 3) % 4]);
        let e1 = (next.0 - p.0, next.1 - p.1);
        let e2 = (prev.0 - p.0, prev.1 - p.1);
        let (n1, n2) = (e1.0.hypot(e1.1), e2.0.hypot(e2.1));
        if n1 == 0.0 || n2 == 0.0 {
            return Err(Error::DegenerateCell { i, j });
        }
        let cos = ((e1.0 * e2.0 + e1.1 * e2.1) / (n1 * n2)).clamp(-1.0, 1.0);
        out[k] = cos.acos().to_degrees();
    }
    Ok(out)
}

/// Max and mean of corresponding corner-angle differences, in degrees, over
/// every corner of every cell.
pub fn angle_stats(t: &Transformation, t0: &Transformation) -> Result<(f64, f64)> {
    t.spec().check_same(t0.spec(), "compared transformations")?;
    let g = t.spec();
    let (mut max, mut sum) = (0.0_f64, 0.0);
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            let a = cell_angles(t, i, j)?;
            let b = cell_angles(t0, i, j)?;
            for k in 0..4 {
                let d = (a[k] - b[k]).abs();
                max = max.max(d);
                sum += d;
            }
        }
    }
    let corners = 4 * (g.nx() - 1) * (g.ny() - 1);
    Ok((max, sum / corners as f64))
}

pub fn compare_report(
    t: &Transformation,
    t0: &Transformation,
    monitors: &MonitorPair,
    alpha: f64,
) -> Result<ComparisonReport> {
    let obj = evaluate_ssd(t, monitors, alpha)?;
    let (max_distance, avg_distance) = distance_stats(t, t0)?;
    let (max_angle_diff, avg_angle_diff) = angle_stats(t, t0)?;
    Ok(ComparisonReport {
        ssd_j: obj.ssd_j,
        ssd: obj.ssd,
        max_distance,
        avg_distance,
        max_angle_diff,
        avg_angle_diff,
    })
}
