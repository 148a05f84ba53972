//! Plain-text file formats.
//!
//! Field CSV: the first line holds the grid, `nx,ny,xmin,xmax,ymin,ymax`,
//! followed by one `i,j,value` line per node in x-fastest order. Floats are
//! written with Rust's shortest round-trip formatting, so reading a file
//! back reproduces every value bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::diffops::{curl2d, jacobian_det};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, Transformation, VectorField};
use crate::optimizer::HistoryRow;

pub fn write_field_csv<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let g = field.spec();
    let [xmin, xmax, ymin, ymax] = g.bounds();
    writeln!(w, "{},{},{xmin},{xmax},{ymin},{ymax}", g.nx(), g.ny())?;
    for (i, j) in g.nodes() {
        writeln!(w, "{i},{j},{}", field.get(i, j))?;
    }
    Ok(())
}

pub fn read_field_csv<R: BufRead>(r: R) -> Result<ScalarField> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
    if cols.len() != 6 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected nx,ny,xmin,xmax,ymin,ymax, got {header:?}"),
        });
    }
    let count = |s: &str| {
        s.parse::<usize>().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("{s:?}: {e}"),
        })
    };
    let (nx, ny) = (count(cols[0])?, count(cols[1])?);
    let mut bounds = [0.0; 4];
    for (b, s) in bounds.iter_mut().zip(&cols[2..]) {
        *b = parse_f64(s, 1)?;
    }
    let spec = GridSpec::uniform(nx, ny, bounds)?;

    let mut values = vec![f64::NAN; spec.len()];
    let mut seen = vec![false; spec.len()];
    for (n, line) in lines {
        let line = line?;
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected i,j,value".into(),
            });
        }
        let idx = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("{s:?}: {e}"),
            })
        };
        let (i, j) = (idx(parts[0])?, idx(parts[1])?);
        if i >= nx || j >= ny {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node ({i}, {j}) outside {nx}x{ny} grid"),
            });
        }
        let k = spec.index(i, j);
        if seen[k] {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("node ({i}, {j}) given twice"),
            });
        }
        seen[k] = true;
        values[k] = parse_f64(parts[2], lineno)?;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing node ({}, {})", k % nx, k / nx),
        });
    }
    ScalarField::from_values(spec, values)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse {
        line,
        msg: format!("{s:?}: {e}"),
    })
}

/// Writes the two position components as separate field CSVs.
pub fn write_transformation_csv<W: Write>(t1: W, t2: W, t: &Transformation) -> Result<()> {
    write_field_csv(t1, t.t1())?;
    write_field_csv(t2, t.t2())
}

pub fn read_transformation_csv<R: BufRead>(t1: R, t2: R) -> Result<Transformation> {
    let x = read_field_csv(t1)?;
    let y = read_field_csv(t2)?;
    Ok(Transformation::from_positions(VectorField::new(x, y)?))
}

/// Legacy ASCII VTK structured grid of the node positions, with the
/// full-field Jacobian determinant and curl as point scalars.
pub fn write_vtk<W: Write>(mut w: W, t: &Transformation, title: &str) -> Result<()> {
    let g = t.spec();
    let jac = jacobian_det(t);
    let curl = curl2d(t);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", g.nx(), g.ny());
    let _ = writeln!(s, "POINTS {} double", g.len());
    for (i, j) in g.nodes() {
        let (x, y) = t.position(i, j);
        let _ = writeln!(s, "{x} {y} 0");
    }
    let _ = writeln!(s, "POINT_DATA {}", g.len());
    for (name, f) in [("jacobian", &jac), ("curl", &curl)] {
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for v in f.values() {
            let _ = writeln!(s, "{v}");
        }
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub const HISTORY_HEADER: &str = "iter,ssd,ssd_J,ssd_curl,max_grad";

pub fn write_history_csv<W: Write>(mut w: W, history: &[HistoryRow]) -> Result<()> {
    writeln!(w, "{HISTORY_HEADER}")?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iter, r.ssd, r.ssd_j, r.ssd_curl, r.max_grad
        )?;
    }
    Ok(())
}
