//! Direct solver for the 5-point Dirichlet Poisson problem.
//!
//! The interior operator separates: a type-I discrete sine transform
//! diagonalizes the second difference along x, leaving one tridiagonal
//! system along y per sine mode. The solve is exact for the discrete
//! operator up to rounding, which keeps the adjoint gradient exact.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{GridSpec, ScalarField};

/// `(u[i-1,j] + u[i+1,j] - 2u)/hx^2 + (u[i,j-1] + u[i,j+1] - 2u)/hy^2` at
/// interior nodes, zero on the boundary.
pub fn laplacian5(u: &ScalarField) -> ScalarField {
    let g = *u.spec();
    let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
    ScalarField::from_node_fn(g, |i, j| {
        if g.is_boundary(i, j) {
            return 0.0;
        }
        let c = u.get(i, j);
        (u.get(i - 1, j) + u.get(i + 1, j) - 2.0 * c) * ihx2
            + (u.get(i, j - 1) + u.get(i, j + 1) - 2.0 * c) * ihy2
    })
}

/// Solves `laplacian5(u) = rhs` with `u = 0` on the boundary.
pub fn solve_dirichlet_zero(rhs: &ScalarField) -> Result<ScalarField> {
    PoissonSolver::new(*rhs.spec()).solve_zero(rhs)
}

/// Solves `laplacian5(u) = rhs` with `u` equal to `boundary` on the boundary.
pub fn solve_dirichlet(rhs: &ScalarField, boundary: &ScalarField) -> Result<ScalarField> {
    PoissonSolver::new(*rhs.spec()).solve(rhs, boundary)
}

/// Precomputed transform plan for one grid. Immutable and shareable.
#[derive(Clone)]
pub struct PoissonSolver {
    spec: GridSpec,
    fft: Arc<dyn Fft<f64>>,
    /// Eigenvalues of the 1D Dirichlet second difference along x.
    eig_x: Vec<f64>,
}

impl fmt::Debug for PoissonSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("spec", &self.spec)
            .finish()
    }
}

impl PoissonSolver {
    pub fn new(spec: GridSpec) -> Self {
        let n = spec.nx() - 2;
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let ihx2 = 1.0 / (spec.hx() * spec.hx());
        let eig_x = (1..=n)
            .map(|k| {
                let theta = std::f64::consts::PI * k as f64 / (n + 1) as f64;
                -4.0 * (theta / 2.0).sin().powi(2) * ihx2
            })
            .collect();
        PoissonSolver { spec, fft, eig_x }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Zero-Dirichlet solve. Boundary entries of `rhs` are ignored.
    pub fn solve_zero(&self, rhs: &ScalarField) -> Result<ScalarField> {
        self.spec
            .check_same(rhs.spec(), "poisson right-hand side")?;
        let g = self.spec;
        let (mx, my) = (g.nx() - 2, g.ny() - 2);

        // rows[j][k]: interior values, one row per interior j
        let mut rows: Vec<f64> = Vec::with_capacity(mx * my);
        for j in 1..=my {
            rows.extend((1..=mx).map(|i| rhs.get(i, j)));
        }
        self.dst_rows(&mut rows, mx);

        // for each sine mode k, (c[j-1] - 2c[j] + c[j+1])/hy^2 + eig_k c[j] = rhs_k[j]
        let ihy2 = 1.0 / (g.hy() * g.hy());
        let mut diag_mod = vec![0.0; my];
        let mut col = vec![0.0; my];
        for (k, &eig) in self.eig_x.iter().enumerate() {
            let diag = eig - 2.0 * ihy2;
            for (j, c) in col.iter_mut().enumerate() {
                *c = rows[j * mx + k];
            }
            thomas_constant(ihy2, diag, &mut col, &mut diag_mod);
            for (j, c) in col.iter().enumerate() {
                rows[j * mx + k] = *c;
            }
        }

        self.dst_rows(&mut rows, mx);
        let scale = 2.0 / (mx + 1) as f64;
        let mut out = ScalarField::zeros(g);
        for j in 1..=my {
            for i in 1..=mx {
                out.set(i, j, rows[(j - 1) * mx + (i - 1)] * scale);
            }
        }
        Ok(out)
    }

    /// Dirichlet solve with boundary data taken from the boundary entries of
    /// `boundary`. The boundary of the result equals that data bitwise.
    pub fn solve(&self, rhs: &ScalarField, boundary: &ScalarField) -> Result<ScalarField> {
        self.spec
            .check_same(rhs.spec(), "poisson right-hand side")?;
        self.spec
            .check_same(boundary.spec(), "poisson boundary data")?;
        let g = self.spec;
        let (ihx2, ihy2) = (1.0 / (g.hx() * g.hx()), 1.0 / (g.hy() * g.hy()));
        let (nx, ny) = (g.nx(), g.ny());

        // move known boundary neighbours of the first interior layer to the rhs
        let lifted = ScalarField::from_node_fn(g, |i, j| {
            if g.is_boundary(i, j) {
                return 0.0;
            }
            let mut r = rhs.get(i, j);
            if i == 1 {
                r -= boundary.get(0, j) * ihx2;
            }
            if i + 2 == nx {
                r -= boundary.get(nx - 1, j) * ihx2;
            }
            if j == 1 {
                r -= boundary.get(i, 0) * ihy2;
            }
            if j + 2 == ny {
                r -= boundary.get(i, ny - 1) * ihy2;
            }
            r
        });
        let mut u = self.solve_zero(&lifted)?;
        for (i, j) in g.boundary_nodes() {
            u.set(i, j, boundary.get(i, j));
        }
        Ok(u)
    }

    /// In-place unnormalized DST-I of every length-`n` row of `data`.
    fn dst_rows(&self, data: &mut [f64], n: usize) {
        let m = 2 * (n + 1);
        let rows = data.len() / n;
        let mut buf = vec![Complex64::new(0.0, 0.0); rows * m];
        for (r, row) in data.chunks_exact(n).enumerate() {
            let ext = &mut buf[r * m..(r + 1) * m];
            for (k, &v) in row.iter().enumerate() {
                ext[k + 1].re = v;
                ext[m - 1 - k].re = -v;
            }
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        // odd extension: Y[k+1] = -2i X[k]
        for (r, row) in data.chunks_exact_mut(n).enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = -0.5 * buf[r * m + k + 1].im;
            }
        }
    }
}

/// Solves the symmetric tridiagonal system with constant off-diagonal `off`
/// and constant diagonal `diag`, overwriting `x` (the rhs) with the solution.
fn thomas_constant(off: f64, diag: f64, x: &mut [f64], work: &mut [f64]) {
    let n = x.len();
    work[0] = diag;
    for j in 1..n {
        let w = off / work[j - 1];
        work[j] = diag - w * off;
        x[j] -= w * x[j - 1];
    }
    x[n - 1] /= work[n - 1];
    for j in (0..n - 1).rev() {
        x[j] = (x[j] - off * x[j + 1]) / work[j];
    }
}
