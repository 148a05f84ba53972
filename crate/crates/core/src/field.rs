//! Uniform node-centered grids and the fields that live on them.
//!
//! Storage is x-fastest: node `(i, j)` is at flat index `j * nx + i`, with
//! `i` running along x and `j` along y. Every module uses this layout.

use crate::error::{Error, Result};

/// Geometry of a uniform structured grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    hx: f64,
    hy: f64,
}

impl GridSpec {
    /// Grid with `nx * ny` nodes spanning `[xmin, xmax] x [ymin, ymax]`.
    pub fn uniform(nx: usize, ny: usize, bounds: [f64; 4]) -> Result<Self> {
        let [xmin, xmax, ymin, ymax] = bounds;
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3x3 nodes, got {nx}x{ny}"
            )));
        }
        if !bounds.iter().all(|b| b.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if xmax <= xmin || ymax <= ymin {
            return Err(Error::InvalidGrid(format!(
                "inverted bounds [{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(GridSpec {
            nx,
            ny,
            xmin,
            xmax,
            ymin,
            ymax,
            hx: (xmax - xmin) / (nx - 1) as f64,
            hy: (ymax - ymin) / (ny - 1) as f64,
        })
    }

    /// Unit-spaced grid on `[1, n] x [1, n]`.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::uniform(n, n, [1.0, n as f64, 1.0, n as f64])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn bounds(&self) -> [f64; 4] {
        [self.xmin, self.xmax, self.ymin, self.ymax]
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// x coordinate of column `i`. The last column is pinned to `xmax`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nx {
            self.xmax
        } else {
            self.xmin + i as f64 * self.hx
        }
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        if j + 1 == self.ny {
            self.ymax
        } else {
            self.ymin + j as f64 * self.hy
        }
    }

    /// Normalized coordinates `(s, t)` in `[0, 1]^2`.
    pub fn unit_coords(&self, i: usize, j: usize) -> (f64, f64) {
        (
            i as f64 / (self.nx - 1) as f64,
            j as f64 / (self.ny - 1) as f64,
        )
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    /// Quadrature weight of a single node.
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Area measured by the interior quadrature, `(nx-2)(ny-2) hx hy`.
    pub fn interior_area(&self) -> f64 {
        ((self.nx - 2) * (self.ny - 2)) as f64 * self.cell_area()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.ny - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| (i, j)))
    }

    /// Boundary nodes, counter-clockwise from `(0, 0)`.
    pub fn boundary_nodes(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = Vec::with_capacity(2 * (nx + ny) - 4);
        out.extend((0..nx).map(|i| (i, 0)));
        out.extend((1..ny).map(|j| (nx - 1, j)));
        out.extend((0..nx - 1).rev().map(|i| (i, ny - 1)));
        out.extend((1..ny - 1).rev().map(|j| (0, j)));
        out
    }

    pub(crate) fn check_same(&self, other: &GridSpec, what: &'static str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpecMismatch(what))
        }
    }
}

/// Real values at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        ScalarField {
            spec,
            values: vec![value; spec.len()],
        }
    }

    /// Field from x-fastest values; rejects wrong length or non-finite data.
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value at node ({}, {})",
                k % spec.nx,
                k / spec.nx
            )));
        }
        Ok(ScalarField { spec, values })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::from_node_fn(spec, |i, j| f(spec.x(i), spec.y(j)))
    }

    pub fn from_node_fn(spec: GridSpec, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = spec.nodes().map(|(i, j)| f(i, j)).collect();
        ScalarField { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.spec.index(i, j);
        self.values[k] = value;
    }

    /// `self + alpha * x`.
    pub fn axpy(&self, alpha: f64, x: &ScalarField) -> Result<ScalarField> {
        self.spec.check_same(&x.spec, "axpy operands")?;
        let values = self
            .values
            .iter()
            .zip(&x.values)
            .map(|(y, x)| y + alpha * x)
            .collect();
        Ok(ScalarField {
            spec: self.spec,
            values,
        })
    }

    pub fn scaled(&self, factor: f64) -> ScalarField {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interior_max_abs(&self) -> f64 {
        self.spec
            .interior_nodes()
            .fold(0.0, |m, (i, j)| m.max(self.get(i, j).abs()))
    }

    /// Same field with every boundary entry set to zero.
    pub fn with_zero_boundary(mut self) -> ScalarField {
        for (i, j) in self.spec.boundary_nodes() {
            self.set(i, j, 0.0);
        }
        self
    }

    /// Interior-node quadrature `sum a * hx * hy`.
    pub fn interior_integral(&self) -> f64 {
        interior_sum(&self.spec, |i, j| self.get(i, j)) * self.spec.cell_area()
    }

    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        weighted_l2_inner(self, other)
    }
}

/// Interior quadrature of `a * b` with node weight `hx * hy`.
pub fn weighted_l2_inner(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.spec.check_same(&b.spec, "inner product operands")?;
    Ok(interior_sum(&a.spec, |i, j| a.get(i, j) * b.get(i, j)) * a.spec.cell_area())
}

pub(crate) fn interior_sum(spec: &GridSpec, f: impl Fn(usize, usize) -> f64) -> f64 {
    spec.interior_nodes().map(|(i, j)| f(i, j)).sum()
}

/// Two scalar components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    x: ScalarField,
    y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.spec.check_same(&y.spec, "vector components")?;
        Ok(VectorField { x, y })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        VectorField {
            x: ScalarField::zeros(spec),
            y: ScalarField::zeros(spec),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.x.spec()
    }

    pub fn x(&self) -> &ScalarField {
        &self.x
    }

    pub fn y(&self) -> &ScalarField {
        &self.y
    }

    pub fn component(&self, c: Component) -> &ScalarField {
        match c {
            Component::X => &self.x,
            Component::Y => &self.y,
        }
    }

    pub fn component_mut(&mut self, c: Component) -> &mut ScalarField {
        match c {
            Component::X => &mut self.x,
            Component::Y => &mut self.y,
        }
    }

    pub fn into_components(self) -> (ScalarField, ScalarField) {
        (self.x, self.y)
    }

    pub fn axpy(&self, alpha: f64, other: &VectorField) -> Result<VectorField> {
        Ok(VectorField {
            x: self.x.axpy(alpha, &other.x)?,
            y: self.y.axpy(alpha, &other.y)?,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    /// Sum of the componentwise interior inner products.
    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        Ok(weighted_l2_inner(&self.x, &other.x)? + weighted_l2_inner(&self.y, &other.y)?)
    }
}

/// Which component of a vector quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
}

/// Node positions `(T1, T2)` of a grid map.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation {
    positions: VectorField,
}

impl Transformation {
    pub fn identity(spec: GridSpec) -> Self {
        Transformation {
            positions: VectorField {
                x: ScalarField::from_fn(spec, |x, _| x),
                y: ScalarField::from_fn(spec, |_, y| y),
            },
        }
    }

    pub fn from_positions(positions: VectorField) -> Self {
        Transformation { positions }
    }

    /// Samples `(x, y) -> (T1, T2)` at every node.
    pub fn from_fn(spec: GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        Transformation {
            positions: VectorField {
                x: ScalarField::from_fn(spec, |x, y| f(x, y).0),
                y: ScalarField::from_fn(spec, |x, y| f(x, y).1),
            },
        }
    }

    pub fn spec(&self) -> &GridSpec {
        self.positions.spec()
    }

    pub fn positions(&self) -> &VectorField {
        &self.positions
    }

    pub fn into_positions(self) -> VectorField {
        self.positions
    }

    pub fn t1(&self) -> &ScalarField {
        &self.positions.x
    }

    pub fn t2(&self) -> &ScalarField {
        &self.positions.y
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (self.positions.x.get(i, j), self.positions.y.get(i, j))
    }

    /// `self + u` nodewise.
    pub fn displaced(&self, u: &VectorField) -> Result<Transformation> {
        Ok(Transformation {
            positions: self.positions.axpy(1.0, u)?,
        })
    }

    /// Nodewise `self - other`.
    pub fn displacement_from(&self, other: &Transformation) -> Result<VectorField> {
        self.positions.axpy(-1.0, &other.positions)
    }

    /// Largest change in any boundary coordinate relative to `other`.
    pub fn boundary_deviation(&self, other: &Transformation) -> Result<f64> {
        self.spec().check_same(other.spec(), "transformations")?;
        Ok(self
            .spec()
            .boundary_nodes()
            .into_iter()
            .map(|(i, j)| {
                let (a, b) = (self.position(i, j), other.position(i, j));
                (a.0 - b.0).abs().max((a.1 - b.1).abs())
            })
            .fold(0.0, f64::max))
    }
}
