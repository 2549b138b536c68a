//! Uniform quadrant grid, sampled fields and the finite-difference operators.
//!
//! The closed quadrant `[0, L]^2` is sampled at `(i h, j h)`. Values on the
//! axes are unknowns with mirror ghosts (even reflection); the outer edges
//! `x = L` and `y = L` carry Dirichlet data.

mod nodal;

pub use nodal::{cone_confinement, nodal_curve, ConeFit, NodalCurve};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Ansatz, Point};
use crate::potential::{HeteroclinicProfile, Potential};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantGrid {
    half_width: f64,
    spacing: f64,
    n: usize,
}

impl QuadrantGrid {
    pub fn new(half_width: f64, spacing: f64) -> Result<Self> {
        if !(half_width > 0.0 && spacing > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid grid L = {half_width}, h = {spacing}"
            )));
        }
        let ratio = half_width / spacing;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) || cells < 1.0 {
            return Err(Error::Domain(format!(
                "L / h = {ratio} is not a positive integer"
            )));
        }
        Ok(QuadrantGrid {
            half_width,
            spacing,
            n: cells as usize + 1,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        [self.coord(i), self.coord(j)]
    }

    pub fn point_of(&self, k: usize) -> Point {
        self.point(k % self.n, k / self.n)
    }

    /// Whether `(i, j)` lies on the Dirichlet edges.
    pub fn is_outer(&self, i: usize, j: usize) -> bool {
        i + 1 == self.n || j + 1 == self.n
    }

    /// One-dimensional trapezoid weight: one half on the axis and the outer edge.
    pub fn axis_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.n {
            0.5
        } else {
            1.0
        }
    }

    /// Quadrature weight `h^2 w_i w_j` of a grid point.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.spacing * self.spacing * self.axis_weight(i) * self.axis_weight(j)
    }
}

/// Values on every point of a [`QuadrantGrid`], row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: QuadrantGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: QuadrantGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: QuadrantGrid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: QuadrantGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            let y = grid.coord(j);
            for (i, v) in row.iter_mut().enumerate() {
                *v = f(grid.coord(i), y);
            }
        });
        Field { grid, values }
    }

    pub fn grid(&self) -> &QuadrantGrid {
        &self.grid
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

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise difference `self - other`.
    pub fn sub(&self, other: &Field) -> Field {
        Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `(x, y) -> -u(y, x)`.
    pub fn conjugate(&self) -> Field {
        let n = self.grid.n();
        let mut values = vec![0.0; self.values.len()];
        for j in 0..n {
            for i in 0..n {
                values[j * n + i] = -self.values[i * n + j];
            }
        }
        Field {
            grid: self.grid,
            values,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Weighted inner product over the quadrant.
    pub fn dot(&self, other: &Field) -> f64 {
        weighted_dot(&self.grid, &self.values, &other.values)
    }

    /// Trapezoid `L^2` norm over the quadrant.
    pub fn l2_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

pub(crate) fn weighted_dot(grid: &QuadrantGrid, a: &[f64], b: &[f64]) -> f64 {
    let n = grid.n();
    let mut acc = 0.0;
    for j in 0..n {
        let mut row = 0.0;
        for i in 0..n {
            let k = j * n + i;
            row += grid.axis_weight(i) * a[k] * b[k];
        }
        acc += grid.axis_weight(j) * row;
    }
    acc * grid.spacing() * grid.spacing()
}

/// Dirichlet data on the two outer edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    n: usize,
    /// `u(L, y_j)` for every `j`.
    right: Vec<f64>,
    /// `u(x_i, L)` for every `i`.
    top: Vec<f64>,
}

impl Boundary {
    pub fn from_ansatz(
        grid: &QuadrantGrid,
        ansatz: &Ansatz,
        profile: &HeteroclinicProfile,
    ) -> Self {
        let n = grid.n();
        let edge = grid.coord(n - 1);
        Boundary {
            n,
            right: (0..n)
                .map(|j| ansatz.eval(profile, [edge, grid.coord(j)]))
                .collect(),
            top: (0..n)
                .map(|i| ansatz.eval(profile, [grid.coord(i), edge]))
                .collect(),
        }
    }

    pub fn from_field(field: &Field) -> Self {
        let n = field.grid.n();
        Boundary {
            n,
            right: (0..n).map(|j| field.at(n - 1, j)).collect(),
            top: (0..n).map(|i| field.at(i, n - 1)).collect(),
        }
    }

    pub fn constant(grid: &QuadrantGrid, c: f64) -> Self {
        Boundary {
            n: grid.n(),
            right: vec![c; grid.n()],
            top: vec![c; grid.n()],
        }
    }

    /// Overwrites the outer edges of `field`.
    pub fn impose(&self, field: &mut Field) {
        let n = self.n;
        for j in 0..n {
            field.values[j * n + n - 1] = self.right[j];
        }
        field.values[(n - 1) * n..].copy_from_slice(&self.top);
    }
}

/// `-Delta_h` on interior points, writing zero on the outer edges.
///
/// The stencil is accumulated as differences from the centre so that values
/// near the wells keep their relative precision.
fn neg_laplacian_into(grid: &QuadrantGrid, u: &[f64], out: &mut [f64], zero_outer: bool) {
    let n = grid.n();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let read = |i: usize, j: usize| {
        if zero_outer && (i + 1 == n || j + 1 == n) {
            0.0
        } else {
            u[j * n + i]
        }
    };
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        if j + 1 == n {
            row.fill(0.0);
            return;
        }
        for i in 0..n - 1 {
            let c = u[j * n + i];
            let left = if i == 0 { read(1, j) } else { read(i - 1, j) };
            let right = read(i + 1, j);
            let down = if j == 0 { read(i, 1) } else { read(i, j - 1) };
            let up = read(i, j + 1);
            let lap = ((left - c) + (right - c)) + ((down - c) + (up - c));
            row[i] = -lap * inv_h2;
        }
        row[n - 1] = 0.0;
    });
}

/// `Delta_h u - F'(u)` at interior points with the outer edges taken from `boundary`.
pub fn residual(field: &Field, potential: &Potential, boundary: &Boundary) -> Field {
    let mut u = field.clone();
    boundary.impose(&mut u);
    residual_of_imposed(&u, potential)
}

/// Residual of a field whose outer edges already hold the Dirichlet data.
pub fn residual_of_imposed(u: &Field, potential: &Potential) -> Field {
    let grid = u.grid;
    let n = grid.n();
    let mut out = vec![0.0; grid.len()];
    neg_laplacian_into(&grid, &u.values, &mut out, false);
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        if j + 1 == n {
            return;
        }
        for (r, &v) in row[..n - 1].iter_mut().zip(&u.values[j * n..]) {
            *r = -*r - potential.df(v);
        }
    });
    Field { grid, values: out }
}

/// Residual with Dirichlet data taken from the ansatz.
pub fn ansatz_residual(
    field: &Field,
    potential: &Potential,
    ansatz: &Ansatz,
    profile: &HeteroclinicProfile,
) -> Field {
    residual(
        field,
        potential,
        &Boundary::from_ansatz(field.grid(), ansatz, profile),
    )
}

/// `-Delta_h + q` acting on fields that vanish on the outer edges.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    grid: QuadrantGrid,
    q: Vec<f64>,
}

impl LinearizedOperator {
    /// Linearization of the residual about `u`.
    pub fn new(u: &Field, potential: &Potential) -> Self {
        LinearizedOperator {
            grid: u.grid,
            q: u.values.iter().map(|&v| potential.ddf(v)).collect(),
        }
    }

    pub fn with_potential_values(grid: QuadrantGrid, q: Vec<f64>) -> Self {
        assert_eq!(q.len(), grid.len());
        LinearizedOperator { grid, q }
    }

    pub fn grid(&self) -> &QuadrantGrid {
        &self.grid
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.q
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        neg_laplacian_into(&self.grid, v, out, true);
        out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
            if j + 1 == n {
                return;
            }
            let start = j * n;
            for ((r, q), x) in row[..n - 1]
                .iter_mut()
                .zip(&self.q[start..])
                .zip(&v[start..])
            {
                *r += q * x;
            }
        });
    }

    pub fn apply(&self, v: &Field) -> Field {
        let mut out = vec![0.0; self.grid.len()];
        self.apply_into(&v.values, &mut out);
        Field {
            grid: self.grid,
            values: out,
        }
    }
}

/// `(-Delta_h + F''(u)) v` with `v` taken as zero on the outer edges.
pub fn linearized_apply(field: &Field, potential: &Potential, v: &Field) -> Field {
    LinearizedOperator::new(field, potential).apply(v)
}

/// Centered-difference sign check of `du/dx < 0` and `du/dy > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monotonicity {
    /// Interior points where the x-difference is not negative.
    pub x_violations: usize,
    /// Interior points where the y-difference is not positive.
    pub y_violations: usize,
    /// Largest centered x-difference seen.
    pub max_dx: f64,
    /// Smallest centered y-difference seen.
    pub min_dy: f64,
    /// Largest `|u|` over points off the outer edges.
    pub max_abs: f64,
}

impl Monotonicity {
    pub fn holds(&self) -> bool {
        self.x_violations == 0 && self.y_violations == 0 && self.max_abs < 1.0
    }
}

/// Checks monotonicity at points off the axes and off the outer edges.
pub fn check_monotonicity(field: &Field) -> Monotonicity {
    let n = field.grid.n();
    let mut report = Monotonicity {
        x_violations: 0,
        y_violations: 0,
        max_dx: f64::NEG_INFINITY,
        min_dy: f64::INFINITY,
        max_abs: 0.0,
    };
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            report.max_abs = report.max_abs.max(field.at(i, j).abs());
            if i == 0 || j == 0 {
                continue;
            }
            let dx = field.at(i + 1, j) - field.at(i - 1, j);
            let dy = field.at(i, j + 1) - field.at(i, j - 1);
            if !(dx < 0.0) {
                report.x_violations += 1;
            }
            if !(dy > 0.0) {
                report.y_violations += 1;
            }
            report.max_dx = report.max_dx.max(dx);
            report.min_dy = report.min_dy.min(dy);
        }
    }
    report
}
