//! Spectrum of the linearization `-Delta + F''(u)` on quarter discs.
//!
//! A doubly even field lets the operator on the disc `B_R` split into four
//! blocks by parity across the two axes. Each block lives on the quadrant
//! part of the disc: even parity is a mirror condition on the axis, odd
//! parity removes the axis nodes. Nodes with `|x| >= R` are zero.

mod decay;
mod eigen;

pub use decay::{decay_rate, DecayFit, DECAY_WINDOW_START};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::discretization::{Field, QuadrantGrid};
use crate::error::{Error, Result};
use crate::potential::Potential;
use eigen::{smallest_eigenpairs, SymmetricCsr};

/// Residual bound `||L phi - lambda phi|| / ||phi||` met by every returned pair.
pub const EIGEN_RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Modes with more than this share of their mass in the outer annulus are discarded.
pub const BOUNDARY_MASS_LIMIT: f64 = 0.5;
/// Relative width of that annulus.
pub const BOUNDARY_ANNULUS: f64 = 0.1;
/// Modes with more than this share of their mass outside `B_{R/2}` are
/// treated as approximations of continuous spectrum.
pub const SPREAD_MASS_LIMIT: f64 = 0.25;

const MAX_LANCZOS_STEPS: usize = 1200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymmetrySector {
    EvenEven,
    OddEven,
    EvenOdd,
    OddOdd,
}

impl SymmetrySector {
    pub const ALL: [SymmetrySector; 4] = [
        SymmetrySector::EvenEven,
        SymmetrySector::OddEven,
        SymmetrySector::EvenOdd,
        SymmetrySector::OddOdd,
    ];

    /// Even under `x -> -x`.
    pub fn even_in_x(self) -> bool {
        matches!(self, SymmetrySector::EvenEven | SymmetrySector::EvenOdd)
    }

    /// Even under `y -> -y`.
    pub fn even_in_y(self) -> bool {
        matches!(self, SymmetrySector::EvenEven | SymmetrySector::OddEven)
    }

    pub fn label(self) -> &'static str {
        match self {
            SymmetrySector::EvenEven => "even-even",
            SymmetrySector::OddEven => "odd-even",
            SymmetrySector::EvenOdd => "even-odd",
            SymmetrySector::OddOdd => "odd-odd",
        }
    }
}

impl fmt::Display for SymmetrySector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SymmetrySector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SymmetrySector::ALL
            .into_iter()
            .find(|sec| sec.label() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown sector {s:?}; expected even-even, odd-even, even-odd or odd-odd"
                ))
            })
    }
}

/// Linearization restricted to one sector of a quarter disc, symmetrized by
/// the square roots of the trapezoid weights.
struct SectorOperator {
    grid: QuadrantGrid,
    radius: f64,
    nodes: Vec<(usize, usize)>,
    sqrt_weight: Vec<f64>,
    matrix: SymmetricCsr,
    min_potential: f64,
}

impl SectorOperator {
    fn new(
        field: &Field,
        potential: &Potential,
        sector: SymmetrySector,
        radius: f64,
    ) -> Result<Self> {
        let grid = *field.grid();
        if !(radius > 0.0 && radius <= grid.half_width() + 1e-12) {
            return Err(Error::Domain(format!(
                "radius {radius} must lie in (0, {}]",
                grid.half_width()
            )));
        }
        let n = grid.n();
        let h = grid.spacing();
        let (ex, ey) = (sector.even_in_x(), sector.even_in_y());
        let inside = |i: usize, j: usize| {
            let [x, y] = grid.point(i, j);
            i < n - 1
                && j < n - 1
                && x * x + y * y < radius * radius
                && (ex || i > 0)
                && (ey || j > 0)
        };
        let mut index = vec![usize::MAX; grid.len()];
        let mut nodes = Vec::new();
        for j in 0..n {
            for i in 0..n {
                if inside(i, j) {
                    index[grid.index(i, j)] = nodes.len();
                    nodes.push((i, j));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::Domain(format!(
                "no grid nodes inside radius {radius}"
            )));
        }
        let weight = |i: usize, j: usize| grid.axis_weight(i) * grid.axis_weight(j);
        let sqrt_weight: Vec<f64> = nodes.iter().map(|&(i, j)| weight(i, j).sqrt()).collect();
        let inv_h2 = 1.0 / (h * h);
        let u = field.values();
        let mut min_potential = f64::INFINITY;
        let (mut row_start, mut cols, mut vals) = (vec![0], Vec::new(), Vec::new());
        for (p, &(i, j)) in nodes.iter().enumerate() {
            let q = potential.ddf(u[grid.index(i, j)]);
            min_potential = min_potential.min(q);
            let mut entries: Vec<(usize, f64)> = vec![(p, 4.0 * inv_h2 + q)];
            // row p of L: -1/h^2 per neighbour, -2/h^2 towards the interior from a mirrored axis
            let mut couple = |ni: usize, nj: usize, c: f64| {
                let k = index[grid.index(ni, nj)];
                if k != usize::MAX {
                    entries.push((k, -c * inv_h2 * sqrt_weight[p] / sqrt_weight[k]));
                }
            };
            if i == 0 {
                couple(1, j, 2.0);
            } else {
                couple(i - 1, j, 1.0);
                couple(i + 1, j, 1.0);
            }
            if j == 0 {
                couple(i, 1, 2.0);
            } else {
                couple(i, j - 1, 1.0);
                couple(i, j + 1, 1.0);
            }
            entries.sort_by_key(|e| e.0);
            for (k, v) in entries {
                cols.push(k);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        Ok(SectorOperator {
            grid,
            radius,
            nodes,
            sqrt_weight,
            matrix: SymmetricCsr {
                row_start,
                cols,
                vals,
            },
            min_potential,
        })
    }

    /// Strictly below the spectrum since `-Delta_h` is nonnegative.
    fn shift(&self) -> f64 {
        self.min_potential - 1.0
    }
}

/// One eigenpair of a sector block together with its mass distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorMode {
    pub eigenvalue: f64,
    /// `||L phi - lambda phi||_2 / ||phi||_2`.
    pub residual: f64,
    /// Share of the weighted mass in the annulus `|x| >= (1 - BOUNDARY_ANNULUS) R`.
    pub boundary_mass: f64,
    /// Share of the weighted mass outside `B_{R/2}`.
    pub spread_mass: f64,
    /// Eigenfunction on the full grid, zero outside the disc and on odd axes.
    pub eigenfunction: Field,
}

impl SectorMode {
    pub fn is_boundary_artifact(&self) -> bool {
        self.boundary_mass > BOUNDARY_MASS_LIMIT
    }

    pub fn is_spread(&self) -> bool {
        self.spread_mass > SPREAD_MASS_LIMIT
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub sector: SymmetrySector,
    pub radius: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub negative_count: usize,
    pub smallest_abs: f64,
    pub modes: Vec<SectorMode>,
}

impl SpectrumReport {
    fn from_modes(sector: SymmetrySector, radius: f64, modes: Vec<SectorMode>) -> Self {
        let eigenvalues: Vec<f64> = modes.iter().map(|m| m.eigenvalue).collect();
        SpectrumReport {
            sector,
            radius,
            negative_count: eigenvalues.iter().filter(|&&l| l < 0.0).count(),
            smallest_abs: eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, l| m.min(l.abs())),
            eigenvalues,
            modes,
        }
    }
}

/// The `k` algebraically smallest eigenvalues of `-Delta_h + F''(u)` in one
/// sector of the quarter disc of radius `radius`.
pub fn sector_eigenvalues(
    field: &Field,
    potential: &Potential,
    sector: SymmetrySector,
    radius: f64,
    k: usize,
) -> Result<SpectrumReport> {
    if k == 0 {
        return Err(Error::Domain(
            "at least one eigenvalue must be requested".into(),
        ));
    }
    let op = SectorOperator::new(field, potential, sector, radius)?;
    // the symmetrized residual is within a factor sqrt(2) of the one for L
    let tol = EIGEN_RESIDUAL_TOLERANCE / 2.0;
    let pairs = smallest_eigenpairs(&op.matrix, op.shift(), k, tol, MAX_LANCZOS_STEPS)?;
    let grid = op.grid;
    let inner = (1.0 - BOUNDARY_ANNULUS) * op.radius;
    let half = 0.5 * op.radius;
    let modes = pairs
        .into_iter()
        .map(|pair| {
            let mut values = vec![0.0; grid.len()];
            let (mut total, mut boundary, mut spread) = (0.0, 0.0, 0.0);
            let (mut num, mut den) = (0.0, 0.0);
            let mut ly = vec![0.0; pair.vector.len()];
            op.matrix.apply_into(&pair.vector, &mut ly);
            for (p, (&(i, j), y)) in op.nodes.iter().zip(&pair.vector).enumerate() {
                let phi = y / op.sqrt_weight[p];
                values[grid.index(i, j)] = phi;
                let mass = y * y;
                let [x0, y0] = grid.point(i, j);
                let rho = x0.hypot(y0);
                total += mass;
                if rho >= inner {
                    boundary += mass;
                }
                if rho > half {
                    spread += mass;
                }
                num += ((ly[p] - pair.value * y) / op.sqrt_weight[p]).powi(2);
                den += phi * phi;
            }
            SectorMode {
                eigenvalue: pair.value,
                residual: (num / den).sqrt(),
                boundary_mass: boundary / total,
                spread_mass: spread / total,
                eigenfunction: Field::from_values(grid, values).expect("grid sized"),
            }
        })
        .collect::<Vec<_>>();
    if let Some(bad) = modes.iter().find(|m| m.residual > EIGEN_RESIDUAL_TOLERANCE) {
        return Err(Error::Accuracy(format!(
            "eigenpair {} misses the residual bound ({:e})",
            bad.eigenvalue, bad.residual
        )));
    }
    Ok(SpectrumReport::from_modes(sector, radius, modes))
}

/// Even-sector margin and the bookkeeping behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Margin {
    pub margin: f64,
    /// Whether the margin comes from a localized mode rather than from the
    /// bottom of a spectrum with no localized mode in the computed range.
    pub localized: bool,
    /// Smallest `|lambda|` after the boundary-mass filter alone.
    pub boundary_filtered: Option<f64>,
    pub kept: usize,
    pub discarded: usize,
    pub report: SpectrumReport,
}

/// Smallest `|lambda|` among localized even-even modes on `B_R`.
///
/// Of the `k` lowest modes, those with most of their mass in the outer
/// annulus are dropped, and so are those spread beyond `B_{R/2}`: on a
/// truncated domain the continuous spectrum shows up as extended modes whose
/// eigenvalues move with `R`, while a decaying kernel element stays
/// concentrated. When no localized mode is among the computed ones and all
/// of them are positive, the lowest eigenvalue is returned: no localized
/// eigenvalue can lie closer to zero.
pub fn nondegeneracy_margin(
    field: &Field,
    potential: &Potential,
    radius: f64,
    k: usize,
) -> Result<Margin> {
    let report = sector_eigenvalues(field, potential, SymmetrySector::EvenEven, radius, k)?;
    let min_abs = |modes: &[&SectorMode]| modes.iter().map(|m| m.eigenvalue.abs()).reduce(f64::min);
    let inside: Vec<&SectorMode> = report
        .modes
        .iter()
        .filter(|m| !m.is_boundary_artifact())
        .collect();
    if inside.is_empty() {
        return Err(Error::Inconclusive(format!(
            "all {} even-even modes on radius {radius} sit at the boundary",
            report.modes.len()
        )));
    }
    let kept: Vec<&SectorMode> = inside.iter().copied().filter(|m| !m.is_spread()).collect();
    let (margin, localized) = match min_abs(&kept) {
        Some(m) => (m, true),
        None if report.eigenvalues[0] > 0.0 => (report.eigenvalues[0], false),
        None => {
            return Err(Error::Inconclusive(format!(
                "no localized even-even mode among the {} lowest on radius {radius}",
                report.modes.len()
            )))
        }
    };
    Ok(Margin {
        margin,
        localized,
        boundary_filtered: min_abs(&inside),
        kept: kept.len(),
        discarded: report.modes.len() - kept.len(),
        report,
    })
}

/// Number of negative eigenvalues in one sector.
pub fn sector_negative_count(
    field: &Field,
    potential: &Potential,
    sector: SymmetrySector,
    radius: f64,
) -> Result<usize> {
    let mut k = 8;
    loop {
        let report = sector_eigenvalues(field, potential, sector, radius, k)?;
        if report.eigenvalues.len() < k || report.eigenvalues.last().is_some_and(|&l| l >= 0.0) {
            return Ok(report.negative_count);
        }
        k *= 2;
    }
}

/// Negative-eigenvalue counts per sector, in the order of `SymmetrySector::ALL`.
pub fn sector_indices(field: &Field, potential: &Potential, radius: f64) -> Result<[usize; 4]> {
    let counts: Vec<usize> = SymmetrySector::ALL
        .par_iter()
        .map(|&s| sector_negative_count(field, potential, s, radius))
        .collect::<Result<_>>()?;
    Ok([counts[0], counts[1], counts[2], counts[3]])
}

/// Morse index of the solution on `B_R`: negative eigenvalues over all four sectors.
pub fn morse_index(field: &Field, potential: &Potential, radius: f64) -> Result<usize> {
    Ok(sector_indices(field, potential, radius)?.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRow {
    pub radius: f64,
    pub per_sector: [usize; 4],
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    pub rows: Vec<IndexRow>,
    /// The last three indices agree.
    pub stabilized: bool,
}

impl IndexTable {
    pub fn is_nondecreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].index <= w[1].index)
    }

    pub fn stabilized_index(&self) -> Option<usize> {
        self.stabilized
            .then(|| self.rows.last().map(|r| r.index))
            .flatten()
    }
}

pub fn index_stabilization(
    field: &Field,
    potential: &Potential,
    radii: &[f64],
) -> Result<IndexTable> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain(
            "radii must be nonempty and strictly increasing".into(),
        ));
    }
    let rows = radii
        .iter()
        .map(|&radius| {
            let per_sector = sector_indices(field, potential, radius)?;
            Ok(IndexRow {
                radius,
                per_sector,
                index: per_sector.iter().sum(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stabilized = rows.len() >= 3
        && rows[rows.len() - 3..]
            .windows(2)
            .all(|w| w[0].index == w[1].index);
    Ok(IndexTable { rows, stabilized })
}
