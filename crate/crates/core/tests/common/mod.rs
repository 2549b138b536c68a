//! Helpers shared by the integration tests.
#![allow(dead_code)]

use acmoduli::discretization::{Field, QuadrantGrid};
use acmoduli::potential::Potential;
use acmoduli::spectra::SymmetrySector;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Full-plane disc nodes `(a, b)` (in units of h) of the quadrant grid
/// mirrored to all four quadrants, outer edges excluded.
pub fn disc_nodes(grid: &QuadrantGrid, radius: f64) -> Vec<(isize, isize)> {
    let m = grid.n() as isize - 2;
    let h = grid.spacing();
    let mut out = Vec::new();
    for b in -m..=m {
        for a in -m..=m {
            let (x, y) = (a as f64 * h, b as f64 * h);
            if x * x + y * y < radius * radius {
                out.push((a, b));
            }
        }
    }
    out
}

/// Dense `-Delta_h + F''(u)` on the full-plane disc with zero data outside,
/// `u` extended evenly across both axes.
pub fn dense_operator(
    field: &Field,
    potential: &Potential,
    radius: f64,
) -> (DMatrix<f64>, Vec<(isize, isize)>) {
    let grid = *field.grid();
    let nodes = disc_nodes(&grid, radius);
    let h2 = grid.spacing().powi(2);
    let position: std::collections::HashMap<(isize, isize), usize> =
        nodes.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut a = DMatrix::zeros(nodes.len(), nodes.len());
    for (k, &(x, y)) in nodes.iter().enumerate() {
        let u = field.at(x.unsigned_abs(), y.unsigned_abs());
        a[(k, k)] = 4.0 / h2 + potential.ddf(u);
        for nb in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if let Some(&l) = position.get(&nb) {
                a[(k, l)] = -1.0 / h2;
            }
        }
    }
    (a, nodes)
}

fn parity(even: bool, coord: isize) -> f64 {
    if even || coord >= 0 {
        1.0
    } else {
        -1.0
    }
}

/// Orthonormal basis of the functions on `nodes` with the symmetry of `sector`.
pub fn sector_basis(nodes: &[(isize, isize)], sector: SymmetrySector) -> DMatrix<f64> {
    let (ex, ey) = (sector.even_in_x(), sector.even_in_y());
    let position: std::collections::HashMap<(isize, isize), usize> =
        nodes.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let reps: Vec<(isize, isize)> = nodes
        .iter()
        .copied()
        .filter(|&(a, b)| a >= 0 && b >= 0 && (ex || a > 0) && (ey || b > 0))
        .collect();
    let mut q = DMatrix::zeros(nodes.len(), reps.len());
    for (c, &(a, b)) in reps.iter().enumerate() {
        let mut orbit = vec![(a, b), (-a, b), (a, -b), (-a, -b)];
        orbit.sort_unstable();
        orbit.dedup();
        let norm = (orbit.len() as f64).sqrt();
        for (x, y) in orbit {
            q[(position[&(x, y)], c)] = parity(ex, x) * parity(ey, y) / norm;
        }
    }
    q
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Spectrum of the dense operator restricted to one sector.
pub fn dense_sector_spectrum(
    field: &Field,
    potential: &Potential,
    sector: SymmetrySector,
    radius: f64,
) -> Vec<f64> {
    let (a, nodes) = dense_operator(field, potential, radius);
    let q = sector_basis(&nodes, sector);
    sorted_eigenvalues(q.transpose() * &a * &q)
}

/// Uniform `[-1, 1]` values, zero on the outer Dirichlet edges.
pub fn interior_direction(grid: QuadrantGrid, rng: &mut ChaCha8Rng) -> Field {
    let n = grid.n();
    let mut values = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            if !grid.is_outer(i, j) {
                values[grid.index(i, j)] = rng.random_range(-1.0..=1.0);
            }
        }
    }
    Field::from_values(grid, values).unwrap()
}
