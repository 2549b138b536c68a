//! Preconditioned MINRES for the Newton systems.
//!
//! The linearized operator is self-adjoint in the trapezoid-weighted inner
//! product, so MINRES runs in that product. The preconditioner is the
//! constant-coefficient operator `-Delta_h + c` on the same mirror/Dirichlet
//! grid, inverted exactly by a separable cosine transform.

use std::sync::Arc;

use rayon::prelude::*;
use rustdct::{DctPlanner, TransformType2And3};

use crate::discretization::{weighted_dot, Field, LinearizedOperator, QuadrantGrid};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_LINEAR_ITERATIONS: usize = 3000;

/// Exact inverse of `-Delta_h + shift` on the unknowns of a grid.
pub struct FastPoissonPreconditioner {
    grid: QuadrantGrid,
    m: usize,
    dct: Arc<dyn TransformType2And3<f64>>,
    /// `(2/m)^2 / (mu_kx + mu_ky + shift)`, row-major in `(ky, kx)`.
    scaled_inverse: Vec<f64>,
}

impl std::fmt::Debug for FastPoissonPreconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastPoissonPreconditioner")
            .field("m", &self.m)
            .finish()
    }
}

impl FastPoissonPreconditioner {
    pub fn new(grid: QuadrantGrid, shift: f64) -> Result<Self> {
        if !(shift > 0.0) {
            return Err(Error::Domain(format!(
                "preconditioner shift {shift} must be positive"
            )));
        }
        let m = grid.n() - 1;
        let h = grid.spacing();
        // eigenvectors cos((k + 1/2) pi i / m): even at i = 0, zero at i = m
        let mu: Vec<f64> = (0..m)
            .map(|k| {
                let w = (k as f64 + 0.5) * std::f64::consts::PI / m as f64;
                4.0 * (0.5 * w).sin().powi(2) / (h * h)
            })
            .collect();
        let scale = (2.0 / m as f64).powi(2);
        let mut scaled_inverse = vec![0.0; m * m];
        for ky in 0..m {
            for kx in 0..m {
                scaled_inverse[ky * m + kx] = scale / (mu[kx] + mu[ky] + shift);
            }
        }
        let dct = DctPlanner::new().plan_dct2(m);
        Ok(FastPoissonPreconditioner {
            grid,
            m,
            dct,
            scaled_inverse,
        })
    }

    fn rows(&self, buf: &mut [f64], forward: bool) {
        let dct = &self.dct;
        buf.par_chunks_mut(self.m).for_each(|row| {
            if forward {
                dct.process_dct2(row);
            } else {
                dct.process_dct3(row);
            }
        });
    }

    fn transpose(&self, src: &[f64], dst: &mut [f64]) {
        let m = self.m;
        dst.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = src[i * m + j];
            }
        });
    }

    /// Writes `P^{-1} b` on the unknowns and zero on the outer edges.
    pub fn apply_into(&self, b: &[f64], out: &mut [f64]) {
        let (m, n) = (self.m, self.grid.n());
        let mut a = vec![0.0; m * m];
        for j in 0..m {
            a[j * m..(j + 1) * m].copy_from_slice(&b[j * n..j * n + m]);
        }
        let mut t = vec![0.0; m * m];
        // analysis: the inverse of the cosine sum is a scaled DCT-III
        self.rows(&mut a, false);
        self.transpose(&a, &mut t);
        self.rows(&mut t, false);
        // t is indexed (kx, ky)
        t.par_chunks_mut(m).enumerate().for_each(|(kx, row)| {
            for (ky, v) in row.iter_mut().enumerate() {
                *v *= self.scaled_inverse[ky * m + kx];
            }
        });
        self.rows(&mut t, true);
        self.transpose(&t, &mut a);
        self.rows(&mut a, true);
        out.fill(0.0);
        for j in 0..m {
            out[j * n..j * n + m].copy_from_slice(&a[j * m..(j + 1) * m]);
        }
    }
}

/// Outcome of a MINRES run.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||A x - b||_2 / ||b||_2` evaluated after the run.
    pub relative_residual: f64,
    pub converged: bool,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// MINRES with restarts until the true residual meets `tol`.
pub fn minres(
    op: &LinearizedOperator,
    precond: &FastPoissonPreconditioner,
    rhs: &[f64],
    tol: f64,
    max_iterations: usize,
) -> LinearSolve {
    let grid = *op.grid();
    let len = grid.len();
    let bnorm = euclid(rhs);
    let mut x = vec![0.0; len];
    if bnorm == 0.0 {
        return LinearSolve {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let dot = |a: &[f64], b: &[f64]| weighted_dot(&grid, a, b);
    let mut iterations = 0;
    let mut inner_tol = 0.1 * tol;
    let mut ax = vec![0.0; len];
    let mut relative_residual = 1.0;
    for _restart in 0..6 {
        op.apply_into(&x, &mut ax);
        let mut v: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        relative_residual = euclid(&v) / bnorm;
        if relative_residual <= tol {
            break;
        }
        let mut v_old = vec![0.0; len];
        let mut z = vec![0.0; len];
        precond.apply_into(&v, &mut z);
        let mut gamma = dot(&z, &v).sqrt();
        let mut gamma_old = 1.0;
        let mut eta = gamma;
        let eta0 = gamma;
        let (mut s_old, mut s, mut c_old, mut c) = (0.0, 0.0, 1.0, 1.0);
        let mut w_old = vec![0.0; len];
        let mut w = vec![0.0; len];
        let mut q = vec![0.0; len];
        let mut z_new = vec![0.0; len];
        while iterations < max_iterations {
            iterations += 1;
            z.iter_mut().for_each(|zi| *zi /= gamma);
            op.apply_into(&z, &mut q);
            let delta = dot(&q, &z);
            for k in 0..len {
                let vn = q[k] - (delta / gamma) * v[k] - (gamma / gamma_old) * v_old[k];
                v_old[k] = v[k];
                v[k] = vn;
            }
            precond.apply_into(&v, &mut z_new);
            let gamma_new = dot(&z_new, &v).max(0.0).sqrt();
            let a0 = c * delta - c_old * s * gamma;
            let a1 = a0.hypot(gamma_new);
            let a2 = s * delta + c_old * c * gamma;
            let a3 = s_old * gamma;
            let (c_new, s_new) = (a0 / a1, gamma_new / a1);
            for k in 0..len {
                let wn = (z[k] - a3 * w_old[k] - a2 * w[k]) / a1;
                w_old[k] = w[k];
                w[k] = wn;
                x[k] += c_new * eta * wn;
            }
            eta *= -s_new;
            gamma_old = gamma;
            gamma = gamma_new;
            std::mem::swap(&mut z, &mut z_new);
            (c_old, c, s_old, s) = (c, c_new, s, s_new);
            if eta.abs() <= inner_tol * eta0 || gamma == 0.0 {
                break;
            }
        }
        op.apply_into(&x, &mut ax);
        relative_residual =
            euclid(&rhs.iter().zip(&ax).map(|(b, a)| b - a).collect::<Vec<_>>()) / bnorm;
        if relative_residual <= tol || iterations >= max_iterations {
            break;
        }
        inner_tol *= 0.1;
    }
    LinearSolve {
        solution: x,
        iterations,
        converged: relative_residual <= tol,
        relative_residual,
    }
}

/// Solves `(-Delta_h + q) x = b` to relative Euclidean residual `tol`.
pub fn linear_solve(op: &LinearizedOperator, rhs: &Field, tol: f64) -> Result<Field> {
    let shift = op
        .potential_values()
        .iter()
        .fold(0.0f64, |m, &v| m.max(v))
        .max(1.0);
    let precond = FastPoissonPreconditioner::new(*op.grid(), shift)?;
    let out = minres(
        op,
        &precond,
        rhs.values(),
        tol,
        DEFAULT_MAX_LINEAR_ITERATIONS,
    );
    if !out.converged {
        return Err(Error::LinearSolver {
            iterations: out.iterations,
            relative_residual: out.relative_residual,
        });
    }
    Field::from_values(*op.grid(), out.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Boundary;
    use crate::potential::Model;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(grid: QuadrantGrid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| rng.random_range(-0.5..0.5))
            .collect();
        let mut f = Field::from_values(grid, values).unwrap();
        Boundary::constant(&grid, 0.0).impose(&mut f);
        f
    }

    fn relative_residual(op: &LinearizedOperator, x: &Field, b: &Field) -> f64 {
        let ax = op.apply(x);
        euclid(&ax.sub(b).into_values()) / euclid(b.values())
    }

    #[test]
    fn preconditioner_inverts_constant_operator() {
        let g = QuadrantGrid::new(4.0, 0.1).unwrap();
        let op = LinearizedOperator::with_potential_values(g, vec![2.0; g.len()]);
        let p = FastPoissonPreconditioner::new(g, 2.0).unwrap();
        let b = noise(g, 3);
        let mut x = vec![0.0; g.len()];
        p.apply_into(b.values(), &mut x);
        let x = Field::from_values(g, x).unwrap();
        assert!(relative_residual(&op, &x, &b) < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = QuadrantGrid::new(3.0, 0.1).unwrap();
        let op = LinearizedOperator::with_potential_values(g, vec![2.0; g.len()]);
        let x = linear_solve(&op, &Field::constant(g, 0.0), 1e-10).unwrap();
        assert_eq!(x.sup_norm(), 0.0);
    }

    #[test]
    fn indefinite_front_operator() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(12.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| model.profile.eval((y - x + 0.3) / 2f64.sqrt()));
        let op = LinearizedOperator::new(&u, &model.potential);
        let b = noise(g, 7);
        for tol in [1e-4, 1e-10] {
            let x = linear_solve(&op, &b, tol).unwrap();
            assert!(relative_residual(&op, &x, &b) <= tol);
        }
    }

    #[test]
    fn shifted_random_coefficients() {
        let g = QuadrantGrid::new(5.0, 0.1).unwrap();
        let q = noise(g, 21)
            .values()
            .iter()
            .map(|v| 3.0 * v + 0.5)
            .collect();
        let op = LinearizedOperator::with_potential_values(g, q);
        let b = noise(g, 22);
        let x = linear_solve(&op, &b, 1e-9).unwrap();
        assert!(relative_residual(&op, &x, &b) <= 1e-9);
    }

    #[test]
    fn deterministic() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(6.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| model.profile.eval(0.8 * y - 0.6 * x));
        let op = LinearizedOperator::new(&u, &model.potential);
        let b = noise(g, 5);
        assert_eq!(
            linear_solve(&op, &b, 1e-8).unwrap(),
            linear_solve(&op, &b, 1e-8).unwrap()
        );
    }
}
