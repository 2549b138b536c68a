//! Sparse symmetric eigensolver: envelope Cholesky and shift-invert Lanczos.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetric matrix in compressed rows, both triangles stored, columns sorted.
#[derive(Debug, Clone)]
pub(crate) struct SymmetricCsr {
    pub row_start: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl SymmetricCsr {
    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    fn row(&self, p: usize) -> (&[usize], &[f64]) {
        let r = self.row_start[p]..self.row_start[p + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(p, o)| {
            let (c, v) = self.row(p);
            *o = c.iter().zip(v).map(|(&q, a)| a * x[q]).sum();
        });
    }
}

/// Cholesky factor stored row by row from the first structural nonzero.
#[derive(Debug)]
pub(crate) struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `a - shift I`; fails unless that matrix is positive definite.
    pub fn factor(a: &SymmetricCsr, shift: f64) -> Result<Self> {
        let n = a.dim();
        let first: Vec<usize> = (0..n)
            .map(|p| a.row(p).0.first().copied().unwrap_or(p).min(p))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for p in 0..n {
            start.push(start[p] + p - first[p] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for p in 0..n {
            let (c, v) = a.row(p);
            for (&q, &x) in c.iter().zip(v) {
                if q <= p {
                    data[start[p] + q - first[p]] += x;
                }
            }
            data[start[p] + p - first[p]] -= shift;
        }
        for p in 0..n {
            let (done, rest) = data.split_at_mut(start[p]);
            let row = &mut rest[..p - first[p] + 1];
            for q in first[p]..=p {
                let k0 = first[p].max(first[q]);
                let s = if q < p {
                    let qrow = &done[start[q]..start[q + 1]];
                    let dot: f64 = row[k0 - first[p]..q - first[p]]
                        .iter()
                        .zip(&qrow[k0 - first[q]..q - first[q]])
                        .map(|(x, y)| x * y)
                        .sum();
                    (row[q - first[p]] - dot) / qrow[q - first[q]]
                } else {
                    let d = row[q - first[p]]
                        - row[k0 - first[p]..q - first[p]]
                            .iter()
                            .map(|x| x * x)
                            .sum::<f64>();
                    if !(d > 0.0) {
                        return Err(Error::Accuracy(format!(
                            "shifted operator is not positive definite at row {p}"
                        )));
                    }
                    d.sqrt()
                };
                row[q - first[p]] = s;
            }
        }
        Ok(EnvelopeCholesky { first, start, data })
    }

    fn row(&self, p: usize) -> &[f64] {
        &self.data[self.start[p]..self.start[p + 1]]
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.first.len();
        for p in 0..n {
            let row = self.row(p);
            let f = self.first[p];
            let s: f64 = row[..p - f].iter().zip(&b[f..p]).map(|(l, y)| l * y).sum();
            b[p] = (b[p] - s) / row[p - f];
        }
        for p in (0..n).rev() {
            let row = self.row(p);
            let f = self.first[p];
            b[p] /= row[p - f];
            let x = b[p];
            for (y, l) in b[f..p].iter_mut().zip(&row[..p - f]) {
                *y -= l * x;
            }
        }
    }
}

/// Converged Ritz pair of the original matrix, normalized to unit length.
#[derive(Debug, Clone)]
pub(crate) struct RitzPair {
    pub value: f64,
    pub vector: Vec<f64>,
    /// `||A y - value y||_2`.
    pub residual: f64,
}

const CHUNK: usize = 2048;

/// Fixed chunking keeps the summation order independent of the thread count.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

/// `out += sign * sum_q c_q basis_q`, blocked so each chunk stays in cache.
fn combine_into(out: &mut [f64], basis: &[Vec<f64>], coeffs: &[f64], sign: f64) {
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(b, chunk)| {
            let (off, len) = (b * CHUNK, chunk.len());
            for (q, c) in basis.iter().zip(coeffs) {
                let c = sign * c;
                for (o, x) in chunk.iter_mut().zip(&q[off..off + len]) {
                    *o += c * x;
                }
            }
        });
}

/// Seeded, so every run builds the same Krylov space.
fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// The `k` algebraically smallest eigenpairs of `a`, by Lanczos on
/// `(a - sigma)^{-1}` with full reorthogonalization. `sigma` must lie below
/// the spectrum. Each pair meets `residual <= tol`.
pub(crate) fn smallest_eigenpairs(
    a: &SymmetricCsr,
    sigma: f64,
    k: usize,
    tol: f64,
    max_steps: usize,
) -> Result<Vec<RitzPair>> {
    let n = a.dim();
    let k = k.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let chol = EnvelopeCholesky::factor(a, sigma)?;
    let max_steps = max_steps.min(n).max(k);
    let mut basis: Vec<Vec<f64>> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut partial = String::new();
    let mut scratch = vec![0.0; n];
    loop {
        let j = alpha.len();
        let mut w = basis[j].clone();
        chol.solve_in_place(&mut w);
        let aj = dot(&w, &basis[j]);
        alpha.push(aj);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            let coeffs: Vec<f64> = basis.par_iter().map(|q| dot(q, &w)).collect();
            combine_into(&mut w, &basis, &coeffs, -1.0);
        }
        let bj = dot(&w, &w).sqrt();
        let m = alpha.len();
        let exhausted = m >= max_steps || bj <= 1e-14 * aj.abs();
        if exhausted || (m >= k && m.is_multiple_of(10)) {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
            let top = &order[..k.min(m)];
            let estimates_small = top.iter().all(|&c| {
                let mu = eig.eigenvalues[c];
                bj * eig.eigenvectors[(m - 1, c)].abs() <= 1e-10 * mu.abs()
            });
            if estimates_small || exhausted {
                let mut pairs: Vec<RitzPair> = top
                    .iter()
                    .map(|&c| {
                        let s = eig.eigenvectors.column(c);
                        let mut y = vec![0.0; n];
                        let coeffs: Vec<f64> = s.iter().copied().collect();
                        combine_into(&mut y, &basis, &coeffs, 1.0);
                        let norm = dot(&y, &y).sqrt();
                        y.iter_mut().for_each(|v| *v /= norm);
                        RitzPair {
                            value: 0.0,
                            vector: y,
                            residual: f64::INFINITY,
                        }
                    })
                    .collect();
                for pair in &mut pairs {
                    a.apply_into(&pair.vector, &mut scratch);
                    pair.value = dot(&scratch, &pair.vector);
                    pair.residual = scratch
                        .iter()
                        .zip(&pair.vector)
                        .map(|(ay, y)| (ay - pair.value * y).powi(2))
                        .sum::<f64>()
                        .sqrt();
                }
                pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
                if pairs.len() == k && pairs.iter().all(|p| p.residual <= tol) {
                    return Ok(pairs);
                }
                partial = pairs
                    .iter()
                    .map(|p| format!("{:.6e} (residual {:.1e})", p.value, p.residual))
                    .collect::<Vec<_>>()
                    .join(", ");
            }
            if exhausted {
                return Err(Error::Accuracy(format!(
                    "eigen-iteration stagnated after {m} steps; partial pairs: {partial}"
                )));
            }
        }
        beta.push(bj);
        w.iter_mut().for_each(|x| *x /= bj);
        basis.push(w);
    }
}
