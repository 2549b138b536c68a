//! Newton iteration for doubly even four-ended solutions at a fixed end angle.
//!
//! The field is solved on the quadrant with Dirichlet data from the ansatz of
//! `(theta, r)`. The offset `r` is then replaced by the value read off the
//! balancing integrals and the solve is repeated until `r` settles.

mod linear;

pub use linear::{
    linear_solve, minres, FastPoissonPreconditioner, LinearSolve, DEFAULT_MAX_LINEAR_ITERATIONS,
};

use crate::balance::{classify, Classification};
use crate::discretization::{
    check_monotonicity, residual_of_imposed, weighted_dot, Boundary, Field, LinearizedOperator,
    Monotonicity, QuadrantGrid,
};
use crate::error::{Error, Result};
use crate::geometry::Ansatz;
use crate::potential::Model;

/// Iterates with `max |u|` above this are abandoned.
pub const BLOW_UP_LIMIT: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Sup norm of the residual at which Newton stops.
    pub tolerance: f64,
    pub max_newton: usize,
    /// Offset change at which the outer loop stops.
    pub r_tolerance: f64,
    pub max_r_iterations: usize,
    /// Step halvings tried before a Newton step is declared failed.
    pub max_halvings: usize,
    pub max_linear_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tolerance: 1e-9,
            max_newton: 30,
            r_tolerance: 1e-6,
            max_r_iterations: 20,
            max_halvings: 8,
            max_linear_iterations: DEFAULT_MAX_LINEAR_ITERATIONS,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.r_tolerance > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.max_newton == 0 || self.max_r_iterations == 0 || self.max_linear_iterations == 0 {
            return Err(Error::Domain("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// A converged field with its end data and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub field: Field,
    pub potential_id: String,
    /// Angle of the first-quadrant end imposed through the boundary data.
    pub theta: f64,
    /// Offset used in the boundary data of the final solve.
    pub r: f64,
    /// Sup norm of the discrete residual.
    pub residual: f64,
    /// Newton passes of the final inner solve.
    pub newton_iterations: usize,
    /// Newton passes summed over the offset loop.
    pub total_newton_iterations: usize,
    pub r_iterations: usize,
    /// Residual sup norms of the final inner solve, one per pass.
    pub residual_history: Vec<f64>,
    pub classification: Option<Classification>,
}

impl Solution {
    pub fn grid(&self) -> &QuadrantGrid {
        self.field.grid()
    }

    pub fn monotonicity(&self) -> Monotonicity {
        check_monotonicity(&self.field)
    }

    /// Residual within `tolerance`, `|u| < 1` and both monotonicity inequalities.
    pub fn is_accepted(&self, tolerance: f64) -> bool {
        self.residual <= tolerance && self.monotonicity().holds()
    }
}

/// Result of Newton's method on a fixed Dirichlet problem.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub field: Field,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

fn merit(grid: &QuadrantGrid, res: &Field) -> f64 {
    weighted_dot(grid, res.values(), res.values()).sqrt()
}

/// Damped Newton for `Delta_h u = F'(u)` with the outer edges of `initial` held fixed.
///
/// The iteration count is the number of residual evaluations that were
/// tested against the tolerance, so an exact input counts one.
pub fn newton_dirichlet(
    initial: Field,
    model: &Model,
    opts: &SolveOptions,
) -> Result<NewtonOutcome> {
    opts.validate()?;
    let grid = *initial.grid();
    let potential = &model.potential;
    let precond = FastPoissonPreconditioner::new(grid, potential.ddf(1.0).max(1.0))?;
    let mut u = initial;
    let mut res = residual_of_imposed(&u, potential);
    let mut history = Vec::new();
    for pass in 1..=opts.max_newton {
        let rsup = res.sup_norm();
        history.push(rsup);
        if rsup <= opts.tolerance {
            return Ok(NewtonOutcome {
                field: u,
                iterations: pass,
                residual: rsup,
                history,
            });
        }
        if pass == opts.max_newton {
            break;
        }
        // R(u + d) = R(u) - L d + O(d^2)
        let op = LinearizedOperator::new(&u, potential);
        let lin_tol = (1e-2 * rsup).clamp(1e-12, 1e-3);
        let step = minres(
            &op,
            &precond,
            res.values(),
            lin_tol,
            opts.max_linear_iterations,
        );
        let current = merit(&grid, &res);
        let mut accepted = None;
        let mut blown = 0.0f64;
        let mut lambda = 1.0;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (t, d) in trial.values_mut().iter_mut().zip(&step.solution) {
                *t += lambda * d;
            }
            let peak = trial.sup_norm();
            if peak > BLOW_UP_LIMIT {
                blown = blown.max(peak);
            } else {
                let trial_res = residual_of_imposed(&trial, potential);
                if merit(&grid, &trial_res) < current {
                    accepted = Some((trial, trial_res));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((next, next_res)) => {
                u = next;
                res = next_res;
            }
            None if blown > 0.0 && !step.converged => {
                return Err(Error::LinearSolver {
                    iterations: step.iterations,
                    relative_residual: step.relative_residual,
                })
            }
            None if blown > 0.0 => return Err(Error::BlowUp { max_abs: blown }),
            None => {
                return Err(Error::NonConvergence {
                    reason: format!(
                        "residual did not decrease after {} halvings (sup {rsup:e})",
                        opts.max_halvings
                    ),
                    last: Some(Box::new(u)),
                })
            }
        }
    }
    Err(Error::NonConvergence {
        reason: format!("no convergence in {} Newton steps", opts.max_newton),
        last: Some(Box::new(u)),
    })
}

/// Solves at angle `theta`, resolving the offset by the balancing formula.
///
/// The initial guess is `initial` when given (its outer edges are replaced by
/// the boundary data), otherwise the ansatz samples.
pub fn newton_solve(
    grid: QuadrantGrid,
    model: &Model,
    theta: f64,
    r0: f64,
    initial: Option<&Field>,
    opts: &SolveOptions,
) -> Result<Solution> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi/2)")));
    }
    opts.validate()?;
    if let Some(f) = initial {
        if *f.grid() != grid {
            return Err(Error::Domain(
                "initial field lives on a different grid".into(),
            ));
        }
    }
    let mut r = r0;
    let mut guess: Option<Field> = initial.cloned();
    let mut total = 0;
    let mut last_change = f64::INFINITY;
    for k in 1..=opts.max_r_iterations {
        let ansatz = Ansatz::symmetric(theta, r)?;
        let mut start = match guess.take() {
            Some(f) => f,
            None => ansatz.sample(&model.profile, &grid),
        };
        Boundary::from_ansatz(&grid, &ansatz, &model.profile).impose(&mut start);
        let outcome = newton_dirichlet(start, model, opts)?;
        total += outcome.iterations;
        let classification = classify(&outcome.field, model);
        let change = classification.r - r;
        if change.abs() < opts.r_tolerance {
            return Ok(Solution {
                field: outcome.field,
                potential_id: model.potential.id().to_string(),
                theta,
                r,
                residual: outcome.residual,
                newton_iterations: outcome.iterations,
                total_newton_iterations: total,
                r_iterations: k,
                residual_history: outcome.history,
                classification: Some(classification),
            });
        }
        last_change = change;
        r = classification.r;
        guess = Some(outcome.field);
    }
    Err(Error::NonConvergence {
        reason: format!(
            "offset loop did not settle in {} iterations (last change {last_change:e})",
            opts.max_r_iterations
        ),
        last: guess.map(Box::new),
    })
}
