//! Natural continuation of the branch of even four-ended solutions in the end angle.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::balance::classify;
use crate::discretization::{nodal_curve, residual_of_imposed, Field, QuadrantGrid};
use crate::error::{Error, Result};
use crate::potential::Model;
use crate::solver::{newton_solve, Solution, SolveOptions};
use crate::spectra::{morse_index, nondegeneracy_margin};

/// Tolerances a seed must meet: `|theta - pi/4|` and `|r|`.
pub const SEED_THETA_TOLERANCE: f64 = 1e-3;
pub const SEED_R_TOLERANCE: f64 = 1e-2;

/// Solves at `theta = pi/4`, `r = 0` from the ansatz and checks the result is the saddle.
pub fn seed_saddle(grid: QuadrantGrid, model: &Model, opts: &SolveOptions) -> Result<Solution> {
    let sol = newton_solve(grid, model, FRAC_PI_4, 0.0, None, opts)?;
    let (dt, r) = sol.classification.expect("solver classifies").pair();
    if dt.abs() > SEED_THETA_TOLERANCE || r.abs() > SEED_R_TOLERANCE {
        return Err(Error::Accuracy(format!(
            "seed classifies as ({dt:e}, {r:e}), not the saddle"
        )));
    }
    let curve = nodal_curve(&sol.field)?;
    let off = curve.max_distance_to_line(FRAC_PI_4);
    if off > 2.0 * grid.spacing() {
        return Err(Error::Accuracy(format!(
            "seed nodal line is {off} away from the diagonal"
        )));
    }
    Ok(sol)
}

/// `u(x, y) -> -u(y, x)`, mapping the end data `(theta, r)` to `(pi/2 - theta, -r)`.
pub fn conjugate_solution(sol: &Solution, model: &Model) -> Result<Solution> {
    let field = sol.field.conjugate();
    let residual = residual_of_imposed(&field, &model.potential).sup_norm();
    let classification = Some(classify(&field, model));
    Ok(Solution {
        field,
        potential_id: sol.potential_id.clone(),
        theta: FRAC_PI_2 - sol.theta,
        r: -sol.r,
        residual,
        newton_iterations: 0,
        total_newton_iterations: 0,
        r_iterations: 0,
        residual_history: vec![residual],
        classification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Halvings of the angle step tried before a direction is abandoned.
    pub max_halvings: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { max_halvings: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct CurveSample {
    pub solution: Solution,
    pub theta_extracted: f64,
    pub margin: Option<f64>,
    pub index: Option<usize>,
    pub file: Option<String>,
}

impl CurveSample {
    fn new(solution: Solution) -> Self {
        let theta_extracted = solution.classification.map_or(f64::NAN, |c| c.theta);
        CurveSample {
            solution,
            theta_extracted,
            margin: None,
            index: None,
            file: None,
        }
    }

    pub fn theta_imposed(&self) -> f64 {
        self.solution.theta
    }

    pub fn r(&self) -> f64 {
        self.solution
            .classification
            .map_or(self.solution.r, |c| c.r)
    }
}

/// Why a marching direction stopped before reaching its end of the interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Termination {
    /// Last accepted angle.
    pub theta: f64,
    /// Angle whose solve failed at the smallest step.
    pub attempted: f64,
    pub reason: String,
}

/// Accepted samples ordered by increasing imposed angle.
#[derive(Debug, Clone, Default)]
pub struct ModuliCurve {
    pub samples: Vec<CurveSample>,
    pub lower_termination: Option<Termination>,
    pub upper_termination: Option<Termination>,
}

impl ModuliCurve {
    pub fn is_complete(&self) -> bool {
        self.lower_termination.is_none() && self.upper_termination.is_none()
    }

    pub fn thetas_strictly_increasing(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[0].theta_imposed() < w[1].theta_imposed())
    }

    /// Offsets strictly decreasing along the curve.
    pub fn r_strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].r() < w[0].r())
    }

    /// Fills in the even-sector margin on `B_radius` for every sample. A
    /// sample whose modes are all discarded keeps `None`.
    pub fn attach_margins(&mut self, model: &Model, radius: f64, k: usize) -> Result<()> {
        for s in &mut self.samples {
            s.margin = match nondegeneracy_margin(&s.solution.field, &model.potential, radius, k) {
                Ok(m) => Some(m.margin),
                Err(Error::Inconclusive(_)) => None,
                Err(e) => return Err(e),
            };
        }
        Ok(())
    }

    pub fn attach_indices(&mut self, model: &Model, radius: f64) -> Result<()> {
        for s in &mut self.samples {
            s.index = Some(morse_index(&s.solution.field, &model.potential, radius)?);
        }
        Ok(())
    }

    /// Smallest attached margin, if every sample has one.
    pub fn min_margin(&self) -> Option<f64> {
        self.samples
            .iter()
            .map(|s| s.margin)
            .try_fold(f64::INFINITY, |m, x| x.map(|x| m.min(x)))
    }

    /// Whether two samples share both extracted coordinates within `tol`.
    pub fn has_repeated_pair(&self, tol: f64) -> bool {
        for (a, s) in self.samples.iter().enumerate() {
            for t in &self.samples[a + 1..] {
                if (s.theta_extracted - t.theta_extracted).abs() <= tol
                    && (s.r() - t.r()).abs() <= tol
                {
                    return true;
                }
            }
        }
        false
    }
}

struct Marcher<'a> {
    model: &'a Model,
    opts: &'a SolveOptions,
    copts: &'a ContinuationOptions,
}

impl Marcher<'_> {
    /// Secant prediction of field and offset from the last two samples.
    fn predict(&self, history: &[&Solution], theta: f64) -> (Field, f64) {
        let last = history[history.len() - 1];
        if history.len() < 2 {
            return (last.field.clone(), last.r);
        }
        let prev = history[history.len() - 2];
        let t = (theta - last.theta) / (last.theta - prev.theta);
        let mut field = last.field.clone();
        for (v, p) in field.values_mut().iter_mut().zip(prev.field.values()) {
            *v += t * (*v - p);
        }
        (field, last.r + t * (last.r - prev.r))
    }

    fn solve(&self, history: &[&Solution], theta: f64) -> Result<Solution> {
        let (guess, r) = self.predict(history, theta);
        let sol = newton_solve(*guess.grid(), self.model, theta, r, Some(&guess), self.opts)?;
        if !sol.is_accepted(self.opts.tolerance) {
            let m = sol.monotonicity();
            return Err(Error::Accuracy(format!(
                "solution at theta = {theta} rejected: {} x and {} y monotonicity violations, max |u| {}",
                m.x_violations, m.y_violations, m.max_abs
            )));
        }
        Ok(sol)
    }

    /// Marches through `targets` in order, halving failed steps.
    fn march(&self, seed: &Solution, targets: &[f64]) -> (Vec<Solution>, Option<Termination>) {
        let mut accepted: Vec<Solution> = Vec::new();
        for &target in targets {
            loop {
                let chain: Vec<&Solution> = std::iter::once(seed).chain(accepted.iter()).collect();
                let history = &chain[chain.len().saturating_sub(2)..];
                let from = history.last().unwrap().theta;
                let mut step = target - from;
                let mut reached = None;
                let mut failure = String::new();
                for _ in 0..=self.copts.max_halvings {
                    match self.solve(history, from + step) {
                        Ok(sol) => {
                            reached = Some(sol);
                            break;
                        }
                        Err(e) => {
                            failure = e.to_string();
                            step *= 0.5;
                        }
                    }
                }
                match reached {
                    Some(sol) => {
                        let done = sol.theta == target;
                        accepted.push(sol);
                        if done {
                            break;
                        }
                    }
                    None => {
                        return (
                            accepted,
                            Some(Termination {
                                theta: from,
                                attempted: from + 2.0 * step,
                                reason: failure,
                            }),
                        )
                    }
                }
            }
        }
        (accepted, None)
    }
}

/// Marches from `seed` to `theta` in steps of at most `max_step` and returns
/// the solution at `theta`.
pub fn continue_to(
    seed: &Solution,
    model: &Model,
    theta: f64,
    max_step: f64,
    opts: &SolveOptions,
    copts: &ContinuationOptions,
) -> Result<Solution> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi/2)")));
    }
    if !(max_step > 0.0) {
        return Err(Error::Domain(format!("step {max_step} must be positive")));
    }
    if theta == seed.theta {
        return Ok(seed.clone());
    }
    let steps = ((theta - seed.theta).abs() / max_step).ceil().max(1.0) as usize;
    let targets: Vec<f64> = (1..=steps)
        .map(|k| {
            if k == steps {
                theta
            } else {
                seed.theta + (theta - seed.theta) * k as f64 / steps as f64
            }
        })
        .collect();
    let marcher = Marcher { model, opts, copts };
    let (mut accepted, termination) = marcher.march(seed, &targets);
    match termination {
        None => Ok(accepted.pop().expect("at least one target")),
        Some(t) => Err(Error::NonConvergence {
            reason: format!("continuation stopped at theta = {} ({})", t.theta, t.reason),
            last: accepted.pop().map(|s| Box::new(s.field)),
        }),
    }
}

/// Traces the branch through `seed` over the uniform lattice of `steps`
/// angles spanning `[theta_min, theta_max]`, marching outward in both
/// directions with warm starts.
pub fn continue_curve(
    seed: &Solution,
    model: &Model,
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    opts: &SolveOptions,
    copts: &ContinuationOptions,
) -> Result<ModuliCurve> {
    let seed_theta = seed.classification.map_or(seed.theta, |c| c.theta);
    if !(0.0 < theta_min
        && theta_min < seed_theta
        && seed_theta < theta_max
        && theta_max < FRAC_PI_2)
    {
        return Err(Error::Domain(format!(
            "seed angle {seed_theta} must lie strictly inside ({theta_min}, {theta_max}) within (0, pi/2)"
        )));
    }
    if steps < 2 {
        return Err(Error::Domain(
            "at least two lattice angles are needed".into(),
        ));
    }
    if seed.residual > opts.tolerance {
        return Err(Error::Domain(format!(
            "seed residual {} exceeds tolerance",
            seed.residual
        )));
    }
    let delta = (theta_max - theta_min) / (steps - 1) as f64;
    let lattice: Vec<f64> = (0..steps)
        .map(|k| {
            if k + 1 == steps {
                theta_max
            } else {
                theta_min + k as f64 * delta
            }
        })
        .collect();
    let eps = 1e-12;
    let upper: Vec<f64> = lattice
        .iter()
        .copied()
        .filter(|&t| t > seed.theta + eps)
        .collect();
    let lower: Vec<f64> = lattice
        .iter()
        .rev()
        .copied()
        .filter(|&t| t < seed.theta - eps)
        .collect();
    let marcher = Marcher { model, opts, copts };
    let ((up, upper_termination), (down, lower_termination)) = rayon::join(
        || marcher.march(seed, &upper),
        || marcher.march(seed, &lower),
    );
    let mut samples: Vec<CurveSample> = down.into_iter().rev().map(CurveSample::new).collect();
    samples.push(CurveSample::new(seed.clone()));
    samples.extend(up.into_iter().map(CurveSample::new));
    Ok(ModuliCurve {
        samples,
        lower_termination,
        upper_termination,
    })
}
