//! Exponential approach to the wells away from the zero set.

use rayon::prelude::*;

use crate::discretization::{nodal_curve, Field};
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Points closer than this to the zero set are left out of the fit.
pub const DECAY_WINDOW_START: f64 = 3.0;
const MIN_POINTS: usize = 10;

/// Fit of `log |1 - u^2| = log C - alpha d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub alpha: f64,
    pub c: f64,
    /// Coefficient of determination of the linear fit.
    pub r_squared: f64,
    pub points: usize,
    /// Largest `|1 - u^2| / (C e^{-alpha d})` over the fitted points.
    pub max_ratio: f64,
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Distance from `p` to the zero set extended to the plane by the two axis
/// reflections.
fn nodal_distance(p: Point, polyline: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for q in [p, [-p[0], p[1]], [p[0], -p[1]], [-p[0], -p[1]]] {
        for w in polyline.windows(2) {
            best = best.min(segment_distance(q, w[0], w[1]));
        }
    }
    best
}

/// Least-squares decay rate of `|1 - u^2|` against the distance to the zero
/// set, over grid points at distance between `DECAY_WINDOW_START` and `L/2`.
pub fn decay_rate(field: &Field) -> Result<DecayFit> {
    let curve = nodal_curve(field)?;
    let grid = *field.grid();
    let upper = 0.5 * grid.half_width();
    let samples: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .filter_map(|k| {
            let gap = (1.0 - field.values()[k].powi(2)).abs();
            if gap == 0.0 {
                return None;
            }
            let d = nodal_distance(grid.point_of(k), &curve.polyline);
            (DECAY_WINDOW_START..=upper)
                .contains(&d)
                .then(|| (d, gap.ln()))
        })
        .collect();
    if samples.len() < MIN_POINTS {
        return Err(Error::Domain(format!(
            "only {} grid points lie between distance {DECAY_WINDOW_START} and {upper} from the zero set",
            samples.len()
        )));
    }
    let m = samples.len() as f64;
    let (mx, my) = samples
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / m, b + y / m));
    let (sxx, sxy, syy) = samples.iter().fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| {
        let (dx, dy) = (x - mx, y - my);
        (a + dx * dx, b + dx * dy, c + dy * dy)
    });
    if sxx == 0.0 {
        return Err(Error::Domain(
            "all sample points sit at one distance".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = samples
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let max_log = samples
        .iter()
        .map(|(x, y)| y - intercept - slope * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        alpha: -slope,
        c: intercept.exp(),
        r_squared,
        points: samples.len(),
        max_ratio: max_log.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::QuadrantGrid;

    #[test]
    fn straight_front_decays_at_root_two() {
        // 1 - tanh^2(s / sqrt 2) ~ 4 exp(-sqrt 2 s)
        let g = QuadrantGrid::new(24.0, 0.2).unwrap();
        let f = Field::from_fn(g, |x, y| (0.5 * (y - x)).tanh());
        let fit = decay_rate(&f).unwrap();
        assert!((fit.alpha - 2f64.sqrt()).abs() < 0.02, "{fit:?}");
        assert!((fit.c - 4.0).abs() < 0.3, "{fit:?}");
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn no_zero_set() {
        let g = QuadrantGrid::new(5.0, 0.5).unwrap();
        assert!(matches!(
            decay_rate(&Field::constant(g, 1.0)),
            Err(Error::EmptyNodalSet)
        ));
    }

    #[test]
    fn reflections_count() {
        let line = [[1.0, 0.0], [1.0, 5.0]];
        assert!((nodal_distance([0.2, 1.0], &line) - 0.8).abs() < 1e-15);
        let diag = [[0.0, 0.0], [5.0, 5.0]];
        // the reflected diagonal y = -x passes equally close
        assert!((nodal_distance([2.0, 0.0], &diag) - 2f64.sqrt()).abs() < 1e-15);
    }
}
