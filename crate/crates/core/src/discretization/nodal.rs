//! Zero level set by marching squares.

use std::collections::HashMap;

use super::Field;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Chained zero set of a field in the quadrant.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalCurve {
    /// Longest component, starting at the end nearest the origin.
    pub polyline: Vec<Point>,
    /// Number of connected components found; more than one means the zero
    /// set is not a single graph.
    pub components: usize,
}

impl NodalCurve {
    pub fn is_single(&self) -> bool {
        self.components == 1
    }

    /// Largest distance from a polyline vertex to the line through the origin
    /// with direction `(cos t, sin t)`.
    pub fn max_distance_to_line(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.polyline
            .iter()
            .fold(0.0, |m, p| m.max((p[1] * c - p[0] * s).abs()))
    }
}

fn positive(v: f64) -> bool {
    v > 0.0
}

/// Zero crossings interpolated linearly along grid edges and chained cell by
/// cell. A cell with four sign changes is resolved by the sign of its centre
/// value.
pub fn nodal_curve(field: &Field) -> Result<NodalCurve> {
    let grid = *field.grid();
    let n = grid.n();
    let u = field.values();
    let horizontal = |i: usize, j: usize| 2 * (j * n + i);
    let vertical = |i: usize, j: usize| 2 * (j * n + i) + 1;

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [
                u[j * n + i],
                u[j * n + i + 1],
                u[(j + 1) * n + i + 1],
                u[(j + 1) * n + i],
            ];
            let s = c.map(positive);
            // bottom, right, top, left
            let edges = [
                horizontal(i, j),
                vertical(i + 1, j),
                horizontal(i, j + 1),
                vertical(i, j),
            ];
            let cut = [s[0] != s[1], s[1] != s[2], s[2] != s[3], s[3] != s[0]];
            let count = cut.iter().filter(|&&b| b).count();
            match count {
                0 => {}
                2 => {
                    let mut it = (0..4).filter(|&e| cut[e]);
                    segments.push((edges[it.next().unwrap()], edges[it.next().unwrap()]));
                }
                4 => {
                    let centre = positive(0.25 * (c[0] + c[1] + c[2] + c[3]));
                    if centre == s[0] {
                        // corners 1 and 3 are isolated
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => unreachable!("a cell has an even number of sign changes"),
            }
        }
    }
    if segments.is_empty() {
        return Err(Error::EmptyNodalSet);
    }

    let crossing = |edge: usize| -> Point {
        let k = edge / 2;
        let (i, j) = (k % n, k / n);
        let (a, b, pb) = if edge.is_multiple_of(2) {
            (u[k], u[k + 1], grid.point(i + 1, j))
        } else {
            (u[k], u[k + n], grid.point(i, j + 1))
        };
        let pa = grid.point(i, j);
        let t = a / (a - b);
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    };

    let mut incident: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<Vec<usize>> = Vec::new();
    let walk = |start_edge: usize, first: usize, used: &mut Vec<bool>| {
        let mut chain = vec![start_edge];
        let (mut edge, mut seg) = (start_edge, first);
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            edge = if a == edge { b } else { a };
            chain.push(edge);
            match incident[&edge].iter().find(|&&s| !used[s]) {
                Some(&next) => seg = next,
                None => break,
            }
        }
        chain
    };
    // open chains first, in deterministic edge order
    let mut ends: Vec<usize> = incident
        .iter()
        .filter(|(_, s)| s.len() == 1)
        .map(|(&e, _)| e)
        .collect();
    ends.sort_unstable();
    for e in ends {
        let s = incident[&e][0];
        if !used[s] {
            chains.push(walk(e, s, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            chains.push(walk(segments[s].0, s, &mut used));
        }
    }

    let components = chains.len();
    let longest = chains.into_iter().max_by_key(|c| c.len()).unwrap();
    let mut polyline: Vec<Point> = longest.into_iter().map(crossing).collect();
    let norm = |p: &Point| p[0].hypot(p[1]);
    if norm(polyline.last().unwrap()) < norm(&polyline[0]) {
        polyline.reverse();
    }
    Ok(NodalCurve {
        polyline,
        components,
    })
}

/// Cone `x / alpha - c <= y <= alpha x + c` containing the far part of a nodal curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFit {
    pub alpha: f64,
    pub c: f64,
    /// Least-squares slope of the far part.
    pub slope: f64,
}

/// Fits the asymptotic slope of the points beyond `min_radius` and returns the
/// tightest cone with `alpha` ten percent beyond that slope.
pub fn cone_confinement(curve: &NodalCurve, min_radius: f64) -> Result<ConeFit> {
    let far: Vec<Point> = curve
        .polyline
        .iter()
        .copied()
        .filter(|p| p[0].hypot(p[1]) >= min_radius)
        .collect();
    if far.len() < 2 {
        return Err(Error::Domain(format!(
            "fewer than two nodal points beyond radius {min_radius}"
        )));
    }
    let m = far.len() as f64;
    let (mx, my) = far
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p[0] / m, b + p[1] / m));
    let (sxx, sxy, syy) = far.iter().fold((0.0, 0.0, 0.0), |(a, b, c), p| {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        (a + dx * dx, b + dx * dy, c + dy * dy)
    });
    // principal direction handles steep curves as well as flat ones
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let slope = angle.tan();
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::Domain(format!(
            "nodal curve leaves the open quadrant (slope {slope})"
        )));
    }
    let alpha = 1.1 * slope.max(1.0 / slope);
    let c = far
        .iter()
        .map(|p| (p[1] - alpha * p[0]).max(p[0] / alpha - p[1]))
        .fold(f64::MIN_POSITIVE, f64::max);
    Ok(ConeFit { alpha, c, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::QuadrantGrid;

    #[test]
    fn linear_field_gives_diagonal() {
        let g = QuadrantGrid::new(10.0, 0.25).unwrap();
        let f = Field::from_fn(g, |x, y| y - x + 0.01);
        let curve = nodal_curve(&f).unwrap();
        assert!(curve.is_single());
        assert!(curve.max_distance_to_line(std::f64::consts::FRAC_PI_4) <= g.spacing());
        let first = curve.polyline[0];
        assert!(first[0].hypot(first[1]) < 0.1);
        let radii: Vec<f64> = curve.polyline.iter().map(|p| p[0].hypot(p[1])).collect();
        assert!(radii.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn no_sign_change() {
        let g = QuadrantGrid::new(2.0, 0.5).unwrap();
        assert!(matches!(
            nodal_curve(&Field::constant(g, 1.0)),
            Err(Error::EmptyNodalSet)
        ));
    }

    #[test]
    fn two_components_are_flagged() {
        let g = QuadrantGrid::new(10.0, 0.25).unwrap();
        let f = Field::from_fn(g, |x, y| (y - 2.0) * (y - 6.0) + 0.0 * x);
        let curve = nodal_curve(&f).unwrap();
        assert_eq!(curve.components, 2);
        assert!(!curve.is_single());
    }

    #[test]
    fn saddle_cell_uses_centre_value() {
        let g = QuadrantGrid::new(1.0, 1.0).unwrap();
        // corners (0,0) and (1,1) positive, centre positive
        let f = Field::from_values(g, vec![1.0, -0.5, -0.5, 1.0]).unwrap();
        let curve = nodal_curve(&f).unwrap();
        assert_eq!(curve.components, 2);
        for p in &curve.polyline {
            // each piece isolates a negative corner
            assert!(
                (p[0] - 1.0).abs() < 1e-12
                    || (p[1] - 1.0).abs() < 1e-12
                    || p[0] < 1e-12
                    || p[1] < 1e-12
            );
        }
    }

    #[test]
    fn cone_contains_far_points() {
        let g = QuadrantGrid::new(20.0, 0.25).unwrap();
        let f = Field::from_fn(g, |x, y| y - 1.7 * x - 0.5);
        let curve = nodal_curve(&f).unwrap();
        let cone = cone_confinement(&curve, 5.0).unwrap();
        assert!((cone.slope - 1.7).abs() < 1e-6);
        assert!(cone.alpha > 1.0 && cone.c > 0.0);
        for p in curve.polyline.iter().filter(|p| p[0].hypot(p[1]) >= 5.0) {
            assert!(p[0] / cone.alpha - cone.c <= p[1] && p[1] <= cone.alpha * p[0] + cone.c);
        }
    }
}
