//! Oriented ends, doubly symmetric end configurations and the glued ansatz.
//!
//! An [`End`] is the oriented line `r e_perp + R e` with `e = (cos t, sin t)`.
//! [`symmetric_ends`] produces the four ends of a solution even in both axes,
//! and [`Ansatz`] glues copies of the heteroclinic along them with a partition
//! of unity subordinate to the overlapping decomposition of the plane into a
//! core disc and four sectors around the half-lines.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::discretization::{Field, QuadrantGrid};
use crate::error::{Error, Result};
use crate::potential::HeteroclinicProfile;

pub type Point = [f64; 2];

/// Minimum distance between distinct half-lines outside the gluing disc.
pub const MIN_SEPARATION: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct End {
    pub r: f64,
    pub theta: f64,
}

impl End {
    pub fn new(r: f64, theta: f64) -> Self {
        End { r, theta }
    }

    pub fn e(&self) -> Point {
        [self.theta.cos(), self.theta.sin()]
    }

    /// `e` rotated by `+pi/2`.
    pub fn e_perp(&self) -> Point {
        [-self.theta.sin(), self.theta.cos()]
    }
}

/// `x . e_perp - r`.
pub fn signed_distance(x: Point, end: &End) -> f64 {
    let n = end.e_perp();
    x[0] * n[0] + x[1] * n[1] - end.r
}

/// Quintic smoothstep clamped to `[0, 1]`; C2 with `step(1 - t) = 1 - step(t)`.
pub(crate) fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct HalfLine {
    start: Point,
    dir: Point,
}

impl HalfLine {
    fn distance(&self, x: Point) -> f64 {
        let d = [x[0] - self.start[0], x[1] - self.start[1]];
        let t = d[0] * self.dir[0] + d[1] * self.dir[1];
        if t <= 0.0 {
            d[0].hypot(d[1])
        } else {
            (d[0] * self.dir[1] - d[1] * self.dir[0]).abs()
        }
    }

    fn intersects(&self, other: &HalfLine) -> bool {
        let (a, b) = (self.dir, other.dir);
        let det = a[0] * (-b[1]) - a[1] * (-b[0]);
        if det.abs() < 1e-14 {
            return false;
        }
        let d = [
            other.start[0] - self.start[0],
            other.start[1] - self.start[1],
        ];
        let t = (d[0] * (-b[1]) - d[1] * (-b[0])) / det;
        let u = (a[0] * d[1] - a[1] * d[0]) / det;
        t >= 0.0 && u >= 0.0
    }

    /// Distance between two rays; attained at a start point unless they cross.
    fn ray_distance(&self, other: &HalfLine) -> f64 {
        if self.intersects(other) {
            0.0
        } else {
            self.distance(other.start).min(other.distance(self.start))
        }
    }
}

/// Four ordered ends plus the radius of the gluing disc.
#[derive(Debug, Clone, PartialEq)]
pub struct EndConfiguration {
    ends: [End; 4],
    radius: f64,
}

impl EndConfiguration {
    /// Validates ordering and half-line separation.
    pub fn new(ends: [End; 4], radius: f64) -> Result<Self> {
        let t = ends.map(|e| e.theta);
        if !(t[0] < t[1] && t[1] < t[2] && t[2] < t[3] && t[3] < 2.0 * PI + t[0]) {
            return Err(Error::Domain(format!("ends are not ordered: angles {t:?}")));
        }
        let cfg = EndConfiguration { ends, radius };
        let sep = cfg.separation()?;
        if sep < MIN_SEPARATION {
            return Err(Error::Domain(format!(
                "half-lines only {sep:.3} apart outside B_{radius}"
            )));
        }
        Ok(cfg)
    }

    pub fn ends(&self) -> &[End; 4] {
        &self.ends
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn half_lines(&self) -> Result<[HalfLine; 4]> {
        let mut out = [HalfLine {
            start: [0.0; 2],
            dir: [0.0; 2],
        }; 4];
        for (h, end) in out.iter_mut().zip(&self.ends) {
            if end.r.abs() >= self.radius {
                return Err(Error::Domain(format!(
                    "offset {} does not meet the circle of radius {}",
                    end.r, self.radius
                )));
            }
            let s = (self.radius * self.radius - end.r * end.r).sqrt();
            let (e, n) = (end.e(), end.e_perp());
            *h = HalfLine {
                start: [end.r * n[0] + s * e[0], end.r * n[1] + s * e[1]],
                dir: e,
            };
        }
        Ok(out)
    }

    /// Smallest distance between two distinct half-lines.
    pub fn separation(&self) -> Result<f64> {
        let hl = self.half_lines()?;
        let mut best = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                best = best.min(hl[i].ray_distance(&hl[j]));
            }
        }
        Ok(best)
    }
}

/// Default gluing radius `max(10, 3/tan t, 3 tan t, 4|r|)`.
pub fn default_radius(theta: f64, r: f64) -> f64 {
    let t = theta.tan();
    10f64.max(3.0 / t).max(3.0 * t).max(4.0 * r.abs())
}

/// Ends at angles `t, pi - t, pi + t, 2pi - t` with offsets `r, -r, r, -r`.
///
/// With these offsets the four lines are the images of the first one under the
/// two axis reflections. `radius` is increased in unit steps until the
/// half-lines are separated by at least [`MIN_SEPARATION`].
pub fn symmetric_ends(theta: f64, r: f64, radius: f64) -> Result<EndConfiguration> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, pi/2)")));
    }
    if !r.is_finite() || !radius.is_finite() {
        return Err(Error::Domain("non-finite end data".into()));
    }
    let ends = [
        End::new(r, theta),
        End::new(-r, PI - theta),
        End::new(r, PI + theta),
        End::new(-r, 2.0 * PI - theta),
    ];
    let mut radius = radius.max(r.abs() + 1.0);
    for _ in 0..10_000 {
        let cfg = EndConfiguration { ends, radius };
        if cfg.separation()? >= MIN_SEPARATION {
            return Ok(cfg);
        }
        radius += 1.0;
    }
    Err(Error::Domain(format!(
        "could not separate ends for theta = {theta}"
    )))
}

/// The glued approximate solution for a symmetric configuration.
///
/// `u = I_0 core + sum_j sign * (-1)^j I_j H(dist_j)`, where the partition
/// weights `I_j` are smoothsteps of the distance gaps between half-lines and
/// `I_0` is a smoothstep of `|x| - R`. With `sign = -1` the ansatz tends to +1
/// along the y-axis. The core term blends the four quadrant fronts through
/// axis-aligned smoothsteps of unit width; it coincides with the quadrant's own
/// front away from the axes.
#[derive(Debug, Clone)]
pub struct Ansatz {
    config: EndConfiguration,
    half_lines: [HalfLine; 4],
    sign: f64,
}

impl Ansatz {
    pub fn new(config: EndConfiguration) -> Result<Self> {
        let half_lines = config.half_lines()?;
        Ok(Ansatz {
            config,
            half_lines,
            sign: -1.0,
        })
    }

    /// Ansatz for `symmetric_ends(theta, r, default_radius(theta, r))`.
    pub fn symmetric(theta: f64, r: f64) -> Result<Self> {
        Self::new(symmetric_ends(theta, r, default_radius(theta, r))?)
    }

    pub fn config(&self) -> &EndConfiguration {
        &self.config
    }

    /// Global sign applied to the alternating pattern `(-1)^j`.
    pub fn sign(&self) -> f64 {
        self.sign
    }

    fn end_sign(&self, j: usize) -> f64 {
        // j is 1-based in the alternating pattern
        let alt = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        self.sign * alt
    }

    /// Partition weights `[I_0, I_1, .., I_4]`.
    pub fn weights(&self, x: Point) -> [f64; 5] {
        let radius = self.config.radius;
        let core = 1.0 - smoothstep((x[0].hypot(x[1]) - (radius - 1.0)) / 2.0);
        let dist = self.half_lines.map(|h| h.distance(x));
        let mut psi = [0.0; 4];
        for j in 0..4 {
            let nearest_other = (0..4)
                .filter(|&i| i != j)
                .map(|i| dist[i])
                .fold(f64::INFINITY, f64::min);
            psi[j] = 1.0 - smoothstep((dist[j] - nearest_other + 2.0) / 4.0);
        }
        let total: f64 = psi.iter().sum();
        let outer = 1.0 - core;
        [
            core,
            outer * psi[0] / total,
            outer * psi[1] / total,
            outer * psi[2] / total,
            outer * psi[3] / total,
        ]
    }

    fn front(&self, profile: &HeteroclinicProfile, j: usize, x: Point) -> f64 {
        self.end_sign(j + 1) * profile.eval(signed_distance(x, &self.config.ends[j]))
    }

    fn core(&self, profile: &HeteroclinicProfile, x: Point) -> f64 {
        let ax = smoothstep((x[0] + 1.0) / 2.0);
        let ay = smoothstep((x[1] + 1.0) / 2.0);
        let w = [
            ax * ay,
            (1.0 - ax) * ay,
            (1.0 - ax) * (1.0 - ay),
            ax * (1.0 - ay),
        ];
        (0..4)
            .filter(|&q| w[q] > 0.0)
            .map(|q| w[q] * self.front(profile, q, x))
            .sum()
    }

    /// `u_lambda(x)`.
    pub fn eval(&self, profile: &HeteroclinicProfile, x: Point) -> f64 {
        let w = self.weights(x);
        let mut acc = 0.0;
        if w[0] > 0.0 {
            acc += w[0] * self.core(profile, x);
        }
        for j in 0..4 {
            if w[j + 1] > 0.0 {
                acc += w[j + 1] * self.front(profile, j, x);
            }
        }
        acc
    }

    /// Ansatz sampled on every grid point.
    pub fn sample(&self, profile: &HeteroclinicProfile, grid: &QuadrantGrid) -> Field {
        Field::from_fn(*grid, |x, y| self.eval(profile, [x, y]))
    }
}

pub fn ansatz_eval(a: &Ansatz, profile: &HeteroclinicProfile, x: Point) -> f64 {
    a.eval(profile, x)
}

pub fn partition_weight(a: &Ansatz, j: usize, x: Point) -> f64 {
    a.weights(x)[j]
}

/// `v = u - u_lambda` with the norms used to judge its size.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub remainder: Field,
    pub l2: f64,
    pub sup: f64,
    /// `sup |v| e^{rate max(|x| - R, 0)}`.
    pub weighted_sup: f64,
}

pub const DECOMPOSITION_WEIGHT_RATE: f64 = 0.5;

pub fn decompose(field: &Field, a: &Ansatz, profile: &HeteroclinicProfile) -> Decomposition {
    let grid = *field.grid();
    let ansatz = a.sample(profile, &grid);
    let remainder = field.sub(&ansatz);
    let radius = a.config.radius;
    let mut weighted_sup: f64 = 0.0;
    for (k, v) in remainder.values().iter().enumerate() {
        let [x, y] = grid.point_of(k);
        let excess = (x.hypot(y) - radius).max(0.0);
        weighted_sup = weighted_sup.max(v.abs() * (DECOMPOSITION_WEIGHT_RATE * excess).exp());
    }
    Decomposition {
        l2: remainder.l2_norm(),
        sup: remainder.sup_norm(),
        remainder,
        weighted_sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Model;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn signed_distance_examples() {
        assert_eq!(signed_distance([5.0, 2.0], &End::new(0.0, 0.0)), 2.0);
        assert_abs_diff_eq!(
            signed_distance([0.0, 7.0], &End::new(1.0, FRAC_PI_2)),
            -1.0,
            epsilon = 1e-15
        );
        let end = End::new(0.7, 0.4);
        let (e, n) = (end.e(), end.e_perp());
        for t in [-3.0, 0.0, 11.0] {
            let x = [0.7 * n[0] + t * e[0], 0.7 * n[1] + t * e[1]];
            assert_abs_diff_eq!(signed_distance(x, &end), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(e[0] * n[0] + e[1] * n[1], 0.0, epsilon = 1e-16);
    }

    #[test]
    fn saddle_configuration() {
        let cfg = symmetric_ends(FRAC_PI_4, 0.0, 10.0).unwrap();
        let angles: Vec<f64> = cfg.ends().iter().map(|e| e.theta).collect();
        for (a, b) in angles.iter().zip([1.0, 3.0, 5.0, 7.0]) {
            assert_abs_diff_eq!(*a, b * FRAC_PI_4, epsilon = 1e-15);
        }
        assert!(cfg.ends().iter().all(|e| e.r.abs() == 0.0));
        assert!(cfg.separation().unwrap() >= MIN_SEPARATION);
    }

    #[test]
    fn first_end_carries_parameters() {
        let cfg = symmetric_ends(PI / 3.0, 0.5, 12.0).unwrap();
        let end = cfg.ends()[0];
        assert_abs_diff_eq!(end.e()[0], (PI / 3.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(end.e()[1], (PI / 3.0).sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(signed_distance([0.0, 0.0], &end), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn radius_grows_until_separated() {
        let cfg = symmetric_ends(0.2, 0.0, 5.0).unwrap();
        assert!(cfg.radius() > 5.0);
        assert!(cfg.separation().unwrap() >= MIN_SEPARATION);
        assert!(matches!(
            symmetric_ends(1.7, 0.0, 10.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            symmetric_ends(0.0, 0.0, 10.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn unordered_configuration_rejected() {
        let ends = [
            End::new(0.0, 1.0),
            End::new(0.0, 0.5),
            End::new(0.0, 4.0),
            End::new(0.0, 5.0),
        ];
        assert!(matches!(
            EndConfiguration::new(ends, 10.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn saddle_ansatz_saturates_on_axis() {
        let model = Model::quartic();
        let a = Ansatz::symmetric(FRAC_PI_4, 0.0).unwrap();
        assert!(a.eval(&model.profile, [0.0, 10.0]) >= 1.0 - 1e-3);
        assert!(a.eval(&model.profile, [10.0, 0.0]) <= -1.0 + 1e-3);
        assert_eq!(a.weights([1.0, 2.0]), [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn deep_in_sector_is_single_front() {
        let model = Model::quartic();
        let a = Ansatz::symmetric(1.0, 0.3).unwrap();
        let end = a.config().ends()[1];
        // far out along the second end, slightly off the line
        let (e, n) = (end.e(), end.e_perp());
        let x = [
            end.r * n[0] + 40.0 * e[0] + 1.5 * n[0],
            end.r * n[1] + 40.0 * e[1] + 1.5 * n[1],
        ];
        let w = a.weights(x);
        assert_eq!(w[2], 1.0);
        assert_abs_diff_eq!(
            a.eval(&model.profile, x),
            -model.profile.eval(1.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn ansatz_on_axis_is_stretched_front() {
        let model = Model::quartic();
        let (theta, r) = (1.1, -0.4);
        let a = Ansatz::symmetric(theta, r).unwrap();
        let mut last = -2.0;
        for k in 0..400 {
            let y = 0.1 * k as f64;
            let v = a.eval(&model.profile, [0.0, y]);
            if y >= 1.0 {
                assert_abs_diff_eq!(v, model.profile.eval(y * theta.cos() - r), epsilon = 1e-12);
            }
            assert!(v >= last);
            last = v;
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity(theta in 0.2f64..1.37, r in -2.0f64..2.0, x in -40.0f64..40.0, y in -40.0f64..40.0) {
            let a = Ansatz::symmetric(theta, r).unwrap();
            let w = a.weights([x, y]);
            prop_assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let rho = x.hypot(y);
            let radius = a.config().radius();
            if rho <= radius - 1.0 {
                prop_assert_eq!(w[0], 1.0);
            }
            if rho >= radius + 1.0 {
                prop_assert_eq!(w[0], 0.0);
            }
            // supports stay inside the overlapping sectors
            let hl = a.config().half_lines().unwrap();
            for j in 0..4 {
                let dj = hl[j].distance([x, y]);
                let others = (0..4).filter(|&i| i != j).map(|i| hl[i].distance([x, y])).fold(f64::INFINITY, f64::min);
                if w[j + 1] > 0.0 {
                    prop_assert!(dj < others + 2.0 && rho > radius - 1.0);
                }
                if dj < others - 2.0 && rho >= radius + 1.0 {
                    prop_assert_eq!(w[j + 1], 1.0);
                }
            }
        }

        #[test]
        fn ansatz_is_even_and_bounded(theta in 0.2f64..1.37, r in -2.0f64..2.0, x in 0.0f64..40.0, y in 0.0f64..40.0) {
            let model = Model::quartic();
            let a = Ansatz::symmetric(theta, r).unwrap();
            let v = a.eval(&model.profile, [x, y]);
            prop_assert!(v.abs() <= 1.0);
            prop_assert!((v - a.eval(&model.profile, [-x, y])).abs() < 1e-12);
            prop_assert!((v - a.eval(&model.profile, [x, -y])).abs() < 1e-12);
        }
    }
}
