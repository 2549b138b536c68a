//! Noether flux of the Allen-Cahn energy and the balancing integrals.
//!
//! For a Killing field `X` the vector field
//! `Xi = (|grad u|^2 / 2 + F(u)) X - X(u) grad u` is divergence free on
//! solutions. Integrating over the half-planes bounded by the axes relates
//! the axis integrals to the end data: `A = c0 cos t`, `B = c0 sin t` and
//! `c0 r = M_y - M_x`.

use std::f64::consts::FRAC_PI_4;

use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::potential::{Model, Potential};

/// Consistency defect above which an extraction is flagged as unreliable.
pub const DEFECT_WARNING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KillingField {
    TranslationX,
    TranslationY,
    Rotation,
}

impl KillingField {
    pub const ALL: [KillingField; 3] = [
        KillingField::TranslationX,
        KillingField::TranslationY,
        KillingField::Rotation,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            KillingField::TranslationX => "translation-x",
            KillingField::TranslationY => "translation-y",
            KillingField::Rotation => "rotation",
        }
    }

    pub fn eval(&self, x: Point) -> Point {
        match self {
            KillingField::TranslationX => [1.0, 0.0],
            KillingField::TranslationY => [0.0, 1.0],
            KillingField::Rotation => [-x[1], x[0]],
        }
    }
}

pub fn flux_density(
    u: f64,
    gradient: Point,
    potential: &Potential,
    field: KillingField,
    x: Point,
) -> Point {
    let xv = field.eval(x);
    let energy = 0.5 * (gradient[0] * gradient[0] + gradient[1] * gradient[1]) + potential.f(u);
    let xu = xv[0] * gradient[0] + xv[1] * gradient[1];
    [
        energy * xv[0] - xu * gradient[0],
        energy * xv[1] - xu * gradient[1],
    ]
}

fn derivative(values: impl Fn(usize) -> f64, k: usize, n: usize, h: f64) -> f64 {
    if k == 0 {
        // even reflection
        0.0
    } else if k + 1 == n {
        (3.0 * values(k) - 4.0 * values(k - 1) + values(k - 2)) / (2.0 * h)
    } else {
        (values(k + 1) - values(k - 1)) / (2.0 * h)
    }
}

/// Centered-difference gradient; zero normal derivative on the axes and
/// second-order one-sided differences on the outer edges.
pub fn gradient(field: &Field, i: usize, j: usize) -> Point {
    let g = field.grid();
    let (n, h) = (g.n(), g.spacing());
    [
        derivative(|k| field.at(k, j), i, n, h),
        derivative(|k| field.at(i, k), j, n, h),
    ]
}

/// Closed or open polyline through grid vertices joined by axis-parallel segments.
///
/// Fluxes use the normal `(t_y, -t_x)` to the direction of travel, which is
/// outward for counterclockwise closed contours.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    vertices: Vec<(usize, usize)>,
    closed: bool,
}

impl Contour {
    pub fn path(vertices: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(vertices, false)
    }

    pub fn closed(vertices: Vec<(usize, usize)>) -> Result<Self> {
        Self::build(vertices, true)
    }

    /// Counterclockwise boundary of the index rectangle `[i0, i1] x [j0, j1]`.
    pub fn rectangle(i0: usize, j0: usize, i1: usize, j1: usize) -> Result<Self> {
        if i0 >= i1 || j0 >= j1 {
            return Err(Error::Domain("degenerate rectangle".into()));
        }
        Self::closed(vec![(i0, j0), (i1, j0), (i1, j1), (i0, j1)])
    }

    fn build(vertices: Vec<(usize, usize)>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Domain(
                "a contour needs at least two vertices".into(),
            ));
        }
        let c = Contour { vertices, closed };
        for (p, q) in c.segments() {
            if (p.0 != q.0) == (p.1 != q.1) {
                return Err(Error::Domain(format!(
                    "segment {p:?} -> {q:?} is not axis-parallel"
                )));
            }
        }
        Ok(c)
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn reversed(&self) -> Contour {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Contour {
            vertices,
            closed: self.closed,
        }
    }

    fn segments(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out: Vec<_> = self.vertices.windows(2).map(|w| (w[0], w[1])).collect();
        if self.closed {
            out.push((*self.vertices.last().unwrap(), self.vertices[0]));
        }
        out
    }
}

/// Trapezoid line integral of `Xi . nu` along a contour.
pub fn contour_flux(
    field: &Field,
    potential: &Potential,
    contour: &Contour,
    x_field: KillingField,
) -> Result<f64> {
    let g = field.grid();
    let n = g.n();
    if contour
        .vertices
        .iter()
        .any(|&(i, j)| i + 1 >= n || j + 1 >= n)
    {
        return Err(Error::Domain(
            "contour reaches the outer edge of the grid".into(),
        ));
    }
    let h = g.spacing();
    let xi = |i: usize, j: usize| {
        flux_density(
            field.at(i, j),
            gradient(field, i, j),
            potential,
            x_field,
            g.point(i, j),
        )
    };
    let mut total = 0.0;
    for (p, q) in contour.segments() {
        // integrate in the canonical increasing direction, then orient
        let (integral, forward) = if p.1 == q.1 {
            let (a, b) = (p.0.min(q.0), p.0.max(q.0));
            let s: f64 = (a..=b)
                .map(|i| {
                    let w = if i == a || i == b { 0.5 } else { 1.0 };
                    -w * xi(i, p.1)[1]
                })
                .sum();
            (s * h, q.0 > p.0)
        } else {
            let (a, b) = (p.1.min(q.1), p.1.max(q.1));
            let s: f64 = (a..=b)
                .map(|j| {
                    let w = if j == a || j == b { 0.5 } else { 1.0 };
                    w * xi(p.0, j)[0]
                })
                .sum();
            (s * h, q.1 > p.1)
        };
        total += if forward { integral } else { -integral };
    }
    Ok(total)
}

/// Energy-density integrals along the two half-axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisIntegrals {
    /// `int_{x=0, y>0} (u_y^2 / 2 + F) dy`.
    pub a: f64,
    /// `int_{y=0, x>0} (u_x^2 / 2 + F) dx`.
    pub b: f64,
    /// `int_{x=0, y>0} (u_y^2 / 2 + F) y dy`.
    pub moment_y: f64,
    /// `int_{y=0, x>0} (u_x^2 / 2 + F) x dx`.
    pub moment_x: f64,
    /// Bound on the neglected parts beyond the grid.
    pub tail: f64,
}

pub fn axis_integrals(field: &Field, potential: &Potential) -> AxisIntegrals {
    let g = field.grid();
    let (n, h) = (g.n(), g.spacing());
    let mut out = AxisIntegrals {
        a: 0.0,
        b: 0.0,
        moment_y: 0.0,
        moment_x: 0.0,
        tail: 0.0,
    };
    let rate = potential.well_rate();
    let length = g.coord(n - 1);
    for k in 0..n {
        let w = g.axis_weight(k) * h;
        let t = g.coord(k);
        let uy = gradient(field, 0, k)[1];
        let ux = gradient(field, k, 0)[0];
        let ey = 0.5 * uy * uy + potential.f(field.at(0, k));
        let ex = 0.5 * ux * ux + potential.f(field.at(k, 0));
        out.a += w * ey;
        out.b += w * ex;
        out.moment_y += w * ey * t;
        out.moment_x += w * ex * t;
        if k + 1 == n {
            // the densities decay at least like e^{-rate t} past the last sample
            let e = ey.max(ex);
            out.tail = e * (length / rate + 1.0 / (rate * rate));
        }
    }
    out
}

/// End data read off the balancing integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    /// Extracted angle of the first-quadrant end.
    pub theta: f64,
    pub r: f64,
    /// `|sqrt(A^2 + B^2) / c0 - 1|`.
    pub defect: f64,
    pub tail: f64,
}

impl Classification {
    /// `(theta - pi/4, r)`.
    pub fn pair(&self) -> (f64, f64) {
        (self.theta - FRAC_PI_4, self.r)
    }

    pub fn is_unreliable(&self) -> bool {
        self.defect > DEFECT_WARNING
    }
}

pub fn classify(field: &Field, model: &Model) -> Classification {
    let ax = axis_integrals(field, &model.potential);
    Classification {
        theta: ax.b.atan2(ax.a),
        r: (ax.moment_y - ax.moment_x) / model.c0,
        defect: (ax.a.hypot(ax.b) / model.c0 - 1.0).abs(),
        tail: ax.tail,
    }
}

/// `atan2(B, A)`.
pub fn extract_theta(field: &Field, model: &Model) -> f64 {
    classify(field, model).theta
}

/// `(M_y - M_x) / c0`.
pub fn extract_r(field: &Field, model: &Model) -> f64 {
    classify(field, model).r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::QuadrantGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_well_has_no_flux() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(5.0, 0.25).unwrap();
        let u = Field::constant(g, 1.0);
        let c = Contour::rectangle(2, 3, 10, 15).unwrap();
        for x in KillingField::ALL {
            assert_eq!(contour_flux(&u, &model.potential, &c, x).unwrap(), 0.0);
        }
        let cl = classify(&u, &model);
        assert_eq!(cl.r, 0.0);
        assert_eq!(
            flux_density(
                1.0,
                [0.0, 0.0],
                &model.potential,
                KillingField::Rotation,
                [3.0, 4.0]
            ),
            [0.0, 0.0]
        );
    }

    #[test]
    fn front_flux_density() {
        let model = Model::quartic();
        let p = &model.potential;
        let mut total = 0.0;
        let ds = 0.01;
        for k in -2000i32..=2000 {
            let y = k as f64 * ds;
            let (hv, dh) = model.profile.eval_with_derivative(y);
            let xi = flux_density(hv, [0.0, dh], p, KillingField::TranslationX, [0.0, y]);
            assert_eq!(xi[1], 0.0);
            let w = if k.abs() == 2000 { 0.5 } else { 1.0 };
            total += w * xi[0] * ds;
            let yi = flux_density(hv, [0.0, dh], p, KillingField::TranslationY, [0.0, y]);
            assert!(yi[1].abs() < 1e-9);
        }
        assert_abs_diff_eq!(total, model.c0, epsilon = 1e-8);
    }

    #[test]
    fn reversal_negates() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(8.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| {
            model.profile.eval(0.6 * y - 0.8 * x + 1.0) * (1.0 + 0.01 * x * y)
        });
        let c =
            Contour::closed(vec![(3, 4), (40, 4), (40, 30), (12, 30), (12, 60), (3, 60)]).unwrap();
        for x in KillingField::ALL {
            let a = contour_flux(&u, &model.potential, &c, x).unwrap();
            let b = contour_flux(&u, &model.potential, &c.reversed(), x).unwrap();
            assert!((a + b).abs() <= 1e-13 * a.abs().max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn flux_is_additive() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(8.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| (0.3 * x - 0.2 * y).sin());
        let whole = Contour::rectangle(5, 5, 50, 40).unwrap();
        let left = Contour::rectangle(5, 5, 20, 40).unwrap();
        let right = Contour::rectangle(20, 5, 50, 40).unwrap();
        for x in KillingField::ALL {
            let w = contour_flux(&u, &model.potential, &whole, x).unwrap();
            let s = contour_flux(&u, &model.potential, &left, x).unwrap()
                + contour_flux(&u, &model.potential, &right, x).unwrap();
            assert!((w - s).abs() < 1e-12 * w.abs().max(1.0));
        }
    }

    #[test]
    fn exact_front_is_nearly_conserved() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(12.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| model.profile.eval(0.6 * y - 0.8 * x + 2.0));
        let c = Contour::rectangle(10, 10, 100, 90).unwrap();
        for x in KillingField::ALL {
            let f = contour_flux(&u, &model.potential, &c, x).unwrap();
            assert!(f.abs() <= 10.0 * 0.01, "{x:?}: {f}");
        }
        assert!(matches!(
            contour_flux(
                &u,
                &model.potential,
                &Contour::rectangle(0, 0, 120, 3).unwrap(),
                KillingField::Rotation
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn conjugation_swaps_axis_integrals() {
        let model = Model::quartic();
        let g = QuadrantGrid::new(10.0, 0.1).unwrap();
        let u = Field::from_fn(g, |x, y| model.profile.eval(0.5 * y - 0.9 * x + 0.7).tanh());
        let (a, b) = (classify(&u, &model), classify(&u.conjugate(), &model));
        assert_abs_diff_eq!(
            a.theta + b.theta,
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-14
        );
        assert_eq!(a.r, -b.r);
    }
}
