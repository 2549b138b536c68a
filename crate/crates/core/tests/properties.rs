use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use acmoduli::balance::{classify, contour_flux, Contour, KillingField};
use acmoduli::discretization::{linearized_apply, Field, QuadrantGrid};
use acmoduli::geometry::Ansatz;
use acmoduli::io::{read_acf, write_acf, SolutionFile};
use acmoduli::potential::Model;
use proptest::prelude::*;

fn model() -> &'static Model {
    static MODEL: OnceLock<Model> = OnceLock::new();
    MODEL.get_or_init(Model::quartic)
}

fn grid() -> QuadrantGrid {
    QuadrantGrid::new(12.0, 0.2).unwrap()
}

fn ansatz_field(theta: f64, r: f64) -> Field {
    Ansatz::symmetric(theta, r)
        .unwrap()
        .sample(&model().profile, &grid())
}

fn interior(values: Vec<f64>) -> Field {
    let g = QuadrantGrid::new(3.0, 0.25).unwrap();
    let mut f = Field::from_values(g, values).unwrap();
    let n = g.n();
    for j in 0..n {
        for i in 0..n {
            if g.is_outer(i, j) {
                f.values_mut()[g.index(i, j)] = 0.0;
            }
        }
    }
    f
}

fn small_field() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 13 * 13)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linearization_is_self_adjoint(u in small_field(), v in small_field(), w in small_field()) {
        let g = QuadrantGrid::new(3.0, 0.25).unwrap();
        let u = Field::from_values(g, u).unwrap();
        let (v, w) = (interior(v), interior(w));
        let p = &model().potential;
        let lhs = v.dot(&linearized_apply(&u, p, &w));
        let rhs = linearized_apply(&u, p, &v).dot(&w);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn conjugation_negates_the_classification(theta in 0.3f64..1.27, r in -1.0f64..1.0) {
        let f = ansatz_field(theta, r);
        let (a, b) = classify(&f, model()).pair();
        let (ca, cb) = classify(&f.conjugate(), model()).pair();
        prop_assert!((ca + a).abs() < 1e-12 && (cb + b).abs() < 1e-12);
    }

    #[test]
    fn fluxes_add_over_adjacent_rectangles(
        theta in 0.4f64..(FRAC_PI_2 - 0.4),
        i0 in 0usize..10, split in 12usize..30, i1 in 32usize..59, j0 in 0usize..20, j1 in 30usize..59,
    ) {
        let f = ansatz_field(theta, 0.0);
        let p = &model().potential;
        for x in KillingField::ALL {
            let left = contour_flux(&f, p, &Contour::rectangle(i0, j0, split, j1).unwrap(), x).unwrap();
            let right = contour_flux(&f, p, &Contour::rectangle(split, j0, i1, j1).unwrap(), x).unwrap();
            let whole = contour_flux(&f, p, &Contour::rectangle(i0, j0, i1, j1).unwrap(), x).unwrap();
            prop_assert!((left + right - whole).abs() <= 1e-10 * whole.abs().max(1.0));
        }
    }

    #[test]
    fn solution_files_round_trip_bitwise(values in prop::collection::vec(-1.0f64..1.0, 9 * 9), theta in 0.1f64..1.4, r in -3.0f64..3.0) {
        let g = QuadrantGrid::new(2.0, 0.25).unwrap();
        let file = SolutionFile {
            potential: "quartic".into(),
            theta,
            r,
            residual: 1e-12,
            classify: (theta - 0.5, -r),
            field: Field::from_values(g, values).unwrap(),
        };
        let mut buf = Vec::new();
        write_acf(&mut buf, &file).unwrap();
        let back = read_acf(buf.as_slice()).unwrap();
        prop_assert_eq!(back, file);
    }

    #[test]
    fn potential_derivatives_agree(u in -1.5f64..1.5) {
        let p = &model().potential;
        let e = 1e-5;
        let fd = (p.f(u + e) - p.f(u - e)) / (2.0 * e);
        prop_assert!((fd - p.df(u)).abs() < 1e-8);
        let fd2 = (p.df(u + e) - p.df(u - e)) / (2.0 * e);
        prop_assert!((fd2 - p.ddf(u)).abs() < 1e-8);
    }
}
