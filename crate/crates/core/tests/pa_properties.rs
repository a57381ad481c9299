use std::ops::ControlFlow;

use plhomeo::num::{q, Mat2, Rational};
use plhomeo::pa2d::{linear_part_at, prescribed_derivative_homeo, PaMap, Point};
use plhomeo::words::Generators;
use proptest::prelude::*;

fn det_positive_matrix() -> impl Strategy<Value = Mat2> {
    (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2)
        .prop_filter("positive determinant", |(a, b, c, d)| a * d - b * c > 0)
        .prop_map(|(a, b, c, d)| Mat2::from_ints(a, b, c, d))
}

fn centre() -> impl Strategy<Value = Point> {
    (2i64..=6, 2i64..=6).prop_map(|(x, y)| (q(x, 8), q(y, 8)))
}

/// A prescribed-derivative map around a grid point, radius at most 1/8.
fn pa_map() -> impl Strategy<Value = PaMap> {
    // strongly rotating matrices admit no 8-triangle annulus and are skipped
    (det_positive_matrix(), centre(), 1i64..=3).prop_filter_map("annulus exists", |(m, p, k)| {
        prescribed_derivative_homeo(&m, &p, &q(k, 32)).ok()
    })
}

fn unit_point() -> impl Strategy<Value = Point> {
    (0i64..=60, 0i64..=60).prop_map(|(x, y)| (q(x, 60), q(y, 60)))
}

#[test]
fn half_turn_has_no_eight_triangle_annulus() {
    let p = (q(1, 2), q(1, 2));
    assert!(prescribed_derivative_homeo(&Mat2::from_ints(-1, 0, 0, -1), &p, &q(1, 4)).is_err());
    assert!(prescribed_derivative_homeo(&Mat2::from_ints(0, -1, 1, 0), &p, &q(1, 4)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inverse_round_trips(f in pa_map(), pts in prop::collection::vec(unit_point(), 20)) {
        let inv = f.inverse();
        for p in &pts {
            prop_assert_eq!(&inv.eval(&f.eval(p).unwrap()).unwrap(), p);
        }
        prop_assert_eq!(inv.inverse(), f.clone());
        prop_assert!(f.compose(&inv).is_identity());
    }

    #[test]
    fn composition_is_pointwise(f in pa_map(), g in pa_map(), pts in prop::collection::vec(unit_point(), 20)) {
        let fg = f.compose(&g);
        for p in &pts {
            prop_assert_eq!(fg.eval(p).unwrap(), f.eval(&g.eval(p).unwrap()).unwrap());
        }
        prop_assert_eq!(fg.total_area2(), Rational::from(2));
        prop_assert!(fg.revalidate().is_ok());
    }

    #[test]
    fn associativity(f in pa_map(), g in pa_map(), h in pa_map()) {
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        prop_assert_eq!(PaMap::identity().compose(&f), f.clone());
    }

    #[test]
    fn json_round_trip(f in pa_map()) {
        let j = serde_json::to_string(&f).unwrap();
        let back: PaMap = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), j);
    }

    #[test]
    fn chain_rule_at_common_fixed_point(a in det_positive_matrix(), b in det_positive_matrix(), p in centre()) {
        let r = q(1, 16);
        let (Ok(f), Ok(g)) = (prescribed_derivative_homeo(&a, &p, &r), prescribed_derivative_homeo(&b, &p, &r)) else {
            return Ok(());
        };
        let mats = Generators::new(&a, &b);
        let mut checked = 0;
        Generators::new(&f, &g).for_each_evaluated_depth_first(3, |w, m| {
            checked += 1;
            if linear_part_at(m, &p).ok().as_ref() != Some(&mats.evaluate(w)) {
                return ControlFlow::Break(w.to_string());
            }
            ControlFlow::Continue(())
        }).map_or(Ok(()), |w| Err(TestCaseError::fail(format!("chain rule fails for {w}"))))?;
        prop_assert_eq!(checked, 52);
    }
}
