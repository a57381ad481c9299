use plhomeo::certificate::{Certificate, Claim};
use plhomeo::corpus::h_pairs;
use plhomeo::linearcert::{mobius_arc_image, ProjArc, ProjPoint};
use plhomeo::num::{q, Mat2};
use plhomeo::projcircle::{classify_h_pair, fixed_points_proj, mobius_surd, random_proj, ProjCircleMap, SurdPoint};
use proptest::prelude::*;

fn proj_map() -> impl Strategy<Value = ProjCircleMap> {
    any::<u64>().prop_map(random_proj)
}

fn proj_point() -> impl Strategy<Value = ProjPoint> {
    prop_oneof![
        1 => Just(ProjPoint::Infinity),
        20 => (-60i64..=60, 1i64..=12).prop_map(|(n, d)| ProjPoint::Finite(q(n, d))),
    ]
}

fn positive_matrix() -> impl Strategy<Value = Mat2> {
    (-3i64..=3, -3i64..=3, -3i64..=3, -3i64..=3)
        .prop_filter("det > 0", |(a, b, c, d)| a * d - b * c > 0)
        .prop_map(|(a, b, c, d)| Mat2::from_ints(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_pointwise(f in proj_map(), g in proj_map(), zs in prop::collection::vec(proj_point(), 100)) {
        let fg = f.compose(&g);
        for z in &zs {
            prop_assert_eq!(fg.eval(z), f.eval(&g.eval(z)));
        }
    }

    #[test]
    fn group_laws(f in proj_map(), g in proj_map(), h in proj_map()) {
        prop_assert!(f.compose(&f.inverse()).is_identity());
        prop_assert_eq!(f.inverse().inverse(), f.clone());
        prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
        prop_assert_eq!(ProjCircleMap::identity().compose(&f), f.clone());
    }

    #[test]
    fn json_round_trip(f in proj_map()) {
        let j = serde_json::to_string(&f).unwrap();
        let back: ProjCircleMap = serde_json::from_str(&j).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn fixed_points_are_fixed(f in proj_map()) {
        let rec = fixed_points_proj(&f);
        prop_assert!(rec.verify());
        for piece in &rec.pieces {
            for x in &piece.points {
                prop_assert_eq!(&mobius_surd(&piece.matrix, x), x);
                if let SurdPoint::Finite(s) = x {
                    if let Some(r) = s.as_rational() {
                        let z = ProjPoint::Finite(r.clone());
                        prop_assert_eq!(f.eval(&z), z);
                    }
                }
            }
        }
    }

    #[test]
    fn mobius_arc_images_compose(m in positive_matrix(), n in positive_matrix(), a in proj_point(), b in proj_point()) {
        prop_assume!(a != b);
        let arc = ProjArc::new(a, b).unwrap();
        let direct = mobius_arc_image(&m.mul(&n), &arc);
        let stepwise = mobius_arc_image(&m, &mobius_arc_image(&n, &arc));
        prop_assert_eq!(direct, stepwise);
    }
}

#[test]
fn h_corpus_certificates_verify() {
    let mut kinds = std::collections::BTreeMap::new();
    for (f, g, arc) in h_pairs(11, 20) {
        let cert = classify_h_pair(&f, &g, &arc, 8).unwrap();
        assert!(!matches!(cert.claim(), Claim::Free { .. }));
        assert!(Certificate::replay(&cert.to_json()).is_ok());
        *kinds.entry(cert.claim().kind()).or_insert(0) += 1;
    }
    assert_eq!(kinds.get("AbelianCert"), Some(&4));
    assert!(kinds.get("ZkWitnessCert").copied().unwrap_or(0) >= 12, "{kinds:?}");
}
