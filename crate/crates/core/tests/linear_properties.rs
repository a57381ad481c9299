use std::ops::ControlFlow;

use plhomeo::certificate::Claim;
use plhomeo::linearcert::{matrix_relation_search, pingpong_check, PingPongData};
use plhomeo::num::Mat2;
use plhomeo::words::{Generators, Word};
use proptest::prelude::*;

fn sanov() -> (Mat2, Mat2) {
    (Mat2::from_ints(1, 2, 0, 1), Mat2::from_ints(1, 0, 2, 1))
}

#[test]
fn sanov_words_are_never_scalar() {
    let (a, b) = sanov();
    let mut count = 0usize;
    let bad = Generators::new(&a, &b).for_each_evaluated(10, |w, m| {
        count += 1;
        if m.is_scalar() {
            ControlFlow::Break(w.clone())
        } else {
            ControlFlow::Continue(())
        }
    });
    assert_eq!(bad, None);
    assert_eq!(count, 2 * (3usize.pow(10) - 1));
}

#[test]
fn sanov_is_free_not_related() {
    let (a, b) = sanov();
    let free = pingpong_check(&a, &b, &PingPongData::sanov()).unwrap();
    assert_eq!(free.claim().kind(), "FreeCert");
    let search = matrix_relation_search(&a, &b, 8, true, 2);
    assert!(search.claim().is_inconclusive());
}

fn small_matrix() -> impl Strategy<Value = Mat2> {
    (-2i64..=2, -2i64..=2, -2i64..=2, -2i64..=2)
        .prop_filter("invertible", |(a, b, c, d)| a * d - b * c != 0)
        .prop_map(|(a, b, c, d)| Mat2::from_ints(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn relation_search_is_sound_and_deterministic(a in small_matrix(), b in small_matrix()) {
        let one = matrix_relation_search(&a, &b, 5, true, 1);
        let many = matrix_relation_search(&a, &b, 5, true, 4);
        prop_assert_eq!(&one, &many);
        if let Claim::Relation { word } = one.claim() {
            let w: &Word = word;
            let m = Generators::new(&a, &b).evaluate(w);
            prop_assert!(m.is_scalar());
            prop_assert!(one.verify().is_ok());
        }
    }

    #[test]
    fn no_pair_is_both_free_and_related(a in small_matrix(), b in small_matrix()) {
        let free = pingpong_check(&a, &b, &PingPongData::sanov()).is_ok();
        let related = !matrix_relation_search(&a, &b, 6, true, 2).claim().is_inconclusive();
        prop_assert!(!(free && related));
    }
}
