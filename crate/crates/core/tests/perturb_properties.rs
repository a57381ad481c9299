use plhomeo::corpus::commuting_bump_pairs;
use plhomeo::perturb::{break_relation, orbit_trace, PerturbationRun, Perturbable};
use plhomeo::pl1d::PlMap;
use plhomeo::words::Word;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn progress_is_monotone_and_local(seed in any::<u64>()) {
        let (f, g, y) = commuting_bump_pairs(seed, 1).pop().unwrap();
        let w: Word = "abAB".parse().unwrap();
        let run = break_relation(&f, &g, &w, &y, 4).unwrap();
        let m0 = orbit_trace(&f, &g, &w, &y).unwrap().first_repeat.unwrap();
        let k = w.len();
        let (mut pf, mut pg) = (f.clone(), g.clone());
        for (j, step) in run.steps.iter().enumerate() {
            prop_assert!(Perturbable::is_identity_outside(&step.bump, &step.bump_support));
            let before = orbit_trace(&pf, &pg, &w, &y).unwrap();
            let after = orbit_trace(&step.f, &step.g, &w, &y).unwrap();
            prop_assert_eq!(&after.points[..step.modified_letter_index], &before.points[..step.modified_letter_index]);
            let distinct = (m0 + j + 1).min(k);
            let prefix = &after.points[..=distinct];
            for i in 0..prefix.len() {
                prop_assert!(!prefix[i + 1..].contains(&prefix[i]));
            }
            pf = step.f.clone();
            pg = step.g.clone();
        }
        prop_assert!(run.replay().is_ok());
        let json = run.to_json();
        let back: PerturbationRun<PlMap> = serde_json::from_str(&json).unwrap();
        prop_assert!(back.replay().is_ok());
    }
}

#[test]
fn tampered_log_fails_replay() {
    let (f, g, y) = commuting_bump_pairs(3, 1).pop().unwrap();
    let w: Word = "abAB".parse().unwrap();
    let mut run = break_relation(&f, &g, &w, &y, 4).unwrap();
    run.steps[0].bump = PlMap::identity();
    assert!(run.replay().is_err());
}
