//! Breaking a relation at a point by inserting small bumps.
//!
//! Given a reduced word `w = t_k … t_1` with `w(f, g)(y) = y`, the orbit
//! `y_i = t_i … t_1(y)` has a first repeat `y_m`. A bump `h` supported near
//! `y_{m−1}` and away from the other orbit points replaces `t_m` by `t_m ∘ h`,
//! which makes `y_0, …, y_m` distinct without disturbing the earlier points.
//! Repeating this at most `k` times gives `w(f', g')(y) ≠ y`.

use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fibered2d::{vertical_bump_in, FiberedMap};
use crate::intervals::Interval;
use crate::num::Rational;
use crate::pl1d::{bump_pl, PlMap};
use crate::words::{Acts, Generator, Generators, GroupElement, Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerturbError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible neighbourhood: {0}")]
    Degenerate(String),
    #[error("relation still holds after {0} steps")]
    StepLimit(usize),
    #[error("replay check failed: {0}")]
    Replay(String),
}

/// Spaces on which local bumps can be placed.
pub trait Perturbable: GroupElement + Acts<Self::Point> + Serialize + DeserializeOwned + Debug {
    type Point: Clone + PartialEq + Debug + Serialize + DeserializeOwned;
    type Region: Clone + PartialEq + Debug + Serialize + DeserializeOwned;

    /// Distance used to size neighbourhoods (sup norm in the plane).
    fn distance(a: &Self::Point, b: &Self::Point) -> Rational;

    /// The open neighbourhood of `y` of radius `r`, clipped to the space.
    /// `None` when `y` lies where no bump can move it.
    fn neighbourhood(y: &Self::Point, r: &Rational) -> Option<Self::Region>;

    fn region_contains(u: &Self::Region, z: &Self::Point) -> bool;

    /// A bump moving `y` and equal to the identity outside `u`.
    fn standard_bump(u: &Self::Region, y: &Self::Point) -> Result<Self, String>;

    /// Exact check that `self` is the identity outside `u`.
    fn is_identity_outside(&self, u: &Self::Region) -> bool;
}

impl Perturbable for PlMap {
    type Point = Rational;
    type Region = Interval;

    fn distance(a: &Rational, b: &Rational) -> Rational {
        (a - b).abs()
    }

    fn neighbourhood(y: &Rational, r: &Rational) -> Option<Interval> {
        let (z, one) = (Rational::zero(), Rational::one());
        if !(y > &z && y < &one) {
            return None;
        }
        Some(Interval::new((y - r).max_of(&z).clone(), (y + r).min_of(&one).clone()))
    }

    fn region_contains(u: &Interval, z: &Rational) -> bool {
        u.interior_contains(z)
    }

    fn standard_bump(u: &Interval, y: &Rational) -> Result<PlMap, String> {
        let t = (&u.hi - y).half();
        bump_pl(&u.lo, &u.hi, y, &t).map_err(|e| e.to_string())
    }

    fn is_identity_outside(&self, u: &Interval) -> bool {
        self.support().components().iter().all(|c| u.contains_interval(c))
    }
}

/// An open box `(x.lo, x.hi) × (t.lo, t.hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Box2 {
    pub x: Interval,
    pub t: Interval,
}

impl Perturbable for FiberedMap {
    type Point = (Rational, Rational);
    type Region = Box2;

    fn distance(a: &Self::Point, b: &Self::Point) -> Rational {
        (&a.0 - &b.0).abs().max_of(&(&a.1 - &b.1).abs()).clone()
    }

    fn neighbourhood(y: &Self::Point, r: &Rational) -> Option<Box2> {
        Some(Box2 { x: PlMap::neighbourhood(&y.0, r)?, t: PlMap::neighbourhood(&y.1, r)? })
    }

    fn region_contains(u: &Box2, z: &Self::Point) -> bool {
        u.x.interior_contains(&z.0) && u.t.interior_contains(&z.1)
    }

    fn standard_bump(u: &Box2, y: &Self::Point) -> Result<FiberedMap, String> {
        let t = (&u.t.hi - &y.1).half();
        vertical_bump_in(&u.x.lo, &u.x.hi, &u.t.lo, &u.t.hi, y, &t).map_err(|e| e.to_string())
    }

    fn is_identity_outside(&self, u: &Box2) -> bool {
        FiberedMap::is_identity_outside(self, &u.x.lo, &u.x.hi, &u.t.lo, &u.t.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "P: Serialize + DeserializeOwned")]
pub struct OrbitTrace<P> {
    pub base: P,
    /// `y_0, …, y_k`.
    pub points: Vec<P>,
    /// Least `m` with `y_0, …, y_m` not all distinct.
    pub first_repeat: Option<usize>,
}

pub fn orbit_trace<G: Perturbable>(f: &G, g: &G, w: &Word, y: &G::Point) -> Result<OrbitTrace<G::Point>, PerturbError> {
    check_word(w)?;
    let gens = Generators::new(f, g);
    Ok(trace_with(&gens, w, y))
}

fn check_word(w: &Word) -> Result<(), PerturbError> {
    if w.is_empty() || !Word::is_reduced(w.letters()) {
        return Err(PerturbError::Precondition(format!("word {w} must be reduced and nonempty")));
    }
    Ok(())
}

fn trace_with<G: Perturbable>(gens: &Generators<G>, w: &Word, y: &G::Point) -> OrbitTrace<G::Point> {
    let mut points = vec![y.clone()];
    let mut first_repeat = None;
    for l in w.application_order() {
        let next = gens.letter(l).act(points.last().expect("nonempty"));
        if first_repeat.is_none() && points.contains(&next) {
            first_repeat = Some(points.len());
        }
        points.push(next);
    }
    OrbitTrace { base: y.clone(), points, first_repeat }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "G: Perturbable")]
pub struct PerturbationStep<G: Perturbable> {
    /// The index `m` of the first repeat; letter `t_m` is modified.
    pub modified_letter_index: usize,
    pub letter: Letter,
    pub bump_support: G::Region,
    pub bump: G,
    pub f: G,
    pub g: G,
}

/// Replaces the generator behind `letter` so that the letter's new value is
/// `t ∘ h`.
fn apply_bump<G: Perturbable>(f: &G, g: &G, letter: Letter, h: &G) -> (G, G) {
    let update = |x: &G| if letter.inverse { h.inverse().compose(x) } else { x.compose(h) };
    match letter.generator {
        Generator::A => (update(f), g.clone()),
        Generator::B => (f.clone(), update(g)),
    }
}

/// Checks the avoidance conditions for `u` around `y_{m−1}`.
fn region_admissible<G: Perturbable>(
    u: &G::Region,
    trace: &OrbitTrace<G::Point>,
    m: usize,
    t_m_inverse: &G,
) -> Result<(), String> {
    let pts = &trace.points;
    if let Some(z) = pts[..m - 1].iter().find(|z| G::region_contains(u, z)) {
        return Err(format!("neighbourhood contains the earlier orbit point {z:?}"));
    }
    for z in pts[..m].iter().filter(|z| *z != &pts[m]) {
        if G::region_contains(u, &t_m_inverse.act(z)) {
            return Err(format!("image of the neighbourhood under t_{m} contains {z:?}"));
        }
    }
    Ok(())
}

/// One step of the construction at the first repeat of the orbit of `y`.
pub fn perturb_once<G, P>(f: &G, g: &G, w: &Word, y: &G::Point, provider: P) -> Result<PerturbationStep<G>, PerturbError>
where
    G: Perturbable,
    P: Fn(&G::Region, &G::Point) -> Result<G, String>,
{
    let trace = orbit_trace(f, g, w, y)?;
    let m = trace
        .first_repeat
        .ok_or_else(|| PerturbError::Precondition("the orbit has no repeated point".into()))?;
    let letter = w.application_order().nth(m - 1).expect("m <= |w|");
    let gens = Generators::new(f, g);
    let t_m_inverse = gens.letter(letter.inv()).clone();
    let centre = &trace.points[m - 1];

    // largest radius keeping the earlier points out, then halve for t_m(U)
    let mut r = trace.points[..m - 1]
        .iter()
        .map(|z| G::distance(z, centre))
        .min()
        .unwrap_or_else(Rational::one);
    let mut region = None;
    for _ in 0..256 {
        let u = G::neighbourhood(centre, &r)
            .ok_or_else(|| PerturbError::Degenerate(format!("{centre:?} lies where no bump can move it")))?;
        if region_admissible::<G>(&u, &trace, m, &t_m_inverse).is_ok() {
            region = Some(u);
            break;
        }
        r = r.half();
    }
    let u = region.ok_or_else(|| PerturbError::Degenerate(format!("no radius around {centre:?} avoids the orbit")))?;
    let h = provider(&u, centre).map_err(PerturbError::Degenerate)?;
    let (nf, ng) = apply_bump(f, g, letter, &h);
    let step = PerturbationStep { modified_letter_index: m, letter, bump_support: u, bump: h, f: nf, g: ng };
    check_step(f, g, w, y, &trace, &step).map_err(PerturbError::Degenerate)?;
    Ok(step)
}

/// Post-conditions of a step, shared with replay.
fn check_step<G: Perturbable>(
    f: &G,
    g: &G,
    w: &Word,
    y: &G::Point,
    trace: &OrbitTrace<G::Point>,
    step: &PerturbationStep<G>,
) -> Result<(), String> {
    let m = step.modified_letter_index;
    if trace.first_repeat != Some(m) {
        return Err(format!("step claims first repeat {m}, orbit has {:?}", trace.first_repeat));
    }
    if w.application_order().nth(m - 1) != Some(step.letter) {
        return Err(format!("letter t_{m} is not {}", step.letter.to_char()));
    }
    let h = &step.bump;
    if !h.is_identity_outside(&step.bump_support) {
        return Err("bump moves points outside its logged support".into());
    }
    let centre = &trace.points[m - 1];
    if &h.act(centre) == centre {
        return Err(format!("bump fixes {centre:?}"));
    }
    let t_m_inverse = Generators::new(f, g).letter(step.letter.inv()).clone();
    region_admissible::<G>(&step.bump_support, trace, m, &t_m_inverse)?;
    let (nf, ng) = apply_bump(f, g, step.letter, h);
    if !nf.group_eq(&step.f) || !ng.group_eq(&step.g) {
        return Err("logged pair differs from the recomputed update".into());
    }
    let after = trace_with(&Generators::new(&nf, &ng), w, y);
    if after.points[..m] != trace.points[..m] {
        return Err("the orbit changed before the modified letter".into());
    }
    let prefix = &after.points[..=m];
    if (0..prefix.len()).any(|i| prefix[i + 1..].contains(&prefix[i])) {
        return Err(format!("points y_0..y_{m} are not distinct after the step"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "G: Perturbable")]
pub struct PerturbationRun<G: Perturbable> {
    pub word: Word,
    pub point: G::Point,
    pub f: G,
    pub g: G,
    pub steps: Vec<PerturbationStep<G>>,
}

impl<G: Perturbable> PerturbationRun<G> {
    pub fn final_pair(&self) -> (&G, &G) {
        match self.steps.last() {
            Some(s) => (&s.f, &s.g),
            None => (&self.f, &self.g),
        }
    }

    pub fn final_trace(&self) -> OrbitTrace<G::Point> {
        let (f, g) = self.final_pair();
        trace_with(&Generators::new(f, g), &self.word, &self.point)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("runs serialize")
    }

    /// Re-checks the starting relation, every step and the final outcome.
    pub fn replay(&self) -> Result<Vec<String>, PerturbError> {
        check_word(&self.word)?;
        let fail = PerturbError::Replay;
        let gens = Generators::new(&self.f, &self.g);
        if gens.evaluate_at(&self.word, &self.point) != self.point {
            return Err(fail(format!("{} does not fix the base point initially", self.word)));
        }
        let mut log = vec![format!("{} fixes {:?} for the initial pair", self.word, self.point)];
        let (mut f, mut g) = (self.f.clone(), self.g.clone());
        for (j, step) in self.steps.iter().enumerate() {
            let trace = trace_with(&Generators::new(&f, &g), &self.word, &self.point);
            check_step(&f, &g, &self.word, &self.point, &trace, step).map_err(|e| fail(format!("step {}: {e}", j + 1)))?;
            log.push(format!(
                "step {}: bump on {:?} at letter t_{} verified; orbit points y_0..y_{} distinct",
                j + 1,
                step.bump_support,
                step.modified_letter_index,
                step.modified_letter_index
            ));
            f = step.f.clone();
            g = step.g.clone();
        }
        let end = Generators::new(&f, &g).evaluate_at(&self.word, &self.point);
        if end == self.point {
            return Err(fail(format!("{} still fixes the base point", self.word)));
        }
        log.push(format!("{} moves {:?} to {:?}", self.word, self.point, end));
        Ok(log)
    }
}

/// Iterates [`perturb_once`] until `w(f', g')(y) ≠ y`.
pub fn break_relation_at_point<G, P>(
    f: &G,
    g: &G,
    w: &Word,
    y: &G::Point,
    max_steps: usize,
    provider: P,
) -> Result<PerturbationRun<G>, PerturbError>
where
    G: Perturbable,
    P: Fn(&G::Region, &G::Point) -> Result<G, String>,
{
    check_word(w)?;
    if &Generators::new(f, g).evaluate_at(w, y) != y {
        return Err(PerturbError::Precondition(format!("{w} does not fix {y:?}")));
    }
    let mut run = PerturbationRun { word: w.clone(), point: y.clone(), f: f.clone(), g: g.clone(), steps: Vec::new() };
    loop {
        let (cf, cg) = run.final_pair();
        if &Generators::new(cf, cg).evaluate_at(w, y) != y {
            return Ok(run);
        }
        if run.steps.len() == max_steps {
            return Err(PerturbError::StepLimit(max_steps));
        }
        let step = perturb_once(cf, cg, w, y, &provider)?;
        run.steps.push(step);
    }
}

/// [`break_relation_at_point`] with the standard bumps of the space.
pub fn break_relation<G: Perturbable>(
    f: &G,
    g: &G,
    w: &Word,
    y: &G::Point,
    max_steps: usize,
) -> Result<PerturbationRun<G>, PerturbError> {
    break_relation_at_point(f, g, w, y, max_steps, G::standard_bump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn single_letter_trace() {
        let f = bump_pl(&q(1, 4), &q(3, 4), &q(1, 2), &q(1, 8)).unwrap();
        let t = orbit_trace(&f, &f, &word("a"), &q(1, 2)).unwrap();
        assert_eq!(t.points, vec![q(1, 2), q(5, 8)]);
        assert_eq!(t.first_repeat, None);
    }

    #[test]
    fn unreduced_word_rejected() {
        let id = PlMap::identity();
        let w = Word::from_reduced(vec![Letter::A, Letter::A_INV]);
        assert!(w.is_none());
        assert!(orbit_trace(&id, &id, &Word::empty(), &q(1, 2)).is_err());
    }

    #[test]
    fn commutator_orbit_returns() {
        let f = bump_pl(&q(1, 4), &q(3, 4), &q(1, 2), &q(1, 8)).unwrap();
        let g = f.compose(&f);
        let t = orbit_trace(&f, &g, &word("abAB"), &q(1, 2)).unwrap();
        assert_eq!(t.points[4], t.points[0]);
        assert!(t.first_repeat.unwrap() <= 4);
    }

    #[test]
    fn identity_generator_gets_a_bump() {
        let id = PlMap::identity();
        let run = break_relation(&id, &id, &word("a"), &q(1, 3), 4).unwrap();
        assert_eq!(run.steps.len(), 1);
        assert_eq!(run.steps[0].modified_letter_index, 1);
        let (f, _) = run.final_pair();
        assert_ne!(f.eval(&q(1, 3)).unwrap(), q(1, 3));
        assert!(run.replay().is_ok());
    }

    #[test]
    fn commuting_bumps_break_within_word_length() {
        let f = bump_pl(&q(1, 4), &q(3, 4), &q(1, 2), &q(1, 8)).unwrap();
        let g = f.compose(&f);
        let run = break_relation(&f, &g, &word("abAB"), &q(2, 5), 4).unwrap();
        assert!(!run.steps.is_empty() && run.steps.len() <= 4);
        let log = run.replay().unwrap();
        assert!(log.last().unwrap().contains("moves"));
        let back: PerturbationRun<PlMap> = serde_json::from_str(&run.to_json()).unwrap();
        assert_eq!(back, run);
    }

    #[test]
    fn relation_outside_supports() {
        let f = bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(1, 16)).unwrap();
        let g = f.compose(&f);
        let y = q(7, 8);
        let run = break_relation(&f, &g, &word("abAB"), &y, 4).unwrap();
        assert!(run.replay().is_ok());
    }

    #[test]
    fn fibered_commutator() {
        let f = crate::corpus::central_vertical_bump(&q(1, 8));
        let g = f.compose(&f);
        let y = (q(1, 2), q(2, 5));
        let run = break_relation(&f, &g, &word("abAB"), &y, 4).unwrap();
        assert!(run.replay().is_ok());
        for s in &run.steps {
            assert!(Perturbable::is_identity_outside(&s.bump, &s.bump_support));
        }
    }

    #[test]
    fn boundary_point_is_degenerate() {
        let id = PlMap::identity();
        assert!(matches!(break_relation(&id, &id, &word("a"), &q(0, 1), 4), Err(PerturbError::Degenerate(_))));
    }
}
