//! Abelian-or-Z^k classification of pairs acting on an interval.
//!
//! The search engine here is generic over [`LineMap`], so any group acting
//! on a compact interval by increasing maps with computable supports can
//! reuse it. PL(I) is the main instance.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, Claim, Subject};
use crate::intervals::{Interval, IntervalSet};
use crate::num::Rational;
use crate::pl1d::PlMap;
use crate::words::{for_each_orbit_point, Acts, GroupElement, Generators, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

/// An increasing homeomorphism of an interval with a computable cover of
/// its support by closed rational intervals.
pub trait LineMap: GroupElement + Acts<Rational> {
    /// Closed intervals whose union contains the support. Exact for PL maps;
    /// an outer rounding when support endpoints are irrational.
    fn support_cover(&self) -> IntervalSet;
}

impl LineMap for PlMap {
    fn support_cover(&self) -> IntervalSet {
        self.support()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAnalysis {
    pub common_fixed: IntervalSet,
    /// Components of the complement, read as open intervals.
    pub components: Vec<Interval>,
}

pub fn analyze_pair(f: &PlMap, g: &PlMap) -> PairAnalysis {
    let common_fixed = f.support_fix().fixed.intersection(&g.support_fix().fixed);
    let components = common_fixed.complement_in_unit();
    PairAnalysis { common_fixed, components }
}

/// A radius `r > 0` with `[f, g]` the identity on `[x - r, x + r] ∩ [0, 1]`.
pub fn germ_trivial_radius(f: &PlMap, g: &PlMap, x: &Rational) -> Result<Rational, StructureError> {
    if x.is_negative() || x > &Rational::one() {
        return Err(StructureError::Precondition(format!("{x} is outside [0, 1]")));
    }
    if f.eval_unchecked(x) != *x || g.eval_unchecked(x) != *x {
        return Err(StructureError::Precondition(format!("{x} is not a common fixed point")));
    }
    let c = f.commutator(g);
    let fixed = c.support_fix().fixed;
    let comp = fixed
        .component_of(x)
        .ok_or_else(|| StructureError::InternalInconsistency(format!("commutator moves {x}")))?;
    let left = (!comp.lo.is_zero()).then(|| x - &comp.lo);
    let right = (!comp.hi.is_one()).then(|| &comp.hi - x);
    let r = match (left, right) {
        (Some(l), Some(r)) => l.min_of(&r).clone(),
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (None, None) => x.max_of(&(Rational::one() - x)).clone(),
    };
    if !r.is_positive() {
        return Err(StructureError::InternalInconsistency(format!(
            "commutator is not the identity near {x}"
        )));
    }
    Ok(r)
}

/// First word `h` in enumeration order, of length at most `depth`, with
/// `h(a) > b`. Only the orbit of `a` is evaluated.
pub fn displacement_search<G: LineMap>(
    gens: &Generators<G>,
    a: &Rational,
    b: &Rational,
    depth: usize,
) -> Option<Word> {
    orbit_search(gens, a, depth, |p| p > b)
}

fn orbit_search<G: LineMap>(
    gens: &Generators<G>,
    start: &Rational,
    depth: usize,
    hit: impl Fn(&Rational) -> bool,
) -> Option<Word> {
    for_each_orbit_point(|l, p| gens.letter(l).act(p), start, depth, |w, p| {
        if hit(p) {
            ControlFlow::Break(w.clone())
        } else {
            ControlFlow::Continue(())
        }
    })
}

pub fn find_displacement(
    f: &PlMap,
    g: &PlMap,
    a: &Rational,
    b: &Rational,
    depth: usize,
) -> Result<Option<Word>, StructureError> {
    if a >= b {
        return Err(StructureError::Precondition(format!("need a < b, got a={a}, b={b}")));
    }
    let analysis = analyze_pair(f, g);
    let same = analysis.components.iter().any(|c| c.interior_contains(a) && c.interior_contains(b));
    if !same {
        return Err(StructureError::Precondition(format!(
            "{a} and {b} are not in one component of the complement of the common fixed set"
        )));
    }
    Ok(displacement_search(&Generators::new(f, g), a, b, depth))
}

/// Outcome of a budgeted witness search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZkSearch {
    Found(Vec<Word>),
    Abelian,
    Exhausted(String),
}

/// How many admissible base words are tried before giving up.
const BASE_CANDIDATES: usize = 24;

/// Searches for `k` conjugates `h_i w h_i⁻¹` of one base word with pairwise
/// interior-disjoint supports. `admissible` decides whether a base word's
/// support hull lies well inside a component of the complement of the
/// common fixed set.
pub fn zk_search<G: LineMap>(
    gens: &Generators<G>,
    k: usize,
    depth: usize,
    admissible: impl Fn(&Interval) -> bool,
) -> ZkSearch {
    if gens.f().commutator_is_identity(gens.g()) {
        return ZkSearch::Abelian;
    }
    let mut tried = 0usize;
    let found = gens.for_each_evaluated(depth, |w, e| {
        if e.is_identity() {
            return ControlFlow::Continue(());
        }
        let Some(hull) = e.support_cover().hull() else {
            return ControlFlow::Continue(());
        };
        if hull.is_degenerate() || !admissible(&hull) {
            return ControlFlow::Continue(());
        }
        tried += 1;
        if let Some(ws) = conjugate_chain(gens, w, &hull, k, depth) {
            if verify_zk_words(gens, &ws).is_ok() {
                return ControlFlow::Break(ws);
            }
        }
        if tried >= BASE_CANDIDATES {
            ControlFlow::Break(Vec::new())
        } else {
            ControlFlow::Continue(())
        }
    });
    match found {
        Some(ws) if !ws.is_empty() => ZkSearch::Found(ws),
        _ if tried == 0 => ZkSearch::Exhausted(format!(
            "no nontrivial word of length <= {depth} has support inside one component"
        )),
        _ => ZkSearch::Exhausted(format!(
            "no displacement chain of length {k} found within depth {depth} ({tried} base words tried)"
        )),
    }
}

/// Places copies of `hull` one at a time beyond the copies so far, on
/// whichever side needs the earlier word.
fn conjugate_chain<G: LineMap>(
    gens: &Generators<G>,
    base: &Word,
    hull: &Interval,
    k: usize,
    depth: usize,
) -> Option<Vec<Word>> {
    let mut words = vec![base.clone()];
    let (mut lo, mut hi) = (hull.lo.clone(), hull.hi.clone());
    while words.len() < k {
        let right = orbit_search(gens, &hull.lo, depth, |p| p > &hi);
        let left = orbit_search(gens, &hull.hi, depth, |p| p < &lo);
        let go_right = match (&right, &left) {
            (Some(r), Some(l)) => r.enumeration_key() <= l.enumeration_key(),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return None,
        };
        let h = if go_right {
            let h = right?;
            hi = gens.evaluate_at(&h, &hull.hi);
            h
        } else {
            let h = left?;
            lo = gens.evaluate_at(&h, &hull.lo);
            h
        };
        words.push(Word::conjugate(&h, base));
    }
    Some(words)
}

/// Exact re-check of a witness list; returns the log of checks performed.
pub fn verify_zk_words<G: LineMap>(gens: &Generators<G>, words: &[Word]) -> Result<Vec<String>, String> {
    if words.len() < 2 {
        return Err(format!("need at least 2 witnesses, got {}", words.len()));
    }
    let mut log = Vec::new();
    let elems: Vec<G> = words.iter().map(|w| gens.evaluate(w)).collect();
    let mut covers = Vec::with_capacity(elems.len());
    for (w, e) in words.iter().zip(&elems) {
        if e.is_identity() {
            return Err(format!("witness {w} evaluates to the identity"));
        }
        let cover = e.support_cover();
        log.push(format!("witness {w} is nontrivial with support within {cover:?}"));
        covers.push(cover);
    }
    for i in 0..elems.len() {
        for j in i + 1..elems.len() {
            if !elems[i].commutator_is_identity(&elems[j]) {
                return Err(format!("witnesses {} and {} do not commute", words[i], words[j]));
            }
            if covers[i].interiors_overlap(&covers[j]) {
                return Err(format!("supports of {} and {} overlap", words[i], words[j]));
            }
            log.push(format!("[{}, {}] = id and supports are interior-disjoint", words[i], words[j]));
        }
    }
    Ok(log)
}

fn pl_admissible(analysis: &PairAnalysis) -> impl Fn(&Interval) -> bool + '_ {
    move |hull| analysis.components.iter().any(|c| c.lo < hull.lo && hull.hi < c.hi)
}

pub fn zk_witnesses(f: &PlMap, g: &PlMap, k: usize, depth: usize) -> Result<Certificate, StructureError> {
    if k < 2 {
        return Err(StructureError::Precondition(format!("k must be at least 2, got {k}")));
    }
    let subject = Subject::PlPair { f: f.clone(), g: g.clone() };
    let analysis = analyze_pair(f, g);
    let gens = Generators::new(f, g);
    let claim = match zk_search(&gens, k, depth, pl_admissible(&analysis)) {
        ZkSearch::Found(words) => Claim::ZkWitness { words },
        ZkSearch::Abelian => Claim::Inconclusive {
            reason: "the generators commute, so no nonabelian base word exists".into(),
            abelian_hint: true,
        },
        ZkSearch::Exhausted(reason) => Claim::Inconclusive { reason, abelian_hint: false },
    };
    Ok(Certificate::issue(subject, claim).expect("search results are verified before issue"))
}

/// Abelian if `[f, g] = id`, else three Z^k witnesses, else Inconclusive.
pub fn classify_pair(f: &PlMap, g: &PlMap, depth: usize) -> Certificate {
    if f.commutator(g).is_identity() {
        let subject = Subject::PlPair { f: f.clone(), g: g.clone() };
        return Certificate::issue(subject, Claim::Abelian).expect("commutator checked");
    }
    zk_witnesses(f, g, 3, depth).expect("k = 3 is valid")
}

/// Convenience on any group element.
pub trait CommutatorExt: GroupElement {
    fn commutator_is_identity(&self, other: &Self) -> bool {
        self.compose(other).group_eq(&other.compose(self))
    }
}

impl<G: GroupElement> CommutatorExt for G {}
