//! Closed intervals with rational endpoints and finite unions of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::num::Rational;

/// A closed interval `[lo, hi]`, possibly a single point.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(Rational, Rational)", into = "(Rational, Rational)")]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl From<(Rational, Rational)> for Interval {
    fn from((lo, hi): (Rational, Rational)) -> Self {
        Interval::new(lo, hi)
    }
}

impl From<Interval> for (Rational, Rational) {
    fn from(i: Interval) -> Self {
        (i.lo, i.hi)
    }
}

impl Interval {
    /// Endpoints are reordered if given backwards.
    pub fn new(lo: Rational, hi: Rational) -> Self {
        if lo <= hi {
            Interval { lo, hi }
        } else {
            Interval { lo: hi, hi: lo }
        }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn unit() -> Self {
        Interval { lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Open-interior membership `lo < x < hi`.
    pub fn interior_contains(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max_of(&other.lo).clone();
        let hi = self.hi.min_of(&other.hi).clone();
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// True when the intersection has positive length.
    pub fn interiors_overlap(&self, other: &Interval) -> bool {
        self.lo.max_of(&other.lo) < self.hi.min_of(&other.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of closed intervals, kept sorted with gaps between
/// consecutive components.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct IntervalSet {
    components: Vec<Interval>,
}

impl From<Vec<Interval>> for IntervalSet {
    fn from(v: Vec<Interval>) -> Self {
        IntervalSet::from_intervals(v)
    }
}

impl From<IntervalSet> for Vec<Interval> {
    fn from(s: IntervalSet) -> Self {
        s.components
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { components: Vec::new() }
    }

    pub fn from_intervals(mut v: Vec<Interval>) -> Self {
        v.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            match out.last_mut() {
                Some(last) if i.lo <= last.hi => {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                    }
                }
                _ => out.push(i),
            }
        }
        IntervalSet { components: out }
    }

    pub fn components(&self) -> &[Interval] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    /// The component containing `x`, if any.
    pub fn component_of(&self, x: &Rational) -> Option<&Interval> {
        self.components.iter().find(|c| c.contains(x))
    }

    pub fn hull(&self) -> Option<Interval> {
        let first = self.components.first()?;
        let last = self.components.last()?;
        Some(Interval { lo: first.lo.clone(), hi: last.hi.clone() })
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = self.components.clone();
        v.extend(other.components.iter().cloned());
        IntervalSet::from_intervals(v)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.components.len() && j < other.components.len() {
            let a = &self.components[i];
            let b = &other.components[j];
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_intervals(out)
    }

    /// True when some pair of components overlaps in positive length.
    pub fn interiors_overlap(&self, other: &IntervalSet) -> bool {
        self.components
            .iter()
            .any(|a| other.components.iter().any(|b| a.interiors_overlap(b)))
    }

    /// Connected components of `[0, 1] \ self`, as open intervals `(lo, hi)`.
    pub fn complement_in_unit(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cursor = Rational::zero();
        for c in &self.components {
            if c.lo > cursor {
                out.push(Interval { lo: cursor.clone(), hi: c.lo.clone() });
            }
            cursor = c.hi.clone();
        }
        if cursor < Rational::one() {
            out.push(Interval { lo: cursor, hi: Rational::one() });
        }
        out
    }

    /// Image under a strictly increasing map.
    pub fn image_under(&self, f: impl Fn(&Rational) -> Rational) -> IntervalSet {
        IntervalSet::from_intervals(
            self.components.iter().map(|c| Interval { lo: f(&c.lo), hi: f(&c.hi) }).collect(),
        )
    }
}

impl fmt::Debug for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.components.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;

    fn iv(a: Rational, b: Rational) -> Interval {
        Interval::new(a, b)
    }

    #[test]
    fn normalization_merges_touching() {
        let s = IntervalSet::from_intervals(vec![
            iv(q(1, 2), q(3, 4)),
            iv(q(0, 1), q(1, 4)),
            iv(q(1, 4), q(1, 3)),
        ]);
        assert_eq!(s.components(), &[iv(q(0, 1), q(1, 3)), iv(q(1, 2), q(3, 4))]);
    }

    #[test]
    fn intersection_and_overlap() {
        let a = IntervalSet::from_intervals(vec![iv(q(0, 1), q(1, 2)), iv(q(3, 4), q(1, 1))]);
        let b = IntervalSet::from_intervals(vec![iv(q(1, 2), q(4, 5))]);
        assert_eq!(
            a.intersection(&b).components(),
            &[Interval::point(q(1, 2)), iv(q(3, 4), q(4, 5))]
        );
        assert!(a.interiors_overlap(&b));
        let c = IntervalSet::from_intervals(vec![iv(q(1, 2), q(3, 4))]);
        assert!(!a.interiors_overlap(&c));
    }

    #[test]
    fn complement_components() {
        let fixed = IntervalSet::from_intervals(vec![
            Interval::point(q(0, 1)),
            iv(q(3, 4), q(1, 1)),
        ]);
        assert_eq!(fixed.complement_in_unit(), vec![iv(q(0, 1), q(3, 4))]);
        assert!(IntervalSet::from_intervals(vec![Interval::unit()]).complement_in_unit().is_empty());
    }
}
