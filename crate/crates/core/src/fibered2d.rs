//! Leaf-preserving PL homeomorphisms of the square.
//!
//! A map is cut into vertical slabs `[x_i, x_{i+1}] × I`. Inside a slab the
//! fiber over `x` is a PL map of `I` whose breakpoints `ℓ_j(x)` move affinely
//! in `x` while the slope `s_j` of each cell stays constant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certificate::{Certificate, Claim, Subject};
use crate::num::Rational;
use crate::pl1d::PlMap;
use crate::structure1d::{zk_search, CommutatorExt, ZkSearch};
use crate::words::{Acts, GroupElement, Generators, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FiberedError {
    #[error("ordering violation: {0}")]
    Ordering(String),
    #[error("slab {0} does not fix the top boundary")]
    TopBoundary(usize),
    #[error("slabs disagree on the fiber over x = {0}")]
    Continuity(Rational),
    #[error("point ({0}, {1}) lies outside the unit square")]
    Domain(Rational, Rational),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Slab {
    /// Entry breaklines at the left end of the slab, from 0 up to 1.
    pub entry_lo: Vec<Rational>,
    /// Entry breaklines at the right end of the slab.
    pub entry_hi: Vec<Rational>,
    pub slopes: Vec<Rational>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "FiberedRepr", into = "FiberedRepr")]
pub struct FiberedMap {
    x_breaks: Vec<Rational>,
    slabs: Vec<Slab>,
}

#[derive(Serialize, Deserialize)]
struct FiberedRepr {
    x_breaks: Vec<Rational>,
    slabs: Vec<Slab>,
}

impl TryFrom<FiberedRepr> for FiberedMap {
    type Error = FiberedError;
    fn try_from(r: FiberedRepr) -> Result<Self, FiberedError> {
        FiberedMap::new(r.x_breaks, r.slabs)
    }
}

impl From<FiberedMap> for FiberedRepr {
    fn from(m: FiberedMap) -> Self {
        FiberedRepr { x_breaks: m.x_breaks, slabs: m.slabs }
    }
}

/// Value at `x` of the affine function through `(x0, v0)` and `(x1, v1)`.
fn affine_at(v0: &Rational, v1: &Rational, x0: &Rational, x1: &Rational, x: &Rational) -> Rational {
    if x == x0 {
        return v0.clone();
    }
    if x == x1 {
        return v1.clone();
    }
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

fn image_values(entry: &[Rational], slopes: &[Rational]) -> Vec<Rational> {
    let mut m = Vec::with_capacity(entry.len());
    m.push(Rational::zero());
    for (j, s) in slopes.iter().enumerate() {
        let next = &m[j] + s * (&entry[j + 1] - &entry[j]);
        m.push(next);
    }
    m
}

fn fiber_from(entry: &[Rational], slopes: &[Rational]) -> PlMap {
    let image = image_values(entry, slopes);
    let mut pts: Vec<(Rational, Rational)> = Vec::with_capacity(entry.len());
    for (x, y) in entry.iter().zip(image) {
        if pts.last().map(|p| &p.0) != Some(x) {
            pts.push((x.clone(), y));
        }
    }
    PlMap::new(pts).expect("validated slab yields a PL homeomorphism")
}

impl Slab {
    fn lines(&self) -> usize {
        self.entry_lo.len()
    }

    fn entry_at(&self, x0: &Rational, x1: &Rational, x: &Rational) -> Vec<Rational> {
        self.entry_lo.iter().zip(&self.entry_hi).map(|(a, b)| affine_at(a, b, x0, x1, x)).collect()
    }

    fn image_lo(&self) -> Vec<Rational> {
        image_values(&self.entry_lo, &self.slopes)
    }

    fn image_hi(&self) -> Vec<Rational> {
        image_values(&self.entry_hi, &self.slopes)
    }

    fn identity() -> Slab {
        Slab {
            entry_lo: vec![Rational::zero(), Rational::one()],
            entry_hi: vec![Rational::zero(), Rational::one()],
            slopes: vec![Rational::one()],
        }
    }

    fn is_identity(&self) -> bool {
        self.slopes.len() == 1
    }

    fn validate(&self, idx: usize) -> Result<(), FiberedError> {
        let n = self.lines();
        if n < 2 || self.entry_hi.len() != n || self.slopes.len() + 1 != n {
            return Err(FiberedError::Ordering(format!("slab {idx} has inconsistent line and slope counts")));
        }
        for end in [&self.entry_lo, &self.entry_hi] {
            if !end[0].is_zero() || !end[n - 1].is_one() {
                return Err(FiberedError::Ordering(format!("slab {idx} breaklines must run from 0 to 1")));
            }
        }
        for j in 0..n - 1 {
            let (l0, l1) = (&self.entry_lo[j], &self.entry_lo[j + 1]);
            let (h0, h1) = (&self.entry_hi[j], &self.entry_hi[j + 1]);
            if l0 > l1 || h0 > h1 || (l0 == l1 && h0 == h1) {
                return Err(FiberedError::Ordering(format!(
                    "slab {idx} breaklines {j} and {} are not strictly ordered in the interior",
                    j + 1
                )));
            }
        }
        if self.slopes.iter().any(|s| !s.is_positive()) {
            return Err(FiberedError::Ordering(format!("slab {idx} has a non-positive slope")));
        }
        if !self.image_lo()[n - 1].is_one() || !self.image_hi()[n - 1].is_one() {
            return Err(FiberedError::TopBoundary(idx));
        }
        Ok(())
    }

    /// Drops zero-width cells and breaklines with equal slopes on both sides.
    fn canonicalize(&mut self) {
        let mut lo = vec![self.entry_lo[0].clone()];
        let mut hi = vec![self.entry_hi[0].clone()];
        let mut slopes: Vec<Rational> = Vec::new();
        for j in 0..self.slopes.len() {
            let (nl, nh) = (&self.entry_lo[j + 1], &self.entry_hi[j + 1]);
            if nl == lo.last().unwrap() && nh == hi.last().unwrap() {
                continue;
            }
            let s = &self.slopes[j];
            if slopes.last() == Some(s) {
                *lo.last_mut().unwrap() = nl.clone();
                *hi.last_mut().unwrap() = nh.clone();
            } else {
                lo.push(nl.clone());
                hi.push(nh.clone());
                slopes.push(s.clone());
            }
        }
        self.entry_lo = lo;
        self.entry_hi = hi;
        self.slopes = slopes;
    }
}

/// A relatively open sub-interval of `[0, 1]`: the open interval `(lo, hi)`
/// together with `0` when `lo = 0` and `1` when `hi = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strip {
    pub lo: Rational,
    pub hi: Rational,
}

impl Strip {
    pub fn contains(&self, x: &Rational) -> bool {
        let left = &self.lo < x || (self.lo.is_zero() && x.is_zero());
        let right = x < &self.hi || (self.hi.is_one() && x.is_one());
        left && right
    }

    pub fn is_everything(&self) -> bool {
        self.lo.is_zero() && self.hi.is_one()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripIdentityWitness {
    pub word: Word,
    pub strip: Strip,
}

impl FiberedMap {
    pub fn new(x_breaks: Vec<Rational>, slabs: Vec<Slab>) -> Result<Self, FiberedError> {
        if x_breaks.len() < 2 || !x_breaks[0].is_zero() || !x_breaks[x_breaks.len() - 1].is_one() {
            return Err(FiberedError::Ordering("x_breaks must run from 0 to 1".into()));
        }
        if x_breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FiberedError::Ordering("x_breaks must be strictly increasing".into()));
        }
        if slabs.len() + 1 != x_breaks.len() {
            return Err(FiberedError::Ordering("need exactly one slab between consecutive x_breaks".into()));
        }
        for (i, s) in slabs.iter().enumerate() {
            s.validate(i)?;
        }
        for i in 1..slabs.len() {
            let x = &x_breaks[i];
            let left = fiber_from(&slabs[i - 1].entry_hi, &slabs[i - 1].slopes);
            let right = fiber_from(&slabs[i].entry_lo, &slabs[i].slopes);
            if left != right {
                return Err(FiberedError::Continuity(x.clone()));
            }
        }
        let mut m = FiberedMap { x_breaks, slabs };
        m.canonicalize();
        Ok(m)
    }

    pub fn identity() -> Self {
        FiberedMap { x_breaks: vec![Rational::zero(), Rational::one()], slabs: vec![Slab::identity()] }
    }

    /// `id × h`: the same fiber map over every `x`.
    pub fn product(h: &PlMap) -> Self {
        let entry: Vec<Rational> = h.breakpoints().iter().map(|p| p.0.clone()).collect();
        let slopes = h
            .breakpoints()
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect();
        FiberedMap {
            x_breaks: vec![Rational::zero(), Rational::one()],
            slabs: vec![Slab { entry_lo: entry.clone(), entry_hi: entry, slopes }],
        }
    }

    pub fn x_breaks(&self) -> &[Rational] {
        &self.x_breaks
    }

    pub fn slabs(&self) -> &[Slab] {
        &self.slabs
    }

    pub fn is_identity(&self) -> bool {
        self.slabs.len() == 1 && self.slabs[0].is_identity()
    }

    /// Whether the map is the identity outside the box `[a, b] × [c, d]`.
    /// Cell widths are affine in x, so a slab that is the identity on part
    /// of its x-range is the identity on all of it.
    pub fn is_identity_outside(&self, a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> bool {
        self.slabs.iter().enumerate().all(|(i, slab)| {
            if slab.is_identity() {
                return true;
            }
            let (x0, x1) = (&self.x_breaks[i], &self.x_breaks[i + 1]);
            if x0 < a || x1 > b {
                return false;
            }
            slab.slopes.iter().enumerate().all(|(k, s)| {
                s.is_one()
                    || [&slab.entry_lo, &slab.entry_hi].iter().all(|e| &e[k] >= c && &e[k + 1] <= d)
            })
        })
    }

    fn canonicalize(&mut self) {
        for s in &mut self.slabs {
            s.canonicalize();
        }
        let mut xs = vec![self.x_breaks[0].clone()];
        let mut slabs: Vec<Slab> = Vec::with_capacity(self.slabs.len());
        for (i, s) in self.slabs.iter().enumerate() {
            let x1 = &self.x_breaks[i + 1];
            if let Some(prev) = slabs.last_mut() {
                let x0 = &xs[xs.len() - 2];
                let xm = &xs[xs.len() - 1];
                let extends = prev.slopes == s.slopes
                    && prev.entry_hi == s.entry_lo
                    && prev
                        .entry_lo
                        .iter()
                        .zip(&prev.entry_hi)
                        .zip(&s.entry_hi)
                        .all(|((a, b), c)| affine_at(a, b, x0, xm, x1) == *c);
                if extends {
                    prev.entry_hi = s.entry_hi.clone();
                    *xs.last_mut().unwrap() = x1.clone();
                    continue;
                }
            }
            slabs.push(s.clone());
            xs.push(x1.clone());
        }
        self.x_breaks = xs;
        self.slabs = slabs;
    }

    fn slab_index(&self, x: &Rational) -> usize {
        let i = self.x_breaks.partition_point(|b| b < x);
        i.saturating_sub(1).min(self.slabs.len() - 1)
    }

    fn entry_at(&self, i: usize, x: &Rational) -> Vec<Rational> {
        self.slabs[i].entry_at(&self.x_breaks[i], &self.x_breaks[i + 1], x)
    }

    fn check_point(x: &Rational, t: &Rational) -> Result<(), FiberedError> {
        let unit = |v: &Rational| !v.is_negative() && v <= &Rational::one();
        if unit(x) && unit(t) {
            Ok(())
        } else {
            Err(FiberedError::Domain(x.clone(), t.clone()))
        }
    }

    pub fn eval(&self, x: &Rational, t: &Rational) -> Result<(Rational, Rational), FiberedError> {
        Self::check_point(x, t)?;
        Ok((x.clone(), self.eval_unchecked(x, t)))
    }

    fn eval_unchecked(&self, x: &Rational, t: &Rational) -> Rational {
        let i = self.slab_index(x);
        let entry = self.entry_at(i, x);
        let slopes = &self.slabs[i].slopes;
        let image = image_values(&entry, slopes);
        let j = entry.partition_point(|l| l <= t).saturating_sub(1).min(slopes.len() - 1);
        &image[j] + &slopes[j] * (t - &entry[j])
    }

    pub fn fiber_restriction(&self, x: &Rational) -> Result<PlMap, FiberedError> {
        Self::check_point(x, &Rational::zero())?;
        let i = self.slab_index(x);
        Ok(fiber_from(&self.entry_at(i, x), &self.slabs[i].slopes))
    }

    pub fn inverse(&self) -> FiberedMap {
        let slabs = self
            .slabs
            .iter()
            .map(|s| Slab {
                entry_lo: s.image_lo(),
                entry_hi: s.image_hi(),
                slopes: s.slopes.iter().map(|v| v.recip().expect("slopes are positive")).collect(),
            })
            .collect();
        let mut m = FiberedMap { x_breaks: self.x_breaks.clone(), slabs };
        m.canonicalize();
        m
    }

    /// `(x, t) ↦ self(rhs(x, t))`.
    pub fn compose(&self, rhs: &FiberedMap) -> FiberedMap {
        let mut xs: Vec<Rational> = self.x_breaks.iter().chain(&rhs.x_breaks).cloned().collect();
        xs.sort();
        xs.dedup();
        let mut out_x = vec![Rational::zero()];
        let mut out_slabs = Vec::new();
        for w in xs.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            let mid = u.midpoint(v);
            let (fi, gi) = (self.slab_index(&mid), rhs.slab_index(&mid));
            let f_entry = |x: &Rational| self.entry_at(fi, x);
            let g_image = |x: &Rational| image_values(&rhs.entry_at(gi, x), &rhs.slabs[gi].slopes);
            let (fu, fv, gu, gv) = (f_entry(u), f_entry(v), g_image(u), g_image(v));
            let mut cuts: Vec<Rational> = Vec::new();
            for (a0, a1) in fu.iter().zip(&fv) {
                for (b0, b1) in gu.iter().zip(&gv) {
                    let (d0, d1) = (a0 - b0, a1 - b1);
                    if d0.signum() * d1.signum() < 0 {
                        cuts.push(u + (v - u) * &d0 / (&d0 - &d1));
                    }
                }
            }
            cuts.sort();
            cuts.dedup();
            let mut pts = vec![u.clone()];
            pts.extend(cuts);
            pts.push(v.clone());
            for seg in pts.windows(2) {
                out_slabs.push(self.compose_on(rhs, fi, gi, &seg[0], &seg[1]));
                out_x.push(seg[1].clone());
            }
        }
        let mut m = FiberedMap { x_breaks: out_x, slabs: out_slabs };
        m.canonicalize();
        m
    }

    /// The composite slab over `[p, q]`, inside which no entry line of `self`
    /// crosses an image line of `rhs`.
    fn compose_on(&self, rhs: &FiberedMap, fi: usize, gi: usize, p: &Rational, q: &Rational) -> Slab {
        let mid = p.midpoint(q);
        let g_slopes = &rhs.slabs[gi].slopes;
        let f_slopes = &self.slabs[fi].slopes;
        let ge = |x: &Rational| rhs.entry_at(gi, x);
        let gm = |x: &Rational| image_values(&rhs.entry_at(gi, x), g_slopes);
        let fe = |x: &Rational| self.entry_at(fi, x);
        let (ge_p, ge_q) = (ge(p), ge(q));
        let (gm_p, gm_q, gm_mid) = (gm(p), gm(q), gm(&mid));
        let (fe_p, fe_q, fe_mid) = (fe(p), fe(q), fe(&mid));

        // intermediate lines: (value at p, value at q, value at mid)
        let mut lines: Vec<(Rational, Rational, Rational)> = Vec::new();
        for k in 0..gm_p.len() {
            lines.push((gm_p[k].clone(), gm_q[k].clone(), gm_mid[k].clone()));
        }
        for k in 0..fe_p.len() {
            lines.push((fe_p[k].clone(), fe_q[k].clone(), fe_mid[k].clone()));
        }
        lines.sort_by(|a, b| a.2.cmp(&b.2).then(a.0.cmp(&b.0)));
        lines.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

        let cell_of = |vals: &[Rational], v: &Rational| -> usize {
            vals.partition_point(|l| l <= v).saturating_sub(1).min(vals.len() - 2)
        };
        let mut entry_lo = Vec::with_capacity(lines.len());
        let mut entry_hi = Vec::with_capacity(lines.len());
        for (lp, lq, lm) in &lines {
            let j = cell_of(&gm_mid, lm);
            entry_lo.push(&ge_p[j] + (lp - &gm_p[j]) / &g_slopes[j]);
            entry_hi.push(&ge_q[j] + (lq - &gm_q[j]) / &g_slopes[j]);
        }
        let slopes = lines
            .windows(2)
            .map(|w| {
                let m = w[0].2.midpoint(&w[1].2);
                &f_slopes[cell_of(&fe_mid, &m)] * &g_slopes[cell_of(&gm_mid, &m)]
            })
            .collect();
        Slab { entry_lo, entry_hi, slopes }
    }

    pub fn commutator(&self, g: &FiberedMap) -> FiberedMap {
        self.compose(g).compose(&self.inverse()).compose(&g.inverse())
    }

    /// The largest strip containing `x` over which the map is the identity.
    pub fn identity_strip(&self, x: &Rational) -> Option<Strip> {
        let n = self.slabs.len();
        let ids: Vec<bool> = self.slabs.iter().map(Slab::is_identity).collect();
        // slabs meeting x
        let first = self.x_breaks.partition_point(|b| b < x).saturating_sub(1).min(n - 1);
        let last = (self.x_breaks.partition_point(|b| b <= x)).saturating_sub(1).min(n - 1);
        if !(first..=last).all(|i| ids[i]) {
            return None;
        }
        let mut lo = first;
        while lo > 0 && ids[lo - 1] {
            lo -= 1;
        }
        let mut hi = last;
        while hi + 1 < n && ids[hi + 1] {
            hi += 1;
        }
        let strip = Strip { lo: self.x_breaks[lo].clone(), hi: self.x_breaks[hi + 1].clone() };
        strip.contains(x).then_some(strip)
    }

    pub fn max_bits(&self) -> u64 {
        let xb = self.x_breaks.iter().map(Rational::bits).max().unwrap_or(0);
        self.slabs
            .iter()
            .flat_map(|s| s.entry_lo.iter().chain(&s.entry_hi).chain(&s.slopes))
            .map(Rational::bits)
            .max()
            .unwrap_or(0)
            .max(xb)
    }
}

impl GroupElement for FiberedMap {
    fn identity_like(&self) -> Self {
        FiberedMap::identity()
    }
    fn compose(&self, rhs: &Self) -> Self {
        FiberedMap::compose(self, rhs)
    }
    fn inverse(&self) -> Self {
        FiberedMap::inverse(self)
    }
    fn is_identity(&self) -> bool {
        FiberedMap::is_identity(self)
    }
    fn group_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Acts<(Rational, Rational)> for FiberedMap {
    fn act(&self, p: &(Rational, Rational)) -> (Rational, Rational) {
        (p.0.clone(), self.eval_unchecked(&p.0, &p.1))
    }
}

fn check_bump(a: &Rational, b: &Rational, lo: &Rational, hi: &Rational, y: &(Rational, Rational), t: &Rational) -> Result<(), FiberedError> {
    let moved = &y.1 + t;
    let ok = !a.is_negative()
        && a < &y.0
        && y.0 < *b
        && b <= &Rational::one()
        && !t.is_zero()
        && !lo.is_negative()
        && lo < y.1.min_of(&moved)
        && y.1.max_of(&moved) < hi
        && hi <= &Rational::one();
    if ok {
        Ok(())
    } else {
        Err(FiberedError::Precondition(format!(
            "bump needs 0 <= a < y.x < b <= 1 and 0 <= c < min(y.t, y.t+t), max(y.t, y.t+t) < d <= 1 with t != 0; \
             got a={a}, b={b}, c={lo}, d={hi}, y=({}, {}), t={t}",
            y.0, y.1
        )))
    }
}

/// A bump supported in the diamond with vertices `(a, y.t)`, `(y.x, c)`,
/// `(b, y.t)`, `(y.x, d)`, moving `y` to `(y.x, y.t + t)`.
pub fn vertical_bump_in(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    d: &Rational,
    y: &(Rational, Rational),
    t: &Rational,
) -> Result<FiberedMap, FiberedError> {
    check_bump(a, b, c, d, y, t)?;
    let (yx, yt) = (&y.0, &y.1);
    let lower = (yt + t - c) / (yt - c);
    let upper = (d - yt - t) / (d - yt);
    let apex = vec![Rational::zero(), yt.clone(), yt.clone(), yt.clone(), Rational::one()];
    let wide = vec![Rational::zero(), c.clone(), yt.clone(), d.clone(), Rational::one()];
    let slopes = vec![Rational::one(), lower, upper, Rational::one()];
    let mut xs = vec![Rational::zero()];
    let mut slabs = Vec::new();
    if !a.is_zero() {
        xs.push(a.clone());
        slabs.push(Slab::identity());
    }
    xs.push(yx.clone());
    slabs.push(Slab { entry_lo: apex.clone(), entry_hi: wide.clone(), slopes: slopes.clone() });
    xs.push(b.clone());
    slabs.push(Slab { entry_lo: wide, entry_hi: apex, slopes });
    if !b.is_one() {
        xs.push(Rational::one());
        slabs.push(Slab::identity());
    }
    // zero-width cells at c = 0 or d = 1 are removed by canonicalization
    let mut m = FiberedMap { x_breaks: xs, slabs };
    m.canonicalize();
    Ok(m)
}

/// [`vertical_bump_in`] with the full fiber `c = 0`, `d = 1`.
pub fn vertical_bump(a: &Rational, b: &Rational, y: &(Rational, Rational), t: &Rational) -> Result<FiberedMap, FiberedError> {
    vertical_bump_in(a, b, &Rational::zero(), &Rational::one(), y, t)
}

/// How many fiber-trivial words are examined on their own, and how many
/// enter the pairwise commutator stage.
const SINGLE_CANDIDATES: usize = 48;
const PAIR_CANDIDATES: usize = 10;

/// A nonempty word that is the identity on a strip around `x`, or `None`
/// when the budgeted search finds nothing.
pub fn neighborhood_identity_word(
    f: &FiberedMap,
    g: &FiberedMap,
    x: &Rational,
    max_len: usize,
) -> Result<Option<StripIdentityWitness>, FiberedError> {
    let (fx, gx) = (f.fiber_restriction(x)?, g.fiber_restriction(x)?);
    let fibers = Generators::new(&fx, &gx);
    let plane = Generators::new(f, g);
    let try_word = |w: &Word| -> Option<StripIdentityWitness> {
        if w.is_empty() {
            return None;
        }
        plane.evaluate(w).identity_strip(x).map(|strip| StripIdentityWitness { word: w.clone(), strip })
    };

    let mut trivial: Vec<Word> = Vec::new();
    let mut found = None;
    fibers.for_each_evaluated(max_len, |w, e| {
        if !e.is_identity() {
            return std::ops::ControlFlow::Continue(());
        }
        if let Some(wit) = try_word(w) {
            found = Some(wit);
            return std::ops::ControlFlow::Break(());
        }
        trivial.push(w.clone());
        if trivial.len() >= SINGLE_CANDIDATES {
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    });
    if found.is_some() {
        return Ok(found);
    }

    // words that are trivial on the fiber, completed by the fiber's own
    // commuting witnesses
    let mut pool: Vec<Word> = trivial.into_iter().take(PAIR_CANDIDATES).collect();
    let (a, b): (Word, Word) = ("a".parse().unwrap(), "b".parse().unwrap());
    if fx.commutator_is_identity(&gx) {
        pool.push(Word::commutator(&a, &b));
    } else if let ZkSearch::Found(ws) = zk_search(&fibers, 2, max_len, |_| true) {
        pool.push(Word::commutator(&ws[0], &ws[1]));
    }
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let c = Word::commutator(&pool[i], &pool[j]);
            if let Some(wit) = try_word(&c) {
                return Ok(Some(wit));
            }
        }
    }
    Ok(None)
}

/// Upper bound on the number of strips gathered by one sweep.
const MAX_STRIPS: usize = 32;

/// Sweeps `[0, 1]` with identity strips and merges them by commutators.
pub fn find_relation_fibered(f: &FiberedMap, g: &FiberedMap, max_len: usize) -> Certificate {
    let subject = Subject::FiberedPair { f: f.clone(), g: g.clone() };
    let inconclusive = |reason: String| {
        Certificate::issue(subject.clone(), Claim::Inconclusive { reason, abelian_hint: false })
            .expect("inconclusive claims always issue")
    };
    let plane = Generators::new(f, g);
    let mut acc: Option<StripIdentityWitness> = None;
    let mut x = Rational::zero();
    for _ in 0..MAX_STRIPS {
        let wit = match neighborhood_identity_word(f, g, &x, max_len) {
            Ok(Some(w)) => w,
            Ok(None) => return inconclusive(format!("no identity strip found around x = {x} within length {max_len}")),
            Err(e) => return inconclusive(e.to_string()),
        };
        let next = match acc.take() {
            None => wit,
            Some(prev) if wit.strip.lo <= prev.strip.lo => wit,
            Some(prev) => {
                let c = Word::commutator(&prev.word, &wit.word);
                if c.is_empty() {
                    return inconclusive(format!(
                        "[{}, {}] reduces to the trivial word (common power)",
                        prev.word, wit.word
                    ));
                }
                let Some(strip) = plane.evaluate(&c).identity_strip(&x) else {
                    return inconclusive(format!("merged word {c} is not the identity around x = {x}"));
                };
                StripIdentityWitness { word: c, strip }
            }
        };
        if next.strip.is_everything() {
            let word = next.word;
            return Certificate::issue(subject.clone(), Claim::Relation { word })
                .unwrap_or_else(|e| inconclusive(e.to_string()));
        }
        x = next.strip.hi.clone();
        acc = Some(next);
    }
    inconclusive(format!("strips did not cover [0, 1] after {MAX_STRIPS} merges"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::q;
    use crate::pl1d::bump_pl;

    fn h0() -> PlMap {
        PlMap::new(vec![(q(0, 1), q(0, 1)), (q(1, 2), q(1, 4)), (q(1, 1), q(1, 1))]).unwrap()
    }

    #[test]
    fn construction() {
        assert!(FiberedMap::new(vec![q(0, 1), q(1, 1)], vec![Slab::identity()]).unwrap().is_identity());
        let p = FiberedMap::product(&h0());
        assert_eq!(p.fiber_restriction(&q(1, 3)).unwrap(), h0());
        let bad = Slab { entry_lo: vec![q(0, 1), q(1, 2), q(1, 1)], entry_hi: vec![q(0, 1), q(1, 2), q(1, 1)], slopes: vec![q(1, 1), q(1, 2)] };
        assert_eq!(FiberedMap::new(vec![q(0, 1), q(1, 1)], vec![bad]), Err(FiberedError::TopBoundary(0)));
    }

    #[test]
    fn sloped_slab_evaluation() {
        // ℓ runs from 1/2 to 1/4 and the image of ℓ is 1/2 at x = 0, which
        // forces slope 1 in both cells
        let m = FiberedMap::new(
            vec![q(0, 1), q(1, 1)],
            vec![Slab {
                entry_lo: vec![q(0, 1), q(1, 2), q(1, 1)],
                entry_hi: vec![q(0, 1), q(1, 4), q(1, 1)],
                slopes: vec![q(1, 1), q(1, 1)],
            }],
        )
        .unwrap();
        assert_eq!(m.eval(&q(1, 2), &q(3, 8)).unwrap(), (q(1, 2), q(3, 8)));
        assert!(m.is_identity());
        let ok = FiberedMap::new(
            vec![q(0, 1), q(1, 1)],
            vec![Slab {
                entry_lo: vec![q(0, 1), q(1, 2), q(1, 1)],
                entry_hi: vec![q(0, 1), q(1, 2), q(1, 1)],
                slopes: vec![q(1, 2), q(3, 2)],
            }],
        )
        .unwrap();
        assert_eq!(ok.eval(&q(1, 3), &q(1, 4)).unwrap(), (q(1, 3), q(1, 8)));
        assert_eq!(ok, FiberedMap::product(&h0()));
    }

    #[test]
    fn moving_breakline() {
        let y = (q(1, 2), q(1, 2));
        let m = vertical_bump(&q(0, 1), &q(1, 1), &y, &q(1, 8)).unwrap();
        // at x = 1/4 the apex line is halfway, so 1/2 moves by 1/16
        assert_eq!(m.eval(&q(1, 4), &q(1, 2)).unwrap(), (q(1, 4), q(9, 16)));
        assert_eq!(m.eval(&q(1, 2), &q(1, 2)).unwrap(), (q(1, 2), q(5, 8)));
        assert_eq!(m.fiber_restriction(&q(1, 2)).unwrap(), bump_pl(&q(0, 1), &q(1, 1), &q(1, 2), &q(1, 8)).unwrap());
        assert!(m.fiber_restriction(&q(0, 1)).unwrap().is_identity());
    }

    #[test]
    fn group_laws() {
        let y = (q(1, 3), q(1, 2));
        let f = vertical_bump(&q(0, 1), &q(2, 3), &y, &q(1, 8)).unwrap();
        let g = vertical_bump_in(&q(1, 4), &q(1, 1), &q(1, 4), &q(3, 4), &(q(1, 2), q(1, 2)), &q(-1, 8)).unwrap();
        assert!(f.compose(&f.inverse()).is_identity());
        assert_eq!(FiberedMap::identity().compose(&f), f);
        let fg = f.compose(&g);
        for k in 0..=20 {
            let x = q(k, 20);
            assert_eq!(
                fg.fiber_restriction(&x).unwrap(),
                f.fiber_restriction(&x).unwrap().compose(&g.fiber_restriction(&x).unwrap())
            );
        }
        let (h1, h2) = (h0(), bump_pl(&q(1, 4), &q(1, 2), &q(3, 8), &q(1, 16)).unwrap());
        assert_eq!(
            FiberedMap::product(&h1).compose(&FiberedMap::product(&h2)),
            FiberedMap::product(&h1.compose(&h2))
        );
    }

    #[test]
    fn bump_properties() {
        let y = (q(1, 2), q(1, 3));
        let m = vertical_bump(&q(1, 4), &q(3, 4), &y, &q(1, 6)).unwrap();
        assert_eq!(m.eval(&y.0, &y.1).unwrap().1, q(1, 2));
        assert!(m.fiber_restriction(&q(1, 4)).unwrap().is_identity());
        assert!(m.fiber_restriction(&q(3, 4)).unwrap().is_identity());
        assert!(vertical_bump(&q(1, 4), &q(3, 4), &y, &q(2, 3)).is_err());
        let a = vertical_bump(&q(1, 4), &q(3, 4), &y, &q(1, 7)).unwrap();
        assert_ne!(a.eval(&y.0, &y.1).unwrap(), m.eval(&y.0, &y.1).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let m = vertical_bump(&q(1, 4), &q(3, 4), &(q(1, 2), q(1, 3)), &q(1, 6)).unwrap();
        let j = serde_json::to_string(&m).unwrap();
        let back: FiberedMap = serde_json::from_str(&j).unwrap();
        assert_eq!(back, m);
        assert_eq!(serde_json::to_string(&back).unwrap(), j);
    }

    #[test]
    fn identity_strips_and_witnesses() {
        let id = FiberedMap::identity();
        let w = neighborhood_identity_word(&id, &id, &q(1, 2), 2).unwrap().unwrap();
        assert_eq!(w.word.to_string(), "a");
        assert!(w.strip.is_everything());

        let f = vertical_bump(&q(0, 1), &q(1, 3), &(q(1, 6), q(1, 2)), &q(1, 8)).unwrap();
        let g = vertical_bump(&q(2, 3), &q(1, 1), &(q(5, 6), q(1, 2)), &q(1, 8)).unwrap();
        let w = neighborhood_identity_word(&f, &g, &q(1, 2), 4).unwrap().unwrap();
        assert!(w.strip.contains(&q(1, 2)));
        assert_eq!(f.identity_strip(&q(1, 2)), Some(Strip { lo: q(1, 3), hi: q(1, 1) }));
        assert_eq!(f.identity_strip(&q(1, 3)), None);
    }

    #[test]
    fn relations() {
        let f = vertical_bump(&q(0, 1), &q(1, 3), &(q(1, 6), q(1, 2)), &q(1, 8)).unwrap();
        let g = vertical_bump(&q(2, 3), &q(1, 1), &(q(5, 6), q(1, 2)), &q(1, 8)).unwrap();
        let cert = find_relation_fibered(&f, &g, 4);
        let Claim::Relation { word } = cert.claim() else { panic!("{cert:?}") };
        assert!(Generators::new(&f, &g).evaluate(word).is_identity());
        assert!(cert.verify().is_ok());

        let (h1, h2) = (h0(), h0().compose(&h0()));
        let (p1, p2) = (FiberedMap::product(&h1), FiberedMap::product(&h2));
        let cert = find_relation_fibered(&p1, &p2, 4);
        assert!(matches!(cert.claim(), Claim::Relation { .. }), "{cert:?}");
    }
}
