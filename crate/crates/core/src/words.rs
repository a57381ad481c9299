//! Reduced words in the free group on two generators `a`, `b`.
//!
//! A word `t_k … t_1` is stored left to right as written and acts right to
//! left: `t_1` is applied first. Strings use `a`, `b` for the generators and
//! `A`, `B` for their inverses, so `"abAB"` is the commutator `a b a⁻¹ b⁻¹`.

use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub const A: Letter = Letter { generator: Generator::A, inverse: false };
    pub const A_INV: Letter = Letter { generator: Generator::A, inverse: true };
    pub const B: Letter = Letter { generator: Generator::B, inverse: false };
    pub const B_INV: Letter = Letter { generator: Generator::B, inverse: true };

    /// All letters in enumeration order `a < A < b < B`.
    pub const ALL: [Letter; 4] = [Letter::A, Letter::A_INV, Letter::B, Letter::B_INV];

    pub fn index(self) -> usize {
        match (self.generator, self.inverse) {
            (Generator::A, false) => 0,
            (Generator::A, true) => 1,
            (Generator::B, false) => 2,
            (Generator::B, true) => 3,
        }
    }

    pub fn from_index(i: usize) -> Letter {
        Letter::ALL[i]
    }

    pub fn inv(self) -> Letter {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn to_char(self) -> char {
        match (self.generator, self.inverse) {
            (Generator::A, false) => 'a',
            (Generator::A, true) => 'A',
            (Generator::B, false) => 'b',
            (Generator::B, true) => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'A' => Some(Letter::A_INV),
            'b' => Some(Letter::B),
            'B' => Some(Letter::B_INV),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid word character {0:?}; expected one of a, A, b, B")]
pub struct WordParseError(pub char);

/// A freely reduced word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

/// Freely reduces a sequence of letters.
pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// The reduced form of `self · rhs` (`rhs` acts first).
    pub fn concat(&self, rhs: &Word) -> Word {
        reduce(self.0.iter().chain(rhs.0.iter()).copied())
    }

    pub fn commutator(u: &Word, v: &Word) -> Word {
        reduce(
            u.0.iter()
                .chain(v.0.iter())
                .copied()
                .chain(u.inverse().0)
                .chain(v.inverse().0),
        )
    }

    /// `h w h⁻¹`.
    pub fn conjugate(h: &Word, w: &Word) -> Word {
        reduce(h.0.iter().chain(w.0.iter()).copied().chain(h.inverse().0))
    }

    pub fn pow(&self, n: usize) -> Word {
        reduce(std::iter::repeat_n(self.0.iter().copied(), n).flatten())
    }

    pub fn is_reduced(letters: &[Letter]) -> bool {
        letters.windows(2).all(|w| w[0] != w[1].inv())
    }

    /// Builds a word from letters that must already be reduced.
    pub fn from_reduced(letters: Vec<Letter>) -> Option<Word> {
        Word::is_reduced(&letters).then_some(Word(letters))
    }

    /// Letters in the order they are applied, `t_1` first.
    pub fn application_order(&self) -> impl Iterator<Item = Letter> + '_ {
        self.0.iter().rev().copied()
    }

    /// Position in the fixed enumeration order (length, then lexicographic).
    pub fn enumeration_key(&self) -> (usize, Vec<usize>) {
        (self.len(), self.0.iter().map(|l| l.index()).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = WordParseError;

    /// Parses and freely reduces.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| Letter::from_char(c).ok_or(WordParseError(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(reduce(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        let letters = s
            .chars()
            .map(|c| Letter::from_char(c).ok_or(WordParseError(c)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Word::from_reduced(letters)
            .ok_or_else(|| serde::de::Error::custom(format!("word {s:?} is not reduced")))
    }
}

/// Every reduced word of length at most `max_len`, each exactly once, ordered
/// by length and then lexicographically with `a < A < b < B`.
pub fn enumerate_reduced(max_len: usize) -> ReducedWords {
    ReducedWords { max_len, current: None }
}

pub struct ReducedWords {
    max_len: usize,
    current: Option<Vec<usize>>,
}

fn smallest_after(prev: Option<usize>) -> usize {
    match prev {
        Some(0) => 0,
        Some(1) => 1,
        _ => 0,
    }
}

fn fill_minimal(digits: &mut [usize], from: usize) {
    for i in from..digits.len() {
        let prev = if i == 0 { None } else { Some(digits[i - 1]) };
        digits[i] = smallest_after(prev);
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let next = match self.current.take() {
            None => Vec::new(),
            Some(mut digits) => {
                // rightmost position that can be bumped
                let mut advanced = false;
                for i in (0..digits.len()).rev() {
                    let forbidden = if i == 0 { None } else { Some(digits[i - 1] ^ 1) };
                    let mut v = digits[i] + 1;
                    if Some(v) == forbidden {
                        v += 1;
                    }
                    if v < 4 {
                        digits[i] = v;
                        fill_minimal(&mut digits, i + 1);
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    let len = digits.len() + 1;
                    if len > self.max_len {
                        return None;
                    }
                    let mut d = vec![0; len];
                    fill_minimal(&mut d, 0);
                    d
                } else {
                    digits
                }
            }
        };
        let word = Word(next.iter().map(|&i| Letter::from_index(i)).collect());
        self.current = Some(next);
        Some(word)
    }
}

/// The operations a group must supply for word evaluation. `compose(f, g)` is
/// `f ∘ g` (g acts first). Equality must be exact.
pub trait GroupElement: Clone {
    fn identity_like(&self) -> Self;
    fn compose(&self, rhs: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn is_identity(&self) -> bool;
    fn group_eq(&self, other: &Self) -> bool;
}

/// Action of a group element on points of its space.
pub trait Acts<P> {
    fn act(&self, p: &P) -> P;
}

/// A generating pair with cached inverses.
#[derive(Clone, Debug)]
pub struct Generators<G> {
    images: [G; 4],
}

impl<G: GroupElement> Generators<G> {
    pub fn new(f: &G, g: &G) -> Self {
        Generators { images: [f.clone(), f.inverse(), g.clone(), g.inverse()] }
    }

    pub fn f(&self) -> &G {
        &self.images[0]
    }

    pub fn g(&self) -> &G {
        &self.images[2]
    }

    pub fn letter(&self, l: Letter) -> &G {
        &self.images[l.index()]
    }

    pub fn evaluate(&self, w: &Word) -> G {
        let mut acc = self.images[0].identity_like();
        for l in w.letters() {
            acc = acc.compose(self.letter(*l));
        }
        acc
    }

    /// Applies the word to a point, `t_1` first.
    pub fn evaluate_at<P>(&self, w: &Word, p: &P) -> P
    where
        G: Acts<P>,
        P: Clone,
    {
        w.application_order().fold(p.clone(), |x, l| self.letter(l).act(&x))
    }

    /// Visits `(word, value)` for every nonempty reduced word of length at most
    /// `max_len`, in enumeration order, reusing the previous length's values.
    /// Stops early when `visit` breaks.
    pub fn for_each_evaluated<R>(
        &self,
        max_len: usize,
        mut visit: impl FnMut(&Word, &G) -> ControlFlow<R>,
    ) -> Option<R> {
        let mut layer: Vec<(Word, G)> = vec![(Word::empty(), self.images[0].identity_like())];
        for _ in 1..=max_len {
            let mut next = Vec::with_capacity(layer.len() * 3);
            for l in Letter::ALL {
                for (suffix, value) in &layer {
                    if suffix.0.first() == Some(&l.inv()) {
                        continue;
                    }
                    let mut letters = Vec::with_capacity(suffix.len() + 1);
                    letters.push(l);
                    letters.extend_from_slice(&suffix.0);
                    let word = Word(letters);
                    let v = self.letter(l).compose(value);
                    if let ControlFlow::Break(r) = visit(&word, &v) {
                        return Some(r);
                    }
                    next.push((word, v));
                }
            }
            layer = next;
        }
        None
    }
}

impl<G: GroupElement> Generators<G> {
    /// Like [`Generators::for_each_evaluated`] but depth first, extending
    /// words on the right. Only one value per length is held at a time, which
    /// matters when elements are large.
    pub fn for_each_evaluated_depth_first<R>(
        &self,
        max_len: usize,
        mut visit: impl FnMut(&Word, &G) -> ControlFlow<R>,
    ) -> Option<R> {
        fn go<G: GroupElement, R>(
            gens: &Generators<G>,
            letters: &mut Vec<Letter>,
            value: &G,
            max_len: usize,
            visit: &mut dyn FnMut(&Word, &G) -> ControlFlow<R>,
        ) -> Option<R> {
            if letters.len() == max_len {
                return None;
            }
            for l in Letter::ALL {
                if letters.last() == Some(&l.inv()) {
                    continue;
                }
                letters.push(l);
                let v = value.compose(gens.letter(l));
                let word = Word(letters.clone());
                if let ControlFlow::Break(r) = visit(&word, &v) {
                    return Some(r);
                }
                if let Some(r) = go(gens, letters, &v, max_len, visit) {
                    return Some(r);
                }
                letters.pop();
            }
            None
        }
        let start = self.images[0].identity_like();
        go(self, &mut Vec::with_capacity(max_len), &start, max_len, &mut visit)
    }
}

/// Visits `(w, w(p))` for every nonempty reduced word of length at most
/// `max_len`, in enumeration order, evaluating only along the orbit of `p`.
pub fn for_each_orbit_point<P, R>(
    act: impl Fn(Letter, &P) -> P,
    p: &P,
    max_len: usize,
    mut visit: impl FnMut(&Word, &P) -> ControlFlow<R>,
) -> Option<R>
where
    P: Clone,
{
    let mut layer: Vec<(Word, P)> = vec![(Word::empty(), p.clone())];
    for _ in 1..=max_len {
        let mut next = Vec::with_capacity(layer.len() * 3);
        for l in Letter::ALL {
            for (suffix, value) in &layer {
                if suffix.0.first() == Some(&l.inv()) {
                    continue;
                }
                let mut letters = Vec::with_capacity(suffix.len() + 1);
                letters.push(l);
                letters.extend_from_slice(&suffix.0);
                let word = Word(letters);
                let v = act(l, value);
                if let ControlFlow::Break(r) = visit(&word, &v) {
                    return Some(r);
                }
                next.push((word, v));
            }
        }
        layer = next;
    }
    None
}

impl GroupElement for crate::num::Mat2 {
    fn identity_like(&self) -> Self {
        crate::num::Mat2::identity()
    }
    fn compose(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }
    /// Panics on singular matrices; generators are checked invertible on entry.
    fn inverse(&self) -> Self {
        self.inv().expect("generator matrices are invertible")
    }
    fn is_identity(&self) -> bool {
        crate::num::Mat2::is_identity(self)
    }
    fn group_eq(&self, other: &Self) -> bool {
        self == other
    }
}

/// `w(f, g)` with `a ↦ f`, `b ↦ g`.
pub fn evaluate_word<G: GroupElement>(w: &Word, f: &G, g: &G) -> G {
    Generators::new(f, g).evaluate(w)
}
