//! Seeded families of test pairs with known structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fibered2d::{vertical_bump, vertical_bump_in, FiberedMap};
use crate::num::Rational;
use crate::linearcert::{ProjArc, ProjPoint};
use crate::pl1d::{bump_pl, PlMap};
use crate::projcircle::{proj_bump, ProjCircleMap};

fn frac_between(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, steps: i64) -> Rational {
    let k = rng.gen_range(1..steps);
    lo + (hi - lo) * Rational::frac(k, steps)
}

/// Pairs `(f, g)` with `f` contracting on all of `(0, 1)` and `g` a bump in
/// the interior.
pub fn contraction_bump_pairs(seed: u64, n: usize) -> Vec<(PlMap, PlMap)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let bx = Rational::frac(rng.gen_range(2..8), 10);
            let by = &bx * Rational::frac(rng.gen_range(1..10), 10);
            let f = PlMap::new(vec![
                (Rational::zero(), Rational::zero()),
                (bx, by),
                (Rational::one(), Rational::one()),
            ])
            .expect("valid contraction");
            let a = Rational::frac(rng.gen_range(1..40), 100);
            let b = &a + Rational::frac(rng.gen_range(5..30), 100);
            let y = a.midpoint(&b);
            let t = (&b - &y) * Rational::frac(rng.gen_range(1..9), 10);
            let t = if rng.gen_bool(0.5) { t } else { -t };
            (f, bump_pl(&a, &b, &y, &t).expect("valid bump"))
        })
        .collect()
}

fn random_vertical_bump(rng: &mut ChaCha8Rng, a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> FiberedMap {
    let yx = frac_between(rng, a, b, 8);
    let yt = frac_between(rng, c, d, 8);
    let room = (d - &yt).min_of(&(&yt - c)).clone();
    let t = room * Rational::frac(rng.gen_range(1..8), 8);
    let t = if rng.gen_bool(0.5) { t } else { -t };
    vertical_bump_in(a, b, c, d, &(yx, yt), &t).expect("parameters satisfy the bump preconditions")
}

/// Fibered pairs built so that short words are the identity on strips
/// covering `[0, 1]`. The families cycle through disjoint x-supports,
/// disjoint t-supports, commuting products, a power relation, and a pair
/// whose relation needs two overlapping strips.
pub fn planted_fibered_pairs(seed: u64, n: usize) -> Vec<(FiberedMap, FiberedMap)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Rational::zero();
    let one = Rational::one();
    (0..n)
        .map(|i| match i % 5 {
            0 => {
                let m = Rational::frac(rng.gen_range(3..7), 10);
                let f = random_vertical_bump(&mut rng, &z, &m, &z, &one);
                let g = random_vertical_bump(&mut rng, &m, &one, &z, &one);
                (f, g)
            }
            1 => {
                let m = Rational::frac(rng.gen_range(3..7), 10);
                let f = random_vertical_bump(&mut rng, &z, &one, &z, &m);
                let g = random_vertical_bump(&mut rng, &z, &one, &m, &one);
                (f, g)
            }
            2 => {
                let a = Rational::frac(rng.gen_range(1..5), 10);
                let b = &a + Rational::frac(rng.gen_range(1..5), 10);
                let y = a.midpoint(&b);
                let t = (&b - &y) * Rational::frac(rng.gen_range(1..8), 8);
                let h = bump_pl(&a, &b, &y, &t).expect("valid bump");
                let f = FiberedMap::product(&h);
                let g = FiberedMap::product(&h.compose(&h));
                (f, g)
            }
            3 => {
                let f = random_vertical_bump(&mut rng, &z, &one, &z, &one);
                let g = f.compose(&f);
                (f, g)
            }
            _ => {
                // g = f² on [0, lo) and f = id on (hi, 1]
                let hi = Rational::frac(rng.gen_range(3..6), 10);
                let lo = Rational::frac(rng.gen_range(6..9), 10);
                let f = random_vertical_bump(&mut rng, &z, &hi, &z, &one);
                let k = random_vertical_bump(&mut rng, &lo, &one, &z, &one);
                let g = f.compose(&f).compose(&k);
                (f, g)
            }
        })
        .collect()
}

/// Commuting pairs of equal-support bumps with a point in the overlap,
/// for the perturbation engine.
pub fn commuting_bump_pairs(seed: u64, n: usize) -> Vec<(PlMap, PlMap, Rational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = Rational::frac(rng.gen_range(1..30), 100);
            let b = &a + Rational::frac(rng.gen_range(20..60), 100);
            let y = a.midpoint(&b);
            let t = (&b - &y) * Rational::frac(rng.gen_range(1..8), 10);
            let f = bump_pl(&a, &b, &y, &t).expect("valid bump");
            let g = f.compose(&f);
            let p = frac_between(&mut rng, &a, &b, 16);
            (f, g, p)
        })
        .collect()
}

/// A vertical bump over the whole square centred at `(1/2, 1/2)`.
pub fn central_vertical_bump(t: &Rational) -> FiberedMap {
    let h = Rational::frac(1, 2);
    vertical_bump(&Rational::zero(), &Rational::one(), &(h.clone(), h), t).expect("|t| < 1/2")
}

/// Pairs in the group of circle maps fixing the arc `(1 → −1)` through `∞`:
/// a hyperbolic map of `[−1, 1]` together with a bump on a sub-arc. Every
/// fifth pair is commuting (`G = F²`).
pub fn h_pairs(seed: u64, n: usize) -> Vec<(ProjCircleMap, ProjCircleMap, ProjArc)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (ProjPoint::Finite(-Rational::one()), ProjPoint::Finite(Rational::one()));
    let arc = ProjArc::new(hi.clone(), lo.clone()).expect("distinct");
    (0..n)
        .map(|i| {
            let lambda = Rational::frac(1, rng.gen_range(2..10));
            let f = proj_bump(&lo, &hi, &lambda).expect("valid bump");
            if i % 5 == 4 {
                let g = f.compose(&f);
                return (f, g, arc.clone());
            }
            let k = rng.gen_range(-9..9);
            let a = Rational::frac(k, 10);
            let b = Rational::frac(rng.gen_range(k + 1..=9), 10);
            let mu = Rational::frac(rng.gen_range(2..6), 1);
            let g = proj_bump(&ProjPoint::Finite(a), &ProjPoint::Finite(b), &mu).expect("valid bump");
            (f, g, arc.clone())
        })
        .collect()
}
