//! Seeded generators of small exact test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lattice::{SimpleFunction, Term};
use crate::rational::{rat, Rational};
use crate::rings::{RingSet, Universe};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational with numerator in `[-lim, lim]` and denominator in `1..=den`.
pub fn small_rational(rng: &mut impl Rng, lim: i64, den: i64) -> Rational {
    let d = rng.random_range(1..=den);
    rat(rng.random_range(-lim * d..=lim * d), d)
}

/// A subset of `0..n` as a mask.
pub fn subset(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}

/// Bounded interval union with quarter-integer endpoints in `[-4, 4]`.
pub fn interval_set(rng: &mut impl Rng) -> RingSet {
    let pieces = rng.random_range(1..=3);
    let mut s = RingSet::empty(&Universe::RealLine);
    for _ in 0..pieces {
        let a = rng.random_range(-16..16);
        let len = rng.random_range(1..=12);
        let piece = RingSet::interval(rat(a, 4), rat(a + len, 4));
        s = s.union(&piece).expect("same universe");
    }
    s
}

/// A raw (generally overlapping) simple function on `universe`.
pub fn simple_function(rng: &mut impl Rng, universe: &Universe, max_terms: usize) -> Result<SimpleFunction> {
    let k = rng.random_range(0..=max_terms);
    let mut terms = Vec::with_capacity(k);
    for _ in 0..k {
        let coeff = small_rational(rng, 5, 3);
        let set = match universe {
            Universe::Finite(labels) => RingSet::finite(universe, subset(rng, labels.len()))?,
            _ => interval_set(rng),
        };
        terms.push(Term { coeff, set });
    }
    SimpleFunction::new(universe, terms)
}

/// Like [`simple_function`] with nonnegative coefficients.
pub fn nonnegative_simple(rng: &mut impl Rng, universe: &Universe, max_terms: usize) -> Result<SimpleFunction> {
    let f = simple_function(rng, universe, max_terms)?;
    let terms = f
        .terms()
        .iter()
        .map(|t| Term {
            coeff: crate::rational::abs(&t.coeff),
            set: t.set.clone(),
        })
        .collect();
    SimpleFunction::new(universe, terms)
}
