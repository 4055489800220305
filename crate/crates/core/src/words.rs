// SPDX-License-Identifier: Apache-2.0

//! Formal words in two generators, free reduction, evaluation, and return statistics of the
//! simple random walk on the free group.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupCtx, GroupElem};
use crate::seeding;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
    AInv,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::B, Letter::AInv, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::B => 'b',
            Letter::AInv => 'A',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a' => Some(Letter::A),
            'b' => Some(Letter::B),
            'A' => Some(Letter::AInv),
            'B' => Some(Letter::BInv),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid letter {0:?}; expected one of a, b, A, B")]
    InvalidLetter(char),
    #[error("generators are not elements of this group")]
    ContextMismatch,
}

/// A word over `{a, b, a^-1, b^-1}`, stored as written (not reduced).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
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

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Free reduction (stack cancellation of adjacent inverse pairs).
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != w[0].inverse())
    }

    /// Index of the word in `0..4^n`, base 4 with the first letter most significant.
    pub fn from_index(n: usize, mut idx: u64) -> Word {
        let mut v = vec![Letter::A; n];
        for slot in v.iter_mut().rev() {
            *slot = Letter::ALL[(idx % 4) as usize];
            idx /= 4;
        }
        Word(v)
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

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| Letter::from_char(c).ok_or(WordError::InvalidLetter(c)))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// Uniform word of length `n`.
pub fn sample_word<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Word {
    Word((0..n).map(|_| Letter::ALL[rng.gen_range(0..4)]).collect())
}

/// Uniform reduced word of length `n`.
pub fn sample_reduced_word<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Word {
    let mut v: Vec<Letter> = Vec::with_capacity(n);
    for _ in 0..n {
        let l = loop {
            let l = Letter::ALL[rng.gen_range(0..4)];
            if v.last() != Some(&l.inverse()) {
                break l;
            }
        };
        v.push(l);
    }
    Word(v)
}

/// Generator images `a, b, a^-1, b^-1` for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Substitution {
    images: [GroupElem; 4],
}

impl Substitution {
    pub fn new(ctx: &GroupCtx, a: &GroupElem, b: &GroupElem) -> Result<Self, WordError> {
        if !ctx.is_member_elem(a) || !ctx.is_member_elem(b) {
            return Err(WordError::ContextMismatch);
        }
        Ok(Substitution {
            images: [*a, *b, ctx.inv(a), ctx.inv(b)],
        })
    }

    pub fn image(&self, l: Letter) -> &GroupElem {
        &self.images[l.index()]
    }

    /// `w(a, b)`, multiplying left to right.
    pub fn eval(&self, ctx: &GroupCtx, w: &Word) -> GroupElem {
        w.0.iter()
            .fold(ctx.identity(), |acc, &l| ctx.mul(&acc, &self.images[l.index()]))
    }
}

/// `w(a, b)`.
pub fn evaluate(
    ctx: &GroupCtx,
    w: &Word,
    a: &GroupElem,
    b: &GroupElem,
) -> Result<GroupElem, WordError> {
    Ok(Substitution::new(ctx, a, b)?.eval(ctx, w))
}

/// Number of words of length `n` that reduce to the empty word, by dynamic programming on
/// the distance from the root of the 4-regular tree.
pub fn returning_count(n: usize) -> BigUint {
    let mut counts = vec![BigUint::zero(); n + 2];
    counts[0] = BigUint::one();
    for _ in 0..n {
        let mut next = vec![BigUint::zero(); n + 2];
        for d in 0..=n {
            if counts[d].is_zero() {
                continue;
            }
            if d == 0 {
                next[1] += &counts[0] * 4u32;
            } else {
                next[d - 1] += &counts[d];
                next[d + 1] += &counts[d] * 3u32;
            }
        }
        counts = next;
    }
    counts.swap_remove(0)
}

/// Exact probability that a uniform word of length `n` reduces to the empty word.
pub fn return_probability(n: usize) -> BigRational {
    let total = BigUint::from(4u32).pow(n as u32);
    BigRational::new(returning_count(n).into(), total.into())
}

/// Monte Carlo estimate of [`return_probability`]: `(estimate, standard error)`.
pub fn return_probability_mc(n: usize, trials: usize, seed: u64) -> (f64, f64) {
    let hits: u64 = seeding::chunked(seed, 0, trials, |rng, count| {
        (0..count)
            .filter(|_| sample_word(n, rng).reduce().is_empty())
            .count() as u64
    })
    .into_iter()
    .sum();
    seeding::bernoulli_summary(hits, trials as u64)
}

/// Whether `w` and `w'` commute in the free group.
pub fn commute_in_free_group(w: &Word, w2: &Word) -> bool {
    w.concat(w2)
        .concat(&w.inverse())
        .concat(&w2.inverse())
        .reduce()
        .is_empty()
}

/// Monte Carlo probability that two independent uniform words of length `n` commute:
/// `(estimate, standard error)`.
pub fn commuting_pair_probability(n: usize, trials: usize, seed: u64) -> (f64, f64) {
    let hits: u64 = seeding::chunked(seed, 0, trials, |rng, count| {
        (0..count)
            .filter(|_| {
                let w = sample_word(n, rng);
                let w2 = sample_word(n, rng);
                commute_in_free_group(&w, &w2)
            })
            .count() as u64
    })
    .into_iter()
    .sum();
    seeding::bernoulli_summary(hits, trials as u64)
}
