// SPDX-License-Identifier: Apache-2.0

//! Ping-pong for special affine maps of the rational plane, in exact arithmetic.
//!
//! `a (x, y) = (L^10 x, L^-10 y)`, `b = h a h^-1`. The regions `U_u^{+-}` are the displayed
//! ones: `U_a^- = {||p|| < 1/L or |x| > L|y|}`, `U_{a^-1}^- = {||p|| < 1/L or |y| > L|x|}`,
//! `U_a^+ = {|y| > max(L|x|, L)}`, `U_{a^-1}^+ = {|x| > max(L|y|, L)}`, and the `b` regions are
//! their images under `h`. Since `a` expands the first coordinate, the letter `a` repels from
//! `U_{a^-1}^-` and attracts into `U_{a^-1}^+`; see [`Pairing`].

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeding::{chunked, stream_rng};
use crate::words::{sample_reduced_word, Letter, Word};

pub type Q = BigRational;

pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub type Point = [Q; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PingPongError {
    #[error("L must satisfy |L| > 1")]
    BadL,
    #[error("conjugator is not generic: {0}")]
    NonGenericConjugator(String),
    #[error("linear part has determinant {0}, expected 1")]
    NotSpecial(String),
    #[error("inclusion failed for letter {letter} at ({x}, {y}): {what}")]
    InclusionFailed {
        x: String,
        y: String,
        letter: char,
        what: String,
    },
    #[error("word length {0} exceeds the cap {1}")]
    TooLong(usize, usize),
}

/// `p -> linear p + translation` with `det linear = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub linear: [[Q; 2]; 2],
    pub translation: [Q; 2],
}

impl AffineMap {
    pub fn new(linear: [[Q; 2]; 2], translation: [Q; 2]) -> Result<Self, PingPongError> {
        let det = &linear[0][0] * &linear[1][1] - &linear[0][1] * &linear[1][0];
        if !det.is_one() {
            return Err(PingPongError::NotSpecial(det.to_string()));
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity() -> Self {
        AffineMap {
            linear: [[Q::one(), Q::zero()], [Q::zero(), Q::one()]],
            translation: [Q::zero(), Q::zero()],
        }
    }

    pub fn translation(t: [Q; 2]) -> Self {
        AffineMap {
            translation: t,
            ..Self::identity()
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn apply(&self, p: &Point) -> Point {
        let l = &self.linear;
        [
            &l[0][0] * &p[0] + &l[0][1] * &p[1] + &self.translation[0],
            &l[1][0] * &p[0] + &l[1][1] * &p[1] + &self.translation[1],
        ]
    }

    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let (l, m) = (&self.linear, &other.linear);
        let lin = [
            [
                &l[0][0] * &m[0][0] + &l[0][1] * &m[1][0],
                &l[0][0] * &m[0][1] + &l[0][1] * &m[1][1],
            ],
            [
                &l[1][0] * &m[0][0] + &l[1][1] * &m[1][0],
                &l[1][0] * &m[0][1] + &l[1][1] * &m[1][1],
            ],
        ];
        AffineMap {
            linear: lin,
            translation: self.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let l = &self.linear;
        let inv = [
            [l[1][1].clone(), -l[0][1].clone()],
            [-l[1][0].clone(), l[0][0].clone()],
        ];
        let t = &self.translation;
        let c = [
            -(&inv[0][0] * &t[0] + &inv[0][1] * &t[1]),
            -(&inv[1][0] * &t[0] + &inv[1][1] * &t[1]),
        ];
        AffineMap {
            linear: inv,
            translation: c,
        }
    }
}

/// `||(x, y)|| = max(|x|, |y|)`.
pub fn norm(p: &Point) -> Q {
    let (x, y) = (p[0].abs(), p[1].abs());
    if x > y {
        x
    } else {
        y
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedPoint {
    Unique(Point),
    NoUniqueFixedPoint,
}

/// `x(g) = (1 - l(g))^-1 c(g)` when `1` is not an eigenvalue of `l(g)`.
pub fn fixed_point(g: &AffineMap) -> FixedPoint {
    let l = &g.linear;
    let m = [
        [Q::one() - &l[0][0], -l[0][1].clone()],
        [-l[1][0].clone(), Q::one() - &l[1][1]],
    ];
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    if det.is_zero() {
        return FixedPoint::NoUniqueFixedPoint;
    }
    let c = &g.translation;
    FixedPoint::Unique([
        (&m[1][1] * &c[0] - &m[0][1] * &c[1]) / &det,
        (&m[0][0] * &c[1] - &m[1][0] * &c[0]) / &det,
    ])
}

/// Whether the maps share a fixed point: exact rank test on the stacked systems
/// `(1 - l_i) x = c_i`.
pub fn common_fixed_point(maps: &[&AffineMap]) -> bool {
    let mut rows: Vec<[Q; 3]> = Vec::new();
    for g in maps {
        let l = &g.linear;
        rows.push([Q::one() - &l[0][0], -l[0][1].clone(), g.translation[0].clone()]);
        rows.push([-l[1][0].clone(), Q::one() - &l[1][1], g.translation[1].clone()]);
    }
    // Gaussian elimination on the augmented matrix
    let mut r = 0;
    for col in 0..2 {
        let Some(piv) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, piv);
        let pivot = rows[r].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = &rows[i][col] / &pivot[col];
                for j in 0..3 {
                    rows[i][j] = &rows[i][j] - &f * &pivot[j];
                }
            }
        }
        r += 1;
    }
    rows[r..].iter().all(|row| row[2].is_zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    UaMinus,
    UaInvMinus,
    UaPlus,
    UaInvPlus,
    UbMinus,
    UbInvMinus,
    UbPlus,
    UbInvPlus,
}

/// Which displayed regions serve as repelling/attracting sets for each letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// Letter `u` uses `U_{u^-1}^-` and `U_{u^-1}^+`, matching `a` expanding the `x` axis.
    Dynamic,
    /// Letter `u` uses `U_u^-` and `U_u^+` literally.
    Displayed,
}

impl Pairing {
    /// `(repelling, attracting)` regions of a letter.
    pub fn regions(self, l: Letter) -> (Region, Region) {
        let l = match self {
            Pairing::Dynamic => l.inverse(),
            Pairing::Displayed => l,
        };
        match l {
            Letter::A => (Region::UaMinus, Region::UaPlus),
            Letter::AInv => (Region::UaInvMinus, Region::UaInvPlus),
            Letter::B => (Region::UbMinus, Region::UbPlus),
            Letter::BInv => (Region::UbInvMinus, Region::UbInvPlus),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PingPongPair {
    pub l: Q,
    pub h: AffineMap,
    h_inv: AffineMap,
    pub a: AffineMap,
    pub b: AffineMap,
    a_inv: AffineMap,
    b_inv: AffineMap,
}

fn pow(x: &Q, e: i32) -> Q {
    let mut acc = Q::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// Checks the genericity of `h` and returns `(a, h a h^-1)`.
pub fn build_pair(l: Q, h: AffineMap) -> Result<PingPongPair, PingPongError> {
    if l.abs() <= Q::one() {
        return Err(PingPongError::BadL);
    }
    AffineMap::new(h.linear.clone(), h.translation.clone())?;
    let mut failed = Vec::new();
    let o = &h.translation;
    if o[0].is_zero() && o[1].is_zero() {
        failed.push("h(0) = 0");
    }
    if o[0].is_zero() || o[1].is_zero() {
        failed.push("h(0) lies on an a-invariant axis");
    }
    for col in 0..2 {
        let d = [&h.linear[0][col], &h.linear[1][col]];
        if d[0].is_zero() || d[1].is_zero() {
            failed.push("an h-image of an axis is parallel to an axis");
        }
        if (&o[0] * d[1] - &o[1] * d[0]).is_zero() {
            failed.push("an h-image of an axis passes through 0");
        }
    }
    if !failed.is_empty() {
        failed.dedup();
        return Err(PingPongError::NonGenericConjugator(failed.join("; ")));
    }
    let zero = Q::zero();
    let a = AffineMap {
        linear: [[pow(&l, 10), zero.clone()], [zero.clone(), pow(&l, -10)]],
        translation: [zero.clone(), zero],
    };
    let h_inv = h.inverse();
    let b = h.compose(&a).compose(&h_inv);
    Ok(PingPongPair {
        a_inv: a.inverse(),
        b_inv: b.inverse(),
        l,
        h,
        h_inv,
        a,
        b,
    })
}

/// The pinned demonstration pair: `L = 100`, `h = t_(1,2) o [[3/5, -4/5], [4/5, 3/5]]`.
pub fn pinned_pair() -> PingPongPair {
    let h = AffineMap::new(
        [[rat(3, 5), rat(-4, 5)], [rat(4, 5), rat(3, 5)]],
        [rat(1, 1), rat(2, 1)],
    )
    .expect("rotation has determinant 1");
    build_pair(rat(100, 1), h).expect("pinned pair is generic")
}

impl PingPongPair {
    pub fn letter(&self, l: Letter) -> &AffineMap {
        match l {
            Letter::A => &self.a,
            Letter::B => &self.b,
            Letter::AInv => &self.a_inv,
            Letter::BInv => &self.b_inv,
        }
    }

    /// `w(a, b)`, the leftmost letter applied last.
    pub fn eval(&self, w: &Word) -> AffineMap {
        w.letters()
            .iter()
            .fold(AffineMap::identity(), |acc, &l| acc.compose(self.letter(l)))
    }

    pub fn region_member(&self, p: &Point, r: Region) -> bool {
        region_member(p, r, &self.l, &self.h_inv)
    }

    /// Union of the four repelling regions.
    pub fn in_omega_minus(&self, p: &Point) -> bool {
        [Region::UaMinus, Region::UaInvMinus, Region::UbMinus, Region::UbInvMinus]
            .iter()
            .any(|&r| self.region_member(p, r))
    }
}

/// Exact membership; `h_inv` pulls `b` regions back to `a` regions.
pub fn region_member(p: &Point, r: Region, l: &Q, h_inv: &AffineMap) -> bool {
    let l = l.abs();
    let small = |p: &Point| norm(p) < l.recip();
    let a_minus = |p: &Point| small(p) || p[0].abs() > &l * p[1].abs();
    let a_inv_minus = |p: &Point| small(p) || p[1].abs() > &l * p[0].abs();
    let a_plus = |p: &Point| {
        let m = std::cmp::max(&l * p[0].abs(), l.clone());
        p[1].abs() > m
    };
    let a_inv_plus = |p: &Point| {
        let m = std::cmp::max(&l * p[1].abs(), l.clone());
        p[0].abs() > m
    };
    match r {
        Region::UaMinus => a_minus(p),
        Region::UaInvMinus => a_inv_minus(p),
        Region::UaPlus => a_plus(p),
        Region::UaInvPlus => a_inv_plus(p),
        Region::UbMinus => a_minus(&h_inv.apply(p)),
        Region::UbInvMinus => a_inv_minus(&h_inv.apply(p)),
        Region::UbPlus => a_plus(&h_inv.apply(p)),
        Region::UbInvPlus => a_inv_plus(&h_inv.apply(p)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub points: usize,
    /// (letter, point) pairs where the point lay outside the repelling region.
    pub mapping_checks: usize,
    pub containment_checks: usize,
}

/// Grid points plus points on either side of every region boundary, and their `h`-images.
pub fn default_samples(pair: &PingPongPair) -> Vec<Point> {
    let l = pair.l.abs();
    let mut base: Vec<Point> = Vec::new();
    let vals: Vec<Q> = [-7i64, -3, -1, 0, 1, 2, 5]
        .iter()
        .flat_map(|&n| [rat(n, 1), rat(n, 3), rat(n, 1000)])
        .collect();
    for x in &vals {
        for y in &vals {
            base.push([x.clone(), y.clone()]);
        }
    }
    let eps = rat(1, 1_000_000);
    for t in [rat(1, 7), rat(1, 1), rat(13, 1), &l * &l] {
        for s in [Q::one(), -Q::one()] {
            let near = [&l * &t + &eps * &s, t.clone()];
            base.push(near.clone());
            base.push([near[1].clone(), near[0].clone()]);
            base.push([l.recip() + &eps * &s, rat(0, 1)]);
            base.push([rat(0, 1), l.recip() - &eps * &s]);
            base.push([&l + &eps * &s, rat(0, 1)]);
            base.push([rat(0, 1), &l + &eps * &s]);
        }
    }
    let mut out: Vec<Point> = base.iter().map(|p| pair.h.apply(p)).collect();
    out.extend(base);
    let mut seen = HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    out
}

/// For every sample `p` and letter `u` with `p` outside the repelling region of `u`: `u p`
/// lies in the attracting region of `u` and `||u p|| > ||p||`. Also checks that each
/// attracting region of `u` sits inside the repelling region of `u^-1` at the samples.
pub fn verify_inclusions(
    pair: &PingPongPair,
    samples: &[Point],
    pairing: Pairing,
) -> Result<InclusionReport, PingPongError> {
    let fail = |p: &Point, l: Letter, what: &str| PingPongError::InclusionFailed {
        x: p[0].to_string(),
        y: p[1].to_string(),
        letter: l.to_char(),
        what: what.to_string(),
    };
    let mut mapping = 0;
    let mut containment = 0;
    for p in samples {
        for l in Letter::ALL {
            let (minus, plus) = pairing.regions(l);
            let (inv_minus, _) = pairing.regions(l.inverse());
            if pair.region_member(p, plus) {
                containment += 1;
                if !pair.region_member(p, inv_minus) {
                    return Err(fail(p, l, "attracting region not inside the inverse's repelling region"));
                }
            }
            if pair.region_member(p, minus) {
                continue;
            }
            mapping += 1;
            let q = pair.letter(l).apply(p);
            if !pair.region_member(&q, plus) {
                return Err(fail(p, l, "image outside the attracting region"));
            }
            if norm(&q) <= norm(p) {
                return Err(fail(p, l, "norm did not grow"));
            }
        }
    }
    Ok(InclusionReport {
        points: samples.len(),
        mapping_checks: mapping,
        containment_checks: containment,
    })
}

/// A point outside every repelling region, searched over a small grid.
pub fn base_point(pair: &PingPongPair) -> Point {
    for n in 1..200i64 {
        for d in [1i64, 2, 3, 7] {
            for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1), (1, 0), (0, 1)] {
                let p = [rat(sx * n, d), rat(sy * (n + 1), d)];
                if !pair.in_omega_minus(&p) {
                    return p;
                }
            }
        }
    }
    panic!("no base point outside the repelling regions");
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub max_len: usize,
    pub words_checked: usize,
    pub all_nontrivial: bool,
    pub counterexample: Option<String>,
    pub base_point: [String; 2],
}

/// Largest word length accepted by [`freeness_certificate`].
pub const MAX_CERT_LEN: usize = 12;

/// Evaluates every nonempty reduced word of length at most `max_len` and checks that it moves
/// the base point and is not the identity map.
pub fn freeness_certificate(pair: &PingPongPair, max_len: usize) -> Result<FreenessReport, PingPongError> {
    if max_len > MAX_CERT_LEN {
        return Err(PingPongError::TooLong(max_len, MAX_CERT_LEN));
    }
    let p = base_point(pair);
    // one subtree per first letter, run in parallel; each subtree is a depth-first walk
    let results: Vec<(usize, Option<String>)> = Letter::ALL
        .par_iter()
        .map(|&first| {
            if max_len == 0 {
                return (0, None);
            }
            let mut count = 0;
            let mut stack = vec![(Word::new(vec![first]), pair.letter(first).clone())];
            while let Some((w, m)) = stack.pop() {
                count += 1;
                if m.is_identity() || m.apply(&p) == p {
                    return (count, Some(w.to_string()));
                }
                if w.len() < max_len {
                    let last = w.last().expect("nonempty");
                    for l in Letter::ALL.iter().rev() {
                        if *l != last.inverse() {
                            let mut w2 = w.clone();
                            w2.push(*l);
                            stack.push((w2, m.compose(pair.letter(*l))));
                        }
                    }
                }
            }
            (count, None)
        })
        .collect();
    let words_checked = results.iter().map(|r| r.0).sum();
    let counterexample = results.into_iter().find_map(|r| r.1);
    Ok(FreenessReport {
        max_len,
        words_checked,
        all_nontrivial: counterexample.is_none(),
        counterexample,
        base_point: [p[0].to_string(), p[1].to_string()],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCommutativityReport {
    pub word_len: usize,
    pub triples_checked: usize,
    pub rejected_triples: usize,
    pub common_fixed_points: usize,
    pub containment_checked: usize,
    pub containment_failures: usize,
    pub pass: bool,
}

/// Largest word length accepted by [`locally_commutative_check`].
pub const MAX_TRIPLE_LEN: usize = 10;

/// Random triples of reduced words with pairwise distinct last letters never share a fixed
/// point, and each unique fixed point lies in the repelling region of the word's last letter.
pub fn locally_commutative_check(
    pair: &PingPongPair,
    word_len: usize,
    trials: usize,
    seed: u64,
) -> Result<LocalCommutativityReport, PingPongError> {
    if word_len > MAX_TRIPLE_LEN {
        return Err(PingPongError::TooLong(word_len, MAX_TRIPLE_LEN));
    }
    let word_len = word_len.max(1);
    let parts = chunked(seed, 0, trials, |rng, count| {
        let (mut rejected, mut common, mut cont, mut cont_fail) = (0, 0, 0, 0);
        let mut done = 0;
        while done < count {
            let ws: Vec<Word> = (0..3)
                .map(|_| sample_reduced_word(rng.gen_range(1..=word_len), rng))
                .collect();
            let last: HashSet<Letter> = ws.iter().filter_map(|w| w.last()).collect();
            if last.len() < 3 {
                rejected += 1;
                continue;
            }
            done += 1;
            let maps: Vec<AffineMap> = ws.iter().map(|w| pair.eval(w)).collect();
            if common_fixed_point(&maps.iter().collect::<Vec<_>>()) {
                common += 1;
            }
            for (w, m) in ws.iter().zip(&maps) {
                if let FixedPoint::Unique(x) = fixed_point(m) {
                    cont += 1;
                    let (minus, _) = Pairing::Dynamic.regions(w.last().expect("nonempty"));
                    if !pair.region_member(&x, minus) {
                        cont_fail += 1;
                    }
                }
            }
        }
        (rejected, common, cont, cont_fail)
    });
    let (rejected, common, cont, cont_fail) = parts
        .into_iter()
        .fold((0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    Ok(LocalCommutativityReport {
        word_len,
        triples_checked: trials,
        rejected_triples: rejected,
        common_fixed_points: common,
        containment_checked: cont,
        containment_failures: cont_fail,
        pass: common == 0 && cont_fail == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub words: usize,
    pub with_unique_fixed_point: usize,
    pub failures: usize,
}

/// Fixed points of random reduced words lie in the repelling region of their last letter.
pub fn containment_check(pair: &PingPongPair, max_len: usize, words: usize, seed: u64) -> ContainmentReport {
    let mut rng = stream_rng(seed, 0);
    let (mut uniq, mut fail) = (0, 0);
    for _ in 0..words {
        let w = sample_reduced_word(rng.gen_range(1..=max_len.max(1)), &mut rng);
        if let FixedPoint::Unique(x) = fixed_point(&pair.eval(&w)) {
            uniq += 1;
            let (minus, _) = Pairing::Dynamic.regions(w.last().expect("nonempty"));
            if !pair.region_member(&x, minus) {
                fail += 1;
            }
        }
    }
    ContainmentReport {
        words,
        with_unique_fixed_point: uniq,
        failures: fail,
    }
}

/// Smallest `L` among `candidates` (tried in order) for which the inclusions hold at the
/// default samples and all reduced words up to `max_len` act nontrivially.
pub fn find_working_l(h: &AffineMap, candidates: &[Q], max_len: usize) -> Option<Q> {
    candidates.iter().find_map(|l| {
        let pair = build_pair(l.clone(), h.clone()).ok()?;
        verify_inclusions(&pair, &default_samples(&pair), Pairing::Dynamic).ok()?;
        freeness_certificate(&pair, max_len).ok()?.all_nontrivial.then(|| l.clone())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: Q, y: Q) -> Point {
        [x, y]
    }

    #[test]
    fn affine_algebra() {
        let pair = pinned_pair();
        let id = AffineMap::identity();
        assert_eq!(pair.a.compose(&pair.a.inverse()), id);
        assert_eq!(pair.b.compose(&pair.b.inverse()), id);
        assert_eq!(pair.h.compose(&pair.h.inverse()), id);
        let q = p(rat(3, 7), rat(-2, 9));
        assert_eq!(pair.b.apply(&q), pair.h.apply(&pair.a.apply(&pair.h.inverse().apply(&q))));
        assert!(AffineMap::new([[rat(2, 1), Q::zero()], [Q::zero(), rat(1, 1)]], [Q::zero(), Q::zero()]).is_err());
    }

    #[test]
    fn build_pair_preconditions() {
        let h = pinned_pair().h;
        assert_eq!(build_pair(rat(1, 1), h.clone()).unwrap_err(), PingPongError::BadL);
        assert!(matches!(
            build_pair(rat(100, 1), AffineMap::identity()),
            Err(PingPongError::NonGenericConjugator(_))
        ));
        // translation along the x axis puts x(b) on an a-invariant line
        let on_axis = AffineMap {
            translation: [rat(1, 1), rat(0, 1)],
            ..h.clone()
        };
        assert!(build_pair(rat(100, 1), on_axis).is_err());
        let parallel = AffineMap::translation([rat(1, 1), rat(2, 1)]);
        assert!(build_pair(rat(100, 1), parallel).is_err());
    }

    #[test]
    fn fixed_points() {
        let pair = pinned_pair();
        assert_eq!(fixed_point(&pair.a), FixedPoint::Unique(p(rat(0, 1), rat(0, 1))));
        assert_eq!(fixed_point(&pair.b), FixedPoint::Unique(pair.h.apply(&p(rat(0, 1), rat(0, 1)))));
        assert_eq!(fixed_point(&pair.b), FixedPoint::Unique(p(rat(1, 1), rat(2, 1))));
        let unip = AffineMap::new([[rat(1, 1), rat(1, 1)], [rat(0, 1), rat(1, 1)]], [rat(0, 1), rat(1, 1)]).unwrap();
        assert_eq!(fixed_point(&unip), FixedPoint::NoUniqueFixedPoint);
        assert!(common_fixed_point(&[&pair.a, &pair.a.inverse()]));
        assert!(!common_fixed_point(&[&pair.a, &pair.b]));
        assert!(!common_fixed_point(&[&unip]));
    }

    #[test]
    fn region_examples() {
        let pair = pinned_pair();
        assert!(pair.region_member(&p(rat(0, 1), rat(0, 1)), Region::UaMinus));
        let two = build_pair(rat(2, 1), pair.h.clone()).unwrap();
        assert!(two.region_member(&p(rat(4, 1), rat(1, 1)), Region::UaInvPlus));
        assert!(!two.region_member(&p(rat(1, 1), rat(1, 1)), Region::UaPlus));
        let o = pair.h.apply(&p(rat(0, 1), rat(0, 1)));
        assert!(pair.region_member(&o, Region::UbMinus));
        assert!(!pair.region_member(&o, Region::UaMinus));
    }

    #[test]
    fn displayed_pairing_fails_on_an_axis_point() {
        let pair = pinned_pair();
        let q = p(rat(0, 1), rat(1, 1));
        assert!(!pair.region_member(&q, Region::UaMinus));
        let err = verify_inclusions(&pair, &[q.clone()], Pairing::Displayed).unwrap_err();
        assert!(matches!(err, PingPongError::InclusionFailed { letter: 'a', .. }));
        assert!(verify_inclusions(&pair, &[q], Pairing::Dynamic).is_ok());
    }

    #[test]
    fn pinned_pair_inclusions_hold() {
        let pair = pinned_pair();
        let samples = default_samples(&pair);
        let rep = verify_inclusions(&pair, &samples, Pairing::Dynamic).unwrap();
        assert!(rep.mapping_checks > samples.len());
        assert!(rep.containment_checks > 0);
    }

    #[test]
    fn short_words_are_nontrivial() {
        let pair = pinned_pair();
        let rep = freeness_certificate(&pair, 6).unwrap();
        assert!(rep.all_nontrivial);
        assert_eq!(rep.words_checked, (1..=6).map(|n| 4 * 3usize.pow(n - 1)).sum::<usize>());
        let comm: Word = "abAB".parse().unwrap();
        assert!(!pair.eval(&comm).is_identity());
        assert!(!pair.a.is_identity() && !pair.b.is_identity());
        assert!(freeness_certificate(&pair, 13).is_err());
        let base = base_point(&pair);
        assert!(!pair.in_omega_minus(&base));
    }

    #[test]
    fn triples_and_containment() {
        let pair = pinned_pair();
        let rep = locally_commutative_check(&pair, 6, 200, 3).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.rejected_triples > 0);
        let c = containment_check(&pair, 6, 200, 4);
        assert_eq!(c.failures, 0);
        assert!(c.with_unique_fixed_point > 150);
        // (a, b, a^-1): a and a^-1 share 0, b does not fix it
        assert!(!common_fixed_point(&[&pair.a, &pair.b, &pair.a.inverse()]));
    }

    #[test]
    fn small_l_breaks_something() {
        let h = pinned_pair().h;
        let found = find_working_l(&h, &[rat(11, 10), rat(2, 1), rat(100, 1)], 4).unwrap();
        assert!(found <= rat(100, 1));
        let weak = build_pair(rat(11, 10), h).unwrap();
        assert!(verify_inclusions(&weak, &default_samples(&weak), Pairing::Dynamic).is_err());
    }
}
