// SPDX-License-Identifier: Apache-2.0

//! Empirical non-concentration: how often random words in a pair land in a subfield
//! subgroup, a reducible subgroup, or a diagonal of `S x S`, plus an exact span certificate.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::group::{Family, GroupCtx, GroupElem, GroupError};
use crate::seeding::{bernoulli_summary, chunked, stream_rng};
use crate::words::{commute_in_free_group, sample_word, Substitution, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NonconcError {
    #[error("the field has no proper subfield of index {j} (degree {k})")]
    NoProperSubfield { j: usize, k: usize },
    #[error("operation needs SL_2, got {0}")]
    UnsupportedFamily(String),
    #[error("polynomial degree {0} exceeds the supported maximum 3")]
    DegreeTooLarge(usize),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrapFamily {
    /// Characteristic polynomial defined over the subfield of index `j`.
    Subfield(usize),
    StructuralSL2,
    XNCert,
    ProductDiagonal,
}

impl std::fmt::Display for TrapFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrapFamily::Subfield(j) => write!(f, "subfield{j}"),
            TrapFamily::StructuralSL2 => write!(f, "structural_sl2"),
            TrapFamily::XNCert => write!(f, "xn_cert"),
            TrapFamily::ProductDiagonal => write!(f, "product_diagonal"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapReport {
    pub family: TrapFamily,
    pub n: usize,
    /// Samples drawn.
    pub samples: usize,
    /// Samples counted towards the fraction (degenerate or filtered samples excluded).
    pub effective: usize,
    pub trapped: usize,
    pub trapped_fraction: f64,
    pub stderr: f64,
    /// Unipotent hits (subfield test) or free-group commuting pairs (structural test).
    pub degenerate: usize,
    pub degenerate_fraction: f64,
    pub gamma: f64,
    /// `|G|^{-gamma}`.
    pub threshold: f64,
    pub pass: bool,
}

/// Default exponent in the `|G|^{-gamma}` threshold.
pub const DEFAULT_GAMMA: f64 = 0.05;
/// Default constant in `n = 2 floor(c0 log|G|)`.
pub const DEFAULT_C0: f64 = 2.0;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// `2 floor(c0 ln|G|)`.
pub fn word_length(order: &BigUint, c0: f64) -> usize {
    let ln = order
        .to_f64()
        .map(f64::ln)
        .unwrap_or_else(|| order.bits() as f64 * std::f64::consts::LN_2);
    2 * (c0 * ln).floor().max(0.0) as usize
}

/// `|G|^{-gamma}`.
pub fn threshold(order: &BigUint, gamma: f64) -> f64 {
    let ln = order.to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    (-gamma * ln).exp()
}

fn report(
    ctx: &GroupCtx,
    family: TrapFamily,
    n: usize,
    samples: usize,
    trapped: usize,
    degenerate: usize,
    gamma: f64,
) -> TrapReport {
    let effective = samples - degenerate;
    let (frac, se) = if effective == 0 {
        (0.0, 0.0)
    } else {
        bernoulli_summary(trapped as u64, effective as u64)
    };
    let t = threshold(ctx.order(), gamma);
    TrapReport {
        family,
        n,
        samples,
        effective,
        trapped,
        trapped_fraction: frac,
        stderr: se,
        degenerate,
        degenerate_fraction: if samples == 0 {
            0.0
        } else {
            degenerate as f64 / samples as f64
        },
        gamma,
        threshold: t,
        pass: frac <= t,
    }
}

fn require_sl2(ctx: &GroupCtx) -> Result<(), NonconcError> {
    if ctx.family() != Family::SL(2) {
        return Err(NonconcError::UnsupportedFamily(ctx.family().to_string()));
    }
    Ok(())
}

/// Counts `(trapped, degenerate)` over `samples` words with a per-element classifier.
fn count_words<F>(
    ctx: &GroupCtx,
    a: &GroupElem,
    b: &GroupElem,
    n: usize,
    samples: usize,
    seed: u64,
    classify: F,
) -> Result<(usize, usize), NonconcError>
where
    F: Fn(&GroupElem) -> Option<bool> + Sync,
{
    let sub = Substitution::new(ctx, a, b)?;
    let parts = chunked(seed, 0, samples, |rng, count| {
        let (mut t, mut d) = (0usize, 0usize);
        for _ in 0..count {
            let g = sub.eval(ctx, &sample_word(n, rng));
            match classify(&g) {
                None => d += 1,
                Some(true) => t += 1,
                Some(false) => {}
            }
        }
        (t, d)
    });
    Ok(parts
        .into_iter()
        .fold((0, 0), |(t, d), (t2, d2)| (t + t2, d + d2)))
}

/// Fraction of words whose evaluation has every characteristic-polynomial coefficient in the
/// subfield of index `j`. Unipotent evaluations are counted separately and excluded.
pub fn trap_subfield(
    ctx: &GroupCtx,
    a: &GroupElem,
    b: &GroupElem,
    n: usize,
    samples: usize,
    j: usize,
    gamma: f64,
    seed: u64,
) -> Result<TrapReport, NonconcError> {
    let k = ctx.field().degree();
    if j <= 1 || k % j != 0 {
        return Err(NonconcError::NoProperSubfield { j, k });
    }
    let f = ctx.field();
    let (t, d) = count_words(ctx, a, b, n, samples, seed, |g| {
        if ctx.unipotent_test(g) {
            return None;
        }
        Some(
            ctx.char_poly_coeffs(g)
                .into_iter()
                .all(|c| f.subfield_member(c, j).expect("j divides k")),
        )
    })?;
    Ok(report(ctx, TrapFamily::Subfield(j), n, samples, t, d, gamma))
}

/// Pairs of words `(w, w')` not commuting in the free group whose evaluations generate a
/// reducible subgroup of `SL_2`, decided by `tr[w(a,b), w'(a,b)] = 2`.
pub fn trap_structural_sl2(
    ctx: &GroupCtx,
    a: &GroupElem,
    b: &GroupElem,
    n: usize,
    samples: usize,
    gamma: f64,
    seed: u64,
) -> Result<TrapReport, NonconcError> {
    require_sl2(ctx)?;
    let sub = Substitution::new(ctx, a, b)?;
    let two = ctx.field().from_int(2);
    let parts = chunked(seed, 0, samples, |rng, count| {
        let (mut t, mut d) = (0usize, 0usize);
        for _ in 0..count {
            let w = sample_word(n, rng);
            let w2 = sample_word(n, rng);
            if commute_in_free_group(&w, &w2) {
                d += 1;
                continue;
            }
            let c = ctx.commutator(&sub.eval(ctx, &w), &sub.eval(ctx, &w2));
            if ctx.trace(&c) == two {
                t += 1;
            }
        }
        (t, d)
    });
    let (t, d) = parts
        .into_iter()
        .fold((0, 0), |(t, d), (t2, d2)| (t + t2, d + d2));
    Ok(report(ctx, TrapFamily::StructuralSL2, n, samples, t, d, gamma))
}

/// Words with `tr w(a1, b1) = tr w(a2, b2)`: a trace proxy for `w(b1, b2)` lying in
/// an automorphism-twisted diagonal of `S x S`.
pub fn product_diag_trap(
    ctx: &GroupCtx,
    a: (&GroupElem, &GroupElem),
    b: (&GroupElem, &GroupElem),
    n: usize,
    samples: usize,
    gamma: f64,
    seed: u64,
) -> Result<TrapReport, NonconcError> {
    require_sl2(ctx)?;
    let s1 = Substitution::new(ctx, a.0, b.0)?;
    let s2 = Substitution::new(ctx, a.1, b.1)?;
    let parts = chunked(seed, 0, samples, |rng, count| {
        (0..count)
            .filter(|_| {
                let w = sample_word(n, rng);
                ctx.trace(&s1.eval(ctx, &w)) == ctx.trace(&s2.eval(ctx, &w))
            })
            .count()
    });
    let t = parts.into_iter().sum();
    // the product group has order |S|^2
    let mut rep = report(ctx, TrapFamily::ProductDiagonal, n, samples, t, 0, gamma);
    rep.threshold = threshold(&(ctx.order() * ctx.order()), gamma);
    rep.pass = rep.trapped_fraction <= rep.threshold;
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum XnVerdict {
    ProperTrap,
    SpansFull,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XnReport {
    pub verdict: XnVerdict,
    pub degree: usize,
    /// `dim V` for polynomials of degree at most `degree` in the four matrix entries.
    pub dim_v: usize,
    pub span_dim: usize,
    pub full_dim: usize,
    /// Smallest `n` with `span rho(B_{n+1}) = span rho(B_n)`.
    pub stabilized_at: usize,
}

/// Exponent vectors of degree at most `d` in the entries `x00, x01, x10, x11`.
fn monomials(d: usize) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for total in 0..=d {
        for e0 in (0..=total).rev() {
            for e1 in (0..=total - e0).rev() {
                for e2 in (0..=total - e0 - e1).rev() {
                    let e3 = total - e0 - e1 - e2;
                    out.push([e0 as u8, e1 as u8, e2 as u8, e3 as u8]);
                }
            }
        }
    }
    out
}

struct Representation<'a> {
    field: &'a FieldCtx,
    monos: Vec<[u8; 4]>,
    index: HashMap<[u8; 4], usize>,
}

impl<'a> Representation<'a> {
    fn new(field: &'a FieldCtx, d: usize) -> Self {
        let monos = monomials(d);
        let index = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        Representation { field, monos, index }
    }

    fn dim(&self) -> usize {
        self.monos.len()
    }

    /// Matrix of `P(X) -> P(g^-1 X)`, column `j` the image of monomial `j`, row-major.
    fn matrix(&self, ctx: &GroupCtx, g: &GroupElem) -> Vec<FieldElem> {
        let f = self.field;
        let h = ctx.inv(g);
        let n = self.dim();
        // (hX)_{rc} = h_{r0} x_{0c} + h_{r1} x_{1c}; variable (r, c) has index 2r + c
        let forms: Vec<[(usize, FieldElem); 2]> = (0..4)
            .map(|v| {
                let (r, c) = (v / 2, v % 2);
                [(c, h.get(r, 0)), (2 + c, h.get(r, 1))]
            })
            .collect();
        let mut m = vec![FieldElem::ZERO; n * n];
        for (j, mono) in self.monos.iter().enumerate() {
            let mut poly: HashMap<[u8; 4], FieldElem> = HashMap::from([([0u8; 4], FieldElem::ONE)]);
            for (v, &e) in mono.iter().enumerate() {
                for _ in 0..e {
                    let mut next: HashMap<[u8; 4], FieldElem> = HashMap::new();
                    for (exp, c) in &poly {
                        for &(var, coef) in &forms[v] {
                            if coef.is_zero() {
                                continue;
                            }
                            let mut e2 = *exp;
                            e2[var] += 1;
                            let slot = next.entry(e2).or_insert(FieldElem::ZERO);
                            *slot = f.add(*slot, f.mul(*c, coef));
                        }
                    }
                    poly = next;
                }
            }
            for (exp, c) in poly {
                if !c.is_zero() {
                    m[self.index[&exp] * n + j] = c;
                }
            }
        }
        m
    }
}

/// Row-reduced basis of a subspace of `F_q^len`.
struct Span<'a> {
    field: &'a FieldCtx,
    rows: Vec<(usize, Vec<FieldElem>)>,
}

impl<'a> Span<'a> {
    fn new(field: &'a FieldCtx) -> Self {
        Span { field, rows: Vec::new() }
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Adds `v`; returns whether the dimension grew.
    fn insert(&mut self, mut v: Vec<FieldElem>) -> bool {
        let f = self.field;
        for (p, row) in &self.rows {
            let c = v[*p];
            if !c.is_zero() {
                for (x, r) in v.iter_mut().zip(row) {
                    if !r.is_zero() {
                        *x = f.sub(*x, f.mul(c, *r));
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = f.inv(v[p]);
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[p];
            if !c.is_zero() {
                for (x, r) in row.iter_mut().zip(&v) {
                    if !r.is_zero() {
                        *x = f.sub(*x, f.mul(c, *r));
                    }
                }
            }
        }
        self.rows.push((p, v));
        true
    }
}

fn matmul(f: &FieldCtx, a: &[FieldElem], b: &[FieldElem], n: usize) -> Vec<FieldElem> {
    let mut out = vec![FieldElem::ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x.is_zero() {
                continue;
            }
            for j in 0..n {
                let y = b[k * n + j];
                if !y.is_zero() {
                    out[i * n + j] = f.add(out[i * n + j], f.mul(x, y));
                }
            }
        }
    }
    out
}

/// Compares `span rho(<x, y>)` with `span rho(G)` for the left-translation action of `SL_2` on
/// polynomials of degree at most `d` in the matrix entries.
pub fn xn_certificate(
    ctx: &GroupCtx,
    x: &GroupElem,
    y: &GroupElem,
    d: usize,
    seed: u64,
) -> Result<XnReport, NonconcError> {
    require_sl2(ctx)?;
    if d > 3 {
        return Err(NonconcError::DegreeTooLarge(d));
    }
    let f = ctx.field();
    let rep = Representation::new(f, d);
    let n = rep.dim();
    let gens: Vec<Vec<FieldElem>> = [*x, *y, ctx.inv(x), ctx.inv(y)]
        .iter()
        .map(|g| rep.matrix(ctx, g))
        .collect();

    let mut span = Span::new(f);
    let id = rep.matrix(ctx, &ctx.identity());
    span.insert(id.clone());
    let mut frontier = vec![id];
    let mut stabilized_at = 0;
    loop {
        let mut added = Vec::new();
        for m in &frontier {
            for s in &gens {
                let cand = matmul(f, s, m, n);
                if span.insert(cand.clone()) {
                    added.push(cand);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        stabilized_at += 1;
        frontier = added;
    }

    let mut full = Span::new(f);
    let mut rng = stream_rng(seed, 0);
    for _ in 0..4 * n * n {
        full.insert(rep.matrix(ctx, &ctx.random_uniform(&mut rng)));
        if full.dim() == n * n {
            break;
        }
    }
    let verdict = if span.dim() < full.dim() {
        XnVerdict::ProperTrap
    } else {
        XnVerdict::SpansFull
    };
    Ok(XnReport {
        verdict,
        degree: d,
        dim_v: n,
        span_dim: span.dim(),
        full_dim: full.dim(),
        stabilized_at,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonconcConfig {
    pub gamma: f64,
    pub c0: f64,
    pub samples: usize,
    /// Word length; `None` uses `2 floor(c0 ln|G|)`.
    pub n: Option<usize>,
    /// Degree for the span certificate on `SL_2`.
    pub xn_degree: usize,
    pub seed: u64,
}

impl Default for NonconcConfig {
    fn default() -> Self {
        NonconcConfig {
            gamma: DEFAULT_GAMMA,
            c0: DEFAULT_C0,
            samples: DEFAULT_SAMPLES,
            n: None,
            xn_degree: 2,
            seed: 0,
        }
    }
}

/// Every applicable trap test for the pair `(a, b)`.
pub fn nonconc_verdict(
    ctx: &GroupCtx,
    a: &GroupElem,
    b: &GroupElem,
    cfg: &NonconcConfig,
) -> Result<Vec<TrapReport>, NonconcError> {
    let n = cfg.n.unwrap_or_else(|| word_length(ctx.order(), cfg.c0));
    let mut out = Vec::new();
    if !ctx.is_cyclic() {
        let k = ctx.field().degree();
        for j in (2..=k).filter(|j| k % j == 0) {
            out.push(trap_subfield(ctx, a, b, n, cfg.samples, j, cfg.gamma, cfg.seed)?);
        }
    }
    if ctx.family() == Family::SL(2) {
        out.push(trap_structural_sl2(ctx, a, b, n, cfg.samples, cfg.gamma, cfg.seed)?);
        let xn = xn_certificate(ctx, a, b, cfg.xn_degree, cfg.seed)?;
        let trapped = usize::from(xn.verdict == XnVerdict::ProperTrap);
        out.push(report(ctx, TrapFamily::XNCert, n, 1, trapped, 0, cfg.gamma));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{power, generator_measure, Measure};
    use crate::words::Word;
    use num_rational::BigRational;

    fn random_pair(ctx: &GroupCtx, seed: u64) -> (GroupElem, GroupElem) {
        let mut rng = stream_rng(seed, 99);
        (ctx.random_uniform(&mut rng), ctx.random_uniform(&mut rng))
    }

    fn all_words(n: usize) -> impl Iterator<Item = Word> {
        (0..4u64.pow(n as u32)).map(move |i| Word::from_index(n, i))
    }

    #[test]
    fn word_length_default() {
        assert_eq!(word_length(&BigUint::from(120u32), 2.0), 18);
        assert_eq!(word_length(&BigUint::from(1u32), 2.0), 0);
        assert_eq!(threshold(&BigUint::from(1000u32), 0.0), 1.0);
    }

    #[test]
    fn planted_subfield_pair_is_trapped() {
        let ctx = GroupCtx::sl2(5, 2).unwrap();
        let a = ctx.from_ints(&[&[1, 1], &[0, 1]]).unwrap();
        let b = ctx.from_ints(&[&[2, 0], &[1, 3]]).unwrap();
        let rep = trap_subfield(&ctx, &a, &b, 20, 2000, 2, 0.05, 1).unwrap();
        assert_eq!(rep.trapped_fraction, 1.0);
        assert!(!rep.pass);
        assert!(trap_subfield(&ctx, &a, &b, 20, 10, 3, 0.05, 1).is_err());
        let prime = GroupCtx::sl2(5, 1).unwrap();
        let e = prime.identity();
        assert!(matches!(
            trap_subfield(&prime, &e, &e, 2, 10, 2, 0.05, 1),
            Err(NonconcError::NoProperSubfield { .. })
        ));
    }

    #[test]
    fn empty_words_are_degenerate() {
        let ctx = GroupCtx::sl2(3, 2).unwrap();
        let (a, b) = random_pair(&ctx, 2);
        let rep = trap_subfield(&ctx, &a, &b, 0, 100, 2, 0.05, 1).unwrap();
        assert_eq!(rep.trapped, 0);
        assert_eq!(rep.degenerate_fraction, 1.0);
        let s = GroupCtx::sl2(7, 1).unwrap();
        let (a, b) = random_pair(&s, 3);
        let d = product_diag_trap(&s, (&a, &b), (&b, &a), 0, 100, 0.05, 1).unwrap();
        assert_eq!(d.trapped_fraction, 1.0);
    }

    #[test]
    fn planted_borel_pair_is_structurally_trapped() {
        let ctx = GroupCtx::sl2(101, 1).unwrap();
        let a = ctx.from_ints(&[&[3, 5], &[0, 34]]).unwrap();
        let b = ctx.from_ints(&[&[7, 1], &[0, 29]]).unwrap();
        let rep = trap_structural_sl2(&ctx, &a, &b, 20, 2000, 0.05, 4).unwrap();
        assert_eq!(rep.trapped_fraction, 1.0);
        let (x, y) = random_pair(&ctx, 5);
        let rnd = trap_structural_sl2(&ctx, &x, &y, 20, 2000, 0.05, 4).unwrap();
        assert!(rnd.trapped_fraction < 0.05);
        let cyc = GroupCtx::cyclic(5).unwrap();
        let g = cyc.cyclic_elem(1);
        assert!(trap_structural_sl2(&cyc, &g, &g, 2, 1, 0.05, 1).is_err());
    }

    #[test]
    fn commuting_pairs_are_filtered() {
        let ctx = GroupCtx::sl2(7, 1).unwrap();
        let (a, b) = random_pair(&ctx, 6);
        // n = 1: words commute iff they share a generator up to inversion
        let rep = trap_structural_sl2(&ctx, &a, &b, 1, 20_000, 0.05, 7).unwrap();
        assert!((rep.degenerate_fraction - 0.5).abs() < 0.02);
    }

    #[test]
    fn diagonal_pair_is_trapped() {
        let ctx = GroupCtx::sl2(101, 1).unwrap();
        let (a, b) = random_pair(&ctx, 8);
        let rep = product_diag_trap(&ctx, (&a, &a), (&b, &b), 40, 1000, 0.05, 1).unwrap();
        assert_eq!(rep.trapped_fraction, 1.0);
        let (c, d) = random_pair(&ctx, 9);
        let rnd = product_diag_trap(&ctx, (&a, &c), (&b, &d), 40, 5000, 0.05, 1).unwrap();
        assert!(rnd.trapped_fraction < 0.05);
    }

    fn generated_order(ctx: &GroupCtx, x: &GroupElem, y: &GroupElem) -> usize {
        let mut seen = std::collections::HashSet::from([ctx.identity()]);
        let mut stack = vec![ctx.identity()];
        while let Some(g) = stack.pop() {
            for s in [x, y] {
                let h = ctx.mul(&g, s);
                if seen.insert(h) {
                    stack.push(h);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn xn_certificate_cases() {
        let ctx = GroupCtx::sl2(7, 1).unwrap();
        let e = ctx.identity();
        let id = xn_certificate(&ctx, &e, &e, 2, 1).unwrap();
        assert_eq!((id.verdict, id.span_dim, id.dim_v), (XnVerdict::ProperTrap, 1, 15));
        let a = ctx.from_ints(&[&[3, 1], &[0, 5]]).unwrap();
        let b = ctx.from_ints(&[&[1, 4], &[0, 1]]).unwrap();
        let borel = xn_certificate(&ctx, &a, &b, 2, 1).unwrap();
        assert_eq!(borel.verdict, XnVerdict::ProperTrap);
        assert!(borel.span_dim < borel.full_dim);
        let mut found = 0;
        for s in 0..40 {
            let (x, y) = random_pair(&ctx, 100 + s);
            if generated_order(&ctx, &x, &y) == 336 {
                assert_eq!(xn_certificate(&ctx, &x, &y, 2, s).unwrap().verdict, XnVerdict::SpansFull);
                found += 1;
            }
        }
        assert!(found >= 10);
        assert!(matches!(xn_certificate(&ctx, &a, &b, 4, 1), Err(NonconcError::DegreeTooLarge(4))));
    }

    #[test]
    fn xn_certificate_is_conjugation_covariant() {
        let ctx = GroupCtx::sl2(5, 1).unwrap();
        let a = ctx.from_ints(&[&[2, 1], &[0, 3]]).unwrap();
        let b = ctx.from_ints(&[&[1, 3], &[0, 1]]).unwrap();
        let (x, y) = random_pair(&ctx, 11);
        let mut rng = stream_rng(12, 0);
        for (p, q) in [(a, b), (x, y)] {
            let v = xn_certificate(&ctx, &p, &q, 1, 0).unwrap().verdict;
            for _ in 0..20 {
                let h = ctx.random_uniform(&mut rng);
                let w = xn_certificate(&ctx, &ctx.conjugate(&p, &h), &ctx.conjugate(&q, &h), 1, 0)
                    .unwrap()
                    .verdict;
                assert_eq!(v, w);
            }
        }
    }

    #[test]
    fn representation_is_a_homomorphism() {
        let ctx = GroupCtx::sl2(5, 1).unwrap();
        let rep = Representation::new(ctx.field(), 2);
        let (g, h) = random_pair(&ctx, 13);
        let lhs = rep.matrix(&ctx, &ctx.mul(&g, &h));
        let rhs = matmul(ctx.field(), &rep.matrix(&ctx, &g), &rep.matrix(&ctx, &h), rep.dim());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn monotonicity_over_cosets_exhaustive() {
        let ctx = GroupCtx::sl2(3, 1).unwrap();
        let elems = ctx.elements().unwrap();
        let upper = |g: &GroupElem| g.get(1, 0).is_zero();
        for seed in 0..3 {
            let (a, b) = random_pair(&ctx, 20 + seed);
            let mu: Measure<BigRational> = generator_measure(&ctx, &[a, b]).unwrap();
            let sup_coset = |n: usize| {
                let m = power(&ctx, &mu, n).unwrap();
                elems
                    .iter()
                    .map(|g| {
                        let ginv = ctx.inv(g);
                        m.subgroup_mass(&ctx, |x| upper(&ctx.mul(&ginv, x))).unwrap()
                    })
                    .max()
                    .unwrap()
            };
            let in_h = |n: usize| {
                // exhaustive over all 4^n words
                let sub = Substitution::new(&ctx, &a, &b).unwrap();
                let hits = all_words(n).filter(|w| upper(&sub.eval(&ctx, w))).count();
                BigRational::new(hits.into(), 4u64.pow(n as u32).into())
            };
            for n in 0..=6 {
                let s = sup_coset(n);
                for n2 in n..=6 {
                    assert!(in_h(n2) <= s, "n={n} n'={n2}");
                }
            }
        }
    }

    #[test]
    fn estimator_is_unbiased() {
        let ctx = GroupCtx::sl2(3, 1).unwrap();
        let (a1, b1) = random_pair(&ctx, 30);
        let (a2, b2) = random_pair(&ctx, 31);
        let s1 = Substitution::new(&ctx, &a1, &b1).unwrap();
        let s2 = Substitution::new(&ctx, &a2, &b2).unwrap();
        let hits = all_words(6)
            .filter(|w| ctx.trace(&s1.eval(&ctx, w)) == ctx.trace(&s2.eval(&ctx, w)))
            .count();
        let exact = hits as f64 / 4096.0;
        let reps = 100;
        let per = 400;
        let mean = (0..reps)
            .map(|r| {
                product_diag_trap(&ctx, (&a1, &a2), (&b1, &b2), 6, per, 0.05, 1000 + r)
                    .unwrap()
                    .trapped_fraction
            })
            .sum::<f64>()
            / reps as f64;
        let sigma = (exact * (1.0 - exact) / (reps as usize * per) as f64).sqrt();
        assert!((mean - exact).abs() <= 3.0 * sigma + 1e-12, "{mean} vs {exact}");
    }

    #[test]
    fn verdict_aggregates_families() {
        let ctx = GroupCtx::sl2(7, 2).unwrap();
        let a = ctx.from_ints(&[&[1, 1], &[0, 1]]).unwrap();
        let b = ctx.from_ints(&[&[1, 0], &[3, 1]]).unwrap();
        let cfg = NonconcConfig {
            samples: 500,
            ..Default::default()
        };
        let reps = nonconc_verdict(&ctx, &a, &b, &cfg).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().any(|r| !r.pass));
        let vacuous = NonconcConfig {
            gamma: 0.0,
            samples: 500,
            ..Default::default()
        };
        assert!(nonconc_verdict(&ctx, &a, &b, &vacuous).unwrap().iter().all(|r| r.pass));
    }
}
