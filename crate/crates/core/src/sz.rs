// SPDX-License-Identifier: Apache-2.0

//! Exhaustive zero counts of polynomials over `F_q^d` and over finite matrix groups.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bruhat::{cell_elements, weyl_elements, BruhatError};
use crate::field::{FieldCtx, FieldElem};
use crate::group::{GroupCtx, GroupElem, GroupError};

#[derive(Debug, Error)]
pub enum SzError {
    #[error("{points} evaluation points exceed the cap {cap}")]
    TooLarge { points: u128, cap: u128 },
    #[error("polynomial has {got} variables, expected {expected}")]
    VariableCount { got: usize, expected: usize },
    #[error("coefficient code {0} is not a field element")]
    BadCoefficient(u64),
    #[error("bound violated: {count} zeros > {bound}")]
    BoundViolated { count: u64, bound: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Bruhat(#[from] BruhatError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
    #[error("corpus: {0}")]
    Json(#[from] serde_json::Error),
}

pub const AFFINE_CAP: u128 = 100_000_000;
pub const GROUP_CAP: u128 = 10_000_000;
pub const PAIR_CAP: u128 = 100_000_000;

/// A polynomial with coefficients in a fixed field, terms sorted by exponent vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly {
    pub variables: usize,
    pub terms: Vec<(FieldElem, Vec<u32>)>,
    #[serde(skip)]
    degree: u32,
}

impl Poly {
    /// Merges repeated monomials and drops zero coefficients.
    pub fn new(ctx: &FieldCtx, variables: usize, terms: Vec<(FieldElem, Vec<u32>)>) -> Result<Self, SzError> {
        let mut acc: BTreeMap<Vec<u32>, FieldElem> = BTreeMap::new();
        for (c, e) in terms {
            if c.code() >= ctx.size() {
                return Err(SzError::BadCoefficient(c.code()));
            }
            if e.len() != variables {
                return Err(SzError::VariableCount { got: e.len(), expected: variables });
            }
            let slot = acc.entry(e).or_insert(FieldElem::ZERO);
            *slot = ctx.add(*slot, c);
        }
        let terms: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (c, e)).collect();
        let degree = terms.iter().map(|(_, e)| e.iter().sum::<u32>()).max().unwrap_or(0);
        Ok(Poly { variables, terms, degree })
    }

    /// Re-normalizes after deserialization.
    pub fn normalized(self, ctx: &FieldCtx) -> Result<Self, SzError> {
        Poly::new(ctx, self.variables, self.terms)
    }

    pub fn zero(variables: usize) -> Self {
        Poly { variables, terms: Vec::new(), degree: 0 }
    }

    pub fn constant(ctx: &FieldCtx, variables: usize, c: FieldElem) -> Self {
        Poly::new(ctx, variables, vec![(c, vec![0; variables])]).expect("valid constant")
    }

    pub fn var(ctx: &FieldCtx, variables: usize, i: usize) -> Self {
        let mut e = vec![0; variables];
        e[i] = 1;
        Poly::new(ctx, variables, vec![(ctx.one(), e)]).expect("valid variable")
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Poly::new(ctx, self.variables, terms).expect("same shape")
    }

    pub fn sub(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        self.add(ctx, &other.scale(ctx, ctx.neg(ctx.one())))
    }

    pub fn scale(&self, ctx: &FieldCtx, c: FieldElem) -> Poly {
        let terms = self.terms.iter().map(|(a, e)| (ctx.mul(*a, c), e.clone())).collect();
        Poly::new(ctx, self.variables, terms).expect("same shape")
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Poly) -> Poly {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, e) in &self.terms {
            for (b, f) in &other.terms {
                let g = e.iter().zip(f).map(|(x, y)| x + y).collect();
                terms.push((ctx.mul(*a, *b), g));
            }
        }
        Poly::new(ctx, self.variables, terms).expect("same shape")
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &[FieldElem]) -> FieldElem {
        let mut acc = ctx.zero();
        for (c, e) in &self.terms {
            let mut t = *c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t = ctx.mul(t, ctx.pow(*xi, k as u128));
                }
            }
            acc = ctx.add(acc, t);
        }
        acc
    }
}

/// Matrix-entry variable `g_ij` of copy `copy` (0 for `a`, 1 for `b`) in `copies * m^2`
/// variables.
pub fn entry_var(ctx: &FieldCtx, m: usize, copies: usize, copy: usize, i: usize, j: usize) -> Poly {
    Poly::var(ctx, copies * m * m, copy * m * m + i * m + j)
}

/// Entry `(i, j)` of the matrix product of copies `0` and `1`.
pub fn product_entry(ctx: &FieldCtx, m: usize, i: usize, j: usize, swap: bool) -> Poly {
    let (l, r) = if swap { (1, 0) } else { (0, 1) };
    (0..m).fold(Poly::zero(2 * m * m), |acc, k| {
        acc.add(ctx, &entry_var(ctx, m, 2, l, i, k).mul(ctx, &entry_var(ctx, m, 2, r, k, j)))
    })
}

/// Trace of the matrix in copy `copy`.
pub fn trace_poly(ctx: &FieldCtx, m: usize, copies: usize, copy: usize) -> Poly {
    (0..m).fold(Poly::zero(copies * m * m), |acc, i| acc.add(ctx, &entry_var(ctx, m, copies, copy, i, i)))
}

/// `det - 1` for `2 x 2` matrices.
pub fn det2_minus_one(ctx: &FieldCtx) -> Poly {
    let v = |i, j| entry_var(ctx, 2, 1, 0, i, j);
    v(0, 0)
        .mul(ctx, &v(1, 1))
        .sub(ctx, &v(0, 1).mul(ctx, &v(1, 0)))
        .sub(ctx, &Poly::constant(ctx, 4, ctx.one()))
}

/// Random polynomial of total degree exactly `degree` (when `degree > 0`) with up to
/// `max_terms` terms.
pub fn random_poly<R: Rng + ?Sized>(ctx: &FieldCtx, variables: usize, degree: u32, max_terms: usize, rng: &mut R) -> Poly {
    let random_exps = |rng: &mut R, total: u32| {
        let mut e = vec![0u32; variables];
        for _ in 0..total {
            e[rng.gen_range(0..variables)] += 1;
        }
        e
    };
    loop {
        let mut terms = vec![(ctx.random_nonzero(rng), random_exps(rng, degree))];
        for _ in 1..rng.gen_range(1..=max_terms.max(1)) {
            let d = rng.gen_range(0..=degree);
            terms.push((ctx.random(rng), random_exps(rng, d)));
        }
        let p = Poly::new(ctx, variables, terms).expect("valid terms");
        if p.degree() == degree && !p.is_zero() {
            return p;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineReport {
    pub q: u64,
    pub d: usize,
    pub degree: u32,
    pub count: u64,
    pub points: u64,
    /// `d D q^(d-1)`
    pub bound: u64,
    pub zero_polynomial: bool,
    pub vanishes_everywhere: bool,
}

fn for_each_point(q: u64, d: usize, first: u64, mut f: impl FnMut(&[FieldElem])) {
    let mut x = vec![FieldElem::ZERO; d];
    if d == 0 {
        f(&x);
        return;
    }
    x[0] = FieldElem::from_code(first);
    loop {
        f(&x);
        let mut i = 1;
        loop {
            if i == d {
                return;
            }
            let next = x[i].code() + 1;
            if next < q {
                x[i] = FieldElem::from_code(next);
                break;
            }
            x[i] = FieldElem::ZERO;
            i += 1;
        }
    }
}

/// Exact zero count of `p` on `F_q^d`; errors if a nonzero polynomial exceeds `d D q^(d-1)`.
pub fn zero_count_affine(p: &Poly, ctx: &FieldCtx, d: usize) -> Result<AffineReport, SzError> {
    if p.variables != d {
        return Err(SzError::VariableCount { got: p.variables, expected: d });
    }
    let q = ctx.size();
    let points = (q as u128).pow(d as u32);
    if points > AFFINE_CAP {
        return Err(SzError::TooLarge { points, cap: AFFINE_CAP });
    }
    let firsts = if d == 0 { 1 } else { q };
    let count: u64 = (0..firsts)
        .into_par_iter()
        .map(|c| {
            let mut n = 0u64;
            for_each_point(q, d, c, |x| {
                if p.eval(ctx, x).is_zero() {
                    n += 1;
                }
            });
            n
        })
        .sum();
    let bound = if d == 0 { 0 } else { d as u64 * p.degree() as u64 * q.pow(d as u32 - 1) };
    let rep = AffineReport {
        q,
        d,
        degree: p.degree(),
        count,
        points: points as u64,
        bound,
        zero_polynomial: p.is_zero(),
        vanishes_everywhere: count as u128 == points,
    };
    if !rep.zero_polynomial && count > bound {
        return Err(SzError::BoundViolated { count, bound });
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group_order: u64,
    pub q: u64,
    pub twist: u32,
    pub degree: u32,
    pub count: u64,
    /// `D q^(-1/d) |G|`, or `D q^(-1/d) |G|^2` for pairs.
    pub scale: f64,
    /// `count / scale`; `None` when the polynomial vanishes on the whole set.
    pub ratio: Option<f64>,
    pub vanishes_identically: bool,
}

fn scale(ctx: &GroupCtx, degree: u32, points: f64) -> f64 {
    let q = ctx.field().size() as f64;
    degree.max(1) as f64 * q.powf(-1.0 / ctx.twist_order() as f64) * points
}

fn group_size(ctx: &GroupCtx, cap: u128, power: u32) -> Result<u64, SzError> {
    let n = ctx.order().to_u128().unwrap_or(u128::MAX);
    let points = n.saturating_pow(power);
    if points > cap {
        return Err(SzError::TooLarge { points, cap });
    }
    Ok(n as u64)
}

fn is_zero_on(p: &Poly, ctx: &FieldCtx, g: &GroupElem) -> bool {
    p.eval(ctx, g.entries()).is_zero()
}

fn report(ctx: &GroupCtx, p: &Poly, n: u64, count: u64, points: u64) -> GroupReport {
    let s = scale(ctx, p.degree(), points as f64);
    let vanishes = count == points;
    GroupReport {
        group_order: n,
        q: ctx.field().size(),
        twist: ctx.twist_order(),
        degree: p.degree(),
        count,
        scale: s,
        ratio: (!vanishes).then_some(count as f64 / s),
        vanishes_identically: vanishes,
    }
}

fn matrix_group(ctx: &GroupCtx) -> Result<usize, SzError> {
    if ctx.is_cyclic() {
        return Err(SzError::Group(GroupError::Unsupported("matrix entries of a cyclic group".into())));
    }
    Ok(ctx.dim())
}

/// Zero count over the group, the variables being the `m^2` matrix entries.
pub fn zero_count_group(p: &Poly, ctx: &GroupCtx) -> Result<GroupReport, SzError> {
    let m = matrix_group(ctx)?;
    if p.variables != m * m {
        return Err(SzError::VariableCount { got: p.variables, expected: m * m });
    }
    let n = group_size(ctx, GROUP_CAP, 1)?;
    ctx.indexed_order()?;
    let f = ctx.field();
    let count: u64 = (0..n)
        .into_par_iter()
        .map(|i| is_zero_on(p, f, &ctx.element_at(i).expect("index in range")) as u64)
        .sum();
    Ok(report(ctx, p, n, count, n))
}

/// The same count, streaming the group cell by cell through Bruhat coordinates (`SL_m`).
pub fn zero_count_group_bruhat(p: &Poly, ctx: &GroupCtx) -> Result<u64, SzError> {
    let m = matrix_group(ctx)?;
    group_size(ctx, GROUP_CAP, 1)?;
    let f = ctx.field();
    let mut count = 0;
    for w in weyl_elements(m) {
        count += cell_elements(ctx, &w)?.par_iter().filter(|g| is_zero_on(p, f, g)).count() as u64;
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    #[serde(flatten)]
    pub report: GroupReport,
    /// Values of `b` for which `P(., b)` vanishes on all of `G`.
    pub degenerate_slices: u64,
    /// Largest zero count of a nondegenerate slice.
    pub max_slice: u64,
    /// `degenerate |G| + (|G| - degenerate) max_slice`, which bounds `count`.
    pub fubini_bound: u64,
}

/// Zero count over `G x G` in `2 m^2` variables (`a` entries first).
pub fn zero_count_pairs(p: &Poly, ctx: &GroupCtx) -> Result<PairReport, SzError> {
    let m = matrix_group(ctx)?;
    if p.variables != 2 * m * m {
        return Err(SzError::VariableCount { got: p.variables, expected: 2 * m * m });
    }
    let n = group_size(ctx, PAIR_CAP, 2)?;
    let elems = ctx.elements()?;
    let f = ctx.field();
    let slices: Vec<u64> = elems
        .par_iter()
        .map(|b| {
            let mut x = vec![FieldElem::ZERO; 2 * m * m];
            x[m * m..].copy_from_slice(b.entries());
            elems
                .iter()
                .filter(|a| {
                    x[..m * m].copy_from_slice(a.entries());
                    p.eval(f, &x).is_zero()
                })
                .count() as u64
        })
        .collect();
    let count = slices.iter().sum();
    let degenerate = slices.iter().filter(|&&s| s == n).count() as u64;
    let max_slice = slices.iter().copied().filter(|&s| s < n).max().unwrap_or(0);
    let fubini_bound = degenerate * n + (n - degenerate) * max_slice;
    debug_assert!(count <= fubini_bound);
    Ok(PairReport {
        report: report(ctx, p, n, count, n * n),
        degenerate_slices: degenerate,
        max_slice,
        fubini_bound,
    })
}

/// Polynomials shared by a corpus file: field `F_{p^k}` and a list of polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub p: u64,
    pub k: usize,
    pub polys: Vec<Poly>,
}

impl Corpus {
    pub fn from_json(s: &str) -> Result<(FieldCtx, Vec<Poly>), SzError> {
        let c: Corpus = serde_json::from_str(s)?;
        let ctx = FieldCtx::make(c.p, c.k, 0)?;
        let polys = c.polys.into_iter().map(|p| p.normalized(&ctx)).collect::<Result<_, _>>()?;
        Ok((ctx, polys))
    }
}

/// One line of an audit report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SzRow {
    pub poly_id: usize,
    #[serde(rename = "D")]
    pub degree: u32,
    pub q: u64,
    pub count: u64,
    pub bound: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub polys: usize,
    pub violations: usize,
    pub max_ratio: f64,
    pub rows: Vec<SzRow>,
}

/// Field sizes `q <= 11` used by the fuzz corpus.
pub const FUZZ_FIELDS: [(u64, usize); 8] = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1)];

/// `count` random polynomials with `d <= 3`, `D <= 5`, `q <= 11`, each counted exhaustively
/// against `d D q^(d-1)`.
pub fn fuzz_affine(count: usize, seed: u64) -> Result<FuzzSummary, SzError> {
    let fields: Vec<FieldCtx> = FUZZ_FIELDS
        .iter()
        .map(|&(p, k)| FieldCtx::make(p, k, 0).expect("small field"))
        .collect();
    let rows: Vec<Result<(SzRow, bool), SzError>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::seeding::stream_rng(seed, i as u64);
            let f = &fields[rng.gen_range(0..fields.len())];
            let d = rng.gen_range(1..=3);
            let deg = rng.gen_range(1..=5);
            let p = random_poly(f, d, deg, 6, &mut rng);
            let (rep, violated) = match zero_count_affine(&p, f, d) {
                Ok(r) => (r, false),
                Err(SzError::BoundViolated { count, bound }) => (
                    AffineReport {
                        q: f.size(),
                        d,
                        degree: deg,
                        count,
                        points: f.size().pow(d as u32),
                        bound,
                        zero_polynomial: false,
                        vanishes_everywhere: false,
                    },
                    true,
                ),
                Err(e) => return Err(e),
            };
            Ok((
                SzRow {
                    poly_id: i,
                    degree: rep.degree,
                    q: rep.q,
                    count: rep.count,
                    bound: rep.bound as f64,
                    ratio: Some(rep.count as f64 / rep.bound as f64),
                },
                violated,
            ))
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    let mut violations = 0;
    for r in rows {
        let (row, v) = r?;
        violations += v as usize;
        out.push(row);
    }
    let max_ratio = out.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    Ok(FuzzSummary { polys: count, violations, max_ratio, rows: out })
}

/// Group-level corpus for `m x m` groups: entries, traces, products of entries, and random
/// polynomials of degree `1..=max_degree`.
pub fn group_corpus(ctx: &FieldCtx, m: usize, random: usize, max_degree: u32, seed: u64) -> Vec<Poly> {
    let nv = m * m;
    let c = |x: i64| Poly::constant(ctx, nv, ctx.from_int(x));
    let e = |i, j| entry_var(ctx, m, 1, 0, i, j);
    let mut out = vec![
        e(0, 0),
        e(0, 1),
        e(0, 0).sub(ctx, &c(1)),
        trace_poly(ctx, m, 1, 0),
        trace_poly(ctx, m, 1, 0).sub(ctx, &c(2)),
        e(0, 0).mul(ctx, &e(1, 1)),
        e(0, 1).mul(ctx, &e(1, 0)).add(ctx, &c(1)),
        e(0, 0).mul(ctx, &e(0, 0)).sub(ctx, &e(1, 1)),
    ];
    let mut rng = crate::seeding::stream_rng(seed, 0);
    for _ in 0..random {
        let deg = rng.gen_range(1..=max_degree.max(1));
        out.push(random_poly(ctx, nv, deg, 5, &mut rng));
    }
    out
}

/// Ratios of a corpus over a group, skipping polynomials that vanish on the group.
pub fn group_audit(ctx: &GroupCtx, polys: &[Poly]) -> Result<Vec<SzRow>, SzError> {
    polys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let r = zero_count_group(p, ctx)?;
            Ok(SzRow {
                poly_id: i,
                degree: r.degree,
                q: r.q,
                count: r.count,
                bound: r.scale,
                ratio: r.ratio,
            })
        })
        .collect()
}
