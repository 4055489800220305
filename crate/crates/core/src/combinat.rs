// SPDX-License-Identifier: Apache-2.0

//! Finite subsets of a group: product sets, multiplicative energy, tripling, and greedy
//! covers of `A A` by left translates of `A`.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupCtx, GroupElem, GroupError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CombinatError {
    #[error("set of size {size} exceeds the cap {cap}")]
    SetTooLarge { size: usize, cap: usize },
    #[error("the set is empty")]
    EmptySet,
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Largest set accepted by [`multiplicative_energy`].
pub const ENERGY_CAP: usize = 4000;
/// Largest product set materialized.
pub const PRODUCT_CAP: usize = 20_000_000;

/// A finite set of group elements, as sorted canonical indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElemSet {
    indices: Vec<u64>,
}

impl ElemSet {
    pub fn from_elems(ctx: &GroupCtx, elems: &[GroupElem]) -> Result<Self, CombinatError> {
        let set: BTreeSet<u64> = elems
            .iter()
            .map(|g| ctx.canonical_index(g))
            .collect::<Result<_, _>>()?;
        Ok(ElemSet {
            indices: set.into_iter().collect(),
        })
    }

    pub fn from_indices(indices: impl IntoIterator<Item = u64>) -> Self {
        let set: BTreeSet<u64> = indices.into_iter().collect();
        ElemSet {
            indices: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn contains(&self, i: u64) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn elems(&self, ctx: &GroupCtx) -> Result<Vec<GroupElem>, CombinatError> {
        Ok(self
            .indices
            .iter()
            .map(|&i| ctx.element_at(i))
            .collect::<Result<_, _>>()?)
    }

    /// Whether `e` is in the set and the set is closed under inverses.
    pub fn is_symmetric(&self, ctx: &GroupCtx) -> Result<bool, CombinatError> {
        for g in self.elems(ctx)? {
            if !self.contains(ctx.canonical_index(&ctx.inv(&g))?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `A B`, built in parallel over left factors and merged in order.
pub fn product_set(ctx: &GroupCtx, a: &ElemSet, b: &ElemSet) -> Result<ElemSet, CombinatError> {
    let ea = a.elems(ctx)?;
    let eb = b.elems(ctx)?;
    let parts: Result<Vec<Vec<u64>>, GroupError> = ea
        .par_iter()
        .map(|x| {
            let mut v: Vec<u64> = eb
                .iter()
                .map(|y| ctx.canonical_index(&ctx.mul(x, y)))
                .collect::<Result<_, _>>()?;
            v.sort_unstable();
            Ok(v)
        })
        .collect();
    let mut all = BTreeSet::new();
    for p in parts? {
        all.extend(p);
        if all.len() > PRODUCT_CAP {
            return Err(CombinatError::SetTooLarge {
                size: all.len(),
                cap: PRODUCT_CAP,
            });
        }
    }
    Ok(ElemSet {
        indices: all.into_iter().collect(),
    })
}

/// `E(A) = #{(a1, a2, a3, a4) : a1 a2^-1 = a3 a4^-1}`.
pub fn multiplicative_energy(ctx: &GroupCtx, a: &ElemSet) -> Result<u128, CombinatError> {
    if a.len() > ENERGY_CAP {
        return Err(CombinatError::SetTooLarge {
            size: a.len(),
            cap: ENERGY_CAP,
        });
    }
    let elems = a.elems(ctx)?;
    let invs: Vec<GroupElem> = elems.iter().map(|g| ctx.inv(g)).collect();
    let mut r: HashMap<u64, u64> = HashMap::new();
    for x in &elems {
        for y in &invs {
            *r.entry(ctx.canonical_index(&ctx.mul(x, y))?).or_insert(0) += 1;
        }
    }
    let e: u128 = r.values().map(|&c| (c as u128) * (c as u128)).sum();
    let n = a.len() as u128;
    assert!(e >= n * n && e <= n * n * n, "energy out of range");
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriplingReport {
    pub size: usize,
    pub size_aa: usize,
    pub size_aaa: usize,
    /// `|A A A| / |A|`.
    pub tripling: f64,
}

pub fn tripling(ctx: &GroupCtx, a: &ElemSet) -> Result<TriplingReport, CombinatError> {
    if a.is_empty() {
        return Err(CombinatError::EmptySet);
    }
    let aa = product_set(ctx, a, a)?;
    let aaa = product_set(ctx, &aa, a)?;
    Ok(TriplingReport {
        size: a.len(),
        size_aa: aa.len(),
        size_aaa: aaa.len(),
        tripling: aaa.len() as f64 / a.len() as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    /// Number of translates used; an upper bound on the least `K`.
    pub k: usize,
    pub translates: Vec<u64>,
    pub size_aa: usize,
}

/// Greedy cover of `A A` by left translates `x A`.
///
/// Walks the uncovered elements `y` in index order; among the translates `x A` containing `y`
/// (that is `x = y a^-1`) it takes the one covering the most uncovered elements, preferring
/// `x` in `A A`, ties broken by smallest index.
pub fn approx_k(ctx: &GroupCtx, a: &ElemSet) -> Result<CoverReport, CombinatError> {
    if a.is_empty() {
        return Err(CombinatError::EmptySet);
    }
    let aa = product_set(ctx, a, a)?;
    let ea = a.elems(ctx)?;
    let inv_a: Vec<GroupElem> = ea.iter().map(|g| ctx.inv(g)).collect();
    let mut uncovered: BTreeSet<u64> = aa.indices.iter().copied().collect();
    let mut translates = Vec::new();
    while let Some(&y) = uncovered.iter().next() {
        let gy = ctx.element_at(y)?;
        let mut best: Option<(bool, usize, u64, Vec<u64>)> = None;
        for ai in &inv_a {
            let x = ctx.mul(&gy, ai);
            let xi = ctx.canonical_index(&x)?;
            let cover: Vec<u64> = ea
                .iter()
                .map(|g| ctx.canonical_index(&ctx.mul(&x, g)))
                .collect::<Result<_, _>>()?;
            let gain = cover.iter().filter(|c| uncovered.contains(c)).count();
            let key = (aa.contains(xi), gain);
            let better = match &best {
                None => true,
                Some((in_aa, g, idx, _)) => key > (*in_aa, *g) || (key == (*in_aa, *g) && xi < *idx),
            };
            if better {
                best = Some((key.0, key.1, xi, cover));
            }
        }
        let (_, _, xi, cover) = best.expect("A is nonempty");
        for c in cover {
            uncovered.remove(&c);
        }
        translates.push(xi);
    }
    // the cover is checked exhaustively
    let mut covered = HashSet::new();
    for &x in &translates {
        let gx = ctx.element_at(x)?;
        for g in &ea {
            covered.insert(ctx.canonical_index(&ctx.mul(&gx, g))?);
        }
    }
    assert!(aa.indices.iter().all(|i| covered.contains(i)), "greedy cover is incomplete");
    Ok(CoverReport {
        k: translates.len(),
        translates,
        size_aa: aa.len(),
    })
}

/// Subgroup generated by `gens`.
pub fn subgroup_closure(ctx: &GroupCtx, gens: &[GroupElem]) -> Result<ElemSet, CombinatError> {
    let e = ctx.identity();
    let mut seen = HashSet::from([ctx.canonical_index(&e)?]);
    let mut stack = vec![e];
    while let Some(g) = stack.pop() {
        for s in gens {
            let h = ctx.mul(&g, s);
            if seen.insert(ctx.canonical_index(&h)?) {
                stack.push(h);
            }
        }
    }
    Ok(ElemSet::from_indices(seen))
}

/// Words of length at most `r` in `gens` and their inverses.
pub fn ball(ctx: &GroupCtx, gens: &[GroupElem], r: usize) -> Result<ElemSet, CombinatError> {
    let mut steps = Vec::new();
    for g in gens {
        steps.push(*g);
        steps.push(ctx.inv(g));
    }
    let e = ctx.identity();
    let mut seen = HashSet::from([ctx.canonical_index(&e)?]);
    let mut layer = vec![e];
    for _ in 0..r {
        let mut next = Vec::new();
        for g in &layer {
            for s in &steps {
                let h = ctx.mul(g, s);
                if seen.insert(ctx.canonical_index(&h)?) {
                    next.push(h);
                }
            }
        }
        layer = next;
    }
    Ok(ElemSet::from_indices(seen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::stream_rng;
    use rand::Rng;

    fn sl2_7() -> GroupCtx {
        GroupCtx::sl2(7, 1).unwrap()
    }

    pub(crate) fn subgroups(ctx: &GroupCtx) -> Vec<ElemSet> {
        let m = |r: &[&[i64]]| ctx.from_ints(r).unwrap();
        vec![
            subgroup_closure(ctx, &[]).unwrap(),
            subgroup_closure(ctx, &[m(&[&[-1, 0], &[0, -1]])]).unwrap(),
            subgroup_closure(ctx, &[m(&[&[1, 1], &[0, 1]])]).unwrap(),
            subgroup_closure(ctx, &[m(&[&[3, 0], &[0, 5]])]).unwrap(),
            subgroup_closure(ctx, &[m(&[&[1, 1], &[0, 1]]), m(&[&[3, 0], &[0, 5]])]).unwrap(),
        ]
    }

    #[test]
    fn subgroup_invariants() {
        let ctx = sl2_7();
        let sizes: Vec<usize> = subgroups(&ctx).iter().map(ElemSet::len).collect();
        assert_eq!(sizes, vec![1, 2, 7, 6, 42]);
        for h in subgroups(&ctx) {
            let n = h.len() as u128;
            assert_eq!(multiplicative_energy(&ctx, &h).unwrap(), n * n * n);
            assert_eq!(tripling(&ctx, &h).unwrap().tripling, 1.0);
            assert_eq!(approx_k(&ctx, &h).unwrap().k, 1);
        }
        let all = ElemSet::from_indices(0..336);
        assert_eq!(tripling(&ctx, &all).unwrap().tripling, 1.0);
    }

    #[test]
    fn small_energy_examples() {
        let ctx = sl2_7();
        let g = ctx.from_ints(&[&[1, 1], &[0, 1]]).unwrap();
        let a = ElemSet::from_elems(&ctx, &[ctx.identity(), g]).unwrap();
        assert_eq!(multiplicative_energy(&ctx, &a).unwrap(), 6);
        let one = ElemSet::from_elems(&ctx, &[g]).unwrap();
        assert_eq!(multiplicative_energy(&ctx, &one).unwrap(), 1);
        let big = ElemSet::from_indices(0..4001);
        assert!(matches!(
            multiplicative_energy(&GroupCtx::sl2(31, 1).unwrap(), &big),
            Err(CombinatError::SetTooLarge { .. })
        ));
    }

    #[test]
    fn energy_brute_force_and_cauchy_schwarz() {
        let ctx = sl2_7();
        let mut rng = stream_rng(1, 0);
        for t in 0..100 {
            let size = rng.gen_range(1..=12);
            let a = ElemSet::from_indices((0..size).map(|_| rng.gen_range(0..336u64)));
            let e = multiplicative_energy(&ctx, &a).unwrap();
            let aa = product_set(&ctx, &a, &a).unwrap();
            let n = a.len() as u128;
            // |A|^4 <= E |A A|
            assert!(n.pow(4) <= e * aa.len() as u128);
            if t < 10 {
                let el = a.elems(&ctx).unwrap();
                let mut count = 0u128;
                for a1 in &el {
                    for a2 in &el {
                        for a3 in &el {
                            for a4 in &el {
                                if ctx.mul(a1, &ctx.inv(a2)) == ctx.mul(a3, &ctx.inv(a4)) {
                                    count += 1;
                                }
                            }
                        }
                    }
                }
                assert_eq!(count, e);
            }
        }
    }

    #[test]
    fn ball_grows() {
        let ctx = GroupCtx::sl2(31, 1).unwrap();
        let mut rng = stream_rng(2, 0);
        let gens = [ctx.random_uniform(&mut rng), ctx.random_uniform(&mut rng)];
        let b = ball(&ctx, &gens, 2).unwrap();
        assert_eq!(b.len(), 17);
        assert!(b.is_symmetric(&ctx).unwrap());
        let t = tripling(&ctx, &b).unwrap();
        assert!(t.tripling >= 3.0, "{t:?}");
        let cover = approx_k(&ctx, &b).unwrap();
        assert!(cover.k >= 2 && cover.k <= cover.size_aa);
    }

    #[test]
    fn empty_sets_rejected() {
        let ctx = sl2_7();
        let e = ElemSet::from_indices([]);
        assert_eq!(tripling(&ctx, &e).unwrap_err(), CombinatError::EmptySet);
        assert_eq!(approx_k(&ctx, &e).unwrap_err(), CombinatError::EmptySet);
    }
}
