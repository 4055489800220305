// SPDX-License-Identifier: Apache-2.0

//! Probability measures on an indexed group, convolution, `L^p` norms and random-walk traces.
//!
//! Weights are densities with respect to the uniform probability: the uniform measure is the
//! constant 1 and a Dirac mass is `|G|` at its point. Norms are taken against the normalized
//! counting measure, so `||1||_p = 1`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{GroupCtx, GroupElem, GroupError};
use crate::scalar::Weight;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("generator list is empty")]
    EmptyGenerators,
    #[error("measures live on groups of different orders")]
    ContextMismatch,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("kappa must lie in (0, 1), got {0}")]
    BadKappa(f64),
}

/// Support size above which a measure is stored densely, as a fraction `1/DENSE_DIVISOR` of `|G|`.
pub const DENSE_DIVISOR: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub enum Storage<S> {
    /// `(index, density)` sorted by index, densities nonzero.
    Sparse(Vec<(u32, S)>),
    Dense(Vec<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measure<S> {
    order: usize,
    storage: Storage<S>,
}

impl<S: Weight> Measure<S> {
    fn from_map(order: usize, map: BTreeMap<u32, S>) -> Self {
        let sparse: Vec<(u32, S)> = map.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Self::normalize_storage(order, Storage::Sparse(sparse))
    }

    fn normalize_storage(order: usize, storage: Storage<S>) -> Self {
        let storage = match storage {
            Storage::Sparse(v) if v.len() * DENSE_DIVISOR > order => {
                let mut d = vec![S::zero(); order];
                for (i, w) in v {
                    d[i as usize] = w;
                }
                Storage::Dense(d)
            }
            Storage::Dense(d) if d.iter().filter(|w| !w.is_zero()).count() * DENSE_DIVISOR <= order => {
                Storage::Sparse(
                    d.into_iter()
                        .enumerate()
                        .filter(|(_, w)| !w.is_zero())
                        .map(|(i, w)| (i as u32, w))
                        .collect(),
                )
            }
            s => s,
        };
        Measure { order, storage }
    }

    /// Builds a measure from plain probabilities `(element, probability)`; repeated elements add.
    pub fn from_probs(ctx: &GroupCtx, probs: &[(GroupElem, S)]) -> Result<Self, WalkError> {
        let order = ctx.indexed_order()?;
        let n = S::from_count(order as u64);
        let mut map: BTreeMap<u32, S> = BTreeMap::new();
        for (g, p) in probs {
            let i = ctx.canonical_index(g)? as u32;
            let e = map.entry(i).or_insert_with(S::zero);
            *e = e.clone() + p.clone() * n.clone();
        }
        Ok(Self::from_map(order, map))
    }

    /// Dense measure from densities indexed canonically.
    pub fn from_densities(densities: Vec<S>) -> Self {
        let order = densities.len();
        Self::normalize_storage(order, Storage::Dense(densities))
    }

    pub fn delta(ctx: &GroupCtx, g: &GroupElem) -> Result<Self, WalkError> {
        Self::from_probs(ctx, &[(*g, S::one())])
    }

    pub fn uniform(ctx: &GroupCtx) -> Result<Self, WalkError> {
        let order = ctx.indexed_order()?;
        Ok(Measure {
            order,
            storage: Storage::Dense(vec![S::one(); order]),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn storage(&self) -> &Storage<S> {
        &self.storage
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// `(index, density)` over the support, in index order.
    pub fn support(&self) -> Vec<(u32, S)> {
        match &self.storage {
            Storage::Sparse(v) => v.clone(),
            Storage::Dense(d) => d
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(i, w)| (i as u32, w.clone()))
                .collect(),
        }
    }

    pub fn support_size(&self) -> usize {
        match &self.storage {
            Storage::Sparse(v) => v.len(),
            Storage::Dense(d) => d.iter().filter(|w| !w.is_zero()).count(),
        }
    }

    /// Density at canonical index `i` (uniform = 1).
    pub fn density(&self, i: usize) -> S {
        match &self.storage {
            Storage::Sparse(v) => v
                .binary_search_by_key(&(i as u32), |(j, _)| *j)
                .map(|k| v[k].1.clone())
                .unwrap_or_else(|_| S::zero()),
            Storage::Dense(d) => d[i].clone(),
        }
    }

    /// Plain probability at canonical index `i`.
    pub fn prob(&self, i: usize) -> S {
        self.density(i) / S::from_count(self.order as u64)
    }

    pub fn to_dense(&self) -> Vec<S> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Sparse(v) => {
                let mut d = vec![S::zero(); self.order];
                for (i, w) in v {
                    d[*i as usize] = w.clone();
                }
                d
            }
        }
    }

    /// Sum of probabilities.
    pub fn total_mass(&self) -> S {
        let sum = match &self.storage {
            Storage::Sparse(v) => v.iter().fold(S::zero(), |a, (_, w)| a + w.clone()),
            Storage::Dense(d) => d.iter().fold(S::zero(), |a, w| a + w.clone()),
        };
        sum / S::from_count(self.order as u64)
    }

    /// `mu(g) = mu(g^-1)` for all `g`.
    pub fn is_symmetric(&self, ctx: &GroupCtx) -> Result<bool, WalkError> {
        for (i, w) in self.support() {
            let g = ctx.element_at(i as u64)?;
            let j = ctx.canonical_index(&ctx.inv(&g))? as usize;
            if self.density(j) != w {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Normalized `L^p` norm for `p` in `{1, 2}`; see [`Measure::linf_norm`].
    pub fn lp_norm(&self, p: u32) -> f64 {
        let n = self.order as f64;
        match p {
            1 => self.support().iter().map(|(_, w)| w.as_f64().abs()).sum::<f64>() / n,
            2 => (self.l2_squared().as_f64()).sqrt(),
            _ => self.linf_norm(),
        }
    }

    /// `E |f|^2`, exact in the scalar type.
    pub fn l2_squared(&self) -> S {
        let sum = match &self.storage {
            Storage::Sparse(v) => v.iter().fold(S::zero(), |a, (_, w)| a + w.clone() * w.clone()),
            Storage::Dense(d) => sum_squares(d),
        };
        sum / S::from_count(self.order as u64)
    }

    pub fn linf_norm(&self) -> f64 {
        self.support()
            .iter()
            .map(|(_, w)| w.as_f64().abs())
            .fold(0.0, f64::max)
    }

    /// `||mu - 1||_inf`.
    pub fn dist_to_uniform_inf(&self) -> f64 {
        match &self.storage {
            Storage::Dense(d) => d
                .iter()
                .map(|w| (w.as_f64() - 1.0).abs())
                .fold(0.0, f64::max),
            Storage::Sparse(v) => {
                let on = v
                    .iter()
                    .map(|(_, w)| (w.as_f64() - 1.0).abs())
                    .fold(0.0, f64::max);
                if v.len() < self.order {
                    on.max(1.0)
                } else {
                    on
                }
            }
        }
    }

    /// `||mu - 1||_2`, exact squared value.
    pub fn dist_to_uniform_l2_squared(&self) -> S {
        let d = self.to_dense();
        let sum = d.iter().fold(S::zero(), |a, w| {
            let x = w.clone() - S::one();
            a + x.clone() * x
        });
        sum / S::from_count(self.order as u64)
    }

    /// Probability of the elements satisfying `pred`.
    pub fn subgroup_mass<F>(&self, ctx: &GroupCtx, pred: F) -> Result<S, WalkError>
    where
        F: Fn(&GroupElem) -> bool,
    {
        let mut acc = S::zero();
        for (i, w) in self.support() {
            if pred(&ctx.element_at(i as u64)?) {
                acc = acc + w;
            }
        }
        Ok(acc / S::from_count(self.order as u64))
    }
}

fn sum_squares<S: Weight>(d: &[S]) -> S {
    d.iter().fold(S::zero(), |a, w| a + w.clone() * w.clone())
}

/// `mu = (1/2k) sum (delta_{x_i} + delta_{x_i^-1})`.
pub fn generator_measure<S: Weight>(
    ctx: &GroupCtx,
    gens: &[GroupElem],
) -> Result<Measure<S>, WalkError> {
    if gens.is_empty() {
        return Err(WalkError::EmptyGenerators);
    }
    let w = S::ratio(1, 2 * gens.len() as u64);
    let probs: Vec<(GroupElem, S)> = gens
        .iter()
        .flat_map(|g| [(*g, w.clone()), (ctx.inv(g), w.clone())])
        .collect();
    Measure::from_probs(ctx, &probs)
}

/// `(mu1 * mu2)(g) = E_x mu1(g x^-1) mu2(x)`.
pub fn convolve<S: Weight>(
    ctx: &GroupCtx,
    mu1: &Measure<S>,
    mu2: &Measure<S>,
) -> Result<Measure<S>, WalkError> {
    let order = ctx.indexed_order()?;
    if mu1.order != order || mu2.order != order {
        return Err(WalkError::ContextMismatch);
    }
    let s1 = mu1.support();
    let s2 = mu2.support();
    let n = S::from_count(order as u64);
    let e2: Vec<GroupElem> = s2
        .iter()
        .map(|(j, _)| ctx.element_at(*j as u64))
        .collect::<Result<_, _>>()?;
    let dense_out = s1.len() * s2.len() * DENSE_DIVISOR > order;
    if dense_out {
        let mut out = vec![S::zero(); order];
        for (i, w1) in &s1 {
            let g = ctx.element_at(*i as u64)?;
            for ((_, w2), x) in s2.iter().zip(&e2) {
                let k = ctx.canonical_index(&ctx.mul(&g, x))? as usize;
                out[k] = out[k].clone() + w1.clone() * w2.clone() / n.clone();
            }
        }
        Ok(Measure::normalize_storage(order, Storage::Dense(out)))
    } else {
        let mut map: BTreeMap<u32, S> = BTreeMap::new();
        for (i, w1) in &s1 {
            let g = ctx.element_at(*i as u64)?;
            for ((_, w2), x) in s2.iter().zip(&e2) {
                let k = ctx.canonical_index(&ctx.mul(&g, x))? as u32;
                let e = map.entry(k).or_insert_with(S::zero);
                *e = e.clone() + w1.clone() * w2.clone() / n.clone();
            }
        }
        Ok(Measure::from_map(order, map))
    }
}

/// Right-convolution by a sparse measure as a matrix-free operator:
/// `(f * nu)(g) = sum_s nu(s) f(g s^-1)` with `nu(s)` plain probabilities.
#[derive(Clone, Debug)]
pub struct StepOperator {
    order: usize,
    /// Support of `nu` as canonical indices.
    support: Vec<u32>,
    /// `table[k][i]` = index of `g_i * s_k^-1`.
    table: Vec<Vec<u32>>,
}

impl StepOperator {
    /// Tables for the given support elements.
    pub fn new(ctx: &GroupCtx, support: &[GroupElem]) -> Result<Self, WalkError> {
        let order = ctx.indexed_order()?;
        let mut table = Vec::with_capacity(support.len());
        let mut idx = Vec::with_capacity(support.len());
        for s in support {
            idx.push(ctx.canonical_index(s)? as u32);
            let sinv = ctx.inv(s);
            let row: Result<Vec<u32>, GroupError> = (0..order as u64)
                .into_par_iter()
                .map(|i| {
                    let g = ctx.element_at(i)?;
                    Ok(ctx.canonical_index(&ctx.mul(&g, &sinv))? as u32)
                })
                .collect();
            table.push(row?);
        }
        Ok(StepOperator {
            order,
            support: idx,
            table,
        })
    }

    /// Operator for the support of a measure.
    pub fn for_measure<S: Weight>(ctx: &GroupCtx, nu: &Measure<S>) -> Result<Self, WalkError> {
        let elems: Vec<GroupElem> = nu
            .support()
            .iter()
            .map(|(i, _)| ctx.element_at(*i as u64))
            .collect::<Result<_, _>>()?;
        Self::new(ctx, &elems)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    /// `out[i] = sum_k probs[k] * f[table[k][i]]`, parallel over `i`; the summation order
    /// over `k` is fixed, so the result is independent of the thread count.
    pub fn apply<S: Weight>(&self, probs: &[S], f: &[S], out: &mut [S]) {
        assert_eq!(probs.len(), self.table.len());
        assert_eq!(f.len(), self.order);
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = S::zero();
            for (k, p) in probs.iter().enumerate() {
                acc = acc + p.clone() * f[self.table[k][i] as usize].clone();
            }
            *o = acc;
        });
    }

    /// Specialized `f64` kernel used by the hot loops.
    pub fn apply_f64(&self, probs: &[f64], f: &[f64], out: &mut [f64]) {
        assert_eq!(probs.len(), self.table.len());
        assert_eq!(f.len(), self.order);
        const BLOCK: usize = 1 << 14;
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            let base = b * BLOCK;
            for (off, o) in chunk.iter_mut().enumerate() {
                let i = base + off;
                let mut acc = 0.0;
                for (k, p) in probs.iter().enumerate() {
                    acc += p * f[self.table[k][i] as usize];
                }
                *o = acc;
            }
        });
    }

    /// Block variant of [`StepOperator::apply_f64`]: `W` vectors stored interleaved, so each
    /// table lookup gathers all of them from one place.
    pub fn apply_block<const W: usize>(&self, probs: &[f64], f: &[[f64; W]], out: &mut [[f64; W]]) {
        assert_eq!(probs.len(), self.table.len());
        assert_eq!(f.len(), self.order);
        const BLOCK: usize = 1 << 12;
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            let base = b * BLOCK;
            for (off, o) in chunk.iter_mut().enumerate() {
                let i = base + off;
                let mut acc = [0.0; W];
                for (k, p) in probs.iter().enumerate() {
                    let src = &f[self.table[k][i] as usize];
                    for c in 0..W {
                        acc[c] += p * src[c];
                    }
                }
                *o = acc;
            }
        });
    }

    /// One pass computing `(T v)_i` for `W` interleaved vectors, handing each row to `kernel`
    /// together with a per-chunk accumulator; the chunk accumulators are summed in chunk
    /// order, so the result does not depend on the thread count.
    pub fn apply_block_reduce<const W: usize, F>(
        &self,
        probs: &[f64],
        f: &[[f64; W]],
        out: &mut [[f64; W]],
        kernel: F,
    ) -> [[f64; 3]; W]
    where
        F: Fn(usize, [f64; W], &mut [f64; W], &mut [[f64; 3]; W]) + Sync,
    {
        assert_eq!(probs.len(), self.table.len());
        assert_eq!(f.len(), self.order);
        const BLOCK: usize = 1 << 12;
        let parts: Vec<[[f64; 3]; W]> = out
            .par_chunks_mut(BLOCK)
            .enumerate()
            .map(|(b, chunk)| {
                let base = b * BLOCK;
                let mut red = [[0.0; 3]; W];
                for (off, o) in chunk.iter_mut().enumerate() {
                    let i = base + off;
                    let mut acc = [0.0; W];
                    for (k, p) in probs.iter().enumerate() {
                        let src = &f[self.table[k][i] as usize];
                        for c in 0..W {
                            acc[c] += p * src[c];
                        }
                    }
                    kernel(i, acc, o, &mut red);
                }
                red
            })
            .collect();
        let mut total = [[0.0; 3]; W];
        for part in parts {
            for c in 0..W {
                for j in 0..3 {
                    total[c][j] += part[c][j];
                }
            }
        }
        total
    }

    /// Sparse push step: `(index, density)` pairs of `f * nu`.
    fn apply_sparse<S: Weight>(&self, probs: &[S], f: &[(u32, S)], inverse_table: &[Vec<u32>]) -> BTreeMap<u32, S> {
        let mut map = BTreeMap::new();
        for (i, w) in f {
            for (k, p) in probs.iter().enumerate() {
                let j = inverse_table[k][*i as usize];
                let e = map.entry(j).or_insert_with(S::zero);
                *e = e.clone() + w.clone() * p.clone();
            }
        }
        map
    }
}

/// `mu^(n)` by repeated single-step convolution against `mu`.
pub fn power<S: Weight>(ctx: &GroupCtx, mu: &Measure<S>, n: usize) -> Result<Measure<S>, WalkError> {
    let mut walk = Walk::new(ctx, mu)?;
    for _ in 0..n {
        walk.step();
    }
    Ok(walk.into_measure())
}

/// Incremental walk `mu^(0) = delta_id, mu^(n+1) = mu^(n) * mu`, sparse until dense.
pub struct Walk<S> {
    op: StepOperator,
    /// Forward tables `g_i -> g_i * s_k` for the sparse phase.
    forward: Vec<Vec<u32>>,
    probs: Vec<S>,
    current: Measure<S>,
    scratch: Vec<S>,
    steps: usize,
}

impl<S: Weight> Walk<S> {
    pub fn new(ctx: &GroupCtx, mu: &Measure<S>) -> Result<Self, WalkError> {
        let op = StepOperator::for_measure(ctx, mu)?;
        let n = S::from_count(op.order as u64);
        let probs: Vec<S> = mu.support().into_iter().map(|(_, w)| w / n.clone()).collect();
        // forward table for s_k is the backward table for s_k^-1
        let elems: Vec<GroupElem> = op
            .support
            .iter()
            .map(|&i| ctx.element_at(i as u64).map(|g| ctx.inv(&g)))
            .collect::<Result<_, _>>()?;
        let forward = StepOperator::new(ctx, &elems)?.table;
        let current = Measure::delta(ctx, &ctx.identity())?;
        Ok(Walk {
            op,
            forward,
            probs,
            current,
            scratch: Vec::new(),
            steps: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn measure(&self) -> &Measure<S> {
        &self.current
    }

    pub fn into_measure(self) -> Measure<S> {
        self.current
    }

    pub fn step(&mut self) {
        let order = self.op.order;
        self.current = match std::mem::replace(&mut self.current.storage, Storage::Sparse(Vec::new())) {
            Storage::Sparse(v) => {
                let map = self.op.apply_sparse(&self.probs, &v, &self.forward);
                Measure::from_map(order, map)
            }
            Storage::Dense(d) => {
                if self.scratch.len() != order {
                    self.scratch = vec![S::zero(); order];
                }
                self.op.apply(&self.probs, &d, &mut self.scratch);
                let out = std::mem::replace(&mut self.scratch, d);
                Measure {
                    order,
                    storage: Storage::Dense(out),
                }
            }
        };
        self.steps += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub n: usize,
    pub l2_norm: f64,
    pub linf_dist: f64,
    pub support_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub group_order: u64,
    pub kappa: f64,
    /// `|G|^{1/2 - kappa/2}`.
    pub phase1_threshold: f64,
    /// `|G|^{kappa/10}`.
    pub phase2_threshold: f64,
    /// `|G|^{-10}`, clamped below at `1e-14`.
    pub phase3_threshold: f64,
    pub phase3_threshold_unclamped: f64,
    /// Surrogate `|G|^{-1}`.
    pub phase3_surrogate_inv_order: f64,
    /// Surrogate `1e-12`.
    pub phase3_surrogate_abs: f64,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub n3: Option<usize>,
    pub n3_inv_order: Option<usize>,
    pub n3_abs: Option<usize>,
    pub n_max: usize,
    pub trajectory: Vec<TrajectoryRow>,
}

impl PhaseReport {
    /// Phases not reached within `n_max`, numbered 1 to 3.
    pub fn unreached(&self) -> Vec<u8> {
        [(1, self.n1), (2, self.n2), (3, self.n3)]
            .into_iter()
            .filter(|(_, n)| n.is_none())
            .map(|(p, _)| p)
            .collect()
    }
}

/// Absolute floor for the third-phase threshold.
pub const PHASE3_FLOOR: f64 = 1e-14;

/// Runs the walk for up to `n_max` steps and records when each phase threshold is first met.
/// Stops early once every threshold has been reached.
pub fn phase_trace(
    ctx: &GroupCtx,
    gens: &[GroupElem],
    kappa: f64,
    n_max: usize,
) -> Result<PhaseReport, WalkError> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(WalkError::BadKappa(kappa));
    }
    let mu: Measure<f64> = generator_measure(ctx, gens)?;
    let order = ctx.indexed_order()? as u64;
    let g = order as f64;
    let t3_raw = g.powi(-10);
    let mut rep = PhaseReport {
        group_order: order,
        kappa,
        phase1_threshold: g.powf(0.5 - kappa / 2.0),
        phase2_threshold: g.powf(kappa / 10.0),
        phase3_threshold: t3_raw.max(PHASE3_FLOOR),
        phase3_threshold_unclamped: t3_raw,
        phase3_surrogate_inv_order: 1.0 / g,
        phase3_surrogate_abs: 1e-12,
        n1: None,
        n2: None,
        n3: None,
        n3_inv_order: None,
        n3_abs: None,
        n_max,
        trajectory: Vec::new(),
    };
    let mut walk = Walk::new(ctx, &mu)?;
    let mut prev_l2 = f64::INFINITY;
    for n in 0..=n_max {
        if n > 0 {
            walk.step();
        }
        let m = walk.measure();
        let l2 = m.lp_norm(2);
        let dist = m.dist_to_uniform_inf();
        assert!(
            l2 <= prev_l2 * (1.0 + 1e-9) + 1e-12,
            "L2 norm increased at step {n}: {prev_l2} -> {l2}"
        );
        prev_l2 = l2;
        rep.trajectory.push(TrajectoryRow {
            n,
            l2_norm: l2,
            linf_dist: dist,
            support_size: m.support_size(),
        });
        let mark = |slot: &mut Option<usize>, hit: bool| {
            if slot.is_none() && hit {
                *slot = Some(n);
            }
        };
        mark(&mut rep.n1, l2 <= rep.phase1_threshold);
        mark(&mut rep.n2, l2 <= rep.phase2_threshold);
        mark(&mut rep.n3, dist <= rep.phase3_threshold);
        mark(&mut rep.n3_inv_order, dist <= rep.phase3_surrogate_inv_order);
        mark(&mut rep.n3_abs, dist <= rep.phase3_surrogate_abs);
        if rep.n1.is_some()
            && rep.n2.is_some()
            && rep.n3.is_some()
            && rep.n3_inv_order.is_some()
            && rep.n3_abs.is_some()
        {
            break;
        }
    }
    Ok(rep)
}

/// First `n <= n_max` with `||mu^(n) - 1||_inf <= threshold`.
pub fn mixing_time(
    ctx: &GroupCtx,
    gens: &[GroupElem],
    threshold: f64,
    n_max: usize,
) -> Result<Option<usize>, WalkError> {
    let mu: Measure<f64> = generator_measure(ctx, gens)?;
    let mut walk = Walk::new(ctx, &mu)?;
    for n in 0..=n_max {
        if n > 0 {
            walk.step();
        }
        if walk.measure().dist_to_uniform_inf() <= threshold {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
