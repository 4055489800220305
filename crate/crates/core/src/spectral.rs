// SPDX-License-Identifier: Apache-2.0

//! The averaging operator `T f = f * mu` of a symmetric generator measure, spectral-norm
//! estimates on mean-zero functions, bipartiteness, flattening and vertex-boundary checks.

use std::collections::{BTreeSet, VecDeque};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Family, GroupCtx, GroupElem, GroupError};
use crate::scalar::Weight;
use crate::seeding::stream_rng;
use crate::walk::{convolve, generator_measure, Measure, StepOperator, WalkError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("the set is empty")]
    EmptySet,
    #[error("d_min must be at least 1")]
    BadDimension,
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// `T` as a matrix-free operator on functions indexed canonically.
#[derive(Clone, Debug)]
pub struct AveragingOperator {
    op: StepOperator,
    probs: Vec<f64>,
    generators: usize,
}

impl AveragingOperator {
    pub fn new(ctx: &GroupCtx, gens: &[GroupElem]) -> Result<Self, SpectralError> {
        let mu: Measure<f64> = generator_measure(ctx, gens)?;
        Self::from_measure(ctx, &mu, gens.len())
    }

    fn from_measure(ctx: &GroupCtx, mu: &Measure<f64>, generators: usize) -> Result<Self, SpectralError> {
        let op = StepOperator::for_measure(ctx, mu)?;
        let probs = mu.support().iter().map(|(i, _)| mu.prob(*i as usize)).collect();
        Ok(AveragingOperator { op, probs, generators })
    }

    pub fn order(&self) -> usize {
        self.op.order()
    }

    /// Number of generators `k` (the measure has up to `2k` atoms).
    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>, SpectralError> {
        self.check_len(f.len())?;
        let mut out = vec![0.0; f.len()];
        self.op.apply_f64(&self.probs, f, &mut out);
        Ok(out)
    }

    /// Same as [`AveragingOperator::apply`] in any scalar type.
    pub fn apply_generic<S: Weight>(&self, f: &[S]) -> Result<Vec<S>, SpectralError> {
        self.check_len(f.len())?;
        let probs: Vec<S> = self
            .probs
            .iter()
            .map(|p| S::from_f64(*p).expect("finite probability"))
            .collect();
        let mut out = vec![S::zero(); f.len()];
        self.op.apply(&probs, f, &mut out);
        Ok(out)
    }

    pub fn apply_block<const W: usize>(&self, f: &[[f64; W]], out: &mut [[f64; W]]) {
        self.op.apply_block(&self.probs, f, out);
    }

    fn check_len(&self, got: usize) -> Result<(), SpectralError> {
        if got != self.order() {
            return Err(SpectralError::LengthMismatch {
                got,
                expected: self.order(),
            });
        }
        Ok(())
    }
}

/// `T f` for the generator measure of `gens`.
pub fn apply_t(ctx: &GroupCtx, gens: &[GroupElem], f: &[f64]) -> Result<Vec<f64>, SpectralError> {
    AveragingOperator::new(ctx, gens)?.apply(f)
}

/// Normalized inner product `E f g`.
pub fn inner(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / f.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub group_order: u64,
    /// Estimate of `||T||` on mean-zero functions: `max(lambda_signed_max, -lambda_signed_min)`.
    pub lambda_abs: f64,
    pub lambda_signed_max: f64,
    pub lambda_signed_min: f64,
    /// `1 - lambda_abs`.
    pub epsilon: f64,
    /// Upper bound `min_m ||T^m (delta_e - 1)||^{1/m}` on the mean-zero norm.
    pub lambda_upper: f64,
    /// `1 - lambda_upper`.
    pub epsilon_lower: f64,
    pub iterations: usize,
    /// Relative residual `||T f - lambda f|| / ||f||` of the vector attaining `lambda_abs`.
    pub residual: f64,
    pub converged: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Random starts per shift.
pub const RESTARTS: usize = 3;
pub const DEFAULT_TOL: f64 = 1e-8;

/// `10 sqrt|G| + 1000`, capped at `10^5`.
pub fn default_max_iter(order: usize) -> usize {
    ((10.0 * (order as f64).sqrt()) as usize + 1000).min(100_000)
}

const RED_BLOCK: usize = 1 << 14;

/// Column-wise sums over a block, reduced in a fixed order.
fn column_sums<const W: usize, F>(n: usize, f: F) -> [f64; W]
where
    F: Fn(usize) -> [f64; W] + Sync,
{
    let parts: Vec<[f64; W]> = (0..n.div_ceil(RED_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = [0.0; W];
            for i in b * RED_BLOCK..((b + 1) * RED_BLOCK).min(n) {
                let v = f(i);
                for c in 0..W {
                    acc[c] += v[c];
                }
            }
            acc
        })
        .collect();
    let mut acc = [0.0; W];
    for p in parts {
        for c in 0..W {
            acc[c] += p[c];
        }
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    /// `(T + I)/2` from a random start.
    Plus(u64),
    /// `(I - T)/2` from a random start.
    Minus(u64),
    /// `T` from `delta_e - 1`.
    Cert,
}

#[derive(Clone, Copy, Debug)]
struct ColumnResult {
    /// Rayleigh quotient of the iterated operator.
    rho: f64,
    /// Residual in units of `T`.
    residual: f64,
    /// Certificate bound, for [`Column::Cert`].
    upper: f64,
}

/// Iterates `W` columns together until each residual is below `tol` (certificate columns
/// never stop early) or `max_iter` is reached.
///
/// The iterate of column `c` is kept as `alpha[c] * (v - beta[c])` with `v` the stored vector,
/// so projection onto mean zero and normalization cost nothing extra: since `T 1 = 1`, both
/// fold into the next operator pass.
fn run_columns<const W: usize>(
    op: &AveragingOperator,
    identity: usize,
    cols: [Column; W],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> ([ColumnResult; W], usize) {
    let n = op.order();
    let nf = n as f64;
    let mut v = vec![[0.0f64; W]; n];
    for (c, col) in cols.iter().enumerate() {
        match col {
            Column::Plus(s) | Column::Minus(s) => {
                let mut rng = stream_rng(seed, *s);
                for x in v.iter_mut() {
                    x[c] = rng.gen_range(-1.0..1.0);
                }
            }
            Column::Cert => {
                for (i, x) in v.iter_mut().enumerate() {
                    x[c] = if i == identity { nf - 1.0 } else { -1.0 };
                }
            }
        }
    }
    let beta = column_sums::<W, _>(n, |i| v[i]).map(|s| s / nf);
    let sd: [f64; W] = {
        let sq = column_sums::<W, _>(n, |i| {
            let mut d = [0.0; W];
            for c in 0..W {
                d[c] = (v[i][c] - beta[c]).powi(2);
            }
            d
        });
        sq.map(|s| (s / nf).sqrt())
    };
    let mut beta = beta;
    let mut alpha = sd.map(|s| if s > 0.0 { 1.0 / s } else { 0.0 });
    let mut live = sd.map(|s| s > 0.0);
    let mut out = [ColumnResult {
        rho: 0.0,
        residual: 0.0,
        upper: 0.0,
    }; W];
    // ||T^m (delta_e - 1)||^2 = sum over nontrivial eigenvalues of dim * lambda^{2m}
    let mut log_cert = [0.0; W];
    for c in 0..W {
        if live[c] {
            out[c].residual = f64::INFINITY;
            out[c].upper = f64::INFINITY;
            log_cert[c] = sd[c].ln();
        }
    }
    if n <= 1 || !live.iter().any(|&l| l) {
        return (out, 0);
    }
    let mut w = vec![[0.0f64; W]; n];
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let (a, b) = (alpha, beta);
        let red = op.op.apply_block_reduce(&op.probs, &v, &mut w, |i, tv, o, red| {
            for c in 0..W {
                let f = a[c] * (v[i][c] - b[c]);
                let t = a[c] * (tv[c] - b[c]);
                let s = match cols[c] {
                    Column::Plus(_) => 0.5 * (t + f),
                    Column::Minus(_) => 0.5 * (f - t),
                    Column::Cert => t,
                };
                o[c] = s;
                red[c][0] += s;
                red[c][1] += s * s;
                red[c][2] += s * f;
            }
        });
        let mut rho = [0.0; W];
        let mut mean = [0.0; W];
        let mut norm = [0.0; W];
        let mut cheap = [0.0; W];
        for c in 0..W {
            mean[c] = red[c][0] / nf;
            let q = red[c][1] / nf;
            rho[c] = red[c][2] / nf;
            norm[c] = (q - mean[c] * mean[c]).max(0.0).sqrt();
            cheap[c] = (q - rho[c] * rho[c]).max(0.0).sqrt();
        }
        let scale = cols.map(|c| if c == Column::Cert { 1.0 } else { 2.0 });
        // the cheap residual loses accuracy to cancellation; recompute near convergence
        let exact_needed = (0..W).any(|c| live[c] && scale[c] * cheap[c] <= 1e-4) || it == max_iter;
        let residual = if exact_needed {
            column_sums::<W, _>(n, |i| {
                let mut d = [0.0; W];
                for c in 0..W {
                    let f = a[c] * (v[i][c] - b[c]);
                    d[c] = (w[i][c] - rho[c] * f).powi(2);
                }
                d
            })
            .map(|s| (s / nf).sqrt())
        } else {
            cheap
        };
        std::mem::swap(&mut v, &mut w);
        let mut done = true;
        for c in 0..W {
            if !live[c] {
                continue;
            }
            out[c].rho = rho[c];
            out[c].residual = scale[c] * residual[c];
            if cols[c] == Column::Cert {
                log_cert[c] += norm[c].max(f64::MIN_POSITIVE).ln();
                out[c].upper = out[c].upper.min((log_cert[c] / it as f64).exp());
                done = false;
            } else if out[c].residual > tol {
                done = false;
            }
            if norm[c] > 0.0 {
                alpha[c] = 1.0 / norm[c];
                beta[c] = mean[c];
            } else {
                live[c] = false;
                out[c].residual = 0.0;
            }
        }
        if done || !live.iter().any(|&l| l) {
            break;
        }
    }
    (out, it)
}

/// [`spectral_norm_meanzero`] on a prebuilt operator; `identity` is the canonical index of `e`.
///
/// Each start runs on its own (interleaving several vectors pushes large groups out of cache);
/// the certificate vector runs last for as many steps as the longest start needed.
pub fn power_iteration(
    op: &AveragingOperator,
    identity: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> SpectralReport {
    let n = op.order();
    let (mut lmax, mut rmax, mut cmax) = (f64::NEG_INFINITY, f64::INFINITY, false);
    let (mut lmin, mut rmin, mut cmin) = (f64::INFINITY, f64::INFINITY, false);
    let mut iterations = 0;
    for r in 0..RESTARTS as u64 {
        let (r0, i0) = run_columns(op, identity, [Column::Plus(2 * r)], tol, max_iter, seed);
        let (r1, i1) = run_columns(op, identity, [Column::Minus(2 * r + 1)], tol, max_iter, seed);
        let res = [r0[0], r1[0]];
        iterations = iterations.max(i0).max(i1);
        let up = 2.0 * res[0].rho - 1.0;
        if up > lmax {
            (lmax, rmax, cmax) = (up, res[0].residual, res[0].residual <= tol);
        }
        let down = 1.0 - 2.0 * res[1].rho;
        if down < lmin {
            (lmin, rmin, cmin) = (down, res[1].residual, res[1].residual <= tol);
        }
    }
    let (cert, _) = run_columns(op, identity, [Column::Cert], tol, iterations, seed);
    if n <= 1 {
        (lmax, lmin, rmax, rmin, cmax, cmin) = (0.0, 0.0, 0.0, 0.0, true, true);
    }
    let (lambda_abs, residual) = if lmax >= -lmin { (lmax, rmax) } else { (-lmin, rmin) };
    let lambda_abs = lambda_abs.clamp(0.0, 1.0);
    let lambda_upper = cert[0].upper.max(lambda_abs).min(1.0);
    SpectralReport {
        group_order: n as u64,
        lambda_abs,
        lambda_signed_max: lmax,
        lambda_signed_min: lmin,
        epsilon: 1.0 - lambda_abs,
        lambda_upper,
        epsilon_lower: 1.0 - lambda_upper,
        iterations,
        residual,
        converged: cmax && cmin,
        tol,
        max_iter,
        restarts: RESTARTS,
        seed,
    }
}


/// Power iteration for the extreme eigenvalues of `T` on mean-zero functions.
///
/// `RESTARTS` random starts iterate `(T + I)/2` and as many iterate `(I - T)/2`, the largest
/// estimate of each kept; one more vector iterates `T` from `delta_e - 1` to produce
/// [`SpectralReport::lambda_upper`]. Every step re-projects onto mean zero.
pub fn spectral_norm_meanzero(
    ctx: &GroupCtx,
    gens: &[GroupElem],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralReport, SpectralError> {
    let op = AveragingOperator::new(ctx, gens)?;
    let id = ctx.canonical_index(&ctx.identity())? as usize;
    Ok(power_iteration(&op, id, tol, max_iter, seed))
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bipartiteness {
    NotBipartite { reason: String },
    /// Generators of the kernel of a sign character that is `-1` on every generator.
    Bipartite { kernel_generators: Vec<GroupElem> },
}

impl Bipartiteness {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartiteness::Bipartite { .. })
    }
}

/// Whether the family is known to be perfect (so has no index-2 subgroup).
fn is_perfect(ctx: &GroupCtx) -> bool {
    let q = ctx.field_opt().map(|f| f.size()).unwrap_or(0);
    match ctx.family() {
        Family::SL(m) => !(m == 2 && q <= 3),
        Family::Sp4 => q > 2,
        Family::SU3 => ctx.q_tilde() > 2,
        Family::Cyclic(n) => n == 1,
    }
}

/// Looks for an index-2 subgroup of `<gens>` avoiding every generator.
pub fn bipartite_detect(ctx: &GroupCtx, gens: &[GroupElem]) -> Result<Bipartiteness, SpectralError> {
    if gens.is_empty() {
        return Err(WalkError::EmptyGenerators.into());
    }
    if let Family::Cyclic(n) = ctx.family() {
        return Ok(if n % 2 == 0 && gens.iter().all(|g| g.residue() % 2 == 1) {
            Bipartiteness::Bipartite {
                kernel_generators: vec![ctx.cyclic_elem(2 % n)],
            }
        } else if n % 2 == 1 {
            Bipartiteness::NotBipartite {
                reason: "odd order".into(),
            }
        } else {
            Bipartiteness::NotBipartite {
                reason: "a generator lies in the parity kernel".into(),
            }
        });
    }
    if is_perfect(ctx) {
        return Ok(Bipartiteness::NotBipartite {
            reason: "perfect group has no index-2 subgroup".into(),
        });
    }
    // two-colour the Cayley graph of <gens>
    let order = ctx.indexed_order()?;
    let mut colour = vec![u8::MAX; order];
    let e = ctx.identity();
    let start = ctx.canonical_index(&e)? as usize;
    colour[start] = 0;
    let mut queue = VecDeque::from([e]);
    let mut steps = Vec::new();
    for g in gens {
        steps.push(*g);
        steps.push(ctx.inv(g));
    }
    while let Some(x) = queue.pop_front() {
        let cx = colour[ctx.canonical_index(&x)? as usize];
        for s in &steps {
            let y = ctx.mul(&x, s);
            let iy = ctx.canonical_index(&y)? as usize;
            if colour[iy] == u8::MAX {
                colour[iy] = 1 - cx;
                queue.push_back(y);
            } else if colour[iy] == cx {
                return Ok(Bipartiteness::NotBipartite {
                    reason: "odd cycle in the Cayley graph".into(),
                });
            }
        }
    }
    let mut kernel = Vec::new();
    for a in gens {
        for b in gens {
            kernel.push(ctx.mul(a, b));
        }
    }
    Ok(Bipartiteness::Bipartite {
        kernel_generators: kernel,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnpReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub d_min: u64,
}

/// `||nu1 * nu2 - 1||_2 <= d_min^{-1/2} ||nu1 - 1||_2 ||nu2 - 1||_2`, both sides computed densely.
pub fn bnp_check<S: Weight>(
    ctx: &GroupCtx,
    nu1: &Measure<S>,
    nu2: &Measure<S>,
    d_min: u64,
) -> Result<BnpReport, SpectralError> {
    if d_min == 0 {
        return Err(SpectralError::BadDimension);
    }
    let conv = convolve(ctx, nu1, nu2)?;
    let lhs = conv.dist_to_uniform_l2_squared().as_f64().sqrt();
    let a = nu1.dist_to_uniform_l2_squared().as_f64().sqrt();
    let b = nu2.dist_to_uniform_l2_squared().as_f64().sqrt();
    let rhs = a * b / (d_min as f64).sqrt();
    Ok(BnpReport {
        holds: lhs <= rhs + 1e-9,
        lhs,
        rhs,
        d_min,
    })
}

/// `|S A \ A| / |A|` with `S A = U_s (A s U A s^-1)`.
pub fn boundary_ratio(ctx: &GroupCtx, gens: &[GroupElem], a: &[GroupElem]) -> Result<f64, SpectralError> {
    if a.is_empty() {
        return Err(SpectralError::EmptySet);
    }
    let set: BTreeSet<u64> = a
        .iter()
        .map(|g| ctx.canonical_index(g))
        .collect::<Result<_, _>>()?;
    let mut boundary = BTreeSet::new();
    for g in a {
        for s in gens {
            for t in [*s, ctx.inv(s)] {
                let i = ctx.canonical_index(&ctx.mul(g, &t))?;
                if !set.contains(&i) {
                    boundary.insert(i);
                }
            }
        }
    }
    Ok(boundary.len() as f64 / set.len() as f64)
}
