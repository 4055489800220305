// SPDX-License-Identifier: Apache-2.0

//! Bruhat cells of `SL_m` and the twisted chart of `SU_3`.
//!
//! Every `g` in `SL_m(F_q)` is uniquely `u1 * h * n_w * u` with `u1` upper unitriangular,
//! `h = diag(t_1, .., t_{m-1}, 1/prod t)`, `n_w` a signed permutation matrix and `u` upper
//! unitriangular supported on the positions `(i, j)`, `i < j`, with `w^-1(i) > w^-1(j)`.
//! A permutation `w` is stored as the vector `w[row] = column` of the nonzero entries of `n_w`.

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldCtx, FieldElem};
use crate::group::{perm_sign, permutations_with_sign, Family, GroupCtx, GroupElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BruhatError {
    #[error("torus parameter is zero")]
    ZeroTorusParam,
    #[error("operation needs an SL_m context, got {0}")]
    UnsupportedFamily(Family),
    #[error("malformed coordinates: {0}")]
    BadCoords(String),
    #[error("matrix is not in the group")]
    NotMember,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BruhatCoords {
    pub perm: Vec<usize>,
    /// Strictly upper entries of `u1`, row-major.
    pub u1: Vec<FieldElem>,
    /// `t_1 .. t_{m-1}`.
    pub t: Vec<FieldElem>,
    /// Entries of `u` on [`u2_positions`], in that order.
    pub u2: Vec<FieldElem>,
}

/// All permutations of `0..m` in lexicographic order.
pub fn weyl_elements(m: usize) -> Vec<Vec<usize>> {
    permutations_with_sign(m).into_iter().map(|(p, _)| p).collect()
}

/// The longest element `i -> m-1-i`.
pub fn long_word(m: usize) -> Vec<usize> {
    (0..m).rev().collect()
}

/// Number of inversions of `perm`.
pub fn length(perm: &[usize]) -> usize {
    let m = perm.len();
    (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count()
}

fn inverse_perm(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (r, &c) in perm.iter().enumerate() {
        inv[c] = r;
    }
    inv
}

/// Free positions of the right unipotent factor for `perm`.
pub fn u2_positions(perm: &[usize]) -> Vec<(usize, usize)> {
    let inv = inverse_perm(perm);
    let m = perm.len();
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if inv[i] > inv[j] {
                out.push((i, j));
            }
        }
    }
    out
}

fn upper_positions(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
}

fn require_sl(ctx: &GroupCtx) -> Result<usize, BruhatError> {
    match ctx.family() {
        Family::SL(m) => Ok(m),
        f => Err(BruhatError::UnsupportedFamily(f)),
    }
}

fn unipotent(ctx: &GroupCtx, pos: &[(usize, usize)], vals: &[FieldElem]) -> GroupElem {
    let mut rows = ctx.identity().rows();
    for (&(i, j), &v) in pos.iter().zip(vals) {
        rows[i][j] = v;
    }
    GroupElem::from_rows_unchecked(&rows)
}

/// Signed permutation matrix of determinant one: entry `(r, perm[r])` is 1, except that
/// row 0 carries -1 when `perm` is odd.
pub fn weyl_rep(ctx: &GroupCtx, perm: &[usize]) -> GroupElem {
    let f = ctx.field();
    let m = perm.len();
    let mut rows = vec![vec![FieldElem::ZERO; m]; m];
    for (r, &c) in perm.iter().enumerate() {
        rows[r][c] = FieldElem::ONE;
    }
    if perm_sign(perm) < 0 {
        rows[0][perm[0]] = f.neg(FieldElem::ONE);
    }
    GroupElem::from_rows_unchecked(&rows)
}

fn torus(ctx: &GroupCtx, t: &[FieldElem]) -> Result<GroupElem, BruhatError> {
    let f = ctx.field();
    let m = t.len() + 1;
    let mut rows = vec![vec![FieldElem::ZERO; m]; m];
    let mut prod = FieldElem::ONE;
    for (i, &x) in t.iter().enumerate() {
        let xi = f.try_inv(x).ok_or(BruhatError::ZeroTorusParam)?;
        rows[i][i] = x;
        prod = f.mul(prod, xi);
    }
    rows[m - 1][m - 1] = prod;
    Ok(GroupElem::from_rows_unchecked(&rows))
}

/// `u1 * h * n_w * u`.
pub fn compose(ctx: &GroupCtx, c: &BruhatCoords) -> Result<GroupElem, BruhatError> {
    let m = require_sl(ctx)?;
    let up = upper_positions(m);
    let free = u2_positions(&c.perm);
    let mut sorted = c.perm.clone();
    sorted.sort_unstable();
    if c.perm.len() != m
        || sorted != (0..m).collect::<Vec<_>>()
        || c.u1.len() != up.len()
        || c.t.len() != m - 1
        || c.u2.len() != free.len()
    {
        return Err(BruhatError::BadCoords(format!("{c:?}")));
    }
    let u1 = unipotent(ctx, &up, &c.u1);
    let h = torus(ctx, &c.t)?;
    let n = weyl_rep(ctx, &c.perm);
    let u = unipotent(ctx, &free, &c.u2);
    Ok(ctx.mul(&ctx.mul(&ctx.mul(&u1, &h), &n), &u))
}

/// Inverse of [`compose`], by Gaussian elimination.
pub fn decompose(ctx: &GroupCtx, g: &GroupElem) -> Result<BruhatCoords, BruhatError> {
    let m = require_sl(ctx)?;
    if !ctx.is_member_elem(g) {
        return Err(BruhatError::NotMember);
    }
    let f = ctx.field();
    let mut a = g.rows();
    // right factor accumulated from column operations
    let mut r = ctx.identity().rows();
    let mut perm = vec![usize::MAX; m];
    let mut used = vec![false; m];
    for row in (0..m).rev() {
        let piv = (0..m)
            .find(|&c| !used[c] && !a[row][c].is_zero())
            .expect("invertible matrix has a pivot in every row");
        perm[row] = piv;
        used[piv] = true;
        let pinv = f.inv(a[row][piv]);
        // clear the row to the right of the pivot with column operations
        for j in piv + 1..m {
            if a[row][j].is_zero() {
                continue;
            }
            let factor = f.mul(a[row][j], pinv);
            for i in 0..m {
                a[i][j] = f.sub(a[i][j], f.mul(factor, a[i][piv]));
                r[i][j] = f.sub(r[i][j], f.mul(factor, r[i][piv]));
            }
        }
        // clear the column above the pivot with row operations
        for i in 0..row {
            if a[i][piv].is_zero() {
                continue;
            }
            let factor = f.mul(a[i][piv], pinv);
            for j in 0..m {
                a[i][j] = f.sub(a[i][j], f.mul(factor, a[row][j]));
            }
        }
    }
    // a = h n_w now; recover t from the diagonal of h
    let n = weyl_rep(ctx, &perm);
    let mut t = Vec::with_capacity(m - 1);
    for (row, &c) in perm.iter().enumerate().take(m - 1) {
        t.push(f.mul(a[row][c], n.get(row, c)));
    }
    let rmat = GroupElem::from_rows_unchecked(&r);
    let u = ctx.inv(&rmat);
    let h = torus(ctx, &t)?;
    let hn = ctx.mul(&h, &n);
    let u1 = ctx.mul(&ctx.mul(g, &rmat), &ctx.inv(&hn));
    let coords = BruhatCoords {
        u1: upper_positions(m).iter().map(|&(i, j)| u1.get(i, j)).collect(),
        u2: u2_positions(&perm).iter().map(|&(i, j)| u.get(i, j)).collect(),
        perm,
        t,
    };
    Ok(coords)
}

/// `q^{|Phi+|} (q-1)^{m-1} q^{d_w}`.
pub fn cell_size(ctx: &GroupCtx, perm: &[usize]) -> Result<BigUint, BruhatError> {
    let m = require_sl(ctx)?;
    let q = BigUint::from(ctx.field().size());
    let pos = (m * (m - 1) / 2 + length(perm)) as u32;
    Ok(q.pow(pos) * (&q - 1u32).pow(m as u32 - 1))
}

/// Uniform sample from the cell of `perm`.
pub fn sample_cell<R: Rng + ?Sized>(
    ctx: &GroupCtx,
    perm: &[usize],
    rng: &mut R,
) -> Result<GroupElem, BruhatError> {
    let m = require_sl(ctx)?;
    let f = ctx.field();
    let coords = BruhatCoords {
        perm: perm.to_vec(),
        u1: (0..m * (m - 1) / 2).map(|_| f.random(rng)).collect(),
        t: (0..m - 1).map(|_| f.random_nonzero(rng)).collect(),
        u2: (0..length(perm)).map(|_| f.random(rng)).collect(),
    };
    compose(ctx, &coords)
}

/// Exactly uniform sample from `SL_m`: a cell drawn with probability `|cell| / |G|`, then
/// uniform coordinates.
pub fn sample_uniform<R: Rng + ?Sized>(ctx: &GroupCtx, rng: &mut R) -> GroupElem {
    let m = require_sl(ctx).expect("SL_m context");
    let mut x = rng.gen_biguint_below(ctx.order());
    for w in weyl_elements(m) {
        let size = cell_size(ctx, &w).unwrap();
        if x < size {
            return sample_cell(ctx, &w, rng).unwrap();
        }
        x -= size;
    }
    unreachable!("cell sizes sum to the group order")
}

/// Every element of one cell, by enumerating its coordinates.
pub fn cell_elements(ctx: &GroupCtx, perm: &[usize]) -> Result<Vec<GroupElem>, BruhatError> {
    let m = require_sl(ctx)?;
    let f = ctx.field();
    let q = f.size();
    let n_up = m * (m - 1) / 2;
    let n_u2 = length(perm);
    let total = cell_size(ctx, perm)?;
    if total > BigUint::from(10_000_000u64) {
        return Err(BruhatError::BadCoords("cell too large to enumerate".into()));
    }
    let mut out = Vec::new();
    let radix: Vec<u64> = std::iter::repeat(q)
        .take(n_up)
        .chain(std::iter::repeat(q - 1).take(m - 1))
        .chain(std::iter::repeat(q).take(n_u2))
        .collect();
    let mut digits = vec![0u64; radix.len()];
    loop {
        let coords = BruhatCoords {
            perm: perm.to_vec(),
            u1: digits[..n_up].iter().map(|&d| FieldElem::from_code(d)).collect(),
            t: digits[n_up..n_up + m - 1].iter().map(|&d| FieldElem::from_code(d + 1)).collect(),
            u2: digits[n_up + m - 1..].iter().map(|&d| FieldElem::from_code(d)).collect(),
        };
        out.push(compose(ctx, &coords)?);
        // odometer increment
        let mut i = 0;
        loop {
            if i == radix.len() {
                return Ok(out);
            }
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// `|big cell| / |G|`.
pub fn big_cell_fraction(ctx: &GroupCtx) -> Result<f64, BruhatError> {
    let m = require_sl(ctx)?;
    let big = cell_size(ctx, &long_word(m))?;
    Ok(ratio(&big, ctx.order()))
}

pub(crate) fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    // scale down to keep precision for huge values
    let bits = b.bits().saturating_sub(60);
    let a = (a >> bits).to_string().parse::<f64>().unwrap();
    let b = (b >> bits).to_string().parse::<f64>().unwrap();
    a / b
}

// ---- SU_3 -------------------------------------------------------------------------------

/// Chart data for `SU_3`. Computations happen in the group preserving the antidiagonal
/// Hermitian form `J`, then move to the identity form by a fixed change of basis `P`.
#[derive(Clone, Debug)]
pub struct Su3Chart {
    p_mat: GroupElem,
    p_inv: GroupElem,
    /// `theta + sigma(theta) = 1`.
    theta: FieldElem,
    /// Nonzero element spanning the trace-zero line over `F_{q~}`.
    kernel_unit: FieldElem,
}

impl Su3Chart {
    pub(crate) fn new(ctx: &GroupCtx) -> Self {
        let f = ctx.field();
        let s = f.degree() / 2;
        let sigma = |x: FieldElem| f.frobenius(x, s);
        let find = |pred: &dyn Fn(FieldElem) -> bool| -> FieldElem {
            (0..f.size())
                .map(FieldElem::from_code)
                .find(|&x| pred(x))
                .expect("element exists in every finite field")
        };
        let theta = find(&|x| f.add(x, sigma(x)) == FieldElem::ONE);
        let kernel_unit = if f.characteristic() == 2 {
            FieldElem::ONE
        } else {
            find(&|x| !x.is_zero() && sigma(x) == f.neg(x))
        };
        // s0 * sigma(s0) = -1
        let s0 = find(&|x| f.mul(x, sigma(x)) == f.neg(FieldElem::ONE));
        // columns: e1 + theta e3, e2, s0 (e1 - sigma(theta) e3)
        let mut p = GroupElem::zero_matrix(3);
        let rows = vec![
            vec![FieldElem::ONE, FieldElem::ZERO, s0],
            vec![FieldElem::ZERO, FieldElem::ONE, FieldElem::ZERO],
            vec![theta, FieldElem::ZERO, f.neg(f.mul(s0, sigma(theta)))],
        ];
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                p = set_entry(p, i, j, x);
            }
        }
        let det = ctx.det(&p);
        let adj = ctx.adjugate(&p);
        let dinv = f.inv(det);
        let mut p_inv = adj;
        for i in 0..3 {
            for j in 0..3 {
                p_inv = set_entry(p_inv, i, j, f.mul(adj.get(i, j), dinv));
            }
        }
        Su3Chart {
            p_mat: p,
            p_inv,
            theta,
            kernel_unit,
        }
    }
}

fn set_entry(g: GroupElem, i: usize, j: usize, x: FieldElem) -> GroupElem {
    let mut rows = g.rows();
    rows[i][j] = x;
    GroupElem::from_rows_unchecked(&rows)
}

fn su3_field(ctx: &GroupCtx) -> (&FieldCtx, usize) {
    assert_eq!(ctx.family(), Family::SU3, "SU_3 context required");
    let f = ctx.field();
    (f, f.degree() / 2)
}

/// Root element `[[1, t, u], [0, 1, -t~], [0, 0, 1]]` with `u = -theta t t~ + c * unit`,
/// which solves `u + u~ = -t t~` for every `c` in `F_{q~}`.
fn su3_root(ctx: &GroupCtx, t: FieldElem, c: FieldElem) -> GroupElem {
    let (f, s) = su3_field(ctx);
    let chart = ctx.su3_chart();
    let tb = f.frobenius(t, s);
    let u = f.add(
        f.neg(f.mul(chart.theta, f.mul(t, tb))),
        f.mul(c, chart.kernel_unit),
    );
    GroupElem::from_rows_unchecked(&[
        vec![FieldElem::ONE, t, u],
        vec![FieldElem::ZERO, FieldElem::ONE, f.neg(tb)],
        vec![FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE],
    ])
}

fn su3_torus(ctx: &GroupCtx, lambda: FieldElem) -> GroupElem {
    let (f, s) = su3_field(ctx);
    let lb = f.frobenius(lambda, s);
    GroupElem::from_rows_unchecked(&[
        vec![lambda, FieldElem::ZERO, FieldElem::ZERO],
        vec![FieldElem::ZERO, f.mul(lb, f.inv(lambda)), FieldElem::ZERO],
        vec![FieldElem::ZERO, FieldElem::ZERO, f.inv(lb)],
    ])
}

fn su3_weyl(ctx: &GroupCtx) -> GroupElem {
    let f = ctx.field();
    GroupElem::from_rows_unchecked(&[
        vec![FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE],
        vec![FieldElem::ZERO, f.neg(FieldElem::ONE), FieldElem::ZERO],
        vec![FieldElem::ONE, FieldElem::ZERO, FieldElem::ZERO],
    ])
}

fn to_identity_form(ctx: &GroupCtx, g: &GroupElem) -> GroupElem {
    let chart = ctx.su3_chart();
    ctx.mul(&ctx.mul(&chart.p_inv, g), &chart.p_mat)
}

/// Big-cell element `U(t1, c1) T(lambda) n_{w0} U(t2, c2)`, with `c1, c2` in `F_{q~}`.
pub fn su3_big_cell(
    ctx: &GroupCtx,
    t1: FieldElem,
    c1: FieldElem,
    lambda: FieldElem,
    t2: FieldElem,
    c2: FieldElem,
) -> Result<GroupElem, BruhatError> {
    if lambda.is_zero() {
        return Err(BruhatError::ZeroTorusParam);
    }
    let g = ctx.mul(
        &ctx.mul(&su3_root(ctx, t1, c1), &su3_torus(ctx, lambda)),
        &ctx.mul(&su3_weyl(ctx), &su3_root(ctx, t2, c2)),
    );
    Ok(to_identity_form(ctx, &g))
}

/// Small-cell (Borel) element `U(t, c) T(lambda)`.
pub fn su3_small_cell(
    ctx: &GroupCtx,
    t: FieldElem,
    c: FieldElem,
    lambda: FieldElem,
) -> Result<GroupElem, BruhatError> {
    if lambda.is_zero() {
        return Err(BruhatError::ZeroTorusParam);
    }
    let g = ctx.mul(&su3_root(ctx, t, c), &su3_torus(ctx, lambda));
    Ok(to_identity_form(ctx, &g))
}

/// `(|big cell|, |small cell|)` = `(q~^6 (q~^2 - 1), q~^3 (q~^2 - 1))`.
pub fn su3_cell_sizes(ctx: &GroupCtx) -> (BigUint, BigUint) {
    let qt = BigUint::from(ctx.q_tilde());
    let t = qt.pow(2) - 1u32;
    (qt.pow(6) * &t, qt.pow(3) * t)
}

/// Uniform sample from `SU_3`, returned with a flag that is set when the sample is biased.
/// Both cells are parameterized exactly, so the flag is always false.
pub fn su3_sample<R: Rng + ?Sized>(ctx: &GroupCtx, rng: &mut R) -> (GroupElem, bool) {
    let (f, s) = su3_field(ctx);
    // x + sigma(x) is uniform on F_{q~} for uniform x
    let sub = |rng: &mut R| {
        let x = f.random(rng);
        f.add(x, f.frobenius(x, s))
    };
    let (big, _) = su3_cell_sizes(ctx);
    let pick = rng.gen_biguint_below(ctx.order());
    let lambda = f.random_nonzero(rng);
    let t1 = f.random(rng);
    let c1 = sub(rng);
    let g = if pick < big {
        let t2 = f.random(rng);
        let c2 = sub(rng);
        su3_big_cell(ctx, t1, c1, lambda, t2, c2)
    } else {
        su3_small_cell(ctx, t1, c1, lambda)
    };
    (g.expect("lambda is nonzero"), false)
}

/// Whether the chart and a fresh order sum agree (`|big| + |small| = |G|`).
pub fn su3_sizes_consistent(ctx: &GroupCtx) -> bool {
    let (b, s) = su3_cell_sizes(ctx);
    &(b + s) == ctx.order()
}

/// Sum of all SL_m cell sizes.
pub fn total_cell_size(ctx: &GroupCtx) -> Result<BigUint, BruhatError> {
    let m = require_sl(ctx)?;
    let mut acc = BigUint::zero();
    for w in weyl_elements(m) {
        acc += cell_size(ctx, &w)?;
    }
    Ok(acc)
}
