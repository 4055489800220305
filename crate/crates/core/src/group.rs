// SPDX-License-Identifier: Apache-2.0

//! Matrix groups `SL_m(F_q)`, `Sp_4(F_q)`, `SU_3(F_{q~^2})` and the test-only cyclic group.
//!
//! Elements are small dense matrices stored inline. Every context can map its elements
//! to a canonical index in `[0, |G|)` so measures can be stored as plain vectors.

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bruhat;
use crate::field::{FieldCtx, FieldElem, FieldError};

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 4;
/// Default cap on the group order for canonical indexing.
pub const DEFAULT_INDEX_CAP: u64 = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `SL_m`, `m` in `2..=4`.
    SL(usize),
    Sp4,
    SU3,
    /// `Z/nZ`; only for tests and exact spectral oracles.
    Cyclic(u64),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::SL(m) => write!(f, "sl{m}"),
            Family::Sp4 => write!(f, "sp4"),
            Family::SU3 => write!(f, "su3"),
            Family::Cyclic(n) => write!(f, "cyclic{n}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element does not belong to this group context")]
    ContextMismatch,
    #[error("expected a {expected}x{expected} matrix, got {got}")]
    DimensionMismatch { expected: usize, got: String },
    #[error("group of order {order} exceeds the index cap {cap}")]
    GroupTooLarge { order: String, cap: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("SU_3 needs an even field degree, got {0}")]
    UnsupportedFieldDegree(usize),
    #[error("index {0} out of range")]
    IndexOutOfRange(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A group element. Matrices are row-major in `e[..dim*dim]`; cyclic residues live in `e[0]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElem {
    dim: u8,
    e: [FieldElem; 16],
}

impl GroupElem {
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElem {
        self.e[i * self.dim as usize + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, x: FieldElem) {
        self.e[i * self.dim as usize + j] = x;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[FieldElem] {
        let d = self.dim as usize;
        &self.e[..d * d]
    }

    /// Residue of a cyclic-group element.
    pub fn residue(&self) -> u64 {
        self.e[0].code()
    }

    pub fn rows(&self) -> Vec<Vec<FieldElem>> {
        let d = self.dim as usize;
        (0..d).map(|i| self.e[i * d..(i + 1) * d].to_vec()).collect()
    }

    pub(crate) fn zero_matrix(dim: usize) -> Self {
        GroupElem {
            dim: dim as u8,
            e: [FieldElem::ZERO; 16],
        }
    }

    /// Builds a matrix from rows without any membership check.
    pub fn from_rows_unchecked(rows: &[Vec<FieldElem>]) -> Self {
        let d = rows.len();
        let mut g = Self::zero_matrix(d);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                g.set(i, j, x);
            }
        }
        g
    }
}

/// Group context: family, field, and cached order.
#[derive(Debug)]
pub struct GroupCtx {
    family: Family,
    field: Option<FieldCtx>,
    order: BigUint,
    index_cap: u64,
    table: OnceLock<Result<Vec<u128>, GroupError>>,
    su3: OnceLock<bruhat::Su3Chart>,
}

impl Clone for GroupCtx {
    fn clone(&self) -> Self {
        GroupCtx {
            family: self.family,
            field: self.field.clone(),
            order: self.order.clone(),
            index_cap: self.index_cap,
            table: self.table.clone(),
            su3: self.su3.clone(),
        }
    }
}

fn order_formula(family: Family, field: Option<&FieldCtx>) -> BigUint {
    let big = |x: u64| BigUint::from(x);
    match family {
        Family::Cyclic(n) => big(n),
        Family::SL(m) => {
            let q = big(field.unwrap().size());
            let qm = q.pow(m as u32);
            let mut prod = BigUint::one();
            for j in 0..m {
                prod *= &qm - q.pow(j as u32);
            }
            prod / (&q - 1u32)
        }
        Family::Sp4 => {
            let q = big(field.unwrap().size());
            q.pow(4) * (q.pow(2) - 1u32) * (q.pow(4) - 1u32)
        }
        Family::SU3 => {
            let f = field.unwrap();
            let qt = big(f.characteristic().pow(f.degree() as u32 / 2));
            qt.pow(3) * (qt.pow(2) - 1u32) * (qt.pow(3) + 1u32)
        }
    }
}

impl GroupCtx {
    fn build(family: Family, field: Option<FieldCtx>) -> Self {
        let order = order_formula(family, field.as_ref());
        GroupCtx {
            family,
            field,
            order,
            index_cap: DEFAULT_INDEX_CAP,
            table: OnceLock::new(),
            su3: OnceLock::new(),
        }
    }

    pub fn sl(m: usize, field: FieldCtx) -> Result<Self, GroupError> {
        if !(2..=MAX_DIM).contains(&m) {
            return Err(GroupError::Unsupported(format!("SL_{m}")));
        }
        Ok(Self::build(Family::SL(m), Some(field)))
    }

    pub fn sp4(field: FieldCtx) -> Result<Self, GroupError> {
        Ok(Self::build(Family::Sp4, Some(field)))
    }

    /// `SU_3` over `F_q` with `q = q~^2`; the field must have even degree.
    pub fn su3(field: FieldCtx) -> Result<Self, GroupError> {
        if field.degree() % 2 != 0 {
            return Err(GroupError::UnsupportedFieldDegree(field.degree()));
        }
        Ok(Self::build(Family::SU3, Some(field)))
    }

    pub fn cyclic(n: u64) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Unsupported("Cyclic(0)".into()));
        }
        Ok(Self::build(Family::Cyclic(n), None))
    }

    pub fn new(family: Family, field: Option<FieldCtx>) -> Result<Self, GroupError> {
        let need = || field.clone().ok_or_else(|| GroupError::Unsupported("missing field".into()));
        match family {
            Family::SL(m) => Self::sl(m, need()?),
            Family::Sp4 => Self::sp4(need()?),
            Family::SU3 => Self::su3(need()?),
            Family::Cyclic(n) => Self::cyclic(n),
        }
    }

    /// Convenience: `SL_2(F_{p^k})`.
    pub fn sl2(p: u64, k: usize) -> Result<Self, GroupError> {
        Self::sl(2, FieldCtx::make(p, k, 0)?)
    }

    pub fn with_index_cap(mut self, cap: u64) -> Self {
        self.index_cap = cap;
        self.table = OnceLock::new();
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn field(&self) -> &FieldCtx {
        self.field.as_ref().expect("cyclic groups carry no field")
    }

    pub fn field_opt(&self) -> Option<&FieldCtx> {
        self.field.as_ref()
    }

    /// 2 for `SU_3`, 1 otherwise.
    pub fn twist_order(&self) -> u32 {
        if self.family == Family::SU3 {
            2
        } else {
            1
        }
    }

    /// `q~` for `SU_3` (the fixed field of the involution), `q` otherwise.
    pub fn q_tilde(&self) -> u64 {
        let f = self.field();
        if self.family == Family::SU3 {
            f.characteristic().pow(f.degree() as u32 / 2)
        } else {
            f.size()
        }
    }

    pub fn dim(&self) -> usize {
        match self.family {
            Family::SL(m) => m,
            Family::Sp4 => 4,
            Family::SU3 => 3,
            Family::Cyclic(_) => 1,
        }
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    /// Order as a `u64` when it fits.
    pub fn order_u64(&self) -> Option<u64> {
        self.order.to_u64()
    }

    pub fn index_cap(&self) -> u64 {
        self.index_cap
    }

    pub fn is_cyclic(&self) -> bool {
        matches!(self.family, Family::Cyclic(_))
    }

    pub(crate) fn su3_chart(&self) -> &bruhat::Su3Chart {
        self.su3.get_or_init(|| bruhat::Su3Chart::new(self))
    }

    // ---- construction -------------------------------------------------------------------

    pub fn identity(&self) -> GroupElem {
        let d = self.dim();
        let mut g = GroupElem::zero_matrix(d);
        if !self.is_cyclic() {
            for i in 0..d {
                g.set(i, i, FieldElem::ONE);
            }
        }
        g
    }

    /// Element of `Z/nZ`.
    pub fn cyclic_elem(&self, r: u64) -> GroupElem {
        let Family::Cyclic(n) = self.family else {
            panic!("not a cyclic context");
        };
        let mut g = GroupElem::zero_matrix(1);
        g.e[0] = FieldElem::from_code(r % n);
        g
    }

    /// Matrix from integer entries reduced into the prime field.
    pub fn from_ints(&self, rows: &[&[i64]]) -> Result<GroupElem, GroupError> {
        let f = self.field();
        let rows: Vec<Vec<FieldElem>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| f.from_int(x)).collect())
            .collect();
        self.from_rows(&rows)
    }

    /// Matrix from rows, checked for shape, field range and membership.
    pub fn from_rows(&self, rows: &[Vec<FieldElem>]) -> Result<GroupElem, GroupError> {
        if !self.is_member(rows)? {
            return Err(GroupError::ContextMismatch);
        }
        Ok(GroupElem::from_rows_unchecked(rows))
    }

    fn check_shape(&self, rows: &[Vec<FieldElem>]) -> Result<(), GroupError> {
        let d = self.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            let got = format!("{}x{}", rows.len(), rows.first().map_or(0, |r| r.len()));
            return Err(GroupError::DimensionMismatch { expected: d, got });
        }
        Ok(())
    }

    // ---- arithmetic ---------------------------------------------------------------------

    #[inline]
    pub fn mul(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        if let Family::Cyclic(n) = self.family {
            return self.cyclic_elem((g.residue() + h.residue()) % n);
        }
        self.matmul(g, h)
    }

    /// Matrix product without family-specific handling.
    #[inline]
    pub(crate) fn matmul(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        let f = self.field();
        let d = g.dim as usize;
        let mut out = GroupElem::zero_matrix(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = FieldElem::ZERO;
                for l in 0..d {
                    let a = g.e[i * d + l];
                    if !a.is_zero() {
                        acc = f.add(acc, f.mul(a, h.e[l * d + j]));
                    }
                }
                out.e[i * d + j] = acc;
            }
        }
        out
    }

    pub fn try_mul(&self, g: &GroupElem, h: &GroupElem) -> Result<GroupElem, GroupError> {
        self.check_elem(g)?;
        self.check_elem(h)?;
        Ok(self.mul(g, h))
    }

    fn check_elem(&self, g: &GroupElem) -> Result<(), GroupError> {
        if g.dim() != self.dim() {
            return Err(GroupError::ContextMismatch);
        }
        let bound = match self.family {
            Family::Cyclic(n) => n,
            _ => self.field().size(),
        };
        if g.entries().iter().any(|x| x.code() >= bound) {
            return Err(GroupError::ContextMismatch);
        }
        Ok(())
    }

    /// Inverse via the adjugate (all families have determinant 1).
    pub fn inv(&self, g: &GroupElem) -> GroupElem {
        if let Family::Cyclic(n) = self.family {
            return self.cyclic_elem((n - g.residue()) % n);
        }
        let f = self.field();
        let d = g.dim();
        if d == 2 {
            let mut out = GroupElem::zero_matrix(2);
            out.e[0] = g.e[3];
            out.e[1] = f.neg(g.e[1]);
            out.e[2] = f.neg(g.e[2]);
            out.e[3] = g.e[0];
            return out;
        }
        self.adjugate(g)
    }

    /// Adjugate matrix; equals the inverse for determinant-one matrices.
    pub(crate) fn adjugate(&self, g: &GroupElem) -> GroupElem {
        let f = self.field();
        let d = g.dim();
        let mut out = GroupElem::zero_matrix(d);
        for i in 0..d {
            for j in 0..d {
                // cofactor C_ij, placed at (j, i)
                let rows: Vec<usize> = (0..d).filter(|&r| r != i).collect();
                let cols: Vec<usize> = (0..d).filter(|&c| c != j).collect();
                let minor = self.det_sub(g, &rows, &cols);
                let c = if (i + j) % 2 == 0 { minor } else { f.neg(minor) };
                out.set(j, i, c);
            }
        }
        out
    }

    /// Determinant of the submatrix on the given rows and columns, by permutation expansion.
    pub(crate) fn det_sub(&self, g: &GroupElem, rows: &[usize], cols: &[usize]) -> FieldElem {
        let f = self.field();
        let n = rows.len();
        if n == 0 {
            return FieldElem::ONE;
        }
        let mut acc = FieldElem::ZERO;
        for (perm, sign) in permutations_with_sign(n) {
            let mut term = FieldElem::ONE;
            for (r, &c) in perm.iter().enumerate() {
                term = f.mul(term, g.get(rows[r], cols[c]));
                if term.is_zero() {
                    break;
                }
            }
            acc = if sign > 0 { f.add(acc, term) } else { f.sub(acc, term) };
        }
        acc
    }

    pub fn det(&self, g: &GroupElem) -> FieldElem {
        let idx: Vec<usize> = (0..g.dim()).collect();
        self.det_sub(g, &idx, &idx)
    }

    pub fn trace(&self, g: &GroupElem) -> FieldElem {
        let f = self.field();
        (0..g.dim()).fold(FieldElem::ZERO, |acc, i| f.add(acc, g.get(i, i)))
    }

    pub fn transpose(&self, g: &GroupElem) -> GroupElem {
        let d = g.dim();
        let mut out = GroupElem::zero_matrix(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, g.get(i, j));
            }
        }
        out
    }

    /// Entrywise `x -> x^{q~}` (the involution defining `SU_3`).
    pub fn sigma(&self, g: &GroupElem) -> GroupElem {
        let f = self.field();
        let s = f.degree() / 2;
        let mut out = *g;
        for x in out.e.iter_mut().take(g.dim() * g.dim()) {
            *x = f.frobenius(*x, s);
        }
        out
    }

    /// `h g h^{-1}`.
    pub fn conjugate(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        self.mul(&self.mul(h, g), &self.inv(h))
    }

    pub fn commutator(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        let gh = self.mul(g, h);
        let hg = self.mul(h, g);
        self.mul(&gh, &self.inv(&hg))
    }

    pub fn pow(&self, g: &GroupElem, mut e: u64) -> GroupElem {
        let mut base = *g;
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    // ---- predicates ---------------------------------------------------------------------

    /// Symplectic form matrix for `Sp_4`.
    pub fn symplectic_form(&self) -> GroupElem {
        let f = self.field();
        let mut j = GroupElem::zero_matrix(4);
        j.set(0, 3, FieldElem::ONE);
        j.set(1, 2, FieldElem::ONE);
        j.set(2, 1, f.neg(FieldElem::ONE));
        j.set(3, 0, f.neg(FieldElem::ONE));
        j
    }

    /// Whether the matrix satisfies every defining equation of the family.
    pub fn is_member(&self, rows: &[Vec<FieldElem>]) -> Result<bool, GroupError> {
        self.check_shape(rows)?;
        let g = GroupElem::from_rows_unchecked(rows);
        self.check_elem(&g)?;
        Ok(self.is_member_elem(&g))
    }

    pub fn is_member_elem(&self, g: &GroupElem) -> bool {
        if self.check_elem(g).is_err() {
            return false;
        }
        match self.family {
            Family::Cyclic(_) => true,
            Family::SL(_) => self.det(g) == FieldElem::ONE,
            Family::Sp4 => {
                let j = self.symplectic_form();
                let lhs = self.matmul(&self.matmul(&self.transpose(g), &j), g);
                self.det(g) == FieldElem::ONE && lhs == j
            }
            Family::SU3 => {
                let lhs = self.matmul(&self.transpose(&self.sigma(g)), g);
                self.det(g) == FieldElem::ONE && lhs == self.identity()
            }
        }
    }

    /// Coefficients `c_1..c_m` of `det(X - g) = X^m + c_1 X^{m-1} + ... + c_m`.
    pub fn char_poly_coeffs(&self, g: &GroupElem) -> Vec<FieldElem> {
        let f = self.field();
        let d = g.dim();
        // c_j = (-1)^j * (sum of principal j x j minors)
        (1..=d)
            .map(|j| {
                let mut sum = FieldElem::ZERO;
                for mask in 0u32..(1 << d) {
                    if mask.count_ones() as usize != j {
                        continue;
                    }
                    let idx: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
                    sum = f.add(sum, self.det_sub(g, &idx, &idx));
                }
                if j % 2 == 1 {
                    f.neg(sum)
                } else {
                    sum
                }
            })
            .collect()
    }

    /// Whether `(g - 1)^m = 0`.
    pub fn unipotent_test(&self, g: &GroupElem) -> bool {
        if self.is_cyclic() {
            return g.residue() == 0;
        }
        let f = self.field();
        let d = g.dim();
        let mut n = *g;
        for i in 0..d {
            n.set(i, i, f.sub(g.get(i, i), FieldElem::ONE));
        }
        let mut acc = n;
        for _ in 1..d {
            acc = self.matmul(&acc, &n);
        }
        acc.entries().iter().all(|x| x.is_zero())
    }

    // ---- canonical indexing -------------------------------------------------------------

    fn check_cap(&self) -> Result<u64, GroupError> {
        match self.order_u64() {
            Some(n) if n <= self.index_cap => Ok(n),
            _ => Err(GroupError::GroupTooLarge {
                order: self.order.to_string(),
                cap: self.index_cap,
            }),
        }
    }

    /// Order as a `usize`, or `GroupTooLarge` when above the index cap.
    pub fn indexed_order(&self) -> Result<usize, GroupError> {
        self.check_cap().map(|n| n as usize)
    }

    /// Row-major base-`q` packing of the entries.
    fn key(&self, g: &GroupElem) -> u128 {
        let q = self.field().size() as u128;
        g.entries().iter().fold(0u128, |acc, x| acc * q + x.code() as u128)
    }

    fn unkey(&self, mut key: u128) -> GroupElem {
        let q = self.field().size() as u128;
        let d = self.dim();
        let mut g = GroupElem::zero_matrix(d);
        for i in (0..d * d).rev() {
            g.e[i] = FieldElem::from_code((key % q) as u64);
            key /= q;
        }
        g
    }

    fn sl2_index(&self, g: &GroupElem) -> u64 {
        let q = self.field().size();
        let (a, b, c, d) = (g.e[0].code(), g.e[1].code(), g.e[2].code(), g.e[3].code());
        if a != 0 {
            ((a - 1) * q + b) * q + c
        } else {
            (q - 1) * q * q + (b - 1) * q + d
        }
    }

    fn sl2_at(&self, idx: u64) -> GroupElem {
        let f = self.field();
        let q = f.size();
        let mut g = GroupElem::zero_matrix(2);
        if idx < (q - 1) * q * q {
            let a = FieldElem::from_code(idx / (q * q) + 1);
            let b = FieldElem::from_code(idx / q % q);
            let c = FieldElem::from_code(idx % q);
            let d = f.mul(f.add(FieldElem::ONE, f.mul(b, c)), f.inv(a));
            g.e[..4].copy_from_slice(&[a, b, c, d]);
        } else {
            let r = idx - (q - 1) * q * q;
            let b = FieldElem::from_code(r / q + 1);
            let d = FieldElem::from_code(r % q);
            let c = f.neg(f.inv(b));
            g.e[1] = b;
            g.e[2] = c;
            g.e[3] = d;
        }
        g
    }

    fn table(&self) -> Result<&Vec<u128>, GroupError> {
        self.table
            .get_or_init(|| {
                self.check_cap()?;
                Ok(self.build_table())
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Closure of a few uniformly random elements, enlarged until it reaches the full order.
    fn build_table(&self) -> Vec<u128> {
        let n = self.order_u64().expect("checked against the cap") as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(0x7ab1e);
        let mut gens: Vec<GroupElem> = (0..2).map(|_| self.random_uniform(&mut rng)).collect();
        loop {
            let mut seen: HashSet<u128> = HashSet::with_capacity(n);
            let id = self.identity();
            seen.insert(self.key(&id));
            let mut frontier = vec![id];
            while let Some(x) = frontier.pop() {
                for s in &gens {
                    let y = self.mul(&x, s);
                    if seen.insert(self.key(&y)) {
                        frontier.push(y);
                    }
                }
            }
            if seen.len() == n {
                let mut keys: Vec<u128> = seen.into_iter().collect();
                keys.sort_unstable();
                return keys;
            }
            assert!(seen.len() < n, "closure exceeded the group order");
            gens.push(self.random_uniform(&mut rng));
        }
    }

    /// Canonical index in `[0, |G|)`.
    pub fn canonical_index(&self, g: &GroupElem) -> Result<u64, GroupError> {
        self.check_cap()?;
        self.check_elem(g)?;
        match self.family {
            Family::Cyclic(_) => Ok(g.residue()),
            Family::SL(2) => Ok(self.sl2_index(g)),
            _ => {
                let t = self.table()?;
                t.binary_search(&self.key(g))
                    .map(|i| i as u64)
                    .map_err(|_| GroupError::ContextMismatch)
            }
        }
    }

    /// Inverse of [`GroupCtx::canonical_index`].
    pub fn element_at(&self, i: u64) -> Result<GroupElem, GroupError> {
        let n = self.check_cap()?;
        if i >= n {
            return Err(GroupError::IndexOutOfRange(i));
        }
        Ok(match self.family {
            Family::Cyclic(_) => self.cyclic_elem(i),
            Family::SL(2) => self.sl2_at(i),
            _ => self.unkey(self.table()?[i as usize]),
        })
    }

    /// Every element in canonical-index order.
    pub fn elements(&self) -> Result<Vec<GroupElem>, GroupError> {
        let n = self.check_cap()?;
        (0..n).map(|i| self.element_at(i)).collect()
    }

    // ---- sampling -----------------------------------------------------------------------

    /// Exactly uniform sample.
    pub fn random_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElem {
        match self.family {
            Family::Cyclic(n) => self.cyclic_elem(rng.gen_range(0..n)),
            Family::SL(2) => {
                let q = self.field().size();
                self.sl2_at(rng.gen_range(0..q * q * q - q))
            }
            Family::SL(_) => bruhat::sample_uniform(self, rng),
            Family::SU3 => bruhat::su3_sample(self, rng).0,
            Family::Sp4 => self.sp4_sample(rng),
        }
    }

    fn omega(&self, x: &[FieldElem; 4], y: &[FieldElem; 4]) -> FieldElem {
        let f = self.field();
        let plus = f.add(f.mul(x[0], y[3]), f.mul(x[1], y[2]));
        let minus = f.add(f.mul(x[2], y[1]), f.mul(x[3], y[0]));
        f.sub(plus, minus)
    }

    /// Uniform symplectic matrix by completing a random symplectic basis column by column.
    fn sp4_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElem {
        let f = self.field();
        let rand_vec = |rng: &mut R| -> [FieldElem; 4] { std::array::from_fn(|_| f.random(rng)) };
        let scale = |v: &[FieldElem; 4], c: FieldElem| -> [FieldElem; 4] {
            std::array::from_fn(|i| f.mul(v[i], c))
        };
        let c1 = loop {
            let v = rand_vec(rng);
            if v.iter().any(|x| !x.is_zero()) {
                break v;
            }
        };
        let c4 = loop {
            let v = rand_vec(rng);
            let w = self.omega(&c1, &v);
            if !w.is_zero() {
                break scale(&v, f.inv(w));
            }
        };
        // projection onto the orthogonal complement of the hyperbolic pair (c1, c4)
        let project = |v: [FieldElem; 4]| -> [FieldElem; 4] {
            let a = self.omega(&v, &c4);
            let b = self.omega(&v, &c1);
            std::array::from_fn(|i| f.add(f.sub(v[i], f.mul(a, c1[i])), f.mul(b, c4[i])))
        };
        let c2 = loop {
            let v = project(rand_vec(rng));
            if v.iter().any(|x| !x.is_zero()) {
                break v;
            }
        };
        let c3 = loop {
            let v = project(rand_vec(rng));
            let w = self.omega(&c2, &v);
            if !w.is_zero() {
                break scale(&v, f.inv(w));
            }
        };
        let mut g = GroupElem::zero_matrix(4);
        for i in 0..4 {
            g.set(i, 0, c1[i]);
            g.set(i, 1, c2[i]);
            g.set(i, 2, c3[i]);
            g.set(i, 3, c4[i]);
        }
        g
    }

    /// Row-major entries as coefficient lists, for serialization.
    pub fn to_coeff_rows(&self, g: &GroupElem) -> Vec<Vec<Vec<u64>>> {
        if self.is_cyclic() {
            return vec![vec![vec![g.residue()]]];
        }
        let f = self.field();
        g.rows()
            .iter()
            .map(|r| r.iter().map(|&x| f.coeffs(x)).collect())
            .collect()
    }

    pub fn render(&self, g: &GroupElem) -> String {
        if self.is_cyclic() {
            return g.residue().to_string();
        }
        let f = self.field();
        let rows: Vec<String> = g
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|&x| f.render(x)).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!("[{}]", rows.join(","))
    }
}

/// All permutations of `0..n` with their signs, in lexicographic order.
pub(crate) fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, i8)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        out.push((perm.clone(), perm_sign(&perm)));
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    out
}

pub(crate) fn perm_sign(perm: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}
