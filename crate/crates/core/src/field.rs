// SPDX-License-Identifier: Apache-2.0

//! Finite fields `F_p` and `F_{p^k}` in a polynomial basis.
//!
//! An element is stored as its packed coefficient code `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`,
//! where `c_i` is the coefficient of `X^i` modulo the context's irreducible polynomial.
//! Ordering elements by code is the canonical (lexicographic) order used by [`FieldCtx::enumerate`].

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 6;
/// Largest field size for which arithmetic is supported.
pub const MAX_FIELD_SIZE: u64 = 1 << 40;
/// Largest field size that may be enumerated.
pub const MAX_ENUMERABLE: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime below 2^31")]
    NonPrime(u64),
    #[error("field of size {p}^{k} is outside the supported range")]
    TooLarge { p: u64, k: usize },
    #[error("no irreducible polynomial of degree {k} over F_{p} was found")]
    NoIrreducibleFound { p: u64, k: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("element code {0} does not belong to this field")]
    ContextMismatch(u64),
    #[error("{j} does not divide the extension degree {k}")]
    BadDivisor { j: usize, k: usize },
    #[error("field of size {0} is too large to enumerate")]
    TooLargeToEnumerate(u64),
    #[error("frobenius exponent {s} exceeds the extension degree {k}")]
    BadExponent { s: usize, k: usize },
}

/// A field element as a packed polynomial-basis code.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn code(self) -> u64 {
        self.0
    }

    /// Wraps a raw code without range checking; see [`FieldCtx::elem`] for the checked form.
    pub const fn from_code(code: u64) -> Self {
        FieldElem(code)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Inv,
    Neg,
}

/// Discrete log / antilog tables for extension fields small enough to tabulate.
#[derive(Debug)]
struct LogTables {
    log: Vec<u32>,
    /// `exp[i] = g^i` for `0 <= i < 2(q-1)`.
    exp: Vec<u32>,
}

/// Largest extension field that gets log tables.
const LOG_TABLE_LIMIT: u64 = 1 << 20;

/// Context for `F_{p^k}`.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    p: u64,
    k: usize,
    q: u64,
    /// Monic modulus, low-to-high, length `k + 1`.
    modulus: Vec<u64>,
    /// `frob[s][i]` = code of `(X^i)^(p^s)` for `0 <= s <= k`.
    frob: Vec<Vec<u64>>,
    tables: Option<Arc<LogTables>>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// p < 2^31, so the product of two residues fits in a u64
#[inline]
fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid on signed integers
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(p as i128) as u64
}

/// Remainder of `a` modulo the monic `b` over `F_p`; both low-to-high.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db && !r.is_empty() {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let sub = mulmod(lead, bc, p);
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
        }
        r.pop();
    }
    r
}

/// True iff the monic polynomial `f` (low-to-high) has no monic factor of degree `1..=deg/2`.
/// Exhaustive search over candidate factors.
pub(crate) fn is_irreducible_exhaustive(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut c = code;
            for _ in 0..d {
                g.push(c % p);
                c /= p;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&x| x == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldCtx {
    /// Builds `F_{p^k}` with the lexicographically lowest monic irreducible modulus.
    /// The seed is accepted for interface stability and does not affect the choice.
    pub fn make(p: u64, k: usize, _seed: u64) -> Result<Self, FieldError> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(FieldError::NonPrime(p));
        }
        if k == 0 || k > MAX_DEGREE {
            return Err(FieldError::TooLarge { p, k });
        }
        let q = (p as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if q > MAX_FIELD_SIZE as u128 {
            return Err(FieldError::TooLarge { p, k });
        }
        let q = q as u64;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            let tail = p.pow(k as u32);
            let mut found = None;
            for code in 0..tail {
                let mut f = Vec::with_capacity(k + 1);
                let mut c = code;
                for _ in 0..k {
                    f.push(c % p);
                    c /= p;
                }
                f.push(1);
                if f[0] != 0 && is_irreducible_exhaustive(&f, p) {
                    found = Some(f);
                    break;
                }
            }
            found.ok_or(FieldError::NoIrreducibleFound { p, k })?
        };
        let mut ctx = FieldCtx {
            p,
            k,
            q,
            modulus,
            frob: Vec::new(),
            tables: None,
        };
        ctx.frob = (0..=k)
            .map(|s| {
                let e = p.pow(s as u32);
                (0..k)
                    .map(|i| ctx.pow(ctx.x_pow(i), e as u128).0)
                    .collect()
            })
            .collect();
        if k > 1 && q <= LOG_TABLE_LIMIT {
            ctx.tables = Some(Arc::new(ctx.build_log_tables()));
        }
        Ok(ctx)
    }

    fn build_log_tables(&self) -> LogTables {
        let order = self.q - 1;
        let mut primes = Vec::new();
        let mut n = order;
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                primes.push(d);
                while n % d == 0 {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 {
            primes.push(n);
        }
        let gen = (1..self.q)
            .map(FieldElem)
            .find(|&g| {
                primes
                    .iter()
                    .all(|&r| self.pow_poly(g, (order / r) as u128) != FieldElem::ONE)
            })
            .expect("multiplicative group is cyclic");
        let mut log = vec![0u32; self.q as usize];
        let mut exp = vec![0u32; 2 * order as usize];
        let mut x = FieldElem::ONE;
        for i in 0..order as usize {
            exp[i] = x.0 as u32;
            exp[i + order as usize] = x.0 as u32;
            log[x.0 as usize] = i as u32;
            x = self.mul_poly(x, gen);
        }
        LogTables { log, exp }
    }

    /// Shorthand for a prime field.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::make(p, 1, 0)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.q
    }

    /// Monic modulus coefficients, low-to-high.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    fn x_pow(&self, i: usize) -> FieldElem {
        if i < self.k {
            FieldElem(self.p.pow(i as u32))
        } else {
            let x = FieldElem(if self.k == 1 { 0 } else { self.p });
            self.pow(x, i as u128)
        }
    }

    /// Checked conversion from a raw code.
    pub fn elem(&self, code: u64) -> Result<FieldElem, FieldError> {
        if code < self.q {
            Ok(FieldElem(code))
        } else {
            Err(FieldError::ContextMismatch(code))
        }
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElem, FieldError> {
        if coeffs.len() > self.k || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::ContextMismatch(u64::MAX));
        }
        let mut code = 0u64;
        for &c in coeffs.iter().rev() {
            code = code * self.p + c;
        }
        Ok(FieldElem(code))
    }

    /// Length-`k` coefficient vector, low-to-high.
    pub fn coeffs(&self, x: FieldElem) -> Vec<u64> {
        self.digits(x)[..self.k].to_vec()
    }

    #[inline]
    fn digits(&self, x: FieldElem) -> [u64; MAX_DEGREE] {
        let mut out = [0u64; MAX_DEGREE];
        let mut c = x.0;
        for d in out.iter_mut().take(self.k) {
            *d = c % self.p;
            c /= self.p;
        }
        out
    }

    #[inline]
    fn pack(&self, d: &[u64]) -> FieldElem {
        let mut code = 0u64;
        for &c in d[..self.k].iter().rev() {
            code = code * self.p + c;
        }
        FieldElem(code)
    }

    #[inline]
    pub fn add(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        if self.k == 1 {
            let s = x.0 + y.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        if self.p == 2 {
            return FieldElem(x.0 ^ y.0);
        }
        let (a, b) = (self.digits(x), self.digits(y));
        let mut d = [0u64; MAX_DEGREE];
        for i in 0..self.k {
            let s = a[i] + b[i];
            d[i] = if s >= self.p { s - self.p } else { s };
        }
        self.pack(&d)
    }

    #[inline]
    pub fn neg(&self, x: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem(if x.0 == 0 { 0 } else { self.p - x.0 });
        }
        if self.p == 2 {
            return x;
        }
        let a = self.digits(x);
        let mut d = [0u64; MAX_DEGREE];
        for i in 0..self.k {
            d[i] = if a[i] == 0 { 0 } else { self.p - a[i] };
        }
        self.pack(&d)
    }

    #[inline]
    pub fn sub(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem(mulmod(x.0, y.0, self.p));
        }
        if let Some(t) = &self.tables {
            if x.0 == 0 || y.0 == 0 {
                return FieldElem::ZERO;
            }
            let i = t.log[x.0 as usize] as usize + t.log[y.0 as usize] as usize;
            return FieldElem(t.exp[i] as u64);
        }
        self.mul_poly(x, y)
    }

    fn mul_poly(&self, x: FieldElem, y: FieldElem) -> FieldElem {
        let (a, b) = (self.digits(x), self.digits(y));
        let p = self.p;
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..self.k {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.k {
                prod[i + j] = (prod[i + j] + mulmod(a[i], b[j], p)) % p;
            }
        }
        for i in (self.k..2 * self.k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            let shift = i - self.k;
            for j in 0..self.k {
                let sub = mulmod(c, self.modulus[j], p);
                prod[shift + j] = (prod[shift + j] + p - sub) % p;
            }
            prod[i] = 0;
        }
        self.pack(&prod)
    }

    /// Multiplies by an element of the prime field.
    #[inline]
    pub fn scale(&self, x: FieldElem, c: u64) -> FieldElem {
        if self.k == 1 {
            return FieldElem(mulmod(x.0, c % self.p, self.p));
        }
        let mut a = self.digits(x);
        for d in a.iter_mut().take(self.k) {
            *d = mulmod(*d, c % self.p, self.p);
        }
        self.pack(&a)
    }

    pub fn pow(&self, x: FieldElem, e: u128) -> FieldElem {
        if let Some(t) = &self.tables {
            if x.0 == 0 {
                return if e == 0 { FieldElem::ONE } else { FieldElem::ZERO };
            }
            let r = (t.log[x.0 as usize] as u128 * (e % (self.q as u128 - 1))) % (self.q as u128 - 1);
            return FieldElem(t.exp[r as usize] as u64);
        }
        self.pow_poly(x, e)
    }

    fn pow_poly(&self, x: FieldElem, mut e: u128) -> FieldElem {
        let mut base = x;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_poly(acc, base);
            }
            base = self.mul_poly(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn try_inv(&self, x: FieldElem) -> Option<FieldElem> {
        if x.0 == 0 {
            return None;
        }
        if self.k == 1 {
            return Some(FieldElem(inv_mod(x.0, self.p)));
        }
        if let Some(t) = &self.tables {
            let order = self.q as usize - 1;
            let l = t.log[x.0 as usize] as usize;
            return Some(FieldElem(t.exp[(order - l) % order] as u64));
        }
        Some(self.pow(x, (self.q - 2) as u128))
    }

    /// Multiplicative inverse. Panics on zero; see [`FieldCtx::arith`] for the checked form.
    #[inline]
    pub fn inv(&self, x: FieldElem) -> FieldElem {
        self.try_inv(x).expect("inverse of zero")
    }

    pub fn div(&self, x: FieldElem, y: FieldElem) -> Result<FieldElem, FieldError> {
        let yi = self.try_inv(y).ok_or(FieldError::DivisionByZero)?;
        Ok(self.mul(x, yi))
    }

    /// Checked dispatch over the basic operations.
    pub fn arith(
        &self,
        op: ArithOp,
        x: FieldElem,
        y: Option<FieldElem>,
    ) -> Result<FieldElem, FieldError> {
        self.elem(x.0)?;
        if let Some(y) = y {
            self.elem(y.0)?;
        }
        let rhs = || y.ok_or(FieldError::ContextMismatch(u64::MAX));
        Ok(match op {
            ArithOp::Add => self.add(x, rhs()?),
            ArithOp::Sub => self.sub(x, rhs()?),
            ArithOp::Mul => self.mul(x, rhs()?),
            ArithOp::Neg => self.neg(x),
            ArithOp::Inv => self.try_inv(x).ok_or(FieldError::DivisionByZero)?,
        })
    }

    /// `x^(p^s)` for `0 <= s <= k`, evaluated as an `F_p`-linear map on the basis.
    #[inline]
    pub fn frobenius(&self, x: FieldElem, s: usize) -> FieldElem {
        let s = s % (self.k + 1);
        if self.k == 1 || s == 0 || s == self.k {
            return x;
        }
        let d = self.digits(x);
        let mut acc = FieldElem::ZERO;
        for (i, &c) in d.iter().enumerate().take(self.k) {
            if c != 0 {
                acc = self.add(acc, self.scale(FieldElem(self.frob[s][i]), c));
            }
        }
        acc
    }

    pub fn try_frobenius(&self, x: FieldElem, s: usize) -> Result<FieldElem, FieldError> {
        self.elem(x.0)?;
        if s > self.k {
            return Err(FieldError::BadExponent { s, k: self.k });
        }
        Ok(self.frobenius(x, s))
    }

    /// Membership in the subfield of index `j`, i.e. of size `p^(k/j)`.
    pub fn subfield_member(&self, x: FieldElem, j: usize) -> Result<bool, FieldError> {
        if j == 0 || self.k % j != 0 {
            return Err(FieldError::BadDivisor { j, k: self.k });
        }
        Ok(self.frobenius(x, self.k / j) == x)
    }

    /// All elements of the subfield of index `j`, in canonical order.
    pub fn subfield_elements(&self, j: usize) -> Result<Vec<FieldElem>, FieldError> {
        if j == 0 || self.k % j != 0 {
            return Err(FieldError::BadDivisor { j, k: self.k });
        }
        let s = self.k / j;
        if j == 1 {
            return Ok(self.enumerate()?.collect());
        }
        // The fixed field of x -> x^(p^s) is the kernel of an F_p-linear map; solve over F_p.
        let basis = self.frobenius_fixed_basis(s);
        let size = self.p.pow(basis.len() as u32);
        let mut out: Vec<FieldElem> = (0..size)
            .map(|mut code| {
                let mut acc = FieldElem::ZERO;
                for b in &basis {
                    acc = self.add(acc, self.scale(*b, code % self.p));
                    code /= self.p;
                }
                acc
            })
            .collect();
        out.sort();
        Ok(out)
    }

    /// Basis over `F_p` of `{x : x^(p^s) = x}` by Gaussian elimination on `Frob^s - 1`.
    fn frobenius_fixed_basis(&self, s: usize) -> Vec<FieldElem> {
        let (k, p) = (self.k, self.p);
        // column i = digits of (Frob^s - 1)(X^i)
        let mut m = vec![vec![0u64; k]; k];
        for i in 0..k {
            let img = self.sub(FieldElem(self.frob[s][i]), FieldElem(p.pow(i as u32)));
            let d = self.digits(img);
            for r in 0..k {
                m[r][i] = d[r];
            }
        }
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..k {
            let Some(pr) = (row..k).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(row, pr);
            let iv = inv_mod(m[row][col], p);
            for c in 0..k {
                m[row][c] = mulmod(m[row][c], iv, p);
            }
            for r in 0..k {
                if r != row && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in 0..k {
                        m[r][c] = (m[r][c] + p - mulmod(f, m[row][c], p)) % p;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        let free: Vec<usize> = (0..k).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = [0u64; MAX_DEGREE];
                v[fc] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - m[r][fc]) % p;
                }
                self.pack(&v)
            })
            .collect()
    }

    /// Every element in canonical order.
    pub fn enumerate(&self) -> Result<impl Iterator<Item = FieldElem>, FieldError> {
        if self.q > MAX_ENUMERABLE {
            return Err(FieldError::TooLargeToEnumerate(self.q));
        }
        Ok((0..self.q).map(FieldElem))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(0..self.q))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(1..self.q))
    }

    /// Human-readable rendering: an integer for prime fields, a polynomial in `x` otherwise.
    pub fn render(&self, x: FieldElem) -> String {
        if self.k == 1 {
            return x.0.to_string();
        }
        let d = self.coeffs(x);
        let terms: Vec<String> = d
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".into(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_fields() -> Vec<FieldCtx> {
        [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (3, 2), (2, 3), (2, 4), (5, 2), (2, 6), (7, 2)]
            .iter()
            .map(|&(p, k)| FieldCtx::make(p, k, 0).unwrap())
            .collect()
    }

    #[test]
    fn prime_field_has_linear_modulus() {
        let f = FieldCtx::make(7, 1, 0).unwrap();
        assert_eq!(f.size(), 7);
        assert_eq!(f.modulus(), &[0, 1]);
    }

    #[test]
    fn f4_modulus_is_the_unique_irreducible_quadratic() {
        // x^2, x^2+1, x^2+x have roots over F_2; x^2+x+1 does not.
        let mut irreducible = vec![];
        for c0 in 0..2u64 {
            for c1 in 0..2u64 {
                let has_root = (0..2u64).any(|x| (x * x + c1 * x + c0) % 2 == 0);
                if !has_root {
                    irreducible.push(vec![c0, c1, 1]);
                }
            }
        }
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
        let f = FieldCtx::make(2, 2, 0).unwrap();
        assert_eq!(f.modulus(), irreducible[0].as_slice());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldCtx::make(4, 1, 0), Err(FieldError::NonPrime(4)));
        assert_eq!(FieldCtx::make(1, 1, 0), Err(FieldError::NonPrime(1)));
        assert!(matches!(FieldCtx::make(2, 7, 0), Err(FieldError::TooLarge { .. })));
        assert!(matches!(FieldCtx::make(1_000_003, 3, 0), Err(FieldError::TooLarge { .. })));
    }

    #[test]
    fn inverse_of_three_mod_seven() {
        let f = FieldCtx::prime(7).unwrap();
        let by_search = (1..7).find(|y| (3 * y) % 7 == 1).unwrap();
        assert_eq!(by_search, 5);
        assert_eq!(f.inv(FieldElem::from_code(3)), FieldElem::from_code(5));
        assert_eq!(
            f.arith(ArithOp::Inv, FieldElem::ZERO, None),
            Err(FieldError::DivisionByZero)
        );
        assert_eq!(
            f.arith(ArithOp::Add, FieldElem::from_code(9), Some(FieldElem::ONE)),
            Err(FieldError::ContextMismatch(9))
        );
    }

    #[test]
    fn axioms_exhaustive_on_small_fields() {
        for f in small_fields().into_iter().filter(|f| f.size() <= 64) {
            let elems: Vec<_> = f.enumerate().unwrap().collect();
            for &x in &elems {
                assert_eq!(f.mul(x, FieldElem::ZERO), FieldElem::ZERO);
                assert_eq!(f.add(x, f.neg(x)), FieldElem::ZERO);
                if !x.is_zero() {
                    assert_eq!(f.mul(x, f.inv(x)), FieldElem::ONE);
                }
                for &y in &elems {
                    let fx = f.frobenius(x, 1);
                    let fy = f.frobenius(y, 1);
                    assert_eq!(f.frobenius(f.add(x, y), 1), f.add(fx, fy));
                    assert_eq!(f.frobenius(f.mul(x, y), 1), f.mul(fx, fy));
                }
            }
        }
    }

    #[test]
    fn random_inverse_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in small_fields() {
            for _ in 0..10_000 {
                let x = f.random_nonzero(&mut rng);
                assert_eq!(f.mul(x, f.inv(x)), FieldElem::ONE);
            }
        }
    }

    #[test]
    fn frobenius_fixes_prime_field_and_composes() {
        let f = FieldCtx::make(3, 2, 0).unwrap();
        for c in 0..3 {
            assert_eq!(f.frobenius(f.from_int(c), 1), f.from_int(c));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = f.random(&mut rng);
            assert_eq!(f.frobenius(f.frobenius(x, 1), 1), f.frobenius(x, 2));
            assert_eq!(f.frobenius(x, 2), x);
            assert_eq!(f.frobenius(x, 1), f.pow(x, 3));
        }
    }

    #[test]
    fn f4_generator_frobenius_orbit() {
        let f = FieldCtx::make(2, 2, 0).unwrap();
        let gens: Vec<_> = f
            .enumerate()
            .unwrap()
            .filter(|&x| !x.is_zero() && x != FieldElem::ONE)
            .collect();
        assert_eq!(gens.len(), 2);
        for g in gens {
            let g2 = f.mul(g, g);
            assert_eq!(f.frobenius(g, 1), g2);
            assert_ne!(g2, g);
            assert_eq!(f.mul(g2, g2), g);
        }
    }

    #[test]
    fn subfield_membership_counts() {
        let f9 = FieldCtx::make(3, 2, 0).unwrap();
        let fixed: Vec<_> = f9
            .enumerate()
            .unwrap()
            .filter(|&x| f9.pow(x, 3) == x)
            .collect();
        assert_eq!(fixed.len(), 3);
        // a generator of F_9^x has order 8
        let gen = f9
            .enumerate()
            .unwrap()
            .find(|&x| !x.is_zero() && (1..8).all(|e| f9.pow(x, e) != FieldElem::ONE))
            .unwrap();
        assert!(!f9.subfield_member(gen, 2).unwrap());
        assert!(f9.subfield_member(FieldElem::ZERO, 2).unwrap());
        assert!(f9.subfield_member(FieldElem::ONE, 2).unwrap());
        assert_eq!(f9.subfield_member(gen, 3), Err(FieldError::BadDivisor { j: 3, k: 2 }));

        for (p, k) in [(2, 2), (2, 4), (2, 6), (3, 2), (5, 2), (2, 3), (3, 4), (4093, 1)] {
            let f = FieldCtx::make(p, k, 0).unwrap();
            if f.size() > 4096 {
                continue;
            }
            for j in (1..=k).filter(|j| k % j == 0) {
                let count = f
                    .enumerate()
                    .unwrap()
                    .filter(|&x| f.subfield_member(x, j).unwrap())
                    .count() as u64;
                assert_eq!(count, p.pow((k / j) as u32), "p={p} k={k} j={j}");
                let listed = f.subfield_elements(j).unwrap();
                assert_eq!(listed.len() as u64, count);
                assert!(listed.iter().all(|&x| f.subfield_member(x, j).unwrap()));
            }
        }
    }

    #[test]
    fn enumeration_contract() {
        let f2 = FieldCtx::prime(2).unwrap();
        assert_eq!(
            f2.enumerate().unwrap().collect::<Vec<_>>(),
            vec![FieldElem::ZERO, FieldElem::ONE]
        );
        let f4 = FieldCtx::make(2, 2, 0).unwrap();
        let mut e: Vec<_> = f4.enumerate().unwrap().collect();
        e.dedup();
        assert_eq!(e.len(), 4);
        let f5 = FieldCtx::prime(5).unwrap();
        let sum = f5.enumerate().unwrap().fold(FieldElem::ZERO, |a, x| f5.add(a, x));
        assert_eq!(sum, FieldElem::ZERO);
        let big = FieldCtx::make(2, 6, 0).unwrap();
        assert!(big.enumerate().is_ok());
        let too_big = FieldCtx::make(1_048_583, 1, 0).unwrap();
        assert!(matches!(too_big.enumerate(), Err(FieldError::TooLargeToEnumerate(_))));
    }

    #[test]
    fn modulus_is_irreducible_by_independent_check() {
        for f in small_fields() {
            let m = f.modulus();
            let p = f.characteristic();
            // no root in F_p
            if f.degree() > 1 {
                for x in 0..p {
                    let mut v = 0u64;
                    for &c in m.iter().rev() {
                        v = (v * x + c) % p;
                    }
                    assert_ne!(v, 0);
                }
            }
            // for k = 4, no monic irreducible quadratic factor
            if f.degree() == 4 {
                for c0 in 0..p {
                    for c1 in 0..p {
                        let r = poly_rem(m, &[c0, c1, 1], p);
                        assert!(r.iter().any(|&c| c != 0));
                    }
                }
            }
        }
    }

    #[test]
    fn log_tables_agree_with_polynomial_product() {
        for f in small_fields().into_iter().filter(|f| f.degree() > 1) {
            assert!(f.tables.is_some());
            let elems: Vec<_> = f.enumerate().unwrap().collect();
            for &x in elems.iter().take(40) {
                for &y in &elems {
                    assert_eq!(f.mul(x, y), f.mul_poly(x, y));
                }
                assert_eq!(f.pow(x, 7), f.pow_poly(x, 7));
            }
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let f = FieldCtx::make(3, 3, 0).unwrap();
        for x in f.enumerate().unwrap() {
            let c = f.coeffs(x);
            assert_eq!(c.len(), 3);
            assert!(c.iter().all(|&v| v < 3));
            assert_eq!(f.from_coeffs(&c).unwrap(), x);
        }
    }
}
