//! Arithmetic in GF(q), q = p^m, backed by exp/log tables.
//!
//! Elements are canonical integer indices: the coefficients of the
//! polynomial representative packed base p, constant term least
//! significant. For GF(4) under x^2 + x + 1 the element `x` is index 2
//! and `x + 1` is index 3.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// An element of some GF(q), stored as its canonical index in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A concrete finite field GF(p^m).
///
/// Cloning is cheap: the lookup tables are shared.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    q: u32,
    /// Monic reduction polynomial, coefficients from x^0 up to x^m.
    reduction_poly: Vec<u32>,
    /// `exp[i] = g^i` for a fixed generator g, doubled in length so that
    /// `exp[log a + log b]` never needs a reduction.
    exp: Arc<[u16]>,
    /// `log[a]` for nonzero a; `log[0]` is unused.
    log: Arc<[u16]>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("q", &self.q)
            .field("reduction_poly", &self.reduction_poly)
            .finish()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^m`, if it is a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 || q > u32::MAX as u64 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut rest, mut m) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p as u32, m))
}

pub fn is_prime_power(q: u64) -> bool {
    prime_power(q).is_some()
}

impl FieldSpec {
    /// Builds GF(p^m) using the smallest monic irreducible polynomial of
    /// degree m, where polynomials are ordered by their non-leading
    /// coefficients read as a base-p number (x^{m-1} most significant).
    pub fn new(p: u32, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("characteristic {p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be at least 1".into()));
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_ORDER as u64)
            .ok_or_else(|| Error::InvalidField(format!("order {p}^{m} exceeds the cap of {MAX_ORDER}")))?
            as u32;

        let reduction_poly = if m == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, m)
                .ok_or_else(|| Error::Internal(format!("no irreducible polynomial of degree {m} over GF({p})")))?
        };

        // Multiplication by polynomial reduction, used only while building the tables.
        let slow_mul = |a: u32, b: u32| -> u32 {
            let ad = digits(a, p, m);
            let bd = digits(b, p, m);
            let mut prod = vec![0u32; 2 * m as usize - 1];
            for (i, &x) in ad.iter().enumerate() {
                for (j, &y) in bd.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            poly_rem_monic(&mut prod, &reduction_poly, p);
            pack(&prod[..m as usize], p)
        };

        let order = q - 1;
        let generator = (1..q)
            .find(|&g| multiplicative_order(g, order, &slow_mul) == order)
            .ok_or_else(|| Error::Internal(format!("GF({q}) has no generator")))?;

        let mut exp = vec![0u16; 2 * order as usize];
        let mut log = vec![0u16; q as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x as u16;
            log[x as usize] = i as u16;
            x = slow_mul(x, generator);
        }
        for i in order..2 * order {
            exp[i as usize] = exp[(i - order) as usize];
        }

        Ok(FieldSpec { p, m, q, reduction_poly, exp: exp.into(), log: log.into() })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn reduction_poly(&self) -> &[u32] {
        &self.reduction_poly
    }

    /// Validates an index and wraps it as an element of this field.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value < self.q {
            Ok(FieldElement(value as u16))
        } else {
            Err(Error::ElementOutOfField { value, order: self.q })
        }
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        (a.0 as u32) < self.q
    }

    /// All elements in canonical order `0, 1, ..., q-1`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(|v| FieldElement(v as u16))
    }

    /// `g^i` for the table generator g.
    pub fn exp(&self, i: usize) -> FieldElement {
        FieldElement(self.exp[i % (self.q as usize - 1)])
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, a: FieldElement) -> Result<usize> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.log[a.0 as usize] as usize)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if self.m == 1 {
            return FieldElement(((a.0 as u32 + b.0 as u32) % self.p) as u16);
        }
        let (mut x, mut y) = (a.0 as u32, b.0 as u32);
        let (mut out, mut place) = (0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        FieldElement(out as u16)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0 as u32;
        let (mut out, mut place) = (0u32, 1u32);
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        FieldElement(out as u16)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(self.contains(a) && self.contains(b));
        if a.is_zero() || b.is_zero() {
            return FieldElement::ZERO;
        }
        let i = self.log[a.0 as usize] as usize + self.log[b.0 as usize] as usize;
        FieldElement(self.exp[i])
    }

    pub fn checked_mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let order = self.q as usize - 1;
        let l = self.log[a.0 as usize] as usize;
        Ok(FieldElement(self.exp[(order - l) % order]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u32) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.is_zero() {
            return FieldElement::ZERO;
        }
        let order = self.q as u64 - 1;
        let l = self.log[a.0 as usize] as u64;
        FieldElement(self.exp[((l * e as u64) % order) as usize])
    }

    /// Inner product of two equal-length vectors.
    pub fn dot(&self, v: &[FieldElement], w: &[FieldElement]) -> Result<FieldElement> {
        if v.len() != w.len() {
            return Err(Error::LengthMismatch { expected: v.len(), found: w.len() });
        }
        Ok(v.iter().zip(w).fold(FieldElement::ZERO, |acc, (&a, &b)| self.add(acc, self.mul(a, b))))
    }

    /// `acc += c * x`, elementwise.
    #[inline]
    pub fn axpy(&self, acc: &mut [FieldElement], c: FieldElement, x: &[FieldElement]) {
        debug_assert_eq!(acc.len(), x.len());
        if c.is_zero() {
            return;
        }
        for (a, &b) in acc.iter_mut().zip(x) {
            *a = self.add(*a, self.mul(c, b));
        }
    }

    pub fn scale(&self, c: FieldElement, v: &[FieldElement]) -> Vec<FieldElement> {
        v.iter().map(|&x| self.mul(c, x)).collect()
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::ElementOutOfField { value: a.0 as u32, order: self.q })
        }
    }
}

fn digits(mut x: u32, p: u32, m: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(m as usize);
    for _ in 0..m {
        d.push(x % p);
        x /= p;
    }
    d
}

fn pack(d: &[u32], p: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Reduces `a` modulo a monic `modulus` in place; the remainder occupies
/// the low `deg(modulus)` slots.
fn poly_rem_monic(a: &mut [u32], modulus: &[u32], p: u32) {
    let deg = modulus.len() - 1;
    for i in (deg..a.len()).rev() {
        let c = a[i];
        if c == 0 {
            continue;
        }
        for (j, &mc) in modulus.iter().enumerate() {
            let k = i - deg + j;
            a[k] = (a[k] + (p - c) * mc % p) % p;
        }
    }
}

fn multiplicative_order(g: u32, group_order: u32, mul: &impl Fn(u32, u32) -> u32) -> u32 {
    let mut x = g;
    let mut k = 1;
    while x != 1 {
        x = mul(x, g);
        k += 1;
        if k > group_order {
            return 0;
        }
    }
    k
}

/// Exhaustive trial division by every monic polynomial of degree
/// `1..=deg/2`.
pub(crate) fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = digits(low as u32, p, d as u32);
            divisor.push(1);
            let mut rem = poly.to_vec();
            poly_rem_monic(&mut rem, &divisor, p);
            if rem[..d].iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, m: u32) -> Option<Vec<u32>> {
    let count = (p as u64).pow(m);
    (0..count).find_map(|low| {
        let mut poly = digits(low as u32, p, m);
        poly.push(1);
        is_irreducible(&poly, p).then_some(poly)
    })
}
