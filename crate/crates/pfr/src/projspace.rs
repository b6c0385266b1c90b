//! Enumeration of coefficient vectors, their projective representatives,
//! parallel classes and the (N-1)-tuple spaces the general scheme walks.
//!
//! Vectors are ordered lexicographically with the first entry most
//! significant, so the i-th nonzero vector (0-based) is the base-q
//! expansion of `i + 1`. Every order here is stable and reproducible.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// Default limit on the number of vectors or tuples any enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// A length-K coefficient vector over GF(q).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoeffVector(pub Vec<FieldElement>);

impl CoeffVector {
    pub fn entries(&self) -> &[FieldElement] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|e| e.is_zero())
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut v = vec![FieldElement::ZERO; k];
        v[i] = FieldElement::ONE;
        CoeffVector(v)
    }

    pub fn from_values(values: &[u16]) -> Self {
        CoeffVector(values.iter().map(|&v| FieldElement(v)).collect())
    }

    fn leading(&self) -> Option<(usize, FieldElement)> {
        self.0.iter().copied().enumerate().find(|(_, e)| !e.is_zero())
    }
}

impl fmt::Display for CoeffVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// 1-based index of a canonical representative, `1..=(q^K-1)/(q-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThetaIndex(pub usize);

impl fmt::Display for ThetaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered (N-1)-tuple of coefficient vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffTuple(pub Vec<CoeffVector>);

/// The space GF(q)^K viewed through its nonzero vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorSpace {
    q: u64,
    k: usize,
    nonzero: u64,
}

impl VectorSpace {
    pub fn new(q: u32, k: usize) -> Result<Self> {
        Self::with_cap(q, k, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(q: u32, k: usize, cap: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("field order {q} below 2")));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let size = (q as u128).checked_pow(k as u32).map(|s| s - 1);
        match size {
            Some(s) if s <= cap as u128 => Ok(VectorSpace { q: q as u64, k, nonzero: s as u64 }),
            _ => Err(Error::EnumerationCap { size: size.unwrap_or(u128::MAX), cap }),
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// q^K - 1.
    pub fn nonzero_count(&self) -> u64 {
        self.nonzero
    }

    /// (q^K - 1)/(q - 1).
    pub fn canonical_count(&self) -> u64 {
        self.nonzero / (self.q - 1)
    }

    /// The `index`-th nonzero vector (0-based) in lexicographic order.
    pub fn nonzero_vector(&self, index: u64) -> CoeffVector {
        debug_assert!(index < self.nonzero);
        let mut x = index + 1;
        let mut entries = vec![FieldElement::ZERO; self.k];
        for slot in entries.iter_mut().rev() {
            *slot = FieldElement((x % self.q) as u16);
            x /= self.q;
        }
        CoeffVector(entries)
    }

    /// Inverse of [`nonzero_vector`](Self::nonzero_vector).
    pub fn nonzero_index(&self, v: &CoeffVector) -> Result<u64> {
        if v.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, found: v.len() });
        }
        let value = v.0.iter().fold(0u64, |acc, e| acc * self.q + e.0 as u64);
        if value == 0 {
            return Err(Error::ZeroVector);
        }
        Ok(value - 1)
    }

    pub fn enum_nonzero(&self) -> Vec<CoeffVector> {
        (0..self.nonzero).map(|i| self.nonzero_vector(i)).collect()
    }

    /// Representatives whose first nonzero entry is 1, in lexicographic order.
    pub fn enum_canonical(&self) -> Vec<CoeffVector> {
        (0..self.nonzero)
            .map(|i| self.nonzero_vector(i))
            .filter(|v| v.leading().is_some_and(|(_, e)| e == FieldElement::ONE))
            .collect()
    }

    pub fn check_theta(&self, theta: ThetaIndex) -> Result<()> {
        let count = self.canonical_count();
        if theta.0 == 0 || theta.0 as u64 > count {
            return Err(Error::InvalidParameter(format!("theta {theta} outside 1..={count}")));
        }
        Ok(())
    }

    /// v(theta): the theta-th canonical representative.
    ///
    /// Canonical vectors come in runs: those with leading position j are
    /// `e_j` followed by every tail in GF(q)^{K-1-j}, and later leading
    /// positions sort first, so the representative is found without
    /// enumerating the list.
    pub fn canonical(&self, theta: ThetaIndex) -> Result<CoeffVector> {
        self.check_theta(theta)?;
        let mut rank = theta.0 as u64 - 1;
        let mut entries = vec![FieldElement::ZERO; self.k];
        for lead in (0..self.k).rev() {
            let run = self.q.pow((self.k - 1 - lead) as u32);
            if rank < run {
                entries[lead] = FieldElement::ONE;
                let mut x = rank;
                for slot in entries[lead + 1..].iter_mut().rev() {
                    *slot = FieldElement((x % self.q) as u16);
                    x /= self.q;
                }
                return Ok(CoeffVector(entries));
            }
            rank -= run;
        }
        unreachable!("theta checked against canonical_count")
    }

    /// Theta of the class containing a nonzero vector.
    pub fn theta_of(&self, f: &FieldSpec, v: &CoeffVector) -> Result<ThetaIndex> {
        let rep = normalize(f, v)?;
        let lead = rep.leading().expect("nonzero").0;
        let mut theta = 1u64;
        for j in lead + 1..self.k {
            theta += self.q.pow((self.k - 1 - j) as u32);
        }
        let tail = rep.0[lead + 1..].iter().fold(0u64, |acc, e| acc * self.q + e.0 as u64);
        Ok(ThetaIndex((theta + tail) as usize))
    }
}

/// Scales a nonzero vector so its first nonzero entry is 1.
pub fn normalize(f: &FieldSpec, v: &CoeffVector) -> Result<CoeffVector> {
    let (_, lead) = v.leading().ok_or(Error::ZeroVector)?;
    let inv = f.inv(lead)?;
    Ok(CoeffVector(f.scale(inv, &v.0)))
}

/// All nonzero multiples `beta * v`, ordered by beta.
pub fn parallel_class(f: &FieldSpec, v: &CoeffVector) -> Result<Vec<CoeffVector>> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(f.elements().skip(1).map(|beta| CoeffVector(f.scale(beta, &v.0))).collect())
}

/// If `u = beta * v` for some nonzero beta, returns beta.
pub fn parallel_scalar(f: &FieldSpec, u: &CoeffVector, v: &CoeffVector) -> Option<FieldElement> {
    let (lead, vl) = v.leading()?;
    if u.len() != v.len() {
        return None;
    }
    let beta = f.div(u.0[lead], vl).ok()?;
    if beta.is_zero() {
        return None;
    }
    u.0.iter().zip(&v.0).all(|(&a, &b)| a == f.mul(beta, b)).then_some(beta)
}

/// Mixed-radix view of V_N: all (N-1)-tuples of nonzero vectors.
#[derive(Clone, Debug)]
pub struct TupleSpace {
    space: VectorSpace,
    arity: usize,
    size: u64,
}

impl TupleSpace {
    /// Tuples of length `n_servers - 1`.
    pub fn new(space: VectorSpace, n_servers: usize) -> Result<Self> {
        Self::with_cap(space, n_servers, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(space: VectorSpace, n_servers: usize, cap: u64) -> Result<Self> {
        if n_servers < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 servers, got {n_servers}")));
        }
        let arity = n_servers - 1;
        let size = (space.nonzero_count() as u128).checked_pow(arity as u32);
        match size {
            Some(s) if s <= cap as u128 => Ok(TupleSpace { space, arity, size: s as u64 }),
            _ => Err(Error::EnumerationCap { size: size.unwrap_or(u128::MAX), cap }),
        }
    }

    pub fn space(&self) -> &VectorSpace {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// (q^K - 1)^{N-1}.
    pub fn len(&self) -> u64 {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Component indices (into the nonzero enumeration) of tuple `m`;
    /// the first component is the most significant digit.
    pub fn indices_at(&self, m: u64) -> Result<Vec<u64>> {
        if m >= self.size {
            return Err(Error::IndexOutOfRange { index: m as u128, size: self.size as u128 });
        }
        let radix = self.space.nonzero_count();
        let mut digits = vec![0u64; self.arity];
        let mut x = m;
        for d in digits.iter_mut().rev() {
            *d = x % radix;
            x /= radix;
        }
        Ok(digits)
    }

    pub fn tuple_at(&self, m: u64) -> Result<CoeffTuple> {
        Ok(CoeffTuple(self.indices_at(m)?.into_iter().map(|i| self.space.nonzero_vector(i)).collect()))
    }

    pub fn index_of(&self, t: &CoeffTuple) -> Result<u64> {
        if t.0.len() != self.arity {
            return Err(Error::LengthMismatch { expected: self.arity, found: t.0.len() });
        }
        let radix = self.space.nonzero_count();
        t.0.iter().try_fold(0u64, |acc, v| Ok(acc * radix + self.space.nonzero_index(v)?))
    }
}

/// True iff every component is a nonzero multiple of v(theta).
pub fn is_parallel_tuple(f: &FieldSpec, t: &CoeffTuple, theta_vector: &CoeffVector) -> bool {
    t.0.iter().all(|u| parallel_scalar(f, u, theta_vector).is_some())
}
