#![allow(dead_code)]

use pfr::{CoeffVector, Database, DecodedStream, FieldElement};

/// GF(p^m) by schoolbook polynomial arithmetic. Knows nothing about the
/// library's tables; only the element packing convention is shared.
#[derive(Clone, Debug)]
pub struct SlowField {
    pub p: u32,
    pub m: u32,
    /// Monic, constant term first, length m + 1.
    pub poly: Vec<u32>,
}

fn poly_rem(mut a: Vec<u32>, d: &[u32], p: u32) -> Vec<u32> {
    let dl = d.len() - 1;
    let inv_lead = (1..p).find(|x| x * d[dl] % p == 1).unwrap();
    while a.len() > dl {
        let lead = a.pop().unwrap() * inv_lead % p;
        let shift = a.len() - dl;
        for (i, &c) in d[..dl].iter().enumerate() {
            a[shift + i] = (a[shift + i] + p * p - lead * c % p) % p;
        }
    }
    a
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    for deg in 1..=m / 2 {
        for tail in 0..p.pow(deg as u32) {
            let mut d: Vec<u32> = (0..deg).map(|i| tail / p.pow(i as u32) % p).collect();
            d.push(1);
            if poly_rem(poly.to_vec(), &d, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl SlowField {
    /// Smallest monic irreducible of degree m, tails read as base-p numbers.
    pub fn new(p: u32, m: u32) -> Self {
        let poly = (0..p.pow(m))
            .map(|tail| {
                let mut poly: Vec<u32> = (0..m).map(|i| tail / p.pow(i) % p).collect();
                poly.push(1);
                poly
            })
            .find(|poly| is_irreducible(poly, p))
            .expect("an irreducible polynomial exists");
        SlowField { p, m, poly }
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }

    fn digits(&self, a: u16) -> Vec<u32> {
        (0..self.m).map(|i| a as u32 / self.p.pow(i) % self.p).collect()
    }

    fn pack(&self, d: &[u32]) -> u16 {
        d.iter().rev().fold(0, |acc, &c| acc * self.p + c) as u16
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        let (x, y) = (self.digits(a), self.digits(b));
        self.pack(&x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect::<Vec<_>>())
    }

    pub fn neg(&self, a: u16) -> u16 {
        self.pack(&self.digits(a).iter().map(|u| (self.p - u) % self.p).collect::<Vec<_>>())
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u32; 2 * self.m as usize - 1];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        let mut r = poly_rem(prod, &self.poly, self.p);
        r.resize(self.m as usize, 0);
        self.pack(&r)
    }

    pub fn inv(&self, a: u16) -> Option<u16> {
        (1..self.order() as u16).find(|&b| self.mul(a, b) == 1)
    }

    pub fn dot(&self, v: &[u16], w: &[u16]) -> u16 {
        v.iter().zip(w).fold(0, |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }
}

/// `v^T W[t]` for every layer, computed symbol by symbol.
pub fn slow_oracle(db: &Database, v: &CoeffVector) -> DecodedStream {
    let f = db.field();
    let slow = SlowField::new(f.p(), f.m());
    let coeffs: Vec<u16> = v.entries().iter().map(|e| e.0).collect();
    let values = (0..db.layers())
        .map(|t| {
            (0..db.record_len())
                .map(|s| {
                    let column: Vec<u16> = (0..db.files()).map(|k| db.segment(k, t)[s].0).collect();
                    FieldElement(slow.dot(&coeffs, &column))
                })
                .collect()
        })
        .collect();
    DecodedStream { values }
}

/// Every field of order at most `max`, as (p, m).
pub fn small_fields(max: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in 2..=max {
        if (2..p).all(|d| p % d != 0) {
            let mut m = 1;
            while p.pow(m) <= max {
                out.push((p, m));
                m += 1;
            }
        }
    }
    out.sort_by_key(|&(p, m)| p.pow(m));
    out
}

/// Nonzero vectors of GF(q)^k, independently enumerated by counting.
pub fn nonzero_vectors(q: u32, k: usize) -> Vec<Vec<u16>> {
    (1..q.pow(k as u32)).map(|x| (0..k).rev().map(|i| (x / q.pow(i as u32) % q) as u16).collect()).collect()
}
