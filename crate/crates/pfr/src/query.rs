//! Requests, queries and answers exchanged between the user and a server.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::projspace::CoeffVector;

/// One summand `coeffs^T W[layer]`. `layer` is 0-based; the wire format
/// carries it 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub layer: usize,
    pub coeffs: CoeffVector,
}

/// Asks a server for `sum_j coeffs_j^T W[layer_j]`, a length-S record.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Request {
    pub terms: Vec<Term>,
}

impl Request {
    pub fn single(layer: usize, coeffs: CoeffVector) -> Self {
        Request { terms: vec![Term { layer, coeffs }] }
    }
}

/// Shape parameters a query is valid for. `record_len == 0` leaves S
/// unconstrained; the server then answers with its own S.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QueryHeader {
    pub p: u32,
    pub m: u32,
    pub files: usize,
    pub layers: usize,
    pub record_len: usize,
}

impl QueryHeader {
    pub fn new(field: &FieldSpec, files: usize, layers: usize) -> Self {
        QueryHeader { p: field.p(), m: field.m(), files, layers, record_len: 0 }
    }
}

/// Everything one server receives, already in transmission order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub header: QueryHeader,
    pub requests: Vec<Request>,
}

impl Query {
    pub fn with_record_len(mut self, record_len: usize) -> Self {
        self.header.record_len = record_len;
        self
    }

    /// Every layer touched, in order of appearance.
    pub fn layers(&self) -> impl Iterator<Item = usize> + '_ {
        self.requests.iter().flat_map(|r| r.terms.iter().map(|t| t.layer))
    }
}

/// One record per request, aligned with the query's transmission order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    pub values: Vec<Vec<FieldElement>>,
}

impl Answer {
    /// Number of field elements of payload.
    pub fn element_count(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    /// Checks the answer against its query and returns the common record length.
    pub(crate) fn check_aligned(&self, requests: usize) -> Result<usize> {
        if self.values.len() != requests {
            return Err(Error::MisalignedAnswer(format!("{} records for {} requests", self.values.len(), requests)));
        }
        let len = self.values.first().map_or(0, Vec::len);
        if let Some(bad) = self.values.iter().find(|v| v.len() != len) {
            return Err(Error::MisalignedAnswer(format!("record length {} differs from {}", bad.len(), len)));
        }
        Ok(len)
    }
}

/// Client-secret randomness for planning: the layer permutation, request
/// shuffles and the Vandermonde column permutation all draw from here.
///
/// `identity()` turns every permutation into the identity, which is what
/// the structural privacy audit compares.
pub struct PlanRng(Option<ChaCha20Rng>);

impl PlanRng {
    pub fn seeded(seed: u64) -> Self {
        PlanRng(Some(ChaCha20Rng::seed_from_u64(seed)))
    }

    pub fn from_entropy() -> Self {
        PlanRng(Some(ChaCha20Rng::from_os_rng()))
    }

    pub fn identity() -> Self {
        PlanRng(None)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_none()
    }

    /// A uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        if let Some(rng) = self.0.as_mut() {
            p.shuffle(rng);
        }
        p
    }
}

/// Shuffles `requests` into transmission order and returns, for each
/// transmitted position, the request's pre-shuffle index.
pub(crate) fn shuffle_requests(requests: Vec<Request>, rng: &mut PlanRng) -> (Vec<Request>, Vec<usize>) {
    let order = rng.permutation(requests.len());
    let mut slots: Vec<Option<Request>> = requests.into_iter().map(Some).collect();
    let shuffled = order.iter().map(|&i| slots[i].take().expect("permutation")).collect();
    (shuffled, order)
}
