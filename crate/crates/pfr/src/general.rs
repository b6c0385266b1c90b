//! The N-server scheme over GF(q), q >= N.
//!
//! Layers are relabelled through a secret permutation and walked in
//! rounds, one round per (N-1)-tuple of nonzero coefficient vectors. Each
//! server receives exactly one request per round.
//!
//! Rounds whose tuple is not entirely parallel to v(theta) ("step 2") use
//! N-1 fresh layers: server 1 gets the plain combination, server n >= 2
//! the same combination with column n-1 of the permuted Vandermonde matrix
//! times v(theta) added on. Differences against server 1 give N-1
//! independent equations in the wanted values.
//!
//! Rounds whose tuple lies entirely in the parallel class of v(theta)
//! ("step 3") use N layers: server 1 the plain sum, servers 2..N-1 the
//! sum scaled row-wise by Vandermonde column n, and server N the plain sum
//! with its last term moved to the extra layer.

use std::sync::Arc;

use crate::database::DecodedStream;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::Matrix;
use crate::projspace::{parallel_scalar, CoeffVector, ThetaIndex, TupleSpace, VectorSpace};
use crate::query::{shuffle_requests, Answer, PlanRng, Query, QueryHeader, Request, Term};

/// Attempts at drawing a column permutation before giving up.
pub const MAX_COLUMN_DRAWS: usize = 1000;

#[derive(Clone, Debug)]
pub struct GeneralSetup {
    servers: usize,
    field: FieldSpec,
    tuples: TupleSpace,
    alphas: Vec<FieldElement>,
    vandermonde: Matrix,
    col_perm: Vec<usize>,
    v_tilde: Matrix,
    step2_inverse: Matrix,
    step3_inverse: Matrix,
}

impl GeneralSetup {
    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn files(&self) -> usize {
        self.tuples.space().k()
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn space(&self) -> &VectorSpace {
        self.tuples.space()
    }

    pub fn tuples(&self) -> &TupleSpace {
        &self.tuples
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }

    pub fn vandermonde(&self) -> &Matrix {
        &self.vandermonde
    }

    /// Column j of the permuted matrix is column `col_perm[j]` of the original.
    pub fn col_perm(&self) -> &[usize] {
        &self.col_perm
    }

    pub fn v_tilde(&self) -> &Matrix {
        &self.v_tilde
    }

    /// Rounds with a tuple outside the parallel class: `(q^K-1)^{N-1} - (q-1)^{N-1}`.
    pub fn step2_rounds(&self) -> usize {
        (self.tuples.len() - self.step3_rounds() as u64) as usize
    }

    /// `(q-1)^{N-1}`.
    pub fn step3_rounds(&self) -> usize {
        (self.field.order() as usize - 1).pow(self.tuples.arity() as u32)
    }

    /// `L = (N-1)(q^K-1)^{N-1} + (q-1)^{N-1}`.
    pub fn layers(&self) -> usize {
        (self.servers - 1) * self.step2_rounds() + self.servers * self.step3_rounds()
    }

    /// Downloads `Q = N (q^K-1)^{N-1}`.
    pub fn downloads(&self) -> usize {
        self.servers * self.tuples.len() as usize
    }
}

/// Matrix of the step-2 system: row c holds column c of the permuted Vandermonde matrix.
fn step2_matrix(v_tilde: &Matrix) -> Matrix {
    v_tilde.transpose()
}

/// Matrix of the step-3 system: an all-ones row (server 1) over columns
/// 2..N-1 of the permuted Vandermonde matrix (servers 2..N-1).
fn step3_matrix(v_tilde: &Matrix) -> Matrix {
    let n1 = v_tilde.rows();
    let mut rows = vec![vec![FieldElement::ONE; n1]];
    rows.extend((1..n1).map(|c| v_tilde.column(c)));
    Matrix::from_rows(rows).expect("square")
}

/// Fixes the Vandermonde nodes and draws the column permutation.
///
/// The nodes are the first N-1 field elements. The permutation is redrawn
/// until both per-round decoding systems are invertible; the step-3 system
/// is singular whenever the all-ones column lands strictly inside.
pub fn setup_general(servers: usize, files: usize, field: &FieldSpec, rng: &mut PlanRng) -> Result<GeneralSetup> {
    if servers < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 servers, got {servers}")));
    }
    if (field.order() as usize) < servers {
        return Err(Error::InvalidParameter(format!(
            "field order {} is smaller than the number of servers {servers}",
            field.order()
        )));
    }
    let space = VectorSpace::new(field.order(), files)?;
    let tuples = TupleSpace::new(space, servers)?;

    let alphas: Vec<FieldElement> = field.elements().take(servers - 1).collect();
    let vandermonde = Matrix::vandermonde(field, &alphas);
    if vandermonde.inverse(field).is_none() {
        return Err(Error::Internal("Vandermonde matrix with distinct nodes is singular".into()));
    }

    for _ in 0..MAX_COLUMN_DRAWS {
        let col_perm = rng.permutation(servers - 1);
        let v_tilde = vandermonde.permute_columns(&col_perm);
        let step2 = step2_matrix(&v_tilde).inverse(field);
        let step3 = step3_matrix(&v_tilde).inverse(field);
        if let (Some(step2_inverse), Some(step3_inverse)) = (step2, step3) {
            return Ok(GeneralSetup {
                servers,
                field: field.clone(),
                tuples,
                alphas,
                vandermonde,
                col_perm,
                v_tilde,
                step2_inverse,
                step3_inverse,
            });
        }
        if rng.is_identity() {
            break;
        }
    }
    Err(Error::Internal("no column permutation gives invertible decoding systems".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    /// Tuple not entirely parallel to v(theta); N-1 layers per round.
    Shifted,
    /// Tuple inside the parallel class of v(theta); N layers per round.
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round {
    pub step: Step,
    /// Index of the round's tuple in the tuple enumeration.
    pub tuple_index: u64,
    /// First relabelled layer of the round's block (0-based).
    pub block_start: usize,
}

impl Round {
    pub fn block_len(&self, servers: usize) -> usize {
        match self.step {
            Step::Shifted => servers - 1,
            Step::Parallel => servers,
        }
    }
}

/// Client-secret state for decoding a general retrieval.
#[derive(Clone, Debug)]
pub struct GeneralPlan {
    pub setup: Arc<GeneralSetup>,
    pub theta: ThetaIndex,
    pub theta_vector: CoeffVector,
    pub layers: usize,
    /// `layer_perm[t]` is the real layer behind relabelled layer t.
    pub layer_perm: Vec<usize>,
    /// Step-2 rounds in tuple order, then step-3 rounds in tuple order.
    pub rounds: Vec<Round>,
    /// Per server, the round of each request in transmission order.
    pub provenance: Vec<Vec<usize>>,
}

impl GeneralPlan {
    pub fn tuple(&self, round: &Round) -> Vec<CoeffVector> {
        self.setup.tuples().tuple_at(round.tuple_index).expect("planned tuple").0
    }
}

/// Builds the requests of one round, one per server, before relabelling
/// through the layer permutation. Layers are relabelled positions.
pub(crate) fn round_requests(
    setup: &GeneralSetup,
    theta_vector: &CoeffVector,
    round: &Round,
    tuple: &[CoeffVector],
) -> Vec<Request> {
    let f = setup.field();
    let n = setup.servers();
    let b = round.block_start;
    let v_tilde = setup.v_tilde();
    let term = |layer: usize, coeffs: CoeffVector| Term { layer, coeffs };

    let plain = Request { terms: tuple.iter().enumerate().map(|(j, v)| term(b + j, v.clone())).collect() };
    let mut out = Vec::with_capacity(n);
    out.push(plain.clone());
    match round.step {
        Step::Shifted => {
            for server in 1..n {
                let terms = tuple
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let shift = v_tilde[(j, server - 1)];
                        let coeffs =
                            v.0.iter().zip(&theta_vector.0).map(|(&a, &t)| f.add(a, f.mul(shift, t))).collect();
                        term(b + j, CoeffVector(coeffs))
                    })
                    .collect();
                out.push(Request { terms });
            }
        }
        Step::Parallel => {
            for server in 1..n - 1 {
                let terms = tuple
                    .iter()
                    .enumerate()
                    .map(|(j, v)| term(b + j, CoeffVector(f.scale(v_tilde[(j, server)], &v.0))))
                    .collect();
                out.push(Request { terms });
            }
            let mut last = plain;
            last.terms.last_mut().expect("nonempty tuple").layer = b + n - 1;
            out.push(last);
        }
    }
    out
}

/// Plans the N queries for retrieving `v(theta)^T W[t]` for all L layers.
pub fn plan_general(
    setup: &Arc<GeneralSetup>,
    theta: ThetaIndex,
    rng: &mut PlanRng,
) -> Result<(Vec<Query>, GeneralPlan)> {
    let f = setup.field();
    let space = setup.space();
    let theta_vector = space.canonical(theta)?;
    let n = setup.servers();
    let tuples = setup.tuples();

    let mut shifted = Vec::with_capacity(setup.step2_rounds());
    let mut parallel = Vec::with_capacity(setup.step3_rounds());
    for m in 0..tuples.len() {
        let idx = tuples.indices_at(m)?;
        let is_parallel = idx.iter().all(|&i| parallel_scalar(f, &space.nonzero_vector(i), &theta_vector).is_some());
        if is_parallel {
            parallel.push(m);
        } else {
            shifted.push(m);
        }
    }
    if shifted.len() != setup.step2_rounds() || parallel.len() != setup.step3_rounds() {
        return Err(Error::Internal("parallel-class count disagrees with (q-1)^{N-1}".into()));
    }

    let mut rounds = Vec::with_capacity(tuples.len() as usize);
    let mut next = 0;
    for (step, list) in [(Step::Shifted, &shifted), (Step::Parallel, &parallel)] {
        for &tuple_index in list {
            let round = Round { step, tuple_index, block_start: next };
            next += round.block_len(n);
            rounds.push(round);
        }
    }
    let layers = setup.layers();
    debug_assert_eq!(next, layers);

    let layer_perm = rng.permutation(layers);
    let mut per_server: Vec<Vec<Request>> = vec![Vec::with_capacity(rounds.len()); n];
    for round in &rounds {
        let tuple = tuples.tuple_at(round.tuple_index)?.0;
        for (server, mut req) in round_requests(setup, &theta_vector, round, &tuple).into_iter().enumerate() {
            for t in &mut req.terms {
                t.layer = layer_perm[t.layer];
            }
            per_server[server].push(req);
        }
    }

    let header = QueryHeader::new(f, space.k(), layers);
    let mut queries = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for requests in per_server {
        let (requests, order) = shuffle_requests(requests, rng);
        queries.push(Query { header, requests });
        provenance.push(order);
    }

    let plan = GeneralPlan { setup: Arc::clone(setup), theta, theta_vector, layers, layer_perm, rounds, provenance };
    Ok((queries, plan))
}

/// Recovers `v(theta)^T W[t]` for every layer, in original layer order.
pub fn decode_general(plan: &GeneralPlan, answers: &[Answer]) -> Result<DecodedStream> {
    let setup = &plan.setup;
    let f = setup.field();
    let n = setup.servers();
    if answers.len() != n {
        return Err(Error::MisalignedAnswer(format!("{} answers for {n} servers", answers.len())));
    }

    let mut record_len = None;
    let mut by_round: Vec<Vec<&[FieldElement]>> = vec![vec![&[][..]; plan.rounds.len()]; n];
    for (server, answer) in answers.iter().enumerate() {
        let len = answer.check_aligned(plan.provenance[server].len())?;
        if *record_len.get_or_insert(len) != len {
            return Err(Error::MisalignedAnswer(format!("record lengths differ across servers ({len})")));
        }
        for (&round, value) in plan.provenance[server].iter().zip(&answer.values) {
            by_round[server][round] = value;
        }
    }
    let record_len = record_len.unwrap_or(0);

    let sub = |a: &[FieldElement], b: &[FieldElement]| -> Vec<FieldElement> {
        a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
    };

    let mut tilde: Vec<Vec<FieldElement>> = vec![Vec::new(); plan.layers];
    for (r, round) in plan.rounds.iter().enumerate() {
        let b = round.block_start;
        match round.step {
            Step::Shifted => {
                let base = by_round[0][r];
                let diffs: Vec<_> = (1..n).map(|s| sub(by_round[s][r], base)).collect();
                for (j, rec) in setup.step2_inverse.apply_records(f, &diffs).into_iter().enumerate() {
                    tilde[b + j] = rec;
                }
            }
            Step::Parallel => {
                let tuple = plan.tuple(round);
                let betas: Vec<FieldElement> = tuple
                    .iter()
                    .map(|v| {
                        parallel_scalar(f, v, &plan.theta_vector)
                            .ok_or_else(|| Error::Internal("step-3 tuple outside the parallel class".into()))
                    })
                    .collect::<Result<_>>()?;
                let rhs: Vec<Vec<FieldElement>> = (0..n - 1).map(|s| by_round[s][r].to_vec()).collect();
                let partial = setup.step3_inverse.apply_records(f, &rhs);

                let mut last = by_round[n - 1][r].to_vec();
                for x in &partial[..n - 2] {
                    last = sub(&last, x);
                }
                for (j, x) in partial.iter().enumerate() {
                    let inv = f.inv(betas[j])?;
                    tilde[b + j] = f.scale(inv, x);
                }
                tilde[b + n - 1] = f.scale(f.inv(betas[n - 2])?, &last);
            }
        }
    }

    let mut values = vec![vec![FieldElement::ZERO; record_len]; plan.layers];
    for (t, rec) in tilde.into_iter().enumerate() {
        values[plan.layer_perm[t]] = rec;
    }
    Ok(DecodedStream { values })
}
