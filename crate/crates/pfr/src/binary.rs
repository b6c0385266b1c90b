//! The two-server scheme over binary coefficients.
//!
//! With `n = 2^K - 1` nonzero vectors and `L = 2^{K+1}` layers, relabelled
//! through a secret permutation `W~[t] = W[pi(t)]`:
//!
//! | request                              | server 1        | server 2        |
//! |--------------------------------------|-----------------|-----------------|
//! | `v(i)^T W~[i]`                       | all i           |                 |
//! | `v(i)^T W~[n+i]`                     |                 | all i           |
//! | `v(theta)^T W~[2n+1]` / `W~[2n+2]`   | 2n+1            | 2n+2            |
//! | `(v(theta)-v(i))^T W~[n+i]`          | i != theta      |                 |
//! | `(v(theta)-v(i))^T W~[i]`            |                 | i != theta      |
//!
//! Each server gets `2^{K+1} - 2` single-term requests in random order, so
//! `Q = 4(2^K - 1)` and the rate is `L/Q = 2^{K-1}/(2^K - 1)`.

use std::collections::BTreeSet;

use crate::database::DecodedStream;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::projspace::{CoeffVector, ThetaIndex, VectorSpace};
use crate::query::{shuffle_requests, Answer, PlanRng, Query, QueryHeader, Request};

/// What a transmitted request is for. Indices are the 1-based `i` of v(i).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryRole {
    /// `v(i)^T W~[i]` on server 1, `v(i)^T W~[n+i]` on server 2.
    Phase1(usize),
    /// `v(theta)^T` on the server's private last layer.
    Direct,
    /// `(v(theta) - v(i))^T` paired with the other server's phase-1 request.
    Pair(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance<R> {
    pub role: R,
    /// Position before the transmission shuffle.
    pub original_index: usize,
}

/// Client-secret state for decoding a binary retrieval.
#[derive(Clone, Debug)]
pub struct BinaryPlan {
    pub theta: ThetaIndex,
    pub files: usize,
    pub layers: usize,
    /// `layer_perm[t]` is the real layer behind relabelled layer t.
    pub layer_perm: Vec<usize>,
    /// Per server, the role of each request in transmission order.
    pub provenance: [Vec<Provenance<BinaryRole>>; 2],
}

pub fn binary_field() -> FieldSpec {
    FieldSpec::new(2, 1).expect("GF(2)")
}

/// Plans the two queries for retrieving `v(theta)^T W[t]`, t = 1..2^{K+1}.
pub fn plan_binary(files: usize, theta: ThetaIndex, rng: &mut PlanRng) -> Result<([Query; 2], BinaryPlan)> {
    let f = binary_field();
    let space = VectorSpace::new(2, files)?;
    space.check_theta(theta)?;
    let n = space.nonzero_count() as usize;
    let layers = 2 * (n + 1);

    let v = |i: usize| space.nonzero_vector(i as u64 - 1);
    let v_theta = v(theta.0);
    let diff = |i: usize| CoeffVector(v_theta.0.iter().zip(&v(i).0).map(|(&a, &b)| f.sub(a, b)).collect());

    // {v(theta) - v(i) : i != theta} together with v(theta) must be all of V.
    let mut seen: BTreeSet<CoeffVector> = (1..=n).filter(|&i| i != theta.0).map(diff).collect();
    seen.insert(v_theta.clone());
    if seen.len() != n || seen.iter().any(CoeffVector::is_zero) {
        return Err(Error::Internal("pair coefficients do not cover the nonzero vectors".into()));
    }

    let layer_perm = rng.permutation(layers);
    let at = |tilde: usize| layer_perm[tilde];

    let mut plans: [Vec<(BinaryRole, Request)>; 2] = [Vec::new(), Vec::new()];
    for i in 1..=n {
        plans[0].push((BinaryRole::Phase1(i), Request::single(at(i - 1), v(i))));
        plans[1].push((BinaryRole::Phase1(i), Request::single(at(n + i - 1), v(i))));
    }
    plans[0].push((BinaryRole::Direct, Request::single(at(2 * n), v_theta.clone())));
    plans[1].push((BinaryRole::Direct, Request::single(at(2 * n + 1), v_theta.clone())));
    for i in (1..=n).filter(|&i| i != theta.0) {
        plans[0].push((BinaryRole::Pair(i), Request::single(at(n + i - 1), diff(i))));
        plans[1].push((BinaryRole::Pair(i), Request::single(at(i - 1), diff(i))));
    }

    let header = QueryHeader::new(&f, files, layers);
    let mut queries = Vec::with_capacity(2);
    let mut provenance = Vec::with_capacity(2);
    for plan in plans {
        let (roles, requests): (Vec<_>, Vec<_>) = plan.into_iter().unzip();
        let (requests, order) = shuffle_requests(requests, rng);
        provenance.push(order.into_iter().map(|i| Provenance { role: roles[i], original_index: i }).collect());
        queries.push(Query { header, requests });
    }

    let [p1, p2]: [Vec<_>; 2] = provenance.try_into().expect("two servers");
    let [q1, q2]: [Query; 2] = queries.try_into().expect("two servers");
    Ok(([q1, q2], BinaryPlan { theta, files, layers, layer_perm, provenance: [p1, p2] }))
}

/// Recovers `v(theta)^T W[t]` for every layer, in original layer order.
pub fn decode_binary(plan: &BinaryPlan, a1: &Answer, a2: &Answer) -> Result<DecodedStream> {
    let f = binary_field();
    let n = plan.layers / 2 - 1;
    let answers = [a1, a2];

    let mut record_len = None;
    // per server: phase-1 value by i, direct value, pair value by i
    let mut phase1: [Vec<Option<&[FieldElement]>>; 2] = [vec![None; n + 1], vec![None; n + 1]];
    let mut pair: [Vec<Option<&[FieldElement]>>; 2] = [vec![None; n + 1], vec![None; n + 1]];
    let mut direct: [Option<&[FieldElement]>; 2] = [None, None];
    for s in 0..2 {
        let len = answers[s].check_aligned(plan.provenance[s].len())?;
        match record_len {
            None => record_len = Some(len),
            Some(l) if l != len => return Err(Error::MisalignedAnswer(format!("record lengths {l} and {len} differ"))),
            _ => {}
        }
        for (prov, value) in plan.provenance[s].iter().zip(&answers[s].values) {
            match prov.role {
                BinaryRole::Phase1(i) => phase1[s][i] = Some(value),
                BinaryRole::Pair(i) => pair[s][i] = Some(value),
                BinaryRole::Direct => direct[s] = Some(value),
            }
        }
    }

    let missing = || Error::Internal("plan provenance is incomplete".into());
    let sum = |a: &[FieldElement], b: &[FieldElement]| a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect::<Vec<_>>();

    let mut tilde: Vec<Vec<FieldElement>> = vec![Vec::new(); plan.layers];
    for i in 1..=n {
        let (lo, hi) = (i - 1, n + i - 1);
        if i == plan.theta.0 {
            tilde[lo] = phase1[0][i].ok_or_else(missing)?.to_vec();
            tilde[hi] = phase1[1][i].ok_or_else(missing)?.to_vec();
        } else {
            tilde[lo] = sum(phase1[0][i].ok_or_else(missing)?, pair[1][i].ok_or_else(missing)?);
            tilde[hi] = sum(phase1[1][i].ok_or_else(missing)?, pair[0][i].ok_or_else(missing)?);
        }
    }
    tilde[2 * n] = direct[0].ok_or_else(missing)?.to_vec();
    tilde[2 * n + 1] = direct[1].ok_or_else(missing)?.to_vec();

    let mut values = vec![Vec::new(); plan.layers];
    for (t, rec) in tilde.into_iter().enumerate() {
        values[plan.layer_perm[t]] = rec;
    }
    Ok(DecodedStream { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::database::tests::xor_example;
    use crate::server::answer_query;
    use std::collections::BTreeMap;

    fn multiset(q: &Query) -> BTreeMap<CoeffVector, usize> {
        let mut m = BTreeMap::new();
        for r in &q.requests {
            assert_eq!(r.terms.len(), 1);
            *m.entry(r.terms[0].coeffs.clone()).or_default() += 1;
        }
        m
    }

    #[test]
    fn k2_theta1_request_pattern() {
        let ([q1, q2], plan) = plan_binary(2, ThetaIndex(1), &mut PlanRng::seeded(3)).unwrap();
        assert_eq!(plan.layers, 8);
        assert_eq!(q1.requests.len(), 6);
        assert_eq!(q2.requests.len(), 6);
        let expected: BTreeMap<_, _> =
            [[0, 1], [1, 0], [1, 1]].iter().map(|v| (CoeffVector::from_values(v), 2)).collect();
        assert_eq!(multiset(&q1), expected);
        assert_eq!(multiset(&q2), expected);
    }

    #[test]
    fn degenerate_k1() {
        let ([q1, q2], plan) = plan_binary(1, ThetaIndex(1), &mut PlanRng::seeded(0)).unwrap();
        assert_eq!(plan.layers, 4);
        assert_eq!(q1.requests.len(), 2);
        assert_eq!(q2.requests.len(), 2);
    }

    #[test]
    fn k3_request_counts() {
        let ([q1, q2], plan) = plan_binary(3, ThetaIndex(5), &mut PlanRng::seeded(9)).unwrap();
        assert_eq!(plan.layers, 16);
        assert_eq!((q1.requests.len(), q2.requests.len()), (14, 14));
    }

    #[test]
    fn rejects_bad_theta() {
        assert!(plan_binary(2, ThetaIndex(0), &mut PlanRng::seeded(0)).is_err());
        assert!(plan_binary(2, ThetaIndex(4), &mut PlanRng::seeded(0)).is_err());
    }

    #[test]
    fn each_server_skips_two_layers() {
        for k in 1..=5 {
            let ([q1, q2], plan) = plan_binary(k, ThetaIndex(1), &mut PlanRng::seeded(k as u64)).unwrap();
            for q in [&q1, &q2] {
                let touched: BTreeSet<_> = q.layers().collect();
                assert_eq!(touched.len(), q.requests.len());
                assert_eq!(plan.layers - touched.len(), 2);
            }
        }
    }

    #[test]
    fn decodes_xor_example() {
        let db = xor_example();
        let ([q1, q2], plan) = plan_binary(2, ThetaIndex(3), &mut PlanRng::seeded(11)).unwrap();
        let a1 = answer_query(&db, &q1).unwrap();
        let a2 = answer_query(&db, &q2).unwrap();
        let out = decode_binary(&plan, &a1, &a2).unwrap();
        let expected: Vec<Vec<FieldElement>> =
            [1, 1, 0, 1, 1, 0, 1, 1].iter().map(|&b| vec![FieldElement(b)]).collect();
        assert_eq!(out.values, expected);
    }

    #[test]
    fn unit_vector_returns_file() {
        let db = xor_example();
        // v(1) = (0,1) = e_2, v(2) = (1,0) = e_1
        for (theta, file) in [(1, 1), (2, 0)] {
            let ([q1, q2], plan) = plan_binary(2, ThetaIndex(theta), &mut PlanRng::seeded(5)).unwrap();
            let out = decode_binary(&plan, &answer_query(&db, &q1).unwrap(), &answer_query(&db, &q2).unwrap()).unwrap();
            let want: Vec<_> = (0..8).map(|t| db.segment(file, t).to_vec()).collect();
            assert_eq!(out.values, want);
        }
    }

    #[test]
    fn truncated_answer_is_rejected() {
        let db = xor_example();
        let ([q1, q2], plan) = plan_binary(2, ThetaIndex(2), &mut PlanRng::seeded(1)).unwrap();
        let mut a1 = answer_query(&db, &q1).unwrap();
        let a2 = answer_query(&db, &q2).unwrap();
        a1.values.pop();
        assert!(matches!(decode_binary(&plan, &a1, &a2), Err(Error::MisalignedAnswer(_))));
        let mut a1 = answer_query(&db, &q1).unwrap();
        a1.values[0].push(FieldElement::ZERO);
        assert!(matches!(decode_binary(&plan, &a1, &a2), Err(Error::MisalignedAnswer(_))));
    }
}
