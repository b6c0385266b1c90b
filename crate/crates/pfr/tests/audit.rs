mod common;

use std::collections::BTreeMap;

use pfr::audit::{audit_planner, audit_statistical, audit_theta_invariance, covers_tuple_space, request_signature};
use pfr::binary::{plan_binary, BinaryRole};
use pfr::general::{plan_general, Step};
use pfr::server::answer_query;
use pfr::{Database, Plan, PlanRng, Query, SchemeParams, ThetaIndex};

#[test]
fn binary_every_vector_requested_twice() {
    for k in 1..=4 {
        let params = SchemeParams::binary(k).unwrap();
        let space = params.space();
        for theta in 1..=params.theta_count() {
            let (queries, _) = params.plan(ThetaIndex(theta), &mut PlanRng::seeded(theta as u64)).unwrap();
            for q in &queries {
                let mut counts = BTreeMap::new();
                for r in &q.requests {
                    assert_eq!(r.terms.len(), 1);
                    *counts.entry(r.terms[0].coeffs.clone()).or_insert(0) += 1;
                }
                assert_eq!(counts.len() as u64, space.nonzero_count());
                assert!(counts.values().all(|&c| c == 2), "K={k} theta={theta}");
                assert_eq!(request_signature(q).unwrap().layers_touched, (1 << (k + 1)) - 2);
            }
        }
    }
}

#[test]
fn binary_audit_passes_up_to_k4() {
    for k in 1..=4 {
        let report = audit_theta_invariance(&SchemeParams::binary(k).unwrap(), 11).unwrap();
        assert!(report.passed, "{}", report.to_text());
        assert!(report.server_summaries.iter().all(|s| s.invariant));
    }
}

/// Phase 2 dropped: each server asks for every vector once and v(theta) twice.
fn binary_without_pairs(k: usize, theta: ThetaIndex) -> pfr::Result<Vec<Query>> {
    let (queries, plan) = plan_binary(k, theta, &mut PlanRng::identity())?;
    Ok(queries
        .into_iter()
        .zip(&plan.provenance)
        .map(|(mut q, prov)| {
            q.requests = q
                .requests
                .into_iter()
                .zip(prov)
                .filter(|(_, p)| !matches!(p.role, BinaryRole::Pair(_)))
                .map(|(r, _)| r)
                .collect();
            q
        })
        .collect())
}

#[test]
fn binary_mutant_without_pairing_fails() {
    for k in 2..=4 {
        let params = SchemeParams::binary(k).unwrap();
        let report = audit_planner(&params, |theta| binary_without_pairs(k, theta)).unwrap();
        assert!(!report.passed);
        assert!(report.counterexamples.iter().any(|c| c.server == 1));
        assert!(report.counterexamples.iter().any(|c| c.server == 2));
    }
}

#[test]
fn general_two_servers_pass() {
    for (k, p, m) in [(2, 2, 1), (2, 3, 1), (3, 3, 1), (2, 2, 2), (2, 5, 1)] {
        let params = SchemeParams::general(2, k, p, m).unwrap();
        let report = audit_theta_invariance(&params, 3).unwrap();
        assert!(report.passed, "{}", report.to_text());
    }
}

#[test]
fn general_three_servers_leak_beyond_server_one() {
    let params = SchemeParams::general(3, 2, 3, 1).unwrap();
    let report = audit_theta_invariance(&params, 3).unwrap();
    assert!(!report.passed);
    let s = &report.server_summaries;
    assert!(s[0].invariant);
    assert_eq!(s[0].zero_coefficient_terms, 0);
    assert!(!s[1].invariant && !s[2].invariant);
    assert!(s[1].zero_coefficient_terms > 0);
    assert!(report.counterexamples.iter().all(|c| c.server != 1));
}

#[test]
fn general_server_one_covers_tuple_space() {
    for (n, k, p) in [(2, 2, 2), (3, 2, 3), (3, 2, 4)] {
        let m = if p == 4 { 2 } else { 1 };
        let params = SchemeParams::general(n, k, if p == 4 { 2 } else { p }, m).unwrap();
        let setup = params.setup(&mut PlanRng::seeded(1)).unwrap().unwrap();
        for theta in 1..=params.theta_count() {
            let (queries, _) = plan_general(&setup, ThetaIndex(theta), &mut PlanRng::seeded(2)).unwrap();
            assert!(covers_tuple_space(&queries[0], setup.tuples()).unwrap());
            if n == 2 {
                assert!(covers_tuple_space(&queries[1], setup.tuples()).unwrap());
            }
        }
    }
}

fn general_mutant(params: &SchemeParams, theta: ThetaIndex, drop_step3: bool) -> pfr::Result<(Vec<Query>, Plan)> {
    let (mut queries, plan) = params.plan(theta, &mut PlanRng::identity())?;
    let Plan::General(g) = &plan else { unreachable!() };
    for (server, q) in queries.iter_mut().enumerate() {
        let prov = &g.provenance[server];
        if drop_step3 {
            q.requests = std::mem::take(&mut q.requests)
                .into_iter()
                .zip(prov)
                .filter(|(_, &r)| g.rounds[r].step == Step::Shifted)
                .map(|(req, _)| req)
                .collect();
        }
    }
    if !drop_step3 {
        // no shift: every server repeats server 1's step-2 requests
        let base = queries[0].clone();
        for (query, prov) in queries.iter_mut().zip(&g.provenance).skip(1) {
            for (pos, &r) in prov.iter().enumerate() {
                if g.rounds[r].step == Step::Shifted {
                    let base_pos = g.provenance[0].iter().position(|&x| x == r).unwrap();
                    query.requests[pos] = base.requests[base_pos].clone();
                }
            }
        }
    }
    Ok((queries, plan))
}

#[test]
fn general_mutant_without_step3_fails() {
    let params = SchemeParams::general(2, 2, 3, 1).unwrap();
    let report = audit_planner(&params, |theta| Ok(general_mutant(&params, theta, true)?.0)).unwrap();
    assert!(!report.passed, "{}", report.to_text());
}

#[test]
fn general_mutant_without_shift_is_caught_by_decoding() {
    // Structurally private at N = 2, but it cannot decode.
    let params = SchemeParams::general(2, 2, 3, 1).unwrap();
    let report = audit_planner(&params, |theta| Ok(general_mutant(&params, theta, false)?.0)).unwrap();
    assert!(report.passed);
    let db = Database::generate(&params.field(), 2, params.layers() as usize, 2, 4).unwrap();
    let (queries, plan) = general_mutant(&params, ThetaIndex(2), false).unwrap();
    let answers: Vec<_> = queries.iter().map(|q| answer_query(&db, q).unwrap()).collect();
    let decoded = plan.decode(&answers).unwrap();
    assert_ne!(decoded, common::slow_oracle(&db, &plan.theta_vector()));
}

#[test]
fn statistical_audit_runs_and_is_reproducible() {
    let params = SchemeParams::binary(2).unwrap();
    let a = audit_statistical(&params, ThetaIndex(2), 400, 9).unwrap();
    assert_eq!(a.to_toml(), audit_statistical(&params, ThetaIndex(2), 400, 9).unwrap().to_toml());
    for s in &a.servers {
        assert_eq!(s.positions, 6);
        assert_eq!(s.kinds.iter().map(|k| k.counts.iter().sum::<u64>()).sum::<u64>(), 400 * 6);
        assert!(!s.underpowered);
        assert!(s.p_value > 1e-4, "p = {}", s.p_value);
    }
}

#[test]
fn report_serializations_are_versioned() {
    let report = audit_theta_invariance(&SchemeParams::general(3, 2, 3, 1).unwrap(), 0).unwrap();
    let toml = report.to_toml();
    assert!(toml.starts_with("format_version = 1"));
    assert!(toml.contains("passed = false"));
    assert!(report.to_text().contains("counterexample"));
}
