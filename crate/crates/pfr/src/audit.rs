//! Structural privacy audit.
//!
//! A server sees a list of requests, each a set of `(layer, coefficient
//! vector)` pairs. Because layers are relabelled by a uniform secret
//! permutation and requests arrive in uniformly random order, everything
//! the server can learn is captured by the [`Signature`]: the multiset of
//! per-request coefficient multisets, plus how many distinct layers were
//! touched. If the signature of every server is the same for every theta,
//! the server's view is identically distributed across theta.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::projspace::{CoeffVector, ThetaIndex, TupleSpace};
use crate::query::{PlanRng, Query};
use crate::scheme::SchemeParams;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// What one server observes, modulo layer relabelling and request order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    /// Each request's coefficient vectors, sorted; the requests sorted too.
    pub requests: Vec<Vec<CoeffVector>>,
    pub layers_touched: usize,
}

impl Signature {
    /// How often each request kind (sorted coefficient multiset) occurs.
    pub fn request_multiplicities(&self) -> BTreeMap<&[CoeffVector], usize> {
        let mut m = BTreeMap::new();
        for r in &self.requests {
            *m.entry(r.as_slice()).or_default() += 1;
        }
        m
    }

    /// How often each coefficient vector occurs across all terms.
    pub fn coefficient_multiplicities(&self) -> BTreeMap<&CoeffVector, usize> {
        let mut m = BTreeMap::new();
        for v in self.requests.iter().flatten() {
            *m.entry(v).or_default() += 1;
        }
        m
    }

    /// Terms whose coefficient vector is all zero.
    pub fn zero_terms(&self) -> usize {
        self.requests.iter().flatten().filter(|v| v.is_zero()).count()
    }

    /// A short description of the first difference from `other`.
    pub fn describe_difference(&self, other: &Signature) -> Option<String> {
        if self == other {
            return None;
        }
        if self.layers_touched != other.layers_touched {
            return Some(format!("layers touched {} vs {}", self.layers_touched, other.layers_touched));
        }
        if self.requests.len() != other.requests.len() {
            return Some(format!("request count {} vs {}", self.requests.len(), other.requests.len()));
        }
        let (a, b) = (self.request_multiplicities(), other.request_multiplicities());
        let kinds: BTreeSet<_> = a.keys().chain(b.keys()).collect();
        let found = kinds.into_iter().find_map(|k| {
            let (x, y) = (a.get(k).copied().unwrap_or(0), b.get(k).copied().unwrap_or(0));
            (x != y).then(|| format!("request {} appears {x} vs {y} times", kind_label(k)))
        });
        found
    }
}

fn kind_label(vectors: &[CoeffVector]) -> String {
    vectors.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
}

/// Computes the signature of one server's query; a layer used twice
/// within the query is rejected.
pub fn request_signature(query: &Query) -> Result<Signature> {
    let mut layers = BTreeSet::new();
    for layer in query.layers() {
        if !layers.insert(layer) {
            return Err(Error::DuplicateLayer(layer as u64 + 1));
        }
    }
    let mut requests: Vec<Vec<CoeffVector>> = query
        .requests
        .iter()
        .map(|r| {
            let mut v: Vec<_> = r.terms.iter().map(|t| t.coeffs.clone()).collect();
            v.sort();
            v
        })
        .collect();
    requests.sort();
    Ok(Signature { requests, layers_touched: layers.len() })
}

/// True iff the query's requests are exactly the tuples of `tuples`, each
/// once, with term order ignored.
pub fn covers_tuple_space(query: &Query, tuples: &TupleSpace) -> Result<bool> {
    let sig = request_signature(query)?;
    let mut expected: Vec<Vec<CoeffVector>> = (0..tuples.len())
        .map(|m| {
            let mut t = tuples.tuple_at(m).map(|t| t.0)?;
            t.sort();
            Ok(t)
        })
        .collect::<Result<_>>()?;
    expected.sort();
    Ok(sig.requests == expected)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// 1-based server index.
    pub server: usize,
    pub theta: usize,
    pub other_theta: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ServerSummary {
    pub server: usize,
    pub requests: usize,
    pub layers_touched: usize,
    pub request_kinds: usize,
    pub zero_coefficient_terms: usize,
    pub invariant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub scheme: String,
    pub servers: usize,
    pub files: usize,
    pub field_order: u32,
    pub thetas: usize,
    pub passed: bool,
    pub server_summaries: Vec<ServerSummary>,
    pub counterexamples: Vec<Counterexample>,
}

impl AuditReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(
            s,
            "privacy audit: {} N={} K={} q={} over {} values of theta: {verdict}",
            self.scheme, self.servers, self.files, self.field_order, self.thetas
        );
        for sv in &self.server_summaries {
            let _ = writeln!(
                s,
                "  server {}: {} requests, {} layers touched, {} request kinds, {} zero terms, {}",
                sv.server,
                sv.requests,
                sv.layers_touched,
                sv.request_kinds,
                sv.zero_coefficient_terms,
                if sv.invariant { "theta-invariant" } else { "depends on theta" }
            );
        }
        for c in &self.counterexamples {
            let _ = writeln!(
                s,
                "  counterexample: server {} theta {} vs {}: {}",
                c.server, c.theta, c.other_theta, c.detail
            );
        }
        s
    }

    /// Versioned TOML document.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Audits an arbitrary planner: `plan(theta)` returns one query per server.
///
/// Signatures are compared against theta = 1; equality is transitive, so
/// this covers every pair.
pub fn audit_planner(
    params: &SchemeParams,
    mut plan: impl FnMut(ThetaIndex) -> Result<Vec<Query>>,
) -> Result<AuditReport> {
    let servers = params.servers();
    let thetas = params.theta_count();
    let mut signatures: Vec<Vec<Signature>> = Vec::with_capacity(thetas);
    for theta in 1..=thetas {
        let queries = plan(ThetaIndex(theta))?;
        if queries.len() != servers {
            return Err(Error::InvalidParameter(format!(
                "planner produced {} queries for {servers} servers",
                queries.len()
            )));
        }
        signatures.push(queries.iter().map(request_signature).collect::<Result<_>>()?);
    }

    let mut counterexamples = Vec::new();
    let mut summaries = Vec::with_capacity(servers);
    for server in 0..servers {
        let reference = &signatures[0][server];
        let mut invariant = true;
        for (t, sigs) in signatures.iter().enumerate().skip(1) {
            if let Some(detail) = reference.describe_difference(&sigs[server]) {
                invariant = false;
                counterexamples.push(Counterexample { server: server + 1, theta: 1, other_theta: t + 1, detail });
            }
        }
        summaries.push(ServerSummary {
            server: server + 1,
            requests: reference.requests.len(),
            layers_touched: reference.layers_touched,
            request_kinds: reference.request_multiplicities().len(),
            zero_coefficient_terms: reference.zero_terms(),
            invariant,
        });
    }

    Ok(AuditReport {
        format_version: REPORT_FORMAT_VERSION,
        scheme: params.kind().to_string(),
        servers,
        files: params.files(),
        field_order: params.field().order(),
        thetas,
        passed: counterexamples.is_empty(),
        server_summaries: summaries,
        counterexamples,
    })
}

/// Compares per-server signatures across every theta, planning with the
/// layer permutation and shuffles fixed to the identity. Each theta is
/// also planned once with `seed`, and its signature must match the
/// structural one.
pub fn audit_theta_invariance(params: &SchemeParams, seed: u64) -> Result<AuditReport> {
    let mut report = audit_planner(params, |theta| Ok(params.plan(theta, &mut PlanRng::identity())?.0))?;
    let mut rng = PlanRng::seeded(seed);
    for theta in 1..=params.theta_count() {
        let theta = ThetaIndex(theta);
        let structural = params.plan(theta, &mut PlanRng::identity())?.0;
        let randomized = params.plan(theta, &mut rng)?.0;
        for (server, (a, b)) in structural.iter().zip(&randomized).enumerate() {
            if let Some(detail) = request_signature(a)?.describe_difference(&request_signature(b)?) {
                report.counterexamples.push(Counterexample {
                    server: server + 1,
                    theta: theta.0,
                    other_theta: theta.0,
                    detail: format!("randomized plan differs from structural plan: {detail}"),
                });
            }
        }
    }
    report.passed = report.counterexamples.is_empty();
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct KindFrequencies {
    pub kind: String,
    /// Occurrences at each transmission position.
    pub counts: Vec<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositionFrequencies {
    pub server: usize,
    pub positions: usize,
    pub kinds: Vec<KindFrequencies>,
    pub chi_square: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
    /// Some expected cell count is below 5.
    pub underpowered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatisticalReport {
    pub format_version: u32,
    pub scheme: String,
    pub theta: usize,
    pub trials: u64,
    pub seed: u64,
    pub servers: Vec<PositionFrequencies>,
}

impl StatisticalReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "position frequencies: {} theta={} trials={} seed={}",
            self.scheme, self.theta, self.trials, self.seed
        );
        for sv in &self.servers {
            let _ = writeln!(
                s,
                "  server {}: {} kinds x {} positions, chi2 = {:.3} on {} dof, p = {:.4}{}",
                sv.server,
                sv.kinds.len(),
                sv.positions,
                sv.chi_square,
                sv.degrees_of_freedom,
                sv.p_value,
                if sv.underpowered { " (underpowered)" } else { "" }
            );
        }
        s
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

/// Empirical check that each request kind lands at every transmission
/// position equally often, over `trials` fresh plans. Advisory only.
pub fn audit_statistical(
    params: &SchemeParams,
    theta: ThetaIndex,
    trials: u64,
    seed: u64,
) -> Result<StatisticalReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let servers = params.servers();
    let mut rng = PlanRng::seeded(seed);
    let mut tables: Vec<BTreeMap<String, Vec<u64>>> = vec![BTreeMap::new(); servers];
    let mut positions = vec![0usize; servers];
    for _ in 0..trials {
        let (queries, _) = params.plan(theta, &mut rng)?;
        for (server, q) in queries.iter().enumerate() {
            positions[server] = q.requests.len();
            for (pos, r) in q.requests.iter().enumerate() {
                let mut kind: Vec<_> = r.terms.iter().map(|t| t.coeffs.clone()).collect();
                kind.sort();
                let row = tables[server].entry(kind_label(&kind)).or_insert_with(|| vec![0; q.requests.len()]);
                row[pos] += 1;
            }
        }
    }

    let servers = tables
        .into_iter()
        .zip(positions)
        .enumerate()
        .map(|(server, (table, positions))| {
            let mut chi = 0.0;
            let mut dof = 0u64;
            let mut min_expected = f64::INFINITY;
            for counts in table.values() {
                let total: u64 = counts.iter().sum();
                let expected = total as f64 / positions as f64;
                min_expected = min_expected.min(expected);
                chi += counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>();
                dof += positions as u64 - 1;
            }
            let p_value =
                if dof == 0 { 1.0 } else { ChiSquared::new(dof as f64).map(|d| d.sf(chi)).unwrap_or(f64::NAN) };
            PositionFrequencies {
                server: server + 1,
                positions,
                kinds: table.into_iter().map(|(kind, counts)| KindFrequencies { kind, counts }).collect(),
                chi_square: chi,
                degrees_of_freedom: dof,
                p_value,
                underpowered: min_expected < 5.0,
            }
        })
        .collect();

    Ok(StatisticalReport {
        format_version: REPORT_FORMAT_VERSION,
        scheme: params.to_string(),
        theta: theta.0,
        trials,
        seed,
        servers,
    })
}
