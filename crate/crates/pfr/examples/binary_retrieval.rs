//! Two servers, GF(2): retrieve W1 + W2 without either server learning which sum was asked for.

use pfr::binary::{decode_binary, plan_binary};
use pfr::server::answer_query;
use pfr::{CoeffVector, Database, FieldElement, FieldSpec, PlanRng, ThetaIndex};

fn main() -> pfr::Result<()> {
    let bits = |v: &[u16]| v.iter().map(|&b| FieldElement(b)).collect::<Vec<_>>();
    let w1 = bits(&[1, 0, 1, 1, 0, 0, 1, 0]);
    let w2 = bits(&[0, 1, 1, 0, 1, 0, 0, 1]);
    let db = Database::from_cells(FieldSpec::new(2, 1)?, 2, 8, 1, [w1, w2].concat())?;

    // theta 3 is (1,1): the XOR of both files
    let theta = ThetaIndex(3);
    let (queries, plan) = plan_binary(2, theta, &mut PlanRng::seeded(7))?;
    for (s, q) in queries.iter().enumerate() {
        let asks: Vec<String> =
            q.requests.iter().map(|r| format!("{}@{}", r.terms[0].coeffs, r.terms[0].layer + 1)).collect();
        println!("server {} is asked for {}", s + 1, asks.join(" "));
    }

    let a1 = answer_query(&db, &queries[0])?;
    let a2 = answer_query(&db, &queries[1])?;
    let stream = decode_binary(&plan, &a1, &a2)?;
    let got: Vec<u16> = stream.values.iter().map(|r| r[0].0).collect();
    println!("decoded  {got:?}");
    assert_eq!(stream, db.oracle(&CoeffVector::from_values(&[1, 1]))?);
    println!("rate {}/{}", plan.layers, a1.values.len() + a2.values.len());
    Ok(())
}
