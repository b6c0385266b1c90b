//! Three servers over GF(3), through the in-memory transport.

use std::sync::Arc;

use pfr::{retrieve, Database, InMemoryTransport, PlanRng, SchemeParams, ThetaIndex};

fn main() -> pfr::Result<()> {
    let params = SchemeParams::general(3, 2, 3, 1)?;
    println!("{params}: L = {}, Q = {}", params.layers(), params.downloads());
    let db = Arc::new(Database::generate(&params.field(), 2, params.layers() as usize, 8, 1)?);
    let transport = InMemoryTransport::replicated(Arc::clone(&db), 3);

    let mut rng = PlanRng::seeded(2024);
    for theta in 1..=params.theta_count() {
        let r = retrieve(&params, ThetaIndex(theta), &transport, &mut rng)?;
        let ok = r.stream == db.oracle(&r.plan.theta_vector())?;
        println!(
            "theta {theta} {}: {} records, {} elements, digest {}..., matches oracle: {ok}",
            r.plan.theta_vector(),
            r.transcript.answer_records(),
            r.transcript.answer_elements(),
            &r.stream.digest()[..16]
        );
    }
    Ok(())
}
