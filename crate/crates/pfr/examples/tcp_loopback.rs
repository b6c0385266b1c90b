//! Real sockets: N servers on 127.0.0.1, one retrieval, byte accounting.

use std::sync::Arc;

use pfr::{retrieve, Database, LoopbackCluster, PlanRng, SchemeParams, ThetaIndex};

fn main() -> pfr::Result<()> {
    let params = SchemeParams::general(3, 2, 2, 2)?;
    let db = Arc::new(Database::generate(&params.field(), params.files(), params.layers() as usize, 16, 9)?);
    let cluster = LoopbackCluster::start(Arc::clone(&db), params.servers())?;
    println!("{params} served at {:?}", cluster.addrs());

    let r = retrieve(&params, ThetaIndex(2), &cluster.transport(), &mut PlanRng::from_entropy())?;
    let t = &r.transcript;
    for (i, e) in t.exchanges.iter().enumerate() {
        println!("  server {}: up {} B, down {} B, {:.2?}", i + 1, e.upload_bytes, e.download_bytes, e.elapsed);
    }
    println!("Q = {}, payload {} elements, framing {} B", t.answer_records(), t.answer_elements(), t.framing_bytes());
    assert_eq!(r.stream, db.oracle(&r.plan.theta_vector())?);
    println!("decoded stream matches the database");
    Ok(())
}
