//! The frames a server receives and returns.

use pfr::server::handle_frame;
use pfr::wire::{decode_answer, decode_frame, encode_query};
use pfr::{Database, PlanRng, SchemeParams, ThetaIndex};

fn hex_head(bytes: &[u8], n: usize) -> String {
    bytes.iter().take(n).map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> pfr::Result<()> {
    let params = SchemeParams::binary(2)?;
    let db = Database::generate(&params.field(), 2, 8, 4, 3)?;
    let (queries, _) = params.plan(ThetaIndex(1), &mut PlanRng::seeded(0))?;

    let frame = encode_query(&queries[0])?;
    println!("query frame, {} bytes: {} ...", frame.len(), hex_head(&frame, 32));
    let reply = handle_frame(&db, &frame);
    let (kind, payload) = decode_frame(&reply)?;
    println!("reply {kind:?}, {} payload bytes", payload.len());
    let answer = decode_answer(&reply, 0, 2)?;
    println!("{} records of {} symbols", answer.values.len(), answer.values[0].len());

    let err = handle_frame(&db, &frame[..frame.len() - 1]);
    println!("truncated query -> {:?}", decode_frame(&err)?.0);
    Ok(())
}
