//! Decoders must reject garbage with an error, never a panic.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pfr::server::handle_frame;
use pfr::wire::{decode_answer, decode_error_payload, decode_frame, decode_query, encode_query, MessageType};
use pfr::{Database, FieldSpec, PlanRng, SchemeParams, ThetaIndex};

const INPUTS: usize = 10_000;

fn random_bytes(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let len = rng.random_range(0..96);
    let mut buf = vec![0u8; len];
    rng.fill_bytes(&mut buf);
    // half the time, give it a plausible frame header
    if len >= 5 && rng.random_bool(0.5) {
        let body = (len - 5) as u32;
        buf[..4].copy_from_slice(&body.to_le_bytes());
        buf[4] = rng.random_range(1..=3);
        if buf[4] == 1 && len > 5 {
            buf[5] = 1;
        }
    }
    buf
}

#[test]
fn random_inputs_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    let db = Database::generate(&FieldSpec::new(3, 1).unwrap(), 2, 8, 2, 1).unwrap();
    for _ in 0..INPUTS {
        let bytes = random_bytes(&mut rng);
        let _ = decode_frame(&bytes);
        let _ = decode_query(&bytes);
        let _ = decode_answer(&bytes, 0, 3);
        let _ = decode_answer(&bytes, 2, 256);
        let _ = Database::from_bytes(&bytes);
        if let Ok((_, payload)) = decode_frame(&bytes) {
            let _ = decode_error_payload(payload);
        }
        let reply = handle_frame(&db, &bytes);
        let (kind, _) = decode_frame(&reply).expect("server replies are well-formed");
        assert_ne!(kind, MessageType::Query);
    }
}

#[test]
fn mutated_valid_frames_never_panic() {
    let params = SchemeParams::general(3, 2, 3, 1).unwrap();
    let (queries, _) = params.plan(ThetaIndex(2), &mut PlanRng::seeded(5)).unwrap();
    let frame = encode_query(&queries[1]).unwrap();
    let db = Arc::new(Database::generate(&params.field(), 2, 132, 1, 3).unwrap());
    let mut db_bytes = db.to_bytes().unwrap();
    db_bytes.truncate(200);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..INPUTS {
        let mut f = frame.clone();
        for _ in 0..rng.random_range(1..4) {
            let i = rng.random_range(0..f.len());
            f[i] = rng.random();
        }
        if rng.random_bool(0.2) {
            f.truncate(rng.random_range(0..f.len()));
        }
        let _ = decode_query(&f);
        let reply = handle_frame(&db, &f);
        assert!(decode_frame(&reply).is_ok());

        let mut d = db_bytes.clone();
        let i = rng.random_range(0..d.len());
        d[i] = rng.random();
        let _ = Database::from_bytes(&d);
    }
}
