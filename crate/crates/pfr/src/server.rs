//! Answer computation. A server is a pure function of its database and
//! the query it receives; it keeps no per-client state.

use crate::database::Database;
use crate::error::{CodecError, Error, Result};
use crate::field::FieldElement;
use crate::query::{Answer, Query};
use crate::wire::{self, code, MessageType};

/// Computes `sum_j coeffs_j^T W[layer_j]` for every request, in query order.
pub fn answer_query(db: &Database, query: &Query) -> Result<Answer> {
    let f = db.field();
    let h = &query.header;
    if (h.p, h.m) != (f.p(), f.m()) {
        return Err(Error::FieldMismatch { query_p: h.p, query_m: h.m, db_p: f.p(), db_m: f.m() });
    }
    if h.files != db.files() {
        return Err(Error::ShapeMismatch(format!("query has K = {}, database has K = {}", h.files, db.files())));
    }
    if h.layers != db.layers() {
        return Err(Error::ShapeMismatch(format!("query has L = {}, database has L = {}", h.layers, db.layers())));
    }
    if h.record_len != 0 && h.record_len != db.record_len() {
        return Err(Error::ShapeMismatch(format!(
            "query has S = {}, database has S = {}",
            h.record_len,
            db.record_len()
        )));
    }

    let mut values = Vec::with_capacity(query.requests.len());
    for req in &query.requests {
        let mut acc = vec![FieldElement::ZERO; db.record_len()];
        for term in &req.terms {
            if term.layer >= db.layers() {
                return Err(Error::LayerOutOfRange { layer: term.layer as u64 + 1, layers: db.layers() as u64 });
            }
            if term.coeffs.len() != db.files() {
                return Err(Error::LengthMismatch { expected: db.files(), found: term.coeffs.len() });
            }
            for (k, &c) in term.coeffs.entries().iter().enumerate() {
                if !f.contains(c) {
                    return Err(Error::ElementOutOfField { value: c.0 as u32, order: f.order() });
                }
                f.axpy(&mut acc, c, db.segment(k, term.layer));
            }
        }
        values.push(acc);
    }
    Ok(Answer { values })
}

fn error_code(e: &Error) -> u16 {
    match e {
        Error::Codec(_) => code::MALFORMED,
        Error::LayerOutOfRange { .. } => code::LAYER_OUT_OF_RANGE,
        Error::FieldMismatch { .. } | Error::ElementOutOfField { .. } => code::FIELD_MISMATCH,
        Error::ShapeMismatch(_) | Error::LengthMismatch { .. } => code::SHAPE_MISMATCH,
        _ => code::INTERNAL,
    }
}

/// Turns one request frame into one response frame (ANSWER or ERROR).
pub fn handle_frame(db: &Database, frame: &[u8]) -> Vec<u8> {
    let result = wire::decode_frame(frame).map_err(Error::from).and_then(|(kind, payload)| match kind {
        MessageType::Query => {
            let query = wire::decode_query_payload(payload)?;
            let answer = answer_query(db, &query)?;
            wire::encode_answer(&answer)
        }
        other => Err(Error::Codec(CodecError::BadMessageType(other as u8))),
    });
    match result {
        Ok(frame) => frame,
        Err(Error::Codec(CodecError::BadMessageType(t))) => {
            wire::encode_error(code::UNEXPECTED_MESSAGE, &format!("unexpected message type {t:#04x}"))
        }
        Err(e) => wire::encode_error(error_code(&e), &e.to_string()),
    }
}
