//! Bit-exact framing for queries, answers and errors.
//!
//! ```text
//! frame   := u32 payload_len | u8 type | payload
//! QUERY   := u8 version=1 | u8 p | u8 m | u16 K | u32 L | u32 S | u32 count
//!            { u16 terms { u32 layer (1-based) | K x u16 element } }
//! ANSWER  := u32 count { S x u16 element }
//! ERROR   := u16 code | u16 len | utf-8 message
//! ```
//!
//! Integers are little-endian. A query with `S = 0` leaves the record
//! length to the server.

use std::io::{ErrorKind, Read, Write};

use crate::error::{CodecError, Error};
use crate::field::{is_prime, FieldElement, MAX_ORDER};
use crate::projspace::CoeffVector;
use crate::query::{Answer, Query, QueryHeader, Request, Term};

pub const WIRE_VERSION: u8 = 1;
/// Largest payload accepted from the network.
pub const MAX_FRAME_LEN: u64 = 1 << 31;
const FRAME_HEADER_LEN: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageType {
    Query = 0x01,
    Answer = 0x02,
    Error = 0x03,
}

impl TryFrom<u8> for MessageType {
    type Error = CodecError;

    fn try_from(b: u8) -> Result<Self, CodecError> {
        match b {
            0x01 => Ok(MessageType::Query),
            0x02 => Ok(MessageType::Answer),
            0x03 => Ok(MessageType::Error),
            other => Err(CodecError::BadMessageType(other)),
        }
    }
}

/// Error codes carried in ERROR frames.
pub mod code {
    pub const MALFORMED: u16 = 1;
    pub const LAYER_OUT_OF_RANGE: u16 = 2;
    pub const SHAPE_MISMATCH: u16 = 3;
    pub const FIELD_MISMATCH: u16 = 4;
    pub const UNEXPECTED_MESSAGE: u16 = 5;
    pub const INTERNAL: u16 = 255;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireError {
    pub code: u16,
    pub message: String,
}

pub fn encode_frame(kind: MessageType, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.push(kind as u8);
    out.extend_from_slice(payload);
    out
}

/// Splits one complete frame; trailing bytes are an error.
pub fn decode_frame(bytes: &[u8]) -> Result<(MessageType, &[u8]), CodecError> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(CodecError::Truncated);
    }
    let len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    let kind = MessageType::try_from(bytes[4])?;
    let payload = &bytes[FRAME_HEADER_LEN..];
    if payload.len() < len {
        return Err(CodecError::Truncated);
    }
    if payload.len() > len {
        return Err(CodecError::TrailingBytes);
    }
    Ok((kind, payload))
}

/// Reads one frame from a stream and returns it whole (header included).
pub fn read_frame(r: &mut impl Read) -> Result<Vec<u8>, Error> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Transport("connection closed".into()),
        _ => Error::Io(e),
    })?;
    let len = u32::from_le_bytes(header[..4].try_into().unwrap()) as u64;
    if len > MAX_FRAME_LEN {
        return Err(CodecError::FrameTooLarge(len).into());
    }
    MessageType::try_from(header[4])?;
    let mut frame = header.to_vec();
    let read = r.take(len).read_to_end(&mut frame)?;
    if (read as u64) < len {
        return Err(Error::Transport("connection closed mid-frame".into()));
    }
    Ok(frame)
}

pub fn write_frame(w: &mut impl Write, frame: &[u8]) -> std::io::Result<()> {
    w.write_all(frame)?;
    w.flush()
}

struct Cursor<'a> {
    buf: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.buf.len() < n {
            return Err(CodecError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn element(&mut self, order: u32) -> Result<FieldElement, CodecError> {
        let v = self.u16()?;
        if (v as u32) < order {
            Ok(FieldElement(v))
        } else {
            Err(CodecError::ElementOutOfField { value: v, order })
        }
    }

    fn finish(&self) -> Result<(), CodecError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(CodecError::TrailingBytes)
        }
    }
}

fn field_order(p: u8, m: u8) -> Result<u32, CodecError> {
    if !is_prime(p as u32) || m == 0 {
        return Err(CodecError::BadHeader(format!("no field GF({p}^{m})")));
    }
    (p as u64)
        .checked_pow(m as u32)
        .filter(|&q| q <= MAX_ORDER as u64)
        .map(|q| q as u32)
        .ok_or_else(|| CodecError::BadHeader(format!("GF({p}^{m}) exceeds the size cap")))
}

fn fits<T: TryFrom<usize>>(v: usize, what: &str) -> Result<T, Error> {
    T::try_from(v).map_err(|_| Error::InvalidParameter(format!("{what} = {v} does not fit the wire format")))
}

pub fn encode_query(query: &Query) -> Result<Vec<u8>, Error> {
    let h = &query.header;
    let mut out = Vec::new();
    out.push(WIRE_VERSION);
    out.push(fits::<u8>(h.p as usize, "p")?);
    out.push(fits::<u8>(h.m as usize, "m")?);
    out.extend_from_slice(&fits::<u16>(h.files, "K")?.to_le_bytes());
    out.extend_from_slice(&fits::<u32>(h.layers, "L")?.to_le_bytes());
    out.extend_from_slice(&fits::<u32>(h.record_len, "S")?.to_le_bytes());
    out.extend_from_slice(&fits::<u32>(query.requests.len(), "request count")?.to_le_bytes());
    for req in &query.requests {
        out.extend_from_slice(&fits::<u16>(req.terms.len(), "term count")?.to_le_bytes());
        for term in &req.terms {
            out.extend_from_slice(&fits::<u32>(term.layer + 1, "layer")?.to_le_bytes());
            if term.coeffs.len() != h.files {
                return Err(Error::LengthMismatch { expected: h.files, found: term.coeffs.len() });
            }
            for e in term.coeffs.entries() {
                out.extend_from_slice(&e.0.to_le_bytes());
            }
        }
    }
    if out.len() as u64 > MAX_FRAME_LEN {
        return Err(CodecError::FrameTooLarge(out.len() as u64).into());
    }
    Ok(encode_frame(MessageType::Query, &out))
}

pub fn decode_query(frame: &[u8]) -> Result<Query, CodecError> {
    match decode_frame(frame)? {
        (MessageType::Query, payload) => decode_query_payload(payload),
        (other, _) => Err(CodecError::BadMessageType(other as u8)),
    }
}

pub fn decode_query_payload(payload: &[u8]) -> Result<Query, CodecError> {
    let mut c = Cursor { buf: payload };
    let version = c.u8()?;
    if version != WIRE_VERSION {
        return Err(CodecError::BadVersion(version));
    }
    let (p, m) = (c.u8()?, c.u8()?);
    let order = field_order(p, m)?;
    let files = c.u16()? as usize;
    let layers = c.u32()? as usize;
    let record_len = c.u32()? as usize;
    if files == 0 {
        return Err(CodecError::BadHeader("K = 0".into()));
    }
    let count = c.u32()? as usize;
    // each request takes at least two bytes
    let mut requests = Vec::with_capacity(count.min(c.buf.len() / 2));
    for _ in 0..count {
        let terms = c.u16()? as usize;
        let mut req = Request { terms: Vec::with_capacity(terms.min(c.buf.len() / 4)) };
        for _ in 0..terms {
            let layer = c.u32()?;
            if layer == 0 {
                return Err(CodecError::BadHeader("layer index 0 (layers are 1-based)".into()));
            }
            let coeffs = (0..files).map(|_| c.element(order)).collect::<Result<Vec<_>, _>>()?;
            req.terms.push(Term { layer: layer as usize - 1, coeffs: CoeffVector(coeffs) });
        }
        requests.push(req);
    }
    c.finish()?;
    let header = QueryHeader { p: p as u32, m: m as u32, files, layers, record_len };
    Ok(Query { header, requests })
}

pub fn encode_answer(answer: &Answer) -> Result<Vec<u8>, Error> {
    let mut out = Vec::with_capacity(4 + 2 * answer.element_count());
    out.extend_from_slice(&fits::<u32>(answer.values.len(), "request count")?.to_le_bytes());
    for rec in &answer.values {
        for e in rec {
            out.extend_from_slice(&e.0.to_le_bytes());
        }
    }
    if out.len() as u64 > MAX_FRAME_LEN {
        return Err(CodecError::FrameTooLarge(out.len() as u64).into());
    }
    Ok(encode_frame(MessageType::Answer, &out))
}

/// Decodes an ANSWER frame. `record_len == 0` infers S from the payload size.
pub fn decode_answer(frame: &[u8], record_len: usize, order: u32) -> Result<Answer, CodecError> {
    match decode_frame(frame)? {
        (MessageType::Answer, payload) => decode_answer_payload(payload, record_len, order),
        (other, _) => Err(CodecError::BadMessageType(other as u8)),
    }
}

pub fn decode_answer_payload(payload: &[u8], record_len: usize, order: u32) -> Result<Answer, CodecError> {
    let mut c = Cursor { buf: payload };
    let count = c.u32()? as usize;
    let body = c.buf.len();
    let record_len = match (record_len, count) {
        (0, 0) => 0,
        (0, n) => {
            if !body.is_multiple_of(2 * n) || body == 0 {
                return Err(CodecError::BadHeader(format!("{body} payload bytes do not split into {n} records")));
            }
            body / (2 * n)
        }
        (s, n) => {
            let need = (n as u64) * (s as u64) * 2;
            if (body as u64) < need {
                return Err(CodecError::Truncated);
            }
            s
        }
    };
    let values = (0..count)
        .map(|_| (0..record_len).map(|_| c.element(order)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    c.finish()?;
    Ok(Answer { values })
}

pub fn encode_error(code: u16, message: &str) -> Vec<u8> {
    let mut msg = message.as_bytes();
    if msg.len() > u16::MAX as usize {
        let mut cut = u16::MAX as usize;
        while !message.is_char_boundary(cut) {
            cut -= 1;
        }
        msg = &msg[..cut];
    }
    let mut out = Vec::with_capacity(4 + msg.len());
    out.extend_from_slice(&code.to_le_bytes());
    out.extend_from_slice(&(msg.len() as u16).to_le_bytes());
    out.extend_from_slice(msg);
    encode_frame(MessageType::Error, &out)
}

pub fn decode_error_payload(payload: &[u8]) -> Result<WireError, CodecError> {
    let mut c = Cursor { buf: payload };
    let code = c.u16()?;
    let len = c.u16()? as usize;
    let message = std::str::from_utf8(c.take(len)?).map_err(|_| CodecError::BadUtf8)?.to_owned();
    c.finish()?;
    Ok(WireError { code, message })
}
