//! Frame codec.
//!
//! Wire format, byte-exact: a 4-byte big-endian unsigned body length
//! followed by the body, which is the message serialized as a single-line
//! compact JSON object tagged by a `"type"` field, fields in declaration
//! order. Struct serialization is deterministic, so encoding the same
//! message twice yields identical bytes. Frames larger than 16 MiB are
//! rejected on both sides.

use crate::msg::E2Message;
use crate::E2Error;

/// Maximum body size: 16 MiB.
pub const MAX_FRAME: usize = 16 * 1024 * 1024;

/// Length-prefix size in bytes.
pub const HEADER_LEN: usize = 4;

/// Classified decode failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    /// The buffer does not yet hold a complete frame.
    #[error("need more bytes")]
    NeedMoreBytes,
    /// The frame is structurally broken; `offset` is the byte position in
    /// the input where the problem was detected.
    #[error("protocol error at byte {offset}: {reason}")]
    Protocol { offset: usize, reason: String },
    /// A well-formed frame carrying a message tag this peer does not know.
    #[error("unknown message tag '{tag}'")]
    UnknownMessage { tag: String },
}

/// Encodes a message into one frame: length prefix plus canonical body.
pub fn encode(msg: &E2Message) -> Result<Vec<u8>, E2Error> {
    let body = serde_json::to_vec(msg).map_err(|e| E2Error::Encode(e.to_string()))?;
    if body.len() > MAX_FRAME {
        return Err(E2Error::Encode(format!(
            "body of {} bytes exceeds the {} byte frame limit",
            body.len(),
            MAX_FRAME
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + body.len());
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

/// Decodes one frame from the front of `buf`. On success returns the message
/// and the number of bytes consumed, leaving any residual bytes for the
/// caller (stream reassembly and trailing data are both handled this way).
pub fn decode(buf: &[u8]) -> Result<(E2Message, usize), DecodeError> {
    if buf.len() < HEADER_LEN {
        return Err(DecodeError::NeedMoreBytes);
    }
    let len = u32::from_be_bytes([buf[0], buf[1], buf[2], buf[3]]) as usize;
    if len > MAX_FRAME {
        return Err(DecodeError::Protocol {
            offset: 0,
            reason: format!("length {len} exceeds the {MAX_FRAME} byte frame limit"),
        });
    }
    if buf.len() < HEADER_LEN + len {
        return Err(DecodeError::NeedMoreBytes);
    }
    let body = &buf[HEADER_LEN..HEADER_LEN + len];
    match serde_json::from_slice::<E2Message>(body) {
        Ok(msg) => Ok((msg, HEADER_LEN + len)),
        Err(err) => Err(classify_body_error(body, &err)),
    }
}

/// Distinguishes an unknown-but-well-formed message from a malformed body.
fn classify_body_error(body: &[u8], err: &serde_json::Error) -> DecodeError {
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(body) {
        if let Some(tag) = value.get("type").and_then(|t| t.as_str()) {
            if !E2Message::KNOWN_KINDS.contains(&tag) {
                return DecodeError::UnknownMessage {
                    tag: tag.to_string(),
                };
            }
        }
    }
    // Bodies are single-line JSON, so the column is the byte offset + 1.
    DecodeError::Protocol {
        offset: HEADER_LEN + err.column().saturating_sub(1),
        reason: err.to_string(),
    }
}

/// Incremental frame reassembler for a byte stream: feed arbitrary chunks,
/// pull complete messages.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Pops the next complete message, `Ok(None)` if more bytes are needed.
    /// A protocol error poisons the remaining buffer; callers reset the
    /// session in that case.
    pub fn next(&mut self) -> Result<Option<E2Message>, DecodeError> {
        match decode(&self.buf) {
            Ok((msg, used)) => {
                self.buf.drain(..used);
                Ok(Some(msg))
            }
            Err(DecodeError::NeedMoreBytes) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn pending_bytes(&self) -> usize {
        self.buf.len()
    }

    pub fn clear(&mut self) {
        self.buf.clear();
    }
}
