//! Wire protocol between base stations and the near-real-time RIC.
//!
//! Mirrors E2AP setup / subscription / indication / control procedures at
//! reduced fidelity with two service models (KPM reporting, RAN control).
//! Frames are a 4-byte big-endian length plus a canonical compact-JSON body;
//! see [`codec`] for the byte-exact format and [`session`] for the
//! connection state machine. Transport is any reliable ordered byte stream.

pub mod capture;
pub mod codec;
pub mod msg;
pub mod session;

pub use capture::{replay, CaptureWriter};
pub use codec::{decode, encode, DecodeError, FrameDecoder, HEADER_LEN, MAX_FRAME};
pub use msg::{ControlStatus, E2Message, SmId, TriggerKind};
pub use session::{Action, Command, Event, Phase, Role, Session};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum E2Error {
    #[error("encode failed: {0}")]
    Encode(String),
    #[error("decode failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("invalid command: {0}")]
    BadCommand(String),
    #[error("io error: {0}")]
    Io(String),
}
