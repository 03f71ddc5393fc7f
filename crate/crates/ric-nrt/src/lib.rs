//! Near-real-time RIC: terminates E2-lite sessions from many base
//! stations, keeps a node registry, routes indications to subscribed xApps
//! through bounded queues, and forwards xApp control with ack correlation
//! deadlines. Ships an in-process simulated-time harness and a TCP
//! front-end over the same core.

pub mod events;
pub mod harness;
pub mod registry;
pub mod ric;
pub mod server;
pub mod xapp;

pub use events::EventLog;
pub use harness::{ClosedLoop, NodeSim};
pub use registry::{ConnId, NodeRegistry, RouteTable, XappId};
pub use ric::{Arbitration, Ric, RicConfig};
pub use server::RicServer;
pub use xapp::{ControlOutcome, Mailbox, XappEvent};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RicError {
    #[error("no such node: bs {bs_id}")]
    NoSuchNode { bs_id: u32 },
    #[error("no such xapp")]
    NoSuchXapp,
    #[error("cell is controlled by xapp {holder}")]
    ControlConflict { holder: u64 },
    #[error("session error: {0}")]
    Session(#[from] e2_lite::E2Error),
    #[error("harness error: {0}")]
    Harness(String),
}
