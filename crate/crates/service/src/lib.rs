//! Session service for the gazekit engine: message schema, framing,
//! per-connection session handling and the socket server.

pub mod cli;
pub mod client;
pub mod drive;
pub mod frame;
pub mod protocol;
pub mod server;
pub mod service;

pub use protocol::{ClientMessage, ErrorCode, Mode, ServerMessage, SessionOptions, SessionSummary};
pub use server::Server;
pub use service::{Service, Shared, TemplateLibrary};
