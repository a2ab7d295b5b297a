//! Dwell-free gaze typing: the key under the gaze is typed when the
//! trigger is pressed.

mod layout;
mod metrics;
mod session;

pub use layout::{default_layout, parse_layout, write_layout, Key, KeyOutput, KeyboardLayout, LayoutError};
pub use metrics::{compute_metrics, compute_metrics_with, RbaBasis, ReferenceBaseline, TypingMetrics, ABLE_BODIED_BASELINE, MOTOR_IMPAIRED_BASELINE};
pub use session::{replay_transcription, Keystroke, TypingSession};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypingError {
    #[error("trigger pressed before any valid gaze sample")]
    NoGazeFix,
    #[error("session has no keystrokes")]
    EmptySession,
    #[error("nothing was transcribed; keystrokes per character is undefined")]
    NothingTranscribed,
    #[error("event at {t_ms} ms arrived after {last_ms} ms")]
    OutOfOrder { last_ms: u64, t_ms: u64 },
}

/// The bundled phrase set, one phrase per line.
pub const BUNDLED_PHRASES: &str = include_str!("../../assets/phrases.txt");

pub fn parse_phrases(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn bundled_phrases() -> Vec<String> {
    parse_phrases(BUNDLED_PHRASES)
}
