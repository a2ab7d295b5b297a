//! Input events shared by the arbiter, typing, gesture capture and replay.

use serde::{Deserialize, Serialize};

use crate::gaze::GazeSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerKind {
    Press,
    Release,
}

/// An edge of the binary trigger (foot pad, switch, mouse button).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub t_ms: u64,
    pub kind: TriggerKind,
}

impl TriggerEvent {
    pub const fn press(t_ms: u64) -> Self {
        Self {
            t_ms,
            kind: TriggerKind::Press,
        }
    }

    pub const fn release(t_ms: u64) -> Self {
        Self {
            t_ms,
            kind: TriggerKind::Release,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputEvent {
    Gaze(GazeSample),
    Trigger(TriggerEvent),
}

impl InputEvent {
    pub fn t_ms(&self) -> u64 {
        match self {
            InputEvent::Gaze(s) => s.t_ms,
            InputEvent::Trigger(e) => e.t_ms,
        }
    }
}

impl From<GazeSample> for InputEvent {
    fn from(s: GazeSample) -> Self {
        InputEvent::Gaze(s)
    }
}

impl From<TriggerEvent> for InputEvent {
    fn from(e: TriggerEvent) -> Self {
        InputEvent::Trigger(e)
    }
}
