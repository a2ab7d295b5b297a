use serde::{Deserialize, Serialize};

use crate::event::{InputEvent, TriggerKind};
use crate::geom::Point;

use super::{KeyOutput, KeyboardLayout, TypingError};

/// One trigger press; `key_id` is `None` when the gaze was over no key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keystroke {
    pub t_ms: u64,
    pub key_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypingSession {
    layout: KeyboardLayout,
    target_phrase: String,
    keystrokes: Vec<Keystroke>,
    transcribed: String,
    gaze: Option<Point>,
    last_ms: Option<u64>,
}

fn apply(transcribed: &mut String, output: KeyOutput) {
    match output.as_char() {
        Some(c) => transcribed.push(c),
        None => {
            transcribed.pop();
        }
    }
}

/// Rebuilds the transcription by folding `keystrokes` over `layout`.
pub fn replay_transcription(layout: &KeyboardLayout, keystrokes: &[Keystroke]) -> String {
    let mut text = String::new();
    for k in keystrokes {
        if let Some(key) = k.key_id.as_deref().and_then(|id| layout.key(id)) {
            apply(&mut text, key.output);
        }
    }
    text
}

impl TypingSession {
    pub fn new(layout: KeyboardLayout, target_phrase: impl Into<String>) -> Self {
        Self {
            layout,
            target_phrase: target_phrase.into(),
            keystrokes: Vec::new(),
            transcribed: String::new(),
            gaze: None,
            last_ms: None,
        }
    }

    pub fn layout(&self) -> &KeyboardLayout {
        &self.layout
    }

    pub fn target_phrase(&self) -> &str {
        &self.target_phrase
    }

    pub fn keystrokes(&self) -> &[Keystroke] {
        &self.keystrokes
    }

    pub fn transcribed(&self) -> &str {
        &self.transcribed
    }

    pub fn start_ms(&self) -> Option<u64> {
        self.keystrokes.first().map(|k| k.t_ms)
    }

    pub fn end_ms(&self) -> Option<u64> {
        self.keystrokes.last().map(|k| k.t_ms)
    }

    /// Feeds one event. A press types the key under the latest valid gaze
    /// point (or logs a miss) and returns the keystroke; gaze samples and
    /// releases return `None`.
    pub fn step(&mut self, event: InputEvent) -> Result<Option<Keystroke>, TypingError> {
        let t = event.t_ms();
        if let Some(last) = self.last_ms {
            if t < last {
                return Err(TypingError::OutOfOrder { last_ms: last, t_ms: t });
            }
        }
        let stroke = match event {
            InputEvent::Gaze(s) => {
                if s.valid {
                    self.gaze = Some(s.point());
                }
                None
            }
            InputEvent::Trigger(e) if e.kind == TriggerKind::Release => None,
            InputEvent::Trigger(e) => {
                let gaze = self.gaze.ok_or(TypingError::NoGazeFix)?;
                let key = self.layout.key_at(gaze);
                if let Some(key) = key {
                    apply(&mut self.transcribed, key.output);
                }
                let stroke = Keystroke {
                    t_ms: e.t_ms,
                    key_id: key.map(|k| k.key_id.clone()),
                };
                self.keystrokes.push(stroke.clone());
                Some(stroke)
            }
        };
        self.last_ms = Some(t);
        Ok(stroke)
    }
}
