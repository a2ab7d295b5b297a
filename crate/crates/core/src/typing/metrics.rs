use serde::{Deserialize, Serialize};

use super::{KeyOutput, TypingError, TypingSession};

/// Denominator used for the rate of backspace activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbaBasis {
    #[default]
    Keystrokes,
    Characters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypingMetrics {
    pub wpm: f64,
    pub kspc: f64,
    pub rba: f64,
    pub keystrokes: usize,
    pub backspaces: usize,
    pub characters: usize,
    pub duration_ms: u64,
}

/// Mean results of a human study of foot-triggered gaze typing, kept for
/// comparison in reports. Not reproducible by simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBaseline {
    pub group: &'static str,
    pub wpm: f64,
    pub kspc: f64,
    pub rba: f64,
}

pub const MOTOR_IMPAIRED_BASELINE: ReferenceBaseline = ReferenceBaseline {
    group: "motor-impaired",
    wpm: 7.39,
    kspc: 1.06,
    rba: 0.06,
};

pub const ABLE_BODIED_BASELINE: ReferenceBaseline = ReferenceBaseline {
    group: "able-bodied",
    wpm: 10.48,
    kspc: 1.09,
    rba: 0.09,
};

pub fn compute_metrics(session: &TypingSession) -> Result<TypingMetrics, TypingError> {
    compute_metrics_with(session, RbaBasis::Keystrokes)
}

/// WPM is `(|T| - 1) / seconds * 60 / 5` over the first-to-last keystroke
/// span (0 when the span is empty), KSPC is keystrokes per transcribed
/// character and RBA is backspaces over `basis`.
pub fn compute_metrics_with(session: &TypingSession, basis: RbaBasis) -> Result<TypingMetrics, TypingError> {
    let strokes = session.keystrokes();
    let (Some(start), Some(end)) = (session.start_ms(), session.end_ms()) else {
        return Err(TypingError::EmptySession);
    };
    let characters = session.transcribed().chars().count();
    if characters == 0 {
        return Err(TypingError::NothingTranscribed);
    }
    let backspaces = strokes
        .iter()
        .filter(|k| {
            k.key_id
                .as_deref()
                .and_then(|id| session.layout().key(id))
                .is_some_and(|key| key.output == KeyOutput::Backspace)
        })
        .count();
    let duration_ms = end - start;
    let wpm = if duration_ms == 0 {
        0.0
    } else {
        let seconds = duration_ms as f64 / 1000.0;
        (characters - 1) as f64 / seconds * 60.0 / 5.0
    };
    let rba_denominator = match basis {
        RbaBasis::Keystrokes => strokes.len(),
        RbaBasis::Characters => characters,
    };
    Ok(TypingMetrics {
        wpm,
        kspc: strokes.len() as f64 / characters as f64,
        rba: backspaces as f64 / rba_denominator as f64,
        keystrokes: strokes.len(),
        backspaces,
        characters,
        duration_ms,
    })
}
