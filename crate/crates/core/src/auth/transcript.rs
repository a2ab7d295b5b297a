//! Session transcript text format.
//!
//! ```text
//! auth 1 <seed> <K> <shape_count>
//! epoch <i> winner <id> distances <id:val ...>
//! outcome <Accept|Reject|Abort> <wall_ms>
//! ```
//!
//! Distances are printed with six decimals.

use std::fmt::Write as _;

use thiserror::Error;

use super::{AuthOutcome, AuthSession};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("transcript line {line}: {message}")]
pub struct TranscriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEpoch {
    pub index: usize,
    pub winner: String,
    pub distances: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub seed: u64,
    pub password_length: usize,
    pub shape_count: usize,
    pub epochs: Vec<TranscriptEpoch>,
    pub outcome: AuthOutcome,
    pub wall_ms: u64,
}

pub fn write_transcript(session: &AuthSession) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "auth 1 {} {} {}",
        session.seed, session.config.password_length, session.config.shape_count
    )
    .unwrap();
    for e in &session.epochs {
        write!(out, "epoch {} winner {} distances", e.index, e.matched.winner).unwrap();
        for d in &e.matched.distances {
            write!(out, " {}:{:.6}", d.shape_id, d.distance).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "outcome {} {}", session.outcome.as_str(), session.wall_ms).unwrap();
    out
}

pub fn parse_transcript(text: &str) -> Result<Transcript, TranscriptParseError> {
    let err = |line: usize, message: String| TranscriptParseError { line, message };
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.split_whitespace().collect()))
        .collect();
    let Some(((_, header), rest)) = lines.split_first() else {
        return Err(err(1, "empty transcript".into()));
    };
    let num = |line: usize, s: &str| s.parse::<u64>().map_err(|_| err(line, format!("bad number {s:?}")));
    let (seed, password_length, shape_count) = match header[..] {
        ["auth", "1", seed, k, count] => (num(1, seed)?, num(1, k)? as usize, num(1, count)? as usize),
        _ => return Err(err(1, "header must be `auth 1 <seed> <K> <shape_count>`".into())),
    };
    let mut epochs = Vec::new();
    let mut outcome = None;
    for (line, fields) in rest {
        let line = *line;
        if outcome.is_some() {
            return Err(err(line, "content after outcome line".into()));
        }
        match fields[..] {
            ["epoch", index, "winner", winner, "distances", ref dists @ ..] => {
                let distances = dists
                    .iter()
                    .map(|d| {
                        let (id, v) = d.split_once(':').ok_or_else(|| err(line, format!("bad distance {d:?}")))?;
                        let v = v.parse::<f64>().map_err(|_| err(line, format!("bad distance {d:?}")))?;
                        Ok((id.to_string(), v))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                epochs.push(TranscriptEpoch {
                    index: num(line, index)? as usize,
                    winner: winner.to_string(),
                    distances,
                });
            }
            ["outcome", kind, wall] => {
                let kind = match kind {
                    "Accept" => AuthOutcome::Accept,
                    "Reject" => AuthOutcome::Reject,
                    "Abort" => AuthOutcome::Abort,
                    other => return Err(err(line, format!("unknown outcome {other:?}"))),
                };
                outcome = Some((kind, num(line, wall)?));
            }
            _ => return Err(err(line, "expected an epoch or outcome line".into())),
        }
    }
    let (outcome, wall_ms) = outcome.ok_or_else(|| err(lines.last().map_or(1, |l| l.0), "missing outcome line".into()))?;
    Ok(Transcript {
        seed,
        password_length,
        shape_count,
        epochs,
        outcome,
        wall_ms,
    })
}
