//! Replay files: recorded or synthetic gaze and trigger streams.
//!
//! ```text
//! gaze 1 <screen_w> <screen_h> <rate_hz>
//! s <t_ms> <x> <y> <0|1>
//! t <t_ms> <P|R>
//! ```
//!
//! Records are interleaved in time order. Gaze timestamps strictly
//! increase; trigger records alternate P/R starting with P.

use std::fmt::Write as _;

use thiserror::Error;

use crate::event::{InputEvent, TriggerEvent, TriggerKind};
use crate::gaze::GazeSample;
use crate::geom::Screen;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("replay line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub type ReplayRecord = InputEvent;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayFile {
    pub screen: Screen,
    pub rate_hz: u32,
    pub records: Vec<ReplayRecord>,
}

impl ReplayFile {
    pub fn new(screen: Screen, rate_hz: u32, records: Vec<ReplayRecord>) -> Self {
        Self {
            screen,
            rate_hz,
            records,
        }
    }

    pub fn samples(&self) -> Vec<GazeSample> {
        self.records
            .iter()
            .filter_map(|r| match r {
                InputEvent::Gaze(s) => Some(*s),
                InputEvent::Trigger(_) => None,
            })
            .collect()
    }
}

pub fn write_replay(file: &ReplayFile) -> String {
    let mut out = String::new();
    writeln!(out, "gaze 1 {} {} {}", file.screen.width, file.screen.height, file.rate_hz).unwrap();
    for r in &file.records {
        match r {
            InputEvent::Gaze(s) => writeln!(out, "s {} {} {} {}", s.t_ms, s.x, s.y, u8::from(s.valid)).unwrap(),
            InputEvent::Trigger(e) => {
                let kind = match e.kind {
                    TriggerKind::Press => "P",
                    TriggerKind::Release => "R",
                };
                writeln!(out, "t {} {}", e.t_ms, kind).unwrap();
            }
        }
    }
    out
}

struct Checker {
    last_t: Option<u64>,
    last_sample_t: Option<u64>,
    pressed: bool,
}

impl Checker {
    fn check(&mut self, r: &InputEvent) -> Result<(), String> {
        let t = r.t_ms();
        if self.last_t.is_some_and(|last| t < last) {
            return Err(format!("timestamp {t} goes backwards"));
        }
        match r {
            InputEvent::Gaze(_) => {
                if self.last_sample_t.is_some_and(|last| t <= last) {
                    return Err(format!("gaze timestamp {t} does not increase"));
                }
                self.last_sample_t = Some(t);
            }
            InputEvent::Trigger(e) => {
                let press = e.kind == TriggerKind::Press;
                if press == self.pressed {
                    return Err("trigger markers must alternate P/R starting with P".into());
                }
                self.pressed = press;
            }
        }
        self.last_t = Some(t);
        Ok(())
    }
}

pub fn parse_replay(text: &str) -> Result<ReplayFile, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let err = |line: usize, message: String| ParseError { line, message };
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let ["gaze", version, w, h, rate] = header.split_whitespace().collect::<Vec<_>>()[..] else {
        return Err(err(1, "header must be `gaze 1 <screen_w> <screen_h> <rate_hz>`".into()));
    };
    if version != "1" {
        return Err(err(1, format!("unsupported version {version:?}")));
    }
    let uint = |line: usize, s: &str| s.parse::<u32>().map_err(|_| err(line, format!("bad integer {s:?}")));
    let screen = Screen::new(uint(1, w)?, uint(1, h)?);
    let rate_hz = uint(1, rate)?;

    let mut checker = Checker {
        last_t: None,
        last_sample_t: None,
        pressed: false,
    };
    let mut records = Vec::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let time = |s: &str| s.parse::<u64>().map_err(|_| err(line, format!("bad timestamp {s:?}")));
        let real = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("bad coordinate {s:?}")))
        };
        let record = match fields[..] {
            ["s", t, x, y, valid] => {
                let valid = match valid {
                    "0" => false,
                    "1" => true,
                    other => return Err(err(line, format!("validity must be 0 or 1, got {other:?}"))),
                };
                InputEvent::Gaze(GazeSample {
                    t_ms: time(t)?,
                    x: real(x)?,
                    y: real(y)?,
                    valid,
                })
            }
            ["t", t, "P"] => InputEvent::Trigger(TriggerEvent::press(time(t)?)),
            ["t", t, "R"] => InputEvent::Trigger(TriggerEvent::release(time(t)?)),
            _ => return Err(err(line, format!("unrecognized record {text:?}"))),
        };
        checker.check(&record).map_err(|m| err(line, m))?;
        records.push(record);
    }
    Ok(ReplayFile {
        screen,
        rate_hz,
        records,
    })
}

/// Write-then-read; the result equals the input for any valid record list.
pub fn replay_roundtrip(file: &ReplayFile) -> Result<ReplayFile, ParseError> {
    parse_replay(&write_replay(file))
}
