//! Gaze pointing with an explicit trigger: the Midas-touch arbiter.
//!
//! Gaze only moves the point of regard; the trigger commits. A press held
//! for `hold_threshold_ms` becomes a hold (HoldStart at the threshold
//! instant, HoldEnd on release). Shorter presses are candidate clicks. A
//! candidate click is reported as `Click` once `double_click_window_ms` has
//! passed after its release without a further press; a second candidate
//! click whose press lands inside that window turns the pair into one
//! `DoubleClick`.
//!
//! Click and DoubleClick carry the gaze point current at the (first) press,
//! HoldStart the gaze at its press and HoldEnd the gaze at release.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{InputEvent, TriggerEvent, TriggerKind};
use crate::geom::{Point, Rect};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArbiterError {
    #[error("trigger pressed before any valid gaze sample")]
    NoGazeFix,
    #[error("protocol violation: {0}")]
    ProtocolViolation(&'static str),
    #[error("event at {t_ms} ms arrived after {last_ms} ms")]
    OutOfOrder { last_ms: u64, t_ms: u64 },
    #[error("arbiter timings must be positive")]
    InvalidConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArbiterConfig {
    pub double_click_window_ms: u64,
    pub hold_threshold_ms: u64,
}

impl ArbiterConfig {
    pub fn new(double_click_window_ms: u64, hold_threshold_ms: u64) -> Result<Self, ArbiterError> {
        if double_click_window_ms == 0 || hold_threshold_ms == 0 {
            return Err(ArbiterError::InvalidConfig);
        }
        Ok(Self {
            double_click_window_ms,
            hold_threshold_ms,
        })
    }
}

impl Default for ArbiterConfig {
    fn default() -> Self {
        Self {
            double_click_window_ms: 400,
            hold_threshold_ms: 300,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Click,
    DoubleClick,
    HoldStart,
    HoldEnd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerAction {
    pub kind: ActionKind,
    pub x: f64,
    pub y: f64,
    pub t_ms: u64,
}

impl PointerAction {
    fn at(kind: ActionKind, p: Point, t_ms: u64) -> Self {
        Self {
            kind,
            x: p.x,
            y: p.y,
            t_ms,
        }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CandidateClick {
    press_gaze: Point,
    release_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    Pressed {
        press_ms: u64,
        press_gaze: Point,
        earlier: Option<CandidateClick>,
    },
    Holding,
    AwaitingSecond(CandidateClick),
}

/// Event-serial arbiter state. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arbiter {
    config: ArbiterConfig,
    gaze: Option<Point>,
    last_ms: Option<u64>,
    phase: Phase,
}

impl Arbiter {
    pub fn new(config: ArbiterConfig) -> Self {
        Self {
            config,
            gaze: None,
            last_ms: None,
            phase: Phase::Idle,
        }
    }

    pub fn config(&self) -> ArbiterConfig {
        self.config
    }

    /// Latest valid gaze point, if any.
    pub fn gaze(&self) -> Option<Point> {
        self.gaze
    }

    pub fn is_pressed(&self) -> bool {
        matches!(self.phase, Phase::Pressed { .. } | Phase::Holding)
    }

    /// Feeds one event, appending any resulting actions to `out`.
    ///
    /// On error the arbiter is left untouched and nothing is appended.
    pub fn step(&mut self, event: InputEvent, out: &mut Vec<PointerAction>) -> Result<(), ArbiterError> {
        let t = event.t_ms();
        if let Some(last) = self.last_ms {
            if t < last {
                return Err(ArbiterError::OutOfOrder { last_ms: last, t_ms: t });
            }
        }
        let mut next = *self;
        let mark = out.len();
        next.fire_timers(t, false, out);
        let result = match event {
            InputEvent::Gaze(s) => {
                if s.valid {
                    next.gaze = Some(s.point());
                }
                Ok(())
            }
            InputEvent::Trigger(e) => next.on_trigger(e, out),
        };
        match result {
            Ok(()) => {
                next.last_ms = Some(t);
                *self = next;
                Ok(())
            }
            Err(e) => {
                out.truncate(mark);
                Err(e)
            }
        }
    }

    /// Convenience wrapper around [`Arbiter::step`] returning the actions.
    pub fn step_collect(&mut self, event: InputEvent) -> Result<Vec<PointerAction>, ArbiterError> {
        let mut out = Vec::new();
        self.step(event, &mut out)?;
        Ok(out)
    }

    /// Declares that every event with a timestamp up to and including
    /// `t_ms` has been delivered, resolving timers that expire by then.
    pub fn advance_to(&mut self, t_ms: u64, out: &mut Vec<PointerAction>) {
        self.fire_timers(t_ms, true, out);
    }

    /// End of stream: resolves every pending timer. A press that is still
    /// down becomes a hold.
    pub fn finish(&mut self, out: &mut Vec<PointerAction>) {
        self.fire_timers(u64::MAX, true, out);
    }

    fn fire_timers(&mut self, now: u64, quiet_at_now: bool, out: &mut Vec<PointerAction>) {
        match self.phase {
            Phase::Pressed {
                press_ms,
                press_gaze,
                earlier,
            } => {
                let hold_at = press_ms.saturating_add(self.config.hold_threshold_ms);
                if hold_at <= now {
                    if let Some(c) = earlier {
                        out.push(PointerAction::at(ActionKind::Click, c.press_gaze, hold_at));
                    }
                    out.push(PointerAction::at(ActionKind::HoldStart, press_gaze, hold_at));
                    self.phase = Phase::Holding;
                }
            }
            Phase::AwaitingSecond(c) => {
                let expires = c.release_ms.saturating_add(self.config.double_click_window_ms);
                // a press exactly at `expires` still counts as a double click
                if expires < now || (quiet_at_now && expires <= now) {
                    out.push(PointerAction::at(ActionKind::Click, c.press_gaze, expires));
                    self.phase = Phase::Idle;
                }
            }
            Phase::Idle | Phase::Holding => {}
        }
    }

    fn on_trigger(&mut self, e: TriggerEvent, out: &mut Vec<PointerAction>) -> Result<(), ArbiterError> {
        match (e.kind, self.phase) {
            (TriggerKind::Press, Phase::Pressed { .. } | Phase::Holding) => {
                Err(ArbiterError::ProtocolViolation("press while already pressed"))
            }
            (TriggerKind::Press, Phase::Idle | Phase::AwaitingSecond(_)) => {
                let press_gaze = self.gaze.ok_or(ArbiterError::NoGazeFix)?;
                let earlier = match self.phase {
                    Phase::AwaitingSecond(c) => Some(c),
                    _ => None,
                };
                self.phase = Phase::Pressed {
                    press_ms: e.t_ms,
                    press_gaze,
                    earlier,
                };
                Ok(())
            }
            (TriggerKind::Release, Phase::Idle | Phase::AwaitingSecond(_)) => {
                Err(ArbiterError::ProtocolViolation("release without press"))
            }
            (TriggerKind::Release, Phase::Pressed { press_gaze, earlier, .. }) => {
                self.phase = match earlier {
                    Some(c) => {
                        out.push(PointerAction::at(ActionKind::DoubleClick, c.press_gaze, e.t_ms));
                        Phase::Idle
                    }
                    None => Phase::AwaitingSecond(CandidateClick {
                        press_gaze,
                        release_ms: e.t_ms,
                    }),
                };
                Ok(())
            }
            (TriggerKind::Release, Phase::Holding) => {
                // gaze is always known once a press has been accepted
                let p = self.gaze.unwrap_or_default();
                out.push(PointerAction::at(ActionKind::HoldEnd, p, e.t_ms));
                self.phase = Phase::Idle;
                Ok(())
            }
        }
    }
}

/// A named hit-test rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub rect: Rect,
}

/// Topmost (last-listed) target containing `p`, boundary-inclusive.
pub fn resolve_target(p: Point, targets: &[Target]) -> Option<&str> {
    targets
        .iter()
        .rev()
        .find(|t| t.rect.contains(p))
        .map(|t| t.id.as_str())
}
