//! Seeded synthetic gaze: shape followers, gesture tracers and typists.
//!
//! Everything here is a pure function of its inputs and seed (see
//! [`crate::rng`] for the generator).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auth::{AuthConfig, ShapeTrajectory};
use crate::event::{InputEvent, TriggerEvent};
use crate::gaze::GazeSample;
use crate::geom::Point;
use crate::gesture::{GesturePath, GestureTemplate, PathSource};
use crate::rng::SeededRng;
use crate::typing::{KeyboardLayout, KeyOutput};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("sample rate {0} Hz outside 30..=300")]
    RateOutOfRange(u32),
    #[error("no trajectory with id {0:?}")]
    UnknownShape(String),
    #[error("layout has no key for {0:?}")]
    UntypableChar(char),
    #[error("layout has no backspace key")]
    NoBackspace,
}

/// Per-axis Gaussian jitter plus a fixed pursuit latency.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_px: f64,
    pub latency_ms: u64,
    pub seed: u64,
}

impl NoiseModel {
    pub const fn new(sigma_px: f64, latency_ms: u64, seed: u64) -> Self {
        Self {
            sigma_px,
            latency_ms,
            seed,
        }
    }

    fn jitter(&self, rng: &mut SeededRng, p: Point) -> Point {
        if self.sigma_px == 0.0 {
            return p;
        }
        let dx = rng.gaussian() * self.sigma_px;
        let dy = rng.gaussian() * self.sigma_px;
        Point::new(p.x + dx, p.y + dy)
    }
}

fn check_rate(rate_hz: u32) -> Result<(), SynthError> {
    if (30..=300).contains(&rate_hz) {
        Ok(())
    } else {
        Err(SynthError::RateOutOfRange(rate_hz))
    }
}

/// Sample instants `round(k * 1000 / rate)` inside `[start_ms, end_ms)`.
fn sample_times(start_ms: u64, end_ms: u64, rate_hz: u32) -> impl Iterator<Item = u64> {
    let period = 1000.0 / f64::from(rate_hz);
    let first = (start_ms as f64 / period).ceil() as u64;
    (first..)
        .map(move |k| (k as f64 * period).round() as u64)
        .skip_while(move |&t| t < start_ms)
        .take_while(move |&t| t < end_ms)
}

/// A gaze stream that pursues `traj` for `duration_ms` from t = 0.
pub fn synth_follow(
    traj: &ShapeTrajectory,
    duration_ms: u64,
    rate_hz: u32,
    noise: &NoiseModel,
) -> Result<Vec<GazeSample>, SynthError> {
    synth_follow_span(traj, 0, duration_ms, rate_hz, noise)
}

/// Like [`synth_follow`] over `[start_ms, end_ms)`.
pub fn synth_follow_span(
    traj: &ShapeTrajectory,
    start_ms: u64,
    end_ms: u64,
    rate_hz: u32,
    noise: &NoiseModel,
) -> Result<Vec<GazeSample>, SynthError> {
    check_rate(rate_hz)?;
    let mut rng = SeededRng::new(noise.seed);
    Ok(sample_times(start_ms, end_ms, rate_hz)
        .map(|t| {
            let ideal = traj.position(t as f64 - noise.latency_ms as f64);
            let p = noise.jitter(&mut rng, ideal);
            GazeSample::new(t, p.x, p.y)
        })
        .collect())
}

/// Follows `password[i]` from the start of epoch `i` until epoch `i + 1`
/// begins, over the whole nominal session.
pub fn synth_password_follower(
    trajectories: &[ShapeTrajectory],
    config: &AuthConfig,
    password: &[String],
    rate_hz: u32,
    noise: &NoiseModel,
) -> Result<Vec<GazeSample>, SynthError> {
    check_rate(rate_hz)?;
    let targets = password
        .iter()
        .map(|id| {
            trajectories
                .iter()
                .find(|t| &t.shape_id == id)
                .ok_or_else(|| SynthError::UnknownShape(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if targets.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = SeededRng::new(noise.seed);
    let slot = config.epoch_ms + config.inter_epoch_ms;
    Ok(sample_times(0, config.nominal_duration_ms(), rate_hz)
        .map(|t| {
            let epoch = ((t / slot) as usize).min(targets.len() - 1);
            let ideal = targets[epoch].position(t as f64 - noise.latency_ms as f64);
            let p = noise.jitter(&mut rng, ideal);
            GazeSample::new(t, p.x, p.y)
        })
        .collect())
}

/// Draws `template` at `scale_px` around `origin`, with per-point jitter.
pub fn synth_gesture(template: &GestureTemplate, scale_px: f64, origin: Point, noise: &NoiseModel) -> GesturePath {
    let mut rng = SeededRng::new(noise.seed);
    let points = template
        .normalized_points
        .iter()
        .map(|p| noise.jitter(&mut rng, Point::new(origin.x + p.x * scale_px, origin.y + p.y * scale_px)))
        .collect();
    GesturePath::new(points, PathSource::RawSamples)
}

/// How a synthetic gaze gesture is traced on screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracerModel {
    pub rate_hz: u32,
    /// Time spent fixating each vertex.
    pub dwell_ms: u64,
    /// Travel time between vertices.
    pub saccade_ms: u64,
    pub noise: NoiseModel,
}

impl Default for TracerModel {
    fn default() -> Self {
        Self {
            rate_hz: 60,
            dwell_ms: 250,
            saccade_ms: 50,
            noise: NoiseModel::new(3.0, 0, 0),
        }
    }
}

/// A trigger-delimited gaze gesture: press, fixate each vertex in turn with
/// short saccades between them, release. `start_ms` is the press time.
pub fn synth_gesture_trace(
    vertices: &[Point],
    start_ms: u64,
    model: &TracerModel,
) -> Result<Vec<InputEvent>, SynthError> {
    check_rate(model.rate_hz)?;
    let mut rng = SeededRng::new(model.noise.seed);
    let mut events = vec![InputEvent::Trigger(TriggerEvent::press(start_ms))];
    let slot = model.dwell_ms + model.saccade_ms;
    let end = start_ms + slot * vertices.len() as u64;
    for t in sample_times(start_ms, end, model.rate_hz) {
        let rel = t - start_ms;
        let i = (rel / slot) as usize;
        let within = rel % slot;
        let ideal = if within < model.dwell_ms || i + 1 == vertices.len() {
            vertices[i]
        } else {
            let f = (within - model.dwell_ms) as f64 / model.saccade_ms as f64;
            let (a, b) = (vertices[i], vertices[i + 1]);
            Point::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f)
        };
        let p = model.noise.jitter(&mut rng, ideal);
        events.push(GazeSample::new(t, p.x, p.y).into());
    }
    let last = events.last().map_or(start_ms, InputEvent::t_ms);
    events.push(TriggerEvent::release(last.max(end)).into());
    Ok(events)
}

/// A closed-loop typist: aims at the next key (or Backspace after a slip),
/// with Gaussian aim error, one keystroke every `interval_ms`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypistModel {
    pub interval_ms: u64,
    pub sigma_px: f64,
    pub seed: u64,
}

impl Default for TypistModel {
    fn default() -> Self {
        Self {
            interval_ms: 1000,
            sigma_px: 0.0,
            seed: 0,
        }
    }
}

/// Gaze and trigger events that type `phrase` on `layout`, starting at
/// `start_ms`. Each keystroke is a gaze sample on the aim point followed by
/// a press 10 ms later and a release 80 ms after that. Gives up after
/// `4 * |phrase| + 20` keystrokes.
pub fn synth_typist(
    layout: &KeyboardLayout,
    phrase: &str,
    start_ms: u64,
    model: &TypistModel,
) -> Result<Vec<InputEvent>, SynthError> {
    let target: Vec<char> = phrase.chars().collect();
    for c in &target {
        layout.key_for_char(*c).ok_or(SynthError::UntypableChar(*c))?;
    }
    let backspace = layout.backspace().ok_or(SynthError::NoBackspace)?;
    let mut rng = SeededRng::new(model.seed);
    let mut typed: Vec<char> = Vec::new();
    let mut events = Vec::new();
    let cap = 4 * target.len() + 20;
    let mut t = start_ms;
    for _ in 0..cap {
        if typed == target {
            break;
        }
        let on_track = typed.len() <= target.len() && target[..typed.len()] == typed[..];
        let key = if on_track {
            layout.key_for_char(target[typed.len()]).expect("checked above")
        } else {
            backspace
        };
        let aim = key.rect.center();
        let p = if model.sigma_px == 0.0 {
            aim
        } else {
            Point::new(aim.x + rng.gaussian() * model.sigma_px, aim.y + rng.gaussian() * model.sigma_px)
        };
        events.push(GazeSample::new(t, p.x, p.y).into());
        events.push(TriggerEvent::press(t + 10).into());
        events.push(TriggerEvent::release(t + 90).into());
        if let Some(hit) = layout.key_at(p) {
            match hit.output {
                KeyOutput::Backspace => {
                    typed.pop();
                }
                other => typed.extend(other.as_char()),
            }
        }
        t += model.interval_ms.max(100);
    }
    Ok(events)
}
