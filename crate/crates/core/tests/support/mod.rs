//! Reference implementations written straight from the behavioural rules,
//! sharing no code with the library beyond its data types.

#![allow(dead_code)]

use gazekit::arbiter::{ActionKind, Arbiter, ArbiterConfig, PointerAction};
use gazekit::event::{InputEvent, TriggerEvent};
use gazekit::gaze::{Fixation, GazeSample};
use gazekit::geom::Point;
use gazekit::rng::SeededRng;

// ---------------------------------------------------------------- fixations

fn window_dispersion(window: &[GazeSample]) -> f64 {
    let xs = window.iter().map(|s| s.x);
    let ys = window.iter().map(|s| s.y);
    let max_x = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    let min_x = xs.fold(f64::INFINITY, f64::min);
    let max_y = ys.clone().fold(f64::NEG_INFINITY, f64::max);
    let min_y = ys.fold(f64::INFINITY, f64::min);
    (max_x - min_x) + (max_y - min_y)
}

/// Sliding-window fixation finder. For each start it tries every end,
/// recomputing the dispersion of the whole window from scratch, and keeps
/// the longest admissible one.
pub fn fixation_oracle(samples: &[GazeSample], dispersion_px: f64, min_duration_ms: u64) -> Vec<Fixation> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let mut best = None;
        for j in i..samples.len() {
            let window = &samples[i..=j];
            if window.iter().all(|s| s.valid) && window_dispersion(window) <= dispersion_px {
                best = Some(j);
            } else {
                break;
            }
        }
        match best {
            Some(j) if samples[j].t_ms - samples[i].t_ms >= min_duration_ms => {
                let window = &samples[i..=j];
                let mut sx = 0.0;
                let mut sy = 0.0;
                for s in window {
                    sx += s.x;
                    sy += s.y;
                }
                out.push(Fixation {
                    cx: sx / window.len() as f64,
                    cy: sy / window.len() as f64,
                    start_ms: samples[i].t_ms,
                    end_ms: samples[j].t_ms,
                    sample_count: window.len(),
                });
                i = j + 1;
            }
            _ => i += 1,
        }
    }
    out
}

/// A gaze stream of clusters joined by jumps and drifts, with dropouts.
pub fn random_stream(rng: &mut SeededRng, max_len: usize) -> Vec<GazeSample> {
    let len = rng.index(max_len + 1);
    let mut t = rng.index(50) as u64;
    let mut centre = (rng.range(0.0, 1920.0), rng.range(0.0, 1080.0));
    let spread = rng.range(1.0, 40.0);
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        match rng.index(20) {
            0 => centre = (rng.range(0.0, 1920.0), rng.range(0.0, 1080.0)),
            1 | 2 => {
                centre.0 += rng.range(-30.0, 30.0);
                centre.1 += rng.range(-30.0, 30.0);
            }
            _ => {}
        }
        let x = (centre.0 + rng.range(-spread, spread)).round();
        let y = (centre.1 + rng.range(-spread, spread)).round();
        if rng.index(25) == 0 {
            out.push(GazeSample::lost(t));
        } else {
            out.push(GazeSample::new(t, x, y));
        }
        t += 1 + rng.index(25) as u64;
    }
    out
}

// ------------------------------------------------------------------ arbiter

/// One trigger press, with its release if the trace has one.
#[derive(Clone, Copy)]
struct Press {
    at: u64,
    release: Option<u64>,
}

/// Gaze position reported at time `t` in enumerated traces. Distinct per
/// grid instant so that coordinates identify the instant they came from.
pub fn gaze_at(t: u64) -> Point {
    Point::new(t as f64, (t % 7) as f64 * 10.0 + 3.0)
}

fn act(kind: ActionKind, at_gaze_of: u64, t_ms: u64) -> PointerAction {
    let p = gaze_at(at_gaze_of);
    PointerAction { kind, x: p.x, y: p.y, t_ms }
}

/// Full expected action list for a trigger trace (alternating press and
/// release times, starting with a press) where gaze `gaze_at(t)` is
/// reported at every trigger instant.
pub fn arbiter_oracle(times: &[u64], config: ArbiterConfig, out: &mut Vec<PointerAction>) {
    let w = config.double_click_window_ms;
    let h = config.hold_threshold_ms;
    out.clear();
    let presses = times.chunks(2).map(|c| Press {
        at: c[0],
        release: c.get(1).copied(),
    });
    // a short press waiting to learn whether it is half of a double click
    let mut pending: Option<Press> = None;
    for p in presses {
        let is_hold = match p.release {
            None => true,
            Some(r) => r - p.at >= h,
        };
        if let Some(c) = pending.take() {
            let c_release = c.release.unwrap();
            if p.at - c_release <= w {
                if !is_hold {
                    out.push(act(ActionKind::DoubleClick, c.at, p.release.unwrap()));
                    continue;
                }
                // the second press never completed a click
                out.push(act(ActionKind::Click, c.at, p.at + h));
            } else {
                out.push(act(ActionKind::Click, c.at, c_release + w));
            }
        }
        if is_hold {
            out.push(act(ActionKind::HoldStart, p.at, p.at + h));
            if let Some(r) = p.release {
                out.push(act(ActionKind::HoldEnd, r, r));
            }
        } else {
            pending = Some(p);
        }
    }
    if let Some(c) = pending {
        out.push(act(ActionKind::Click, c.at, c.release.unwrap() + w));
    }
}

#[derive(Debug, Default)]
pub struct TraceReport {
    pub traces: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<String>,
}

struct Enumerator {
    config: ArbiterConfig,
    grid_ms: u64,
    horizon_ms: u64,
    max_events: usize,
    times: Vec<u64>,
    emitted: Vec<PointerAction>,
    finished: Vec<PointerAction>,
    expected: Vec<PointerAction>,
    report: TraceReport,
}

impl Enumerator {
    fn check(&mut self, arbiter: &Arbiter) {
        self.report.traces += 1;
        let mut end = *arbiter;
        self.finished.clear();
        self.finished.extend_from_slice(&self.emitted);
        end.finish(&mut self.finished);
        arbiter_oracle(&self.times, self.config, &mut self.expected);
        let ordered = self.finished.windows(2).all(|w| w[0].t_ms <= w[1].t_ms);
        let closed = self.times.len() % 2 == 1 || {
            let starts = self.finished.iter().filter(|a| a.kind == ActionKind::HoldStart).count();
            let ends = self.finished.iter().filter(|a| a.kind == ActionKind::HoldEnd).count();
            starts == ends
        };
        if self.finished != self.expected || !ordered || !closed {
            self.report.mismatches += 1;
            if self.report.first_mismatch.is_none() {
                self.report.first_mismatch = Some(format!(
                    "trace {:?}: got {:?}, expected {:?}",
                    self.times, self.finished, self.expected
                ));
            }
        }
    }

    fn descend(&mut self, arbiter: Arbiter, earliest: u64) {
        self.check(&arbiter);
        if self.times.len() == self.max_events {
            return;
        }
        let press = self.times.len() % 2 == 0;
        let mut t = earliest;
        while t <= self.horizon_ms {
            let mut next = arbiter;
            let mark = self.emitted.len();
            let trigger = if press { TriggerEvent::press(t) } else { TriggerEvent::release(t) };
            let stepped = next
                .step(InputEvent::Gaze(GazeSample::new(t, gaze_at(t).x, gaze_at(t).y)), &mut self.emitted)
                .and_then(|_| next.step(trigger.into(), &mut self.emitted));
            if stepped.is_err() {
                self.report.mismatches += 1;
                self.report
                    .first_mismatch
                    .get_or_insert_with(|| format!("trace {:?} + {t}: {stepped:?}", self.times));
            }
            // nothing may be announced before its own timestamp
            if self.emitted[mark..].iter().any(|a| a.t_ms > t) {
                self.report.mismatches += 1;
                self.report
                    .first_mismatch
                    .get_or_insert_with(|| format!("trace {:?} + {t}: early action", self.times));
            }
            self.times.push(t);
            self.descend(next, t + self.grid_ms);
            self.times.pop();
            self.emitted.truncate(mark);
            t += self.grid_ms;
        }
    }
}

/// Runs every legal trace of up to `max_events` trigger events at strictly
/// increasing multiples of `grid_ms` in `[0, horizon_ms]` and compares the
/// arbiter with [`arbiter_oracle`]. Every prefix is itself a trace, checked
/// as if the stream ended there.
pub fn enumerate_arbiter_traces(
    config: ArbiterConfig,
    max_events: usize,
    grid_ms: u64,
    horizon_ms: u64,
) -> TraceReport {
    let mut e = Enumerator {
        config,
        grid_ms,
        horizon_ms,
        max_events,
        times: Vec::with_capacity(max_events),
        emitted: Vec::with_capacity(4 * max_events),
        finished: Vec::with_capacity(4 * max_events),
        expected: Vec::with_capacity(4 * max_events),
        report: TraceReport::default(),
    };
    e.descend(Arbiter::new(config), 0);
    e.report
}

/// Number of traces [`enumerate_arbiter_traces`] visits: all subsets of the
/// grid instants of size at most `max_events`.
pub fn trace_count(max_events: usize, grid_ms: u64, horizon_ms: u64) -> u64 {
    let slots = horizon_ms / grid_ms + 1;
    let mut total = 0u64;
    let mut c = 1u64;
    for k in 0..=max_events as u64 {
        total += c;
        c = c * (slots - k) / (k + 1);
    }
    total
}

// --------------------------------------------------------------------- auth

use gazekit::auth::{gen_trajectories, match_epoch, AuthConfig, EpochWindow, ShapeTrajectory};
use gazekit::gaze::{apply_disturbance, CalibrationDisturbance};
use gazekit::geom::Screen;
use gazekit::synth::{synth_follow_span, NoiseModel};

/// Every shape at every lag: `table[shape][lag index]` is the mean distance
/// from the valid in-window samples to the shape `lag` ms earlier.
pub fn distance_table(
    samples: &[GazeSample],
    trajectories: &[ShapeTrajectory],
    window: EpochWindow,
    lags: &[u64],
) -> Vec<Vec<f64>> {
    let used: Vec<&GazeSample> = samples
        .iter()
        .filter(|s| s.valid && s.t_ms >= window.start_ms && s.t_ms < window.end_ms)
        .collect();
    trajectories
        .iter()
        .map(|traj| {
            lags.iter()
                .map(|&lag| {
                    let mut sum = 0.0;
                    for s in &used {
                        let p = traj.position(s.t_ms as f64 - lag as f64);
                        sum += ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt();
                    }
                    sum / used.len() as f64
                })
                .collect()
        })
        .collect()
}

/// `(winner index, per-shape (distance, lag))` read off the full table:
/// earliest lag among equal minima, lowest shape index among equal shapes.
pub fn epoch_oracle(table: &[Vec<f64>], lags: &[u64]) -> (usize, Vec<(f64, u64)>) {
    let per_shape: Vec<(f64, u64)> = table
        .iter()
        .map(|row| {
            let mut best = 0;
            for (i, d) in row.iter().enumerate() {
                if *d < row[best] {
                    best = i;
                }
            }
            (row[best], lags[best])
        })
        .collect();
    let mut winner = 0;
    for (i, (d, _)) in per_shape.iter().enumerate() {
        if *d < per_shape[winner].0 {
            winner = i;
        }
    }
    (winner, per_shape)
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct PursuitTally {
    pub epochs: usize,
    pub correct: usize,
    pub correct_disturbed: usize,
    pub winner_changed: usize,
}

/// Seeded single-epoch pursuits on freshly generated default sessions: a
/// follower with per-axis noise `sigma_px` tracks one random shape through
/// one random epoch, then the same samples are shifted by `offset_px` in a
/// random direction.
pub fn pursuit_trials(epochs: usize, sigma_px: f64, offset_px: f64, seed: u64) -> PursuitTally {
    let config = AuthConfig::default();
    let mut rng = SeededRng::new(seed);
    let mut tally = PursuitTally {
        epochs,
        ..Default::default()
    };
    for _ in 0..epochs {
        let session_seed = rng.next_u64();
        let trajectories = gen_trajectories(&config, session_seed).expect("default config places shapes");
        let target = rng.index(trajectories.len());
        let window = config.epoch_window(rng.index(config.password_length));
        let noise = NoiseModel::new(sigma_px, 0, rng.next_u64());
        let samples = synth_follow_span(&trajectories[target], window.start_ms, window.end_ms, 60, &noise).unwrap();
        let angle = rng.range(0.0, std::f64::consts::TAU);
        let shift = CalibrationDisturbance::new(offset_px * angle.cos(), offset_px * angle.sin(), 1.0).unwrap();
        let shifted = apply_disturbance(&samples, &shift, Screen::default());
        let plain = match_epoch(&samples, &trajectories, window, &config.lags).unwrap();
        let moved = match_epoch(&shifted, &trajectories, window, &config.lags).unwrap();
        let id = &trajectories[target].shape_id;
        tally.correct += usize::from(&plain.winner == id);
        tally.correct_disturbed += usize::from(&moved.winner == id);
        tally.winner_changed += usize::from(plain.winner != moved.winner);
    }
    tally
}
