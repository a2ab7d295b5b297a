use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geom::Point;
use crate::rng::SeededRng;

use super::{AuthConfig, AuthError, MAX_PLACEMENT_ATTEMPTS, SEPARATION_STEP_MS};

/// Motion law of a shape. With `u = angular_speed * t_s + phase`:
///
/// * circle orbit: `center + amplitude * (cos u, sin u)`
/// * linear bounce: `center + amplitude * tri(u) * (cos heading, sin heading)`
///   where `tri` is the unit triangle wave with period 2π, `tri(0) = 0`,
///   rising to 1 at π/2
/// * lissajous: `center + amplitude * (sin u, sin(ratio * angular_speed * t_s))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    CircleOrbit,
    LinearBounce { heading: f64 },
    Lissajous { ratio: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeTrajectory {
    pub shape_id: String,
    pub motion: Motion,
    pub center: Point,
    pub amplitude: f64,
    /// rad/s
    pub angular_speed: f64,
    pub phase: f64,
}

fn triangle_wave(u: f64) -> f64 {
    let s = (u / TAU).rem_euclid(1.0);
    if s < 0.25 {
        4.0 * s
    } else if s < 0.75 {
        2.0 - 4.0 * s
    } else {
        4.0 * s - 4.0
    }
}

impl ShapeTrajectory {
    /// Position at session time `t_ms`; negative times clamp to 0.
    pub fn position(&self, t_ms: f64) -> Point {
        let t = t_ms.max(0.0) / 1000.0;
        let u = self.angular_speed * t + self.phase;
        let (ox, oy) = match self.motion {
            Motion::CircleOrbit => (u.cos(), u.sin()),
            Motion::LinearBounce { heading } => {
                let s = triangle_wave(u);
                (s * heading.cos(), s * heading.sin())
            }
            Motion::Lissajous { ratio } => (u.sin(), (ratio * self.angular_speed * t).sin()),
        };
        Point::new(self.center.x + self.amplitude * ox, self.center.y + self.amplitude * oy)
    }
}

pub fn shape_position(traj: &ShapeTrajectory, t_ms: f64) -> Point {
    traj.position(t_ms)
}

pub(crate) fn shape_id(index: usize) -> String {
    format!("s{index:02}")
}

const EDGE_MARGIN_PX: f64 = 20.0;

fn draw(rng: &mut SeededRng, index: usize, config: &AuthConfig) -> ShapeTrajectory {
    let w = f64::from(config.screen.width);
    let h = f64::from(config.screen.height);
    let max_amp = ((w.min(h) / 2.0) - EDGE_MARGIN_PX - 1.0).clamp(1.0, 220.0);
    let amplitude = rng.range(max_amp.min(80.0), max_amp);
    let reach = amplitude + EDGE_MARGIN_PX;
    let center = Point::new(rng.range(reach, w - reach), rng.range(reach, h - reach));
    let motion = match rng.index(3) {
        0 => Motion::CircleOrbit,
        1 => Motion::LinearBounce {
            heading: rng.range(0.0, PI),
        },
        _ => Motion::Lissajous { ratio: 2.0 },
    };
    let speed = rng.range(0.8, 1.6);
    let angular_speed = if rng.uniform() < 0.5 { -speed } else { speed };
    let phase = rng.range(0.0, TAU);
    ShapeTrajectory {
        shape_id: shape_id(index),
        motion,
        center,
        amplitude,
        angular_speed,
        phase,
    }
}

fn separated(a: &ShapeTrajectory, b: &ShapeTrajectory, horizon_ms: u64, min_px: f64) -> bool {
    (0..=horizon_ms)
        .step_by(SEPARATION_STEP_MS as usize)
        .all(|t| a.position(t as f64).distance(&b.position(t as f64)) >= min_px)
}

/// Seeded trajectories, placed one at a time; a shape whose path comes
/// closer than `min_separation_px` to an already placed one (on a 20 ms grid
/// over the nominal session) is redrawn.
pub fn gen_trajectories(config: &AuthConfig, seed: u64) -> Result<Vec<ShapeTrajectory>, AuthError> {
    config.validate()?;
    let mut rng = SeededRng::new(seed);
    let horizon = config.nominal_duration_ms();
    let mut placed: Vec<ShapeTrajectory> = Vec::with_capacity(config.shape_count);
    let mut attempts = 0;
    while placed.len() < config.shape_count {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(AuthError::SeparationUnsatisfiable {
                attempts,
                min_separation_px: config.min_separation_px,
            });
        }
        attempts += 1;
        let candidate = draw(&mut rng, placed.len(), config);
        if placed
            .iter()
            .all(|p| separated(p, &candidate, horizon, config.min_separation_px))
        {
            placed.push(candidate);
        }
    }
    Ok(placed)
}
