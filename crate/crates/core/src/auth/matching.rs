use serde::{Deserialize, Serialize};

use crate::gaze::GazeSample;

use super::{AuthError, EpochWindow, ShapeTrajectory, MIN_EPOCH_SAMPLES};

/// Pursuit latencies tried when aligning gaze with a shape: `0, step, ..`
/// up to and including `max_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagGrid {
    pub max_ms: u64,
    pub step_ms: u64,
}

impl Default for LagGrid {
    fn default() -> Self {
        Self {
            max_ms: 300,
            step_ms: 50,
        }
    }
}

impl LagGrid {
    pub fn lags(&self) -> impl Iterator<Item = u64> {
        (0..=self.max_ms).step_by(self.step_ms.max(1) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeScore {
    pub shape_id: String,
    /// Mean gaze-to-shape distance in pixels at the best lag.
    pub distance: f64,
    pub lag_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMatch {
    pub winner: String,
    /// One entry per trajectory, in trajectory order.
    pub distances: Vec<ShapeScore>,
}

impl EpochMatch {
    pub fn winner_score(&self) -> &ShapeScore {
        self.distances
            .iter()
            .find(|s| s.shape_id == self.winner)
            .expect("winner is one of the scored shapes")
    }

    /// Smallest distance among the losing shapes.
    pub fn runner_up_distance(&self) -> Option<f64> {
        self.distances
            .iter()
            .filter(|s| s.shape_id != self.winner)
            .map(|s| s.distance)
            .min_by(f64::total_cmp)
    }
}

/// Matches the valid samples inside `window` against every trajectory.
///
/// A shape's distance is the minimum over the lag grid of the mean
/// Euclidean distance between each sample at `t` and the shape at `t - lag`.
/// The closest shape wins; equal distances go to the lowest shape id.
pub fn match_epoch(
    samples: &[GazeSample],
    trajectories: &[ShapeTrajectory],
    window: EpochWindow,
    lags: &LagGrid,
) -> Result<EpochMatch, AuthError> {
    let in_window: Vec<&GazeSample> = samples
        .iter()
        .filter(|s| s.valid && window.contains(s.t_ms))
        .collect();
    if in_window.len() < MIN_EPOCH_SAMPLES {
        return Err(AuthError::InsufficientGaze {
            valid: in_window.len(),
            required: MIN_EPOCH_SAMPLES,
        });
    }
    let count = in_window.len() as f64;
    let distances: Vec<ShapeScore> = trajectories
        .iter()
        .map(|traj| {
            let mut best = ShapeScore {
                shape_id: traj.shape_id.clone(),
                distance: f64::INFINITY,
                lag_ms: 0,
            };
            for lag in lags.lags() {
                let total: f64 = in_window
                    .iter()
                    .map(|s| s.point().distance(&traj.position(s.t_ms as f64 - lag as f64)))
                    .sum();
                let mean = total / count;
                if mean < best.distance {
                    best.distance = mean;
                    best.lag_ms = lag;
                }
            }
            best
        })
        .collect();
    let winner = distances
        .iter()
        .min_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.shape_id.cmp(&b.shape_id)))
        .map(|s| s.shape_id.clone())
        .ok_or(AuthError::TooFewShapes(0))?;
    Ok(EpochMatch { winner, distances })
}
