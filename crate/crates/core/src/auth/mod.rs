//! Moving-shape pursuit authentication.
//!
//! Several shapes move along seeded closed-form trajectories. A password is
//! an ordered list of shapes; during epoch `i` the user follows shape `i`
//! with their gaze. Each epoch's gaze is compared with every shape's path
//! (with a small latency search) and the closest shape wins the epoch. The
//! session is accepted when every epoch's winner matches the password.

mod matching;
mod session;
mod trajectory;
mod transcript;

pub use matching::{match_epoch, EpochMatch, LagGrid, ShapeScore};
pub use session::{run_auth_session, AuthOutcome, AuthRun, AuthSession, EpochRecord};
pub use trajectory::{gen_trajectories, shape_position, Motion, ShapeTrajectory};
pub use transcript::{parse_transcript, write_transcript, Transcript, TranscriptEpoch, TranscriptParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Screen;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuthError {
    #[error("need at least 2 shapes, got {0}")]
    TooFewShapes(usize),
    #[error("invalid auth config: {0}")]
    InvalidConfig(&'static str),
    #[error("could not place shapes {min_separation_px} px apart after {attempts} attempts")]
    SeparationUnsatisfiable { attempts: usize, min_separation_px: f64 },
    #[error("only {valid} valid gaze samples in epoch, need {required}")]
    InsufficientGaze { valid: usize, required: usize },
    #[error("invalid password: {0}")]
    InvalidPassword(String),
}

/// Minimum valid samples for an epoch to be judged.
pub const MIN_EPOCH_SAMPLES: usize = 10;
/// Parameter draws allowed before generation gives up.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;
/// Grid step for the separation check.
pub const SEPARATION_STEP_MS: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthConfig {
    pub shape_count: usize,
    pub epoch_ms: u64,
    pub inter_epoch_ms: u64,
    pub password_length: usize,
    pub lags: LagGrid,
    /// The runner-up must be at least this many times farther than the
    /// winner for an epoch to count as a confident match.
    pub accept_margin: f64,
    pub min_separation_px: f64,
    pub screen: Screen,
}

impl Default for AuthConfig {
    fn default() -> Self {
        Self {
            shape_count: 6,
            epoch_ms: 1500,
            inter_epoch_ms: 250,
            password_length: 4,
            lags: LagGrid::default(),
            accept_margin: 1.0,
            min_separation_px: 80.0,
            screen: Screen::default(),
        }
    }
}

/// Half-open epoch window in session time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochWindow {
    pub start_ms: u64,
    pub end_ms: u64,
}

impl EpochWindow {
    pub fn contains(&self, t_ms: u64) -> bool {
        t_ms >= self.start_ms && t_ms < self.end_ms
    }
}

impl AuthConfig {
    pub fn validate(&self) -> Result<(), AuthError> {
        if self.shape_count < 2 {
            return Err(AuthError::TooFewShapes(self.shape_count));
        }
        if self.epoch_ms == 0 {
            return Err(AuthError::InvalidConfig("epoch_ms must be positive"));
        }
        if self.password_length == 0 {
            return Err(AuthError::InvalidConfig("password_length must be positive"));
        }
        if self.lags.step_ms == 0 {
            return Err(AuthError::InvalidConfig("lag step must be positive"));
        }
        if !(self.accept_margin >= 1.0) {
            return Err(AuthError::InvalidConfig("accept_margin must be at least 1"));
        }
        if !(self.min_separation_px >= 0.0) {
            return Err(AuthError::InvalidConfig("min_separation_px must be non-negative"));
        }
        Ok(())
    }

    /// `epoch_ms * K + inter_epoch_ms * (K - 1)`.
    pub fn nominal_duration_ms(&self) -> u64 {
        let k = self.password_length as u64;
        self.epoch_ms * k + self.inter_epoch_ms * k.saturating_sub(1)
    }

    /// Window of the zero-based epoch `index`.
    pub fn epoch_window(&self, index: usize) -> EpochWindow {
        let start_ms = index as u64 * (self.epoch_ms + self.inter_epoch_ms);
        EpochWindow {
            start_ms,
            end_ms: start_ms + self.epoch_ms,
        }
    }
}
