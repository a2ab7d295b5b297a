use serde::{Deserialize, Serialize};

use crate::gaze::GazeSample;

use super::{gen_trajectories, match_epoch, AuthConfig, AuthError, EpochMatch, ShapeTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthOutcome {
    Accept,
    Reject,
    Abort,
}

impl AuthOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuthOutcome::Accept => "Accept",
            AuthOutcome::Reject => "Reject",
            AuthOutcome::Abort => "Abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub index: usize,
    pub matched: EpochMatch,
    /// Password element for this epoch; `None` while enrolling.
    pub expected: Option<String>,
    /// Runner-up distance clears `accept_margin` times the winner's.
    pub confident: bool,
}

impl EpochRecord {
    pub fn is_correct(&self) -> bool {
        self.confident && self.expected.as_deref() == Some(self.matched.winner.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthSession {
    pub seed: u64,
    pub config: AuthConfig,
    pub trajectories: Vec<ShapeTrajectory>,
    pub password: Vec<String>,
    pub epochs: Vec<EpochRecord>,
    pub outcome: AuthOutcome,
    /// Session time at which the last judged epoch closed.
    pub wall_ms: u64,
}

impl AuthSession {
    /// 1-based index of the first epoch that did not match the password.
    pub fn first_mismatch(&self) -> Option<usize> {
        self.epochs.iter().find(|e| !e.is_correct()).map(|e| e.index)
    }
}

fn check_password(password: &[String], trajectories: &[ShapeTrajectory], config: &AuthConfig) -> Result<(), AuthError> {
    if password.len() != config.password_length {
        return Err(AuthError::InvalidPassword(format!(
            "expected {} elements, got {}",
            config.password_length,
            password.len()
        )));
    }
    if let Some(bad) = password
        .iter()
        .find(|id| !trajectories.iter().any(|t| &t.shape_id == *id))
    {
        return Err(AuthError::InvalidPassword(format!("unknown shape {bad:?}")));
    }
    Ok(())
}

fn record(index: usize, matched: EpochMatch, expected: Option<String>, margin: f64) -> EpochRecord {
    let best = matched.winner_score().distance;
    let confident = matched
        .runner_up_distance()
        .map_or(true, |runner_up| runner_up >= margin * best);
    EpochRecord {
        index,
        matched,
        expected,
        confident,
    }
}

fn decide(epochs: &[EpochRecord], aborted: bool) -> AuthOutcome {
    if aborted {
        AuthOutcome::Abort
    } else if epochs.iter().all(EpochRecord::is_correct) {
        AuthOutcome::Accept
    } else {
        AuthOutcome::Reject
    }
}

/// Judges a whole recorded gaze stream (session-relative timestamps).
///
/// Every epoch is matched and logged even after a mismatch; an epoch
/// without enough gaze aborts the session on the spot.
pub fn run_auth_session(
    samples: &[GazeSample],
    config: &AuthConfig,
    seed: u64,
    password: &[String],
) -> Result<AuthSession, AuthError> {
    let trajectories = gen_trajectories(config, seed)?;
    check_password(password, &trajectories, config)?;
    let mut epochs = Vec::with_capacity(config.password_length);
    let mut aborted = false;
    let mut wall_ms = 0;
    for (i, expected) in password.iter().enumerate() {
        let window = config.epoch_window(i);
        wall_ms = window.end_ms;
        match match_epoch(samples, &trajectories, window, &config.lags) {
            Ok(m) => epochs.push(record(i + 1, m, Some(expected.clone()), config.accept_margin)),
            Err(AuthError::InsufficientGaze { .. }) => {
                aborted = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(AuthSession {
        seed,
        config: *config,
        trajectories,
        password: password.to_vec(),
        outcome: decide(&epochs, aborted),
        epochs,
        wall_ms,
    })
}

/// Incremental form of [`run_auth_session`] for live streams: each epoch
/// is judged as soon as a sample at or past its end arrives, or at
/// [`AuthRun::finish`].
///
/// Without a password the run enrolls: the epoch winners become the
/// password.
#[derive(Debug, Clone)]
pub struct AuthRun {
    config: AuthConfig,
    seed: u64,
    trajectories: Vec<ShapeTrajectory>,
    password: Option<Vec<String>>,
    next_epoch: usize,
    buffer: Vec<GazeSample>,
    epochs: Vec<EpochRecord>,
    aborted: bool,
    done: bool,
    wall_ms: u64,
}

impl AuthRun {
    pub fn new(config: AuthConfig, seed: u64, password: Option<Vec<String>>) -> Result<Self, AuthError> {
        let trajectories = gen_trajectories(&config, seed)?;
        if let Some(p) = &password {
            check_password(p, &trajectories, &config)?;
        }
        Ok(Self {
            config,
            seed,
            trajectories,
            password,
            next_epoch: 0,
            buffer: Vec::new(),
            epochs: Vec::new(),
            aborted: false,
            done: false,
            wall_ms: 0,
        })
    }

    pub fn trajectories(&self) -> &[ShapeTrajectory] {
        &self.trajectories
    }

    pub fn config(&self) -> &AuthConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn epochs(&self) -> &[EpochRecord] {
        &self.epochs
    }

    /// Feeds one sample; returns the epochs it closed.
    pub fn push(&mut self, sample: GazeSample) -> Vec<EpochRecord> {
        let start = self.epochs.len();
        while !self.done && sample.t_ms >= self.config.epoch_window(self.next_epoch).end_ms {
            self.close_epoch();
        }
        if !self.done && self.config.epoch_window(self.next_epoch).contains(sample.t_ms) {
            self.buffer.push(sample);
        }
        self.epochs[start..].to_vec()
    }

    /// Closes every remaining epoch with whatever gaze has arrived.
    pub fn finish(&mut self) -> Vec<EpochRecord> {
        let start = self.epochs.len();
        while !self.done {
            self.close_epoch();
        }
        self.epochs[start..].to_vec()
    }

    fn close_epoch(&mut self) {
        let i = self.next_epoch;
        let window = self.config.epoch_window(i);
        self.wall_ms = window.end_ms;
        let samples = std::mem::take(&mut self.buffer);
        match match_epoch(&samples, &self.trajectories, window, &self.config.lags) {
            Ok(m) => {
                let expected = self.password.as_ref().map(|p| p[i].clone());
                self.epochs.push(record(i + 1, m, expected, self.config.accept_margin));
                self.next_epoch += 1;
                if self.next_epoch == self.config.password_length {
                    self.done = true;
                }
            }
            Err(_) => {
                self.aborted = true;
                self.done = true;
            }
        }
    }

    pub fn outcome(&self) -> Option<AuthOutcome> {
        (self.done && self.password.is_some()).then(|| decide(&self.epochs, self.aborted))
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted
    }

    /// Winners so far, i.e. the enrolled password once the run is done.
    pub fn winners(&self) -> Vec<String> {
        self.epochs.iter().map(|e| e.matched.winner.clone()).collect()
    }

    /// The finished session; `None` while running or when enrolling.
    pub fn session(&self) -> Option<AuthSession> {
        let outcome = self.outcome()?;
        Some(AuthSession {
            seed: self.seed,
            config: self.config,
            trajectories: self.trajectories.clone(),
            password: self.password.clone()?,
            epochs: self.epochs.clone(),
            outcome,
            wall_ms: self.wall_ms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal_follower(trajs: &[ShapeTrajectory], config: &AuthConfig, password: &[String]) -> Vec<GazeSample> {
        (0..config.nominal_duration_ms())
            .step_by(20)
            .map(|t| {
                let epoch = ((t / (config.epoch_ms + config.inter_epoch_ms)) as usize).min(password.len() - 1);
                let traj = trajs.iter().find(|s| s.shape_id == password[epoch]).unwrap();
                let p = traj.position(t as f64);
                GazeSample::new(t, p.x, p.y)
            })
            .collect()
    }

    fn password(ids: &[&str]) -> Vec<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn correct_follower_is_accepted() {
        let config = AuthConfig::default();
        let trajs = gen_trajectories(&config, 21).unwrap();
        let pw = password(&["s03", "s01", "s05", "s01"]);
        let samples = ideal_follower(&trajs, &config, &pw);
        let s = run_auth_session(&samples, &config, 21, &pw).unwrap();
        assert_eq!(s.outcome, AuthOutcome::Accept);
        assert_eq!(s.epochs.len(), 4);
        assert!(s.epochs.iter().all(|e| e.matched.winner_score().distance == 0.0));
        assert_eq!(s.wall_ms, 6750);
        assert_eq!(s.first_mismatch(), None);
    }

    #[test]
    fn wrong_first_shape_is_rejected_at_epoch_one() {
        let config = AuthConfig::default();
        let trajs = gen_trajectories(&config, 4).unwrap();
        let pw = password(&["s00", "s01", "s02", "s03"]);
        let followed = password(&["s04", "s01", "s02", "s03"]);
        let samples = ideal_follower(&trajs, &config, &followed);
        let s = run_auth_session(&samples, &config, 4, &pw).unwrap();
        assert_eq!(s.outcome, AuthOutcome::Reject);
        assert_eq!(s.first_mismatch(), Some(1));
        assert_eq!(s.epochs.len(), 4, "later epochs are still logged");
    }

    #[test]
    fn short_stream_aborts() {
        let config = AuthConfig::default();
        let trajs = gen_trajectories(&config, 4).unwrap();
        let pw = password(&["s00", "s01", "s02", "s03"]);
        let samples: Vec<_> = ideal_follower(&trajs, &config, &pw)
            .into_iter()
            .filter(|s| s.t_ms < 1900)
            .collect();
        let s = run_auth_session(&samples, &config, 4, &pw).unwrap();
        assert_eq!(s.outcome, AuthOutcome::Abort);
        assert_eq!(s.epochs.len(), 1);
        assert_eq!(s.wall_ms, 3250);
    }

    #[test]
    fn bad_passwords_rejected() {
        let config = AuthConfig::default();
        assert!(matches!(
            run_auth_session(&[], &config, 1, &password(&["s00"])),
            Err(AuthError::InvalidPassword(_))
        ));
        assert!(matches!(
            run_auth_session(&[], &config, 1, &password(&["s00", "s01", "s02", "zz"])),
            Err(AuthError::InvalidPassword(_))
        ));
    }

    #[test]
    fn streaming_matches_batch() {
        let config = AuthConfig::default();
        let trajs = gen_trajectories(&config, 9).unwrap();
        let pw = password(&["s02", "s02", "s00", "s04"]);
        let followed = password(&["s02", "s01", "s00", "s04"]);
        let samples = ideal_follower(&trajs, &config, &followed);
        let batch = run_auth_session(&samples, &config, 9, &pw).unwrap();
        let mut run = AuthRun::new(config, 9, Some(pw)).unwrap();
        for s in &samples {
            run.push(*s);
        }
        run.finish();
        assert_eq!(run.session().unwrap(), batch);
    }

    #[test]
    fn enrollment_returns_winners() {
        let config = AuthConfig::default();
        let trajs = gen_trajectories(&config, 2).unwrap();
        let pw = password(&["s01", "s04", "s04", "s00"]);
        let mut run = AuthRun::new(config, 2, None).unwrap();
        let mut closed = 0;
        for s in ideal_follower(&trajs, &config, &pw) {
            closed += run.push(s).len();
        }
        closed += run.finish().len();
        assert_eq!(closed, 4);
        assert_eq!(run.winners(), pw);
        assert_eq!(run.outcome(), None);
    }

    #[test]
    fn margin_can_veto_a_match() {
        let config = AuthConfig {
            accept_margin: 1e9,
            ..AuthConfig::default()
        };
        let trajs = gen_trajectories(&config, 21).unwrap();
        let pw = password(&["s03", "s01", "s05", "s01"]);
        let samples: Vec<_> = ideal_follower(&trajs, &config, &pw)
            .into_iter()
            .map(|s| GazeSample::new(s.t_ms, s.x + 5.0, s.y))
            .collect();
        let s = run_auth_session(&samples, &config, 21, &pw).unwrap();
        assert_eq!(s.outcome, AuthOutcome::Reject);
    }
}
