#![allow(dead_code)]

use gazekit::arbiter::{resolve_target, Arbiter, ArbiterConfig, Target};
use gazekit::auth::{gen_trajectories, run_auth_session, write_transcript, AuthConfig};
use gazekit::event::{InputEvent, TriggerEvent};
use gazekit::gaze::{GazeSample, DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS};
use gazekit::geom::{Point, Rect, Screen};
use gazekit::gesture::{bundled_shapes, bundled_store, GestureCapture, PathSource};
use gazekit::replay::{parse_replay, write_replay, ReplayFile};
use gazekit::synth::{synth_gesture_trace, synth_password_follower, synth_typist, NoiseModel, TracerModel, TypistModel};
use gazekit::typing::{compute_metrics, default_layout, TypingSession};
use gazekit_service::protocol::{
    ArbiterOptions, AuthOptions, GestureEvent, GestureOptions, SessionOptions, SessionSummary, TargetedAction,
    TypingOptions,
};

pub const AUTH_SEED: u64 = 21;
pub const PHRASE: &str = "hello world";

pub fn password() -> Vec<String> {
    ["s02", "s00", "s05", "s03"].map(String::from).to_vec()
}

pub fn targets() -> Vec<Target> {
    vec![
        Target {
            id: "left".into(),
            rect: Rect::new(0.0, 0.0, 960.0, 1080.0),
        },
        Target {
            id: "button".into(),
            rect: Rect::new(200.0, 200.0, 300.0, 200.0),
        },
    ]
}

/// A replay file per mode, as text.
pub fn replay_text(mode: &str) -> String {
    let records = match mode {
        "gesture" => gesture_records(),
        "auth" => auth_records(),
        "typing" => typing_records(),
        "arbiter" => arbiter_records(),
        other => panic!("no fixture for {other}"),
    };
    write_replay(&ReplayFile::new(Screen::default(), 60, records))
}

pub fn replay_file(mode: &str) -> ReplayFile {
    parse_replay(&replay_text(mode)).expect("fixture parses")
}

pub fn options(mode: &str) -> SessionOptions {
    match mode {
        "gesture" => SessionOptions::Gesture(GestureOptions::default()),
        "auth" => SessionOptions::Auth(AuthOptions {
            seed: AUTH_SEED,
            password: Some(password()),
            ..Default::default()
        }),
        "typing" => SessionOptions::Typing(TypingOptions {
            phrase: PHRASE.into(),
            layout: None,
        }),
        "arbiter" => SessionOptions::Arbiter(ArbiterOptions {
            targets: targets(),
            ..Default::default()
        }),
        other => panic!("no fixture for {other}"),
    }
}

pub const MODES: [&str; 4] = ["gesture", "auth", "typing", "arbiter"];

fn gesture_records() -> Vec<InputEvent> {
    let mut events = Vec::new();
    let mut start = 100;
    for (i, shape) in bundled_shapes().iter().enumerate() {
        let vertices: Vec<Point> = shape
            .vertices
            .iter()
            .map(|&(x, y)| Point::new(500.0 + 300.0 * x, 300.0 + 300.0 * y))
            .collect();
        let model = TracerModel {
            noise: NoiseModel::new(3.0, 0, i as u64),
            ..TracerModel::default()
        };
        let trace = synth_gesture_trace(&vertices, start, &model).unwrap();
        start = trace.last().unwrap().t_ms() + 400;
        events.extend(trace);
    }
    events
}

fn auth_records() -> Vec<InputEvent> {
    let config = AuthConfig::default();
    let trajectories = gen_trajectories(&config, AUTH_SEED).unwrap();
    synth_password_follower(&trajectories, &config, &password(), 60, &NoiseModel::new(15.0, 0, 9))
        .unwrap()
        .into_iter()
        .map(InputEvent::Gaze)
        .collect()
}

fn typing_records() -> Vec<InputEvent> {
    let model = TypistModel {
        interval_ms: 900,
        sigma_px: 30.0,
        seed: 5,
    };
    synth_typist(&default_layout(), PHRASE, 200, &model).unwrap()
}

fn arbiter_records() -> Vec<InputEvent> {
    let triggers = [
        TriggerEvent::press(100),
        TriggerEvent::release(180),
        TriggerEvent::press(1000),
        TriggerEvent::release(1080),
        TriggerEvent::press(1200),
        TriggerEvent::release(1260),
        TriggerEvent::press(2000),
        TriggerEvent::release(2600),
        TriggerEvent::press(3000),
        TriggerEvent::release(3050),
        TriggerEvent::press(3280),
        TriggerEvent::release(3900),
        TriggerEvent::press(4200),
    ];
    let mut events: Vec<InputEvent> = (0..270u64)
        .map(|i| {
            let t = i * 16;
            InputEvent::Gaze(GazeSample::new(t, 150.0 + (t % 900) as f64, 250.0 + (t % 500) as f64 * 0.4))
        })
        .collect();
    events.extend(triggers.map(InputEvent::Trigger));
    // stable: a gaze sample sharing a trigger's time stays first
    events.sort_by_key(InputEvent::t_ms);
    events
}

/// The summary the service must report, computed with the engine's own
/// API and no service code.
pub fn direct_summary(mode: &str, file: &ReplayFile) -> SessionSummary {
    match mode {
        "gesture" => {
            let store = bundled_store();
            let mut capture =
                GestureCapture::with_fixation_params(PathSource::FixationCentroids, DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS);
            let mut gestures = Vec::new();
            for r in &file.records {
                if let Some(path) = capture.step(*r).unwrap() {
                    gestures.push(GestureEvent {
                        t_ms: r.t_ms(),
                        point_count: path.points.len(),
                        result: store.recognize(&path).ok(),
                    });
                }
            }
            SessionSummary::Gesture { gestures }
        }
        "auth" => {
            let session = run_auth_session(&file.samples(), &AuthConfig::default(), AUTH_SEED, &password()).unwrap();
            SessionSummary::Auth {
                outcome: Some(session.outcome),
                wall_ms: session.wall_ms,
                epochs: session.epochs.clone(),
                winners: session.epochs.iter().map(|e| e.matched.winner.clone()).collect(),
                transcript: Some(write_transcript(&session)),
                session: Some(session),
            }
        }
        "typing" => {
            let mut session = TypingSession::new(default_layout(), PHRASE);
            for r in &file.records {
                session.step(*r).unwrap();
            }
            SessionSummary::Typing {
                transcribed: session.transcribed().to_owned(),
                keystrokes: session.keystrokes().to_vec(),
                metrics: Some(compute_metrics(&session).unwrap()),
                metrics_error: None,
            }
        }
        "arbiter" => {
            let mut arbiter = Arbiter::new(ArbiterConfig::default());
            let mut out = Vec::new();
            for r in &file.records {
                arbiter.step(*r, &mut out).unwrap();
            }
            arbiter.finish(&mut out);
            let targets = targets();
            SessionSummary::Arbiter {
                actions: out
                    .into_iter()
                    .map(|action| TargetedAction {
                        target: resolve_target(action.point(), &targets).map(str::to_owned),
                        action,
                    })
                    .collect(),
            }
        }
        other => panic!("no fixture for {other}"),
    }
}
