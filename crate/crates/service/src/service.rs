//! Message handling. A [`Service`] owns the sessions opened over one
//! connection; the template library and session numbering are shared
//! between connections through [`Shared`].

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use gazekit::arbiter::{resolve_target, Arbiter, ArbiterConfig, PointerAction, Target};
use gazekit::auth::{write_transcript, AuthConfig, AuthRun};
use gazekit::event::{InputEvent, TriggerEvent};
use gazekit::gaze::{GazeSample, DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS};
use gazekit::geom::{Point, Screen};
use gazekit::gesture::{bundled_store, GestureCapture, GesturePath, PathSource, TemplateStore};
use gazekit::typing::{compute_metrics, default_layout, parse_layout, TypingSession};

use crate::protocol::{
    ArbiterOptions, AuthOptions, ClientMessage, ErrorCode, GestureEvent, GestureOptions, ServerMessage,
    SessionConfig, SessionOptions, SessionSummary, TargetedAction, TemplateInfo, TypingOptions, WireTrigger,
    CAPABILITIES, PROTOCOL_VERSION,
};

/// Template store shared by every connection. Readers take a snapshot;
/// training swaps in a new one.
#[derive(Debug, Clone)]
pub struct TemplateLibrary(Arc<RwLock<Arc<TemplateStore>>>);

impl TemplateLibrary {
    pub fn new(store: TemplateStore) -> Self {
        Self(Arc::new(RwLock::new(Arc::new(store))))
    }

    pub fn snapshot(&self) -> Arc<TemplateStore> {
        Arc::clone(&self.0.read().expect("template lock poisoned"))
    }

    fn train(&self, name: &str, paths: &[GesturePath], action_id: &str) -> Result<usize, String> {
        let mut guard = self.0.write().expect("template lock poisoned");
        let mut next = TemplateStore::clone(&guard);
        next.train(name, paths, action_id).map_err(|e| e.to_string())?;
        let count = next.len();
        *guard = Arc::new(next);
        Ok(count)
    }
}

impl Default for TemplateLibrary {
    fn default() -> Self {
        Self::new(bundled_store())
    }
}

/// State common to all connections of one server.
#[derive(Debug, Clone, Default)]
pub struct Shared {
    pub templates: TemplateLibrary,
    next_session: Arc<AtomicU64>,
}

impl Shared {
    pub fn new(templates: TemplateLibrary) -> Self {
        Self {
            templates,
            next_session: Arc::new(AtomicU64::new(0)),
        }
    }

    fn session_id(&self) -> String {
        format!("session-{}", self.next_session.fetch_add(1, Ordering::Relaxed) + 1)
    }
}

enum Engine {
    Gesture {
        capture: GestureCapture,
        gestures: Vec<GestureEvent>,
    },
    Auth(Box<AuthRun>),
    Typing {
        session: TypingSession,
        pressed: bool,
    },
    Arbiter {
        arbiter: Arbiter,
        targets: Vec<Target>,
        actions: Vec<TargetedAction>,
    },
}

struct Session {
    engine: Engine,
    last_ms: Option<u64>,
    last_sample_ms: Option<u64>,
    ended: bool,
}

pub struct Service {
    shared: Shared,
    sessions: BTreeMap<String, Session>,
}

type Replies = Vec<ServerMessage>;

fn fail(code: ErrorCode, detail: impl Into<String>, session_id: &str) -> Replies {
    vec![ServerMessage::error(code, detail, Some(session_id))]
}

impl Service {
    pub fn new(shared: Shared) -> Self {
        Self {
            shared,
            sessions: BTreeMap::new(),
        }
    }

    /// Decodes and handles one frame payload.
    pub fn handle_frame(&mut self, payload: &[u8]) -> Replies {
        match ClientMessage::parse(payload) {
            Ok(msg) => self.handle(msg),
            Err(r) => vec![ServerMessage::error(r.code, r.detail, None)],
        }
    }

    /// Handles one message. Always replies at least once; a message that
    /// fails leaves every session as it was.
    pub fn handle(&mut self, msg: ClientMessage) -> Replies {
        match msg {
            ClientMessage::Hello { .. } => vec![ServerMessage::HelloOk {
                version: PROTOCOL_VERSION,
                capabilities: CAPABILITIES.iter().map(|c| c.to_string()).collect(),
            }],
            ClientMessage::StartSession(options) => self.start(options),
            ClientMessage::Sample {
                session_id,
                t_ms,
                x,
                y,
                valid,
            } => {
                let sample = if valid {
                    GazeSample::new(t_ms, x, y)
                } else {
                    GazeSample::lost(t_ms)
                };
                self.feed(&session_id, InputEvent::Gaze(sample))
            }
            ClientMessage::Trigger { session_id, t_ms, kind } => {
                let e = match kind {
                    WireTrigger::Press => TriggerEvent::press(t_ms),
                    WireTrigger::Release => TriggerEvent::release(t_ms),
                };
                self.feed(&session_id, InputEvent::Trigger(e))
            }
            ClientMessage::EndSession { session_id } => self.end(&session_id),
            ClientMessage::DebugPosition {
                session_id,
                shape_id,
                t_ms,
            } => self.debug_position(&session_id, &shape_id, t_ms),
            ClientMessage::TrainGesture { name, action_id, paths } => {
                let paths: Vec<GesturePath> = paths
                    .iter()
                    .map(|p| GesturePath::from_points(p.iter().map(|&[x, y]| Point::new(x, y)).collect()))
                    .collect();
                match self.shared.templates.train(&name, &paths, &action_id) {
                    Ok(template_count) => vec![ServerMessage::TemplateTrained {
                        name,
                        action_id,
                        template_count,
                    }],
                    Err(e) => vec![ServerMessage::error(ErrorCode::BadRequest, e, None)],
                }
            }
            ClientMessage::ListTemplates => vec![ServerMessage::Templates {
                templates: self
                    .shared
                    .templates
                    .snapshot()
                    .templates()
                    .iter()
                    .map(|t| TemplateInfo {
                        name: t.name.clone(),
                        action_id: t.action_id.clone(),
                    })
                    .collect(),
            }],
        }
    }

    fn start(&mut self, options: SessionOptions) -> Replies {
        let built = match options {
            SessionOptions::Gesture(o) => self.start_gesture(o),
            SessionOptions::Auth(o) => start_auth(o),
            SessionOptions::Typing(o) => start_typing(o),
            SessionOptions::Arbiter(o) => start_arbiter(o),
        };
        match built {
            Ok((engine, config)) => {
                let session_id = self.shared.session_id();
                self.sessions.insert(
                    session_id.clone(),
                    Session {
                        engine,
                        last_ms: None,
                        last_sample_ms: None,
                        ended: false,
                    },
                );
                vec![ServerMessage::SessionStarted { session_id, config }]
            }
            Err(detail) => vec![ServerMessage::error(ErrorCode::BadRequest, detail, None)],
        }
    }

    fn start_gesture(&self, o: GestureOptions) -> Result<(Engine, SessionConfig), String> {
        let source = o.source.unwrap_or(PathSource::FixationCentroids);
        let dispersion_px = o.dispersion_px.unwrap_or(DEFAULT_DISPERSION_PX);
        let min_fixation_ms = o.min_fixation_ms.unwrap_or(DEFAULT_MIN_FIXATION_MS);
        if !(dispersion_px > 0.0) || min_fixation_ms == 0 {
            return Err("fixation thresholds must be positive".into());
        }
        let store = self.shared.templates.snapshot();
        let config = SessionConfig::Gesture {
            source,
            dispersion_px,
            min_fixation_ms,
            resample_points: store.n(),
            reject_threshold: store.reject_threshold(),
            templates: store.templates().iter().map(|t| t.name.clone()).collect(),
        };
        let engine = Engine::Gesture {
            capture: GestureCapture::with_fixation_params(source, dispersion_px, min_fixation_ms),
            gestures: Vec::new(),
        };
        Ok((engine, config))
    }

    fn feed(&mut self, session_id: &str, event: InputEvent) -> Replies {
        let templates = self.shared.templates.clone();
        let Some(session) = self.sessions.get_mut(session_id) else {
            return fail(ErrorCode::UnknownSession, format!("no session {session_id:?}"), session_id);
        };
        if session.ended {
            return fail(ErrorCode::ProtocolViolation, "session has ended", session_id);
        }
        let t = event.t_ms();
        if session.last_ms.is_some_and(|last| t < last) {
            return fail(ErrorCode::ProtocolViolation, format!("event at {t} ms is out of order"), session_id);
        }
        if matches!(event, InputEvent::Gaze(_)) && session.last_sample_ms.is_some_and(|last| t <= last) {
            return fail(
                ErrorCode::ProtocolViolation,
                format!("gaze sample at {t} ms is not after the previous one"),
                session_id,
            );
        }
        let replies = match step(session, session_id, event, &templates) {
            Ok(replies) => replies,
            Err(detail) => return fail(ErrorCode::ProtocolViolation, detail, session_id),
        };
        session.last_ms = Some(t);
        if matches!(event, InputEvent::Gaze(_)) {
            session.last_sample_ms = Some(t);
        }
        if replies.is_empty() {
            vec![ServerMessage::Ack {
                session_id: Some(session_id.to_owned()),
            }]
        } else {
            replies
        }
    }

    fn end(&mut self, session_id: &str) -> Replies {
        let Some(session) = self.sessions.get_mut(session_id) else {
            return fail(ErrorCode::UnknownSession, format!("no session {session_id:?}"), session_id);
        };
        if session.ended {
            return fail(ErrorCode::ProtocolViolation, "session has already ended", session_id);
        }
        let mut replies = Vec::new();
        match &mut session.engine {
            Engine::Auth(run) => {
                for record in run.finish() {
                    replies.push(ServerMessage::Epoch {
                        session_id: session_id.to_owned(),
                        record,
                    });
                }
            }
            Engine::Arbiter {
                arbiter,
                targets,
                actions,
            } => {
                let mut out = Vec::new();
                arbiter.finish(&mut out);
                for a in out {
                    let action = targeted(a, targets);
                    actions.push(action.clone());
                    replies.push(ServerMessage::PointerAction {
                        session_id: session_id.to_owned(),
                        action,
                    });
                }
            }
            Engine::Gesture { .. } | Engine::Typing { .. } => {}
        }
        session.ended = true;
        replies.push(ServerMessage::SessionEnded {
            session_id: session_id.to_owned(),
            summary: summarize(&session.engine),
        });
        replies
    }

    fn debug_position(&self, session_id: &str, shape_id: &str, t_ms: f64) -> Replies {
        let Some(session) = self.sessions.get(session_id) else {
            return fail(ErrorCode::UnknownSession, format!("no session {session_id:?}"), session_id);
        };
        let Engine::Auth(run) = &session.engine else {
            return fail(ErrorCode::BadRequest, "debug_position needs an auth session", session_id);
        };
        match run.trajectories().iter().find(|t| t.shape_id == shape_id) {
            Some(traj) => {
                let p = traj.position(t_ms);
                vec![ServerMessage::Position {
                    session_id: session_id.to_owned(),
                    shape_id: shape_id.to_owned(),
                    t_ms,
                    x: p.x,
                    y: p.y,
                }]
            }
            None => fail(ErrorCode::BadRequest, format!("no shape {shape_id:?}"), session_id),
        }
    }

    /// Ids of sessions that are still accepting input.
    pub fn open_sessions(&self) -> Vec<&str> {
        self.sessions
            .iter()
            .filter(|(_, s)| !s.ended)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

fn start_auth(o: AuthOptions) -> Result<(Engine, SessionConfig), String> {
    let defaults = AuthConfig::default();
    let config = AuthConfig {
        shape_count: o.shape_count.unwrap_or(defaults.shape_count),
        password_length: o.password_length.unwrap_or(defaults.password_length),
        ..defaults
    };
    config.validate().map_err(|e| e.to_string())?;
    let enrolling = o.password.is_none();
    let run = AuthRun::new(config, o.seed, o.password).map_err(|e| e.to_string())?;
    let session_config = SessionConfig::Auth {
        seed: o.seed,
        config,
        enrolling,
        nominal_duration_ms: config.nominal_duration_ms(),
        trajectories: run.trajectories().to_vec(),
    };
    Ok((Engine::Auth(Box::new(run)), session_config))
}

fn start_typing(o: TypingOptions) -> Result<(Engine, SessionConfig), String> {
    let layout = match &o.layout {
        Some(text) => parse_layout(text).map_err(|e| e.to_string())?,
        None => default_layout(),
    };
    let config = SessionConfig::Typing {
        phrase: o.phrase.clone(),
        keys: layout.keys().to_vec(),
    };
    let engine = Engine::Typing {
        session: TypingSession::new(layout, o.phrase),
        pressed: false,
    };
    Ok((engine, config))
}

fn start_arbiter(o: ArbiterOptions) -> Result<(Engine, SessionConfig), String> {
    let defaults = ArbiterConfig::default();
    let config = ArbiterConfig::new(
        o.double_click_window_ms.unwrap_or(defaults.double_click_window_ms),
        o.hold_threshold_ms.unwrap_or(defaults.hold_threshold_ms),
    )
    .map_err(|e| e.to_string())?;
    if let Some(bad) = o.targets.iter().find(|t| !t.rect.has_positive_area()) {
        return Err(format!("target {:?} has no area", bad.id));
    }
    let session_config = SessionConfig::Arbiter {
        double_click_window_ms: config.double_click_window_ms,
        hold_threshold_ms: config.hold_threshold_ms,
        targets: o.targets.clone(),
        screen: Screen::default(),
    };
    let engine = Engine::Arbiter {
        arbiter: Arbiter::new(config),
        targets: o.targets,
        actions: Vec::new(),
    };
    Ok((engine, session_config))
}

fn targeted(action: PointerAction, targets: &[Target]) -> TargetedAction {
    TargetedAction {
        target: resolve_target(action.point(), targets).map(str::to_owned),
        action,
    }
}

/// Routes one in-order event to the session's engine.
fn step(
    session: &mut Session,
    session_id: &str,
    event: InputEvent,
    templates: &TemplateLibrary,
) -> Result<Replies, String> {
    let id = || session_id.to_owned();
    let mut replies = Vec::new();
    match &mut session.engine {
        Engine::Gesture { capture, gestures } => {
            if let Some(path) = capture.step(event).map_err(|e| e.to_string())? {
                let store = templates.snapshot();
                let gesture = GestureEvent {
                    t_ms: event.t_ms(),
                    point_count: path.points.len(),
                    result: store.recognize(&path).ok(),
                };
                gestures.push(gesture.clone());
                replies.push(ServerMessage::Gesture {
                    session_id: id(),
                    gesture,
                });
            }
        }
        Engine::Auth(run) => {
            // triggers play no part in pursuit authentication
            if let InputEvent::Gaze(sample) = event {
                for record in run.push(sample) {
                    replies.push(ServerMessage::Epoch { session_id: id(), record });
                }
                if run.is_done() {
                    session.ended = true;
                    replies.push(ServerMessage::SessionEnded {
                        session_id: id(),
                        summary: summarize(&session.engine),
                    });
                }
            }
        }
        Engine::Typing { session: typing, pressed } => {
            if let InputEvent::Trigger(t) = event {
                let press = t.kind == gazekit::event::TriggerKind::Press;
                if press == *pressed {
                    return Err(if press { "press while pressed" } else { "release without press" }.into());
                }
            }
            if let Some(keystroke) = typing.step(event).map_err(|e| e.to_string())? {
                replies.push(ServerMessage::KeySelected {
                    session_id: id(),
                    keystroke,
                    transcribed: typing.transcribed().to_owned(),
                });
            }
            if let InputEvent::Trigger(t) = event {
                *pressed = t.kind == gazekit::event::TriggerKind::Press;
            }
        }
        Engine::Arbiter {
            arbiter,
            targets,
            actions,
        } => {
            let mut out = Vec::new();
            arbiter.step(event, &mut out).map_err(|e| e.to_string())?;
            for a in out {
                let action = targeted(a, targets);
                actions.push(action.clone());
                replies.push(ServerMessage::PointerAction {
                    session_id: id(),
                    action,
                });
            }
        }
    }
    Ok(replies)
}

fn summarize(engine: &Engine) -> SessionSummary {
    match engine {
        Engine::Gesture { gestures, .. } => SessionSummary::Gesture {
            gestures: gestures.clone(),
        },
        Engine::Auth(run) => {
            let session = run.session();
            SessionSummary::Auth {
                outcome: run.outcome(),
                wall_ms: session.as_ref().map_or(0, |s| s.wall_ms),
                epochs: run.epochs().to_vec(),
                winners: run.winners(),
                transcript: session.as_ref().map(write_transcript),
                session,
            }
        }
        Engine::Typing { session, .. } => {
            let (metrics, metrics_error) = match compute_metrics(session) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SessionSummary::Typing {
                transcribed: session.transcribed().to_owned(),
                keystrokes: session.keystrokes().to_vec(),
                metrics,
                metrics_error,
            }
        }
        Engine::Arbiter { actions, .. } => SessionSummary::Arbiter {
            actions: actions.clone(),
        },
    }
}
