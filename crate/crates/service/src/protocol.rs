//! Wire messages. Every frame carries one JSON object whose `type` field
//! names the message; see `docs/protocol.md` for the catalogue.

use gazekit::arbiter::{PointerAction, Target};
use gazekit::auth::{AuthConfig, AuthOutcome, AuthSession, EpochRecord, ShapeTrajectory};
use gazekit::gesture::{PathSource, Recognition};
use gazekit::geom::Screen;
use gazekit::typing::{Key, Keystroke, TypingMetrics};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const PROTOCOL_VERSION: u32 = 1;

pub const CAPABILITIES: &[&str] = &["gesture", "auth", "typing", "arbiter", "debug_position", "train_gesture"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Gesture,
    Auth,
    Typing,
    Arbiter,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Gesture => "gesture",
            Mode::Auth => "auth",
            Mode::Typing => "typing",
            Mode::Arbiter => "arbiter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownType,
    UnknownSession,
    ProtocolViolation,
    MalformedFrame,
    BadRequest,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureOptions {
    #[serde(default)]
    pub source: Option<PathSource>,
    #[serde(default)]
    pub dispersion_px: Option<f64>,
    #[serde(default)]
    pub min_fixation_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthOptions {
    pub seed: u64,
    /// Shape ids to verify against; absent to enroll.
    #[serde(default)]
    pub password: Option<Vec<String>>,
    #[serde(default)]
    pub shape_count: Option<usize>,
    #[serde(default)]
    pub password_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypingOptions {
    pub phrase: String,
    /// Layout file text; the built-in QWERTY layout when absent.
    #[serde(default)]
    pub layout: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbiterOptions {
    #[serde(default)]
    pub double_click_window_ms: Option<u64>,
    #[serde(default)]
    pub hold_threshold_ms: Option<u64>,
    #[serde(default)]
    pub targets: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionOptions {
    Gesture(GestureOptions),
    Auth(AuthOptions),
    Typing(TypingOptions),
    Arbiter(ArbiterOptions),
}

impl SessionOptions {
    pub fn mode(&self) -> Mode {
        match self {
            SessionOptions::Gesture(_) => Mode::Gesture,
            SessionOptions::Auth(_) => Mode::Auth,
            SessionOptions::Typing(_) => Mode::Typing,
            SessionOptions::Arbiter(_) => Mode::Arbiter,
        }
    }

    /// The `start_session` message carrying these options.
    pub fn to_message(&self) -> Value {
        let mut v = match self {
            SessionOptions::Gesture(o) => serde_json::to_value(o),
            SessionOptions::Auth(o) => serde_json::to_value(o),
            SessionOptions::Typing(o) => serde_json::to_value(o),
            SessionOptions::Arbiter(o) => serde_json::to_value(o),
        }
        .expect("options serialize");
        let obj = v.as_object_mut().expect("options are objects");
        obj.retain(|_, field| !field.is_null());
        obj.insert("type".into(), "start_session".into());
        obj.insert("mode".into(), self.mode().as_str().into());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireTrigger {
    Press,
    Release,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClientMessage {
    Hello {
        client: Option<String>,
    },
    StartSession(SessionOptions),
    Sample {
        session_id: String,
        t_ms: u64,
        x: f64,
        y: f64,
        valid: bool,
    },
    Trigger {
        session_id: String,
        t_ms: u64,
        kind: WireTrigger,
    },
    EndSession {
        session_id: String,
    },
    DebugPosition {
        session_id: String,
        shape_id: String,
        t_ms: f64,
    },
    TrainGesture {
        name: String,
        action_id: String,
        paths: Vec<Vec<[f64; 2]>>,
    },
    ListTemplates,
}

/// Why a frame could not become a [`ClientMessage`].
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub code: ErrorCode,
    pub detail: String,
}

impl Rejection {
    fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
        }
    }
}

fn fields<T: for<'de> Deserialize<'de>>(kind: &str, value: Value) -> Result<T, Rejection> {
    serde_json::from_value(value).map_err(|e| Rejection::new(ErrorCode::BadRequest, format!("{kind}: {e}")))
}

#[derive(Deserialize)]
struct HelloFields {
    #[serde(default)]
    client: Option<String>,
}

#[derive(Deserialize)]
struct SampleFields {
    session_id: String,
    t_ms: u64,
    x: f64,
    y: f64,
    #[serde(default = "default_valid")]
    valid: bool,
}

fn default_valid() -> bool {
    true
}

#[derive(Deserialize)]
struct TriggerFields {
    session_id: String,
    t_ms: u64,
    kind: WireTrigger,
}

#[derive(Deserialize)]
struct SessionFields {
    session_id: String,
}

#[derive(Deserialize)]
struct DebugPositionFields {
    session_id: String,
    shape_id: String,
    t_ms: f64,
}

#[derive(Deserialize)]
struct TrainFields {
    name: String,
    action_id: String,
    paths: Vec<Vec<[f64; 2]>>,
}

impl ClientMessage {
    /// The wire form of this message.
    pub fn to_json(&self) -> Value {
        match self {
            ClientMessage::Hello { client } => match client {
                Some(c) => json!({"type": "hello", "client": c}),
                None => json!({"type": "hello"}),
            },
            ClientMessage::StartSession(options) => options.to_message(),
            ClientMessage::Sample {
                session_id,
                t_ms,
                x,
                y,
                valid,
            } => json!({"type": "sample", "session_id": session_id, "t_ms": t_ms, "x": x, "y": y, "valid": valid}),
            ClientMessage::Trigger { session_id, t_ms, kind } => {
                json!({"type": "trigger", "session_id": session_id, "t_ms": t_ms, "kind": kind})
            }
            ClientMessage::EndSession { session_id } => json!({"type": "end_session", "session_id": session_id}),
            ClientMessage::DebugPosition {
                session_id,
                shape_id,
                t_ms,
            } => json!({"type": "debug_position", "session_id": session_id, "shape_id": shape_id, "t_ms": t_ms}),
            ClientMessage::TrainGesture { name, action_id, paths } => {
                json!({"type": "train_gesture", "name": name, "action_id": action_id, "paths": paths})
            }
            ClientMessage::ListTemplates => json!({"type": "list_templates"}),
        }
    }

    /// Decodes one frame payload.
    pub fn parse(bytes: &[u8]) -> Result<Self, Rejection> {
        let text =
            std::str::from_utf8(bytes).map_err(|_| Rejection::new(ErrorCode::MalformedFrame, "frame is not UTF-8"))?;
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| Rejection::new(ErrorCode::MalformedFrame, format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Rejection::new(ErrorCode::MalformedFrame, "frame is not a JSON object"))?;
        let kind = match obj.remove("type") {
            Some(Value::String(s)) => s,
            _ => return Err(Rejection::new(ErrorCode::MalformedFrame, "missing string field `type`")),
        };
        match kind.as_str() {
            "hello" => {
                let f: HelloFields = fields(&kind, value)?;
                Ok(ClientMessage::Hello { client: f.client })
            }
            "start_session" => {
                let mode = match obj.remove("mode") {
                    Some(Value::String(s)) => s,
                    _ => return Err(Rejection::new(ErrorCode::BadRequest, "start_session: missing `mode`")),
                };
                let options = match mode.as_str() {
                    "gesture" => SessionOptions::Gesture(fields(&kind, value)?),
                    "auth" => SessionOptions::Auth(fields(&kind, value)?),
                    "typing" => SessionOptions::Typing(fields(&kind, value)?),
                    "arbiter" => SessionOptions::Arbiter(fields(&kind, value)?),
                    other => {
                        return Err(Rejection::new(
                            ErrorCode::BadRequest,
                            format!("start_session: unknown mode {other:?}"),
                        ))
                    }
                };
                Ok(ClientMessage::StartSession(options))
            }
            "sample" => {
                let f: SampleFields = fields(&kind, value)?;
                Ok(ClientMessage::Sample {
                    session_id: f.session_id,
                    t_ms: f.t_ms,
                    x: f.x,
                    y: f.y,
                    valid: f.valid,
                })
            }
            "trigger" => {
                let f: TriggerFields = fields(&kind, value)?;
                Ok(ClientMessage::Trigger {
                    session_id: f.session_id,
                    t_ms: f.t_ms,
                    kind: f.kind,
                })
            }
            "end_session" => {
                let f: SessionFields = fields(&kind, value)?;
                Ok(ClientMessage::EndSession { session_id: f.session_id })
            }
            "debug_position" => {
                let f: DebugPositionFields = fields(&kind, value)?;
                Ok(ClientMessage::DebugPosition {
                    session_id: f.session_id,
                    shape_id: f.shape_id,
                    t_ms: f.t_ms,
                })
            }
            "train_gesture" => {
                let f: TrainFields = fields(&kind, value)?;
                Ok(ClientMessage::TrainGesture {
                    name: f.name,
                    action_id: f.action_id,
                    paths: f.paths,
                })
            }
            "list_templates" => Ok(ClientMessage::ListTemplates),
            other => Err(Rejection::new(ErrorCode::UnknownType, format!("unknown message type {other:?}"))),
        }
    }
}

/// Mode-specific session parameters announced in `session_started`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SessionConfig {
    Gesture {
        source: PathSource,
        dispersion_px: f64,
        min_fixation_ms: u64,
        resample_points: usize,
        reject_threshold: f64,
        templates: Vec<String>,
    },
    Auth {
        seed: u64,
        config: AuthConfig,
        enrolling: bool,
        nominal_duration_ms: u64,
        trajectories: Vec<ShapeTrajectory>,
    },
    Typing {
        phrase: String,
        keys: Vec<Key>,
    },
    Arbiter {
        double_click_window_ms: u64,
        hold_threshold_ms: u64,
        targets: Vec<Target>,
        screen: Screen,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GestureEvent {
    /// Time of the release that closed the gesture.
    pub t_ms: u64,
    pub point_count: usize,
    /// `None` when the captured path was degenerate.
    pub result: Option<Recognition>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetedAction {
    #[serde(flatten)]
    pub action: PointerAction,
    pub target: Option<String>,
}

/// Final report of a session.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SessionSummary {
    Gesture {
        gestures: Vec<GestureEvent>,
    },
    Auth {
        /// `None` while enrolling.
        outcome: Option<AuthOutcome>,
        wall_ms: u64,
        epochs: Vec<EpochRecord>,
        /// Epoch winners: the enrolled password when enrolling.
        winners: Vec<String>,
        transcript: Option<String>,
        #[serde(skip)]
        session: Option<AuthSession>,
    },
    Typing {
        transcribed: String,
        keystrokes: Vec<Keystroke>,
        metrics: Option<TypingMetrics>,
        metrics_error: Option<String>,
    },
    Arbiter {
        actions: Vec<TargetedAction>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    HelloOk {
        version: u32,
        capabilities: Vec<String>,
    },
    SessionStarted {
        session_id: String,
        config: SessionConfig,
    },
    Ack {
        session_id: Option<String>,
    },
    PointerAction {
        session_id: String,
        #[serde(flatten)]
        action: TargetedAction,
    },
    Gesture {
        session_id: String,
        #[serde(flatten)]
        gesture: GestureEvent,
    },
    Epoch {
        session_id: String,
        record: EpochRecord,
    },
    KeySelected {
        session_id: String,
        keystroke: Keystroke,
        transcribed: String,
    },
    SessionEnded {
        session_id: String,
        summary: SessionSummary,
    },
    Position {
        session_id: String,
        shape_id: String,
        t_ms: f64,
        x: f64,
        y: f64,
    },
    TemplateTrained {
        name: String,
        action_id: String,
        template_count: usize,
    },
    Templates {
        templates: Vec<TemplateInfo>,
    },
    Error {
        code: ErrorCode,
        detail: String,
        session_id: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateInfo {
    pub name: String,
    pub action_id: String,
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }

    pub fn error(code: ErrorCode, detail: impl Into<String>, session_id: Option<&str>) -> Self {
        ServerMessage::Error {
            code,
            detail: detail.into(),
            session_id: session_id.map(str::to_owned),
        }
    }
}
