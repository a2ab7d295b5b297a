//! Feeding replay files through a [`Service`].

use gazekit::event::{InputEvent, TriggerKind};
use gazekit::replay::ReplayFile;

use crate::protocol::{ClientMessage, ServerMessage, SessionOptions, SessionSummary, WireTrigger};
use crate::service::Service;

/// The `sample` and `trigger` messages that replay `file` into a session.
pub fn record_messages(session_id: &str, file: &ReplayFile) -> Vec<ClientMessage> {
    file.records
        .iter()
        .map(|r| match *r {
            InputEvent::Gaze(s) => ClientMessage::Sample {
                session_id: session_id.to_owned(),
                t_ms: s.t_ms,
                x: s.x,
                y: s.y,
                valid: s.valid,
            },
            InputEvent::Trigger(t) => ClientMessage::Trigger {
                session_id: session_id.to_owned(),
                t_ms: t.t_ms,
                kind: match t.kind {
                    TriggerKind::Press => WireTrigger::Press,
                    TriggerKind::Release => WireTrigger::Release,
                },
            },
        })
        .collect()
}

/// Opens a session, replays `file` into it and closes it, returning every
/// reply in order. Input after the session ends by itself is not sent.
pub fn replay_through(
    service: &mut Service,
    options: &SessionOptions,
    file: &ReplayFile,
) -> Result<Vec<ServerMessage>, String> {
    let mut log = service.handle(ClientMessage::StartSession(options.clone()));
    let session_id = match log.first() {
        Some(ServerMessage::SessionStarted { session_id, .. }) => session_id.clone(),
        Some(ServerMessage::Error { detail, .. }) => return Err(detail.clone()),
        other => return Err(format!("unexpected reply to start_session: {other:?}")),
    };
    let mut ended = false;
    for msg in record_messages(&session_id, file) {
        let replies = service.handle(msg);
        ended = replies.iter().any(|r| matches!(r, ServerMessage::SessionEnded { .. }));
        log.extend(replies);
        if ended {
            break;
        }
    }
    if !ended {
        log.extend(service.handle(ClientMessage::EndSession { session_id }));
    }
    Ok(log)
}

/// The summary carried by the last `session_ended` in `log`.
pub fn summary_of(log: &[ServerMessage]) -> Option<&SessionSummary> {
    log.iter().rev().find_map(|m| match m {
        ServerMessage::SessionEnded { summary, .. } => Some(summary),
        _ => None,
    })
}
