mod common;

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream};
use std::time::Duration;

use gazekit_service::client::Client;
use gazekit_service::drive::{record_messages, replay_through, summary_of};
use gazekit_service::protocol::ClientMessage;
use gazekit_service::server::{port_from_env, DEFAULT_PORT};
use gazekit_service::{Server, Service, Shared};
use serde_json::{json, Value};
use tungstenite::Message;

fn spawn_server() -> SocketAddr {
    let server = Server::bind("127.0.0.1:0", Shared::default()).unwrap();
    let addr = server.local_addr().unwrap();
    server.spawn();
    addr
}

fn client(addr: SocketAddr) -> Client {
    Client::connect(addr).unwrap()
}

fn start(c: &mut Client, mode: &str) -> String {
    c.send(&ClientMessage::StartSession(common::options(mode))).unwrap();
    let reply = c.recv().unwrap();
    assert_eq!(reply["type"], "session_started", "{reply}");
    reply["session_id"].as_str().unwrap().to_owned()
}

fn session_ended(lines: &[String]) -> Value {
    lines
        .iter()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["type"] == "session_ended")
        .expect("session_ended")
}

#[test]
fn every_mode_over_tcp_matches_the_engine_api() {
    let addr = spawn_server();
    for mode in common::MODES {
        let file = common::replay_file(mode);
        let mut c = client(addr);
        let id = start(&mut c, mode);
        let mut msgs = record_messages(&id, &file);
        msgs.push(ClientMessage::EndSession { session_id: id });
        let lines = c.exchange(&msgs).unwrap();
        let ended_line = lines.iter().find(|l| l.contains("\"session_ended\"")).expect("session_ended");
        let want = serde_json::to_string(&common::direct_summary(mode, &file)).unwrap();
        assert!(ended_line.contains(&format!("\"summary\":{want}")), "{mode}: {ended_line}");
        let local = replay_through(&mut Service::new(Shared::default()), &common::options(mode), &file).unwrap();
        let local_summary = serde_json::to_string(summary_of(&local).unwrap()).unwrap();
        assert_eq!(local_summary, want, "{mode}");
    }
}

#[test]
fn malformed_frames_do_not_close_the_connection() {
    let addr = spawn_server();
    let mut c = client(addr);
    let id = start(&mut c, "arbiter");
    for junk in [&b"{not json"[..], b"", b"[]", b"\xc3\x28", b"{\"type\":\"warp\"}"] {
        c.send_raw(junk).unwrap();
        let reply = c.recv().unwrap();
        assert_eq!(reply["type"], "error", "{junk:?}");
    }
    // an oversized frame is skipped whole
    let mut raw = TcpStream::connect(addr).unwrap();
    raw.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    let len = (gazekit_service::frame::MAX_FRAME_LEN + 1) as u32;
    raw.write_all(&len.to_be_bytes()).unwrap();
    raw.write_all(&vec![b' '; len as usize]).unwrap();
    let hello = br#"{"type":"hello"}"#;
    raw.write_all(&(hello.len() as u32).to_be_bytes()).unwrap();
    raw.write_all(hello).unwrap();
    let mut replies = Vec::new();
    for _ in 0..2 {
        let mut head = [0u8; 4];
        raw.read_exact(&mut head).unwrap();
        let mut body = vec![0u8; u32::from_be_bytes(head) as usize];
        raw.read_exact(&mut body).unwrap();
        replies.push(serde_json::from_slice::<Value>(&body).unwrap());
    }
    assert_eq!(replies[0]["code"], "malformed_frame");
    assert_eq!(replies[1]["type"], "hello_ok");

    let lines = c
        .exchange(&[
            ClientMessage::Sample {
                session_id: id.clone(),
                t_ms: 10,
                x: 300.0,
                y: 300.0,
                valid: true,
            },
            ClientMessage::EndSession { session_id: id },
        ])
        .unwrap();
    assert_eq!(lines.len(), 2);
    assert_eq!(session_ended(&lines)["summary"]["actions"], json!([]));
}

#[test]
fn sessions_belong_to_their_connection() {
    let addr = spawn_server();
    let mut a = client(addr);
    let mut b = client(addr);
    let id = start(&mut a, "typing");
    let lines = b.exchange(&[ClientMessage::EndSession { session_id: id.clone() }]).unwrap();
    let v: Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(v["code"], "unknown_session");
    let other = start(&mut b, "typing");
    assert_ne!(id, other, "session ids are unique across connections");
}

#[test]
fn browsers_connect_over_websocket() {
    let addr = spawn_server();
    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}/")).unwrap();
    let mut raw_replies = Vec::new();
    let mut ask = |v: Value| -> Vec<Value> {
        ws.send(Message::Text(v.to_string())).unwrap();
        ws.send(Message::Text(json!({"type": "hello"}).to_string())).unwrap();
        let mut out = Vec::new();
        loop {
            let Message::Text(t) = ws.read().unwrap() else { continue };
            let v: Value = serde_json::from_str(&t).unwrap();
            if v["type"] == "hello_ok" {
                return out;
            }
            raw_replies.push(t);
            out.push(v);
        }
    };
    assert_eq!(ask(json!({"type": "bogus"}))[0]["code"], "unknown_type");
    let started = ask(common::options("auth").to_message());
    let id = started[0]["session_id"].as_str().unwrap().to_owned();
    let traj = &started[0]["config"]["trajectories"][2];
    let pos = ask(json!({"type": "debug_position", "session_id": id, "shape_id": traj["shape_id"], "t_ms": 1234.5}));
    let trajectory: gazekit::auth::ShapeTrajectory = serde_json::from_value(traj.clone()).unwrap();
    let want = gazekit::auth::shape_position(&trajectory, 1234.5);
    assert_eq!(pos[0]["type"], "position");
    assert_eq!((pos[0]["x"].as_f64().unwrap(), pos[0]["y"].as_f64().unwrap()), (want.x, want.y));

    let file = common::replay_file("auth");
    let mut events = Vec::new();
    for m in record_messages(&id, &file) {
        events.extend(ask(m.to_json()));
    }
    events.extend(ask(json!({"type": "end_session", "session_id": id})));
    let epochs = events.iter().filter(|e| e["type"] == "epoch").count();
    assert_eq!(epochs, 4);
    let ended = events.iter().find(|e| e["type"] == "session_ended").unwrap();
    assert_eq!(ended["summary"]["outcome"], "accept");
    ws.close(None).unwrap();
    let want = serde_json::to_string(&common::direct_summary("auth", &file)).unwrap();
    let line = raw_replies.iter().find(|l| l.contains("\"session_ended\"")).unwrap();
    assert!(line.contains(&format!("\"summary\":{want}")), "{line}");
}

#[test]
fn port_defaults_when_the_variable_is_unset() {
    // the variable is not set by the test harness
    if std::env::var_os("PURSUIT_PORT").is_none() {
        assert_eq!(port_from_env().unwrap(), DEFAULT_PORT);
    }
    assert_eq!(DEFAULT_PORT, 7317);
}
