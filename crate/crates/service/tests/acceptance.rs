//! Acceptance suite. Runs each criterion at its stated tolerance and time
//! budget and prints one PASS or FAIL line per criterion.

#[path = "../../core/tests/support/mod.rs"]
mod support;

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gazekit::arbiter::ArbiterConfig;
use gazekit::auth::AuthConfig;
use gazekit::gaze::detect_fixations;
use gazekit::geom::Point;
use gazekit::gesture::{bundled_shapes, bundled_store, write_store, GesturePath, Recognition};
use gazekit::rng::SeededRng;
use gazekit::synth::{synth_typist, TypistModel};
use gazekit::typing::{bundled_phrases, compute_metrics, default_layout, KeyboardLayout, TypingSession};
use gazekit::event::TriggerEvent;
use gazekit::gaze::GazeSample;
use gazekit_service::client::Client;
use gazekit_service::drive::{record_messages, replay_through, summary_of};
use gazekit_service::protocol::ClientMessage;
use gazekit_service::{Server, Service, Shared};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Option<Duration>, run: impl FnOnce() -> Verdict) -> (Verdict, Duration) {
    let start = Instant::now();
    let mut v = run();
    let took = start.elapsed();
    if let Some(budget) = budget {
        if took > budget {
            v.pass = false;
            v.detail.push_str(&format!("; over the {:.0} s budget", budget.as_secs_f64()));
        }
    }
    (v, took)
}

fn fixation_oracle() -> Verdict {
    let mut rng = SeededRng::new(2024);
    let mut mismatches = 0;
    let mut fixations = 0;
    for i in 0..1000 {
        let stream = support::random_stream(&mut rng, 200);
        let dispersion = [25.0, 40.0, 60.0][i % 3];
        let min_ms = [60, 100, 150][i % 3];
        let got = detect_fixations(&stream, dispersion, min_ms);
        let want = support::fixation_oracle(&stream, dispersion, min_ms);
        fixations += want.len();
        mismatches += usize::from(got != want);
    }
    verdict(mismatches == 0, format!("1000 streams, {fixations} fixations, {mismatches} mismatches"))
}

fn arbiter_oracle() -> Verdict {
    let report = support::enumerate_arbiter_traces(ArbiterConfig::default(), 8, 50, 2000);
    let mut detail = format!("{} traces, {} mismatches", report.traces, report.mismatches);
    if let Some(first) = &report.first_mismatch {
        detail.push_str(&format!(", first: {first}"));
    }
    verdict(report.mismatches == 0, detail)
}

fn gesture_self_match() -> Verdict {
    let store = bundled_store();
    let mut worst: f64 = 0.0;
    let mut self_ok = true;
    for shape in bundled_shapes() {
        match store.recognize(&shape.path()) {
            Ok(Recognition::Match(m)) => {
                self_ok &= m.template_name == shape.name && m.distance <= 1e-9;
                worst = worst.max(m.distance);
            }
            _ => self_ok = false,
        }
    }
    let mut rng = SeededRng::new(99);
    let templates = store.templates();
    let trials = 500;
    let mut correct = 0;
    for k in 0..trials {
        let t = &templates[k % templates.len()];
        let noisy: Vec<Point> = t
            .normalized_points
            .iter()
            .map(|p| Point::new(p.x + 0.02 * rng.gaussian(), p.y + 0.02 * rng.gaussian()))
            .collect();
        if let Ok(Recognition::Match(m)) = store.recognize(&GesturePath::from_points(noisy)) {
            correct += usize::from(m.template_name == t.name);
        }
    }
    let accuracy = correct as f64 / trials as f64;
    verdict(
        self_ok && accuracy >= 0.99,
        format!("worst self distance {worst:.3e}, noisy accuracy {correct}/{trials}"),
    )
}

fn auth_accuracy() -> Verdict {
    let a = support::pursuit_trials(1000, 15.0, 30.0, 5);
    let b = support::pursuit_trials(1000, 15.0, 30.0, 5);
    let accuracy = a.correct as f64 / a.epochs as f64;
    let disturbed = a.correct_disturbed as f64 / a.epochs as f64;
    let drop_pp = 100.0 * (accuracy - disturbed);
    let deterministic = a == b;
    verdict(
        accuracy >= 0.99 && drop_pp <= 4.0 && deterministic,
        format!(
            "{} epochs, accuracy {:.1}%, with 30 px offset {:.1}% (drop {drop_pp:.1} pp), deterministic {deterministic}",
            a.epochs,
            100.0 * accuracy,
            100.0 * disturbed
        ),
    )
}

fn session_duration() -> Verdict {
    let d = AuthConfig::default().nominal_duration_ms();
    verdict(d == 6750, format!("nominal duration {} s", d as f64 / 1000.0))
}

fn press_each(layout: &KeyboardLayout, target: &str, aims: &[(u64, Point)]) -> TypingSession {
    let mut s = TypingSession::new(layout.clone(), target);
    for &(t, p) in aims {
        s.step(GazeSample::new(t, p.x, p.y).into()).unwrap();
        s.step(TriggerEvent::press(t).into()).unwrap();
        s.step(TriggerEvent::release(t + 50).into()).unwrap();
    }
    s
}

fn typing_hand_cases() -> Verdict {
    let layout = default_layout();
    let centre = |c: char| layout.key_for_char(c).unwrap().rect.center();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;

    let aims: Vec<(u64, Point)> = "hello world".chars().enumerate().map(|(i, c)| (i as u64 * 6000, centre(c))).collect();
    let m = compute_metrics(&press_each(&layout, "hello world", &aims)).unwrap();
    let minute = close(m.wpm, 2.0) && close(m.kspc, 1.0) && close(m.rba, 0.0);

    let mut aims: Vec<Point> = "hello".chars().map(centre).collect();
    aims.push(centre('p'));
    aims.push(layout.backspace().unwrap().rect.center());
    aims.extend(" world".chars().map(centre));
    let timed: Vec<(u64, Point)> = aims.into_iter().enumerate().map(|(i, p)| (i as u64 * 1000, p)).collect();
    let s = press_each(&layout, "hello world", &timed);
    let b = compute_metrics(&s).unwrap();
    let slip = s.transcribed() == "hello world" && close(b.kspc, 13.0 / 11.0) && close(b.rba, 1.0 / 13.0);

    let phrases = bundled_phrases();
    let perfect = phrases.iter().all(|phrase| {
        let mut s = TypingSession::new(layout.clone(), phrase.clone());
        for e in synth_typist(&layout, phrase, 0, &TypistModel::default()).unwrap() {
            s.step(e).unwrap();
        }
        let m = compute_metrics(&s).unwrap();
        s.transcribed() == phrase && close(m.kspc, 1.0) && close(m.rba, 0.0)
    });
    verdict(
        minute && slip && perfect,
        format!(
            "wpm {:.9} kspc {:.9} rba {:.9}; slip kspc {:.9} rba {:.9}; perfect typist on {} phrases {}",
            m.wpm,
            m.kspc,
            m.rba,
            b.kspc,
            b.rba,
            phrases.len(),
            if perfect { "ok" } else { "failed" }
        ),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("bundled.gtpl");
    std::fs::write(&store, write_store(&bundled_store())).unwrap();
    let replay = dir.path().join("gestures.gaze");
    std::fs::write(&replay, common::replay_text("gesture")).unwrap();
    let (store, replay) = (store.to_str().unwrap(), replay.to_str().unwrap());
    let runs: [&[&str]; 3] = [
        &["auth-sim", "--seeds", "100", "--noise", "15"],
        &["type-sim", "--sigma", "30", "--seed", "4"],
        &["recognize", "--store", store, "--replay", replay],
    ];
    let mut failed = Vec::new();
    for args in runs {
        let outputs: Vec<_> = (0..2)
            .map(|_| Command::new(env!("CARGO_BIN_EXE_gazekit")).args(args).output().unwrap())
            .collect();
        if !outputs[0].status.success() || outputs[0].stdout.is_empty() || outputs[0].stdout != outputs[1].stdout {
            failed.push(args[0]);
        }
    }
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            "auth-sim, type-sim, recognize identical across two runs".to_string()
        } else {
            format!("differing or failing: {}", failed.join(", "))
        },
    )
}

fn service_equivalence() -> Verdict {
    let server = Server::bind("127.0.0.1:0", Shared::default()).unwrap();
    let addr = server.local_addr().unwrap();
    server.spawn();
    let mut failed = Vec::new();
    for mode in common::MODES {
        let file = common::replay_file(mode);
        let want = serde_json::to_string(&common::direct_summary(mode, &file)).unwrap();

        let log = replay_through(&mut Service::new(Shared::default()), &common::options(mode), &file).unwrap();
        let local = summary_of(&log).map(|s| serde_json::to_string(s).unwrap());

        let mut client = Client::connect(addr).unwrap();
        client.send(&ClientMessage::StartSession(common::options(mode))).unwrap();
        let started = client.recv().unwrap();
        let id = started["session_id"].as_str().unwrap_or_default().to_owned();
        let mut msgs = record_messages(&id, &file);
        msgs.push(ClientMessage::EndSession { session_id: id });
        let lines = client.exchange(&msgs).unwrap();
        let remote = lines.iter().find(|l| l.contains("\"session_ended\"")).cloned().unwrap_or_default();

        if local.as_deref() != Some(want.as_str()) || !remote.contains(&format!("\"summary\":{want}")) {
            failed.push(mode);
        }
    }
    verdict(
        failed.is_empty(),
        if failed.is_empty() {
            "gesture, auth, typing, arbiter: in-process and socket summaries equal the direct results".to_string()
        } else {
            format!("differing modes: {}", failed.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: [(&str, Option<Duration>, fn() -> Verdict); 8] = [
        ("fixation oracle", Some(secs(10)), fixation_oracle),
        ("arbiter oracle", Some(secs(60)), arbiter_oracle),
        ("gesture self-match", Some(secs(30)), gesture_self_match),
        ("auth accuracy", Some(secs(60)), auth_accuracy),
        ("session duration", None, session_duration),
        ("typing hand cases", None, typing_hand_cases),
        ("cli determinism", None, cli_determinism),
        ("service equivalence", None, service_equivalence),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let (v, took) = timed(budget, run);
        failures += usize::from(!v.pass);
        println!(
            "{} [{}] {name}: {} ({:.2} s)",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
