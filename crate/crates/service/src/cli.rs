//! Command-line front end. Every subcommand except `serve` returns its
//! report as a string so the binary and the tests print the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gazekit::auth::{
    gen_trajectories, match_epoch, run_auth_session, write_transcript, AuthConfig, AuthOutcome,
};
use gazekit::gaze::{apply_disturbance, CalibrationDisturbance, GazeSample};
use gazekit::geom::Point;
use gazekit::gesture::{
    bundled_store, parse_store, write_store, GestureCapture, GesturePath, PathSource, Recognition, TemplateStore,
    DEFAULT_REJECT_THRESHOLD, DEFAULT_RESAMPLE_POINTS,
};
use gazekit::replay::parse_replay;
use gazekit::rng::SeededRng;
use gazekit::synth::{synth_follow_span, synth_gesture, synth_password_follower, synth_typist, NoiseModel, TypistModel};
use gazekit::typing::{
    bundled_phrases, compute_metrics, default_layout, parse_layout, parse_phrases, TypingSession,
    ABLE_BODIED_BASELINE, MOTOR_IMPAIRED_BASELINE,
};

use crate::drive::replay_through;
use crate::protocol::{
    ArbiterOptions, AuthOptions, GestureOptions, ServerMessage, SessionOptions, TypingOptions,
};
use crate::server::{Server, DEFAULT_PORT, PORT_ENV};
use crate::service::{Service, Shared, TemplateLibrary};

#[derive(Debug, Parser)]
#[command(name = "gazekit", version, about = "Gaze interaction engine: gestures, pursuit authentication, gaze typing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a template store from labeled paths.
    Train(TrainArgs),
    /// Recognize labeled paths or the gestures in a replay file.
    Recognize(RecognizeArgs),
    /// Simulate pursuit authentication over many seeds.
    AuthSim(AuthSimArgs),
    /// Simulate a gaze typist over a phrase set.
    TypeSim(TypeSimArgs),
    /// Run a replay file through a session and print the event log.
    Replay(ReplayArgs),
    /// Start the session service.
    Serve(ServeArgs),
    /// Time gesture recognition and epoch matching.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Labeled paths, one per line: `name action_id x1 y1 x2 y2 ...`.
    #[arg(long)]
    pub paths: PathBuf,
    /// Where to write the template store.
    #[arg(long)]
    pub out: PathBuf,
    /// Resample point count.
    #[arg(long, default_value_t = DEFAULT_RESAMPLE_POINTS)]
    pub points: usize,
    /// Minimum score for a match.
    #[arg(long, default_value_t = DEFAULT_REJECT_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["paths", "replay"]))]
pub struct RecognizeArgs {
    /// Template store file.
    #[arg(long)]
    pub store: PathBuf,
    /// Labeled paths to classify, in the `train` format.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Replay file whose press/release spans are gestures.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// How replayed gaze becomes a path.
    #[arg(long, value_enum, default_value_t = SourceArg::Fixations)]
    pub source: SourceArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Fixations,
    Raw,
}

impl From<SourceArg> for PathSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Fixations => PathSource::FixationCentroids,
            SourceArg::Raw => PathSource::RawSamples,
        }
    }
}

#[derive(Debug, Args)]
pub struct AuthSimArgs {
    /// Number of simulated sessions per condition.
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// Gaze noise standard deviation in pixels.
    #[arg(long, default_value_t = 15.0)]
    pub noise: f64,
    /// Calibration offset in pixels for the disturbed condition.
    #[arg(long, default_value_t = 30.0)]
    pub offset: f64,
    /// Eye tracker sample rate.
    #[arg(long, default_value_t = 60)]
    pub rate: u32,
    /// Pursuit latency in milliseconds.
    #[arg(long, default_value_t = 0)]
    pub latency: u64,
    /// First session seed.
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Directory for per-session transcripts.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TypeSimArgs {
    /// Phrase file, one phrase per line. Defaults to the bundled set.
    #[arg(long)]
    pub phrases: Option<PathBuf>,
    /// Keyboard layout file. Defaults to the bundled layout.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Milliseconds between keystrokes.
    #[arg(long, default_value_t = 1000)]
    pub interval: u64,
    /// Aim error standard deviation in pixels.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Gesture,
    Auth,
    Typing,
    Arbiter,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Replay file.
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Target phrase (typing).
    #[arg(long, default_value = "")]
    pub phrase: String,
    /// Session seed (auth).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated shape ids (auth). Omit to enroll.
    #[arg(long, value_delimiter = ',')]
    pub password: Option<Vec<String>>,
    /// How gaze becomes a path (gesture).
    #[arg(long, value_enum, default_value_t = SourceArg::Fixations)]
    pub source: SourceArg,
    /// Template store (gesture). Defaults to the bundled templates.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Template store to start from. Defaults to the bundled templates.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 200)]
    pub iterations: u32,
}

/// Runs every subcommand but `serve`.
pub fn run(command: &Command) -> Result<String> {
    match command {
        Command::Train(a) => train(a),
        Command::Recognize(a) => recognize(a),
        Command::AuthSim(a) => auth_sim(a),
        Command::TypeSim(a) => type_sim(a),
        Command::Replay(a) => replay(a),
        Command::Bench(a) => bench(a),
        Command::Serve(a) => serve(a).map(|()| String::new()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_store(path: &Path) -> Result<TemplateStore> {
    parse_store(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// One line of a paths file.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPath {
    pub name: String,
    pub action_id: String,
    pub path: GesturePath,
}

/// Parses `name action_id x1 y1 x2 y2 ...` lines; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_paths(text: &str) -> Result<Vec<LabeledPath>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(name), Some(action_id)) = (fields.next(), fields.next()) else {
            bail!("paths line {}: expected a name and an action id", i + 1);
        };
        let coords = fields
            .map(|f| f.parse::<f64>().with_context(|| format!("paths line {}: bad number {f:?}", i + 1)))
            .collect::<Result<Vec<_>>>()?;
        if coords.len() < 4 || coords.len() % 2 != 0 {
            bail!("paths line {}: need an even number of coordinates for at least two points", i + 1);
        }
        out.push(LabeledPath {
            name: name.to_owned(),
            action_id: action_id.to_owned(),
            path: GesturePath::from_points(coords.chunks(2).map(|c| Point::new(c[0], c[1])).collect()),
        });
    }
    Ok(out)
}

fn train(a: &TrainArgs) -> Result<String> {
    let labeled = parse_paths(&read(&a.paths)?)?;
    if labeled.is_empty() {
        bail!("{} holds no paths", a.paths.display());
    }
    let mut groups: Vec<(&str, &str, Vec<GesturePath>)> = Vec::new();
    for l in &labeled {
        match groups.iter_mut().find(|(name, _, _)| *name == l.name) {
            Some((_, action, paths)) => {
                if *action != l.action_id {
                    bail!("template {:?} has two action ids: {action} and {}", l.name, l.action_id);
                }
                paths.push(l.path.clone());
            }
            None => groups.push((&l.name, &l.action_id, vec![l.path.clone()])),
        }
    }
    let mut store = TemplateStore::new(a.points, a.threshold)?;
    for (name, action, paths) in &groups {
        store
            .train(name, paths, action)
            .with_context(|| format!("training {name:?}"))?;
    }
    fs::write(&a.out, write_store(&store)).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(format!(
        "trained {} templates from {} paths into {}\n",
        store.len(),
        labeled.len(),
        a.out.display()
    ))
}

fn describe(out: &mut String, recognition: &Recognition) {
    match recognition {
        Recognition::Match(r) => write!(
            out,
            "{} action {} distance {:.6} score {:.6}",
            r.template_name, r.action_id, r.distance, r.score
        ),
        Recognition::NoMatch { best: Some(r) } => {
            write!(out, "no_match best {} distance {:.6} score {:.6}", r.template_name, r.distance, r.score)
        }
        Recognition::NoMatch { best: None } => write!(out, "no_match"),
    }
    .unwrap();
}

fn recognize(a: &RecognizeArgs) -> Result<String> {
    let store = load_store(&a.store)?;
    if store.is_empty() {
        bail!("template store {} is empty; train templates first", a.store.display());
    }
    let mut out = String::new();
    if let Some(paths) = &a.paths {
        let labeled = parse_paths(&read(paths)?)?;
        let mut correct = 0;
        for (i, l) in labeled.iter().enumerate() {
            let recognition = store.recognize(&l.path).with_context(|| format!("path {}", i + 1))?;
            let hit = recognition.matched().is_some_and(|r| r.template_name == l.name);
            correct += usize::from(hit);
            write!(out, "path {} expected {} got ", i + 1, l.name).unwrap();
            describe(&mut out, &recognition);
            out.push('\n');
        }
        let pct = if labeled.is_empty() {
            0.0
        } else {
            100.0 * correct as f64 / labeled.len() as f64
        };
        writeln!(out, "accuracy {correct}/{} {pct:.2}%", labeled.len()).unwrap();
    } else if let Some(replay) = &a.replay {
        let file = parse_replay(&read(replay)?).with_context(|| format!("parsing {}", replay.display()))?;
        let mut capture = GestureCapture::new(a.source.into());
        let mut count = 0;
        for r in &file.records {
            if let Some(path) = capture.step(*r)? {
                count += 1;
                write!(out, "gesture {count} t_ms {} points {} ", r.t_ms(), path.points.len()).unwrap();
                match store.recognize(&path) {
                    Ok(recognition) => describe(&mut out, &recognition),
                    Err(e) => write!(out, "unrecognizable ({e})").unwrap(),
                }
                out.push('\n');
            }
        }
        writeln!(out, "gestures {count}").unwrap();
    }
    Ok(out)
}

/// Seeds derived from a session seed for the simulated user.
fn sub_seed(seed: u64, stream: u64) -> u64 {
    SeededRng::derive(seed, stream).next_u64()
}

#[derive(Default)]
struct Condition {
    accept: usize,
    reject: usize,
    abort: usize,
    epochs: usize,
    correct: usize,
}

impl Condition {
    fn add(&mut self, outcome: AuthOutcome, epochs: usize, correct: usize) {
        match outcome {
            AuthOutcome::Accept => self.accept += 1,
            AuthOutcome::Reject => self.reject += 1,
            AuthOutcome::Abort => self.abort += 1,
        }
        self.epochs += epochs;
        self.correct += correct;
    }
}

fn auth_sim(a: &AuthSimArgs) -> Result<String> {
    if a.seeds == 0 {
        bail!("--seeds must be at least 1");
    }
    if !(a.noise >= 0.0) {
        bail!("--noise must be non-negative");
    }
    let config = AuthConfig::default();
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut clean = Condition::default();
    let mut shifted = Condition::default();
    for seed in a.seed_base..a.seed_base + a.seeds {
        let trajectories = gen_trajectories(&config, seed)?;
        let mut pick = SeededRng::derive(seed, 1);
        let password: Vec<String> = (0..config.password_length)
            .map(|_| trajectories[pick.index(trajectories.len())].shape_id.clone())
            .collect();
        let noise = NoiseModel::new(a.noise, a.latency, sub_seed(seed, 2));
        let samples = synth_password_follower(&trajectories, &config, &password, a.rate, &noise)?;
        let angle = SeededRng::derive(seed, 3).range(0.0, std::f64::consts::TAU);
        let shift = CalibrationDisturbance::new(a.offset * angle.cos(), a.offset * angle.sin(), 1.0)?;
        let moved = apply_disturbance(&samples, &shift, config.screen);
        for (tally, stream, label) in [(&mut clean, &samples, "clean"), (&mut shifted, &moved, "offset")] {
            let session = run_auth_session(stream, &config, seed, &password)?;
            let correct = session.epochs.iter().filter(|e| e.is_correct()).count();
            tally.add(session.outcome, session.epochs.len(), correct);
            if let Some(dir) = &a.out {
                let path = dir.join(format!("seed-{seed}-{label}.txt"));
                fs::write(&path, write_transcript(&session)).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    let mut out = String::new();
    writeln!(
        out,
        "auth-sim seeds {} noise {} px offset {} px rate {} Hz latency {} ms",
        a.seeds, a.noise, a.offset, a.rate, a.latency
    )
    .unwrap();
    writeln!(
        out,
        "{:<14} {:>8} {:>7} {:>7} {:>6} {:>7} {:>8} {:>10} {:>10}",
        "condition", "sessions", "accept", "reject", "abort", "epochs", "correct", "epoch_acc", "accept_rate"
    )
    .unwrap();
    let offset_label = format!("offset_{}px", a.offset);
    for (label, c) in [("clean", &clean), (offset_label.as_str(), &shifted)] {
        let epoch_acc = if c.epochs == 0 { 0.0 } else { c.correct as f64 / c.epochs as f64 };
        writeln!(
            out,
            "{:<14} {:>8} {:>7} {:>7} {:>6} {:>7} {:>8} {:>10.4} {:>10.4}",
            label,
            a.seeds,
            c.accept,
            c.reject,
            c.abort,
            c.epochs,
            c.correct,
            epoch_acc,
            c.accept as f64 / a.seeds as f64
        )
        .unwrap();
    }
    Ok(out)
}

fn type_sim(a: &TypeSimArgs) -> Result<String> {
    let phrases = match &a.phrases {
        Some(p) => parse_phrases(&read(p)?),
        None => bundled_phrases(),
    };
    if phrases.is_empty() {
        bail!("no phrases to type");
    }
    let layout = match &a.layout {
        Some(p) => parse_layout(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => default_layout(),
    };
    let mut out = String::new();
    writeln!(out, "type-sim phrases {} interval {} ms sigma {} px seed {}", phrases.len(), a.interval, a.sigma, a.seed)
        .unwrap();
    let (mut wpm, mut kspc, mut rba) = (0.0, 0.0, 0.0);
    for (i, phrase) in phrases.iter().enumerate() {
        let model = TypistModel {
            interval_ms: a.interval,
            sigma_px: a.sigma,
            seed: sub_seed(a.seed, i as u64),
        };
        let events = synth_typist(&layout, phrase, 0, &model).with_context(|| format!("phrase {}", i + 1))?;
        let mut session = TypingSession::new(layout.clone(), phrase.clone());
        for e in events {
            session.step(e)?;
        }
        let m = compute_metrics(&session).with_context(|| format!("phrase {}", i + 1))?;
        wpm += m.wpm;
        kspc += m.kspc;
        rba += m.rba;
        writeln!(
            out,
            "phrase {:>3} wpm {:>7.3} kspc {:.4} rba {:.4} keystrokes {:>3} {:?}",
            i + 1,
            m.wpm,
            m.kspc,
            m.rba,
            m.keystrokes,
            session.transcribed()
        )
        .unwrap();
    }
    let n = phrases.len() as f64;
    writeln!(out, "mean       wpm {:>7.3} kspc {:.4} rba {:.4}", wpm / n, kspc / n, rba / n).unwrap();
    for b in [MOTOR_IMPAIRED_BASELINE, ABLE_BODIED_BASELINE] {
        writeln!(out, "reference {} wpm {:.2} kspc {:.2} rba {:.2}", b.group, b.wpm, b.kspc, b.rba).unwrap();
    }
    Ok(out)
}

/// Session options for replaying a file in `mode`.
pub fn replay_options(a: &ReplayArgs) -> SessionOptions {
    match a.mode {
        ModeArg::Gesture => SessionOptions::Gesture(GestureOptions {
            source: Some(a.source.into()),
            ..Default::default()
        }),
        ModeArg::Auth => SessionOptions::Auth(AuthOptions {
            seed: a.seed,
            password: a.password.clone(),
            ..Default::default()
        }),
        ModeArg::Typing => SessionOptions::Typing(TypingOptions {
            phrase: a.phrase.clone(),
            layout: None,
        }),
        ModeArg::Arbiter => SessionOptions::Arbiter(ArbiterOptions::default()),
    }
}

fn replay(a: &ReplayArgs) -> Result<String> {
    let file = parse_replay(&read(&a.file)?).with_context(|| format!("parsing {}", a.file.display()))?;
    let store = match &a.store {
        Some(p) => load_store(p)?,
        None => bundled_store(),
    };
    let mut service = Service::new(Shared::new(TemplateLibrary::new(store)));
    let options = replay_options(a);
    let log = replay_through(&mut service, &options, &file).map_err(anyhow::Error::msg)?;
    let mut out = String::new();
    for m in log.iter().filter(|m| !matches!(m, ServerMessage::Ack { .. })) {
        out.push_str(&m.to_json());
        out.push('\n');
    }
    Ok(out)
}

fn serve(a: &ServeArgs) -> Result<()> {
    let store = match &a.store {
        Some(p) => load_store(p)?,
        None => bundled_store(),
    };
    let server = Server::bind((a.host.as_str(), a.port), Shared::new(TemplateLibrary::new(store)))
        .with_context(|| format!("binding {}:{}", a.host, a.port))?;
    eprintln!("gazekit service listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}

fn bench(a: &BenchArgs) -> Result<String> {
    if a.iterations == 0 {
        bail!("--iterations must be at least 1");
    }
    let store = bundled_store();
    let paths: Vec<GesturePath> = store
        .templates()
        .iter()
        .enumerate()
        .map(|(i, t)| synth_gesture(t, 300.0, Point::new(960.0, 540.0), &NoiseModel::new(6.0, 0, i as u64)))
        .collect();
    let start = Instant::now();
    for i in 0..a.iterations as usize {
        std::hint::black_box(store.recognize(&paths[i % paths.len()])?);
    }
    let recognize_us = start.elapsed().as_secs_f64() * 1e6 / f64::from(a.iterations);

    let config = AuthConfig::default();
    let trajectories = gen_trajectories(&config, 7)?;
    let window = config.epoch_window(0);
    let samples: Vec<GazeSample> =
        synth_follow_span(&trajectories[0], window.start_ms, window.end_ms, 60, &NoiseModel::new(15.0, 0, 7))?;
    let start = Instant::now();
    for _ in 0..a.iterations {
        std::hint::black_box(match_epoch(&samples, &trajectories, window, &config.lags)?);
    }
    let match_us = start.elapsed().as_secs_f64() * 1e6 / f64::from(a.iterations);

    let mut out = String::new();
    writeln!(
        out,
        "recognize    {} templates x {} points  {:>10.2} us/call",
        store.len(),
        store.n(),
        recognize_us
    )
    .unwrap();
    writeln!(
        out,
        "match_epoch  {} shapes x {} samples x {} lags  {:>10.2} us/call",
        trajectories.len(),
        samples.len(),
        config.lags.lags().count(),
        match_us
    )
    .unwrap();
    writeln!(out, "iterations   {}", a.iterations).unwrap();
    Ok(out)
}
