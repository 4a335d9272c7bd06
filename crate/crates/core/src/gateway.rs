//! Line-delimited JSON session protocol.
//!
//! A client says `hello`, then streams `cursor` samples and `answer`s; the
//! server replies with trial lifecycle messages and tactile state changes.
//! Blink animation is left to the client, which renders it from the period
//! table advertised in `welcome`. Shape geometry is never sent.
//!
//! ```text
//! client -> server                       server -> client
//! {"type":"hello","v":1,"mode":"guidance","condition":"bimanual"}
//!                                        {"type":"welcome","v":1,"periods":{...}}
//!                                        {"type":"trial","index":0,"count":10,"time_limit_ms":180000}
//! {"type":"cursor","x":50,"y":5,"t":1000}
//!                                        {"type":"tactile","direction":"E","blink":2,"on_shape":true,"t":1000}
//! {"type":"answer","label":"square","confidence":6}
//!                                        {"type":"trial_end","reason":"answered","correct":true}
//!                                        {"type":"trial",...} or {"type":"session_summary",...}
//! ```

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::experiment::{session_stats, SessionStats};
use crate::geometry::{Point, Shape};
use crate::tacton::{BlinkLevel, BlinkPeriods, Direction8, PinFrame, TactileState};
use crate::trial::{CursorOutcome, EndReason, Feedback, Mode, Trial, TrialRecord, DEFAULT_TIME_LIMIT_MS};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Hello {
        v: u32,
        mode: Mode,
        condition: String,
    },
    Cursor {
        x: f64,
        y: f64,
        t: u64,
    },
    Answer {
        label: String,
        confidence: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t: Option<u64>,
    },
    NextTrial {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Welcome {
        v: u32,
        periods: BlinkPeriods,
    },
    Trial {
        index: usize,
        count: usize,
        time_limit_ms: u64,
    },
    Tactile {
        direction: Direction8,
        blink: BlinkLevel,
        on_shape: bool,
        t: u64,
    },
    /// Dark-pixel mode: raised pins of the index array, row-major, 0/1.
    Pins {
        rows: [[u8; 4]; 4],
        t: u64,
    },
    TrialEnd {
        reason: String,
        correct: bool,
    },
    SessionSummary {
        trials: Vec<TrialRecord>,
        stats: SessionStats,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            message: message.into(),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("server messages serialize");
        s.push('\n');
        s
    }
}

/// Emit a tactile message only when something the participant feels changed.
pub fn tactile_change_filter(prev: &TactileState, next: &TactileState) -> bool {
    prev.direction != next.direction || prev.blink != next.blink || prev.on_shape != next.on_shape
}

fn pin_rows(frame: PinFrame) -> [[u8; 4]; 4] {
    frame.rows().map(|row| row.map(u8::from))
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    /// Trial sequence, in presentation order.
    pub shapes: Vec<Arc<Shape>>,
    pub time_limit_ms: u64,
    pub periods: BlinkPeriods,
}

impl SessionConfig {
    pub fn new(shapes: Vec<Shape>) -> Self {
        Self {
            shapes: shapes.into_iter().map(Arc::new).collect(),
            time_limit_ms: DEFAULT_TIME_LIMIT_MS,
            periods: BlinkPeriods::default(),
        }
    }
}

#[derive(Debug)]
enum Phase {
    AwaitHello,
    Active {
        trial: Box<Trial>,
        index: usize,
        mode: Mode,
        condition: String,
    },
    Done,
}

#[derive(Debug, Clone, PartialEq)]
enum LastFeedback {
    Tactile(TactileState),
    Pins(PinFrame),
}

/// Server-side state of one client session. Messages are handled strictly
/// in the order they are passed in.
#[derive(Debug)]
pub struct Session {
    config: Arc<SessionConfig>,
    phase: Phase,
    records: Vec<TrialRecord>,
    last: Option<LastFeedback>,
}

impl Session {
    pub fn new(config: Arc<SessionConfig>) -> Self {
        Self {
            config,
            phase: Phase::AwaitHello,
            records: Vec::new(),
            last: None,
        }
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }

    pub fn is_done(&self) -> bool {
        matches!(self.phase, Phase::Done)
    }

    /// Parses and handles one line. Malformed input yields a single error
    /// reply and leaves the session untouched.
    pub fn handle_line(&mut self, line: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(format!("malformed message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Hello { v, mode, condition } => self.on_hello(v, mode, condition),
            ClientMessage::Cursor { x, y, t } => self.on_cursor(Point::new(x, y), t),
            ClientMessage::Answer { label, confidence, t } => self.on_answer(&label, confidence, t),
            ClientMessage::NextTrial {} => self.on_next_trial(),
        }
    }

    fn on_hello(&mut self, v: u32, mode: Mode, condition: String) -> Vec<ServerMessage> {
        if !matches!(self.phase, Phase::AwaitHello) {
            return vec![ServerMessage::error("session already started")];
        }
        if v != PROTOCOL_VERSION {
            return vec![ServerMessage::error(format!(
                "unsupported protocol version {v}, expected {PROTOCOL_VERSION}"
            ))];
        }
        if self.config.shapes.is_empty() {
            return vec![ServerMessage::error("no shapes configured")];
        }
        let mut out = vec![ServerMessage::Welcome {
            v: PROTOCOL_VERSION,
            periods: self.config.periods,
        }];
        match self.start_trial(0, mode, condition) {
            Ok(msg) => out.push(msg),
            Err(msg) => return vec![msg],
        }
        out
    }

    fn start_trial(&mut self, index: usize, mode: Mode, condition: String) -> Result<ServerMessage, ServerMessage> {
        let shape = Arc::clone(&self.config.shapes[index]);
        let trial = Trial::new(shape, mode, condition.clone(), self.config.time_limit_ms)
            .map_err(|e| ServerMessage::error(e.to_string()))?;
        self.phase = Phase::Active {
            trial: Box::new(trial),
            index,
            mode,
            condition,
        };
        self.last = None;
        Ok(ServerMessage::Trial {
            index,
            count: self.config.shapes.len(),
            time_limit_ms: self.config.time_limit_ms,
        })
    }

    /// Records a finished trial and moves to the next one or the summary.
    fn finish(&mut self, reason: EndReason, record: TrialRecord) -> Vec<ServerMessage> {
        let correct = record.correct == Some(true);
        self.records.push(record);
        let mut out = vec![ServerMessage::TrialEnd {
            reason: reason.as_str().to_string(),
            correct,
        }];
        let Phase::Active {
            index, mode, condition, ..
        } = std::mem::replace(&mut self.phase, Phase::Done)
        else {
            unreachable!("finish is only called with an active trial");
        };
        let next = index + 1;
        if next < self.config.shapes.len() {
            match self.start_trial(next, mode, condition) {
                Ok(msg) | Err(msg) => out.push(msg),
            }
        } else {
            self.last = None;
            out.push(ServerMessage::SessionSummary {
                trials: self.records.clone(),
                stats: session_stats(&self.records),
            });
        }
        out
    }

    fn on_cursor(&mut self, p: Point, t: u64) -> Vec<ServerMessage> {
        let Phase::Active { trial, .. } = &mut self.phase else {
            return vec![ServerMessage::error("no active trial")];
        };
        if !p.is_finite() {
            return vec![ServerMessage::error("cursor coordinates must be finite")];
        }
        match trial.cursor(p, t) {
            Err(e) => vec![ServerMessage::error(e.to_string())],
            Ok(CursorOutcome::TimedOut(record)) => self.finish(EndReason::Timeout, record),
            Ok(CursorOutcome::Feedback(Feedback::Tactile { state, .. })) => {
                let changed = match &self.last {
                    Some(LastFeedback::Tactile(prev)) => tactile_change_filter(prev, &state),
                    _ => true,
                };
                self.last = Some(LastFeedback::Tactile(state));
                if changed {
                    vec![ServerMessage::Tactile {
                        direction: state.direction,
                        blink: state.blink,
                        on_shape: state.on_shape,
                        t,
                    }]
                } else {
                    Vec::new()
                }
            }
            Ok(CursorOutcome::Feedback(Feedback::Pins { frame, .. })) => {
                let changed = self.last != Some(LastFeedback::Pins(frame));
                self.last = Some(LastFeedback::Pins(frame));
                if changed {
                    vec![ServerMessage::Pins {
                        rows: pin_rows(frame),
                        t,
                    }]
                } else {
                    Vec::new()
                }
            }
        }
    }

    fn on_answer(&mut self, label: &str, confidence: i64, t: Option<u64>) -> Vec<ServerMessage> {
        let Phase::Active { trial, .. } = &mut self.phase else {
            return vec![ServerMessage::error("answer outside an active trial")];
        };
        match trial.answer(label, confidence, t) {
            Ok((reason, record)) => self.finish(reason, record),
            Err(e) => vec![ServerMessage::error(e.to_string())],
        }
    }

    fn on_next_trial(&mut self) -> Vec<ServerMessage> {
        let Phase::Active { trial, .. } = &mut self.phase else {
            return vec![ServerMessage::error("no active trial to skip")];
        };
        match trial.skip() {
            Ok(record) => self.finish(EndReason::Skipped, record),
            Err(e) => vec![ServerMessage::error(e.to_string())],
        }
    }
}

/// Runs one session over a line stream until EOF.
pub fn run_session(config: Arc<SessionConfig>, reader: impl BufRead, mut writer: impl Write) -> io::Result<Session> {
    let mut session = Session::new(config);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for reply in session.handle_line(&line) {
            writer.write_all(reply.to_line().as_bytes())?;
        }
        writer.flush()?;
    }
    Ok(session)
}

/// Accepts connections forever, one thread per connection. A connection
/// whose first line is an HTTP `GET` is answered from `static_dir` instead.
pub fn serve(listener: TcpListener, config: Arc<SessionConfig>, static_dir: Option<PathBuf>) -> io::Result<()> {
    let static_dir = static_dir.map(Arc::new);
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(_) => continue,
        };
        let config = Arc::clone(&config);
        let static_dir = static_dir.clone();
        thread::spawn(move || {
            let _ = handle_connection(stream, config, static_dir.as_deref().map(PathBuf::as_path));
        });
    }
    Ok(())
}

fn handle_connection(stream: TcpStream, config: Arc<SessionConfig>, static_dir: Option<&Path>) -> io::Result<()> {
    let writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut first = String::new();
    if reader.read_line(&mut first)? == 0 {
        return Ok(());
    }
    if first.starts_with("GET ") {
        return serve_static(&first, reader, writer, static_dir);
    }
    let chained = BufReader::new(first.as_bytes().chain(reader));
    run_session(config, chained, writer).map(|_| ())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

/// Maps a request path onto `root`, refusing anything that escapes it.
fn resolve_static(root: &Path, request_path: &str) -> Option<PathBuf> {
    let path = request_path.split(['?', '#']).next().unwrap_or("/");
    let rel = Path::new(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    let mut full = root.join(rel);
    if full.is_dir() {
        full = full.join("index.html");
    }
    full.is_file().then_some(full)
}

fn serve_static(
    request_line: &str,
    mut reader: impl BufRead,
    mut writer: impl Write,
    root: Option<&Path>,
) -> io::Result<()> {
    // Drain headers.
    let mut header = String::new();
    while reader.read_line(&mut header)? > 0 && header.trim() != "" {
        header.clear();
    }
    let target = request_line.split_whitespace().nth(1).unwrap_or("/");
    match root.and_then(|r| resolve_static(r, target)) {
        Some(path) => {
            let body = std::fs::read(&path)?;
            write!(
                writer,
                "HTTP/1.1 200 OK\r\nContent-Type: {}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                content_type(&path),
                body.len()
            )?;
            writer.write_all(&body)?;
        }
        None => {
            let body = b"not found\n";
            write!(
                writer,
                "HTTP/1.1 404 Not Found\r\nContent-Type: text/plain\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                body.len()
            )?;
            writer.write_all(body)?;
        }
    }
    writer.flush()
}
