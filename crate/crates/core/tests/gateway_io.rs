use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use shapetouch_core::agent::Follower;
use shapetouch_core::gateway::{serve, tactile_change_filter, ServerMessage, Session, SessionConfig};
use shapetouch_core::shapes::bundled_shape;
use shapetouch_core::{AgentConfig, GuidanceState, Point};

const HELLO: &str = r#"{"type":"hello","v":1,"mode":"guidance","condition":"A"}"#;

fn cursor_line(p: Point, t: u64) -> String {
    serde_json::json!({"type": "cursor", "x": p.x, "y": p.y, "t": t}).to_string()
}

#[test]
fn tactile_messages_equal_offline_changes() {
    let shape = bundled_shape("pentagon").unwrap();
    let cfg = AgentConfig {
        step_size: 4.0,
        noise_radius: 3.0,
        max_steps: 10_000,
        seed: 3,
    };
    let mut follower = Follower::new(&shape, Point::new(500.0, 500.0), cfg).unwrap();
    let ticks: Vec<_> = (0..10_000).map(|_| follower.tick().unwrap()).collect();

    let mut state = GuidanceState::reset(shape.clone());
    let mut prev = None;
    let mut expected = Vec::new();
    for tick in &ticks {
        let out = state.step(tick.position, tick.time_ms).unwrap();
        if prev.is_none_or(|p| tactile_change_filter(&p, &out.tactile)) {
            expected.push((out.tactile, tick.time_ms));
        }
        prev = Some(out.tactile);
        state = out.state;
    }

    let mut session = Session::new(Arc::new(SessionConfig::new(vec![shape])));
    session.handle_line(HELLO);
    let mut got = Vec::new();
    for tick in &ticks {
        for msg in session.handle_line(&cursor_line(tick.position, tick.time_ms)) {
            match msg {
                ServerMessage::Tactile {
                    direction,
                    blink,
                    on_shape,
                    t,
                } => got.push((
                    shapetouch_core::TactileState {
                        direction,
                        blink,
                        on_shape,
                    },
                    t,
                )),
                other => panic!("unexpected {other:?}"),
            }
        }
    }
    assert!(expected.len() > 10);
    assert_eq!(got, expected);
}

#[test]
fn idle_cursor_is_silent() {
    let shape = bundled_shape("square").unwrap();
    let mut session = Session::new(Arc::new(SessionConfig::new(vec![shape])));
    session.handle_line(HELLO);
    assert_eq!(session.handle_line(&cursor_line(Point::new(450.0, 305.0), 0)).len(), 1);
    for t in 1..1000 {
        assert!(session
            .handle_line(&cursor_line(Point::new(450.0, 305.0), t * 16))
            .is_empty());
    }
}

fn start_server(static_dir: Option<std::path::PathBuf>) -> std::net::SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let shapes = vec![bundled_shape("square").unwrap(), bundled_shape("triangle").unwrap()];
    let config = Arc::new(SessionConfig::new(shapes));
    thread::spawn(move || serve(listener, config, static_dir));
    addr
}

#[test]
fn socket_session_in_order() {
    let addr = start_server(None);
    let stream = TcpStream::connect(addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut writer = stream;
    let script = [
        HELLO.to_string(),
        cursor_line(Point::new(450.0, 305.0), 100),
        r#"{"type":"answer","label":"square","confidence":6,"t":5100}"#.to_string(),
        r#"{"type":"next_trial"}"#.to_string(),
    ];
    for line in &script {
        writeln!(writer, "{line}").unwrap();
    }
    let mut kinds = Vec::new();
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line).unwrap() == 0 {
            break;
        }
        let msg: ServerMessage = serde_json::from_str(&line).unwrap();
        let done = matches!(msg, ServerMessage::SessionSummary { .. });
        kinds.push(msg);
        if done {
            break;
        }
    }
    let names: Vec<&str> = kinds
        .iter()
        .map(|m| match m {
            ServerMessage::Welcome { .. } => "welcome",
            ServerMessage::Trial { .. } => "trial",
            ServerMessage::Tactile { .. } => "tactile",
            ServerMessage::TrialEnd { .. } => "trial_end",
            ServerMessage::SessionSummary { .. } => "session_summary",
            _ => "other",
        })
        .collect();
    assert_eq!(
        names,
        [
            "welcome",
            "trial",
            "tactile",
            "trial_end",
            "trial",
            "trial_end",
            "session_summary"
        ]
    );
    let ServerMessage::SessionSummary { trials, stats } = kinds.last().unwrap() else {
        unreachable!()
    };
    assert_eq!(trials.len(), 2);
    assert_eq!(trials[0].response_time_ms, 5000);
    assert_eq!(trials[0].correct, Some(true));
    assert_eq!(stats.errors, "1/2");
}

fn http_get(addr: std::net::SocketAddr, path: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    write!(stream, "GET {path} HTTP/1.1\r\nHost: x\r\n\r\n").unwrap();
    let mut body = String::new();
    stream.read_to_string(&mut body).unwrap();
    body
}

#[test]
fn static_files_over_same_port() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>hi</p>").unwrap();
    let addr = start_server(Some(dir.path().to_path_buf()));
    let ok = http_get(addr, "/");
    assert!(ok.starts_with("HTTP/1.1 200"), "{ok}");
    assert!(ok.ends_with("<p>hi</p>"));
    assert!(http_get(addr, "/../etc/passwd").starts_with("HTTP/1.1 404"));
    assert!(http_get(addr, "/missing.js").starts_with("HTTP/1.1 404"));
}
