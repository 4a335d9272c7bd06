use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::anyhow;
use shapetouch_core::agent::{closure_budget, AgentConfig};
use shapetouch_core::experiment::{compare, condition_report, replay_script, Script};
use shapetouch_core::gateway::{serve, SessionConfig};
use shapetouch_core::guidance::write_jsonl;
use shapetouch_core::raster::rasterize_outline;
use shapetouch_core::shapes::{bundled, bundled_shape, load_dir, CorpusEntry};
use shapetouch_core::trial::{read_trial_log, DEFAULT_TIME_LIMIT_MS};
use shapetouch_core::{greedy_follow, BlinkLevel, BlinkPeriods, Direction8, Point, Shape, TactileState, TactonCodec};

use crate::args::{AgentKind, ExperimentArgs, ExploreArgs, ModeArg, RasterArgs, RenderArgs, ServeArgs, StatsArgs};

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or input files: exit 2.
    Usage(anyhow::Error),
    /// Anything that goes wrong while running: exit 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub type Outcome = Result<(), Failure>;

pub fn usage(msg: impl Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn runtime(msg: impl Display) -> Failure {
    Failure::Runtime(anyhow!("{msg}"))
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| usage(format!("missing required --{flag}")))
}

/// A path that exists is loaded as a shape file; otherwise a bundled shape
/// of that name is used if there is one.
fn load_shape(path: &Path) -> Result<Shape, Failure> {
    if !path.exists() {
        if let Some(shape) = path.to_str().and_then(bundled_shape) {
            return Ok(shape);
        }
    }
    Shape::load(path).map_err(usage)
}

fn load_corpus(dir: Option<&Path>) -> Result<Vec<CorpusEntry>, Failure> {
    let corpus = match dir {
        Some(dir) => load_dir(dir).map_err(usage)?,
        None => bundled(),
    };
    if corpus.is_empty() {
        let dir = dir.map_or_else(String::new, |d| format!(" in {}", d.display()));
        return Err(usage(format!("no shapes{dir}")));
    }
    Ok(corpus)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("cannot create {}: {e}", path.display())))
}

fn write_failed(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| runtime(format!("cannot write {}: {e}", path.display()))
}

pub fn explore(args: ExploreArgs, out: &mut impl Write) -> Outcome {
    let shape = load_shape(&required(args.shape, "shape")?)?;
    let t = shape.thickness();
    let agent = args.agent.unwrap_or(AgentKind::Greedy);
    let step = args.step.unwrap_or(t / 2.0);
    let noise = match agent {
        AgentKind::Greedy => match args.noise {
            Some(r) if r != 0.0 => return Err(usage("the greedy agent takes no --noise; use --agent noisy")),
            _ => 0.0,
        },
        AgentKind::Noisy => args.noise.unwrap_or(t / 4.0),
    };
    if !(step.is_finite() && step > 0.0) {
        return Err(usage(format!("--step must be > 0, got {step}")));
    }
    let budget = closure_budget(&shape, step);
    let cfg = AgentConfig {
        step_size: step,
        noise_radius: noise,
        max_steps: args.max_steps.unwrap_or(match agent {
            AgentKind::Greedy => budget,
            AgentKind::Noisy => budget.saturating_mul(2),
        }),
        seed: args.seed.unwrap_or(0),
    };
    let start = args.start.map_or(shape.vertices()[0], |[x, y]| Point::new(x, y));
    cfg.validate().map_err(usage)?;
    let run = greedy_follow(&shape, start, &cfg).map_err(runtime)?;
    if let Some(path) = &args.log {
        let mut w = create(path)?;
        write_jsonl(&mut w, &run.records)
            .and_then(|_| w.flush())
            .map_err(write_failed(path))?;
    }
    writeln!(out, "laps: {}", run.laps).map_err(runtime)?;
    writeln!(out, "steps: {}", run.trajectory.len()).map_err(runtime)?;
    Ok(())
}

pub fn render(args: RenderArgs, periods: BlinkPeriods, out: &mut impl Write) -> Outcome {
    let direction: Direction8 = required(args.direction, "direction")?.parse().map_err(usage)?;
    let blink = BlinkLevel::try_from(args.blink.unwrap_or(1)).map_err(usage)?;
    let state = TactileState {
        direction,
        blink,
        on_shape: args.on_shape,
    };
    let codec = TactonCodec {
        periods,
        ..TactonCodec::default()
    };
    let (index, middle) = codec.frame_at(&state, args.at_ms.unwrap_or(0));
    writeln!(out, "index:\n{index}\n\nmiddle:\n{middle}").map_err(runtime)
}

pub fn experiment(args: ExperimentArgs, out: &mut impl Write) -> Outcome {
    let script_path = required(args.script, "script")?;
    let text = std::fs::read_to_string(&script_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", script_path.display())))?;
    let script: Script = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", script_path.display())))?;
    let shapes: Vec<Shape> = load_corpus(args.shapes.as_deref())?
        .into_iter()
        .map(|e| e.shape)
        .collect();
    let mode = args.mode.unwrap_or(ModeArg::Guidance).into();
    let records = replay_script(&script, &shapes, mode).map_err(usage)?;
    if let Some(path) = &args.log {
        let mut w = create(path)?;
        write_jsonl(&mut w, &records)
            .and_then(|_| w.flush())
            .map_err(write_failed(path))?;
    }
    let report = condition_report(&records, "script").map_err(usage)?;
    write!(out, "{report}").map_err(runtime)
}

fn read_log(path: &Path) -> Result<Vec<shapetouch_core::TrialRecord>, Failure> {
    let file = File::open(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    read_trial_log(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn stats(args: StatsArgs, out: &mut impl Write) -> Outcome {
    let a = read_log(&required(args.a, "a")?)?;
    let b = read_log(&required(args.b, "b")?)?;
    let comparison = compare(&a, &b).map_err(usage)?;
    write!(out, "{comparison}").map_err(runtime)
}

fn parse_addr(addr: &str) -> Result<SocketAddr, Failure> {
    let bad = |why: &str| usage(format!("invalid listen address {addr:?}: {why}"));
    let (host, port) = addr.rsplit_once(':').ok_or_else(|| bad("expected HOST:PORT"))?;
    let port: u16 = port.parse().map_err(|_| bad("port must be 0-65535"))?;
    let host = host.trim_start_matches('[').trim_end_matches(']');
    (host, port)
        .to_socket_addrs()
        .map_err(|e| bad(&e.to_string()))?
        .next()
        .ok_or_else(|| bad("host did not resolve"))
}

pub fn serve_cmd(args: ServeArgs, periods: BlinkPeriods, out: &mut impl Write) -> Outcome {
    let addr = parse_addr(args.addr.as_deref().unwrap_or("127.0.0.1:8080"))?;
    let mut corpus = load_corpus(args.shapes.as_deref())?;
    // Practice shapes come first, as in the study protocol.
    corpus.sort_by_key(|e| !e.training);
    let static_dir: Option<PathBuf> = args.static_dir;
    if let Some(dir) = &static_dir {
        if !dir.is_dir() {
            return Err(usage(format!("--static {} is not a directory", dir.display())));
        }
    }
    let time_limit_ms = args.time_limit_ms.unwrap_or(DEFAULT_TIME_LIMIT_MS);
    if time_limit_ms == 0 {
        return Err(usage("--time-limit-ms must be > 0"));
    }
    let mut config = SessionConfig::new(corpus.into_iter().map(|e| e.shape).collect());
    config.time_limit_ms = time_limit_ms;
    config.periods = periods;
    let listener = TcpListener::bind(addr).map_err(|e| runtime(format!("cannot listen on {addr}: {e}")))?;
    let local = listener.local_addr().map_err(runtime)?;
    writeln!(out, "listening on {local}")
        .and_then(|_| out.flush())
        .map_err(runtime)?;
    serve(listener, Arc::new(config), static_dir).map_err(runtime)
}

pub fn raster(args: RasterArgs, out: &mut impl Write) -> Outcome {
    let shape = load_shape(&required(args.shape, "shape")?)?;
    let out_path = required(args.out, "out")?;
    let cell = args.cell.unwrap_or(shape.thickness());
    let image = rasterize_outline(&shape, cell).map_err(usage)?;
    let mut w = create(&out_path)?;
    image
        .write_pgm(&mut w)
        .and_then(|_| w.flush())
        .map_err(write_failed(&out_path))?;
    writeln!(
        out,
        "{}x{} pixels, {} dark",
        image.width(),
        image.height(),
        image.dark_count()
    )
    .map_err(runtime)
}
