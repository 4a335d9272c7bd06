//! Command-line flags and the matching config-file sections.
//!
//! Every subcommand's flags are optional at parse time so that values can
//! also come from `--config`; a flag always wins over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use shapetouch_core::BlinkPeriods;

#[derive(Debug, Parser)]
#[command(
    name = "shapetouch",
    version,
    about = "Tactile shape exploration: agents, Tactons, experiments, statistics"
)]
pub struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a synthetic follower around a shape and log every step.
    Explore(ExploreArgs),
    /// Print the two 4x4 pin frames for a tactile state at a given time.
    Render(RenderArgs),
    /// Replay a scripted participant over a shape corpus.
    Experiment(ExperimentArgs),
    /// Compare two trial logs.
    Stats(StatsArgs),
    /// Serve the line-JSON session protocol (and optionally static files).
    Serve(ServeArgs),
    /// Rasterize a shape outline to a PGM image.
    Raster(RasterArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Greedy,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Guidance,
    Pixels,
}

impl From<ModeArg> for shapetouch_core::Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Guidance => shapetouch_core::Mode::Guidance,
            ModeArg::Pixels => shapetouch_core::Mode::Pixels,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreArgs {
    /// Shape file, or the name of a bundled shape.
    #[arg(long)]
    pub shape: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub agent: Option<AgentKind>,
    /// Step length per tick [default: thickness / 2].
    #[arg(long)]
    pub step: Option<f64>,
    /// Noise disc radius for the noisy agent [default: thickness / 4].
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tick budget [default: ceil(4 * perimeter / step), doubled for the noisy agent].
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Start position as `X,Y` [default: vertex 0].
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub start: Option<[f64; 2]>,
    /// Session log (line-delimited JSON, one record per tick).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderArgs {
    /// One of E, NE, N, NW, W, SW, S, SE.
    #[arg(long)]
    pub direction: Option<String>,
    /// 1 = slow, 2 = medium, 3 = fast.
    #[arg(long)]
    pub blink: Option<u8>,
    #[arg(long)]
    pub on_shape: bool,
    #[arg(long)]
    pub at_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentArgs {
    /// Directory of shape files [default: the bundled corpus].
    #[arg(long)]
    pub shapes: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Participant script (JSON).
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Trial log output (line-delimited JSON).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsArgs {
    /// Trial log of the first condition.
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Trial log of the second condition.
    #[arg(long)]
    pub b: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeArgs {
    /// Listen address `HOST:PORT` [default: 127.0.0.1:8080].
    #[arg(long)]
    pub addr: Option<String>,
    /// Directory of shape files [default: the bundled corpus].
    #[arg(long)]
    pub shapes: Option<PathBuf>,
    /// Directory served to plain HTTP GET requests.
    #[arg(long = "static")]
    #[serde(rename = "static")]
    pub static_dir: Option<PathBuf>,
    #[arg(long)]
    pub time_limit_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RasterArgs {
    /// Shape file, or the name of a bundled shape.
    #[arg(long)]
    pub shape: Option<PathBuf>,
    /// Workspace units per pixel [default: the shape's thickness].
    #[arg(long)]
    pub cell: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected X,Y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y: {e}"))?;
    Ok([x, y])
}

/// Contents of a `--config` file. Relative paths are resolved against the
/// file's directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub periods: Option<BlinkPeriods>,
    pub explore: ExploreArgs,
    pub render: RenderArgs,
    pub experiment: ExperimentArgs,
    pub stats: StatsArgs,
    pub serve: ServeArgs,
    pub raster: RasterArgs,
}

fn rebase(base: &Path, path: &mut Option<PathBuf>) {
    if let Some(p) = path {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
}

impl ConfigFile {
    pub fn rebase_paths(&mut self, base: &Path) {
        rebase(base, &mut self.explore.shape);
        rebase(base, &mut self.explore.log);
        rebase(base, &mut self.experiment.shapes);
        rebase(base, &mut self.experiment.script);
        rebase(base, &mut self.experiment.log);
        rebase(base, &mut self.stats.a);
        rebase(base, &mut self.stats.b);
        rebase(base, &mut self.serve.shapes);
        rebase(base, &mut self.serve.static_dir);
        rebase(base, &mut self.raster.shape);
        rebase(base, &mut self.raster.out);
    }
}

/// Fills every unset field of `$flags` from `$file`.
macro_rules! fill {
    ($flags:ident, $file:ident; $($field:ident),+) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )+
    };
}

impl ExploreArgs {
    pub fn or(mut self, file: ExploreArgs) -> Self {
        fill!(self, file; shape, agent, step, noise, seed, max_steps, start, log);
        self
    }
}

impl RenderArgs {
    pub fn or(mut self, file: RenderArgs) -> Self {
        fill!(self, file; direction, blink, at_ms);
        self.on_shape |= file.on_shape;
        self
    }
}

impl ExperimentArgs {
    pub fn or(mut self, file: ExperimentArgs) -> Self {
        fill!(self, file; shapes, mode, script, log);
        self
    }
}

impl StatsArgs {
    pub fn or(mut self, file: StatsArgs) -> Self {
        fill!(self, file; a, b);
        self
    }
}

impl ServeArgs {
    pub fn or(mut self, file: ServeArgs) -> Self {
        fill!(self, file; addr, shapes, static_dir, time_limit_ms);
        self
    }
}

impl RasterArgs {
    pub fn or(mut self, file: RasterArgs) -> Self {
        fill!(self, file; shape, cell, out);
        self
    }
}
