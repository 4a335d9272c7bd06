//! Synthetic explorers that follow the tactile cue without a human.
//!
//! Each tick the agent feeds its position to the guidance engine and moves
//! one step along the quantized direction it is told, optionally jittered
//! by uniform noise in a disc. When the cue flips to the opposite direction
//! the stride halves; it is kept while the cue repeats and returns to full
//! length on any other cue.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{Point, Shape};
use crate::guidance::{EventKind, GuidanceError, GuidanceEvent, GuidanceState, StepRecord};
use crate::tacton::Direction8;

/// Logical time between agent ticks.
pub const AGENT_TICK_MS: u64 = 8;

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error("step size must be a finite number > 0, got {0}")]
    BadStepSize(f64),
    #[error("noise radius must be a finite number >= 0, got {0}")]
    BadNoise(f64),
    #[error("start point must be finite")]
    BadStart,
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    pub step_size: f64,
    pub noise_radius: f64,
    pub max_steps: u64,
    pub seed: u64,
}

impl AgentConfig {
    /// Noise-free agent with the closure budget `ceil(4 * perimeter / step)`.
    pub fn greedy(shape: &Shape, step_size: f64) -> Self {
        Self {
            step_size,
            noise_radius: 0.0,
            max_steps: closure_budget(shape, step_size),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(AgentError::BadStepSize(self.step_size));
        }
        if !(self.noise_radius.is_finite() && self.noise_radius >= 0.0) {
            return Err(AgentError::BadNoise(self.noise_radius));
        }
        Ok(())
    }
}

pub fn closure_budget(shape: &Shape, step_size: f64) -> u64 {
    (4.0 * shape.perimeter() / step_size).ceil() as u64
}

/// One agent tick: where it was, when, and what the engine answered.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub position: Point,
    pub time_ms: u64,
    pub record: StepRecord,
}

/// Step-by-step follower; [`greedy_follow`] drives it to one lap.
#[derive(Debug, Clone)]
pub struct Follower {
    guidance: GuidanceState,
    position: Point,
    cfg: AgentConfig,
    rng: ChaCha8Rng,
    ticks: u64,
    stride: f64,
    last_move: Option<Direction8>,
}

impl Follower {
    pub fn new(shape: &Shape, start: Point, cfg: AgentConfig) -> Result<Self, AgentError> {
        cfg.validate()?;
        if !start.is_finite() {
            return Err(AgentError::BadStart);
        }
        Ok(Self {
            guidance: GuidanceState::reset(shape.clone()),
            position: start,
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            ticks: 0,
            stride: cfg.step_size,
            last_move: None,
        })
    }

    pub fn guidance(&self) -> &GuidanceState {
        &self.guidance
    }

    pub fn position(&self) -> Point {
        self.position
    }

    /// Queries the engine at the current position, then moves.
    pub fn tick(&mut self) -> Result<Tick, AgentError> {
        let time_ms = self.ticks * AGENT_TICK_MS;
        let here = self.position;
        let out = self.guidance.step(here, time_ms)?;
        let record = StepRecord::from_step(here, time_ms, &out);
        let direction = out.tactile.direction;
        self.stride = match self.last_move {
            Some(d) if d.opposite() == direction => self.stride / 2.0,
            Some(d) if d == direction => self.stride,
            _ => self.cfg.step_size,
        };
        self.last_move = Some(direction);
        let (dx, dy) = direction.unit_vector();
        let mut next = here + Point::new(dx, dy) * self.stride;
        if self.cfg.noise_radius > 0.0 {
            next = next + self.noise();
        }
        self.guidance = out.state;
        self.position = next;
        self.ticks += 1;
        Ok(Tick {
            position: here,
            time_ms,
            record,
        })
    }

    /// Uniform sample from the disc of radius `noise_radius`.
    fn noise(&mut self) -> Point {
        let r = self.cfg.noise_radius * self.rng.random::<f64>().sqrt();
        let theta = std::f64::consts::TAU * self.rng.random::<f64>();
        Point::new(r * theta.cos(), r * theta.sin())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentRun {
    pub trajectory: Vec<Point>,
    pub events: Vec<GuidanceEvent>,
    pub laps: u64,
    /// Session-log lines, one per tick.
    pub records: Vec<StepRecord>,
}

impl AgentRun {
    pub fn vertex_order(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::VertexReached)
            .map(|e| e.segment_index)
            .collect()
    }
}

/// Follows the cue until one lap is complete or `max_steps` ticks elapse.
pub fn greedy_follow(shape: &Shape, start: Point, cfg: &AgentConfig) -> Result<AgentRun, AgentError> {
    let mut follower = Follower::new(shape, start, *cfg)?;
    let mut run = AgentRun::default();
    while (run.trajectory.len() as u64) < cfg.max_steps {
        let tick = follower.tick()?;
        run.trajectory.push(tick.position);
        run.events.extend(tick.record.events.iter().copied());
        run.records.push(tick.record);
        run.laps = follower.guidance().laps_completed();
        if run.laps >= 1 {
            break;
        }
    }
    Ok(run)
}
