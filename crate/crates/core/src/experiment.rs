//! Scripted participants and the two-condition comparison report.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentConfig, AgentError, Follower, AGENT_TICK_MS};
use crate::geometry::{Point, Shape, WORKSPACE_SIZE};
use crate::stats::{summarize, wilcoxon_rank_sum, StatsError, SummaryStats, WilcoxonResult};
use crate::trial::{
    error_fraction, run_trial, ErrorFraction, Mode, TrialError, TrialInput, TrialRecord, DEFAULT_TIME_LIMIT_MS,
};

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error("script trial {index}: unknown shape {name:?}")]
    UnknownShape { index: usize, name: String },
    #[error("script trial {index}: an answer needs both confidence and at_ms")]
    IncompleteAnswer { index: usize },
    #[error("script trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: TrialError,
    },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("{side} log is empty")]
    EmptyLog { side: &'static str },
    #[error("{side} log mixes {what}")]
    MixedLog { side: &'static str, what: &'static str },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

fn default_limit() -> u64 {
    DEFAULT_TIME_LIMIT_MS
}

/// A scripted participant: which shapes to explore, what to answer and when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Script {
    pub condition: String,
    #[serde(default = "default_limit")]
    pub time_limit_ms: u64,
    #[serde(default)]
    pub seed: u64,
    pub trials: Vec<ScriptedTrial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTrial {
    pub shape: String,
    #[serde(default)]
    pub answer: Option<String>,
    #[serde(default)]
    pub confidence: Option<i64>,
    #[serde(default)]
    pub at_ms: Option<u64>,
}

/// Cursor samples of a seeded follower starting at the workspace center,
/// one per agent tick, strictly before `until_ms`.
pub fn participant_motion(shape: &Shape, seed: u64, until_ms: u64) -> Result<Vec<TrialInput>, AgentError> {
    let t = shape.thickness();
    let cfg = AgentConfig {
        step_size: t / 2.0,
        noise_radius: t / 4.0,
        max_steps: u64::MAX,
        seed,
    };
    let center = Point::new(WORKSPACE_SIZE / 2.0, WORKSPACE_SIZE / 2.0);
    let mut follower = Follower::new(shape, center, cfg)?;
    let ticks = until_ms.div_ceil(AGENT_TICK_MS);
    let mut out = Vec::with_capacity(ticks as usize);
    for _ in 0..ticks {
        let tick = follower.tick()?;
        out.push(TrialInput::Cursor {
            x: tick.position.x,
            y: tick.position.y,
            t: tick.time_ms,
        });
    }
    Ok(out)
}

/// Replays `script` against `shapes` in the given presentation mode.
pub fn replay_script(script: &Script, shapes: &[Shape], mode: Mode) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut records = Vec::with_capacity(script.trials.len());
    for (index, st) in script.trials.iter().enumerate() {
        let shape = shapes
            .iter()
            .find(|s| s.name() == st.shape)
            .ok_or_else(|| ExperimentError::UnknownShape {
                index,
                name: st.shape.clone(),
            })?;
        let answer = match (&st.answer, st.confidence, st.at_ms) {
            (Some(label), Some(confidence), Some(at)) => Some((label.clone(), confidence, at)),
            (None, _, _) => None,
            _ => return Err(ExperimentError::IncompleteAnswer { index }),
        };
        let until = answer
            .as_ref()
            .map_or(script.time_limit_ms, |(_, _, at)| (*at).min(script.time_limit_ms));
        let mut input = participant_motion(shape, script.seed.wrapping_add(index as u64), until)?;
        if let Some((label, confidence, t)) = answer {
            input.push(TrialInput::Answer { label, confidence, t });
        }
        let run = run_trial(
            Arc::new(shape.clone()),
            mode,
            &script.condition,
            input,
            script.time_limit_ms,
        )
        .map_err(|source| ExperimentError::Trial { index, source })?;
        records.push(run.record);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: String,
    pub mode: Mode,
    pub errors: ErrorFraction,
    /// Response times in seconds, over all trials.
    pub time_s: SummaryStats,
    /// Confidence over answered trials; absent when nobody answered.
    pub confidence: Option<SummaryStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub a: ConditionReport,
    pub b: ConditionReport,
    pub time_test: WilcoxonResult,
    pub confidence_test: Option<WilcoxonResult>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn times(trials: &[TrialRecord]) -> Vec<f64> {
    sorted(trials.iter().map(|t| t.response_time_ms as f64 / 1000.0).collect())
}

fn confidences(trials: &[TrialRecord]) -> Vec<f64> {
    sorted(trials.iter().filter_map(|t| t.confidence.map(f64::from)).collect())
}

/// Summary of one single-condition trial log.
pub fn condition_report(trials: &[TrialRecord], side: &'static str) -> Result<ConditionReport, ExperimentError> {
    let first = trials.first().ok_or(ExperimentError::EmptyLog { side })?;
    if trials.iter().any(|t| t.condition != first.condition) {
        return Err(ExperimentError::MixedLog {
            side,
            what: "conditions",
        });
    }
    if trials.iter().any(|t| t.mode != first.mode) {
        return Err(ExperimentError::MixedLog { side, what: "modes" });
    }
    let conf = confidences(trials);
    Ok(ConditionReport {
        condition: first.condition.clone(),
        mode: first.mode,
        errors: error_fraction(trials).map_err(|_| ExperimentError::EmptyLog { side })?,
        time_s: summarize(&times(trials))?,
        confidence: if conf.is_empty() { None } else { Some(summarize(&conf)?) },
    })
}

/// Compares two single-condition trial logs. Values are sorted before
/// aggregation so the result does not depend on record order.
pub fn compare(a: &[TrialRecord], b: &[TrialRecord]) -> Result<Comparison, ExperimentError> {
    let ra = condition_report(a, "first")?;
    let rb = condition_report(b, "second")?;
    let time_test = wilcoxon_rank_sum(&times(a), &times(b))?;
    let (ca, cb) = (confidences(a), confidences(b));
    let confidence_test = if ca.is_empty() || cb.is_empty() {
        None
    } else {
        Some(wilcoxon_rank_sum(&ca, &cb)?)
    };
    Ok(Comparison {
        a: ra,
        b: rb,
        time_test,
        confidence_test,
    })
}

/// Aggregate attached to a session summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    /// Rendered as `errors/total`.
    pub errors: String,
    pub time_s: Option<SummaryStats>,
    pub confidence: Option<SummaryStats>,
}

/// Single-condition statistics; an empty list gives `0/0` and no summaries.
pub fn session_stats(trials: &[TrialRecord]) -> SessionStats {
    let errors = error_fraction(trials).map_or_else(|_| "0/0".to_string(), |e| e.to_string());
    SessionStats {
        errors,
        time_s: summarize(&times(trials)).ok(),
        confidence: summarize(&confidences(trials)).ok(),
    }
}

fn fmt_sd(sd: Option<f64>, unit: &str) -> String {
    match sd {
        Some(sd) => format!("sd={sd:.2}{unit}"),
        None => "sd=NA".to_string(),
    }
}

fn fmt_time(s: &SummaryStats) -> String {
    format!("{:.2}s ({})", s.mean, fmt_sd(s.sd, "s"))
}

fn fmt_conf(s: &Option<SummaryStats>) -> String {
    match s {
        Some(s) => format!("{:.2}/7 ({})", s.mean, fmt_sd(s.sd, "")),
        None => "NA".to_string(),
    }
}

/// `W` without a trailing `.0`; rank sums move in halves.
pub fn fmt_w(w: f64) -> String {
    if w.fract() == 0.0 {
        format!("{w:.0}")
    } else {
        format!("{w}")
    }
}

fn fmt_test(t: &WilcoxonResult) -> String {
    format!("W={}, p={:.2}", fmt_w(t.w), t.p_value)
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "condition: {} [{}] (n={})",
            self.condition, self.mode, self.errors.total
        )?;
        writeln!(f, "errors: {}", self.errors)?;
        writeln!(f, "time: {}", fmt_time(&self.time_s))?;
        writeln!(f, "confidence: {}", fmt_conf(&self.confidence))
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (&self.a, &self.b);
        writeln!(
            f,
            "conditions: {} [{}] (n={}) vs {} [{}] (n={})",
            a.condition, a.mode, a.errors.total, b.condition, b.mode, b.errors.total
        )?;
        writeln!(f, "errors: {} vs {}", a.errors, b.errors)?;
        writeln!(f, "time: {} vs {}", fmt_time(&a.time_s), fmt_time(&b.time_s))?;
        writeln!(
            f,
            "confidence: {} vs {}",
            fmt_conf(&a.confidence),
            fmt_conf(&b.confidence)
        )?;
        writeln!(f, "time test: {}", fmt_test(&self.time_test))?;
        match &self.confidence_test {
            Some(t) => writeln!(f, "confidence test: {}", fmt_test(t)),
            None => writeln!(f, "confidence test: NA"),
        }
    }
}
