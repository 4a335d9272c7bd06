//! Timed shape-recognition trials and their records.
//!
//! A [`Trial`] drives one presentation engine (guidance Tactons or the
//! dark-pixel window) from timestamped cursor samples and closes when the
//! participant answers or the time limit passes. Both the headless harness
//! and the network gateway run trials through this type.

use std::fmt;
use std::io::BufRead;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{on_shape, Point, Shape};
use crate::guidance::{GuidanceError, GuidanceEvent, GuidanceState};
use crate::raster::{rasterize_outline, sample_window, RasterError, RasterImage};
use crate::tacton::{PinFrame, TactileState};

/// Three minutes per shape.
pub const DEFAULT_TIME_LIMIT_MS: u64 = 180_000;

pub const CONFIDENCE_RANGE: std::ops::RangeInclusive<u8> = 1..=7;

#[derive(Debug, Error, PartialEq)]
pub enum TrialError {
    #[error("confidence must be between 1 and 7, got {0}")]
    BadConfidence(i64),
    #[error("answer label is empty")]
    EmptyLabel,
    #[error("time limit must be > 0")]
    BadTimeLimit,
    #[error("trial already finished")]
    Finished,
    #[error(transparent)]
    Guidance(#[from] GuidanceError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("invalid trial record: {0}")]
    InvalidRecord(String),
    #[error("trial log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("no trials")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Guidance,
    Pixels,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Guidance => "guidance",
            Mode::Pixels => "pixels",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub shape_id: String,
    pub mode: Mode,
    pub condition: String,
    pub answer: Option<String>,
    pub correct: Option<bool>,
    pub response_time_ms: u64,
    pub confidence: Option<u8>,
    pub timed_out: bool,
}

impl TrialRecord {
    /// Checks the record's internal consistency; `time_limit_ms` is checked when known.
    pub fn validate(&self, time_limit_ms: Option<u64>) -> Result<(), TrialError> {
        let bad = |m: &str| Err(TrialError::InvalidRecord(m.to_string()));
        if self.timed_out && self.answer.is_some() {
            return bad("timed-out trial has an answer");
        }
        if self.confidence.is_some() != self.answer.is_some() {
            return bad("confidence must be present exactly when an answer is");
        }
        if self.correct.is_some() != self.answer.is_some() {
            return bad("correctness must be present exactly when an answer is");
        }
        if let Some(c) = self.confidence {
            if !CONFIDENCE_RANGE.contains(&c) {
                return Err(TrialError::BadConfidence(c.into()));
            }
        }
        if let Some(limit) = time_limit_ms {
            if self.response_time_ms > limit {
                return bad("response time exceeds the time limit");
            }
        }
        Ok(())
    }

    /// Timeouts and skipped trials count as errors.
    pub fn is_error(&self) -> bool {
        self.timed_out || self.correct != Some(true)
    }
}

/// Case-insensitive, whitespace-trimmed label match.
pub fn label_matches(label: &str, shape_id: &str) -> bool {
    label.trim().to_lowercase() == shape_id.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq)]
enum Presentation {
    Guidance(GuidanceState),
    Pixels(Arc<RasterImage>),
}

/// What the participant feels after one cursor sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Feedback {
    Tactile {
        state: TactileState,
        events: Vec<GuidanceEvent>,
    },
    Pins {
        frame: PinFrame,
        on_shape: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CursorOutcome {
    Feedback(Feedback),
    TimedOut(TrialRecord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndReason {
    Answered,
    Timeout,
    Skipped,
}

impl EndReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EndReason::Answered => "answered",
            EndReason::Timeout => "timeout",
            EndReason::Skipped => "skipped",
        }
    }
}

/// One shape-recognition trial.
///
/// Elapsed time is measured from the first timestamp the trial sees.
#[derive(Debug, Clone)]
pub struct Trial {
    shape: Arc<Shape>,
    mode: Mode,
    condition: String,
    time_limit_ms: u64,
    origin_ms: Option<u64>,
    latest_ms: Option<u64>,
    presentation: Presentation,
    record: Option<TrialRecord>,
}

impl Trial {
    pub fn new(
        shape: Arc<Shape>,
        mode: Mode,
        condition: impl Into<String>,
        time_limit_ms: u64,
    ) -> Result<Self, TrialError> {
        if time_limit_ms == 0 {
            return Err(TrialError::BadTimeLimit);
        }
        let presentation = match mode {
            Mode::Guidance => Presentation::Guidance(GuidanceState::reset(Arc::clone(&shape))),
            Mode::Pixels => Presentation::Pixels(Arc::new(rasterize_outline(&shape, shape.thickness())?)),
        };
        Ok(Self {
            shape,
            mode,
            condition: condition.into(),
            time_limit_ms,
            origin_ms: None,
            latest_ms: None,
            presentation,
            record: None,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn time_limit_ms(&self) -> u64 {
        self.time_limit_ms
    }

    pub fn record(&self) -> Option<&TrialRecord> {
        self.record.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.record.is_some()
    }

    /// Registers a timestamp, returning elapsed trial time.
    fn clock(&mut self, t: u64) -> u64 {
        let origin = *self.origin_ms.get_or_insert(t);
        self.latest_ms = Some(self.latest_ms.map_or(t, |l| l.max(t)));
        t.saturating_sub(origin)
    }

    fn close(&mut self, record: TrialRecord) -> TrialRecord {
        self.record = Some(record.clone());
        record
    }

    fn unanswered(&self, response_time_ms: u64, timed_out: bool) -> TrialRecord {
        TrialRecord {
            shape_id: self.shape.name().to_string(),
            mode: self.mode,
            condition: self.condition.clone(),
            answer: None,
            correct: None,
            response_time_ms,
            confidence: None,
            timed_out,
        }
    }

    pub fn timeout(&mut self) -> Result<TrialRecord, TrialError> {
        if self.is_finished() {
            return Err(TrialError::Finished);
        }
        let record = self.unanswered(self.time_limit_ms, true);
        Ok(self.close(record))
    }

    /// Abandons the trial without an answer (counted as an error).
    pub fn skip(&mut self) -> Result<TrialRecord, TrialError> {
        if self.is_finished() {
            return Err(TrialError::Finished);
        }
        let elapsed = match (self.origin_ms, self.latest_ms) {
            (Some(o), Some(l)) => (l - o).min(self.time_limit_ms),
            _ => 0,
        };
        let record = self.unanswered(elapsed, false);
        Ok(self.close(record))
    }

    pub fn cursor(&mut self, p: Point, t: u64) -> Result<CursorOutcome, TrialError> {
        if self.is_finished() {
            return Err(TrialError::Finished);
        }
        if self.clock(t) >= self.time_limit_ms {
            return Ok(CursorOutcome::TimedOut(self.timeout()?));
        }
        let feedback = match &mut self.presentation {
            Presentation::Guidance(state) => {
                let out = state.step(p, t)?;
                *state = out.state;
                Feedback::Tactile {
                    state: out.tactile,
                    events: out.events,
                }
            }
            Presentation::Pixels(image) => Feedback::Pins {
                frame: sample_window(image, p),
                on_shape: on_shape(p, &self.shape),
            },
        };
        Ok(CursorOutcome::Feedback(feedback))
    }

    /// Closes the trial with an answer. Without a timestamp the latest cursor
    /// time is used. Answers arriving after the limit close it as a timeout.
    pub fn answer(
        &mut self,
        label: &str,
        confidence: i64,
        t: Option<u64>,
    ) -> Result<(EndReason, TrialRecord), TrialError> {
        if self.is_finished() {
            return Err(TrialError::Finished);
        }
        if label.trim().is_empty() {
            return Err(TrialError::EmptyLabel);
        }
        let confidence = u8::try_from(confidence)
            .ok()
            .filter(|c| CONFIDENCE_RANGE.contains(c))
            .ok_or(TrialError::BadConfidence(confidence))?;
        let elapsed = match t.or(self.latest_ms) {
            Some(t) => self.clock(t),
            None => 0,
        };
        if elapsed >= self.time_limit_ms {
            return Ok((EndReason::Timeout, self.timeout()?));
        }
        let record = TrialRecord {
            shape_id: self.shape.name().to_string(),
            mode: self.mode,
            condition: self.condition.clone(),
            answer: Some(label.to_string()),
            correct: Some(label_matches(label, self.shape.name())),
            response_time_ms: elapsed,
            confidence: Some(confidence),
            timed_out: false,
        };
        Ok((EndReason::Answered, self.close(record)))
    }
}

/// Headless participant input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrialInput {
    Cursor { x: f64, y: f64, t: u64 },
    Answer { label: String, confidence: i64, t: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub record: TrialRecord,
    pub feedback: Vec<Feedback>,
}

/// Runs one trial over scripted input; running out of input without an
/// answer counts as a timeout.
pub fn run_trial(
    shape: Arc<Shape>,
    mode: Mode,
    condition: &str,
    input: impl IntoIterator<Item = TrialInput>,
    time_limit_ms: u64,
) -> Result<TrialRun, TrialError> {
    let mut trial = Trial::new(shape, mode, condition, time_limit_ms)?;
    let mut feedback = Vec::new();
    for item in input {
        match item {
            TrialInput::Cursor { x, y, t } => match trial.cursor(Point::new(x, y), t)? {
                CursorOutcome::Feedback(f) => feedback.push(f),
                CursorOutcome::TimedOut(record) => return Ok(TrialRun { record, feedback }),
            },
            TrialInput::Answer { label, confidence, t } => {
                let (_, record) = trial.answer(&label, confidence, Some(t))?;
                return Ok(TrialRun { record, feedback });
            }
        }
    }
    let record = trial.timeout()?;
    Ok(TrialRun { record, feedback })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorFraction {
    pub errors: usize,
    pub total: usize,
}

impl fmt::Display for ErrorFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.errors, self.total)
    }
}

pub fn error_fraction(trials: &[TrialRecord]) -> Result<ErrorFraction, TrialError> {
    if trials.is_empty() {
        return Err(TrialError::Empty);
    }
    Ok(ErrorFraction {
        errors: trials.iter().filter(|t| t.is_error()).count(),
        total: trials.len(),
    })
}

/// Reads a line-delimited trial log, validating each record. Blank lines are skipped.
pub fn read_trial_log(reader: impl BufRead) -> Result<Vec<TrialRecord>, TrialError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TrialError::Log {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrialRecord = serde_json::from_str(&line).map_err(|e| TrialError::Log {
            line: i + 1,
            message: e.to_string(),
        })?;
        record.validate(None).map_err(|e| TrialError::Log {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}
