//! Non-visual exploration of polygon outlines on a pair of 4×4 pin arrays.
//!
//! The guidance engine leads a cursor around a shape one segment at a time
//! with directional, blink-coded Tactons, while a second array signals
//! whether the cursor is on the outline. A dark-pixel presentation serves as
//! the baseline. Trials, statistics, synthetic followers and a line-JSON
//! session protocol sit on top.

pub mod agent;
pub mod experiment;
pub mod gateway;
pub mod geometry;
pub mod guidance;
pub mod raster;
pub mod shapes;
pub mod stats;
pub mod tacton;
pub mod trial;

pub use agent::{greedy_follow, AgentConfig, AgentRun};
pub use geometry::{
    distance_to_segment, in_target_region, nearest_point_on_segment, on_segment_band, on_shape, Point, Segment, Shape,
    ShapeError,
};
pub use guidance::{
    blink_for_distance, quantize_direction, EventKind, GuidanceError, GuidanceEvent, GuidanceState, StepOutput,
    StepRecord,
};
pub use raster::{rasterize_outline, sample_window, RasterImage};
pub use stats::{summarize, wilcoxon_rank_sum, SummaryStats, TestMethod, WilcoxonResult};
pub use tacton::{
    frame_at, pattern_for_direction, BlinkLevel, BlinkPeriods, Direction8, PinFrame, TactileState, TactonCodec,
};
pub use trial::{error_fraction, run_trial, Mode, TrialRecord};
