//! Segment-by-segment guidance around a shape outline.
//!
//! The engine keeps a current segment. Inside that segment's band the cue
//! points at the segment's target vertex; outside it points at the nearest
//! point of the segment. Entering the target half-disc advances to the next
//! segment, wrapping around the polygon indefinitely.

use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    in_target_region, nearest_point_on_segment, offset_to_segment, on_segment_band, on_shape, Point, Segment, Shape,
};
use crate::tacton::{BlinkLevel, Direction8, TactileState};

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("target regions chain through all {0} segments in one step; shape is malformed for guidance")]
    RunawayAdvance(usize),
    #[error("time went backwards: {now} ms after {prev} ms")]
    TimeWentBackwards { prev: u64, now: u64 },
    #[error("cursor has a non-finite coordinate")]
    NonFiniteCursor,
}

/// Sector of `v` among the eight compass directions, or `None` for a zero
/// (or non-finite) vector.
///
/// Each sector is half-open, `[center - 22.5°, center + 22.5°)`. Angles
/// within 1e-9 of a sector width of a boundary are snapped onto it so that
/// boundary vectors built from rounded trigonometry land in the
/// counterclockwise sector.
pub fn quantize_direction(v: Point) -> Option<Direction8> {
    if !v.is_finite() || (v.x == 0.0 && v.y == 0.0) {
        return None;
    }
    let degrees = v.y.atan2(v.x).to_degrees();
    let mut sector = (degrees + 22.5) / 45.0;
    let nearest = sector.round();
    if (sector - nearest).abs() < 1e-9 {
        sector = nearest;
    }
    Some(Direction8::from_index(sector.floor().rem_euclid(8.0) as usize))
}

/// Blink speed from the remaining distance `d` to the target vertex of a
/// segment of length `segment_length`: thirds of the segment map to
/// slow / medium / fast, fastest nearest the target.
pub fn blink_for_distance(d: f64, segment_length: f64) -> BlinkLevel {
    if d > 2.0 * segment_length / 3.0 {
        BlinkLevel::Slow
    } else if d > segment_length / 3.0 {
        BlinkLevel::Medium
    } else {
        BlinkLevel::Fast
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    VertexReached,
    LapCompleted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidanceEvent {
    pub kind: EventKind,
    #[serde(rename = "seg")]
    pub segment_index: usize,
    #[serde(rename = "t")]
    pub time_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidanceState {
    shape: Arc<Shape>,
    current_segment: usize,
    laps_completed: u64,
    advancements: u64,
    last_direction: Direction8,
    last_time_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: GuidanceState,
    pub tactile: TactileState,
    pub events: Vec<GuidanceEvent>,
}

impl GuidanceState {
    pub fn reset(shape: impl Into<Arc<Shape>>) -> Self {
        let shape = shape.into();
        let first = shape.segment(0);
        let last_direction = quantize_direction(first.direction()).expect("shape segments have nonzero length");
        Self {
            shape,
            current_segment: 0,
            laps_completed: 0,
            advancements: 0,
            last_direction,
            last_time_ms: None,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn shared_shape(&self) -> Arc<Shape> {
        Arc::clone(&self.shape)
    }

    pub fn current_segment(&self) -> usize {
        self.current_segment
    }

    pub fn segment(&self) -> Segment {
        self.shape.segment(self.current_segment)
    }

    pub fn laps_completed(&self) -> u64 {
        self.laps_completed
    }

    pub fn advancements(&self) -> u64 {
        self.advancements
    }

    pub fn last_direction(&self) -> Direction8 {
        self.last_direction
    }

    /// The point the cue aims at for cursor `p`.
    pub fn aim_point(&self, p: Point) -> Point {
        let s = self.segment();
        if on_segment_band(p, &s, self.shape.thickness()) {
            s.b()
        } else {
            nearest_point_on_segment(p, &s)
        }
    }

    /// Same as [`aim_point`](Self::aim_point), as an offset from `p`.
    fn aim_offset(&self, p: Point) -> Point {
        let s = self.segment();
        if on_segment_band(p, &s, self.shape.thickness()) {
            s.b() - p
        } else {
            offset_to_segment(p, &s)
        }
    }

    fn advance(&mut self, time_ms: u64, events: &mut Vec<GuidanceEvent>) {
        let n = self.shape.segment_count();
        let finished = self.current_segment;
        events.push(GuidanceEvent {
            kind: EventKind::VertexReached,
            segment_index: finished,
            time_ms,
        });
        self.advancements += 1;
        self.current_segment = (finished + 1) % n;
        if self.current_segment == 0 {
            self.laps_completed += 1;
            events.push(GuidanceEvent {
                kind: EventKind::LapCompleted,
                segment_index: finished,
                time_ms,
            });
        }
    }

    /// For a closed polygon the target half-planes have an empty common
    /// intersection, so `limit = n` is only reachable through rounding.
    fn advance_while_in_target(
        &mut self,
        p: Point,
        time_ms: u64,
        limit: usize,
        events: &mut Vec<GuidanceEvent>,
    ) -> Result<(), GuidanceError> {
        let t = self.shape.thickness();
        let mut advanced = 0;
        while in_target_region(p, &self.segment(), t) {
            if advanced == limit {
                return Err(GuidanceError::RunawayAdvance(limit));
            }
            self.advance(time_ms, events);
            advanced += 1;
        }
        Ok(())
    }

    /// Feeds one cursor sample and returns the successor state, the tactile
    /// cue, and any vertex/lap events raised by this sample.
    pub fn step(&self, p: Point, time_ms: u64) -> Result<StepOutput, GuidanceError> {
        if !p.is_finite() {
            return Err(GuidanceError::NonFiniteCursor);
        }
        if let Some(prev) = self.last_time_ms {
            if time_ms < prev {
                return Err(GuidanceError::TimeWentBackwards { prev, now: time_ms });
            }
        }
        let mut next = self.clone();
        next.last_time_ms = Some(time_ms);
        let n = next.shape.segment_count();
        let mut events = Vec::new();

        next.advance_while_in_target(p, time_ms, n, &mut events)?;

        let direction = quantize_direction(next.aim_offset(p)).unwrap_or(next.last_direction);
        let seg = next.segment();
        let blink = blink_for_distance(p.distance(seg.b()), seg.length());
        let tactile = TactileState {
            direction,
            blink,
            on_shape: on_shape(p, &next.shape),
        };
        next.last_direction = direction;
        Ok(StepOutput {
            state: next,
            tactile,
            events,
        })
    }
}

/// One line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub x: f64,
    pub y: f64,
    pub dir: Direction8,
    pub blink: BlinkLevel,
    pub on_shape: bool,
    pub seg: usize,
    pub events: Vec<GuidanceEvent>,
}

impl StepRecord {
    pub fn from_step(p: Point, time_ms: u64, out: &StepOutput) -> Self {
        Self {
            t: time_ms,
            x: p.x,
            y: p.y,
            dir: out.tactile.direction,
            blink: out.tactile.blink,
            on_shape: out.tactile.on_shape,
            seg: out.state.current_segment(),
            events: out.events.clone(),
        }
    }
}

/// Writes records as line-delimited JSON.
pub fn write_jsonl<T: Serialize>(mut out: impl Write, records: &[T]) -> io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(t: f64) -> Shape {
        Shape::new(
            "square",
            vec![
                Point::new(0.0, 0.0),
                Point::new(100.0, 0.0),
                Point::new(100.0, 100.0),
                Point::new(0.0, 100.0),
            ],
            t,
        )
        .unwrap()
    }

    /// Direction whose center is angularly closest to `degrees`, with ties
    /// going counterclockwise.
    fn argmin_oracle(degrees: f64) -> Direction8 {
        let mut best = (f64::INFINITY, Direction8::E);
        for d in Direction8::ALL {
            let diff = (degrees - d.center_degrees()).rem_euclid(360.0);
            let dist = diff.min(360.0 - diff);
            // Exact ties sit on the clockwise edge of the ccw sector.
            let tie_ccw = (dist - best.0).abs() < 1e-9 && diff > 180.0;
            if dist < best.0 - 1e-9 || tie_ccw {
                best = (dist, d);
            }
        }
        best.1
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_direction(Point::new(1.0, 0.0)), Some(Direction8::E));
        assert_eq!(quantize_direction(Point::new(1.0, 1.0)), Some(Direction8::NE));
        let v = Point::new(0.9, 1.0);
        assert_eq!(argmin_oracle(v.y.atan2(v.x).to_degrees()), Direction8::NE);
        assert_eq!(quantize_direction(v), Some(Direction8::NE));
        assert_eq!(quantize_direction(Point::new(0.0, 0.0)), None);
        assert_eq!(quantize_direction(Point::new(-1.0, 0.0)), Some(Direction8::W));
        assert_eq!(quantize_direction(Point::new(-1.0, -0.0)), Some(Direction8::W));
        assert_eq!(quantize_direction(Point::new(0.0, -3.0)), Some(Direction8::S));
    }

    #[test]
    fn quantize_boundaries_go_counterclockwise() {
        for k in 0..8 {
            let edge = (22.5 + 45.0 * k as f64).to_radians();
            let v = Point::new(edge.cos(), edge.sin());
            assert_eq!(quantize_direction(v), Some(Direction8::from_index(k + 1)), "edge {k}");
        }
    }

    #[test]
    fn blink_thirds() {
        let l = 90.0;
        assert_eq!(blink_for_distance(0.9 * l, l), BlinkLevel::Slow);
        assert_eq!(blink_for_distance(0.5 * l, l), BlinkLevel::Medium);
        assert_eq!(blink_for_distance(0.0, l), BlinkLevel::Fast);
        assert_eq!(blink_for_distance(60.0, l), BlinkLevel::Medium);
        assert_eq!(blink_for_distance(30.0, l), BlinkLevel::Fast);
        assert_eq!(blink_for_distance(500.0, l), BlinkLevel::Slow);
    }

    #[test]
    fn aim_examples() {
        let g = GuidanceState::reset(square(10.0));
        assert_eq!(g.aim_point(Point::new(50.0, 5.0)), Point::new(100.0, 0.0));
        assert_eq!(g.aim_point(Point::new(50.0, 40.0)), Point::new(50.0, 0.0));
        let p = Point::new(-30.0, -40.0);
        let aim = g.aim_point(p);
        assert_eq!(aim, Point::new(0.0, 0.0));
        // Sampling oracle: nothing on the segment is closer.
        let s = g.segment();
        let best = (0..10_000)
            .map(|k| s.a() + s.direction() * (k as f64 / 9_999.0))
            .map(|q| q.distance(p))
            .fold(f64::INFINITY, f64::min);
        assert!((best - aim.distance(p)).abs() < 1e-9);
    }

    #[test]
    fn step_examples() {
        let g = GuidanceState::reset(square(10.0));

        let out = g.step(Point::new(50.0, 5.0), 0).unwrap();
        // vector (50, -5): about -5.7 degrees
        assert_eq!(argmin_oracle((-5.0f64).atan2(50.0).to_degrees()), Direction8::E);
        assert_eq!(out.tactile.direction, Direction8::E);
        assert!(out.tactile.on_shape);
        assert_eq!(out.tactile.blink, BlinkLevel::Medium);
        assert!(out.events.is_empty());

        let out = g.step(Point::new(50.0, 40.0), 0).unwrap();
        assert_eq!(argmin_oracle(-90.0), Direction8::S);
        assert_eq!(out.tactile.direction, Direction8::S);
        assert!(!out.tactile.on_shape);

        let out = g.step(Point::new(103.0, 2.0), 5).unwrap();
        assert_eq!(out.state.current_segment(), 1);
        assert_eq!(
            out.events,
            vec![GuidanceEvent {
                kind: EventKind::VertexReached,
                segment_index: 0,
                time_ms: 5
            }]
        );
        assert_eq!(out.state.aim_point(Point::new(103.0, 2.0)), Point::new(100.0, 100.0));
        assert_eq!(out.tactile.direction, Direction8::N);
        assert_eq!(out.tactile.blink, BlinkLevel::Slow);
    }

    #[test]
    fn reset_examples() {
        let g = GuidanceState::reset(square(10.0));
        assert_eq!(g.current_segment(), 0);
        assert_eq!(g.last_direction(), Direction8::E);
        assert_eq!(g.laps_completed(), 0);
        let tri = Shape::new(
            "triangle",
            vec![Point::new(0.0, 0.0), Point::new(0.0, 100.0), Point::new(100.0, 0.0)],
            10.0,
        )
        .unwrap();
        let g = GuidanceState::reset(tri);
        assert_eq!(g.last_direction(), Direction8::N);
        assert_eq!(g.advancements(), 0);
    }

    #[test]
    fn cursor_on_target_vertex_advances_and_aims_onward() {
        let g = GuidanceState::reset(square(10.0));
        let out = g.step(Point::new(100.0, 0.0), 0).unwrap();
        assert_eq!(out.state.current_segment(), 1);
        assert_eq!(out.tactile.direction, Direction8::N);
        assert_eq!(out.tactile.blink, BlinkLevel::Slow);
    }

    #[test]
    fn full_lap_emits_lap_event() {
        let mut g = GuidanceState::reset(square(10.0));
        let stops = [(101.0, 0.0), (100.0, 101.0), (-1.0, 100.0), (0.0, -1.0)];
        let mut all = Vec::new();
        for (i, &(x, y)) in stops.iter().enumerate() {
            let out = g.step(Point::new(x, y), i as u64).unwrap();
            all.extend(out.events);
            g = out.state;
        }
        assert_eq!(g.laps_completed(), 1);
        assert_eq!(g.advancements(), 4);
        assert_eq!(g.current_segment(), 0);
        let kinds: Vec<_> = all.iter().map(|e| (e.kind, e.segment_index)).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::VertexReached, 0),
                (EventKind::VertexReached, 1),
                (EventKind::VertexReached, 2),
                (EventKind::VertexReached, 3),
                (EventKind::LapCompleted, 3),
            ]
        );
    }

    #[test]
    fn multiple_advancements_in_one_step() {
        // Two short edges whose target regions both contain the probe point.
        let shape = Shape::new(
            "kink",
            vec![
                Point::new(0.0, 0.0),
                Point::new(100.0, 0.0),
                Point::new(104.0, 0.0),
                Point::new(104.0, 100.0),
            ],
            10.0,
        )
        .unwrap();
        let g = GuidanceState::reset(shape);
        let out = g.step(Point::new(105.0, 1.0), 0).unwrap();
        assert_eq!(out.state.current_segment(), 2);
        assert_eq!(out.events.len(), 2);
    }

    #[test]
    fn runaway_guard_trips_at_limit() {
        let shape = Shape::new(
            "kink",
            vec![
                Point::new(0.0, 0.0),
                Point::new(100.0, 0.0),
                Point::new(104.0, 0.0),
                Point::new(104.0, 100.0),
            ],
            10.0,
        )
        .unwrap();
        let mut g = GuidanceState::reset(shape);
        let mut events = Vec::new();
        let err = g.advance_while_in_target(Point::new(105.0, 1.0), 0, 1, &mut events);
        assert_eq!(err, Err(GuidanceError::RunawayAdvance(1)));
    }

    #[test]
    fn time_must_not_decrease() {
        let g = GuidanceState::reset(square(10.0));
        let out = g.step(Point::new(50.0, 40.0), 100).unwrap();
        assert_eq!(
            out.state.step(Point::new(50.0, 40.0), 99).unwrap_err(),
            GuidanceError::TimeWentBackwards { prev: 100, now: 99 }
        );
        assert!(out.state.step(Point::new(50.0, 40.0), 100).is_ok());
        assert_eq!(
            g.step(Point::new(f64::NAN, 0.0), 0).unwrap_err(),
            GuidanceError::NonFiniteCursor
        );
    }

    #[test]
    fn step_record_json_shape() {
        let g = GuidanceState::reset(square(10.0));
        let p = Point::new(103.0, 2.0);
        let out = g.step(p, 7).unwrap();
        let line = serde_json::to_string(&StepRecord::from_step(p, 7, &out)).unwrap();
        assert_eq!(
            line,
            r#"{"t":7,"x":103.0,"y":2.0,"dir":"N","blink":1,"on_shape":true,"seg":1,"events":[{"kind":"vertex_reached","seg":0,"t":7}]}"#
        );
    }
}
