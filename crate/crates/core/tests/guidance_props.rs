use proptest::prelude::*;
use shapetouch_core::agent::Follower;
use shapetouch_core::guidance::write_jsonl;
use shapetouch_core::shapes::bundled;
use shapetouch_core::{
    in_target_region, AgentConfig, EventKind, GuidanceState, Point, Shape, StepRecord, TactileState,
};

/// Random walk on a 1/8-unit grid around the shape, so that translating by
/// whole units and scaling by powers of two stay exact.
fn walk() -> impl Strategy<Value = (usize, Vec<(i32, i32)>)> {
    (0usize..11, prop::collection::vec((-40i32..=40, -40i32..=40), 1..300))
}

fn trajectory(shape: &Shape, moves: &[(i32, i32)]) -> Vec<Point> {
    let mut p = shape.vertices()[0];
    moves
        .iter()
        .map(|&(dx, dy)| {
            p = p + Point::new(dx as f64 / 8.0, dy as f64 / 8.0);
            p
        })
        .collect()
}

fn tactile_trace(shape: &Shape, points: &[Point]) -> Vec<TactileState> {
    let mut state = GuidanceState::reset(shape.clone());
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let out = state.step(p, i as u64).unwrap();
            state = out.state;
            out.tactile
        })
        .collect()
}

proptest! {
    #[test]
    fn translation_equivariance((k, moves) in walk(), dx in -300i32..300, dy in -300i32..300) {
        let shape = bundled()[k].shape.clone();
        let d = Point::new(dx as f64, dy as f64);
        let moved = shape.map_vertices(shape.thickness(), |v| v + d).unwrap();
        let pts = trajectory(&shape, &moves);
        let moved_pts: Vec<_> = pts.iter().map(|&p| p + d).collect();
        prop_assert_eq!(tactile_trace(&shape, &pts), tactile_trace(&moved, &moved_pts));
    }

    #[test]
    fn power_of_two_scaling_keeps_cues((k, moves) in walk(), e in -3i32..=3) {
        prop_assume!(e != 0);
        let f = 2f64.powi(e);
        let shape = bundled()[k].shape.clone();
        let scaled = shape.map_vertices(shape.thickness() * f, |v| v * f).unwrap();
        let pts = trajectory(&shape, &moves);
        let scaled_pts: Vec<_> = pts.iter().map(|&p| p * f).collect();
        prop_assert_eq!(tactile_trace(&shape, &pts), tactile_trace(&scaled, &scaled_pts));
    }

    #[test]
    fn advancement_iff_in_target_region((k, moves) in walk()) {
        let shape = bundled()[k].shape.clone();
        let n = shape.segment_count() as u64;
        let mut state = GuidanceState::reset(shape.clone());
        for (i, p) in trajectory(&shape, &moves).into_iter().enumerate() {
            let before = state.clone();
            let out = state.step(p, i as u64).unwrap();
            let inside = in_target_region(p, &before.segment(), shape.thickness());
            prop_assert_eq!(out.state.advancements() > before.advancements(), inside);
            prop_assert!(out.state.advancements() >= before.advancements());
            prop_assert_eq!(out.state.laps_completed(), out.state.advancements() / n);
            let reached = out.events.iter().filter(|e| e.kind == EventKind::VertexReached).count() as u64;
            prop_assert_eq!(reached, out.state.advancements() - before.advancements());
            if shapetouch_core::on_segment_band(p, &out.state.segment(), shape.thickness()) {
                prop_assert_eq!(out.state.aim_point(p), out.state.segment().b());
            }
            state = out.state;
        }
    }
}

fn noisy_log(shape: &Shape) -> Vec<u8> {
    let cfg = AgentConfig {
        step_size: 7.0,
        noise_radius: 5.0,
        max_steps: 10_000,
        seed: 99,
    };
    let mut follower = Follower::new(shape, Point::new(500.0, 500.0), cfg).unwrap();
    let records: Vec<StepRecord> = (0..10_000).map(|_| follower.tick().unwrap().record).collect();
    let mut out = Vec::new();
    write_jsonl(&mut out, &records).unwrap();
    out
}

#[test]
fn ten_thousand_step_replay_is_byte_identical() {
    let shape = shapetouch_core::shapes::bundled_shape("house").unwrap();
    let first = noisy_log(&shape);
    assert_eq!(first.iter().filter(|&&b| b == b'\n').count(), 10_000);
    assert_eq!(first, noisy_log(&shape));
}

#[test]
fn replaying_recorded_positions_reproduces_the_log() {
    let shape = shapetouch_core::shapes::bundled_shape("arrow").unwrap();
    let cfg = AgentConfig {
        step_size: 6.0,
        noise_radius: 3.0,
        max_steps: 10_000,
        seed: 5,
    };
    let mut follower = Follower::new(&shape, shape.vertices()[0], cfg).unwrap();
    let ticks: Vec<_> = (0..10_000).map(|_| follower.tick().unwrap()).collect();
    let mut state = GuidanceState::reset(shape.clone());
    for tick in &ticks {
        let out = state.step(tick.position, tick.time_ms).unwrap();
        assert_eq!(StepRecord::from_step(tick.position, tick.time_ms, &out), tick.record);
        state = out.state;
    }
}
