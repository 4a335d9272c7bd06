//! Directional Tactons for a 4×4 pin array.
//!
//! The index-finger array shows one of eight direction glyphs, blinking:
//! each period is split into a raised phase (glyph) and a blank phase of the
//! same length. The middle-finger array is a binary on/off-shape signal.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_GLYPHS: &str = include_str!("../assets/glyphs.json");

pub const RAISED: char = '●';
pub const LOWERED: char = '·';

#[derive(Debug, Error, PartialEq)]
pub enum TactonError {
    #[error("unknown direction {0:?}")]
    UnknownDirection(String),
    #[error("blink level must be 1, 2 or 3, got {0}")]
    BadBlinkLevel(u8),
    #[error(
        "blink periods must be even, > 0 and strictly decreasing slow > medium > fast (got {slow}/{medium}/{fast})"
    )]
    BadPeriods { slow: u64, medium: u64, fast: u64 },
    #[error("glyph table: {0}")]
    Glyphs(String),
    #[error("ascii frame: {0}")]
    Ascii(String),
}

/// 4×4 pin state, row-major, row 0 at the top. Bit `r * 4 + c` is pin (r, c).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PinFrame(u16);

impl PinFrame {
    pub const LOWERED: PinFrame = PinFrame(0);
    pub const RAISED: PinFrame = PinFrame(u16::MAX);

    pub const fn from_bits(bits: u16) -> Self {
        PinFrame(bits)
    }

    pub const fn bits(self) -> u16 {
        self.0
    }

    pub fn from_rows(rows: [[bool; 4]; 4]) -> Self {
        let mut frame = PinFrame::LOWERED;
        for (r, row) in rows.iter().enumerate() {
            for (c, &up) in row.iter().enumerate() {
                frame.set(r, c, up);
            }
        }
        frame
    }

    pub fn rows(self) -> [[bool; 4]; 4] {
        let mut rows = [[false; 4]; 4];
        for (r, row) in rows.iter_mut().enumerate() {
            for (c, pin) in row.iter_mut().enumerate() {
                *pin = self.get(r, c);
            }
        }
        rows
    }

    pub fn get(self, row: usize, col: usize) -> bool {
        assert!(row < 4 && col < 4, "pin ({row}, {col}) out of range");
        self.0 & (1 << (row * 4 + col)) != 0
    }

    pub fn set(&mut self, row: usize, col: usize, raised: bool) {
        assert!(row < 4 && col < 4, "pin ({row}, {col}) out of range");
        let bit = 1 << (row * 4 + col);
        if raised {
            self.0 |= bit;
        } else {
            self.0 &= !bit;
        }
    }

    pub fn raised_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Four lines of four characters, `●` raised and `·` lowered, no trailing newline.
    pub fn render_ascii(self) -> String {
        self.rows()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&up| if up { RAISED } else { LOWERED })
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn parse_ascii(text: &str) -> Result<Self, TactonError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != 4 {
            return Err(TactonError::Ascii(format!("expected 4 lines, got {}", lines.len())));
        }
        let mut frame = PinFrame::LOWERED;
        for (r, line) in lines.iter().enumerate() {
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != 4 {
                return Err(TactonError::Ascii(format!("line {r} has {} cells", chars.len())));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                match ch {
                    RAISED => frame.set(r, c, true),
                    LOWERED => {}
                    other => return Err(TactonError::Ascii(format!("unexpected {other:?}"))),
                }
            }
        }
        Ok(frame)
    }
}

impl fmt::Debug for PinFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PinFrame({:#06x})", self.0)
    }
}

impl fmt::Display for PinFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_ascii())
    }
}

/// Compass direction; discriminants count counterclockwise from east in 45° steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction8 {
    E = 0,
    NE = 1,
    N = 2,
    NW = 3,
    W = 4,
    SW = 5,
    S = 6,
    SE = 7,
}

impl Direction8 {
    pub const ALL: [Direction8; 8] = [
        Direction8::E,
        Direction8::NE,
        Direction8::N,
        Direction8::NW,
        Direction8::W,
        Direction8::SW,
        Direction8::S,
        Direction8::SE,
    ];

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i % 8]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn center_degrees(self) -> f64 {
        45.0 * self.index() as f64
    }

    pub fn opposite(self) -> Self {
        Self::from_index(self.index() + 4)
    }

    /// Unit vector pointing along the sector center.
    pub fn unit_vector(self) -> (f64, f64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            Direction8::E => (1.0, 0.0),
            Direction8::NE => (h, h),
            Direction8::N => (0.0, 1.0),
            Direction8::NW => (-h, h),
            Direction8::W => (-1.0, 0.0),
            Direction8::SW => (-h, -h),
            Direction8::S => (0.0, -1.0),
            Direction8::SE => (h, -h),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction8::E => "E",
            Direction8::NE => "NE",
            Direction8::N => "N",
            Direction8::NW => "NW",
            Direction8::W => "W",
            Direction8::SW => "SW",
            Direction8::S => "S",
            Direction8::SE => "SE",
        }
    }
}

impl fmt::Display for Direction8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction8 {
    type Err = TactonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Direction8::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| TactonError::UnknownDirection(s.to_string()))
    }
}

/// Blink speed; serialized as 1 (slow), 2 (medium) or 3 (fast).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum BlinkLevel {
    Slow = 1,
    Medium = 2,
    Fast = 3,
}

impl BlinkLevel {
    pub const ALL: [BlinkLevel; 3] = [BlinkLevel::Slow, BlinkLevel::Medium, BlinkLevel::Fast];

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl From<BlinkLevel> for u8 {
    fn from(level: BlinkLevel) -> u8 {
        level.code()
    }
}

impl TryFrom<u8> for BlinkLevel {
    type Error = TactonError;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        match code {
            1 => Ok(BlinkLevel::Slow),
            2 => Ok(BlinkLevel::Medium),
            3 => Ok(BlinkLevel::Fast),
            other => Err(TactonError::BadBlinkLevel(other)),
        }
    }
}

impl fmt::Display for BlinkLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.code().fmt(f)
    }
}

/// Full blink period per level, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPeriods")]
pub struct BlinkPeriods {
    slow: u64,
    medium: u64,
    fast: u64,
}

#[derive(Deserialize)]
struct RawPeriods {
    slow: u64,
    medium: u64,
    fast: u64,
}

impl TryFrom<RawPeriods> for BlinkPeriods {
    type Error = TactonError;

    fn try_from(raw: RawPeriods) -> Result<Self, Self::Error> {
        BlinkPeriods::new(raw.slow, raw.medium, raw.fast)
    }
}

impl BlinkPeriods {
    /// Periods must be even so both phases last the same whole number of milliseconds.
    pub fn new(slow: u64, medium: u64, fast: u64) -> Result<Self, TactonError> {
        let ok = fast > 0 && fast < medium && medium < slow && [slow, medium, fast].iter().all(|p| p % 2 == 0);
        if ok {
            Ok(Self { slow, medium, fast })
        } else {
            Err(TactonError::BadPeriods { slow, medium, fast })
        }
    }

    pub fn period_ms(&self, level: BlinkLevel) -> u64 {
        match level {
            BlinkLevel::Slow => self.slow,
            BlinkLevel::Medium => self.medium,
            BlinkLevel::Fast => self.fast,
        }
    }

    /// True during the first half of each period.
    pub fn is_raised_phase(&self, level: BlinkLevel, time_ms: u64) -> bool {
        let period = self.period_ms(level);
        time_ms % period < period / 2
    }
}

impl Default for BlinkPeriods {
    fn default() -> Self {
        Self {
            slow: 1000,
            medium: 500,
            fast: 250,
        }
    }
}

/// What the two arrays should convey, before animation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TactileState {
    pub direction: Direction8,
    pub blink: BlinkLevel,
    pub on_shape: bool,
}

/// The eight direction glyphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphTable {
    glyphs: [PinFrame; 8],
}

impl GlyphTable {
    /// Parses `{"N": [[0|1; 4]; 4], ...}` with all eight keys, each glyph
    /// non-empty and distinct from the others.
    pub fn from_json(text: &str) -> Result<Self, TactonError> {
        let raw: BTreeMap<String, Vec<Vec<u8>>> =
            serde_json::from_str(text).map_err(|e| TactonError::Glyphs(e.to_string()))?;
        if raw.len() != 8 {
            return Err(TactonError::Glyphs(format!("expected 8 directions, got {}", raw.len())));
        }
        let mut glyphs = [PinFrame::LOWERED; 8];
        for (key, rows) in &raw {
            let dir: Direction8 = key.parse()?;
            if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                return Err(TactonError::Glyphs(format!("{key}: glyph must be 4x4")));
            }
            let mut frame = PinFrame::LOWERED;
            for (r, row) in rows.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    match v {
                        0 => {}
                        1 => frame.set(r, c, true),
                        other => return Err(TactonError::Glyphs(format!("{key}: pin value {other}"))),
                    }
                }
            }
            if frame == PinFrame::LOWERED {
                return Err(TactonError::Glyphs(format!("{key}: glyph has no raised pin")));
            }
            glyphs[dir.index()] = frame;
        }
        let distinct: HashSet<u16> = glyphs.iter().map(|g| g.bits()).collect();
        if distinct.len() != 8 {
            return Err(TactonError::Glyphs("glyphs are not pairwise distinct".into()));
        }
        Ok(Self { glyphs })
    }

    pub fn bundled() -> &'static GlyphTable {
        static TABLE: OnceLock<GlyphTable> = OnceLock::new();
        TABLE.get_or_init(|| GlyphTable::from_json(BUNDLED_GLYPHS).expect("bundled glyph asset is valid"))
    }

    pub fn glyph(&self, direction: Direction8) -> PinFrame {
        self.glyphs[direction.index()]
    }
}

/// Glyph from the bundled table.
pub fn pattern_for_direction(direction: Direction8) -> PinFrame {
    GlyphTable::bundled().glyph(direction)
}

/// Renders tactile states into pin frames over time.
#[derive(Debug, Clone)]
pub struct TactonCodec {
    pub glyphs: GlyphTable,
    pub periods: BlinkPeriods,
}

impl Default for TactonCodec {
    fn default() -> Self {
        Self {
            glyphs: GlyphTable::bundled().clone(),
            periods: BlinkPeriods::default(),
        }
    }
}

impl TactonCodec {
    /// Returns `(index_frame, middle_frame)` at `time_ms`.
    pub fn frame_at(&self, state: &TactileState, time_ms: u64) -> (PinFrame, PinFrame) {
        let index = if self.periods.is_raised_phase(state.blink, time_ms) {
            self.glyphs.glyph(state.direction)
        } else {
            PinFrame::LOWERED
        };
        let middle = if state.on_shape {
            PinFrame::RAISED
        } else {
            PinFrame::LOWERED
        };
        (index, middle)
    }
}

pub fn frame_at(state: &TactileState, time_ms: u64) -> (PinFrame, PinFrame) {
    TactonCodec::default().frame_at(state, time_ms)
}
