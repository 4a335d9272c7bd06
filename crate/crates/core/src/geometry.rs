//! Planar geometry for thick polygon outlines.
//!
//! Coordinates follow the math convention: y grows upward and angles are
//! measured counterclockwise from +x. A [`Shape`] is a closed polygon whose
//! outline is a band of half-width `thickness` around each segment.

use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default outline half-width, in workspace units.
pub const DEFAULT_THICKNESS: f64 = 20.0;

/// Side length of the square workspace the bundled shapes live in.
pub const WORKSPACE_SIZE: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("shape needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("vertices {a} and {b} coincide (zero-length segment)")]
    DegenerateSegment { a: usize, b: usize },
    #[error("thickness must be a finite number > 0, got {0}")]
    BadThickness(f64),
    #[error("shape file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed shape JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<ShapeError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// One directed edge of a [`Shape`]: from vertex `index` to vertex `index + 1`
/// (wrapping). Only obtainable through [`Shape::segment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Point,
    b: Point,
    index: usize,
}

impl Segment {
    pub fn a(&self) -> Point {
        self.a
    }

    /// The target vertex.
    pub fn b(&self) -> Point {
        self.b
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn direction(&self) -> Point {
        self.b - self.a
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    /// Clamped projection parameter of `p` onto the segment, in `[0, 1]`.
    pub fn projection_param(&self, p: Point) -> f64 {
        let ab = self.direction();
        ((p - self.a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0)
    }
}

/// On-disk shape layout: `{"name": ..., "vertices": [[x, y], ...], "thickness": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapeFile {
    pub name: String,
    pub vertices: Vec<[f64; 2]>,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
}

fn default_thickness() -> f64 {
    DEFAULT_THICKNESS
}

/// A validated closed polygon with an outline thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeFile", into = "ShapeFile")]
pub struct Shape {
    name: String,
    vertices: Vec<Point>,
    thickness: f64,
}

impl Shape {
    pub fn new(name: impl Into<String>, vertices: Vec<Point>, thickness: f64) -> Result<Self, ShapeError> {
        let n = vertices.len();
        if n < 3 {
            return Err(ShapeError::TooFewVertices(n));
        }
        if let Some(index) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(ShapeError::NonFinite { index });
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if vertices[i] == vertices[j] {
                return Err(ShapeError::DegenerateSegment { a: i, b: j });
            }
        }
        if !(thickness.is_finite() && thickness > 0.0) {
            return Err(ShapeError::BadThickness(thickness));
        }
        Ok(Self {
            name: name.into(),
            vertices,
            thickness,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ShapeError> {
        let file: ShapeFile = serde_json::from_str(text)?;
        Shape::try_from(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ShapeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ShapeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Shape::from_json(&text).map_err(|e| ShapeError::InFile {
            path: path.display().to_string(),
            source: Box::new(e),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ShapeFile::from(self.clone())).expect("shape serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len()
    }

    /// Segment `i`, running from vertex `i` to vertex `(i + 1) mod n`.
    pub fn segment(&self, i: usize) -> Segment {
        let n = self.vertices.len();
        let index = i % n;
        Segment {
            a: self.vertices[index],
            b: self.vertices[(index + 1) % n],
            index,
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.segment_count()).map(move |i| self.segment(i))
    }

    pub fn perimeter(&self) -> f64 {
        self.segments().map(|s| s.length()).sum()
    }

    pub fn with_thickness(&self, thickness: f64) -> Result<Self, ShapeError> {
        Shape::new(self.name.clone(), self.vertices.clone(), thickness)
    }

    /// Applies `f` to every vertex and sets a new thickness; the name is kept.
    pub fn map_vertices(&self, thickness: f64, f: impl Fn(Point) -> Point) -> Result<Self, ShapeError> {
        Shape::new(
            self.name.clone(),
            self.vertices.iter().copied().map(f).collect(),
            thickness,
        )
    }
}

impl TryFrom<ShapeFile> for Shape {
    type Error = ShapeError;

    fn try_from(file: ShapeFile) -> Result<Self, Self::Error> {
        let vertices = file.vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
        Shape::new(file.name, vertices, file.thickness)
    }
}

impl From<Shape> for ShapeFile {
    fn from(shape: Shape) -> Self {
        ShapeFile {
            name: shape.name,
            vertices: shape.vertices.iter().map(|p| [p.x, p.y]).collect(),
            thickness: shape.thickness,
        }
    }
}

/// Vector from `p` to its nearest point on `s`.
///
/// Built from offsets relative to `s.a` so the result is unaffected by
/// translating both inputs by the same exactly-representable amount.
pub fn offset_to_segment(p: Point, s: &Segment) -> Point {
    let ab = s.direction();
    let ap = p - s.a;
    let t = (ap.dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
    ab * t - ap
}

pub fn nearest_point_on_segment(p: Point, s: &Segment) -> Point {
    s.a + s.direction() * s.projection_param(p)
}

pub fn distance_to_segment(p: Point, s: &Segment) -> f64 {
    offset_to_segment(p, s).norm()
}

/// Closed band test: distance to the centerline is at most `t`.
pub fn on_segment_band(p: Point, s: &Segment, t: f64) -> bool {
    distance_to_segment(p, s) <= t
}

/// Half-disc of radius `t` capping the segment at its target vertex `b`,
/// on the far side of the perpendicular through `b` (the perpendicular itself
/// included).
pub fn in_target_region(p: Point, s: &Segment, t: f64) -> bool {
    let bp = p - s.b;
    bp.norm() <= t && bp.dot(s.direction()) >= 0.0
}

/// Whether `p` lies within `thickness` of any segment of the outline.
pub fn on_shape(p: Point, shape: &Shape) -> bool {
    let t = shape.thickness();
    shape.segments().any(|s| distance_to_segment(p, &s) <= t)
}
