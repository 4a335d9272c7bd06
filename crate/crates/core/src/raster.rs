//! Dark-pixel baseline: rasterize the outline, then raise the pins whose
//! image cells under the cursor are dark.

use std::io::{self, Write};

use thiserror::Error;

use crate::geometry::{on_shape, Point, Shape, WORKSPACE_SIZE};
use crate::tacton::PinFrame;

/// Largest image `rasterize_outline` will allocate by default.
pub const DEFAULT_MAX_PIXELS: usize = 4_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("cell size must be a finite number > 0, got {0}")]
    BadCellSize(f64),
    #[error("workspace {width}x{height} must be finite and positive")]
    BadWorkspace { width: f64, height: f64 },
    #[error("image of {width}x{height} pixels exceeds the limit of {max} pixels")]
    TooLarge { width: usize, height: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterConfig {
    /// Workspace extent; the image covers `[0, width] x [0, height]`.
    pub workspace_width: f64,
    pub workspace_height: f64,
    pub max_pixels: usize,
}

impl Default for RasterConfig {
    fn default() -> Self {
        Self {
            workspace_width: WORKSPACE_SIZE,
            workspace_height: WORKSPACE_SIZE,
            max_pixels: DEFAULT_MAX_PIXELS,
        }
    }
}

/// Boolean image anchored at the workspace origin. Cell `(col, row)` covers
/// `[col * cell, (col + 1) * cell) x [row * cell, (row + 1) * cell)`, so row 0
/// is the bottom of the workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    cell_size: f64,
    pixels: Vec<bool>,
}

impl RasterImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn is_dark(&self, col: usize, row: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    /// Dark state of the cell containing `p`; outside the image is light.
    pub fn dark_at(&self, p: Point) -> bool {
        self.cell_of(p).is_some_and(|(c, r)| self.is_dark(c, r))
    }

    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let col = (p.x / self.cell_size).floor();
        let row = (p.y / self.cell_size).floor();
        let in_range = col >= 0.0 && row >= 0.0 && col < self.width as f64 && row < self.height as f64;
        in_range.then_some((col as usize, row as usize))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> Point {
        Point::new((col as f64 + 0.5) * self.cell_size, (row as f64 + 0.5) * self.cell_size)
    }

    pub fn dark_count(&self) -> usize {
        self.pixels.iter().filter(|&&d| d).count()
    }

    /// Binary PGM (P5), dark = 0 and light = 255, top row first.
    pub fn write_pgm(&self, mut out: impl Write) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let mut line = vec![0u8; self.width];
        for row in (0..self.height).rev() {
            for (col, px) in line.iter_mut().enumerate() {
                *px = if self.is_dark(col, row) { 0 } else { 255 };
            }
            out.write_all(&line)?;
        }
        out.flush()
    }
}

pub fn rasterize_outline(shape: &Shape, cell_size: f64) -> Result<RasterImage, RasterError> {
    rasterize_outline_with(shape, cell_size, &RasterConfig::default())
}

/// A pixel is dark iff its center is on the shape's outline band.
pub fn rasterize_outline_with(
    shape: &Shape,
    cell_size: f64,
    config: &RasterConfig,
) -> Result<RasterImage, RasterError> {
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(RasterError::BadCellSize(cell_size));
    }
    let (w, h) = (config.workspace_width, config.workspace_height);
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(RasterError::BadWorkspace { width: w, height: h });
    }
    let cols = (w / cell_size).ceil();
    let rows = (h / cell_size).ceil();
    if cols * rows > config.max_pixels as f64 {
        return Err(RasterError::TooLarge {
            width: cols as usize,
            height: rows as usize,
            max: config.max_pixels,
        });
    }
    let (width, height) = (cols as usize, rows as usize);
    let mut image = RasterImage {
        width,
        height,
        cell_size,
        pixels: vec![false; width * height],
    };
    for row in 0..height {
        for col in 0..width {
            image.pixels[row * width + col] = on_shape(image.cell_center(col, row), shape);
        }
    }
    Ok(image)
}

/// Workspace position sampled by pin `(row, col)` for a cursor at `p`: one
/// cell per pin, the cursor at the window center, pin row 0 on top.
pub fn pin_sample_point(p: Point, cell_size: f64, row: usize, col: usize) -> Point {
    Point::new(
        p.x + (col as f64 - 1.5) * cell_size,
        p.y - (row as f64 - 1.5) * cell_size,
    )
}

pub fn sample_window(img: &RasterImage, p: Point) -> PinFrame {
    let mut frame = PinFrame::LOWERED;
    for row in 0..4 {
        for col in 0..4 {
            if img.dark_at(pin_sample_point(p, img.cell_size, row, col)) {
                frame.set(row, col, true);
            }
        }
    }
    frame
}
