//! Widget extraction from grayscale screenshots.
//!
//! The pipeline is deliberately classical: Canny edge detection over the
//! screenshot, 8-connected components over the edge mask, size filtering and
//! containment merging to turn components into widget bounding boxes, plus
//! the box-geometry utilities (IoU, one-to-one matching) the rest of the
//! engine builds on.

mod canny;
mod components;
pub mod eval;
mod pgm;

pub use canny::canny_edges;
pub use components::extract_widget_boxes;
pub use pgm::{read_pgm, read_pgm_file, write_pgm, write_pgm_file};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("image too small for edge detection: {width}x{height} (minimum 3x3)")]
    ImageTooSmall { width: usize, height: usize },
    #[error("invalid canny thresholds: low {low} must satisfy 0 <= low <= high ({high})")]
    BadThresholds { low: f64, high: f64 },
    #[error("pgm parse error: {0}")]
    PgmFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    /// Creates an image filled with a uniform shade.
    pub fn filled(width: usize, height: usize, shade: u8) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be >= 1");
        Image {
            width,
            height,
            pixels: vec![shade; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Image {
            width,
            height,
            pixels,
        }
    }

    /// Wraps an existing row-major buffer.
    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), width * height, "pixel buffer length mismatch");
        Image {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// True when the box lies fully inside the image bounds.
    pub fn contains_box(&self, b: &WidgetBox) -> bool {
        b.w >= 1 && b.h >= 1 && b.x + b.w <= self.width && b.y + b.h <= self.height
    }
}

/// Binary edge mask produced by [`canny_edges`]; same dimensions as its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize) -> Self {
        EdgeMap {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Iterates over edge pixel coordinates in row-major order.
    pub fn edge_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Detected screen rectangle: left-upper corner plus width and height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WidgetBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl WidgetBox {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        assert!(w >= 1 && h >= 1, "widget box sides must be >= 1");
        WidgetBox { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    /// One past the rightmost column.
    pub fn right(&self) -> usize {
        self.x + self.w
    }

    /// One past the bottom row.
    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    /// True when `inner` lies fully inside `self`.
    pub fn contains(&self, inner: &WidgetBox) -> bool {
        inner.x >= self.x
            && inner.y >= self.y
            && inner.right() <= self.right()
            && inner.bottom() <= self.bottom()
    }

    pub fn intersection_area(&self, other: &WidgetBox) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            0
        } else {
            (x1 - x0) * (y1 - y0)
        }
    }
}

/// Intersection-over-union of two boxes; 0 when disjoint, 1 when identical.
pub fn iou(a: &WidgetBox, b: &WidgetBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

/// Greedy one-to-one matching of two box lists in descending IoU order.
///
/// Only pairs with IoU strictly above `threshold` are returned; each index is
/// used at most once per side, and unmatched boxes are dropped. Ties on IoU
/// prefer the smaller index in `a`, then in `b`.
pub fn match_widgets(a: &[WidgetBox], b: &[WidgetBox], threshold: f64) -> Vec<(usize, usize)> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ba) in a.iter().enumerate() {
        for (j, bb) in b.iter().enumerate() {
            let v = iou(ba, bb);
            if v > threshold {
                candidates.push((v, i, j));
            }
        }
    }
    candidates.sort_by(|l, r| {
        r.0.total_cmp(&l.0)
            .then_with(|| l.1.cmp(&r.1))
            .then_with(|| l.2.cmp(&r.2))
    });
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    pairs
}

/// Tunables for the detection pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisionConfig {
    /// Low hysteresis threshold on the Sobel gradient magnitude (0-255 scale input).
    pub canny_low: f64,
    /// High hysteresis threshold.
    pub canny_high: f64,
    /// Components whose bounding box covers less than this fraction of the image are noise.
    pub min_area_fraction: f64,
    /// Boxes with either side below this many pixels are noise.
    pub min_side: usize,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            canny_low: 50.0,
            canny_high: 150.0,
            min_area_fraction: 0.0005,
            min_side: 4,
        }
    }
}

/// Full detection pipeline: Canny edges, then component boxes.
pub fn detect_widgets(img: &Image, cfg: &VisionConfig) -> Result<Vec<WidgetBox>, VisionError> {
    let edges = canny_edges(img, cfg.canny_low, cfg.canny_high)?;
    Ok(extract_widget_boxes(
        &edges,
        cfg.min_area_fraction,
        cfg.min_side,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iou_identical_boxes_is_one() {
        let b = WidgetBox::new(3, 4, 10, 12);
        assert_eq!(iou(&b, &b), 1.0);
    }

    #[test]
    fn iou_disjoint_boxes_is_zero() {
        let a = WidgetBox::new(0, 0, 5, 5);
        let b = WidgetBox::new(10, 10, 5, 5);
        assert_eq!(iou(&a, &b), 0.0);
    }

    #[test]
    fn iou_half_overlap_hand_case() {
        // (0,0,10,10) vs (5,0,10,10): intersection 50, union 150.
        let a = WidgetBox::new(0, 0, 10, 10);
        let b = WidgetBox::new(5, 0, 10, 10);
        assert!((iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn match_empty_side_yields_no_pairs() {
        let b = vec![WidgetBox::new(0, 0, 4, 4)];
        assert!(match_widgets(&[], &b, 0.8).is_empty());
    }

    #[test]
    fn match_identical_lists_is_identity() {
        let a = vec![
            WidgetBox::new(0, 0, 10, 10),
            WidgetBox::new(20, 0, 10, 10),
            WidgetBox::new(0, 20, 10, 10),
        ];
        let pairs = match_widgets(&a, &a, 0.8);
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn match_prefers_higher_iou() {
        // a[0] matches b[1] exactly; the partial overlap with b[0] loses.
        let a = vec![WidgetBox::new(0, 0, 10, 10)];
        let b = vec![WidgetBox::new(1, 0, 10, 10), WidgetBox::new(0, 0, 10, 10)];
        assert_eq!(match_widgets(&a, &b, 0.5), vec![(0, 1)]);
    }

    #[test]
    fn match_is_injective_both_sides() {
        let a = vec![WidgetBox::new(0, 0, 10, 10), WidgetBox::new(1, 0, 10, 10)];
        let b = vec![WidgetBox::new(0, 0, 10, 10)];
        let pairs = match_widgets(&a, &b, 0.5);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0], (0, 0));
    }
}
