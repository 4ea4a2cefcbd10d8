use super::{BoundingBox, ImagePoint};
use crate::error::GeometryError;

/// Row-major foreground mask; `true` marks a non-background pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask { width, height, bits: vec![false; width * height] }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, GeometryError> {
        if bits.len() != width * height {
            return Err(GeometryError::MaskSize { expected: width * height, got: bits.len() });
        }
        Ok(BinaryMask { width, height, bits })
    }

    /// Builds a mask from rows of `'#'` (foreground) and any other character.
    pub fn from_ascii(rows: &[&str]) -> Result<Self, GeometryError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut bits = Vec::with_capacity(width * height);
        for r in rows {
            bits.extend(r.chars().map(|c| c == '#'));
        }
        Self::from_bits(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    /// Sets every pixel of the half-open rectangle, clipped to the mask.
    pub fn fill_rect(&mut self, left: f64, top: f64, right: f64, bottom: f64) {
        let c0 = left.max(0.0).floor() as usize;
        let r0 = top.max(0.0).floor() as usize;
        let c1 = (right.ceil().max(0.0) as usize).min(self.width);
        let r1 = (bottom.ceil().max(0.0) as usize).min(self.height);
        for row in r0..r1 {
            let base = row * self.width;
            for b in &mut self.bits[base + c0.min(c1)..base + c1] {
                *b = true;
            }
        }
    }
}

/// Scans the bounding box, expanded by `expand` pixels on every side and clamped
/// to the mask, from the bottom row upwards. The first row holding at least
/// `min_row_count` foreground pixels yields `(mean foreground column, row)`.
/// Falls back to the box bottom-centre when no row qualifies.
pub fn refine_foot_point(mask: &BinaryMask, bbox: &BoundingBox, expand: f64, min_row_count: usize) -> ImagePoint {
    let fallback = bbox.bottom_center();
    let expand = expand.max(0.0);
    let c0 = (bbox.left - expand).floor().max(0.0) as usize;
    let r0 = (bbox.top - expand).floor().max(0.0) as usize;
    let c1 = ((bbox.left + bbox.width + expand).ceil().max(0.0) as usize).min(mask.width);
    let r1 = ((bbox.top + bbox.height + expand).ceil().max(0.0) as usize).min(mask.height);
    if c0 >= c1 || r0 >= r1 {
        return fallback;
    }
    let min_row_count = min_row_count.max(1);
    for row in (r0..r1).rev() {
        let mut count = 0usize;
        let mut sum = 0usize;
        for col in c0..c1 {
            if mask.get(col, row) {
                count += 1;
                sum += col;
            }
        }
        if count >= min_row_count {
            return ImagePoint::new(sum as f64 / count as f64, row as f64);
        }
    }
    fallback
}
