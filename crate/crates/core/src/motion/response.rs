use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// Added to the sidelobe standard deviation so that flat sidelobes give a
/// finite PSR.
pub const PSR_EPSILON: f64 = 1e-6;

/// `H x W` score grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap {
    height: usize,
    width: usize,
    scores: Vec<f64>,
}

impl ResponseMap {
    /// Requires at least 3x3 cells so the sidelobe is never empty.
    pub fn new(height: usize, width: usize, scores: Vec<f64>) -> Result<Self> {
        if height < 3 || width < 3 {
            return Err(Error::Dimension(format!(
                "response map must be at least 3x3, got {height}x{width}"
            )));
        }
        if scores.len() != height * width {
            return Err(Error::Dimension(format!(
                "response map {height}x{width} needs {} scores, got {}",
                height * width,
                scores.len()
            )));
        }
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("response map contains non-finite scores".into()));
        }
        Ok(Self {
            height,
            width,
            scores,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut scores = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                scores.push(f(r, c));
            }
        }
        Self::new(height, width, scores)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.scores[row * self.width + col]
    }

    /// `(row, col, value)` of the maximum; ties go to the smallest row-major index.
    pub fn peak(&self) -> (usize, usize, f64) {
        let mut best = 0;
        for (i, &v) in self.scores.iter().enumerate().skip(1) {
            if v > self.scores[best] {
                best = i;
            }
        }
        (best / self.width, best % self.width, self.scores[best])
    }

    /// Copy with `delta` added to every cell.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.scores.iter().map(|v| v + delta).collect(),
        )
    }
}

/// Peak-to-sidelobe ratio `(g_max - mu_sl) / (sigma_sl + eps)`.
///
/// The sidelobe is every cell outside the 3x3 block centered on the peak,
/// clipped at the map border; `sigma_sl` is the population standard deviation.
pub fn psr(map: &ResponseMap) -> f64 {
    let (pr, pc, peak) = map.peak();
    if map.scores.iter().all(|&v| v == peak) {
        return 0.0;
    }
    let r0 = pr.saturating_sub(1);
    let r1 = (pr + 1).min(map.height - 1);
    let c0 = pc.saturating_sub(1);
    let c1 = (pc + 1).min(map.width - 1);

    let mut n = 0usize;
    let mut sum = 0.0;
    for r in 0..map.height {
        let row = &map.scores[r * map.width..(r + 1) * map.width];
        for (c, &v) in row.iter().enumerate() {
            if (r0..=r1).contains(&r) && (c0..=c1).contains(&c) {
                continue;
            }
            n += 1;
            sum += v;
        }
    }
    let mean = sum / n as f64;
    let mut sq = 0.0;
    for r in 0..map.height {
        let row = &map.scores[r * map.width..(r + 1) * map.width];
        for (c, &v) in row.iter().enumerate() {
            if (r0..=r1).contains(&r) && (c0..=c1).contains(&c) {
                continue;
            }
            sq += (v - mean) * (v - mean);
        }
    }
    let sigma = (sq / n as f64).sqrt();
    ((peak - mean) / (sigma + PSR_EPSILON)).max(0.0)
}

/// Maps a response-grid cell to image coordinates: cell `(i, j)` lands at
/// `(offset + j * scale, offset + i * scale)` with `offset = floor(scale / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMapping {
    pub scale: f64,
    pub offset: f64,
}

impl CellMapping {
    pub fn new(scale: f64) -> Self {
        Self {
            scale,
            offset: (scale / 2.0).floor(),
        }
    }

    pub fn to_image(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.offset + col as f64 * self.scale,
            self.offset + row as f64 * self.scale,
        )
    }
}

/// Box centered on the response peak, carrying the caller's size estimate.
pub fn peak_to_box(map: &ResponseMap, mapping: CellMapping, prev_size: [f64; 2]) -> Result<BoundingBox> {
    let (row, col, _) = map.peak();
    let (cx, cy) = mapping.to_image(row, col);
    BoundingBox::new(cx, cy, prev_size[0], prev_size[1])
}
