//! Aspect-ratio-constrained label assignment for an anchor-free tracking head.
//!
//! Every grid point inside the ground-truth box receives a centerness target.
//! The classic target decays symmetrically towards all four sides; the
//! constrained variant raises the per-axis ratios to exponents derived from the
//! box aspect ratio, so that elongated targets keep high centerness along their
//! principal axis.

mod loss;

pub use loss::{
    bce_grad, centerness_loss, centerness_loss_grad, cgcs, cjcl_loss, cjcl_loss_grad,
    regression_loss, total_loss, LossComponents, LossWeights, LOG_CLAMP,
};

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// Distances from a grid point to the left, right, top and bottom sides of a
/// ground-truth box, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionTarget {
    pub l: f64,
    pub r: f64,
    pub t: f64,
    pub b: f64,
}

impl RegressionTarget {
    pub fn new(l: f64, r: f64, t: f64, b: f64) -> Self {
        Self { l, r, t, b }
    }

    /// Target of the image-space point `(x, y)` with respect to `gt`.
    /// Fields are negative when the point lies outside the box.
    pub fn from_point(x: f64, y: f64, gt: &BoundingBox) -> Self {
        Self {
            l: x - gt.left(),
            r: gt.right() - x,
            t: y - gt.top(),
            b: gt.bottom() - y,
        }
    }

    /// A point is a positive sample iff it lies strictly inside the box.
    pub fn is_positive(&self) -> bool {
        self.l > 0.0 && self.r > 0.0 && self.t > 0.0 && self.b > 0.0
    }

    /// Horizontal over vertical extent, `(l + r) / (t + b)`.
    pub fn aspect_ratio(&self) -> f64 {
        (self.l + self.r) / (self.t + self.b)
    }

    fn check(&self) -> Result<()> {
        let fields = [self.l, self.r, self.t, self.b];
        if fields.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!(
                "regression target {self:?} must have finite non-negative distances"
            )));
        }
        if self.l + self.r <= 0.0 || self.t + self.b <= 0.0 {
            return Err(Error::Degenerate(format!(
                "regression target {self:?} describes a zero-width or zero-height box"
            )));
        }
        Ok(())
    }

    fn horizontal_ratio(&self) -> f64 {
        self.l.min(self.r) / self.l.max(self.r)
    }

    fn vertical_ratio(&self) -> f64 {
        self.t.min(self.b) / self.t.max(self.b)
    }
}

/// Strength of the aspect-ratio constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AspectRatioParams {
    pub gamma: f64,
}

impl Default for AspectRatioParams {
    fn default() -> Self {
        Self { gamma: 0.5 }
    }
}

impl AspectRatioParams {
    pub fn new(gamma: f64) -> Result<Self> {
        let p = Self { gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// `sqrt(min(l,r)/max(l,r) * min(t,b)/max(t,b))`.
pub fn classic_centerness(t: &RegressionTarget) -> Result<f64> {
    t.check()?;
    Ok((t.horizontal_ratio() * t.vertical_ratio()).sqrt())
}

/// `min(1, rho^gamma)`.
pub fn modulation_factor(rho: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Domain(format!("aspect ratio must be positive, got {rho}")));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    Ok(rho.powf(gamma).min(1.0))
}

// x^1 is kept exact so that square boxes reproduce the classic target bit for bit.
fn pow_exact_one(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// Centerness with the horizontal ratio raised to `alpha(1/rho)` and the
/// vertical ratio raised to `alpha(rho)`, where `rho = (l+r)/(t+b)`.
pub fn ar_centerness(t: &RegressionTarget, params: &AspectRatioParams) -> Result<f64> {
    t.check()?;
    ar_centerness_with_ratio(t, t.aspect_ratio(), params)
}

/// [`ar_centerness`] with the aspect ratio supplied by the caller, normally
/// the box's `w / h`. Equal to `(l+r)/(t+b)` in exact arithmetic, but exactly
/// 1 for square boxes, which keeps their targets identical to the classic ones.
pub fn ar_centerness_with_ratio(t: &RegressionTarget, rho: f64, params: &AspectRatioParams) -> Result<f64> {
    t.check()?;
    params.validate()?;
    let horizontal_exp = modulation_factor(1.0 / rho, params.gamma)?;
    let vertical_exp = modulation_factor(rho, params.gamma)?;
    let value = pow_exact_one(t.horizontal_ratio(), horizontal_exp)
        * pow_exact_one(t.vertical_ratio(), vertical_exp);
    Ok(value.sqrt())
}

/// Output grid of the classification head.
///
/// Cell `(i, j)` sits at image coordinate
/// `(stride / 2 + j * stride, stride / 2 + i * stride)` with integer halving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridGeometry {
    pub stride: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Default for GridGeometry {
    /// 25x25 cells at stride 8, covering a 255x255 search region.
    fn default() -> Self {
        Self {
            stride: 8,
            rows: 25,
            cols: 25,
        }
    }
}

impl GridGeometry {
    pub fn new(stride: usize, rows: usize, cols: usize) -> Result<Self> {
        let g = Self { stride, rows, cols };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stride == 0 {
            return Err(Error::Config("grid stride must be positive".into()));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Config("grid must have at least one cell".into()));
        }
        Ok(())
    }

    pub fn offset(&self) -> f64 {
        (self.stride / 2) as f64
    }

    /// Image-space `(x, y)` of cell `(row, col)`.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        let s = self.stride as f64;
        (self.offset() + col as f64 * s, self.offset() + row as f64 * s)
    }

    /// Image-space extent `(min, max)` of the cell centers along x and y.
    fn span(&self) -> ((f64, f64), (f64, f64)) {
        let (x0, y0) = self.cell_center(0, 0);
        let (x1, y1) = self.cell_center(self.rows - 1, self.cols - 1);
        ((x0, x1), (y0, y1))
    }
}

/// Why a label map carries no positive samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelWarning {
    /// The box does not overlap the region spanned by the grid.
    OutsideGrid,
    /// The box overlaps the grid but no cell center lies strictly inside it.
    NoPositiveSamples,
}

/// Per-cell supervision targets over the output grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMaps {
    pub grid: GridGeometry,
    pub centerness: Vec<f64>,
    pub cls_label: Vec<bool>,
    pub warning: Option<LabelWarning>,
}

impl LabelMaps {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.centerness[row * self.grid.cols + col]
    }

    pub fn positive_count(&self) -> usize {
        self.cls_label.iter().filter(|&&y| y).count()
    }

    /// Centerness values of one grid row.
    pub fn row(&self, row: usize) -> &[f64] {
        let c = self.grid.cols;
        &self.centerness[row * c..(row + 1) * c]
    }

    /// Centerness values of one grid column.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.grid.rows).map(|r| self.at(r, col)).collect()
    }
}

/// How a grid point's centerness target is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenternessKind {
    Classic,
    AspectRatio(AspectRatioParams),
}

impl CenternessKind {
    pub fn evaluate(&self, t: &RegressionTarget) -> Result<f64> {
        match self {
            CenternessKind::Classic => classic_centerness(t),
            CenternessKind::AspectRatio(p) => ar_centerness(t, p),
        }
    }

    fn evaluate_in_box(&self, t: &RegressionTarget, gt: &BoundingBox) -> Result<f64> {
        match self {
            CenternessKind::Classic => classic_centerness(t),
            CenternessKind::AspectRatio(p) => ar_centerness_with_ratio(t, gt.w / gt.h, p),
        }
    }
}

/// Label maps with aspect-ratio-constrained centerness targets.
pub fn build_label_maps(
    gt_box: &BoundingBox,
    grid: &GridGeometry,
    params: &AspectRatioParams,
) -> Result<LabelMaps> {
    params.validate()?;
    build_label_maps_with(gt_box, grid, CenternessKind::AspectRatio(*params))
}

/// Label maps using an explicit centerness variant.
pub fn build_label_maps_with(
    gt_box: &BoundingBox,
    grid: &GridGeometry,
    kind: CenternessKind,
) -> Result<LabelMaps> {
    gt_box.validate()?;
    grid.validate()?;
    let n = grid.rows * grid.cols;
    let mut centerness = vec![0.0; n];
    let mut cls_label = vec![false; n];
    for row in 0..grid.rows {
        for col in 0..grid.cols {
            let (x, y) = grid.cell_center(row, col);
            let t = RegressionTarget::from_point(x, y, gt_box);
            if t.is_positive() {
                let idx = row * grid.cols + col;
                cls_label[idx] = true;
                centerness[idx] = kind.evaluate_in_box(&t, gt_box)?;
            }
        }
    }

    let warning = if cls_label.iter().any(|&y| y) {
        None
    } else {
        let ((x0, x1), (y0, y1)) = grid.span();
        let overlaps = gt_box.right() > x0
            && gt_box.left() < x1
            && gt_box.bottom() > y0
            && gt_box.top() < y1;
        Some(if overlaps {
            LabelWarning::NoPositiveSamples
        } else {
            LabelWarning::OutsideGrid
        })
    };

    Ok(LabelMaps {
        grid: *grid,
        centerness,
        cls_label,
        warning,
    })
}
