use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// Predictions are clamped to `[LOG_CLAMP, 1 - LOG_CLAMP]` before any logarithm.
pub const LOG_CLAMP: f64 = 1e-7;

fn clamp_pred(p: f64) -> f64 {
    p.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP)
}

fn check_unit(name: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(v) => Err(Error::Domain(format!("{name} value {v} outside [0, 1]"))),
        None => Ok(()),
    }
}

fn check_pair(preds: &[f64], targets: &[f64], what: &'static str) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::Empty(what));
    }
    if preds.len() != targets.len() {
        return Err(Error::LengthMismatch {
            what,
            left: preds.len(),
            right: targets.len(),
        });
    }
    check_unit("prediction", preds)?;
    check_unit("target", targets)
}

fn bce(pred: f64, target: f64) -> f64 {
    let y = clamp_pred(pred);
    -(target * y.ln() + (1.0 - target) * (1.0 - y).ln())
}

/// Derivative of the per-sample binary cross-entropy with respect to the
/// (clamped) prediction: `-p/y + (1-p)/(1-y)`.
pub fn bce_grad(pred: f64, target: f64) -> f64 {
    let y = clamp_pred(pred);
    -target / y + (1.0 - target) / (1.0 - y)
}

/// Centerness-guided classification score: ratio of the smaller to the larger
/// of target and predicted centerness on positives, zero on negatives.
pub fn cgcs(c_target: f64, c_pred: f64, positive: bool) -> Result<f64> {
    check_unit("centerness", &[c_target, c_pred])?;
    if !positive {
        return Ok(0.0);
    }
    let hi = c_target.max(c_pred);
    if hi == 0.0 {
        return Ok(1.0);
    }
    Ok(c_target.min(c_pred) / hi)
}

/// Cross-entropy of classification predictions against CGCS soft targets,
/// averaged over all samples.
pub fn cjcl_loss(preds: &[f64], scores: &[f64]) -> Result<f64> {
    check_pair(preds, scores, "classification samples")?;
    let sum: f64 = preds.iter().zip(scores).map(|(&y, &p)| bce(y, p)).sum();
    Ok(sum / preds.len() as f64)
}

/// Gradient of [`cjcl_loss`] with respect to each prediction.
pub fn cjcl_loss_grad(preds: &[f64], scores: &[f64]) -> Result<Vec<f64>> {
    check_pair(preds, scores, "classification samples")?;
    let n = preds.len() as f64;
    Ok(preds
        .iter()
        .zip(scores)
        .map(|(&y, &p)| bce_grad(y, p) / n)
        .collect())
}

/// Centerness-weighted IoU loss over positive samples:
/// `-sum(c_i * ln((A_I + 1) / (A_U + 1))) / sum(c_i)`.
pub fn regression_loss(
    pred_boxes: &[BoundingBox],
    gt_boxes: &[BoundingBox],
    weights: &[f64],
) -> Result<f64> {
    if pred_boxes.is_empty() {
        return Err(Error::Empty("positive samples"));
    }
    if pred_boxes.len() != gt_boxes.len() {
        return Err(Error::LengthMismatch {
            what: "predicted vs ground-truth boxes",
            left: pred_boxes.len(),
            right: gt_boxes.len(),
        });
    }
    if weights.len() != pred_boxes.len() {
        return Err(Error::LengthMismatch {
            what: "boxes vs centerness weights",
            left: pred_boxes.len(),
            right: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Domain(format!("centerness weight {w} must be non-negative")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain("centerness weights sum to zero".into()));
    }

    let mut acc = 0.0;
    for ((p, g), &c) in pred_boxes.iter().zip(gt_boxes).zip(weights) {
        // identical boxes contribute exactly zero; corner arithmetic could
        // otherwise leave a rounding residue
        if c == 0.0 || p == g {
            continue;
        }
        let inter = p.intersection_area(g);
        let union = p.union_area(g);
        acc += c * ((inter + 1.0) / (union + 1.0)).ln();
    }
    // -0.0 for perfect predictions
    Ok((-acc / total).max(0.0))
}

/// Mean binary cross-entropy between predicted and target centerness.
pub fn centerness_loss(c_pred: &[f64], c_target: &[f64]) -> Result<f64> {
    check_pair(c_pred, c_target, "centerness samples")?;
    let sum: f64 = c_pred.iter().zip(c_target).map(|(&y, &c)| bce(y, c)).sum();
    Ok(sum / c_pred.len() as f64)
}

/// Gradient of [`centerness_loss`] with respect to each prediction.
pub fn centerness_loss_grad(c_pred: &[f64], c_target: &[f64]) -> Result<Vec<f64>> {
    check_pair(c_pred, c_target, "centerness samples")?;
    let n = c_pred.len() as f64;
    Ok(c_pred
        .iter()
        .zip(c_target)
        .map(|(&y, &c)| bce_grad(y, c) / n)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_cls: f64,
    pub lambda_reg: f64,
    pub lambda_cen: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_cls: 1.0,
            lambda_reg: 2.0,
            lambda_cen: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossComponents {
    pub cls: f64,
    pub reg: f64,
    pub cen: f64,
}

pub fn total_loss(c: &LossComponents, w: &LossWeights) -> Result<f64> {
    for (name, v) in [("cls", c.cls), ("reg", c.reg), ("cen", c.cen)] {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} loss is not finite")));
        }
    }
    for (name, v) in [
        ("lambda_cls", w.lambda_cls),
        ("lambda_reg", w.lambda_reg),
        ("lambda_cen", w.lambda_cen),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("{name} must be non-negative")));
        }
    }
    Ok(w.lambda_cls * c.cls + w.lambda_reg * c.reg + w.lambda_cen * c.cen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bx(cx: f64, cy: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(cx, cy, w, h).unwrap()
    }

    #[test]
    fn cgcs_examples() {
        assert_eq!(cgcs(0.8, 0.8, true).unwrap(), 1.0);
        assert_abs_diff_eq!(cgcs(0.9, 0.3, true).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(cgcs(0.9, 0.3, false).unwrap(), 0.0);
        assert_eq!(cgcs(0.0, 0.0, true).unwrap(), 1.0);
        assert!(cgcs(1.2, 0.3, true).is_err());
    }

    #[test]
    fn cjcl_examples() {
        assert_abs_diff_eq!(cjcl_loss(&[0.5], &[0.5]).unwrap(), 2f64.ln(), epsilon = 1e-12);
        assert!(cjcl_loss(&[0.999999], &[1.0]).unwrap() < 1e-5);
        assert!(cjcl_loss(&[1.0], &[1.0]).unwrap() < 1e-6);
        assert!(matches!(cjcl_loss(&[], &[]), Err(Error::Empty(_))));
        assert!(matches!(cjcl_loss(&[1.5], &[0.5]), Err(Error::Domain(_))));
        assert!(matches!(cjcl_loss(&[0.5], &[-0.1]), Err(Error::Domain(_))));
        assert!(matches!(
            cjcl_loss(&[0.5, 0.2], &[0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn cjcl_equals_bce_for_hard_labels() {
        let preds = [0.2, 0.7, 0.9, 0.4];
        let labels = [0.0, 1.0, 1.0, 0.0];
        let plain: f64 = preds
            .iter()
            .zip(&labels)
            .map(|(&y, &p): (&f64, &f64)| if p == 1.0 { -y.ln() } else { -(1.0 - y).ln() })
            .sum::<f64>()
            / 4.0;
        assert_abs_diff_eq!(cjcl_loss(&preds, &labels).unwrap(), plain, epsilon = 1e-12);
    }

    #[test]
    fn regression_examples() {
        let a = bx(10.0, 10.0, 10.0, 10.0);
        let far = bx(100.0, 100.0, 10.0, 10.0);
        assert_eq!(regression_loss(&[a], &[a], &[1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            regression_loss(&[far], &[a], &[1.0]).unwrap(),
            -(1.0f64 / 201.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            regression_loss(&[far], &[a], &[1.0]).unwrap(),
            5.303,
            epsilon = 1e-3
        );
        assert_eq!(
            regression_loss(&[a, far], &[a, a], &[1.0, 0.0]).unwrap(),
            0.0
        );
        assert!(regression_loss(&[a], &[a], &[0.0]).is_err());
        assert!(regression_loss(&[], &[], &[]).is_err());
    }

    #[test]
    fn centerness_loss_examples() {
        assert!(centerness_loss(&[1.0], &[1.0]).unwrap() < 1e-6);
        assert_abs_diff_eq!(centerness_loss(&[0.5], &[0.5]).unwrap(), 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(centerness_loss(&[0.5], &[1.0]).unwrap(), 2f64.ln(), epsilon = 1e-12);
        assert!(centerness_loss(&[], &[]).is_err());
    }

    #[test]
    fn total_examples() {
        let w = LossWeights::default();
        let t = |cls, reg, cen| total_loss(&LossComponents { cls, reg, cen }, &w).unwrap();
        assert_eq!(t(0.0, 0.0, 0.0), 0.0);
        assert_eq!(t(1.0, 1.0, 1.0), 4.0);
        assert_abs_diff_eq!(t(0.5, 0.25, 0.1), 1.1, epsilon = 1e-12);
        assert!(total_loss(
            &LossComponents {
                cls: f64::NAN,
                reg: 0.0,
                cen: 0.0
            },
            &w
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn cgcs_symmetric(a in 1e-6f64..=1.0, b in 1e-6f64..=1.0) {
            prop_assert_eq!(cgcs(a, b, true).unwrap(), cgcs(b, a, true).unwrap());
        }

        #[test]
        fn cjcl_minimized_at_target(p in 0.01f64..0.99, y in 0.01f64..0.99) {
            let at_target = cjcl_loss(&[p], &[p]).unwrap();
            let entropy = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
            prop_assert!((at_target - entropy).abs() < 1e-12);
            prop_assert!(cjcl_loss(&[y], &[p]).unwrap() >= at_target - 1e-12);
        }

        #[test]
        fn losses_non_negative(preds in proptest::collection::vec(0.0f64..=1.0, 1..20),
                               seed in 0.0f64..=1.0) {
            let targets: Vec<f64> = preds.iter().map(|p| (p * 7.3 + seed).fract()).collect();
            prop_assert!(cjcl_loss(&preds, &targets).unwrap() >= 0.0);
            prop_assert!(centerness_loss(&preds, &targets).unwrap() >= 0.0);
        }

        #[test]
        fn regression_positive_unless_exact(dx in -30.0f64..30.0, dw in 0.5f64..2.0, c in 0.01f64..1.0) {
            let gt = bx(50.0, 50.0, 20.0, 10.0);
            let pred = bx(50.0 + dx, 50.0, 20.0 * dw, 10.0);
            let loss = regression_loss(&[pred], &[gt], &[c]).unwrap();
            prop_assert!(loss >= 0.0);
            if pred != gt {
                prop_assert!(loss > 0.0);
            }
        }
    }
}
