//! One-pass evaluation: every frame of a run is scored against ground truth
//! and the per-frame errors are reduced to precision, normalized precision and
//! success curves.
//!
//! Thresholds are generated as `i`, `i / 100` and `i / 20` so every curve
//! position has one exact floating-point value.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

pub const PRECISION_STEPS: usize = 51;
pub const NORM_PRECISION_STEPS: usize = 51;
pub const SUCCESS_STEPS: usize = 21;

/// Center-error threshold at curve position `i`, pixels.
pub fn precision_threshold(i: usize) -> f64 {
    i as f64
}

pub fn norm_precision_threshold(i: usize) -> f64 {
    i as f64 / 100.0
}

pub fn success_threshold(i: usize) -> f64 {
    i as f64 / 20.0
}

/// Non-empty per-frame box sequence with positive sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory(Vec<BoundingBox>);

impl Trajectory {
    pub fn new(boxes: Vec<BoundingBox>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::Empty("trajectory"));
        }
        for b in &boxes {
            b.validate()?;
        }
        Ok(Self(boxes))
    }

    pub fn boxes(&self) -> &[BoundingBox] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.iter().map(|b| b.scaled(s)).collect())
    }
}

/// Center location error in pixels.
pub fn cle(pred: &BoundingBox, gt: &BoundingBox) -> f64 {
    (pred.cx - gt.cx).hypot(pred.cy - gt.cy)
}

/// Center offset divided component-wise by the ground-truth size.
pub fn normalized_cle(pred: &BoundingBox, gt: &BoundingBox) -> Result<f64> {
    if !(gt.w > 0.0 && gt.h > 0.0) {
        return Err(Error::Degenerate(format!(
            "ground-truth size {}x{} cannot normalize a center error",
            gt.w, gt.h
        )));
    }
    Ok(((pred.cx - gt.cx) / gt.w).hypot((pred.cy - gt.cy) / gt.h))
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    (inter / a.union_area(b)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    /// Fraction of frames with `cle <= precision_threshold(i)`.
    pub precision_curve: Vec<f64>,
    /// Fraction of frames with `normalized_cle <= norm_precision_threshold(i)`.
    pub norm_precision_curve: Vec<f64>,
    /// Fraction of frames with `iou > success_threshold(i)`.
    pub success_curve: Vec<f64>,
    pub p5: f64,
    pub p20: f64,
    pub np05: f64,
    pub success_auc: f64,
}

impl EvalResult {
    fn from_curves(precision: Vec<f64>, norm: Vec<f64>, success: Vec<f64>) -> Self {
        let success_auc = success.iter().sum::<f64>() / success.len() as f64;
        Self {
            p5: precision[5],
            p20: precision[20],
            np05: norm[50],
            success_auc,
            precision_curve: precision,
            norm_precision_curve: norm,
            success_curve: success,
        }
    }

    /// `(name, value)` of every scalar, in serialization order.
    pub fn scalars(&self) -> [(&'static str, f64); 4] {
        [
            ("p5", self.p5),
            ("p20", self.p20),
            ("np05", self.np05),
            ("success_auc", self.success_auc),
        ]
    }
}

fn fraction(errors: &[f64], steps: usize, hit: impl Fn(f64, usize) -> bool) -> Vec<f64> {
    let n = errors.len() as f64;
    (0..steps)
        .map(|i| errors.iter().filter(|&&e| hit(e, i)).count() as f64 / n)
        .collect()
}

pub fn evaluate(pred: &Trajectory, gt: &Trajectory) -> Result<EvalResult> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            what: "prediction vs ground-truth frames",
            left: pred.len(),
            right: gt.len(),
        });
    }
    let pairs = || pred.boxes().iter().zip(gt.boxes());
    let centers: Vec<f64> = pairs().map(|(p, g)| cle(p, g)).collect();
    let normalized = pairs()
        .map(|(p, g)| normalized_cle(p, g))
        .collect::<Result<Vec<_>>>()?;
    let overlaps: Vec<f64> = pairs().map(|(p, g)| iou(p, g)).collect();

    Ok(EvalResult::from_curves(
        fraction(&centers, PRECISION_STEPS, |e, i| e <= precision_threshold(i)),
        fraction(&normalized, NORM_PRECISION_STEPS, |e, i| e <= norm_precision_threshold(i)),
        fraction(&overlaps, SUCCESS_STEPS, |o, i| o > success_threshold(i)),
    ))
}

/// Unweighted mean of every curve and scalar.
pub fn mean_result<'a>(results: impl IntoIterator<Item = &'a EvalResult>) -> Result<EvalResult> {
    let results: Vec<&EvalResult> = results.into_iter().collect();
    if results.is_empty() {
        return Err(Error::Empty("results to average"));
    }
    let n = results.len() as f64;
    let mean_curve = |get: fn(&EvalResult) -> &Vec<f64>| -> Vec<f64> {
        let len = get(results[0]).len();
        (0..len)
            .map(|i| results.iter().map(|r| get(r)[i]).sum::<f64>() / n)
            .collect()
    };
    let mean_scalar = |get: fn(&EvalResult) -> f64| results.iter().map(|r| get(r)).sum::<f64>() / n;
    Ok(EvalResult {
        precision_curve: mean_curve(|r| &r.precision_curve),
        norm_precision_curve: mean_curve(|r| &r.norm_precision_curve),
        success_curve: mean_curve(|r| &r.success_curve),
        p5: mean_scalar(|r| r.p5),
        p20: mean_scalar(|r| r.p20),
        np05: mean_scalar(|r| r.np05),
        success_auc: mean_scalar(|r| r.success_auc),
    })
}

/// Per-attribute mean over the sequences each group lists.
pub fn aggregate(
    results: &BTreeMap<String, EvalResult>,
    groups: &BTreeMap<String, Vec<String>>,
) -> Result<BTreeMap<String, EvalResult>> {
    let mut out = BTreeMap::new();
    for (group, ids) in groups {
        if ids.is_empty() {
            return Err(Error::Config(format!("attribute group `{group}` lists no sequences")));
        }
        let members = ids
            .iter()
            .map(|id| {
                results.get(id).ok_or_else(|| Error::UnknownSequence {
                    group: group.clone(),
                    sequence: id.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(group.clone(), mean_result(members)?);
    }
    Ok(out)
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
    fn cle_examples() {
        let g = bx(50.0, 50.0, 10.0, 20.0);
        assert_eq!(cle(&g, &g), 0.0);
        assert_eq!(cle(&bx(53.0, 54.0, 1.0, 1.0), &g), 5.0);
        assert_eq!(cle(&bx(55.0, 50.0, 1.0, 1.0), &g), 5.0);
    }

    #[test]
    fn normalized_cle_examples() {
        let g = bx(50.0, 50.0, 10.0, 20.0);
        assert_eq!(normalized_cle(&g, &g).unwrap(), 0.0);
        assert_eq!(normalized_cle(&bx(55.0, 50.0, 3.0, 3.0), &g).unwrap(), 0.5);
        assert_abs_diff_eq!(
            normalized_cle(&bx(60.0, 70.0, 3.0, 3.0), &g).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-15
        );
        let flat = BoundingBox { cx: 0.0, cy: 0.0, w: 0.0, h: 5.0 };
        assert!(normalized_cle(&g, &flat).is_err());
    }

    #[test]
    fn iou_examples() {
        let a = bx(5.0, 5.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bx(100.0, 5.0, 10.0, 10.0)), 0.0);
        // touching edges share no area
        assert_eq!(iou(&a, &bx(15.0, 5.0, 10.0, 10.0)), 0.0);
        assert_abs_diff_eq!(iou(&a, &bx(10.0, 5.0, 10.0, 10.0)), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn perfect_and_hopeless_runs() {
        let gt = Trajectory::new((0..12).map(|k| bx(20.0 + k as f64, 30.0, 8.0, 6.0)).collect()).unwrap();
        let r = evaluate(&gt, &gt).unwrap();
        assert_eq!((r.p5, r.p20, r.np05), (1.0, 1.0, 1.0));
        assert!(r.success_curve[..20].iter().all(|&v| v == 1.0));
        assert_eq!(r.success_curve[20], 0.0);
        assert_abs_diff_eq!(r.success_auc, 20.0 / 21.0, epsilon = 1e-15);

        let far = Trajectory::new(gt.boxes().iter().map(|b| bx(b.cx + 80.0, b.cy, 8.0, 6.0)).collect()).unwrap();
        let r = evaluate(&far, &gt).unwrap();
        assert_eq!((r.p5, r.p20, r.np05, r.success_auc), (0.0, 0.0, 0.0, 0.0));
        assert!(r.precision_curve.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn counting_fixture() {
        let gt: Vec<_> = (0..10).map(|k| bx(100.0, 10.0 * k as f64 + 50.0, 20.0, 20.0)).collect();
        let pred: Vec<_> = gt
            .iter()
            .enumerate()
            .map(|(k, g)| if k < 4 { bx(g.cx + 3.0, g.cy, 20.0, 20.0) } else { bx(g.cx, g.cy - 12.0, 20.0, 20.0) })
            .collect();
        let r = evaluate(&Trajectory::new(pred).unwrap(), &Trajectory::new(gt).unwrap()).unwrap();
        assert_eq!(r.p5, 0.4);
        assert_eq!(r.p20, 1.0);
        assert_eq!(r.precision_curve[2], 0.0);
        assert_eq!(r.precision_curve[3], 0.4);
        assert_eq!(r.precision_curve[12], 1.0);
    }

    #[test]
    fn length_and_emptiness_checked() {
        let a = Trajectory::new(vec![bx(0.0, 0.0, 1.0, 1.0); 3]).unwrap();
        let b = Trajectory::new(vec![bx(0.0, 0.0, 1.0, 1.0); 2]).unwrap();
        assert!(matches!(
            evaluate(&a, &b),
            Err(Error::LengthMismatch { left: 3, right: 2, .. })
        ));
        assert!(Trajectory::new(vec![]).is_err());
    }

    fn result_with_p5(p5: f64) -> EvalResult {
        EvalResult::from_curves(vec![p5; PRECISION_STEPS], vec![0.5; NORM_PRECISION_STEPS], vec![1.0; SUCCESS_STEPS])
    }

    #[test]
    fn aggregate_examples() {
        let mut results = BTreeMap::new();
        results.insert("a".to_string(), result_with_p5(0.2));
        results.insert("b".to_string(), result_with_p5(0.8));
        let mut groups = BTreeMap::new();
        groups.insert("solo".to_string(), vec!["a".to_string()]);
        groups.insert("both".to_string(), vec!["a".to_string(), "b".to_string()]);
        let agg = aggregate(&results, &groups).unwrap();
        assert_eq!(agg["solo"], results["a"]);
        assert_abs_diff_eq!(agg["both"].p5, 0.5, epsilon = 1e-15);
        assert_eq!(agg["both"], mean_result(results.values()).unwrap());

        groups.insert("bad".to_string(), vec!["zzz".to_string()]);
        assert!(matches!(
            aggregate(&results, &groups),
            Err(Error::UnknownSequence { .. })
        ));
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0.0..200.0f64, 0.0..200.0f64, 1.0..40.0f64, 1.0..40.0f64)
            .prop_map(|(cx, cy, w, h)| BoundingBox::new(cx, cy, w, h).unwrap())
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<BoundingBox>, Vec<BoundingBox>)> {
        (1usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(arb_box(), n),
                proptest::collection::vec(arb_box(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn curves_are_monotone((p, g) in arb_pair()) {
            let r = evaluate(&Trajectory::new(p).unwrap(), &Trajectory::new(g).unwrap()).unwrap();
            for w in r.precision_curve.windows(2) { prop_assert!(w[0] <= w[1]); }
            for w in r.norm_precision_curve.windows(2) { prop_assert!(w[0] <= w[1]); }
            for w in r.success_curve.windows(2) { prop_assert!(w[0] >= w[1]); }
            let all = r.precision_curve.iter().chain(&r.norm_precision_curve).chain(&r.success_curve);
            for &v in all { prop_assert!((0.0..=1.0).contains(&v)); }
        }

        #[test]
        fn iou_symmetric(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(iou(&a, &b), iou(&b, &a));
            prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn scale_covariance(a in arb_box(), b in arb_box(), s in 0.1..10.0f64) {
            let (sa, sb) = (a.scaled(s), b.scaled(s));
            prop_assert!((cle(&sa, &sb) - s * cle(&a, &b)).abs() < 1e-9 * (1.0 + s * cle(&a, &b)));
            prop_assert!((normalized_cle(&sa, &sb).unwrap() - normalized_cle(&a, &b).unwrap()).abs() < 1e-9);
            prop_assert!((iou(&sa, &sb) - iou(&a, &b)).abs() < 1e-9);
        }
    }
}
