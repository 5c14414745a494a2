use super::scenario::{FrameObservation, ScenarioConfig, ScenarioStepper};
use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::eval::cle;
use crate::motion::{observe_confidence, ommr_step, Branch, OmmrParams, TrackerState};

/// Per-frame confidence record of a tracking run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub frame: usize,
    pub psr: f64,
    pub npsr: f64,
    /// `None` when refinement is disabled.
    pub branch: Option<Branch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRun {
    /// What the tracker observed on every frame.
    pub frames: Vec<FrameObservation>,
    /// Tracker output per frame.
    pub boxes: Vec<BoundingBox>,
    pub trace: Vec<TraceRow>,
}

impl TrackingRun {
    pub fn ground_truth(&self) -> Vec<BoundingBox> {
        self.frames.iter().map(|f| f.gt_box).collect()
    }

    pub fn drift(&self) -> Vec<f64> {
        self.boxes
            .iter()
            .zip(&self.frames)
            .map(|(b, f)| cle(b, &f.gt_box))
            .collect()
    }
}

/// Tracks a scenario in closed loop: every frame is searched around the
/// previous tracker output. With refinement enabled each raw model box and
/// response map passes through [`ommr_step`]; otherwise the output is the raw
/// model box and only the confidence trace is computed, which reproduces
/// [`super::generate_scenario`] exactly.
pub fn run_tracking(config: &ScenarioConfig, params: &OmmrParams, ommr_enabled: bool) -> Result<TrackingRun> {
    if config.frame_count < 2 {
        return Err(Error::Config(format!(
            "tracking needs at least 2 frames, scenario has {}",
            config.frame_count
        )));
    }
    params.validate()?;
    let mut stepper = ScenarioStepper::new(config)?;
    let mut state = TrackerState::for_params(params);
    let n = config.frame_count;
    let mut frames = Vec::with_capacity(n);
    let mut boxes: Vec<BoundingBox> = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n);
    for _ in 0..n {
        let obs = stepper.step(boxes.last().map(BoundingBox::center))?;
        let row = if ommr_enabled {
            let step = ommr_step(&mut state, &obs.raw_model_box, &obs.response, params)?;
            boxes.push(step.refined);
            TraceRow {
                frame: obs.frame,
                psr: step.confidence.psr,
                npsr: step.confidence.npsr,
                branch: Some(step.branch),
            }
        } else {
            let c = observe_confidence(&obs.response, &mut state);
            boxes.push(obs.raw_model_box);
            TraceRow {
                frame: obs.frame,
                psr: c.psr,
                npsr: c.npsr,
                branch: None,
            }
        };
        trace.push(row);
        frames.push(obs);
    }
    Ok(TrackingRun { frames, boxes, trace })
}

/// Center location error of every frame.
pub fn drift_series(trajectory: &[BoundingBox], ground_truth: &[BoundingBox]) -> Result<Vec<f64>> {
    if trajectory.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            what: "trajectory vs ground truth",
            left: trajectory.len(),
            right: ground_truth.len(),
        });
    }
    Ok(trajectory
        .iter()
        .zip(ground_truth)
        .map(|(p, g)| cle(p, g))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{generate_scenario, ScenarioConfig};

    fn bx(cx: f64, cy: f64) -> BoundingBox {
        BoundingBox::new(cx, cy, 10.0, 10.0).unwrap()
    }

    #[test]
    fn drift_examples() {
        let a = vec![bx(1.0, 2.0), bx(5.0, 5.0)];
        assert_eq!(drift_series(&a, &a).unwrap(), vec![0.0, 0.0]);
        let b: Vec<_> = a.iter().map(|p| bx(p.cx + 3.0, p.cy + 4.0)).collect();
        assert_eq!(drift_series(&b, &a).unwrap(), vec![5.0, 5.0]);
        assert_eq!(drift_series(&[bx(1.0, 0.0)], &[bx(0.0, 0.0)]).unwrap(), vec![1.0]);
        assert!(drift_series(&a, &a[..1]).is_err());
    }

    #[test]
    fn clean_scenario_tracks_in_both_modes() {
        let cfg = ScenarioConfig::constant_velocity(150, (60.0, 90.0), (0.8, -0.3), (10.0, 6.0), 5);
        let params = OmmrParams::default();
        for enabled in [false, true] {
            let run = run_tracking(&cfg, &params, enabled).unwrap();
            assert!(run.drift().iter().all(|&d| d < 2.0), "enabled={enabled}");
            assert_eq!(run.drift(), drift_series(&run.boxes, &run.ground_truth()).unwrap());
        }
    }

    #[test]
    fn warm_up_only_run_is_raw() {
        let params = OmmrParams::default();
        let mut cfg = ScenarioConfig::constant_velocity(params.n1, (60.0, 90.0), (0.8, 0.3), (10.0, 6.0), 8);
        cfg.noise_sigma = 0.1;
        cfg.distractor_count = 3;
        let run = run_tracking(&cfg, &params, true).unwrap();
        let raw: Vec<_> = run.frames.iter().map(|f| f.raw_model_box).collect();
        assert_eq!(run.boxes, raw);
        assert!(run.trace.iter().all(|t| t.branch == Some(Branch::WarmUp)));
    }

    #[test]
    fn disabled_matches_open_loop_scenario() {
        let mut cfg = ScenarioConfig::constant_velocity(120, (60.0, 90.0), (0.8, 0.3), (10.0, 6.0), 2);
        cfg.occlusions = vec![(60, 80)];
        cfg.distractor_count = 2;
        let run = run_tracking(&cfg, &OmmrParams::default(), false).unwrap();
        let open = generate_scenario(&cfg).unwrap();
        assert_eq!(run.frames, open);
        let raw: Vec<_> = open.iter().map(|f| f.raw_model_box).collect();
        assert_eq!(run.boxes, raw);
        assert!(run.trace.iter().all(|t| t.branch.is_none()));
        cfg.frame_count = 1;
        cfg.waypoints.truncate(1);
        cfg.occlusions.clear();
        assert!(run_tracking(&cfg, &OmmrParams::default(), true).is_err());
    }
}
