use serde::Deserialize;

use super::response::{MapRecipe, DISTRACTOR_AMPLITUDE};
use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::motion::ResponseMap;
use crate::rng::SeededRng;

/// Standard deviation of the raw model's error on visible frames, pixels.
pub const RAW_NOISE_SIGMA_PX: f64 = 0.5;
/// Per-frame random-walk step of a lost raw model, pixels per axis.
pub const WALK_STEP_SIGMA_PX: f64 = 3.0;
/// Competing peaks in a flattened map even when the scenario has fewer distractors.
pub const FLAT_MIN_DISTRACTORS: usize = 4;

const RAW_STREAM: u64 = 2;
const MAP_SEED_STREAM: u64 = 3;

/// A ground-truth position at a given frame; motion between waypoints is linear.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "(usize, f64, f64)")]
pub struct Waypoint {
    pub frame: usize,
    pub cx: f64,
    pub cy: f64,
}

impl From<(usize, f64, f64)> for Waypoint {
    fn from((frame, cx, cy): (usize, f64, f64)) -> Self {
        Self { frame, cx, cy }
    }
}

/// Everything needed to replay a synthetic tracking sequence.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frame_count: usize,
    /// `(frame, cx, cy)`; frames strictly increasing from 1 to `frame_count`.
    pub waypoints: Vec<Waypoint>,
    /// `(w, h)` in pixels.
    pub target_size: (f64, f64),
    /// Inclusive `(start, end)` frame intervals during which the target is hidden.
    #[serde(default)]
    pub occlusions: Vec<(usize, usize)>,
    /// Gaussian sigma of every response peak, in cells.
    #[serde(default = "defaults::peak_sharpness")]
    pub peak_sharpness: f64,
    #[serde(default)]
    pub distractor_count: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    /// `(H, W)` cells.
    #[serde(default = "defaults::map_size")]
    pub map_size: (usize, usize),
    /// Pixels per response cell.
    #[serde(default = "defaults::cell_scale")]
    pub cell_scale: f64,
    #[serde(default)]
    pub seed: u64,
    /// After an occlusion the raw model stays lost until its center comes
    /// within this many pixels of the target.
    #[serde(default = "defaults::capture_radius")]
    pub capture_radius: f64,
}

mod defaults {
    pub fn peak_sharpness() -> f64 {
        1.0
    }
    pub fn map_size() -> (usize, usize) {
        (25, 25)
    }
    pub fn cell_scale() -> f64 {
        8.0
    }
    pub fn capture_radius() -> f64 {
        4.0
    }
}

impl ScenarioConfig {
    /// Straight-line motion from `start` at frame 1 with `velocity` pixels per frame.
    pub fn constant_velocity(
        frame_count: usize,
        start: (f64, f64),
        velocity: (f64, f64),
        target_size: (f64, f64),
        seed: u64,
    ) -> Self {
        let mut waypoints = vec![Waypoint::from((1, start.0, start.1))];
        if frame_count > 1 {
            let k = (frame_count - 1) as f64;
            waypoints.push(Waypoint::from((
                frame_count,
                start.0 + velocity.0 * k,
                start.1 + velocity.1 * k,
            )));
        }
        Self {
            frame_count,
            waypoints,
            target_size,
            occlusions: Vec::new(),
            peak_sharpness: defaults::peak_sharpness(),
            distractor_count: 0,
            noise_sigma: 0.0,
            map_size: defaults::map_size(),
            cell_scale: defaults::cell_scale(),
            seed,
            capture_radius: defaults::capture_radius(),
        }
    }

    /// Checks every invariant; the error names the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.frame_count == 0 {
            return Err(("frame_count", "must be positive".into()));
        }
        let wp = &self.waypoints;
        if wp.is_empty() {
            return Err(("waypoints", "at least one waypoint is required".into()));
        }
        if wp[0].frame != 1 {
            return Err(("waypoints", format!("first waypoint must be frame 1, got {}", wp[0].frame)));
        }
        if wp[wp.len() - 1].frame != self.frame_count {
            return Err((
                "waypoints",
                format!(
                    "last waypoint must be frame {}, got {}",
                    self.frame_count,
                    wp[wp.len() - 1].frame
                ),
            ));
        }
        if let Some(pair) = wp.windows(2).find(|p| p[1].frame <= p[0].frame) {
            return Err((
                "waypoints",
                format!("frames must increase strictly ({} then {})", pair[0].frame, pair[1].frame),
            ));
        }
        if wp.iter().any(|w| !(w.cx.is_finite() && w.cy.is_finite())) {
            return Err(("waypoints", "coordinates must be finite".into()));
        }
        let (tw, th) = self.target_size;
        if !(tw > 0.0 && th > 0.0 && tw.is_finite() && th.is_finite()) {
            return Err(("target_size", "width and height must be positive".into()));
        }
        let mut occ = self.occlusions.clone();
        occ.sort_unstable();
        for &(s, e) in &occ {
            if s < 1 || e > self.frame_count || s > e {
                return Err((
                    "occlusions",
                    format!("interval [{s}, {e}] must satisfy 1 <= start <= end <= {}", self.frame_count),
                ));
            }
        }
        if let Some(p) = occ.windows(2).find(|p| p[1].0 <= p[0].1) {
            return Err((
                "occlusions",
                format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    p[0].0, p[0].1, p[1].0, p[1].1
                ),
            ));
        }
        if !(self.peak_sharpness > 0.0 && self.peak_sharpness.is_finite()) {
            return Err(("peak_sharpness", "must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(("noise_sigma", "must be non-negative".into()));
        }
        if self.map_size.0 < 3 || self.map_size.1 < 3 {
            return Err(("map_size", "must be at least 3x3".into()));
        }
        if !(self.cell_scale > 0.0 && self.cell_scale.is_finite()) {
            return Err(("cell_scale", "must be positive".into()));
        }
        if !(self.capture_radius >= 0.0) {
            return Err(("capture_radius", "must be non-negative".into()));
        }
        Ok(())
    }

    pub fn is_occluded(&self, frame: usize) -> bool {
        self.occlusions.iter().any(|&(s, e)| (s..=e).contains(&frame))
    }

    /// Ground-truth center at `frame`, interpolated between waypoints.
    pub fn center_at(&self, frame: usize) -> (f64, f64) {
        let wp = &self.waypoints;
        let i = wp.partition_point(|w| w.frame <= frame);
        if i == 0 {
            return (wp[0].cx, wp[0].cy);
        }
        if i == wp.len() {
            let last = wp[wp.len() - 1];
            return (last.cx, last.cy);
        }
        let (a, b) = (wp[i - 1], wp[i]);
        let t = (frame - a.frame) as f64 / (b.frame - a.frame) as f64;
        (a.cx + t * (b.cx - a.cx), a.cy + t * (b.cy - a.cy))
    }
}

/// One simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameObservation {
    /// 1-based.
    pub frame: usize,
    pub gt_box: BoundingBox,
    pub response: ResponseMap,
    pub raw_model_box: BoundingBox,
    /// The frame lies in a configured occlusion interval.
    pub occluded: bool,
    /// The raw model has not re-acquired the target since the last occlusion.
    /// Always true on occluded frames.
    pub lost: bool,
}

/// Frame-by-frame scenario generator.
///
/// Each frame is observed through a search window centered on a caller-given
/// point, normally the tracker's previous output. Visible frames carry a unit
/// target peak (plus distractors and noise) and a raw model box equal to the
/// ground truth with Gaussian error. Occluded frames carry a flattened map
/// whose target peak is reduced to the distractor level, and the raw model
/// random-walks around the search center. Once the occlusion ends the raw
/// model stays lost, with the same flattened map, until a search center falls
/// within `capture_radius` of the target.
#[derive(Debug, Clone)]
pub struct ScenarioStepper {
    config: ScenarioConfig,
    raw_rng: SeededRng,
    map_seeds: SeededRng,
    next_frame: usize,
    lost: bool,
    prev_raw: Option<BoundingBox>,
}

impl ScenarioStepper {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate().map_err(|(key, message)| Error::Parse {
            key: Some(key.to_string()),
            line: None,
            message,
        })?;
        Ok(Self {
            config: config.clone(),
            raw_rng: SeededRng::stream(config.seed, RAW_STREAM),
            map_seeds: SeededRng::stream(config.seed, MAP_SEED_STREAM),
            next_frame: 1,
            lost: false,
            prev_raw: None,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Frames not yet produced.
    pub fn remaining(&self) -> usize {
        self.config.frame_count + 1 - self.next_frame
    }

    /// Produces the next frame. `search_center` defaults to the previous raw
    /// model center; the first frame is always searched at the ground truth.
    pub fn step(&mut self, search_center: Option<[f64; 2]>) -> Result<FrameObservation> {
        let frame = self.next_frame;
        if frame > self.config.frame_count {
            return Err(Error::Domain(format!(
                "scenario has only {} frames",
                self.config.frame_count
            )));
        }
        let cfg = &self.config;
        let (tw, th) = cfg.target_size;
        let (mh, mw) = cfg.map_size;
        let (cx, cy) = cfg.center_at(frame);
        let gt_box = BoundingBox::new(cx, cy, tw, th)?;
        let occluded = cfg.is_occluded(frame);
        let search = match (self.prev_raw, search_center) {
            (None, _) => [cx, cy],
            (Some(_), Some(c)) => c,
            (Some(prev), None) => prev.center(),
        };

        if occluded {
            self.lost = true;
        } else if self.lost && (search[0] - cx).hypot(search[1] - cy) <= cfg.capture_radius {
            self.lost = false;
        }

        let rng = &mut self.raw_rng;
        let raw_model_box = if self.lost {
            let size = self.prev_raw.map_or([tw, th], |b| b.size());
            BoundingBox::new(
                rng.normal(search[0], WALK_STEP_SIGMA_PX),
                rng.normal(search[1], WALK_STEP_SIGMA_PX),
                size[0],
                size[1],
            )?
        } else {
            BoundingBox::new(
                rng.normal(cx, RAW_NOISE_SIGMA_PX),
                rng.normal(cy, RAW_NOISE_SIGMA_PX),
                rng.normal(tw, RAW_NOISE_SIGMA_PX).max(1.0),
                rng.normal(th, RAW_NOISE_SIGMA_PX).max(1.0),
            )?
        };

        let shift_r = ((cy - search[1]) / cfg.cell_scale).round() as i64;
        let shift_c = ((cx - search[0]) / cfg.cell_scale).round() as i64;
        let center_cell = (
            (mh as i64 / 2 + shift_r).clamp(0, mh as i64 - 1) as usize,
            (mw as i64 / 2 + shift_c).clamp(0, mw as i64 - 1) as usize,
        );
        let (peak_amplitude, distractor_count) = if self.lost {
            (DISTRACTOR_AMPLITUDE, cfg.distractor_count.max(FLAT_MIN_DISTRACTORS))
        } else {
            (1.0, cfg.distractor_count)
        };
        let response = MapRecipe {
            map_size: cfg.map_size,
            center_cell,
            peak_amplitude,
            sharpness: cfg.peak_sharpness,
            distractor_count,
            distractor_amplitude: DISTRACTOR_AMPLITUDE,
            noise_sigma: cfg.noise_sigma,
        }
        .render(self.map_seeds.next_u64())?;

        self.next_frame += 1;
        self.prev_raw = Some(raw_model_box);
        Ok(FrameObservation {
            frame,
            gt_box,
            response,
            raw_model_box,
            occluded,
            lost: self.lost,
        })
    }
}

/// Open-loop run of [`ScenarioStepper`]: every search window follows the raw
/// model itself, which is exactly what a tracker without refinement sees.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Vec<FrameObservation>> {
    let mut stepper = ScenarioStepper::new(config)?;
    (0..config.frame_count).map(|_| stepper.step(None)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(frames: usize) -> ScenarioConfig {
        ScenarioConfig::constant_velocity(frames, (100.0, 80.0), (1.0, 0.5), (12.0, 8.0), 11)
    }

    #[test]
    fn clean_raw_boxes_stay_close() {
        let frames = generate_scenario(&base(300)).unwrap();
        assert_eq!(frames.len(), 300);
        for f in &frames {
            let d = (f.raw_model_box.cx - f.gt_box.cx).hypot(f.raw_model_box.cy - f.gt_box.cy);
            assert!(d < 2.0, "frame {} off by {d}", f.frame);
            assert!(!f.occluded && !f.lost);
        }
    }

    #[test]
    fn single_frame() {
        let frames = generate_scenario(&base(1)).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].gt_box.cx, 100.0);
    }

    #[test]
    fn deterministic() {
        let mut cfg = base(120);
        cfg.noise_sigma = 0.05;
        cfg.distractor_count = 3;
        cfg.occlusions = vec![(40, 60)];
        let a = generate_scenario(&cfg).unwrap();
        let b = generate_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed += 1;
        assert_ne!(a, generate_scenario(&cfg).unwrap());
    }

    #[test]
    fn occlusion_flags_and_walk() {
        let mut cfg = base(100);
        cfg.occlusions = vec![(30, 40), (70, 70)];
        let frames = generate_scenario(&cfg).unwrap();
        for f in &frames {
            assert_eq!(f.occluded, (30..=40).contains(&f.frame) || f.frame == 70);
            if f.occluded {
                assert!(f.lost);
            }
        }
        assert!(frames[28].response.peak().2 >= 1.0);
        // the walk moves the raw box every occluded frame
        for w in frames[29..40].windows(2) {
            assert_ne!(w[0].raw_model_box.cx, w[1].raw_model_box.cx);
        }
    }

    #[test]
    fn search_near_target_recaptures() {
        let mut cfg = base(60);
        cfg.occlusions = vec![(20, 30)];
        let mut open = ScenarioStepper::new(&cfg).unwrap();
        let mut guided = ScenarioStepper::new(&cfg).unwrap();
        for frame in 1..=60 {
            let a = open.step(None).unwrap();
            let g = guided.step(Some(cfg.center_at(frame).into())).unwrap();
            if frame < 20 {
                assert_eq!(a, g);
            }
            if frame > 30 {
                assert!(!g.lost, "frame {frame}");
                assert!(g.response.peak().2 >= 1.0);
            }
        }
        assert_eq!(guided.remaining(), 0);
        assert!(guided.step(None).is_err());
    }

    #[test]
    fn interpolates_waypoints() {
        let mut cfg = base(11);
        cfg.waypoints = vec![
            Waypoint::from((1, 0.0, 0.0)),
            Waypoint::from((6, 10.0, 0.0)),
            Waypoint::from((11, 10.0, 20.0)),
        ];
        assert_eq!(cfg.center_at(1), (0.0, 0.0));
        assert_eq!(cfg.center_at(4), (6.0, 0.0));
        assert_eq!(cfg.center_at(6), (10.0, 0.0));
        assert_eq!(cfg.center_at(11), (10.0, 20.0));
    }

    #[test]
    fn validation_names_the_key() {
        let mut cfg = base(50);
        cfg.occlusions = vec![(10, 20), (15, 25)];
        assert_eq!(cfg.validate().unwrap_err().0, "occlusions");
        let mut cfg = base(50);
        cfg.waypoints[0].frame = 2;
        assert_eq!(cfg.validate().unwrap_err().0, "waypoints");
        let mut cfg = base(50);
        cfg.occlusions = vec![(45, 51)];
        assert_eq!(cfg.validate().unwrap_err().0, "occlusions");
        let mut cfg = base(50);
        cfg.map_size = (2, 9);
        assert!(matches!(generate_scenario(&cfg), Err(Error::Parse { .. })));
    }
}
