//! Synthetic satellite-tracking scenarios: piecewise-linear ground truth,
//! response maps with controllable peak quality, occlusion windows and a raw
//! model output that drifts when the target is hidden.
//!
//! All randomness is drawn from [`crate::rng::SeededRng`], so a configuration
//! and seed replay bit for bit.

mod response;
mod run;
mod scenario;

pub use response::{synthesize_response_map, MapRecipe, DISTRACTOR_AMPLITUDE};
pub use run::{drift_series, run_tracking, TraceRow, TrackingRun};
pub use scenario::{
    generate_scenario, FrameObservation, ScenarioConfig, ScenarioStepper, Waypoint, FLAT_MIN_DISTRACTORS,
    RAW_NOISE_SIGMA_PX, WALK_STEP_SIGMA_PX,
};
