//! Response-map confidence (PSR, nPSR) and online motion model refinement.

mod fit;
mod ommr;
mod response;

pub use fit::{instantaneous_velocity, linear_fit, linear_fit_iter, LineFit};
pub use ommr::{
    npsr, observe_confidence, ommr_step, Branch, Confidence, OmmrParams, StepOutcome,
    TrackerState, MIN_BOX_SIDE,
};
pub use response::{peak_to_box, psr, CellMapping, ResponseMap, PSR_EPSILON};
