//! Building blocks of a geometry-aware, motion-guided Siamese tracker for
//! satellite video.
//!
//! * [`geometry`]: aspect-ratio-constrained centerness targets and the
//!   classification, regression and centerness losses.
//! * [`ifga`]: inter-frame graph attention and depthwise cross-correlation.
//! * [`motion`]: PSR / nPSR confidence and online motion model refinement.
//! * [`simulator`]: seeded synthetic tracking scenarios.
//! * [`eval`]: one-pass evaluation (precision, normalized precision, success).
//! * [`io`]: file formats shared by the command-line tool.

pub mod bbox;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod ifga;
pub mod io;
pub mod motion;
pub mod rng;
pub mod simulator;

pub use bbox::BoundingBox;
pub use error::{Error, Result};
