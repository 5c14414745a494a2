use std::collections::VecDeque;

use serde::Deserialize;

use super::fit::{instantaneous_velocity, linear_fit_iter};
use super::response::{psr, ResponseMap};
use crate::bbox::BoundingBox;
use crate::error::{Error, Result};

/// Smallest width or height the low-confidence extrapolation may produce.
pub const MIN_BOX_SIDE: f64 = 1.0;

/// Window sizes, confidence threshold and size-smoothing factor of the
/// online motion refinement.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmmrParams {
    /// Long window: warm-up length and history capacity.
    pub n1: usize,
    /// Short window for the instantaneous velocity.
    pub n2: usize,
    /// nPSR below this value selects the long-window extrapolation.
    pub theta: f64,
    /// Weight of the new size in the exponential moving average.
    pub lambda_ema: f64,
}

impl Default for OmmrParams {
    fn default() -> Self {
        Self {
            n1: 50,
            n2: 10,
            theta: 0.5,
            lambda_ema: 0.7,
        }
    }
}

impl OmmrParams {
    pub fn validate(&self) -> Result<()> {
        if self.n2 == 0 {
            return Err(Error::Config("n2 must be positive".into()));
        }
        if self.n1 <= 2 * self.n2 {
            return Err(Error::Config(format!(
                "n1 ({}) must exceed 2 * n2 ({})",
                self.n1,
                2 * self.n2
            )));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config(format!("theta must lie in (0, 1), got {}", self.theta)));
        }
        if !(0.0..=1.0).contains(&self.lambda_ema) {
            return Err(Error::Config(format!(
                "lambda_ema must lie in [0, 1], got {}",
                self.lambda_ema
            )));
        }
        Ok(())
    }
}

/// Mutable state of one tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    history: VecDeque<BoundingBox>,
    capacity: usize,
    psr_max: f64,
    frame_index: usize,
}

impl TrackerState {
    pub fn new(capacity: usize) -> Self {
        Self {
            history: VecDeque::with_capacity(capacity + 1),
            capacity,
            psr_max: 0.0,
            frame_index: 0,
        }
    }

    pub fn for_params(params: &OmmrParams) -> Self {
        Self::new(params.n1)
    }

    /// Oldest first.
    pub fn history(&self) -> impl ExactSizeIterator<Item = &BoundingBox> + Clone {
        self.history.iter()
    }

    pub fn history_len(&self) -> usize {
        self.history.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn psr_max(&self) -> f64 {
        self.psr_max
    }

    /// Number of frames processed so far.
    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn last_box(&self) -> Option<&BoundingBox> {
        self.history.back()
    }

    fn push(&mut self, b: BoundingBox) {
        if self.capacity == 0 {
            return;
        }
        if self.history.len() == self.capacity {
            self.history.pop_front();
        }
        self.history.push_back(b);
    }
}

/// PSR of a frame and its normalization by the running maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    pub psr: f64,
    pub npsr: f64,
}

/// Updates the running PSR maximum with this frame, then returns the frame's
/// PSR divided by it (0 when every frame so far had zero PSR).
pub fn observe_confidence(map: &ResponseMap, state: &mut TrackerState) -> Confidence {
    let p = psr(map);
    state.psr_max = state.psr_max.max(p);
    let npsr = if state.psr_max > 0.0 { p / state.psr_max } else { 0.0 };
    Confidence { psr: p, npsr }
}

/// Normalized PSR of `map`; see [`observe_confidence`].
pub fn npsr(map: &ResponseMap, state: &mut TrackerState) -> f64 {
    observe_confidence(map, state).npsr
}

/// Which rule produced a refined box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Frame index within the long window: model output passed through.
    WarmUp,
    /// nPSR below threshold: long-window linear extrapolation.
    LowConfidence,
    /// nPSR at or above threshold: model output blended with the
    /// short-window velocity.
    HighConfidence,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::WarmUp => "warmup",
            Branch::LowConfidence => "low",
            Branch::HighConfidence => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub refined: BoundingBox,
    pub confidence: Confidence,
    pub branch: Branch,
    /// 1-based index of the frame just processed.
    pub frame: usize,
}

/// One frame of online motion model refinement.
///
/// Frames are numbered from 1. Up to and including frame `n1` the model box
/// is returned unchanged. Afterwards a low nPSR replaces the box with the
/// long-window linear extrapolation (size EMA-blended with the last size),
/// and a high nPSR blends the model displacement with the short-window
/// velocity using weight `nPSR^2`. The returned box always joins the history.
pub fn ommr_step(
    state: &mut TrackerState,
    model_box: &BoundingBox,
    map: &ResponseMap,
    params: &OmmrParams,
) -> Result<StepOutcome> {
    params.validate()?;
    model_box.validate()?;
    if state.capacity != params.n1 {
        return Err(Error::Config(format!(
            "tracker history capacity {} does not match n1 = {}",
            state.capacity, params.n1
        )));
    }
    let frame = state.frame_index + 1;
    let confidence = observe_confidence(map, state);

    let (refined, branch) = if frame > params.n1 {
        if state.history.len() < params.n1 {
            return Err(Error::InsufficientHistory {
                needed: params.n1,
                available: state.history.len(),
            });
        }
        let prev = *state.history.back().expect("history is full");
        if confidence.npsr < params.theta {
            (extrapolate(state, &prev, params)?, Branch::LowConfidence)
        } else {
            (
                blend(state, &prev, model_box, confidence.npsr, params)?,
                Branch::HighConfidence,
            )
        }
    } else {
        (*model_box, Branch::WarmUp)
    };

    state.push(refined);
    state.frame_index = frame;
    Ok(StepOutcome {
        refined,
        confidence,
        branch,
        frame,
    })
}

fn extrapolate(state: &TrackerState, prev: &BoundingBox, params: &OmmrParams) -> Result<BoundingBox> {
    let n = state.history.len();
    let at = n as f64;
    let center_fit = linear_fit_iter(state.history.iter().map(BoundingBox::center), n)?;
    let size_fit = linear_fit_iter(state.history.iter().map(BoundingBox::size), n)?;
    let c = center_fit.value_at(at);
    let s = size_fit.value_at(at);
    let lambda = params.lambda_ema;
    let w = (lambda * s[0] + (1.0 - lambda) * prev.w).max(MIN_BOX_SIDE);
    let h = (lambda * s[1] + (1.0 - lambda) * prev.h).max(MIN_BOX_SIDE);
    BoundingBox::new(c[0], c[1], w, h)
}

fn blend(
    state: &TrackerState,
    prev: &BoundingBox,
    model_box: &BoundingBox,
    npsr: f64,
    params: &OmmrParams,
) -> Result<BoundingBox> {
    let window = 2 * params.n2;
    let centers: Vec<[f64; 2]> = state
        .history
        .iter()
        .skip(state.history.len() - window)
        .map(BoundingBox::center)
        .collect();
    let v = instantaneous_velocity(&centers, params.n2)?;
    let alpha = npsr * npsr;
    let dx = alpha * (model_box.cx - prev.cx) + (1.0 - alpha) * v[0];
    let dy = alpha * (model_box.cy - prev.cy) + (1.0 - alpha) * v[1];
    let lambda = params.lambda_ema;
    BoundingBox::new(
        prev.cx + dx,
        prev.cy + dy,
        lambda * model_box.w + (1.0 - lambda) * prev.w,
        lambda * model_box.h + (1.0 - lambda) * prev.h,
    )
}
