use crate::error::{Error, Result};
use crate::motion::ResponseMap;
use crate::rng::SeededRng;

/// Amplitude of distractor peaks relative to a clean target peak.
pub const DISTRACTOR_AMPLITUDE: f64 = 0.4;

const DISTRACTOR_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

/// Recipe for a synthetic response map: a Gaussian target peak, Gaussian
/// distractor peaks at seeded cells, additive Gaussian noise, clamped at zero.
///
/// Distractor cells and noise come from separate sub-streams of the seed, so
/// two maps with the same seed share their noise field and the first `k`
/// distractor positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRecipe {
    pub map_size: (usize, usize),
    pub center_cell: (usize, usize),
    pub peak_amplitude: f64,
    /// Standard deviation of every peak, in cells.
    pub sharpness: f64,
    pub distractor_count: usize,
    pub distractor_amplitude: f64,
    pub noise_sigma: f64,
}

impl MapRecipe {
    pub fn render(&self, seed: u64) -> Result<ResponseMap> {
        let (h, w) = self.map_size;
        if h < 3 || w < 3 {
            return Err(Error::Dimension(format!(
                "response map must be at least 3x3, got {h}x{w}"
            )));
        }
        let (cr, cc) = self.center_cell;
        if cr >= h || cc >= w {
            return Err(Error::Domain(format!(
                "peak cell ({cr}, {cc}) outside {h}x{w} map"
            )));
        }
        if !(self.sharpness > 0.0) {
            return Err(Error::Domain(format!(
                "peak sharpness must be positive, got {}",
                self.sharpness
            )));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Domain(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }

        let mut peaks = Vec::with_capacity(1 + self.distractor_count);
        peaks.push((cr as f64, cc as f64, self.peak_amplitude));
        let mut rng = SeededRng::stream(seed, DISTRACTOR_STREAM);
        for _ in 0..self.distractor_count {
            let r = rng.below(h) as f64;
            let c = rng.below(w) as f64;
            peaks.push((r, c, self.distractor_amplitude));
        }

        let inv = 1.0 / (2.0 * self.sharpness * self.sharpness);
        let mut noise = SeededRng::stream(seed, NOISE_STREAM);
        ResponseMap::from_fn(h, w, |r, c| {
            let (rf, cf) = (r as f64, c as f64);
            let signal: f64 = peaks
                .iter()
                .map(|&(pr, pc, a)| a * (-((rf - pr).powi(2) + (cf - pc).powi(2)) * inv).exp())
                .sum();
            let n = if self.noise_sigma > 0.0 {
                noise.normal(0.0, self.noise_sigma)
            } else {
                0.0
            };
            (signal + n).max(0.0)
        })
    }
}

/// Unit-amplitude target peak at `center_cell` plus `distractors` peaks at
/// [`DISTRACTOR_AMPLITUDE`].
pub fn synthesize_response_map(
    center_cell: (usize, usize),
    sharpness: f64,
    distractors: usize,
    noise_sigma: f64,
    map_size: (usize, usize),
    seed: u64,
) -> Result<ResponseMap> {
    MapRecipe {
        map_size,
        center_cell,
        peak_amplitude: 1.0,
        sharpness,
        distractor_count: distractors,
        distractor_amplitude: DISTRACTOR_AMPLITUDE,
        noise_sigma,
    }
    .render(seed)
}
