use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sattrack_core::ifga::{
    ifga_forward_with_attention, region_mask, template_saliency, FeatureMap, ProjectionWeights,
};
use sattrack_core::io::{decode_feature_map, encode_feature_map, feature_map_csv, grid_csv, load_weights, pgm};
use sattrack_core::rng::SeededRng;

use crate::output::{read_text, Staged};

const SEARCH_STREAM: u64 = 0;
const TEMPLATE_STREAM: u64 = 1;

pub enum Features {
    Files { search: PathBuf, template: PathBuf },
    Random { channels: usize, search_size: usize, template_size: usize },
}

pub enum Weights {
    File(PathBuf),
    Seeded { reduction: usize },
}

pub struct IfgaDemo {
    pub features: Features,
    pub weights: Weights,
    pub gamma: Option<f64>,
    pub mask_rows: Option<Range<usize>>,
    pub mask_cols: Option<Range<usize>>,
    pub seed: u64,
}

fn read_map(path: &Path) -> Result<FeatureMap> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    decode_feature_map(&bytes).with_context(|| format!("in {}", path.display()))
}

/// Standard-normal features rounded through `f32`, so the written binary
/// reproduces them exactly.
fn random_map(channels: usize, side: usize, seed: u64, stream: u64) -> Result<FeatureMap> {
    let mut rng = SeededRng::stream(seed, stream);
    Ok(FeatureMap::from_fn(channels, side, side, |_, _, _| rng.standard_normal() as f32 as f64)?)
}

/// Writes `search.bin`, `template.bin`, `enhanced.bin`, `enhanced.csv`,
/// `saliency.csv` and `saliency.pgm` (scaled by its maximum).
pub fn ifga_demo(demo: &IfgaDemo, output: &Path) -> Result<Vec<PathBuf>> {
    let (search, template) = match &demo.features {
        Features::Files { search, template } => (read_map(search)?, read_map(template)?),
        Features::Random { channels, search_size, template_size } => (
            random_map(*channels, *search_size, demo.seed, SEARCH_STREAM)?,
            random_map(*channels, *template_size, demo.seed, TEMPLATE_STREAM)?,
        ),
    };
    let mut weights = match &demo.weights {
        Weights::File(path) => load_weights(&read_text(path)?).with_context(|| format!("in {}", path.display()))?,
        Weights::Seeded { reduction } => ProjectionWeights::seeded(search.channels(), *reduction, demo.seed)?,
    };
    if let Some(g) = demo.gamma {
        weights.gamma = g;
    }

    let (enhanced, attention) = ifga_forward_with_attention(&search, &template, &weights)?;
    let (sh, sw) = (search.height(), search.width());
    let mask = region_mask(
        sh,
        sw,
        demo.mask_rows.clone().unwrap_or(0..sh),
        demo.mask_cols.clone().unwrap_or(0..sw),
    );
    let saliency = template_saliency(&attention, &mask)?;
    if saliency.empty_mask {
        eprintln!("warning: the search mask selects no positions; saliency is all zero");
    }
    let (th, tw) = (template.height(), template.width());
    let peak = saliency.values.iter().cloned().fold(0.0, f64::max);

    let mut out = Staged::new(output);
    out.add("search.bin", encode_feature_map(&search));
    out.add("template.bin", encode_feature_map(&template));
    out.add("enhanced.bin", encode_feature_map(&enhanced));
    out.add("enhanced.csv", feature_map_csv(&enhanced));
    out.add("saliency.csv", grid_csv(&saliency.values, th, tw)?);
    out.add("saliency.pgm", pgm(&saliency.values, th, tw, peak)?);
    out.commit()
}
