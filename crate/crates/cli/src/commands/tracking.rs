use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sattrack_core::io::{load_scenario, response_summary_csv, trace_csv, trajectory_csv};
use sattrack_core::motion::Branch;
use sattrack_core::simulator::{generate_scenario, run_tracking, ScenarioConfig};

use crate::args::OmmrArgs;
use crate::output::{read_text, Staged};

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = load_scenario(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Writes `ground_truth.csv`, `raw_model.csv` and `response_summary.csv`.
pub fn simulate(config: &Path, seed: Option<u64>, output: &Path) -> Result<Vec<PathBuf>> {
    let cfg = load(config, seed)?;
    let frames = generate_scenario(&cfg)?;
    let occluded: Vec<bool> = frames.iter().map(|f| f.occluded).collect();
    let gt: Vec<_> = frames.iter().map(|f| f.gt_box).collect();
    let raw: Vec<_> = frames.iter().map(|f| f.raw_model_box).collect();

    let mut out = Staged::new(output);
    out.add("ground_truth.csv", trajectory_csv(&gt, Some(&occluded))?);
    out.add("raw_model.csv", trajectory_csv(&raw, None)?);
    out.add("response_summary.csv", response_summary_csv(&frames));
    out.commit()
}

/// Writes `trajectory.csv` and `trace.csv`, and prints a one-line summary.
pub fn track(
    scenario: &Path,
    ommr: bool,
    params: &OmmrArgs,
    seed: Option<u64>,
    output: &Path,
) -> Result<Vec<PathBuf>> {
    let cfg = load(scenario, seed)?;
    let params = params.resolve()?;
    if ommr && params.n1 >= cfg.frame_count {
        bail!(
            "n1 ({}) must be smaller than the scenario's frame count ({})",
            params.n1,
            cfg.frame_count
        );
    }
    let run = run_tracking(&cfg, &params, ommr)?;

    let drift = run.drift();
    let mean_cle = drift.iter().sum::<f64>() / drift.len() as f64;
    let count = |b: Branch| run.trace.iter().filter(|t| t.branch == Some(b)).count();
    println!(
        "frames {}  mean CLE {mean_cle:.3} px  warmup {}  low {}  high {}",
        drift.len(),
        count(Branch::WarmUp),
        count(Branch::LowConfidence),
        count(Branch::HighConfidence)
    );

    let mut out = Staged::new(output);
    out.add("trajectory.csv", trajectory_csv(&run.boxes, None)?);
    out.add("trace.csv", trace_csv(&run.trace));
    out.commit()
}
