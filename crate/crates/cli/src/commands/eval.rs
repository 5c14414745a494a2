use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sattrack_core::eval::{aggregate, evaluate, mean_result, EvalResult, Trajectory};
use sattrack_core::io::{eval_curves_csv, load_attribute_groups, parse_annotations};
use serde_json::json;

use crate::output::{read_text, Staged};

fn load_trajectory(path: &Path) -> Result<Trajectory> {
    let boxes = parse_annotations(&read_text(path)?).with_context(|| format!("in {}", path.display()))?;
    Trajectory::new(boxes).with_context(|| format!("in {}", path.display()))
}

/// `(sequence id, prediction file, ground-truth file)`: one pair for two
/// files, or every `<id>.txt` of the ground-truth directory.
fn pairs(pred: &Path, gt: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    if !gt.exists() {
        bail!("ground truth {} does not exist", gt.display());
    }
    if !pred.exists() {
        bail!("predictions {} do not exist", pred.display());
    }
    if gt.is_file() {
        let id = gt
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sequence".to_string());
        return Ok(vec![(id, pred.to_path_buf(), gt.to_path_buf())]);
    }
    if !pred.is_dir() {
        bail!("ground truth is a directory, so predictions {} must be one too", pred.display());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(gt).with_context(|| format!("listing {}", gt.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let name = path.file_name().unwrap().to_owned();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let p = pred.join(&name);
        if !p.is_file() {
            bail!("no prediction file {} for sequence `{id}`", p.display());
        }
        out.push((id, p, path));
    }
    if out.is_empty() {
        bail!("no .txt annotation files in {}", gt.display());
    }
    out.sort();
    Ok(out)
}

/// Writes `results.json` (scalars and curves per sequence, overall and per
/// attribute group) and `curves.csv`.
pub fn eval(pred: &Path, gt: &Path, attributes: Option<&Path>, output: &Path) -> Result<Vec<PathBuf>> {
    let groups = match attributes {
        Some(path) => load_attribute_groups(&read_text(path)?).with_context(|| format!("in {}", path.display()))?,
        None => BTreeMap::new(),
    };
    let jobs = pairs(pred, gt)?;
    let scored: Vec<Result<(String, EvalResult)>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(id, p, g)| {
                s.spawn(move || -> Result<(String, EvalResult)> {
                    let pt = load_trajectory(p)?;
                    let gt = load_trajectory(g)?;
                    let r = evaluate(&pt, &gt).with_context(|| format!("sequence `{id}`"))?;
                    Ok((id.clone(), r))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scoring thread panicked")).collect()
    });
    let results: BTreeMap<String, EvalResult> = scored.into_iter().collect::<Result<_>>()?;
    let overall = mean_result(results.values())?;
    let by_group = aggregate(&results, &groups)?;

    let json = json!({
        "overall": overall,
        "sequences": results,
        "groups": by_group,
    });
    let scopes = std::iter::once(("overall", &overall))
        .chain(results.iter().map(|(k, v)| (k.as_str(), v)))
        .chain(by_group.iter().map(|(k, v)| (k.as_str(), v)));
    let curves = eval_curves_csv(scopes);

    let mut out = Staged::new(output);
    out.add("results.json", serde_json::to_string_pretty(&json)? + "\n");
    out.add("curves.csv", curves);
    out.commit()
}
