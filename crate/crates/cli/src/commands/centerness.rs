use std::path::{Path, PathBuf};

use anyhow::Result;
use sattrack_core::geometry::{build_label_maps, build_label_maps_with, AspectRatioParams, CenternessKind, GridGeometry};
use sattrack_core::io::{grid_csv, pgm};

use crate::args::parse_box;
use crate::output::Staged;

/// Writes `classic.{csv,pgm}` and `constrained.{csv,pgm}`; both PGMs share the
/// absolute scale `[0, 1]`.
pub fn centerness_map(
    bbox: &str,
    gamma: f64,
    stride: usize,
    rows: usize,
    cols: usize,
    output: &Path,
) -> Result<Vec<PathBuf>> {
    let gt = parse_box(bbox)?;
    let params = AspectRatioParams::new(gamma)?;
    let grid = GridGeometry { stride, rows, cols };
    let constrained = build_label_maps(&gt, &grid, &params)?;
    let classic = build_label_maps_with(&gt, &grid, CenternessKind::Classic)?;
    if let Some(w) = constrained.warning {
        eprintln!("warning: {w:?}");
    }

    let mut out = Staged::new(output);
    for (name, maps) in [("classic", &classic), ("constrained", &constrained)] {
        out.add(&format!("{name}.csv"), grid_csv(&maps.centerness, rows, cols)?);
        out.add(&format!("{name}.pgm"), pgm(&maps.centerness, rows, cols, 1.0)?);
    }
    out.commit()
}
