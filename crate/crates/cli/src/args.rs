use std::ops::Range;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use sattrack_core::io::load_ommr_params;
use sattrack_core::motion::OmmrParams;
use sattrack_core::BoundingBox;

use crate::output::read_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

/// Refinement parameters: an optional TOML file, then individual overrides.
#[derive(Debug, Clone, Args)]
pub struct OmmrArgs {
    /// TOML file with any of n1, n2, theta, lambda_ema.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Long window length and warm-up frames.
    #[arg(long, env = "SATTRACK_N1")]
    pub n1: Option<usize>,
    /// Short window length for the instantaneous velocity.
    #[arg(long, env = "SATTRACK_N2")]
    pub n2: Option<usize>,
    /// nPSR threshold between the low- and high-confidence branches.
    #[arg(long, env = "SATTRACK_THETA")]
    pub theta: Option<f64>,
    /// Weight of the new size estimate in the size EMA.
    #[arg(long, env = "SATTRACK_LAMBDA_EMA")]
    pub lambda_ema: Option<f64>,
}

impl OmmrArgs {
    pub fn resolve(&self) -> Result<OmmrParams> {
        let mut p = match &self.params {
            Some(path) => load_ommr_params(&read_text(path)?)
                .with_context(|| format!("in {}", path.display()))?,
            None => OmmrParams::default(),
        };
        if let Some(v) = self.n1 {
            p.n1 = v;
        }
        if let Some(v) = self.n2 {
            p.n2 = v;
        }
        if let Some(v) = self.theta {
            p.theta = v;
        }
        if let Some(v) = self.lambda_ema {
            p.lambda_ema = v;
        }
        p.validate()?;
        Ok(p)
    }
}

/// `cx,cy,w,h` in center form.
pub fn parse_box(s: &str) -> Result<BoundingBox> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .with_context(|| format!("box `{s}` must be four numbers cx,cy,w,h"))?;
    if v.len() != 4 {
        bail!("box `{s}` must be four numbers cx,cy,w,h, got {}", v.len());
    }
    Ok(BoundingBox::new(v[0], v[1], v[2], v[3])?)
}

/// Half-open `start:end`.
pub fn parse_range(s: &str) -> Result<Range<usize>> {
    let (a, b) = s
        .split_once(':')
        .with_context(|| format!("range `{s}` must look like start:end"))?;
    let start: usize = a.trim().parse().with_context(|| format!("range start in `{s}`"))?;
    let end: usize = b.trim().parse().with_context(|| format!("range end in `{s}`"))?;
    if start >= end {
        bail!("range `{s}` is empty");
    }
    Ok(start..end)
}
