use super::tensor::{FeatureMap, Matrix};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Point-wise (1x1) projections for queries, keys and values plus the
/// residual scale.
///
/// `w_q` and `w_k` are `(C/r) x C`; `w_v` is `C x C`. Biases are optional
/// and treated as zero when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionWeights {
    pub w_q: Matrix,
    pub w_k: Matrix,
    pub w_v: Matrix,
    pub b_q: Option<Vec<f64>>,
    pub b_k: Option<Vec<f64>>,
    pub b_v: Option<Vec<f64>>,
    pub gamma: f64,
    pub reduction: usize,
}

pub const DEFAULT_REDUCTION: usize = 4;

impl ProjectionWeights {
    /// Weights without biases; validated against `channels`.
    pub fn new(
        channels: usize,
        reduction: usize,
        w_q: Matrix,
        w_k: Matrix,
        w_v: Matrix,
        gamma: f64,
    ) -> Result<Self> {
        let w = Self {
            w_q,
            w_k,
            w_v,
            b_q: None,
            b_k: None,
            b_v: None,
            gamma,
            reduction,
        };
        w.validate(channels)?;
        Ok(w)
    }

    /// Deterministic initialisation: every weight uniform in
    /// `[-1/sqrt(C), 1/sqrt(C)]`, no biases, `gamma = 0`.
    pub fn seeded(channels: usize, reduction: usize, seed: u64) -> Result<Self> {
        let reduced = reduced_channels(channels, reduction)?;
        let bound = 1.0 / (channels as f64).sqrt();
        let mut rng = SeededRng::new(seed);
        let mut draw = |rows, cols| {
            Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(-bound, bound))
        };
        let w_q = draw(reduced, channels);
        let w_k = draw(reduced, channels);
        let w_v = draw(channels, channels);
        Self::new(channels, reduction, w_q, w_k, w_v, 0.0)
    }

    pub fn channels(&self) -> usize {
        self.w_v.rows()
    }

    pub fn validate(&self, channels: usize) -> Result<()> {
        let reduced = reduced_channels(channels, self.reduction)?;
        let check = |name: &str, m: &Matrix, rows: usize| {
            if m.rows() != rows || m.cols() != channels {
                Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {rows}x{channels}",
                    m.rows(),
                    m.cols()
                )))
            } else {
                Ok(())
            }
        };
        check("W_q", &self.w_q, reduced)?;
        check("W_k", &self.w_k, reduced)?;
        check("W_v", &self.w_v, channels)?;
        for (name, bias, len) in [
            ("b_q", &self.b_q, reduced),
            ("b_k", &self.b_k, reduced),
            ("b_v", &self.b_v, channels),
        ] {
            if let Some(b) = bias {
                if b.len() != len {
                    return Err(Error::Dimension(format!(
                        "{name} has {} entries, expected {len}",
                        b.len()
                    )));
                }
            }
        }
        if !self.gamma.is_finite() {
            return Err(Error::Domain("gamma must be finite".into()));
        }
        Ok(())
    }
}

fn reduced_channels(channels: usize, reduction: usize) -> Result<usize> {
    if reduction == 0 || channels == 0 || !channels.is_multiple_of(reduction) {
        return Err(Error::Dimension(format!(
            "channel count {channels} is not divisible by reduction factor {reduction}"
        )));
    }
    Ok(channels / reduction)
}

fn pointwise(weights: &Matrix, bias: Option<&[f64]>, input: &FeatureMap) -> Result<Matrix> {
    let mut out = weights.matmul(&input.to_matrix())?;
    if let Some(b) = bias {
        for (r, &bv) in b.iter().enumerate() {
            out.row_mut(r).iter_mut().for_each(|v| *v += bv);
        }
    }
    Ok(out)
}

/// Queries, keys and values with spatial positions flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    /// `(C/r) x N_s`
    pub q: Matrix,
    /// `(C/r) x N_t`
    pub k: Matrix,
    /// `C x N_t`
    pub v: Matrix,
}

pub fn project_qkv(
    search: &FeatureMap,
    template: &FeatureMap,
    w: &ProjectionWeights,
) -> Result<Projections> {
    if search.channels() != template.channels() {
        return Err(Error::Dimension(format!(
            "search has {} channels, template has {}",
            search.channels(),
            template.channels()
        )));
    }
    w.validate(search.channels())?;
    Ok(Projections {
        q: pointwise(&w.w_q, w.b_q.as_deref(), search)?,
        k: pointwise(&w.w_k, w.b_k.as_deref(), template)?,
        v: pointwise(&w.w_v, w.b_v.as_deref(), template)?,
    })
}

/// Row-stochastic `N_s x N_t` matrix of search-to-template attention.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix(Matrix);

impl AttentionMatrix {
    /// Wraps a matrix after checking that it is row-stochastic within `1e-6`.
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        for r in 0..m.rows() {
            let row = m.row(r);
            if row.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::Domain(format!("attention row {r} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::Domain(format!("attention row {r} sums to {s}")));
            }
        }
        Ok(Self(m))
    }

    pub fn search_len(&self) -> usize {
        self.0.rows()
    }

    pub fn template_len(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Softmax over the template axis of the unscaled logits `Q_i^T K_j`.
pub fn attention_weights(q: &Matrix, k: &Matrix) -> Result<AttentionMatrix> {
    if q.rows() != k.rows() {
        return Err(Error::Dimension(format!(
            "query dimension {} differs from key dimension {}",
            q.rows(),
            k.rows()
        )));
    }
    if k.cols() == 0 {
        return Err(Error::Dimension("template has no positions".into()));
    }
    let mut logits = q.transposed_matmul(k)?;
    for i in 0..logits.rows() {
        softmax_in_place(logits.row_mut(i));
    }
    Ok(AttentionMatrix(logits))
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// `V * W^T`: each search position receives a convex combination of the
/// template value vectors. Output is `C x N_s`.
pub fn aggregate(v: &Matrix, w: &AttentionMatrix) -> Result<Matrix> {
    if v.cols() != w.template_len() {
        return Err(Error::Dimension(format!(
            "values cover {} template positions, attention covers {}",
            v.cols(),
            w.template_len()
        )));
    }
    v.matmul_transposed(w.as_matrix())
}

/// Enhanced search features `F_s + gamma * reshape(V W^T)` together with the
/// attention matrix that produced them.
pub fn ifga_forward_with_attention(
    search: &FeatureMap,
    template: &FeatureMap,
    w: &ProjectionWeights,
) -> Result<(FeatureMap, AttentionMatrix)> {
    let p = project_qkv(search, template, w)?;
    let attn = attention_weights(&p.q, &p.k)?;
    if w.gamma == 0.0 {
        return Ok((search.clone(), attn));
    }
    let agg = aggregate(&p.v, &attn)?;
    let data = search
        .data()
        .iter()
        .zip(agg.data())
        .map(|(s, a)| s + w.gamma * a)
        .collect();
    let out = FeatureMap::new(search.channels(), search.height(), search.width(), data)?;
    Ok((out, attn))
}

pub fn ifga_forward(
    search: &FeatureMap,
    template: &FeatureMap,
    w: &ProjectionWeights,
) -> Result<FeatureMap> {
    ifga_forward_with_attention(search, template, w).map(|(f, _)| f)
}

/// Per-template-position attention mass received from a set of search positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Saliency {
    pub values: Vec<f64>,
    /// Set when the mask selected no search positions.
    pub empty_mask: bool,
}

/// `S_j = sum over i in mask of W(i, j)`. Duplicate mask indices count once.
pub fn template_saliency(w: &AttentionMatrix, search_mask: &[usize]) -> Result<Saliency> {
    let n_s = w.search_len();
    if let Some(&bad) = search_mask.iter().find(|&&i| i >= n_s) {
        return Err(Error::Dimension(format!(
            "mask index {bad} outside {n_s} search positions"
        )));
    }
    let mut seen = vec![false; n_s];
    let mut values = vec![0.0; w.template_len()];
    for &i in search_mask {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        for (s, &a) in values.iter_mut().zip(w.row(i)) {
            *s += a;
        }
    }
    Ok(Saliency {
        values,
        empty_mask: search_mask.is_empty(),
    })
}

/// Row-major search indices covered by rows `row0..row1` and columns `col0..col1`
/// of an `height x width` map (half-open ranges, clipped to the map).
pub fn region_mask(
    height: usize,
    width: usize,
    rows: std::ops::Range<usize>,
    cols: std::ops::Range<usize>,
) -> Vec<usize> {
    let rows = rows.start.min(height)..rows.end.min(height);
    let cols = cols.start.min(width)..cols.end.min(width);
    rows.flat_map(|r| cols.clone().map(move |c| r * width + c))
        .collect()
}
