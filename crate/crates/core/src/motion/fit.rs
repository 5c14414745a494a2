use crate::error::{Error, Result};

/// Per-coordinate least-squares line over frame indices `0..K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<const D: usize> {
    /// Change per frame.
    pub velocity: [f64; D],
    /// Fitted value at index 0.
    pub intercept: [f64; D],
}

impl<const D: usize> LineFit<D> {
    /// `intercept + velocity * k`.
    pub fn value_at(&self, k: f64) -> [f64; D] {
        std::array::from_fn(|d| self.intercept[d] + self.velocity[d] * k)
    }
}

/// Ordinary least squares of each coordinate against abscissae `0, 1, ..., K-1`.
pub fn linear_fit<const D: usize>(series: &[[f64; D]]) -> Result<LineFit<D>> {
    linear_fit_iter(series.iter().copied(), series.len())
}

/// [`linear_fit`] over an iterator of known length, so callers can fit ring
/// buffers without copying.
pub fn linear_fit_iter<const D: usize>(
    series: impl Iterator<Item = [f64; D]> + Clone,
    len: usize,
) -> Result<LineFit<D>> {
    if len < 2 {
        return Err(Error::InsufficientHistory {
            needed: 2,
            available: len,
        });
    }
    let n = len as f64;
    let x_mean = (n - 1.0) / 2.0;
    let mut y_mean = [0.0; D];
    for p in series.clone() {
        for d in 0..D {
            y_mean[d] += p[d];
        }
    }
    y_mean.iter_mut().for_each(|m| *m /= n);

    let mut sxx = 0.0;
    let mut sxy = [0.0; D];
    for (k, p) in series.enumerate() {
        let dx = k as f64 - x_mean;
        sxx += dx * dx;
        for d in 0..D {
            sxy[d] += dx * (p[d] - y_mean[d]);
        }
    }
    let velocity: [f64; D] = std::array::from_fn(|d| sxy[d] / sxx);
    let intercept = std::array::from_fn(|d| y_mean[d] - velocity[d] * x_mean);
    Ok(LineFit {
        velocity,
        intercept,
    })
}

/// Mean of `(C[k+n2] - C[k]) / n2` over `k = 0..n2`, using the last `2*n2`
/// centers of `centers` in chronological order.
pub fn instantaneous_velocity(centers: &[[f64; 2]], n2: usize) -> Result<[f64; 2]> {
    if n2 == 0 {
        return Err(Error::Config("short window n2 must be positive".into()));
    }
    if centers.len() < 2 * n2 {
        return Err(Error::InsufficientHistory {
            needed: 2 * n2,
            available: centers.len(),
        });
    }
    let window = &centers[centers.len() - 2 * n2..];
    let (early, late) = window.split_at(n2);
    let n = n2 as f64;
    let mut v = [0.0; 2];
    for (a, b) in early.iter().zip(late) {
        v[0] += (b[0] - a[0]) / n;
        v[1] += (b[1] - a[1]) / n;
    }
    Ok([v[0] / n, v[1] / n])
}
