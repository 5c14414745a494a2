use super::tensor::FeatureMap;
use crate::error::{Error, Result};

/// Valid-mode cross-correlation of each template channel with the matching
/// search channel. Output is `C x (Hs-Ht+1) x (Ws-Wt+1)`.
pub fn xcorr_depthwise(template: &FeatureMap, search: &FeatureMap) -> Result<FeatureMap> {
    if template.channels() != search.channels() {
        return Err(Error::Dimension(format!(
            "template has {} channels, search has {}",
            template.channels(),
            search.channels()
        )));
    }
    if template.height() > search.height() || template.width() > search.width() {
        return Err(Error::Dimension(format!(
            "template {}x{} larger than search {}x{}",
            template.height(),
            template.width(),
            search.height(),
            search.width()
        )));
    }
    let (th, tw) = (template.height(), template.width());
    let (sw, oh, ow) = (
        search.width(),
        search.height() - th + 1,
        search.width() - tw + 1,
    );
    let mut out = Vec::with_capacity(template.channels() * oh * ow);
    for c in 0..template.channels() {
        let t = template.channel(c);
        let s = search.channel(c);
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = 0.0;
                for ty in 0..th {
                    let srow = &s[(oy + ty) * sw + ox..(oy + ty) * sw + ox + tw];
                    let trow = &t[ty * tw..(ty + 1) * tw];
                    acc += srow.iter().zip(trow).map(|(a, b)| a * b).sum::<f64>();
                }
                out.push(acc);
            }
        }
    }
    FeatureMap::new(template.channels(), oh, ow, out)
}
