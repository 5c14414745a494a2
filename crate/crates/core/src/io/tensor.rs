use std::fmt::Write;

use crate::error::{Error, Result};
use crate::ifga::FeatureMap;

const HEADER_BYTES: usize = 12;

/// `u32` LE channels, height, width, then every value as `f32` LE.
pub fn encode_feature_map(map: &FeatureMap) -> Vec<u8> {
    let (c, h, w) = map.shape();
    let mut out = Vec::with_capacity(HEADER_BYTES + 4 * map.data().len());
    for d in [c, h, w] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for &v in map.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_feature_map(bytes: &[u8]) -> Result<FeatureMap> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Dimension(format!(
            "feature map file has {} bytes, shorter than its {HEADER_BYTES}-byte header",
            bytes.len()
        )));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    let (c, h, w) = (dim(0), dim(1), dim(2));
    let body = &bytes[HEADER_BYTES..];
    let expected = c.checked_mul(h).and_then(|n| n.checked_mul(w)).and_then(|n| n.checked_mul(4));
    if expected != Some(body.len()) {
        return Err(Error::Dimension(format!(
            "feature map header says {c}x{h}x{w} but the file carries {} value bytes",
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    FeatureMap::new(c, h, w, data)
}

/// `channel,row,col,value` with a header line.
pub fn feature_map_csv(map: &FeatureMap) -> String {
    let (c, h, w) = map.shape();
    let mut out = String::from("channel,row,col,value\n");
    for ch in 0..c {
        for y in 0..h {
            for x in 0..w {
                writeln!(out, "{ch},{y},{x},{}", map.get(ch, y, x)).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact_for_f32_values() {
        let m = FeatureMap::from_fn(3, 2, 4, |c, y, x| (c as f32 * 0.5 - y as f32 * 0.25 + x as f32 / 3.0) as f64).unwrap();
        let bytes = encode_feature_map(&m);
        assert_eq!(bytes.len(), 12 + 4 * 24);
        assert_eq!(&bytes[..4], &3u32.to_le_bytes());
        let back = decode_feature_map(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode_feature_map(&back), bytes);
    }

    #[test]
    fn malformed_binary_rejected() {
        assert!(decode_feature_map(&[0u8; 5]).is_err());
        let m = FeatureMap::zeros(1, 2, 2).unwrap();
        let mut bytes = encode_feature_map(&m);
        bytes.pop();
        assert!(matches!(decode_feature_map(&bytes), Err(Error::Dimension(_))));
        let mut huge = vec![0xff; 12];
        huge.extend([0; 8]);
        assert!(decode_feature_map(&huge).is_err());
    }

    #[test]
    fn csv_long_form() {
        let m = FeatureMap::from_fn(2, 1, 2, |c, _, x| (c * 10 + x) as f64).unwrap();
        assert_eq!(feature_map_csv(&m), "channel,row,col,value\n0,0,0,0\n0,0,1,1\n1,0,0,10\n1,0,1,11\n");
    }
}
