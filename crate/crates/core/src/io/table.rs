use std::fmt::Write;

use crate::bbox::BoundingBox;
use crate::error::{Error, Result};
use crate::eval::{
    norm_precision_threshold, precision_threshold, success_threshold, EvalResult,
};
use crate::simulator::{FrameObservation, TraceRow};

/// One line per grid row, values comma-separated in shortest round-trip form.
pub fn grid_csv(values: &[f64], rows: usize, cols: usize) -> Result<String> {
    if values.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{rows}x{cols} grid needs {} values, got {}",
            rows * cols,
            values.len()
        )));
    }
    let mut out = String::new();
    for r in 0..rows {
        let line: Vec<String> = values[r * cols..(r + 1) * cols].iter().map(f64::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Inverse of [`grid_csv`]: `(rows, cols, values)`.
pub fn parse_grid_csv(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { key: None, line: Some(i + 1), message: e.to_string() })?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    key: None,
                    line: Some(i + 1),
                    message: format!("expected {c} columns, found {}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    Ok((rows, cols.unwrap_or(0), values))
}

/// Binary 8-bit PGM. Values are divided by `scale`, clamped to [0, 1] and
/// rounded to 0..=255; a non-positive `scale` renders black.
pub fn pgm(values: &[f64], rows: usize, cols: usize, scale: f64) -> Result<Vec<u8>> {
    if values.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "{rows}x{cols} image needs {} values, got {}",
            rows * cols,
            values.len()
        )));
    }
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if scale > 0.0 {
            ((v / scale).clamp(0.0, 1.0) * 255.0).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}

pub fn trajectory_csv(boxes: &[BoundingBox], occluded: Option<&[bool]>) -> Result<String> {
    if let Some(o) = occluded {
        if o.len() != boxes.len() {
            return Err(Error::LengthMismatch { what: "boxes vs occlusion flags", left: boxes.len(), right: o.len() });
        }
    }
    let mut out = String::from(if occluded.is_some() { "frame,cx,cy,w,h,occluded\n" } else { "frame,cx,cy,w,h\n" });
    for (k, b) in boxes.iter().enumerate() {
        write!(out, "{},{},{},{},{}", k + 1, b.cx, b.cy, b.w, b.h).unwrap();
        if let Some(o) = occluded {
            write!(out, ",{}", u8::from(o[k])).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses `x,y,w,h` corner-format lines (comma, tab or whitespace separated)
/// into center-form boxes. Blank lines and `#` comments are skipped.
pub fn parse_annotations(text: &str) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { key: None, line: Some(i + 1), message };
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields x,y,w,h, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| err(format!("`{f}` is not a number")))?;
        }
        let b = BoundingBox::from_corner(v[0], v[1], v[2], v[3]).map_err(|e| err(e.to_string()))?;
        boxes.push(b);
    }
    Ok(boxes)
}

/// `frame,psr,npsr,branch`; branch is `warmup`, `low`, `high` or `off`.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("frame,psr,npsr,branch\n");
    for r in rows {
        let branch = r.branch.map_or("off", |b| b.as_str());
        writeln!(out, "{},{},{},{}", r.frame, r.psr, r.npsr, branch).unwrap();
    }
    out
}

/// `frame,peak_row,peak_col,peak_value,psr,occluded,lost`, one line per frame.
pub fn response_summary_csv(frames: &[FrameObservation]) -> String {
    let mut out = String::from("frame,peak_row,peak_col,peak_value,psr,occluded,lost\n");
    for f in frames {
        let (r, c, v) = f.response.peak();
        writeln!(
            out,
            "{},{r},{c},{v},{},{},{}",
            f.frame,
            crate::motion::psr(&f.response),
            u8::from(f.occluded),
            u8::from(f.lost)
        )
        .unwrap();
    }
    out
}

/// Long-form curves of several results: `scope,curve,threshold,value`.
pub fn eval_curves_csv<'a>(results: impl IntoIterator<Item = (&'a str, &'a EvalResult)>) -> String {
    let mut out = String::from("scope,curve,threshold,value\n");
    for (scope, result) in results {
        let curves: [(&str, &[f64], fn(usize) -> f64); 3] = [
            ("precision", &result.precision_curve, precision_threshold),
            ("norm_precision", &result.norm_precision_curve, norm_precision_threshold),
            ("success", &result.success_curve, success_threshold),
        ];
        for (name, values, threshold) in curves {
            for (i, v) in values.iter().enumerate() {
                writeln!(out, "{scope},{name},{},{v}", threshold(i)).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_round_trip() {
        let v = vec![0.0, 0.1, 1.0 / 3.0, 1.0, 2.5e-9, 0.75];
        let text = grid_csv(&v, 2, 3).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_grid_csv(&text).unwrap(), (2, 3, v));
        assert!(grid_csv(&[0.0; 5], 2, 3).is_err());
        assert!(parse_grid_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn pgm_header_and_scaling() {
        let img = pgm(&[0.0, 0.5, 1.0, 2.0, -1.0, 0.25], 2, 3, 1.0).unwrap();
        let header = b"P5\n3 2\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(&img[header.len()..], &[0, 128, 255, 255, 0, 64]);
        let dark = pgm(&[0.0; 4], 2, 2, 0.0).unwrap();
        assert!(dark.ends_with(&[0, 0, 0, 0]));
    }

    #[test]
    fn annotations_convert_corners() {
        let text = "10,20,4,6\n# note\n\n0\t0\t2\t2\n1 1 3 5\n";
        let boxes = parse_annotations(text).unwrap();
        assert_eq!(boxes.len(), 3);
        assert_eq!((boxes[0].cx, boxes[0].cy, boxes[0].w, boxes[0].h), (12.0, 23.0, 4.0, 6.0));
        assert_eq!((boxes[1].cx, boxes[1].cy), (1.0, 1.0));
        assert_eq!((boxes[2].cx, boxes[2].cy), (2.5, 3.5));
    }

    #[test]
    fn annotation_errors_carry_line() {
        let e = parse_annotations("1,2,3,4\n1,2,3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: Some(2), .. }));
        let e = parse_annotations("1,2,3,4\n\n1,2,0,4\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: Some(3), .. }));
        let e = parse_annotations("1,2,x,4\n").unwrap_err();
        assert!(e.to_string().contains("`x`"));
    }

    #[test]
    fn trajectory_rows() {
        let b = BoundingBox::new(1.5, 2.0, 3.0, 4.0).unwrap();
        let text = trajectory_csv(&[b, b], Some(&[false, true])).unwrap();
        assert_eq!(text, "frame,cx,cy,w,h,occluded\n1,1.5,2,3,4,0\n2,1.5,2,3,4,1\n");
        assert!(trajectory_csv(&[b], Some(&[])).is_err());
        assert_eq!(trajectory_csv(&[b], None).unwrap().lines().count(), 2);
    }
}
