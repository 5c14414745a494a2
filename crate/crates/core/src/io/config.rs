use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::ifga::{Matrix, ProjectionWeights, DEFAULT_REDUCTION};
use crate::motion::OmmrParams;
use crate::simulator::ScenarioConfig;

/// 1-based line of the first `key = ...` assignment in `source`.
pub fn locate_key(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

fn parse_toml<T: DeserializeOwned>(source: &str) -> Result<T> {
    toml::from_str(source).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(source, s.start));
        let key = backticked(e.message()).or_else(|| {
            let l = source.lines().nth(line? - 1)?;
            let (k, _) = l.split_once('=')?;
            Some(k.trim().to_string())
        });
        let line = key
            .as_deref()
            .and_then(|k| locate_key(source, k))
            .or(line);
        Error::Parse { key, line, message: e.message().trim().to_string() }
    })
}

fn invalid(source: &str, key: &str, message: String) -> Error {
    Error::Parse {
        key: Some(key.to_string()),
        line: locate_key(source, key),
        message,
    }
}

pub fn load_scenario(source: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = parse_toml(source)?;
    cfg.validate().map_err(|(key, message)| invalid(source, key, message))?;
    Ok(cfg)
}

/// Missing keys take their defaults.
pub fn load_ommr_params(source: &str) -> Result<OmmrParams> {
    let params: OmmrParams = parse_toml(source)?;
    params.validate().map_err(|e| {
        let message = match e {
            Error::Config(m) => m,
            other => other.to_string(),
        };
        let key = ["n1", "n2", "theta", "lambda_ema"]
            .into_iter()
            .find(|k| message.starts_with(k))
            .unwrap_or("n1");
        invalid(source, key, message)
    })?;
    Ok(params)
}

/// `attribute = ["sequence", ...]` pairs.
pub fn load_attribute_groups(source: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let groups: BTreeMap<String, Vec<String>> = parse_toml(source)?;
    if let Some((name, _)) = groups.iter().find(|(_, ids)| ids.is_empty()) {
        return Err(invalid(source, name, "attribute group lists no sequences".into()));
    }
    Ok(groups)
}

/// On-disk IFGA weights; matrices are lists of rows.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub channels: usize,
    #[serde(default = "default_reduction")]
    pub reduction: usize,
    #[serde(default)]
    pub gamma: f64,
    pub w_q: Vec<Vec<f64>>,
    pub w_k: Vec<Vec<f64>>,
    pub w_v: Vec<Vec<f64>>,
    pub b_q: Option<Vec<f64>>,
    pub b_k: Option<Vec<f64>>,
    pub b_v: Option<Vec<f64>>,
}

fn default_reduction() -> usize {
    DEFAULT_REDUCTION
}

fn rows_to_matrix(source: &str, key: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().position(|r| r.len() != cols) {
        return Err(invalid(source, key, format!("row {r} has {} entries, row 0 has {cols}", rows[r].len())));
    }
    Matrix::new(rows.len(), cols, rows.concat())
}

pub fn load_weights(source: &str) -> Result<ProjectionWeights> {
    let f: WeightsFile = parse_toml(source)?;
    let w_q = rows_to_matrix(source, "w_q", &f.w_q)?;
    let w_k = rows_to_matrix(source, "w_k", &f.w_k)?;
    let w_v = rows_to_matrix(source, "w_v", &f.w_v)?;
    let mut w = ProjectionWeights::new(f.channels, f.reduction, w_q, w_k, w_v, f.gamma)?;
    w.b_q = f.b_q;
    w.b_k = f.b_k;
    w.b_v = f.b_v;
    w.validate(f.channels)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = r#"
frame_count = 3
waypoints = [[1, 10.0, 10.0], [3, 14.0, 12.0]]
target_size = [8.0, 6.0]
occlusions = [[2, 2]]
seed = 9
"#;

    #[test]
    fn scenario_loads_with_defaults() {
        let cfg = load_scenario(SCENARIO).unwrap();
        assert_eq!(cfg.frame_count, 3);
        assert_eq!(cfg.waypoints[1].cx, 14.0);
        assert_eq!(cfg.map_size, (25, 25));
        assert_eq!(cfg.cell_scale, 8.0);
        assert_eq!(cfg.occlusions, vec![(2, 2)]);
    }

    #[test]
    fn unknown_key_is_located() {
        let src = format!("{SCENARIO}bogus = 1\n");
        match load_scenario(&src).unwrap_err() {
            Error::Parse { key, line, .. } => {
                assert_eq!(key.as_deref(), Some("bogus"));
                assert_eq!(line, Some(7));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn type_error_is_located() {
        let src = SCENARIO.replace("seed = 9", "seed = \"nine\"");
        let e = load_scenario(&src).unwrap_err();
        assert!(matches!(e, Error::Parse { line: Some(6), .. }), "{e}");
    }

    #[test]
    fn validation_error_is_located() {
        let src = SCENARIO.replace("[[2, 2]]", "[[1, 2], [2, 3]]");
        match load_scenario(&src).unwrap_err() {
            Error::Parse { key, line, message } => {
                assert_eq!(key.as_deref(), Some("occlusions"));
                assert_eq!(line, Some(5));
                assert!(message.contains("overlap"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_key_named() {
        let e = load_scenario("frame_count = 2\n").unwrap_err();
        assert!(e.to_string().contains("waypoints"), "{e}");
    }

    #[test]
    fn ommr_params_partial() {
        let p = load_ommr_params("theta = 0.4\n").unwrap();
        assert_eq!(p, OmmrParams { theta: 0.4, ..OmmrParams::default() });
        match load_ommr_params("n1 = 10\nn2 = 10\n").unwrap_err() {
            Error::Parse { key, line, .. } => {
                assert_eq!(key.as_deref(), Some("n1"));
                assert_eq!(line, Some(1));
            }
            e => panic!("unexpected {e}"),
        }
        let e = load_ommr_params("\nlambda_ema = 2.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: Some(2), .. }));
    }

    #[test]
    fn groups() {
        let g = load_attribute_groups("occlusion = [\"a\", \"b\"]\nclutter = [\"b\"]\n").unwrap();
        assert_eq!(g["occlusion"], vec!["a", "b"]);
        assert!(load_attribute_groups("x = []\n").is_err());
    }

    #[test]
    fn weights() {
        let src = r#"
channels = 2
reduction = 2
gamma = 0.5
w_q = [[1.0, 0.0]]
w_k = [[0.0, 1.0]]
w_v = [[1.0, 0.0], [0.0, 1.0]]
b_v = [0.1, 0.2]
"#;
        let w = load_weights(src).unwrap();
        assert_eq!(w.w_v, Matrix::identity(2));
        assert_eq!(w.b_v, Some(vec![0.1, 0.2]));
        assert_eq!(w.gamma, 0.5);
        assert!(load_weights(&src.replace("w_q = [[1.0, 0.0]]", "w_q = [[1.0, 0.0, 3.0]]")).is_err());
        assert!(load_weights(&src.replace("b_v = [0.1, 0.2]", "b_v = [0.1]")).is_err());
        let ragged = src.replace("[[1.0, 0.0], [0.0, 1.0]]", "[[1.0, 0.0], [0.0]]");
        assert!(matches!(load_weights(&ragged), Err(Error::Parse { line: Some(7), .. })));
    }
}
