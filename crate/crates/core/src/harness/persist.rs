//! JSON files for matrix product states.
//!
//! ```json
//! {
//!   "version": 1,
//!   "N": 3,
//!   "bond_dims": [1, 2, 2, 1],
//!   "canonical": "left",
//!   "cores": [ [[[a, b]], [[c, d]]], ... ]
//! }
//! ```
//!
//! `cores[i][l][s][r]` is entry `(l, s, r)` of core `i`. Floats are written
//! in shortest round-trip form, so a load after a save is bit-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mps::{Canonical, MatrixProductState, MpsCore};

pub const MPS_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MpsFile {
    version: u32,
    #[serde(rename = "N")]
    n: usize,
    bond_dims: Vec<usize>,
    canonical: Canonical,
    cores: Vec<Vec<Vec<Vec<f64>>>>,
}

pub fn mps_to_json(mps: &MatrixProductState) -> Result<String> {
    let cores = mps
        .cores()
        .iter()
        .map(|c| {
            (0..c.left_dim())
                .map(|l| {
                    (0..2)
                        .map(|s| (0..c.right_dim()).map(|r| c.get(l, s, r)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let file = MpsFile {
        version: MPS_SCHEMA_VERSION,
        n: mps.n_qubits(),
        bond_dims: mps.bond_dims(),
        canonical: mps.canonical(),
        cores,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::MalformedFile(e.to_string()))
}

pub fn mps_from_json(text: &str) -> Result<MatrixProductState> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
    match value.get("version") {
        None => return Err(Error::MalformedFile("missing `version`".into())),
        Some(v) if v.as_u64() != Some(MPS_SCHEMA_VERSION as u64) => {
            return Err(Error::SchemaVersionMismatch {
                found: v.to_string(),
                expected: MPS_SCHEMA_VERSION,
            })
        }
        Some(_) => {}
    }
    let file: MpsFile =
        serde_json::from_value(value).map_err(|e| Error::MalformedFile(e.to_string()))?;
    if file.cores.len() != file.n || file.bond_dims.len() != file.n + 1 {
        return Err(Error::MalformedFile(format!(
            "N = {} but {} cores and {} bond dimensions",
            file.n,
            file.cores.len(),
            file.bond_dims.len()
        )));
    }
    let mut cores = Vec::with_capacity(file.n);
    for (i, nested) in file.cores.iter().enumerate() {
        let (left, right) = (file.bond_dims[i], file.bond_dims[i + 1]);
        let shape_ok = nested.len() == left
            && nested
                .iter()
                .all(|ls| ls.len() == 2 && ls.iter().all(|row| row.len() == right));
        if !shape_ok {
            return Err(Error::MalformedFile(format!(
                "core {i} is not {left}×2×{right}"
            )));
        }
        let data = nested.iter().flatten().flatten().copied().collect();
        cores.push(
            MpsCore::new(left, right, data)
                .map_err(|e| Error::MalformedFile(format!("core {i}: {e}")))?,
        );
    }
    MatrixProductState::new(cores, file.canonical).map_err(|e| Error::MalformedFile(e.to_string()))
}

pub fn save_mps(mps: &MatrixProductState, path: &Path) -> Result<()> {
    std::fs::write(path, mps_to_json(mps)?).map_err(|e| Error::io(path, e))
}

pub fn load_mps(path: &Path) -> Result<MatrixProductState> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mps_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgrid::{discretize, FunctionSpec};
    use crate::mps::{from_state_vector, mps_inner, truncate, TruncationPolicy};

    fn gaussian_mps(n: usize) -> MatrixProductState {
        let spec = FunctionSpec::gaussian(0.0, 1.0);
        from_state_vector(&discretize(&spec, &spec.default_domain(), n).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let mps = gaussian_mps(8);
        let back = mps_from_json(&mps_to_json(&mps).unwrap()).unwrap();
        assert_eq!(back, mps);
        assert!((mps_inner(&mps, &back).unwrap() - 1.0).abs() < 1e-12);

        let right = truncate(&mps, &TruncationPolicy::rank(3)).unwrap().state;
        assert_eq!(mps_from_json(&mps_to_json(&right).unwrap()).unwrap(), right);
    }

    #[test]
    fn version_is_checked() {
        let text = mps_to_json(&gaussian_mps(3)).unwrap();
        for bad in ["\"0\"", "0", "2", "null"] {
            let edited = text.replacen("\"version\": 1", &format!("\"version\": {bad}"), 1);
            assert!(
                matches!(
                    mps_from_json(&edited),
                    Err(Error::SchemaVersionMismatch { .. })
                ),
                "{bad}"
            );
        }
        let missing = text.replacen("\"version\": 1,", "", 1);
        assert!(matches!(
            mps_from_json(&missing),
            Err(Error::MalformedFile(_))
        ));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let text = mps_to_json(&gaussian_mps(4)).unwrap();
        assert!(matches!(
            mps_from_json(&text[..text.len() / 2]),
            Err(Error::MalformedFile(_))
        ));
        let wrong_n = text.replacen("\"N\": 4", "\"N\": 5", 1);
        assert!(matches!(
            mps_from_json(&wrong_n),
            Err(Error::MalformedFile(_))
        ));
        let v: Value = serde_json::from_str(&text).unwrap();
        let mut bad_gauge = v.clone();
        bad_gauge["cores"][1][0][0][0] = Value::from(7.5);
        assert!(matches!(
            mps_from_json(&bad_gauge.to_string()),
            Err(Error::MalformedFile(_))
        ));
        let mut bad_shape = v;
        bad_shape["cores"][0][0].as_array_mut().unwrap().pop();
        assert!(matches!(
            mps_from_json(&bad_shape.to_string()),
            Err(Error::MalformedFile(_))
        ));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.json");
        assert!(matches!(load_mps(&missing), Err(Error::IoFailure { .. })));
        let path = dir.path().join("g.json");
        let mps = gaussian_mps(6);
        save_mps(&mps, &path).unwrap();
        assert_eq!(load_mps(&path).unwrap(), mps);
        assert!(matches!(
            save_mps(&mps, dir.path()),
            Err(Error::IoFailure { .. })
        ));
    }
}
