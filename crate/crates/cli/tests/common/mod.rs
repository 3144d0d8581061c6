#![allow(dead_code)]

use std::path::Path;

use spacobi::io::write_matrix;
use spacobi::simgen::{generate_pair, SimSpec};
use spacobi::DataMatrix;
use spacobi_cli::SimSidecar;

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn assert_schema(schema: &str, path: &Path) {
    let schema: serde_json::Value = serde_json::from_str(schema).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance = read_json(path);
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{} violates its schema: {errors:?}", path.display());
}

/// Writes `stem.csv`, `stem.val.csv` and `stem.truth.json` for `spec`.
pub fn write_sim(dir: &Path, stem: &str, spec: &SimSpec) -> SimSidecar {
    let (train, val, truth) = generate_pair(spec).unwrap();
    write_matrix(&dir.join(format!("{stem}.csv")), &DataMatrix::new(train)).unwrap();
    write_matrix(&dir.join(format!("{stem}.val.csv")), &DataMatrix::new(val)).unwrap();
    let sidecar = SimSidecar {
        spec: spec.clone(),
        replicate: 0,
        truth,
    };
    spacobi::io::write_json(&dir.join(format!("{stem}.truth.json")), &sidecar).unwrap();
    sidecar
}
