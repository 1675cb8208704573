//! Cache fixtures shared by the unit tests.

use crate::cache::{parse_cache, TuningCache};

/// Single-parameter cache with the given objective values and costs.
pub fn values_cache_json(values: &[f64], costs: &[f64]) -> String {
    assert_eq!(values.len(), costs.len());
    let entries: Vec<serde_json::Value> = values
        .iter()
        .zip(costs)
        .enumerate()
        .map(|(i, (v, c))| {
            serde_json::json!({
                "config": [i as i64],
                "valid": true,
                "objective": v,
                "eval_cost_seconds": c,
            })
        })
        .collect();
    serde_json::json!({
        "schema_version": "1.0",
        "metadata": {
            "kernel_name": "values",
            "device_name": "synthetic",
            "input_id": "fixture",
            "objective": {"name": "runtime", "direction": "min", "unit": "seconds"}
        },
        "parameters": [{"name": "v", "values": (0..values.len() as i64).collect::<Vec<_>>()}],
        "constraints": [],
        "entries": entries,
    })
    .to_string()
}

pub fn values_cache(values: &[f64], costs: &[f64]) -> TuningCache {
    parse_cache(&values_cache_json(values, costs)).unwrap()
}

/// Two-parameter space over {1,2} with x*y <= 2, leaving three valid points.
pub fn constrained_pair_cache() -> TuningCache {
    let text = serde_json::json!({
        "schema_version": "1.0",
        "metadata": {
            "kernel_name": "pair",
            "device_name": "synthetic",
            "input_id": "fixture",
            "objective": {"name": "runtime", "direction": "min", "unit": "seconds"}
        },
        "parameters": [
            {"name": "x", "values": [1, 2]},
            {"name": "y", "values": [1, 2]}
        ],
        "constraints": ["x*y <= 2"],
        "entries": [
            {"config": [1, 1], "valid": true, "objective": 3.0, "eval_cost_seconds": 1.0},
            {"config": [1, 2], "valid": true, "objective": 2.0, "eval_cost_seconds": 1.0},
            {"config": [2, 1], "valid": true, "objective": 1.0, "eval_cost_seconds": 1.0}
        ]
    })
    .to_string();
    parse_cache(&text).unwrap()
}

/// Rewrites a cache's objective values through an affine map a*v + b at the
/// JSON level, preserving everything else.
pub fn affine_rescaled(cache: &TuningCache, a: f64, b: f64) -> TuningCache {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.json");
    crate::cache::write_cache(cache, &path).unwrap();
    let mut model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for entry in model["entries"].as_array_mut().unwrap() {
        if let Some(v) = entry["objective"].as_f64() {
            entry["objective"] = serde_json::json!(a * v + b);
        }
    }
    parse_cache(&model.to_string()).unwrap()
}
