//! Benchmark fixtures. The benches themselves live in `benches/`.

use fbs_core::{CodeKind, ExperimentConfig};

/// Circuit-noise configuration at physical error rate 1e-3.
pub fn config(code: CodeKind, d: usize, cycles: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        code,
        d,
        cycles,
        ..ExperimentConfig::default()
    };
    for key in ["p-depol", "p-reset", "p-meas"] {
        c.set(key, "1e-3").expect("valid noise");
    }
    c
}
