//! Experiment driver: end-to-end trials, Monte Carlo sweeps, overflow
//! estimates, and report emission.

pub mod config;
pub mod exponent;
pub mod overflow;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::{DeltaRule, ExperimentConfig, ExperimentKind, StateSpec};
pub use exponent::{overflow_exponent_analytic, ExponentResult};
pub use overflow::{overflow_probability_mc, OverflowEstimate, OverflowMethod};
pub use pipeline::{run_pipeline, run_trial, TrialRecord};
pub use report::{emit_report, parse_json_report, PointSummary, Report, ReportFormat, SlopeFit};
pub use sweep::{run_sweep, run_sweep_with};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-mode sub-seed for `(stream, point, trial)` under `master`.
pub fn derive_seed(master: u64, stream: u64, point: u64, trial: u64) -> u64 {
    let mut h = splitmix64(master);
    for word in [stream, point, trial] {
        h = splitmix64(h ^ word);
    }
    h
}

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
