use crate::codec::{
    decode, diagonal_distribution, encode, expected_rate, quantize_estimate, regularize, sample_symbols, EncodedBlob,
};
use crate::error::{Error, Result};
use crate::gentle::FailureClass;
use crate::qmath::{trace_distance, DensityMatrix};
use crate::tomography::{TomographyMeasurement, TomographyPlan};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Per-class block counts for one tomography run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub success: u32,
    pub too_close_boundary: u32,
    pub no_nearby_boundary: u32,
    pub wrong_bin: u32,
}

impl ClassCounts {
    pub fn from_measurement(m: &TomographyMeasurement) -> Self {
        let mut c = Self::default();
        for o in &m.per_block_outcomes {
            match o.failure_class {
                FailureClass::Success => c.success += 1,
                FailureClass::TooCloseBoundary => c.too_close_boundary += 1,
                FailureClass::NoNearbyBoundary => c.no_nearby_boundary += 1,
                FailureClass::WrongBin => c.wrong_bin += 1,
            }
        }
        c
    }
}

/// Codec measurements of one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecRecord {
    pub delta: f64,
    pub expected_rate: f64,
    pub payload_bits: u64,
    pub total_bits: u64,
    pub round_trip_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub n: u64,
    pub declared_success: bool,
    pub classes: ClassCounts,
    /// Whether every block's bin holds the true count centre. Weaker than
    /// `declared_success`, which also requires distant boundaries.
    pub truth_feasible: bool,
    pub infeasible: bool,
    /// `||rho - rho_tilde||_1`.
    pub trace_norm_error: Option<f64>,
    pub trace_norm_bound: f64,
    pub epsilon: f64,
    pub fidelity_proxy: f64,
    pub codec: Option<CodecRecord>,
}

impl TrialRecord {
    /// Whether the trial stayed within `d^{5/2} epsilon`.
    pub fn within_bound(&self) -> Option<bool> {
        self.trace_norm_error.map(|e| e <= self.trace_norm_bound + 1e-9)
    }
}

/// Pipeline settings shared by all trials at one `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineSettings {
    pub delta: f64,
    pub precision: u16,
    /// Run regularize, quantize, sample, encode, decode after tomography.
    pub codec: bool,
}

/// Blob and symbols from the codec half of the pipeline.
pub struct CodecRun {
    pub blob: EncodedBlob,
    pub symbols: Vec<u32>,
    pub record: CodecRecord,
}

/// Compresses `n` copies of `rho_true` against an estimate.
pub fn run_codec<R: Rng + ?Sized>(
    rho_true: &DensityMatrix,
    estimate: &DensityMatrix,
    n: u64,
    delta: f64,
    precision: u16,
    rng: &mut R,
) -> Result<CodecRun> {
    let est = quantize_estimate(&regularize(estimate, delta)?, delta, precision)?;
    let q = diagonal_distribution(rho_true, &est)?;
    let symbols = sample_symbols(&q, n, rng)?;
    let blob = encode(&symbols, &est)?;
    let bytes = blob.to_bytes()?;
    let parsed = EncodedBlob::from_bytes(&bytes)?;
    let round_trip_ok = decode(&parsed)? == symbols && parsed == blob;
    let record = CodecRecord {
        delta,
        expected_rate: expected_rate(rho_true, &est)?,
        payload_bits: blob.payload_bits,
        total_bits: blob.total_bits(),
        round_trip_ok,
    };
    Ok(CodecRun { blob, symbols, record })
}

/// One trial against a prepared plan.
pub fn run_trial<R: Rng + ?Sized>(
    plan: &TomographyPlan,
    rho_true: &DensityMatrix,
    settings: &PipelineSettings,
    index: u64,
    seed: u64,
    rng: &mut R,
) -> Result<TrialRecord> {
    let n = plan.schedule().n;
    let measurement = plan.measure(rng);
    let classes = ClassCounts::from_measurement(&measurement);
    let truth_feasible = measurement.constraints.iter().all(|c| c.contains(rho_true));
    let epsilon = measurement.epsilon();
    let fidelity_proxy = measurement.fidelity_proxy();
    let declared_success = measurement.declared_success();
    let d = measurement.d;
    let mut record = TrialRecord {
        index,
        seed,
        n,
        declared_success,
        classes,
        truth_feasible,
        infeasible: false,
        trace_norm_error: None,
        trace_norm_bound: crate::tomography::trace_norm_error_bound(epsilon, d),
        epsilon,
        fidelity_proxy,
        codec: None,
    };
    let result = match measurement.estimate() {
        Ok(r) => r,
        Err(Error::Infeasible { .. }) => {
            record.infeasible = true;
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    record.trace_norm_error = Some(2.0 * trace_distance(rho_true, &result.estimate)?);
    if settings.codec {
        let run = run_codec(rho_true, &result.estimate, n, settings.delta, settings.precision, rng)?;
        record.codec = Some(run.record);
    }
    Ok(record)
}

/// Tomography, regularization, quantization, sampling, encoding and decoding
/// for one seeded trial.
pub fn run_pipeline<R: Rng + ?Sized>(
    rho_true: &DensityMatrix,
    n: u64,
    s: f64,
    delta: f64,
    precision: u16,
    rng: &mut R,
) -> Result<TrialRecord> {
    let plan = TomographyPlan::new(rho_true, n, s)?;
    let settings = PipelineSettings { delta, precision, codec: true };
    run_trial(&plan, rho_true, &settings, 0, 0, rng)
}
