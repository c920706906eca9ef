use crate::codec::{default_delta, DEFAULT_PRECISION, MAX_PRECISION, MIN_PRECISION};
use crate::error::{Error, Result};
use crate::gentle::GentleConfig;
use crate::qmath::{bloch_reconstruct, gell_mann_basis, random_density_matrix, DensityMatrix};
use crate::tomography::block_count;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FailureScaling,
    EstimateScaling,
    RateConvergence,
    Overflow,
    Exponent,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::FailureScaling => "failure_scaling",
            Self::EstimateScaling => "estimate_scaling",
            Self::RateConvergence => "rate_convergence",
            Self::Overflow => "overflow",
            Self::Exponent => "exponent",
        }
    }

    /// Whether trials run the codec after tomography.
    pub fn runs_codec(self) -> bool {
        matches!(self, Self::RateConvergence | Self::Overflow)
    }
}

/// The source state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateSpec {
    /// Gell-Mann coefficients `c_k = tr(rho sigma_k)`.
    Bloch { bloch: Vec<f64> },
    /// Diagonal in the computational basis.
    Diagonal { probabilities: Vec<f64> },
    /// Hilbert-Schmidt random state drawn from this seed.
    Random { seed: u64 },
}

/// Regularization weight as a function of `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DeltaRule {
    /// `n^{-s}` with the experiment's `s`.
    Power,
    /// `n^{-exponent}`.
    PowerExponent { exponent: f64 },
    Fixed { value: f64 },
}

impl DeltaRule {
    pub fn delta(&self, n: u64, s: f64) -> f64 {
        match *self {
            Self::Power => default_delta(n, s),
            Self::PowerExponent { exponent } => default_delta(n, exponent),
            Self::Fixed { value } => value,
        }
    }
}

fn default_delta_rule() -> DeltaRule {
    DeltaRule::Power
}

fn default_precision() -> u16 {
    DEFAULT_PRECISION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub d: usize,
    pub state: StateSpec,
    /// Strictly increasing copy counts.
    pub n: Vec<u64>,
    pub s: f64,
    #[serde(default = "default_delta_rule")]
    pub delta: DeltaRule,
    #[serde(default = "default_precision")]
    pub precision: u16,
    pub trials: u64,
    pub seed: u64,
    /// Rates `R` for the overflow and exponent kinds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    /// Exit with status 3 when a point's declared-failure fraction exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_failure_fraction: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d < 2 || self.d > u8::MAX as usize {
            return bad(format!("d = {} outside 2..=255", self.d));
        }
        if !(self.s > 0.0 && self.s < 0.5) {
            return bad(format!("s = {} outside (0, 1/2)", self.s));
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.kind != ExperimentKind::Exponent && self.n.is_empty() {
            return bad("n list is empty".into());
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n values must be strictly increasing".into());
        }
        let blocks = block_count(self.d);
        if let Some(&n) = self.n.iter().find(|&&n| n < blocks) {
            return bad(format!("n = {n} cannot fill {blocks} tomography blocks"));
        }
        for &n in &self.n {
            GentleConfig::new(n / blocks, self.s)?;
            let delta = self.delta.delta(n, self.s);
            if !(0.0..1.0).contains(&delta) {
                return bad(format!("delta = {delta} at n = {n} outside [0, 1)"));
            }
        }
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&self.precision) {
            return bad(format!("precision {} outside {MIN_PRECISION}..={MAX_PRECISION}", self.precision));
        }
        match self.kind {
            ExperimentKind::Overflow | ExperimentKind::Exponent => match &self.rates {
                Some(r) if !r.is_empty() && r.iter().all(|x| x.is_finite() && *x >= 0.0) => {}
                _ => return bad(format!("{} needs a nonempty list of nonnegative rates", self.kind.as_str())),
            },
            _ => {}
        }
        if let Some(f) = self.max_failure_fraction {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("max_failure_fraction {f} outside [0, 1]"));
            }
        }
        self.source_state().map(|_| ())
    }

    pub fn source_state(&self) -> Result<DensityMatrix> {
        let d = self.d;
        let state = match &self.state {
            StateSpec::Bloch { bloch } => {
                DensityMatrix::new(bloch_reconstruct(bloch, d, &gell_mann_basis(d)?)?)
            }
            StateSpec::Diagonal { probabilities } => {
                if probabilities.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: probabilities.len() });
                }
                DensityMatrix::diagonal(probabilities)
            }
            StateSpec::Random { seed } => random_density_matrix(d, &mut ChaCha8Rng::seed_from_u64(*seed)),
        };
        state.map_err(|e| Error::Config(format!("invalid state: {e}")))
    }
}
