//! Single-Gaussian HMMs with left-right and cyclic topologies.
//!
//! States are numbered from 0 in code. Every state has a self-loop and an
//! edge to its successor; a cyclic model adds the wrap edge from the last
//! state back to state 0, so one pass through the chain models one step.
//! Emissions are diagonal-covariance Gaussians.

mod decode;
mod train;

pub use decode::{log_likelihood, viterbi, DecodeGrammar, DecodeResult};
pub use train::{embedded_reestimate, flat_start, training_log_likelihood, variance_floor};

use serde::{Deserialize, Serialize};

use crate::features::FeatureSequence;
use crate::logmath::safe_ln;

/// Absolute lower bound on emission variances, applied on top of the
/// data-relative floor so constant features stay finite.
pub const MIN_VARIANCE: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum HmmError {
    #[error("too few frames: a pass of {frames} frames cannot cover {states} states")]
    TooFewFrames { frames: usize, states: usize },
    #[error("no valid path through the model for a {frames}-frame sequence")]
    NoValidPath { frames: usize },
    #[error("dimension mismatch: model has {expected}, features have {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{sequences} sequences but {step_counts} step counts")]
    LengthMismatch { sequences: usize, step_counts: usize },
    #[error("invalid step count {count}: {reason}")]
    InvalidStepCount { count: usize, reason: &'static str },
    #[error("no training data")]
    NoData,
    #[error("invalid HMM configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("numerical underflow in log-domain recursion")]
    NumericalUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Strict left-right chain, one pass per recording.
    Linear,
    /// Left-right chain plus a last-to-first edge, one pass per step.
    #[default]
    Cyclic,
}

impl Topology {
    pub fn is_cyclic(self) -> bool {
        matches!(self, Topology::Cyclic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmmConfig {
    pub num_states: usize,
    pub training_iterations: usize,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub variance_floor_factor: f64,
    /// Lower bound for every permitted transition probability.
    pub min_self_loop: f64,
    pub topology: Topology,
}

impl Default for HmmConfig {
    fn default() -> Self {
        Self {
            num_states: 15,
            training_iterations: 6,
            variance_floor_factor: 1e-2,
            min_self_loop: 1e-3,
            topology: Topology::Cyclic,
        }
    }
}

impl HmmConfig {
    pub fn validate(&self) -> Result<(), HmmError> {
        if self.num_states < 2 {
            return Err(HmmError::InvalidConfig("num_states must be at least 2".into()));
        }
        if !(self.variance_floor_factor > 0.0 && self.variance_floor_factor < 1.0) {
            return Err(HmmError::InvalidConfig("variance_floor_factor must lie in (0, 1)".into()));
        }
        // Rows have at most two successors, so the floor must leave room for both.
        if !(self.min_self_loop > 0.0 && self.min_self_loop < 0.5) {
            return Err(HmmError::InvalidConfig("min_self_loop must lie in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Whether the topology permits a transition from state `i` to `j`.
pub fn transition_allowed(i: usize, j: usize, num_states: usize, topology: Topology) -> bool {
    j == i || j == i + 1 || (topology.is_cyclic() && i == num_states - 1 && j == 0)
}

/// A trained (or hand-built) subject model.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHmm {
    subject_id: String,
    topology: Topology,
    log_transitions: Vec<Vec<f64>>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl GaussianHmm {
    /// Builds a model from probability-domain transitions. Rows must sum to
    /// one and give zero mass to transitions the topology forbids.
    pub fn from_parts(
        subject_id: impl Into<String>,
        topology: Topology,
        transitions: Vec<Vec<f64>>,
        means: Vec<Vec<f64>>,
        variances: Vec<Vec<f64>>,
    ) -> Result<Self, HmmError> {
        let log_transitions = transitions.iter().map(|r| r.iter().map(|&p| safe_ln(p)).collect()).collect();
        let model = Self { subject_id: subject_id.into(), topology, log_transitions, means, variances };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<(), HmmError> {
        let s = self.means.len();
        let bad = |m: String| Err(HmmError::InvalidModel(m));
        if s < 2 {
            return bad("need at least two states".into());
        }
        let d = self.means[0].len();
        if d == 0 {
            return bad("zero-dimensional emissions".into());
        }
        if self.variances.len() != s || self.log_transitions.len() != s {
            return bad("state count differs between parameter blocks".into());
        }
        for i in 0..s {
            if self.means[i].len() != d || self.variances[i].len() != d || self.log_transitions[i].len() != s {
                return bad(format!("state {i} has mis-shaped parameters"));
            }
            if self.means[i].iter().any(|v| !v.is_finite()) {
                return bad(format!("state {i} has a non-finite mean"));
            }
            if self.variances[i].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return bad(format!("state {i} has a non-positive variance"));
            }
            let mut total = 0.0;
            for j in 0..s {
                let lp = self.log_transitions[i][j];
                if lp.is_nan() || lp > 0.0 {
                    return bad(format!("transition ({i},{j}) is not a log probability"));
                }
                if !transition_allowed(i, j, s, self.topology) && lp != f64::NEG_INFINITY {
                    return bad(format!("transition ({i},{j}) is not permitted by the topology"));
                }
                total += lp.exp();
            }
            if (total - 1.0).abs() > 1e-9 {
                return bad(format!("transition row {i} sums to {total}"));
            }
        }
        Ok(())
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn set_subject_id(&mut self, id: impl Into<String>) {
        self.subject_id = id.into();
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn num_states(&self) -> usize {
        self.means.len()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn log_transitions(&self) -> &[Vec<f64>] {
        &self.log_transitions
    }

    pub fn transition_prob(&self, i: usize, j: usize) -> f64 {
        self.log_transitions[i][j].exp()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    pub(crate) fn check_dim(&self, seq: &FeatureSequence) -> Result<(), HmmError> {
        if seq.dim() != self.dim() {
            return Err(HmmError::DimensionMismatch { expected: self.dim(), actual: seq.dim() });
        }
        Ok(())
    }

    /// Log emission densities, row-major T×S.
    pub(crate) fn emission_table(&self, seq: &FeatureSequence) -> Vec<f64> {
        let s = self.num_states();
        let mut out = Vec::with_capacity(seq.num_frames() * s);
        for f in seq.frames() {
            for k in 0..s {
                out.push(crate::logmath::diag_gaussian_log_pdf(f, &self.means[k], &self.variances[k]));
            }
        }
        out
    }

    /// Versioned JSON document. Log probabilities of forbidden transitions
    /// are written as `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDoc {
            version: 1,
            subject_id: self.subject_id.clone(),
            states: self.num_states(),
            dim: self.dim(),
            log_transitions: self.log_transitions.clone(),
            means: self.means.clone(),
            variances: self.variances.clone(),
            cyclic: self.topology.is_cyclic(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HmmError> {
        let doc: ModelDoc = serde_json::from_str(text).map_err(|e| HmmError::InvalidModel(e.to_string()))?;
        if doc.version != 1 {
            return Err(HmmError::InvalidModel(format!("unsupported version {}", doc.version)));
        }
        let model = Self {
            subject_id: doc.subject_id,
            topology: if doc.cyclic { Topology::Cyclic } else { Topology::Linear },
            log_transitions: doc.log_transitions,
            means: doc.means,
            variances: doc.variances,
        };
        model.check()?;
        if model.num_states() != doc.states || model.dim() != doc.dim {
            return Err(HmmError::InvalidModel("declared states/dim disagree with parameters".into()));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    subject_id: String,
    states: usize,
    dim: usize,
    #[serde(with = "crate::serde_ext::log_matrix")]
    log_transitions: Vec<Vec<f64>>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    cyclic: bool,
}
