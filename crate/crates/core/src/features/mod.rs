//! MFCC front end: static cepstra, dynamics and an enrollment-fitted PCA
//! rotation.

mod dynamics;
mod mfcc;
mod pca;

pub use dynamics::{append_dynamics, deltas};
pub use mfcc::{compute_mfcc, frame_count, hz_to_mel, mel_to_hz};
pub use pca::{apply_pca, fit_pca, PcaTransform};

use serde::{Deserialize, Serialize};

use crate::audio::MonoSignal;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },
    #[error("signal too short: {samples} samples, one frame needs {frame}")]
    SignalTooShort { samples: usize, frame: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("degenerate covariance: {frames} pooled frames for dimension {dim} (need at least {})", dim + 1)]
    DegenerateCovariance { frames: usize, dim: usize },
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid feature document: {0}")]
    Format(String),
}

/// Front-end parameters. Defaults give 13 cepstra (C0..C12) from 25 ms
/// Hamming windows every 10 ms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccConfig {
    /// Seconds.
    pub frame_length: f64,
    /// Seconds.
    pub frame_shift: f64,
    pub num_cepstra: usize,
    pub num_mel_filters: usize,
    pub preemphasis: f64,
    /// Regression half-width for delta and acceleration coefficients.
    pub delta_window: usize,
    pub log_floor: f64,
    pub expected_sample_rate: u32,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_length: 0.025,
            frame_shift: 0.010,
            num_cepstra: 13,
            num_mel_filters: 26,
            preemphasis: 0.97,
            delta_window: 2,
            log_floor: 1e-10,
            expected_sample_rate: 16_000,
        }
    }
}

impl MfccConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: &str| Err(FeatureError::InvalidConfig(m.to_string()));
        if !(self.frame_length > 0.0 && self.frame_shift > 0.0) {
            return bad("frame length and shift must be positive");
        }
        if self.frame_shift > self.frame_length {
            return bad("frame_shift must not exceed frame_length");
        }
        if self.num_cepstra == 0 || self.num_cepstra > self.num_mel_filters {
            return bad("need 1 <= num_cepstra <= num_mel_filters");
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return bad("preemphasis must lie in [0, 1)");
        }
        if self.delta_window == 0 {
            return bad("delta_window must be at least 1");
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return bad("log_floor must be positive");
        }
        if self.expected_sample_rate == 0 {
            return bad("expected_sample_rate must be positive");
        }
        Ok(())
    }

    pub fn window_samples(&self) -> usize {
        (self.frame_length * self.expected_sample_rate as f64).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (self.frame_shift * self.expected_sample_rate as f64).round() as usize
    }
}

/// A T×D matrix of frame vectors, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    data: Vec<f64>,
    dim: usize,
    frame_shift: f64,
}

impl FeatureSequence {
    pub fn from_flat(data: Vec<f64>, dim: usize, frame_shift: f64) -> Result<Self, FeatureError> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(FeatureError::Format(format!(
                "{} values cannot form frames of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::Format("non-finite feature value".into()));
        }
        Ok(Self { data, dim, frame_shift })
    }

    pub fn from_frames(frames: &[Vec<f64>], frame_shift: f64) -> Result<Self, FeatureError> {
        let dim = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != dim) {
            return Err(FeatureError::Format("ragged frame matrix".into()));
        }
        Self::from_flat(frames.concat(), dim, frame_shift)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_frames(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn frame_shift(&self) -> f64 {
        self.frame_shift
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FeatureDoc {
            version: 1,
            dim: self.dim,
            frame_shift: self.frame_shift,
            frames: self.frames().map(<[f64]>::to_vec).collect(),
        })
        .expect("finite features serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, FeatureError> {
        let doc: FeatureDoc =
            serde_json::from_str(text).map_err(|e| FeatureError::Format(e.to_string()))?;
        if doc.version != 1 {
            return Err(FeatureError::Format(format!("unsupported version {}", doc.version)));
        }
        let seq = Self::from_frames(&doc.frames, doc.frame_shift)?;
        if seq.dim != doc.dim {
            return Err(FeatureError::DimensionMismatch { expected: doc.dim, actual: seq.dim });
        }
        Ok(seq)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureDoc {
    version: u32,
    dim: usize,
    frame_shift: f64,
    frames: Vec<Vec<f64>>,
}

/// Where the PCA rotation sits relative to the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcaStage {
    /// Rotate the full static+delta+acceleration vectors.
    #[default]
    AfterDynamics,
    /// Rotate the static cepstra, then compute dynamics on the rotated values.
    BeforeDynamics,
}

/// MFCC extraction plus the optional PCA step, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturePipeline {
    pub mfcc: MfccConfig,
    pub pca: bool,
    pub pca_stage: PcaStage,
}

impl Default for FeaturePipeline {
    fn default() -> Self {
        Self { mfcc: MfccConfig::default(), pca: true, pca_stage: PcaStage::AfterDynamics }
    }
}

impl FeaturePipeline {
    pub fn output_dim(&self) -> usize {
        3 * self.mfcc.num_cepstra
    }

    /// Features at the point where PCA is fitted and applied.
    pub fn pca_input(&self, signal: &MonoSignal) -> Result<FeatureSequence, FeatureError> {
        let statics = compute_mfcc(signal, &self.mfcc)?;
        Ok(match self.pca_stage {
            PcaStage::AfterDynamics => append_dynamics(&statics, self.mfcc.delta_window),
            PcaStage::BeforeDynamics => statics,
        })
    }

    /// Completes [`pca_input`](Self::pca_input) output into model features.
    pub fn finish(
        &self,
        seq: FeatureSequence,
        pca: Option<&PcaTransform>,
    ) -> Result<FeatureSequence, FeatureError> {
        match self.pca_stage {
            PcaStage::AfterDynamics => match pca {
                Some(t) => apply_pca(t, &seq),
                None => Ok(seq),
            },
            PcaStage::BeforeDynamics => {
                let rotated = match pca {
                    Some(t) => apply_pca(t, &seq)?,
                    None => seq,
                };
                Ok(append_dynamics(&rotated, self.mfcc.delta_window))
            }
        }
    }

    pub fn extract(
        &self,
        signal: &MonoSignal,
        pca: Option<&PcaTransform>,
    ) -> Result<FeatureSequence, FeatureError> {
        self.finish(self.pca_input(signal)?, pca)
    }
}
