//! Acoustic gait recognition: identify walking subjects from the sound of
//! their footsteps.
//!
//! The pipeline mirrors a small whole-word speech recognizer in which every
//! subject is one "word":
//!
//! * [`audio`] loads PCM WAV recordings and averages channels to mono.
//! * [`features`] turns mono audio into 39-dimensional MFCC + delta +
//!   acceleration vectors, optionally rotated by an enrollment-fitted PCA.
//! * [`hmm`] holds single-Gaussian left-right HMMs with an optional
//!   last-to-first "step" edge, flat-start initialization, embedded
//!   Baum-Welch re-estimation with known step counts and grammar-constrained
//!   Viterbi decoding.
//! * [`recognizer`] enrolls one model per subject and performs closed-set
//!   identification, reporting the number of detected steps.
//! * [`eval`] runs the enrollment/identification protocol from a manifest
//!   and reports per-condition accuracy and paired significance tests.
//! * [`synth`] generates deterministic synthetic walking corpora.

pub mod audio;
pub mod eval;
pub mod features;
pub mod hmm;
pub mod recognizer;
pub mod synth;

mod logmath;
mod serde_ext;

pub use audio::{downmix, load_wav, AudioClip, AudioError, MonoSignal};
pub use eval::{
    load_manifest, run_protocol, significance_test, Condition, EvalError, EvaluationReport,
    Manifest, ManifestEntry, Role, Split,
};
pub use features::{
    append_dynamics, apply_pca, compute_mfcc, fit_pca, FeatureError, FeaturePipeline,
    FeatureSequence, MfccConfig, PcaStage, PcaTransform,
};
pub use hmm::{
    embedded_reestimate, flat_start, log_likelihood, viterbi, DecodeGrammar, DecodeResult,
    GaussianHmm, HmmConfig, HmmError, Topology,
};
pub use recognizer::{
    detected_steps, enroll, identify, IdentificationResult, RecognizerError, SubjectModelSet,
    TrainedModel,
};
pub use synth::{generate_corpus, SubjectProfile, SynthConfig, SynthError, TakeCounts};

/// Failure in one stage of the signal-to-model pipeline.
#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Hmm(#[from] HmmError),
}
