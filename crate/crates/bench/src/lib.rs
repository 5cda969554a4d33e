//! Fixtures shared by the benchmarks.

use gaitwalk::eval::Condition;
use gaitwalk::synth::generate_recording;
use gaitwalk::{FeaturePipeline, FeatureSequence, GaussianHmm, HmmConfig, MonoSignal, SubjectProfile, SynthConfig};

/// Default-corpus recordings of one subject, normal walking.
pub fn recordings(takes: u32) -> Vec<MonoSignal> {
    let cfg = SynthConfig::default();
    let profile = SubjectProfile::new(&cfg, "s01");
    (1..=takes).map(|t| generate_recording(&cfg, &profile, Condition::N, t).0).collect()
}

/// Unrotated 39-dimensional features of `recordings(takes)`.
pub fn features(takes: u32) -> Vec<FeatureSequence> {
    let pipeline = FeaturePipeline { pca: false, ..FeaturePipeline::default() };
    recordings(takes).iter().map(|s| pipeline.extract(s, None).expect("features")).collect()
}

/// Flat-started default model on `features(takes)` with five steps each.
pub fn model(seqs: &[FeatureSequence]) -> GaussianHmm {
    let ks = vec![5; seqs.len()];
    gaitwalk::flat_start(seqs, &ks, &HmmConfig::default()).expect("flat start")
}
