//! Closed-set identification: one HMM per enrolled subject, every test
//! recording scored against all of them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::MonoSignal;
use crate::features::{fit_pca, FeatureError, FeaturePipeline, FeatureSequence, PcaTransform};
use crate::hmm::{
    embedded_reestimate, flat_start, training_log_likelihood, viterbi, DecodeGrammar, DecodeResult, GaussianHmm,
    HmmConfig, HmmError,
};
use crate::PipelineError;

#[derive(Debug, thiserror::Error)]
pub enum RecognizerError {
    #[error("subject {subject_id}: {source}")]
    Subject {
        subject_id: String,
        #[source]
        source: PipelineError,
    },
    #[error("model set is empty")]
    EmptyModelSet,
    #[error("no enrolled subject admits a valid path for this recording")]
    AllPathsInvalid,
    #[error("incompatible model set: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Audio(#[from] crate::audio::AudioError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error("invalid model directory: {0}")]
    Format(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RecognizerError {
    fn subject(id: &str, source: impl Into<PipelineError>) -> Self {
        RecognizerError::Subject { subject_id: id.to_string(), source: source.into() }
    }
}

/// A model together with its training log-likelihood trace.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub model: GaussianHmm,
    /// Total training log-likelihood under the flat-start model, after each
    /// re-estimation round (last entry = final model).
    pub log_likelihoods: Vec<f64>,
}

impl TrainedModel {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihoods.last().expect("trace holds the flat-start value")
    }
}

/// Trains one subject model from already-extracted features.
pub fn enroll_features(
    features: &[FeatureSequence],
    step_counts: &[usize],
    subject_id: &str,
    config: &HmmConfig,
) -> Result<TrainedModel, RecognizerError> {
    let wrap = |e: HmmError| RecognizerError::subject(subject_id, e);
    // A linear chain covers the whole recording in one pass.
    let counts: Vec<usize> =
        if config.topology.is_cyclic() { step_counts.to_vec() } else { vec![1; step_counts.len()] };
    let mut model = flat_start(features, &counts, config).map_err(wrap)?;
    model.set_subject_id(subject_id);
    let mut log_likelihoods = Vec::with_capacity(config.training_iterations + 1);
    for _ in 0..config.training_iterations {
        let (next, ll) = embedded_reestimate(&model, features, &counts, config).map_err(wrap)?;
        log_likelihoods.push(ll);
        model = next;
    }
    log_likelihoods.push(training_log_likelihood(&model, features, &counts).map_err(wrap)?);
    Ok(TrainedModel { model, log_likelihoods })
}

/// Extracts features (rotating with `pca` when given), then flat-starts and
/// re-estimates a model for one subject.
pub fn enroll(
    recordings: &[(MonoSignal, usize)],
    subject_id: &str,
    pipeline: &FeaturePipeline,
    config: &HmmConfig,
    pca: Option<&PcaTransform>,
) -> Result<TrainedModel, RecognizerError> {
    let features = recordings
        .iter()
        .map(|(sig, _)| pipeline.extract(sig, pca))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RecognizerError::subject(subject_id, e))?;
    let counts: Vec<usize> = recordings.iter().map(|(_, k)| *k).collect();
    enroll_features(&features, &counts, subject_id, config)
}

/// Enrolled models plus everything needed to featurize a test recording.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectModelSet {
    models: BTreeMap<String, GaussianHmm>,
    pca: Option<PcaTransform>,
    pipeline: FeaturePipeline,
    hmm_config: HmmConfig,
}

impl SubjectModelSet {
    pub fn new(pipeline: FeaturePipeline, hmm_config: HmmConfig, pca: Option<PcaTransform>) -> Result<Self, RecognizerError> {
        if pipeline.pca != pca.is_some() {
            return Err(RecognizerError::Incompatible("PCA flag and transform presence disagree".into()));
        }
        Ok(Self { models: BTreeMap::new(), pca, pipeline, hmm_config })
    }

    /// Fits the enrollment PCA (when the pipeline asks for one) on all
    /// subjects' recordings pooled, then trains every subject.
    pub fn train(
        enrollment: &BTreeMap<String, Vec<(MonoSignal, usize)>>,
        pipeline: &FeaturePipeline,
        hmm_config: &HmmConfig,
    ) -> Result<(Self, BTreeMap<String, TrainedModel>), RecognizerError> {
        hmm_config.validate()?;
        let staged: Vec<(&String, Vec<FeatureSequence>, Vec<usize>)> = enrollment
            .par_iter()
            .map(|(id, recs)| {
                let feats = recs
                    .iter()
                    .map(|(sig, _)| pipeline.pca_input(sig))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| RecognizerError::subject(id, e))?;
                Ok((id, feats, recs.iter().map(|(_, k)| *k).collect()))
            })
            .collect::<Result<_, RecognizerError>>()?;
        let pca = if pipeline.pca {
            let pooled: Vec<FeatureSequence> = staged.iter().flat_map(|(_, f, _)| f.iter().cloned()).collect();
            Some(fit_pca(&pooled)?)
        } else {
            None
        };
        let trained: Vec<(String, TrainedModel)> = staged
            .into_par_iter()
            .map(|(id, feats, counts)| {
                let feats = feats
                    .into_iter()
                    .map(|f| pipeline.finish(f, pca.as_ref()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| RecognizerError::subject(id, e))?;
                Ok((id.clone(), enroll_features(&feats, &counts, id, hmm_config)?))
            })
            .collect::<Result<_, RecognizerError>>()?;
        let mut set = Self::new(pipeline.clone(), hmm_config.clone(), pca)?;
        for (_, t) in &trained {
            set.insert(t.model.clone())?;
        }
        Ok((set, trained.into_iter().collect()))
    }

    /// Adds a model; all models must agree in state count, dimension and
    /// topology, and match the feature pipeline's output dimension.
    pub fn insert(&mut self, model: GaussianHmm) -> Result<(), RecognizerError> {
        let dim = self.pipeline.output_dim();
        if model.dim() != dim {
            return Err(RecognizerError::Incompatible(format!(
                "model {} has dimension {}, features have {dim}",
                model.subject_id(),
                model.dim()
            )));
        }
        if model.num_states() != self.hmm_config.num_states || model.topology() != self.hmm_config.topology {
            return Err(RecognizerError::Incompatible(format!(
                "model {} disagrees with the set's state count or topology",
                model.subject_id()
            )));
        }
        self.models.insert(model.subject_id().to_string(), model);
        Ok(())
    }

    pub fn models(&self) -> &BTreeMap<String, GaussianHmm> {
        &self.models
    }

    pub fn pca(&self) -> Option<&PcaTransform> {
        self.pca.as_ref()
    }

    pub fn pipeline(&self) -> &FeaturePipeline {
        &self.pipeline
    }

    pub fn hmm_config(&self) -> &HmmConfig {
        &self.hmm_config
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn features(&self, signal: &MonoSignal) -> Result<FeatureSequence, FeatureError> {
        self.pipeline.extract(signal, self.pca.as_ref())
    }

    fn model_file(subject_id: &str) -> String {
        format!("subject_{subject_id}.json")
    }

    /// Writes `manifest.json` and one `subject_<id>.json` per model.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), RecognizerError> {
        let dir = dir.as_ref();
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| RecognizerError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        for id in self.models.keys() {
            if !valid_subject_id(id) {
                return Err(RecognizerError::Format(format!("subject id {id:?} is not file-name safe")));
            }
        }
        let doc = SetDoc {
            version: 1,
            features: self.pipeline.clone(),
            hmm: self.hmm_config.clone(),
            subjects: self.models.keys().cloned().collect(),
            pca: self.pca.clone(),
        };
        let manifest = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&doc).map_err(|e| RecognizerError::Format(e.to_string()))?;
        fs::write(&manifest, text + "\n").map_err(io(&manifest))?;
        for (id, model) in &self.models {
            let path = dir.join(Self::model_file(id));
            fs::write(&path, model.to_json() + "\n").map_err(io(&path))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, RecognizerError> {
        let dir = dir.as_ref();
        let read = |path: PathBuf| fs::read_to_string(&path).map_err(|source| RecognizerError::Io { path, source });
        let doc: SetDoc = serde_json::from_str(&read(dir.join("manifest.json"))?)
            .map_err(|e| RecognizerError::Format(format!("manifest.json: {e}")))?;
        if doc.version != 1 {
            return Err(RecognizerError::Format(format!("unsupported version {}", doc.version)));
        }
        doc.features.mfcc.validate()?;
        doc.hmm.validate()?;
        if let Some(p) = &doc.pca {
            if p.dim() != doc.features.output_dim() && doc.features.pca_stage == crate::PcaStage::AfterDynamics {
                return Err(RecognizerError::Incompatible("PCA dimension differs from feature dimension".into()));
            }
        }
        let mut set = Self::new(doc.features, doc.hmm, doc.pca)?;
        for id in &doc.subjects {
            let model = GaussianHmm::from_json(&read(dir.join(Self::model_file(id)))?)
                .map_err(|e| RecognizerError::subject(id, e))?;
            if model.subject_id() != id {
                return Err(RecognizerError::Format(format!("model file for {id} names {}", model.subject_id())));
            }
            set.insert(model)?;
        }
        Ok(set)
    }
}

pub(crate) fn valid_subject_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.')) && id != "." && id != ".."
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDoc {
    version: u32,
    features: FeaturePipeline,
    hmm: HmmConfig,
    subjects: Vec<String>,
    pca: Option<PcaTransform>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    /// Subjects by descending score; subjects without a valid path score
    /// `-inf` and come last. Ties go to the lower id.
    pub ranked: Vec<(String, f64)>,
    pub predicted: String,
    /// Decode of the winning model only.
    pub decode: DecodeResult,
}

/// Scores already-extracted features against every model.
pub fn identify_features(
    set: &SubjectModelSet,
    features: &FeatureSequence,
    grammar: DecodeGrammar,
) -> Result<IdentificationResult, RecognizerError> {
    if set.is_empty() {
        return Err(RecognizerError::EmptyModelSet);
    }
    let models: Vec<&GaussianHmm> = set.models.values().collect();
    let scored: Vec<(String, Option<DecodeResult>)> = models
        .par_iter()
        .map(|m| match viterbi(m, features, grammar) {
            Ok(d) => Ok((m.subject_id().to_string(), Some(d))),
            Err(HmmError::NoValidPath { .. }) => Ok((m.subject_id().to_string(), None)),
            Err(e) => Err(RecognizerError::subject(m.subject_id(), e)),
        })
        .collect::<Result<_, _>>()?;

    let mut order: Vec<usize> = (0..scored.len()).collect();
    let score = |i: usize| scored[i].1.as_ref().map_or(f64::NEG_INFINITY, |d| d.log_likelihood);
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then_with(|| scored[a].0.cmp(&scored[b].0)));
    let winner = order[0];
    let decode = scored[winner].1.clone().ok_or(RecognizerError::AllPathsInvalid)?;
    Ok(IdentificationResult {
        ranked: order.iter().map(|&i| (scored[i].0.clone(), score(i))).collect(),
        predicted: scored[winner].0.clone(),
        decode,
    })
}

/// Extracts features with the set's pipeline and identifies the speaker of
/// the footsteps.
pub fn identify(
    set: &SubjectModelSet,
    recording: &MonoSignal,
    grammar: DecodeGrammar,
) -> Result<IdentificationResult, RecognizerError> {
    if set.is_empty() {
        return Err(RecognizerError::EmptyModelSet);
    }
    identify_features(set, &set.features(recording)?, grammar)
}

/// Number of steps found by the winning model's decode.
pub fn detected_steps(result: &IdentificationResult) -> usize {
    result.decode.step_count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::Topology;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn tiny_set(ids: &[&str], means: &[f64]) -> SubjectModelSet {
        let pipeline = FeaturePipeline { pca: false, mfcc: crate::MfccConfig { num_cepstra: 1, num_mel_filters: 4, ..Default::default() }, ..Default::default() };
        let cfg = HmmConfig { num_states: 2, ..Default::default() };
        let mut set = SubjectModelSet::new(pipeline, cfg, None).unwrap();
        for (id, &mu) in ids.iter().zip(means) {
            let m = GaussianHmm::from_parts(
                *id,
                Topology::Cyclic,
                vec![vec![0.7, 0.3], vec![0.3, 0.7]],
                vec![vec![mu, mu + 1.0, mu + 2.0], vec![mu + 5.0, mu, mu]],
                vec![vec![1.0; 3]; 2],
            )
            .unwrap();
            set.insert(m).unwrap();
        }
        set
    }

    fn sample(m: &GaussianHmm, path: &[usize], seed: u64) -> FeatureSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames: Vec<Vec<f64>> = path
            .iter()
            .map(|&s| {
                (0..m.dim())
                    .map(|d| Normal::new(m.means()[s][d], m.variances()[s][d].sqrt()).unwrap().sample(&mut rng))
                    .collect()
            })
            .collect();
        FeatureSequence::from_frames(&frames, 0.01).unwrap()
    }

    #[test]
    fn sample_from_model_is_identified() {
        let set = tiny_set(&["A", "B"], &[0.0, 40.0]);
        let path = [0, 0, 1, 1, 0, 0, 1, 1, 1, 0];
        let seq = sample(&set.models()["A"], &path, 3);
        let r = identify_features(&set, &seq, DecodeGrammar::MultiStep).unwrap();
        assert_eq!(r.predicted, "A");
        assert_eq!(r.ranked.len(), 2);
        assert!(r.ranked[0].1 > r.ranked[1].1);
        assert_eq!(detected_steps(&r), r.decode.step_count);
    }

    #[test]
    fn exact_tie_goes_to_lower_id() {
        let set = tiny_set(&["zed", "amy"], &[0.0, 0.0]);
        let seq = sample(&set.models()["amy"], &[0, 1, 1], 1);
        let r = identify_features(&set, &seq, DecodeGrammar::MultiStep).unwrap();
        assert_eq!(r.ranked[0].1, r.ranked[1].1);
        assert_eq!(r.predicted, "amy");
    }

    #[test]
    fn empty_set_and_invalid_paths() {
        let empty = tiny_set(&[], &[]);
        let seq = FeatureSequence::from_frames(&[vec![0.0; 3]], 0.01).unwrap();
        assert!(matches!(identify_features(&empty, &seq, DecodeGrammar::MultiStep), Err(RecognizerError::EmptyModelSet)));
        let set = tiny_set(&["A"], &[0.0]);
        assert!(matches!(identify_features(&set, &seq, DecodeGrammar::SinglePass), Err(RecognizerError::AllPathsInvalid)));
        let single = identify_features(&set, &seq, DecodeGrammar::MultiStep).unwrap();
        assert_eq!(detected_steps(&single), 1);
    }

    #[test]
    fn insertion_order_does_not_matter() {
        let a = tiny_set(&["A", "B", "C"], &[0.0, 3.0, 6.0]);
        let b = tiny_set(&["C", "A", "B"], &[6.0, 0.0, 3.0]);
        let seq = sample(&a.models()["B"], &[0, 1, 0, 1, 1], 8);
        let ra = identify_features(&a, &seq, DecodeGrammar::MultiStep).unwrap();
        let rb = identify_features(&b, &seq, DecodeGrammar::MultiStep).unwrap();
        assert_eq!(ra, rb);
    }

    #[test]
    fn subject_ids_must_be_file_safe() {
        assert!(valid_subject_id("s01"));
        assert!(valid_subject_id("p-7.b"));
        assert!(!valid_subject_id("../x"));
        assert!(!valid_subject_id(""));
    }
}
