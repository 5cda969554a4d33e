//! Settings file and its merge with command-line flags.
//!
//! ```toml
//! version = 1
//! jobs = 4
//!
//! [features]
//! pca = true
//! pca_stage = "after_dynamics"
//! [features.mfcc]
//! num_cepstra = 13
//!
//! [hmm]
//! num_states = 15
//! topology = "cyclic"
//!
//! [decode]
//! grammar = "multi_step"
//!
//! [synth]
//! num_subjects = 10
//! ```

use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use gaitwalk::{DecodeGrammar, FeaturePipeline, HmmConfig, SynthConfig};
use serde::Deserialize;

use crate::args::{SynthArgs, TrainArgs};
use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeSection {
    pub grammar: DecodeGrammar,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub version: u32,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub features: FeaturePipeline,
    #[serde(default)]
    pub hmm: HmmConfig,
    #[serde(default)]
    pub decode: DecodeSection,
    #[serde(default)]
    pub synth: SynthConfig,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            jobs: None,
            features: FeaturePipeline::default(),
            hmm: HmmConfig::default(),
            decode: DecodeSection::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.version != CONFIG_VERSION {
            return Err(format!("unsupported version {} (expected {CONFIG_VERSION})", cfg.version));
        }
        Ok(cfg)
    }
}

/// True when the flag with this id was typed on the command line.
pub fn given(m: &ArgMatches, id: &str) -> bool {
    m.try_get_raw(id).is_ok() && m.value_source(id) == Some(ValueSource::CommandLine)
}

pub fn merge_train(m: &ArgMatches, a: &TrainArgs, features: &mut FeaturePipeline, hmm: &mut HmmConfig) {
    if given(m, "states") {
        hmm.num_states = a.states;
    }
    if given(m, "iterations") {
        hmm.training_iterations = a.iterations;
    }
    if given(m, "topology") {
        hmm.topology = a.topology.into();
    }
    if given(m, "variance_floor") {
        hmm.variance_floor_factor = a.variance_floor;
    }
    if given(m, "min_transition") {
        hmm.min_self_loop = a.min_transition;
    }
    if given(m, "no_pca") {
        features.pca = !a.no_pca;
    }
    if given(m, "pca_stage") {
        features.pca_stage = a.pca_stage.into();
    }
}

pub fn merge_synth(m: &ArgMatches, a: &SynthArgs, synth: &mut SynthConfig) {
    if given(m, "subjects") {
        synth.num_subjects = a.subjects;
    }
    if given(m, "seed") {
        synth.seed = a.seed;
    }
    if given(m, "snr_db") {
        synth.snr_db = a.snr_db;
    }
    if given(m, "steps") {
        synth.steps_per_recording = a.steps;
    }
    if given(m, "n_takes") {
        synth.takes.n = a.n_takes;
    }
    if given(m, "b_takes") {
        synth.takes.b = a.b_takes;
    }
    if given(m, "s_takes") {
        synth.takes.s = a.s_takes;
    }
    if given(m, "enrollment_takes") {
        synth.enrollment_takes = a.enrollment_takes;
    }
    if given(m, "sample_rate") {
        synth.sample_rate = a.sample_rate;
    }
}
