use std::fmt;

use gaitwalk::eval::EvalError;
use gaitwalk::{HmmError, PipelineError, RecognizerError};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

/// A failed command: message plus process exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

// Bad inputs (files, manifests, settings, recordings too short for a model)
// are usage errors; only numerical breakdown inside the models is a runtime
// failure.
fn hmm_code(e: &HmmError) -> u8 {
    match e {
        HmmError::NumericalUnderflow => EXIT_RUNTIME,
        _ => EXIT_USAGE,
    }
}

fn recognizer_code(e: &RecognizerError) -> u8 {
    match e {
        RecognizerError::Hmm(h) | RecognizerError::Subject { source: PipelineError::Hmm(h), .. } => hmm_code(h),
        _ => EXIT_USAGE,
    }
}

fn eval_code(e: &EvalError) -> u8 {
    match e {
        EvalError::Entry { source, .. } => recognizer_code(source),
        EvalError::Recognizer(r) => recognizer_code(r),
        _ => EXIT_USAGE,
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        Self { code: eval_code(&e), message: e.to_string() }
    }
}

impl From<RecognizerError> for CliError {
    fn from(e: RecognizerError) -> Self {
        Self { code: recognizer_code(&e), message: e.to_string() }
    }
}

impl From<HmmError> for CliError {
    fn from(e: HmmError) -> Self {
        Self { code: hmm_code(&e), message: e.to_string() }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Self::usage(e.to_string())
            }
        }
    )*};
}

usage_from!(gaitwalk::AudioError, gaitwalk::FeatureError, gaitwalk::SynthError);
