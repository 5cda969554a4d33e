use std::fmt::Write as _;
use std::path::Path;

use clap::ArgMatches;
use gaitwalk::eval::{evaluate, train_from_manifest, Role};
use gaitwalk::{
    downmix, generate_corpus, identify, load_manifest, load_wav, significance_test, Condition, DecodeGrammar,
    EvaluationReport, FeaturePipeline, HmmConfig, MonoSignal, SubjectModelSet, Topology,
};

use crate::args::{EnrollArgs, EvaluateArgs, FeaturesArgs, IdentifyArgs, SynthArgs, TRAIN_FLAGS};
use crate::config::{given, merge_synth, merge_train, CliConfig};
use crate::error::CliError;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn read_signal(path: &Path) -> Result<MonoSignal, CliError> {
    Ok(downmix(&load_wav(path)?))
}

pub fn synth(cfg: &CliConfig, m: &ArgMatches, a: &SynthArgs) -> Result<String, CliError> {
    let mut synth = cfg.synth.clone();
    merge_synth(m, a, &mut synth);
    let manifest = generate_corpus(&synth, &a.out)?;
    let counts = manifest.role_counts();
    let get = |r| counts.get(&r).copied().unwrap_or(0);
    Ok(format!(
        "wrote {} recordings for {} subjects ({} enrollment, {} identification)\nmanifest: {}\n",
        manifest.entries.len(),
        synth.num_subjects,
        get(Role::Enrollment),
        get(Role::Identification),
        a.out.join("manifest.csv").display()
    ))
}

fn training_settings(cfg: &CliConfig, m: &ArgMatches, a: &crate::args::TrainArgs) -> (FeaturePipeline, HmmConfig) {
    let mut features = cfg.features.clone();
    let mut hmm = cfg.hmm.clone();
    merge_train(m, a, &mut features, &mut hmm);
    (features, hmm)
}

pub fn enroll(cfg: &CliConfig, m: &ArgMatches, a: &EnrollArgs) -> Result<String, CliError> {
    let (features, hmm) = training_settings(cfg, m, &a.train);
    let manifest = load_manifest(&a.manifest)?;
    let (set, trained) = train_from_manifest(&manifest, &features, &hmm)?;
    set.save(&a.out)?;
    let mut out = String::new();
    for (id, t) in &trained {
        let _ = writeln!(out, "{id}\tfinal log-likelihood {:.3}", t.final_log_likelihood());
    }
    let _ = writeln!(out, "models: {}", a.out.display());
    Ok(out)
}

fn describe(features: &FeaturePipeline, hmm: &HmmConfig, grammar: DecodeGrammar) -> String {
    let topology = match hmm.topology {
        Topology::Linear => "linear",
        Topology::Cyclic => "cyclic",
    };
    let grammar = match grammar {
        DecodeGrammar::SinglePass => "single",
        DecodeGrammar::MultiStep => "multi",
    };
    let pca = if features.pca { "pca" } else { "no-pca" };
    format!("{topology}/{grammar}/{pca}")
}

pub fn evaluate_cmd(cfg: &CliConfig, m: &ArgMatches, a: &EvaluateArgs) -> Result<String, CliError> {
    let grammar = if given(m, "grammar") { a.grammar.into() } else { cfg.decode.grammar };
    let manifest = load_manifest(&a.manifest)?;
    let set = match &a.models {
        Some(dir) => {
            if let Some(flag) = TRAIN_FLAGS.iter().find(|f| given(m, f)) {
                return Err(CliError::usage(format!(
                    "--{} only applies when training from the manifest; drop it or drop --models",
                    flag.replace('_', "-")
                )));
            }
            SubjectModelSet::load(dir)?
        }
        None => {
            let (features, hmm) = training_settings(cfg, m, &a.train);
            train_from_manifest(&manifest, &features, &hmm)?.0
        }
    };
    let report = evaluate(&manifest, &set, grammar)?;
    let label = a.label.clone().unwrap_or_else(|| describe(set.pipeline(), set.hmm_config(), grammar));
    let table = report.to_table(&label);
    std::fs::create_dir_all(&a.out).map_err(|e| CliError::usage(format!("cannot create {}: {e}", a.out.display())))?;
    write_file(&a.out.join("report.json"), &report.to_json())?;
    write_file(&a.out.join("table.txt"), &table)?;

    let mut out = table;
    if let Some(path) = &a.baseline {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        let baseline = EvaluationReport::from_json(&text)?;
        for c in Condition::ALL {
            if report.counts.contains_key(&c) {
                let p = significance_test(&baseline, &report, c)?;
                let _ = writeln!(out, "p-value vs baseline, {c}: {p:.4}");
            }
        }
    }
    let _ = writeln!(out, "report: {}", a.out.join("report.json").display());
    Ok(out)
}

pub fn identify_cmd(cfg: &CliConfig, m: &ArgMatches, a: &IdentifyArgs) -> Result<String, CliError> {
    let grammar = if given(m, "grammar") { a.grammar.into() } else { cfg.decode.grammar };
    let set = SubjectModelSet::load(&a.models)?;
    let signal = read_signal(&a.wav)?;
    let r = identify(&set, &signal, grammar)?;
    let mut out = String::new();
    for (rank, (id, score)) in r.ranked.iter().take(a.top).enumerate() {
        let _ = writeln!(out, "{:>3}  {id}  {score:.3}", rank + 1);
    }
    let shift = set.pipeline().mfcc.frame_shift;
    let boundaries: Vec<String> =
        r.decode.step_boundaries.iter().map(|&t| format!("{:.2}", t as f64 * shift)).collect();
    let _ = writeln!(out, "predicted: {}", r.predicted);
    let _ = writeln!(out, "log-likelihood: {:.3}", r.decode.log_likelihood);
    let _ = writeln!(out, "steps: {}", r.decode.step_count);
    let _ = writeln!(out, "step boundaries (s): {}", boundaries.join(" "));
    Ok(out)
}

pub fn features(cfg: &CliConfig, a: &FeaturesArgs) -> Result<String, CliError> {
    let signal = read_signal(&a.wav)?;
    let seq = match &a.models {
        Some(dir) => {
            let set = SubjectModelSet::load(dir)?;
            let pca = if a.no_pca { None } else { set.pca() };
            set.pipeline().extract(&signal, pca)?
        }
        None => cfg.features.extract(&signal, None)?,
    };
    let json = seq.to_json();
    match &a.out {
        Some(path) => {
            write_file(path, &json)?;
            Ok(format!("{} frames of dimension {} written to {}\n", seq.num_frames(), seq.dim(), path.display()))
        }
        None => Ok(json),
    }
}
