use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use gaitwalk::audio::write_wav_pcm16;
use gaitwalk::{EvaluationReport, MonoSignal};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaitwalk"));
    c.env_remove("GAITWALK_CONFIG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Three-subject corpus with trained models, shared by the read-only tests.
struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    models: PathBuf,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        let models = dir.path().join("models");
        let o = run(&[
            "synth", "--subjects", "3", "--seed", "5", "--n-takes", "4", "--enrollment-takes", "3", "--b-takes", "1",
            "--s-takes", "1", "--out", p(&corpus),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let o = run(&["enroll", "--manifest", p(&corpus.join("manifest.csv")), "--out", p(&models)]);
        assert!(o.status.success(), "{}", stderr(&o));
        Fixture { _dir: dir, corpus, models }
    })
}

#[test]
fn synth_prints_manifest_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = run(&["synth", "--subjects", "2", "--n-takes", "2", "--enrollment-takes", "1", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains(&format!("manifest: {}", out.join("manifest.csv").display())), "{text}");
    assert!(text.contains("wrote 12 recordings for 2 subjects (2 enrollment, 10 identification)"), "{text}");
    assert!(out.join("s02/S2.wav").exists());
}

#[test]
fn synth_rejects_zero_subjects() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--subjects", "0", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("num_subjects"), "{}", stderr(&o));
}

#[test]
fn synth_reports_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&["synth", "--subjects", "1", "--out", p(&blocker.join("corpus"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("I/O error"), "{}", stderr(&o));
}

#[test]
fn enroll_writes_one_file_per_subject_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    let o = run(&["synth", "--subjects", "2", "--n-takes", "3", "--enrollment-takes", "2", "--out", p(&corpus)]);
    assert!(o.status.success());
    let manifest = corpus.join("manifest.csv");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&["enroll", "--manifest", p(&manifest), "--out", p(&a), "--jobs", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("s01\tfinal log-likelihood"));
    let o = run(&["enroll", "--manifest", p(&manifest), "--out", p(&b), "--jobs", "3"]);
    assert!(o.status.success());

    let mut names: Vec<String> =
        std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["manifest.json", "subject_s01.json", "subject_s02.json"]);
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap(), "{n} differs");
    }
}

#[test]
fn enroll_requires_step_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "subject_id,condition,take,role,path,step_count\ns01,N,1,enrollment,s01/N1.wav,\n").unwrap();
    let o = run(&["enroll", "--manifest", p(&manifest), "--out", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step_count"), "{}", stderr(&o));
}

#[test]
fn evaluate_writes_table_and_report() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "evaluate", "--manifest", p(&f.corpus.join("manifest.csv")), "--models", p(&f.models), "--out", p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    for col in ["N", "B", "S", "average"] {
        assert!(header.split_whitespace().any(|w| w == col), "{header}");
    }
    assert!(text.contains("cyclic/multi/pca"));
    assert_eq!(std::fs::read_to_string(dir.path().join("table.txt")).unwrap(), text.lines().take(2).collect::<Vec<_>>().join("\n") + "\n");

    let report = EvaluationReport::from_json(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let again = EvaluationReport::from_outcomes(report.grammar, report.per_recording.clone());
    assert_eq!(again.per_condition_accuracy, report.per_condition_accuracy);
    assert_eq!(again.average, report.average);
}

#[test]
fn evaluate_basic_configuration_trains_from_manifest() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full");
    let o = run(&[
        "evaluate", "--manifest", p(&f.corpus.join("manifest.csv")), "--models", p(&f.models), "--out", p(&full),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "evaluate",
        "--manifest",
        p(&f.corpus.join("manifest.csv")),
        "--topology",
        "linear",
        "--grammar",
        "single",
        "--no-pca",
        "--label",
        "basic HMM",
        "--baseline",
        p(&full.join("report.json")),
        "--out",
        p(&dir.path().join("basic")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("basic HMM"), "{text}");
    assert!(text.contains("p-value vs baseline, N:"), "{text}");
    let report =
        EvaluationReport::from_json(&std::fs::read_to_string(dir.path().join("basic/report.json")).unwrap()).unwrap();
    assert_eq!(report.grammar, gaitwalk::DecodeGrammar::SinglePass);
}

#[test]
fn evaluate_rejects_training_flags_with_models() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "evaluate", "--manifest", p(&f.corpus.join("manifest.csv")), "--models", p(&f.models), "--states", "4",
        "--out", p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--states"));
}

#[test]
fn identify_names_the_walker() {
    let f = fixture();
    let o = run(&["identify", "--models", p(&f.models), "--wav", p(&f.corpus.join("s02/N4.wav"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("predicted: s02"), "{text}");
    let first = text.lines().next().unwrap();
    assert!(first.split_whitespace().collect::<Vec<_>>()[..2] == ["1", "s02"], "{first}");
    assert!(text.contains("steps: "));
}

#[test]
fn identify_top_limits_ranked_lines() {
    let f = fixture();
    for (top, lines) in [("3", 3), ("1", 1), ("9", 3)] {
        let o = run(&["identify", "--models", p(&f.models), "--wav", p(&f.corpus.join("s01/N4.wav")), "--top", top]);
        assert!(o.status.success());
        let ranked = stdout(&o).lines().filter(|l| l.trim_start().starts_with(|c: char| c.is_ascii_digit())).count();
        assert_eq!(ranked, lines);
    }
}

#[test]
fn identify_short_recording_single_pass_has_no_path() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("short.wav");
    let samples: Vec<f64> = (0..1600).map(|i| 0.1 * (i as f64 * 0.3).sin()).collect();
    write_wav_pcm16(&wav, &MonoSignal::new(samples, 16000)).unwrap();
    let o = run(&["identify", "--models", p(&f.models), "--wav", p(&wav), "--grammar", "single"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no enrolled subject admits a valid path"), "{}", stderr(&o));
}

#[test]
fn features_dump_is_json() {
    let f = fixture();
    let wav = f.corpus.join("s01/N1.wav");
    let o = run(&["features", "--wav", p(&wav)]);
    assert!(o.status.success());
    let seq = gaitwalk::FeatureSequence::from_json(&stdout(&o)).unwrap();
    assert_eq!(seq.dim(), 39);
    let o = run(&["features", "--wav", p(&wav), "--models", p(&f.models)]);
    let rotated = gaitwalk::FeatureSequence::from_json(&stdout(&o)).unwrap();
    assert_eq!(rotated.num_frames(), seq.num_frames());
    assert_ne!(rotated, seq);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gw.toml");
    std::fs::write(&cfg, "version = 1\n[synth]\nnum_subjects = 2\nseed = 9\n[synth.takes]\nn = 2\nb = 1\ns = 1\n").unwrap();

    let a = dir.path().join("a");
    let o = run(&["--config", p(&cfg), "synth", "--enrollment-takes", "1", "--out", p(&a)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("for 2 subjects"));

    let b = dir.path().join("b");
    let o = bin()
        .env("GAITWALK_CONFIG", &cfg)
        .args(["synth", "--subjects", "3", "--enrollment-takes", "1", "--out", p(&b)])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("wrote 12 recordings for 3 subjects"), "{}", stdout(&o));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gw.toml");
    std::fs::write(&cfg, "version = 1\n[hmm]\nstate_count = 3\n").unwrap();
    let o = run(&["--config", p(&cfg), "synth", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("state_count"), "{}", stderr(&o));
}

#[test]
fn help_shows_pinned_defaults() {
    let o = run(&["enroll", "--help"]);
    let text = stdout(&o);
    for flag in ["--states", "--iterations", "--topology", "--no-pca", "--pca-stage", "--jobs", "--config"] {
        assert!(text.contains(flag), "{flag} missing");
    }
    let compact = text.split_whitespace().collect::<Vec<_>>().join(" ");
    assert!(compact.contains("HMM states per model [default: 15]"), "{compact}");
    assert!(compact.contains("[default: 6]"));
    assert!(compact.contains("[default: cyclic]"));
    let o = run(&["evaluate", "--help"]);
    assert!(stdout(&o).split_whitespace().collect::<Vec<_>>().join(" ").contains("[default: multi]"));
}
