//! Manifest-driven enrollment/identification protocol, per-condition
//! accuracy and paired significance testing.
//!
//! The manifest is a UTF-8 CSV with header
//! `subject_id,condition,take,role,path,step_count` and an optional trailing
//! `split` column (`development` or `test`, constant across rows). Paths are
//! relative to the manifest's directory. Enrollment rows must be condition
//! `N` and carry a step count.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::audio::{downmix, load_wav, MonoSignal};
use crate::features::FeaturePipeline;
use crate::hmm::{DecodeGrammar, HmmConfig};
use crate::recognizer::{identify, valid_subject_id, RecognizerError, SubjectModelSet, TrainedModel};

pub const MANIFEST_HEADER: [&str; 6] = ["subject_id", "condition", "take", "role", "path", "step_count"];

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("manifest line {line}, field `{field}`: {message}")]
    Schema { line: u64, field: String, message: String },
    #[error("manifest line {line}: enrollment row has no step_count")]
    MissingStepCount { line: u64 },
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{entry}: {source}")]
    Entry {
        entry: String,
        #[source]
        source: Box<RecognizerError>,
    },
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
    #[error("subject {0} has identification rows but no enrolled model")]
    NotClosedSet(String),
    #[error("no {0} rows in manifest")]
    NoRows(&'static str),
    #[error("reports cover different recordings for condition {0}")]
    MismatchedRecordingSets(Condition),
    #[error("paired t-test needs at least two recordings, got {0}")]
    InsufficientData(usize),
    #[error("invalid report: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Normal walking.
    N,
    /// Backpack.
    B,
    /// Shoe covers.
    S,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::N, Condition::B, Condition::S];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::N => "N",
            Condition::B => "B",
            Condition::S => "S",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Enrollment,
    Identification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Development,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subject_id: String,
    pub condition: Condition,
    pub take: u32,
    pub role: Role,
    /// As written in the manifest (relative to the manifest directory).
    pub path: String,
    pub step_count: Option<usize>,
}

impl ManifestEntry {
    pub fn label(&self) -> String {
        format!("{} {}{} ({})", self.subject_id, self.condition, self.take, self.path)
    }

    fn key(&self) -> (String, Condition, u32) {
        (self.subject_id.clone(), self.condition, self.take)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub split: Split,
    /// Directory that entry paths are relative to.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.path)
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.role == role)
    }

    pub fn role_counts(&self) -> BTreeMap<Role, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            *out.entry(e.role).or_insert(0) += 1;
        }
        out
    }

    /// Checks every rule `load_manifest` enforces; `line` numbers are
    /// 1-based with the header on line 1.
    pub fn validate(&self) -> Result<(), EvalError> {
        let mut seen = BTreeSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            validate_entry(e, i as u64 + 2, &mut seen)?;
        }
        Ok(())
    }

    /// Serializes to the manifest CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = MANIFEST_HEADER.join(",");
        if self.split == Split::Test {
            out.push_str(",split");
        }
        out.push('\n');
        for e in &self.entries {
            let role = match e.role {
                Role::Enrollment => "enrollment",
                Role::Identification => "identification",
            };
            let steps = e.step_count.map(|k| k.to_string()).unwrap_or_default();
            let _ = write!(out, "{},{},{},{},{},{}", e.subject_id, e.condition, e.take, role, e.path, steps);
            if self.split == Split::Test {
                out.push_str(",test");
            }
            out.push('\n');
        }
        out
    }
}

fn schema(line: u64, field: &str, message: impl Into<String>) -> EvalError {
    EvalError::Schema { line, field: field.to_string(), message: message.into() }
}

fn validate_entry(e: &ManifestEntry, line: u64, seen: &mut BTreeSet<(String, Condition, u32)>) -> Result<(), EvalError> {
    if !valid_subject_id(&e.subject_id) {
        return Err(schema(line, "subject_id", "must be non-empty and use only [A-Za-z0-9_.-]"));
    }
    if e.take == 0 {
        return Err(schema(line, "take", "takes are numbered from 1"));
    }
    if e.path.is_empty() {
        return Err(schema(line, "path", "empty path"));
    }
    if e.role == Role::Enrollment {
        if e.condition != Condition::N {
            return Err(schema(line, "condition", "enrollment rows must be condition N"));
        }
        if e.step_count.is_none() {
            return Err(EvalError::MissingStepCount { line });
        }
    }
    if e.step_count == Some(0) {
        return Err(schema(line, "step_count", "must be at least 1"));
    }
    if !seen.insert(e.key()) {
        return Err(schema(line, "take", format!("duplicate ({}, {}, {})", e.subject_id, e.condition, e.take)));
    }
    Ok(())
}

/// Parses and validates a manifest CSV.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest, EvalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(&text, base_dir)
}

pub fn parse_manifest(text: &str, base_dir: PathBuf) -> Result<Manifest, EvalError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| schema(1, "header", e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let has_split = match names.as_slice() {
        h if h == MANIFEST_HEADER => false,
        [head @ .., "split"] if head == MANIFEST_HEADER => true,
        _ => {
            return Err(schema(1, "header", format!("expected `{}` (optionally `,split`)", MANIFEST_HEADER.join(","))));
        }
    };

    let mut entries = Vec::new();
    let mut split: Option<Split> = None;
    let mut seen = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            schema(line, "row", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let condition = match field(1) {
            "N" => Condition::N,
            "B" => Condition::B,
            "S" => Condition::S,
            other => return Err(schema(line, "condition", format!("`{other}` is not one of N, B, S"))),
        };
        let take: u32 = field(2).parse().map_err(|_| schema(line, "take", format!("`{}` is not a count", field(2))))?;
        let role = match field(3) {
            "enrollment" => Role::Enrollment,
            "identification" => Role::Identification,
            other => return Err(schema(line, "role", format!("`{other}` is not enrollment or identification"))),
        };
        let step_count = match field(5) {
            "" => None,
            s => Some(s.parse().map_err(|_| schema(line, "step_count", format!("`{s}` is not a count")))?),
        };
        if has_split {
            let this = match field(6) {
                "development" => Split::Development,
                "test" => Split::Test,
                other => return Err(schema(line, "split", format!("`{other}` is not development or test"))),
            };
            if split.is_some_and(|s| s != this) {
                return Err(schema(line, "split", "all rows must share one split"));
            }
            split = Some(this);
        }
        let entry = ManifestEntry {
            subject_id: field(0).to_string(),
            condition,
            take,
            role,
            path: field(4).to_string(),
            step_count,
        };
        validate_entry(&entry, line, &mut seen)?;
        entries.push(entry);
    }
    Ok(Manifest { entries, split: split.unwrap_or_default(), base_dir })
}

fn load_signal(manifest: &Manifest, entry: &ManifestEntry) -> Result<MonoSignal, EvalError> {
    load_wav(manifest.resolve(entry))
        .map(|clip| downmix(&clip))
        .map_err(|e| EvalError::Entry { entry: entry.label(), source: Box::new(e.into()) })
}

/// Enrolls every subject from the manifest's enrollment rows, fitting the
/// PCA (if enabled) on the pooled enrollment features only.
pub fn train_from_manifest(
    manifest: &Manifest,
    pipeline: &FeaturePipeline,
    hmm_config: &HmmConfig,
) -> Result<(SubjectModelSet, BTreeMap<String, TrainedModel>), EvalError> {
    let rows: Vec<&ManifestEntry> = manifest.with_role(Role::Enrollment).collect();
    if rows.is_empty() {
        return Err(EvalError::NoRows("enrollment"));
    }
    let signals: Vec<MonoSignal> =
        rows.par_iter().map(|e| load_signal(manifest, e)).collect::<Result<_, _>>()?;
    let mut by_subject: BTreeMap<String, Vec<(MonoSignal, usize)>> = BTreeMap::new();
    for (e, sig) in rows.iter().zip(signals) {
        let k = e.step_count.expect("validated enrollment row");
        by_subject.entry(e.subject_id.clone()).or_default().push((sig, k));
    }
    Ok(SubjectModelSet::train(&by_subject, pipeline, hmm_config)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingOutcome {
    pub entry: ManifestEntry,
    pub predicted: String,
    pub correct: bool,
    pub detected_steps: usize,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionCount {
    pub total: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub grammar: DecodeGrammar,
    /// Accuracy in [0, 1] per condition present in the manifest.
    pub per_condition_accuracy: BTreeMap<Condition, f64>,
    /// Unweighted mean of the per-condition accuracies.
    pub average: f64,
    pub counts: BTreeMap<Condition, ConditionCount>,
    pub per_recording: Vec<RecordingOutcome>,
}

impl EvaluationReport {
    pub fn from_outcomes(grammar: DecodeGrammar, per_recording: Vec<RecordingOutcome>) -> Self {
        let mut counts: BTreeMap<Condition, ConditionCount> = BTreeMap::new();
        for o in &per_recording {
            let c = counts.entry(o.entry.condition).or_insert(ConditionCount { total: 0, correct: 0 });
            c.total += 1;
            c.correct += usize::from(o.correct);
        }
        let per_condition_accuracy: BTreeMap<Condition, f64> =
            counts.iter().map(|(&k, c)| (k, c.correct as f64 / c.total as f64)).collect();
        let average = if per_condition_accuracy.is_empty() {
            0.0
        } else {
            per_condition_accuracy.values().sum::<f64>() / per_condition_accuracy.len() as f64
        };
        Self { grammar, per_condition_accuracy, average, counts, per_recording }
    }

    pub fn total_correct(&self) -> usize {
        self.counts.values().map(|c| c.correct).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Format(e.to_string()))
    }

    /// Accuracy table in percent with columns N, B, S and average. Missing
    /// conditions print as `-`.
    pub fn to_table(&self, label: &str) -> String {
        let width = label.len().max("Accuracy [%]".len());
        let mut out = format!("{:<width$} {:>7} {:>7} {:>7} {:>8}\n", "Accuracy [%]", "N", "B", "S", "average");
        let _ = write!(out, "{label:<width$}");
        for c in Condition::ALL {
            match self.per_condition_accuracy.get(&c) {
                Some(a) => {
                    let _ = write!(out, " {:>7.1}", 100.0 * a);
                }
                None => {
                    let _ = write!(out, " {:>7}", "-");
                }
            }
        }
        let _ = writeln!(out, " {:>8.1}", 100.0 * self.average);
        out
    }
}

/// Identifies every identification row against `set`.
pub fn evaluate(manifest: &Manifest, set: &SubjectModelSet, grammar: DecodeGrammar) -> Result<EvaluationReport, EvalError> {
    let rows: Vec<&ManifestEntry> = manifest.with_role(Role::Identification).collect();
    if rows.is_empty() {
        return Err(EvalError::NoRows("identification"));
    }
    if let Some(e) = rows.iter().find(|e| !set.models().contains_key(&e.subject_id)) {
        return Err(EvalError::NotClosedSet(e.subject_id.clone()));
    }
    let outcomes = rows
        .par_iter()
        .map(|&e| {
            let sig = load_signal(manifest, e)?;
            let r = identify(set, &sig, grammar)
                .map_err(|err| EvalError::Entry { entry: e.label(), source: Box::new(err) })?;
            Ok(RecordingOutcome {
                entry: e.clone(),
                correct: r.predicted == e.subject_id,
                detected_steps: r.decode.step_count,
                log_likelihood: r.decode.log_likelihood,
                predicted: r.predicted,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(EvaluationReport::from_outcomes(grammar, outcomes))
}

/// Full protocol: enroll from the enrollment rows, then identify every
/// identification row.
pub fn run_protocol(
    manifest: &Manifest,
    pipeline: &FeaturePipeline,
    hmm_config: &HmmConfig,
    grammar: DecodeGrammar,
) -> Result<EvaluationReport, EvalError> {
    let (set, _) = train_from_manifest(manifest, pipeline, hmm_config)?;
    evaluate(manifest, &set, grammar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub degrees_of_freedom: usize,
    /// One-tailed p-value for "second sample better than first".
    pub p_value: f64,
}

/// Paired one-tailed t-test on per-recording correctness (1/0) of `b`
/// against `a`. A zero-variance difference gives p = 0.5 when the mean
/// difference is zero, else 0 or 1.
pub fn paired_t_test(a: &[bool], b: &[bool]) -> Result<PairedTTest, EvalError> {
    let n = a.len();
    if n != b.len() {
        return Err(EvalError::Format("paired samples differ in length".into()));
    }
    if n < 2 {
        return Err(EvalError::InsufficientData(n));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f64::from(u8::from(y)) - f64::from(u8::from(x))).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let (t, p) = match mean.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => (f64::INFINITY, 0.0),
            Some(std::cmp::Ordering::Less) => (f64::NEG_INFINITY, 1.0),
            _ => (0.0, 0.5),
        };
        return Ok(PairedTTest { t, degrees_of_freedom: df, p_value: p });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    Ok(PairedTTest { t, degrees_of_freedom: df, p_value: dist.sf(t) })
}

/// One-tailed p-value that `b` beats `a` on `condition`, pairing recordings
/// by (subject, condition, take).
pub fn significance_test(a: &EvaluationReport, b: &EvaluationReport, condition: Condition) -> Result<f64, EvalError> {
    let pick = |r: &EvaluationReport| -> BTreeMap<(String, Condition, u32), bool> {
        r.per_recording.iter().filter(|o| o.entry.condition == condition).map(|o| (o.entry.key(), o.correct)).collect()
    };
    let (ma, mb) = (pick(a), pick(b));
    if !ma.keys().eq(mb.keys()) {
        return Err(EvalError::MismatchedRecordingSets(condition));
    }
    let xa: Vec<bool> = ma.into_values().collect();
    let xb: Vec<bool> = mb.into_values().collect();
    Ok(paired_t_test(&xa, &xb)?.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_manifest_text() -> String {
        let mut s = MANIFEST_HEADER.join(",") + "\n";
        for subj in ["s01", "s02"] {
            for take in 1..=4 {
                s += &format!("{subj},N,{take},enrollment,{subj}/N{take}.wav,5\n");
            }
            for take in 5..=6 {
                s += &format!("{subj},N,{take},identification,{subj}/N{take}.wav,5\n");
            }
            for c in ["B", "S"] {
                for take in 1..=2 {
                    s += &format!("{subj},{c},{take},identification,{subj}/{c}{take}.wav,\n");
                }
            }
        }
        s
    }

    #[test]
    fn toy_manifest_counts() {
        let m = parse_manifest(&toy_manifest_text(), PathBuf::from("/data")).unwrap();
        assert_eq!(m.entries.len(), 20);
        let roles = m.role_counts();
        assert_eq!(roles[&Role::Enrollment], 8);
        assert_eq!(roles[&Role::Identification], 12);
        assert_eq!(m.resolve(&m.entries[0]), PathBuf::from("/data/s01/N1.wav"));
        assert_eq!(m.split, Split::Development);
        let again = parse_manifest(&m.to_csv(), PathBuf::from("/data")).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn enrollment_must_be_normal() {
        let text = toy_manifest_text().replace("s01,N,2,enrollment", "s01,B,7,enrollment");
        match parse_manifest(&text, PathBuf::new()) {
            Err(EvalError::Schema { line, field, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(field, "condition");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_missing_steps() {
        let text = toy_manifest_text().replace("s01,N,2,enrollment", "s01,N,1,enrollment");
        assert!(matches!(parse_manifest(&text, PathBuf::new()), Err(EvalError::Schema { .. })));
        let text = toy_manifest_text().replace("s02,N,3,enrollment,s02/N3.wav,5", "s02,N,3,enrollment,s02/N3.wav,");
        assert!(matches!(parse_manifest(&text, PathBuf::new()), Err(EvalError::MissingStepCount { line: 14 })));
    }

    #[test]
    fn header_and_field_errors() {
        assert!(matches!(parse_manifest("a,b\n", PathBuf::new()), Err(EvalError::Schema { line: 1, .. })));
        let text = MANIFEST_HEADER.join(",") + "\ns01,X,1,identification,a.wav,\n";
        assert!(matches!(parse_manifest(&text, PathBuf::new()), Err(EvalError::Schema { line: 2, ref field, .. }) if field == "condition"));
        let text = MANIFEST_HEADER.join(",") + ",split\ns01,N,1,identification,a.wav,,test\n";
        assert_eq!(parse_manifest(&text, PathBuf::new()).unwrap().split, Split::Test);
    }

    fn outcome(subject: &str, c: Condition, take: u32, correct: bool) -> RecordingOutcome {
        RecordingOutcome {
            entry: ManifestEntry {
                subject_id: subject.into(),
                condition: c,
                take,
                role: Role::Identification,
                path: format!("{subject}{c}{take}.wav"),
                step_count: None,
            },
            predicted: if correct { subject.into() } else { "other".into() },
            correct,
            detected_steps: 1,
            log_likelihood: -1.0,
        }
    }

    #[test]
    fn all_correct_report() {
        let outs: Vec<_> = Condition::ALL.iter().flat_map(|&c| (1..=3).map(move |t| outcome("a", c, t, true))).collect();
        let r = EvaluationReport::from_outcomes(DecodeGrammar::MultiStep, outs);
        assert!(r.per_condition_accuracy.values().all(|&a| a == 1.0));
        assert_eq!(r.average, 1.0);
    }

    #[test]
    fn average_is_mean_of_condition_accuracies() {
        // 300 recordings per condition: 160, 92 and 21 correct.
        let mut outs = Vec::new();
        for (c, good) in [(Condition::N, 160), (Condition::B, 92), (Condition::S, 21)] {
            for t in 0..300u32 {
                outs.push(outcome(&format!("s{}", t % 150), c, t / 150 + 1, t < good));
            }
        }
        let r = EvaluationReport::from_outcomes(DecodeGrammar::SinglePass, outs);
        assert!((r.per_condition_accuracy[&Condition::N] - 0.5333333333333333).abs() < 1e-12);
        assert!((r.average - (160.0 + 92.0 + 21.0) / 900.0).abs() < 1e-12);
        assert!((r.average - 0.30333).abs() < 1e-4);
        let total: f64 = r.counts.iter().map(|(c, n)| r.per_condition_accuracy[c] * n.total as f64).sum();
        assert!((total - r.total_correct() as f64).abs() < 1e-9);
        let back = EvaluationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(EvaluationReport::from_outcomes(back.grammar, back.per_recording.clone()), r);
        let table = r.to_table("basic HMM");
        assert!(table.contains("53.3") && table.contains("30.7") && table.contains("7.0") && table.contains("30.3"));
    }

    #[test]
    fn accuracies_ignore_row_order() {
        let mut outs: Vec<_> = (1..=6).map(|t| outcome("a", Condition::N, t, t % 2 == 0)).collect();
        let r1 = EvaluationReport::from_outcomes(DecodeGrammar::MultiStep, outs.clone());
        outs.reverse();
        let r2 = EvaluationReport::from_outcomes(DecodeGrammar::MultiStep, outs);
        assert_eq!(r1.per_condition_accuracy, r2.per_condition_accuracy);
    }

    #[test]
    fn t_test_cases() {
        let a = vec![true, false, true, false];
        assert_eq!(paired_t_test(&a, &a).unwrap().p_value, 0.5);
        assert!(matches!(paired_t_test(&[true], &[false]), Err(EvalError::InsufficientData(1))));
        // b right everywhere a is wrong, a right on half the recordings.
        let a: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        let b = vec![true; 20];
        let r = paired_t_test(&a, &b).unwrap();
        // t-table: one-tailed critical value at alpha 0.05, df 19, is 1.729.
        assert!(r.t > 1.729);
        assert!(r.p_value < 0.05);
        let all_wrong = vec![false; 20];
        assert_eq!(paired_t_test(&all_wrong, &b).unwrap().p_value, 0.0);
        assert_eq!(paired_t_test(&b, &all_wrong).unwrap().p_value, 1.0);
    }

    #[test]
    fn significance_needs_matching_recordings() {
        let ra = EvaluationReport::from_outcomes(
            DecodeGrammar::MultiStep,
            (1..=4).map(|t| outcome("a", Condition::N, t, true)).collect(),
        );
        let rb = EvaluationReport::from_outcomes(
            DecodeGrammar::MultiStep,
            (2..=5).map(|t| outcome("a", Condition::N, t, true)).collect(),
        );
        assert_eq!(significance_test(&ra, &ra, Condition::N).unwrap(), 0.5);
        assert!(matches!(significance_test(&ra, &rb, Condition::N), Err(EvalError::MismatchedRecordingSets(Condition::N))));
    }
}
