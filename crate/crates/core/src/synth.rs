//! Deterministic synthetic walking-sound corpora.
//!
//! Each subject owns a spectral template for the step transients, a second
//! template for the low-level "rustle" between steps, and a base step
//! period. A recording is a short lead-in of background noise followed by
//! a fixed number of step periods; every period opens with an exponentially
//! decaying, spectrally shaped noise burst and carries a rustle bump in its
//! middle. Stationary background noise is added at the configured SNR.
//!
//! Condition B (backpack) slows the gait and shifts and perturbs the step
//! spectrum. Condition S (shoe covers) low-passes the step transients and
//! softens their attack.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::{write_wav_pcm16, AudioError, MonoSignal};
use crate::eval::{Condition, Manifest, ManifestEntry, Role, Split};
use crate::features::{hz_to_mel, mel_to_hz};

/// Spectral template resolution (bands equally spaced on the mel scale).
pub const NUM_BANDS: usize = 20;
const LOWEST_BAND_HZ: f64 = 60.0;
const TEMPLATE_SPREAD_DB: f64 = 8.0;
const TAKE_VARIATION_DB: f64 = 1.5;
const STEP_LEVEL_VARIATION_DB: f64 = 1.5;
const BURST_DECAY_S: f64 = 0.06;
const BURST_LENGTH_S: f64 = 0.3;
const BACKPACK_PERIOD_FACTOR: f64 = 1.12;
const BACKPACK_PERTURB_DB: f64 = 3.0;
const SHOE_COVER_CUTOFF_HZ: f64 = 700.0;
const SHOE_COVER_ATTACK_S: f64 = 0.012;
const PEAK_LEVEL: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic corpus configuration: {0}")]
    InvalidConfig(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TakeCounts {
    pub n: u32,
    pub b: u32,
    pub s: u32,
}

impl TakeCounts {
    pub fn get(&self, c: Condition) -> u32 {
        match c {
            Condition::N => self.n,
            Condition::B => self.b,
            Condition::S => self.s,
        }
    }
}

impl Default for TakeCounts {
    fn default() -> Self {
        Self { n: 6, b: 2, s: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_subjects: usize,
    pub takes: TakeCounts,
    /// The first this-many N takes are enrollment rows, the rest identification.
    pub enrollment_takes: u32,
    pub sample_rate: u32,
    /// Range the per-subject base step period (seconds) is drawn from.
    pub step_period_range: (f64, f64),
    /// Relative per-step jitter of the period.
    pub period_jitter: f64,
    pub steps_per_recording: usize,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_subjects: 10,
            takes: TakeCounts::default(),
            enrollment_takes: 4,
            sample_rate: 16_000,
            step_period_range: (0.45, 0.65),
            period_jitter: 0.05,
            steps_per_recording: 5,
            snr_db: 10.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.into()));
        if self.num_subjects == 0 {
            return bad("num_subjects must be at least 1");
        }
        if self.takes.n == 0 || self.takes.b == 0 || self.takes.s == 0 {
            return bad("every condition needs at least one take");
        }
        if self.enrollment_takes == 0 || self.enrollment_takes > self.takes.n {
            return bad("enrollment_takes must lie in 1..=N takes");
        }
        if self.sample_rate < 8000 {
            return bad("sample_rate must be at least 8000 Hz");
        }
        let (lo, hi) = self.step_period_range;
        if !(lo > BURST_LENGTH_S / 2.0 && hi >= lo) {
            return bad("step_period_range must be ordered and longer than a step burst");
        }
        if !(0.0..0.5).contains(&self.period_jitter) {
            return bad("period_jitter must lie in [0, 0.5)");
        }
        if self.steps_per_recording == 0 {
            return bad("steps_per_recording must be at least 1");
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite");
        }
        Ok(())
    }

    pub fn subject_ids(&self) -> Vec<String> {
        let width = self.num_subjects.to_string().len().max(2);
        (1..=self.num_subjects).map(|i| format!("s{i:0width$}")).collect()
    }
}

/// Per-subject generator parameters, a pure function of (seed, subject id).
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectProfile {
    pub subject_id: String,
    /// Step-burst band gains in dB.
    pub step_spectrum: Vec<f64>,
    /// Rustle band gains in dB.
    pub rustle_spectrum: Vec<f64>,
    /// Seconds.
    pub base_period: f64,
    /// Rustle peak relative to the step burst peak (linear).
    pub rustle_level: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

fn id_hash(id: &str) -> u64 {
    // FNV-1a
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn smooth_template(rng: &mut ChaCha8Rng, spread_db: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..NUM_BANDS).map(|_| spread_db * rng.sample::<f64, _>(StandardNormal)).collect();
    (0..NUM_BANDS)
        .map(|i| {
            let l = raw[i.saturating_sub(1)];
            let r = raw[(i + 1).min(NUM_BANDS - 1)];
            0.25 * l + 0.5 * raw[i] + 0.25 * r
        })
        .collect()
}

impl SubjectProfile {
    pub fn new(config: &SynthConfig, subject_id: &str) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, id_hash(subject_id), 0]));
        let step_spectrum = smooth_template(&mut rng, TEMPLATE_SPREAD_DB);
        let rustle_spectrum = smooth_template(&mut rng, TEMPLATE_SPREAD_DB);
        let (lo, hi) = config.step_period_range;
        let base_period = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let rustle_level = rng.random_range(0.08..0.2);
        Self { subject_id: subject_id.to_string(), step_spectrum, rustle_spectrum, base_period, rustle_level }
    }
}

/// Band centre frequencies of the templates.
fn band_centres(sample_rate: u32) -> Vec<f64> {
    let lo = hz_to_mel(LOWEST_BAND_HZ);
    let hi = hz_to_mel(0.95 * sample_rate as f64 / 2.0);
    (0..NUM_BANDS).map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (NUM_BANDS - 1) as f64)).collect()
}

/// Linear gain at `hz` by mel-domain interpolation of a dB template.
fn template_gain(template_db: &[f64], centres: &[f64], hz: f64) -> f64 {
    let m = hz_to_mel(hz);
    let mels: Vec<f64> = centres.iter().map(|&c| hz_to_mel(c)).collect();
    let db = if m <= mels[0] {
        template_db[0]
    } else if m >= mels[NUM_BANDS - 1] {
        template_db[NUM_BANDS - 1]
    } else {
        let i = mels.windows(2).position(|w| m >= w[0] && m < w[1]).unwrap_or(NUM_BANDS - 2);
        let frac = (m - mels[i]) / (mels[i + 1] - mels[i]);
        template_db[i] * (1.0 - frac) + template_db[i + 1] * frac
    };
    10f64.powf(db / 20.0)
}

/// White Gaussian noise filtered by an arbitrary magnitude response.
struct NoiseShaper {
    size: usize,
    sample_rate: u32,
    planner: FftPlanner<f64>,
}

impl NoiseShaper {
    fn new(len: usize, sample_rate: u32) -> Self {
        Self { size: len.next_power_of_two().max(2), sample_rate, planner: FftPlanner::new() }
    }

    fn shaped(&mut self, rng: &mut ChaCha8Rng, len: usize, gain: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.size.max(len.next_power_of_two());
        let mut buf: Vec<Complex<f64>> =
            (0..n).map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), 0.0)).collect();
        self.planner.plan_fft_forward(n).process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            let bin = k.min(n - k);
            let hz = bin as f64 * self.sample_rate as f64 / n as f64;
            *c *= gain(hz);
        }
        self.planner.plan_fft_inverse(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().take(len).map(|c| c.re * scale).collect()
    }
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt()
}

/// One synthetic recording plus the sample index of every step onset.
pub fn generate_recording(
    config: &SynthConfig,
    profile: &SubjectProfile,
    condition: Condition,
    take: u32,
) -> (MonoSignal, Vec<usize>) {
    let sr = config.sample_rate;
    let cond_tag = match condition {
        Condition::N => 1,
        Condition::B => 2,
        Condition::S => 3,
    };
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, id_hash(&profile.subject_id), cond_tag, u64::from(take)]));
    let centres = band_centres(sr);

    let mut step_db: Vec<f64> =
        profile.step_spectrum.iter().map(|g| g + TAKE_VARIATION_DB * rng.sample::<f64, _>(StandardNormal)).collect();
    let rustle_db: Vec<f64> =
        profile.rustle_spectrum.iter().map(|g| g + TAKE_VARIATION_DB * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut period = profile.base_period;
    let mut attack = 0.001;
    let mut lowpass_cutoff: Option<f64> = None;
    match condition {
        Condition::N => {}
        Condition::B => {
            period *= BACKPACK_PERIOD_FACTOR;
            // Heavier footfall: the template moves one band down and picks up
            // extra irregularity.
            let shifted: Vec<f64> = (0..NUM_BANDS).map(|i| step_db[(i + 1).min(NUM_BANDS - 1)]).collect();
            step_db = shifted.iter().map(|g| g + BACKPACK_PERTURB_DB * rng.sample::<f64, _>(StandardNormal)).collect();
        }
        Condition::S => {
            attack = SHOE_COVER_ATTACK_S;
            lowpass_cutoff = Some(SHOE_COVER_CUTOFF_HZ);
        }
    }

    let lead = rng.random_range(0.02..0.06);
    let periods: Vec<f64> = (0..config.steps_per_recording)
        .map(|_| period * (1.0 + config.period_jitter * rng.random_range(-1.0..1.0)))
        .collect();
    let total_s = lead + periods.iter().sum::<f64>();
    let len = (total_s * sr as f64).round() as usize;

    let mut shaper = NoiseShaper::new((BURST_LENGTH_S * sr as f64) as usize, sr);
    let mut signal = vec![0.0; len];
    let mut onsets = Vec::with_capacity(periods.len());
    let mut t0 = lead;
    let burst_len = (BURST_LENGTH_S * sr as f64) as usize;
    let step_gain = |hz: f64| {
        let g = template_gain(&step_db, &centres, hz);
        match lowpass_cutoff {
            // Second-order roll-off above the cutoff.
            Some(fc) => g / (1.0 + (hz / fc).powi(4)).sqrt(),
            None => g,
        }
    };
    for &p in &periods {
        let onset = (t0 * sr as f64).round() as usize;
        onsets.push(onset);
        let level = 10f64.powf(STEP_LEVEL_VARIATION_DB * rng.sample::<f64, _>(StandardNormal) / 20.0);
        let mut burst = shaper.shaped(&mut rng, burst_len, step_gain);
        let norm = rms(&burst).max(1e-12);
        for (i, v) in burst.iter_mut().enumerate() {
            let t = i as f64 / sr as f64;
            let env = if t < attack { t / attack } else { (-(t - attack) / BURST_DECAY_S).exp() };
            *v *= level * env / norm;
        }
        for (i, v) in burst.iter().enumerate() {
            if let Some(slot) = signal.get_mut(onset + i) {
                *slot += v;
            }
        }
        t0 += p;
    }

    // Rustle: continuous shaped noise under a sin^2 bump centred in each period.
    let rustle = shaper.shaped(&mut rng, len, |hz| template_gain(&rustle_db, &centres, hz));
    let rustle_norm = rms(&rustle).max(1e-12);
    let mut bounds: Vec<usize> = onsets.clone();
    bounds.push(len);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (i, n) in (a..b).enumerate() {
            let phase = i as f64 / (b - a) as f64;
            signal[n] += profile.rustle_level * (PI * phase).sin().powi(2) * rustle[n] / rustle_norm;
        }
    }

    // Stationary background, identical spectrum for every subject.
    let background = shaper.shaped(&mut rng, len, |hz| 1.0 / (1.0 + hz / 300.0).sqrt());
    let target = rms(&signal) / 10f64.powf(config.snr_db / 20.0);
    let bg_norm = rms(&background).max(1e-12);
    for (s, b) in signal.iter_mut().zip(&background) {
        *s += target * b / bg_norm;
    }

    let take_level = 10f64.powf(rng.random_range(-2.0..2.0) / 20.0);
    let peak = signal.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
    let scale = PEAK_LEVEL * take_level / peak;
    signal.iter_mut().for_each(|v| *v *= scale);
    (MonoSignal::new(signal, sr), onsets)
}

/// Writes `<out_dir>/<subject>/<condition><take>.wav` for every recording and
/// `<out_dir>/manifest.csv`, and returns the manifest.
pub fn generate_corpus(config: &SynthConfig, out_dir: impl AsRef<Path>) -> Result<Manifest, SynthError> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;

    let profiles: Vec<SubjectProfile> = config.subject_ids().iter().map(|id| SubjectProfile::new(config, id)).collect();
    let mut entries = Vec::new();
    for p in &profiles {
        std::fs::create_dir_all(out_dir.join(&p.subject_id)).map_err(io(&out_dir.join(&p.subject_id)))?;
        for c in Condition::ALL {
            for take in 1..=config.takes.get(c) {
                let role = if c == Condition::N && take <= config.enrollment_takes {
                    Role::Enrollment
                } else {
                    Role::Identification
                };
                entries.push(ManifestEntry {
                    subject_id: p.subject_id.clone(),
                    condition: c,
                    take,
                    role,
                    path: format!("{}/{c}{take}.wav", p.subject_id),
                    step_count: Some(config.steps_per_recording),
                });
            }
        }
    }

    entries.par_iter().try_for_each(|e| {
        let profile = profiles.iter().find(|p| p.subject_id == e.subject_id).expect("profile per subject");
        let (signal, _) = generate_recording(config, profile, e.condition, e.take);
        write_wav_pcm16(out_dir.join(&e.path), &signal)?;
        Ok::<_, SynthError>(())
    })?;

    let manifest = Manifest { entries, split: Split::Development, base_dir: out_dir.to_path_buf() };
    let path = out_dir.join("manifest.csv");
    std::fs::write(&path, manifest.to_csv()).map_err(io(&path))?;
    Ok(manifest)
}
