use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureError, FeatureSequence, MfccConfig};
use crate::audio::MonoSignal;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Frames produced from `n` samples: 1 + floor((n - win) / hop), or 0 when
/// the signal is shorter than one window.
pub fn frame_count(n: usize, win: usize, hop: usize) -> usize {
    if n < win || hop == 0 {
        0
    } else {
        1 + (n - win) / hop
    }
}

/// Triangular filters equally spaced on the mel scale from 0 Hz to Nyquist,
/// sampled at the `nfft / 2 + 1` DFT bin frequencies.
fn mel_filterbank(num_filters: usize, nfft: usize, sample_rate: u32) -> Vec<Vec<f64>> {
    let bins = nfft / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_to_hz(top * i as f64 / (num_filters + 1) as f64))
        .collect();
    (0..num_filters)
        .map(|m| {
            let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * sample_rate as f64 / nfft as f64;
                    if f >= lo && f <= mid {
                        (f - lo) / (mid - lo)
                    } else if f > mid && f <= hi {
                        (hi - f) / (hi - mid)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Orthonormal DCT-II basis, `num_out` rows by `num_in` columns.
fn dct_matrix(num_out: usize, num_in: usize) -> Vec<Vec<f64>> {
    let n = num_in as f64;
    (0..num_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            (0..num_in)
                .map(|m| scale * (PI * k as f64 * (m as f64 + 0.5) / n).cos())
                .collect()
        })
        .collect()
}

/// Static MFCCs C0..C(num_cepstra-1), one row per frame.
pub fn compute_mfcc(signal: &MonoSignal, config: &MfccConfig) -> Result<FeatureSequence, FeatureError> {
    config.validate()?;
    if signal.sample_rate != config.expected_sample_rate {
        return Err(FeatureError::SampleRateMismatch {
            expected: config.expected_sample_rate,
            actual: signal.sample_rate,
        });
    }
    let win = config.window_samples();
    let hop = config.hop_samples();
    if win < 2 || hop == 0 {
        return Err(FeatureError::InvalidConfig("window shorter than two samples".into()));
    }
    let n = signal.len();
    let frames = frame_count(n, win, hop);
    if frames == 0 {
        return Err(FeatureError::SignalTooShort { samples: n, frame: win });
    }

    let x = &signal.samples;
    let k = config.preemphasis;
    let emphasized: Vec<f64> = (0..n)
        .map(|i| if i == 0 { x[0] } else { x[i] - k * x[i - 1] })
        .collect();

    let hamming: Vec<f64> = (0..win)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (win - 1) as f64).cos())
        .collect();
    let nfft = win.next_power_of_two();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let filters = mel_filterbank(config.num_mel_filters, nfft, signal.sample_rate);
    let dct = dct_matrix(config.num_cepstra, config.num_mel_filters);

    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut magnitude = vec![0.0; nfft / 2 + 1];
    let mut log_energy = vec![0.0; config.num_mel_filters];
    let mut out = Vec::with_capacity(frames * config.num_cepstra);
    for t in 0..frames {
        let start = t * hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < win {
                Complex::new(emphasized[start + i] * hamming[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (m, c) in magnitude.iter_mut().zip(&buf) {
            *m = c.norm();
        }
        for (e, filt) in log_energy.iter_mut().zip(&filters) {
            let energy: f64 = filt.iter().zip(&magnitude).map(|(w, m)| w * m).sum();
            *e = energy.max(config.log_floor).ln();
        }
        out.extend(dct.iter().map(|row| row.iter().zip(&log_energy).map(|(a, b)| a * b).sum::<f64>()));
    }
    FeatureSequence::from_flat(out, config.num_cepstra, config.frame_shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> MfccConfig {
        MfccConfig::default()
    }

    #[test]
    fn frame_count_example() {
        let sig = MonoSignal::new(vec![0.0; 32000], 16000);
        let seq = compute_mfcc(&sig, &cfg()).unwrap();
        assert_eq!(seq.num_frames(), 198);
        assert_eq!(seq.dim(), 13);
    }

    #[test]
    fn silence_clamps_to_floor() {
        let c = cfg();
        let sig = MonoSignal::new(vec![0.0; 4000], 16000);
        let seq = compute_mfcc(&sig, &c).unwrap();
        let first = seq.frame(0).to_vec();
        assert!(seq.frames().all(|f| f == first.as_slice()));
        // Constant log vector maps to C0 = sqrt(M) * ln(floor), rest zero.
        let expected_c0 = (c.num_mel_filters as f64).sqrt() * c.log_floor.ln();
        assert!((first[0] - expected_c0).abs() < 1e-9);
        assert!(first[1..].iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn rate_mismatch_and_short_signal() {
        let sig = MonoSignal::new(vec![0.0; 4000], 8000);
        assert!(matches!(
            compute_mfcc(&sig, &cfg()),
            Err(FeatureError::SampleRateMismatch { expected: 16000, actual: 8000 })
        ));
        let sig = MonoSignal::new(vec![0.0; 399], 16000);
        assert!(matches!(compute_mfcc(&sig, &cfg()), Err(FeatureError::SignalTooShort { .. })));
    }

    #[test]
    fn mel_scale_roundtrip() {
        for hz in [0.0, 100.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(hz)) - hz).abs() < 1e-9);
        }
    }

    #[test]
    fn filters_cover_each_bin_range() {
        let fb = mel_filterbank(26, 512, 16000);
        assert_eq!(fb.len(), 26);
        assert!(fb.iter().all(|f| f.len() == 257 && f.iter().any(|&w| w > 0.0)));
    }

    /// Independent evaluation of the same definitions: O(N^2) DFT, filter
    /// weights computed inline, DCT by explicit cosine sums.
    fn dense_oracle(frame: &[f64], sr: u32, c: &MfccConfig) -> Vec<f64> {
        let win = frame.len();
        let nfft = win.next_power_of_two();
        let mut pre = vec![frame[0]];
        pre.extend((1..win).map(|i| frame[i] - c.preemphasis * frame[i - 1]));
        let windowed: Vec<f64> = (0..win)
            .map(|i| pre[i] * (0.54 - 0.46 * (2.0 * PI * i as f64 / (win as f64 - 1.0)).cos()))
            .collect();
        let mags: Vec<f64> = (0..=nfft / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (nn, &v) in windowed.iter().enumerate() {
                    let ang = -2.0 * PI * (k * nn) as f64 / nfft as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect();
        let m = c.num_mel_filters;
        let mel_max = 2595.0 * (1.0 + (sr as f64 / 2.0) / 700.0).log10();
        let hz = |i: usize| 700.0 * (10f64.powf(mel_max * i as f64 / (m + 1) as f64 / 2595.0) - 1.0);
        let logs: Vec<f64> = (0..m)
            .map(|j| {
                let (a, b, cc) = (hz(j), hz(j + 1), hz(j + 2));
                let mut e = 0.0;
                for (k, &mag) in mags.iter().enumerate() {
                    let f = k as f64 * sr as f64 / nfft as f64;
                    let w = if f < a || f > cc {
                        0.0
                    } else if f <= b {
                        (f - a) / (b - a)
                    } else {
                        (cc - f) / (cc - b)
                    };
                    e += w * mag;
                }
                e.max(c.log_floor).ln()
            })
            .collect();
        (0..c.num_cepstra)
            .map(|q| {
                let s: f64 = logs
                    .iter()
                    .enumerate()
                    .map(|(j, l)| l * (PI * q as f64 * (j as f64 + 0.5) / m as f64).cos())
                    .sum();
                s * if q == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() }
            })
            .collect()
    }

    #[test]
    fn single_frame_sinusoid_matches_dense_oracle() {
        let c = cfg();
        let sr = 16000;
        let m = c.num_mel_filters;
        let mel_max = hz_to_mel(8000.0);
        let center = mel_to_hz(mel_max * 10.0 / (m + 1) as f64);
        let samples: Vec<f64> = (0..400)
            .map(|i| 0.5 * (2.0 * PI * center * i as f64 / sr as f64).sin())
            .collect();
        let got = compute_mfcc(&MonoSignal::new(samples.clone(), sr), &c).unwrap();
        assert_eq!(got.num_frames(), 1);
        let want = dense_oracle(&samples, sr, &c);
        for (g, w) in got.frame(0).iter().zip(&want) {
            assert!((g - w).abs() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn gain_shifts_only_c0() {
        let c = cfg();
        let samples: Vec<f64> = (0..3200)
            .map(|i| {
                let t = i as f64 / 16000.0;
                0.2 * (2.0 * PI * 440.0 * t).sin() + 0.05 * ((i * 7919 % 1000) as f64 / 1000.0 - 0.5)
            })
            .collect();
        let base = compute_mfcc(&MonoSignal::new(samples.clone(), 16000), &c).unwrap();
        let s = 2.5;
        let scaled =
            compute_mfcc(&MonoSignal::new(samples.iter().map(|v| v * s).collect(), 16000), &c).unwrap();
        let shift = (m_f(&c)).sqrt() * s.ln();
        for (a, b) in base.frames().zip(scaled.frames()) {
            assert!((b[0] - a[0] - shift).abs() < 1e-9);
            for q in 1..13 {
                assert!((b[q] - a[q]).abs() < 1e-9);
            }
        }
    }

    fn m_f(c: &MfccConfig) -> f64 {
        c.num_mel_filters as f64
    }

    proptest! {
        #[test]
        fn frame_count_formula(n in 1usize..20_000, win in 2usize..800, hop in 1usize..400) {
            let expected = if n < win { 0 } else { 1 + (n - win) / hop };
            prop_assert_eq!(frame_count(n, win, hop), expected);
        }
    }
}
