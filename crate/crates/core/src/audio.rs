//! PCM WAV input and channel reduction.

use std::io;
use std::path::{Path, PathBuf};

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

#[derive(Debug, thiserror::Error)]
pub enum AudioError {
    #[error("audio file not found: {0}")]
    MissingFile(PathBuf),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("corrupt WAV header or data: {0}")]
    CorruptHeader(String),
    #[error("invalid audio clip: {0}")]
    InvalidClip(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// A multi-channel recording with samples normalized to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        let Some(first) = channels.first() else {
            return Err(AudioError::InvalidClip("clip has no channels".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(AudioError::InvalidClip("clip has no samples".into()));
        }
        if channels.iter().any(|c| c.len() != n) {
            return Err(AudioError::InvalidClip("channels differ in length".into()));
        }
        if channels.iter().flatten().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(AudioError::InvalidClip("sample outside [-1, 1]".into()));
        }
        Ok(Self { channels, sample_rate })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
}

/// Single-channel signal consumed by the feature front end.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl MonoSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self { samples, sample_rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

fn map_hound(path: &Path, err: hound::Error) -> AudioError {
    match err {
        hound::Error::Unsupported => {
            AudioError::UnsupportedEncoding("compressed or unknown format tag".into())
        }
        hound::Error::FormatError(msg) => AudioError::CorruptHeader(msg.into()),
        hound::Error::TooWide => AudioError::UnsupportedEncoding("sample width too large".into()),
        hound::Error::InvalidSampleFormat => {
            AudioError::UnsupportedEncoding("invalid sample format for bit depth".into())
        }
        hound::Error::UnfinishedSample => AudioError::CorruptHeader("unfinished sample".into()),
        hound::Error::IoError(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
            AudioError::CorruptHeader("truncated chunk".into())
        }
        hound::Error::IoError(source) => AudioError::Io { path: path.to_path_buf(), source },
    }
}

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Walks the RIFF chunk list: every chunk must fit in the file and the
/// format tag must be plain or extensible PCM/float.
fn scan_chunks(path: &Path) -> Result<(), AudioError> {
    let bytes = std::fs::read(path).map_err(|source| AudioError::Io { path: path.to_path_buf(), source })?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::CorruptHeader("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut seen_fmt = false;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().expect("4 bytes")) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(AudioError::CorruptHeader(format!(
                "chunk '{}' runs past end of file",
                String::from_utf8_lossy(id)
            )));
        }
        if id == b"fmt " {
            if size < 16 {
                return Err(AudioError::CorruptHeader("fmt chunk too short".into()));
            }
            let tag = u16::from_le_bytes([bytes[body], bytes[body + 1]]);
            if !matches!(tag, FORMAT_PCM | FORMAT_FLOAT | FORMAT_EXTENSIBLE) {
                return Err(AudioError::UnsupportedEncoding(format!("format tag {tag:#06x}")));
            }
            seen_fmt = true;
        } else if id == b"data" && !seen_fmt {
            return Err(AudioError::CorruptHeader("data chunk before fmt chunk".into()));
        }
        pos = body + size + size % 2;
    }
    if !seen_fmt {
        return Err(AudioError::CorruptHeader("no fmt chunk".into()));
    }
    Ok(())
}

/// Reads a RIFF/WAVE PCM file. Integer samples are divided by 2^(bits-1);
/// 32-bit float samples are taken as-is and must lie in [-1, 1].
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(AudioError::MissingFile(path.to_path_buf()));
    }
    scan_chunks(path)?;
    let reader = WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    let channel_count = spec.channels as usize;
    if channel_count == 0 {
        return Err(AudioError::CorruptHeader("zero channels".into()));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            if !matches!(spec.bits_per_sample, 8 | 16 | 24 | 32) {
                return Err(AudioError::UnsupportedEncoding(format!(
                    "{}-bit integer PCM",
                    spec.bits_per_sample
                )));
            }
            let scale = (1u64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
        SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(AudioError::UnsupportedEncoding(format!(
                    "{}-bit float PCM",
                    spec.bits_per_sample
                )));
            }
            reader
                .into_samples::<f32>()
                .map(|s| s.map(f64::from))
                .collect::<Result<_, _>>()
                .map_err(|e| map_hound(path, e))?
        }
    };
    if interleaved.is_empty() || !interleaved.len().is_multiple_of(channel_count) {
        return Err(AudioError::CorruptHeader("data chunk holds no complete frame".into()));
    }
    let frames = interleaved.len() / channel_count;
    let mut channels = vec![Vec::with_capacity(frames); channel_count];
    for frame in interleaved.chunks_exact(channel_count) {
        for (ch, &v) in channels.iter_mut().zip(frame) {
            ch.push(v);
        }
    }
    AudioClip::new(channels, spec.sample_rate)
}

/// Averages all channels sample by sample.
pub fn downmix(clip: &AudioClip) -> MonoSignal {
    let count = clip.channel_count() as f64;
    let samples = if clip.channel_count() == 1 {
        clip.channels[0].clone()
    } else {
        (0..clip.len())
            .map(|n| clip.channels.iter().map(|c| c[n]).sum::<f64>() / count)
            .collect()
    };
    MonoSignal::new(samples, clip.sample_rate)
}

/// Writes a mono signal as 16-bit PCM, clamping to the representable range.
pub fn write_wav_pcm16(path: impl AsRef<Path>, signal: &MonoSignal) -> Result<(), AudioError> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for &v in &signal.samples {
        let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(|e| map_hound(path, e))?;
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}
