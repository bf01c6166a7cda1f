//! Audio input and corpus handling.
//!
//! Covers 16-bit mono WAV I/O, the 16 kHz to 8 kHz decimator, the
//! tab-separated corpus manifest with its summary statistics, and a seeded
//! generator of synthetic cough / laugh / "wei" corpora.

mod decimate;
mod manifest;
mod synth;
mod wav;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use decimate::{decimate_2x, lowpass_taps, DECIMATION_TAPS};
pub use manifest::{load_manifest, manifest_stats, parse_manifest, write_manifest, CorpusStats, EventStats, ManifestEntry};
pub use synth::{synth_corpus, SpeakerVoice, SynthSpec};
pub use wav::{read_wav, write_wav, quantize_i16};

/// Mono PCM audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        Self { samples, sample_rate_hz }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Trivial speech event class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Cough,
    Laugh,
    Wei,
    Other,
}

impl Event {
    pub const TRIVIAL: [Event; 3] = [Event::Cough, Event::Laugh, Event::Wei];

    pub fn as_str(self) -> &'static str {
        match self {
            Event::Cough => "cough",
            Event::Laugh => "laugh",
            Event::Wei => "wei",
            Event::Other => "other",
        }
    }

    /// Unknown tokens map to [`Event::Other`].
    pub fn from_token(token: &str) -> Event {
        token.parse().unwrap_or(Event::Other)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Event {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cough" => Ok(Event::Cough),
            "laugh" => Ok(Event::Laugh),
            "wei" => Ok(Event::Wei),
            "other" => Ok(Event::Other),
            _ => Err(CorpusError::UnknownEvent(s.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("unsupported audio format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("truncated audio file {0}: data chunk shorter than the header claims")]
    TruncatedFile(PathBuf),
    #[error("sample rate {0} Hz is not divisible by 2")]
    OddRate(u32),
    #[error("manifest line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate utterance id `{0}`")]
    DuplicateUttId(String),
    #[error("manifest has no entries")]
    EmptyManifest,
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
