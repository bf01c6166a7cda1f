use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{FeatureMatrix, FrontendError};
use crate::corpus::AudioClip;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontendConfig {
    pub sample_rate_hz: u32,
    pub frame_len_ms: f64,
    pub frame_shift_ms: f64,
    pub preemphasis: f64,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub log_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 8000,
            frame_len_ms: 25.0,
            frame_shift_ms: 10.0,
            preemphasis: 0.97,
            n_mels: 40,
            fmin_hz: 20.0,
            fmax_hz: 3800.0,
            log_floor: 1e-10,
        }
    }
}

impl FrontendConfig {
    pub fn frame_len_samples(&self) -> usize {
        (self.frame_len_ms * self.sample_rate_hz as f64 / 1000.0).round() as usize
    }

    pub fn frame_shift_samples(&self) -> usize {
        (self.frame_shift_ms * self.sample_rate_hz as f64 / 1000.0).round() as usize
    }

    /// Frames produced for `n_samples` input samples (0 if shorter than a frame).
    pub fn n_frames(&self, n_samples: usize) -> usize {
        let len = self.frame_len_samples();
        if n_samples < len { 0 } else { 1 + (n_samples - len) / self.frame_shift_samples() }
    }

    pub fn validate(&self) -> Result<(), FrontendError> {
        let bad = |m: String| Err(FrontendError::InvalidConfig(m));
        if self.n_mels < 2 {
            return bad(format!("n_mels must be >= 2, got {}", self.n_mels));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(self.fmin_hz >= 0.0 && self.fmin_hz < self.fmax_hz && self.fmax_hz <= nyquist) {
            return bad(format!("need 0 <= fmin < fmax <= {nyquist} Hz"));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return bad("preemphasis must lie in [0, 1)".into());
        }
        if self.frame_len_samples() < 2 || self.frame_shift_samples() == 0 {
            return bad("frame length and shift must be positive".into());
        }
        if !(self.log_floor > 0.0) {
            return bad("log_floor must be positive".into());
        }
        Ok(())
    }
}

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Reusable Fbank extractor: window, FFT plan and filterbank are built once.
#[derive(Clone)]
pub struct FbankExtractor {
    cfg: FrontendConfig,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    n_fft: usize,
    /// One row of `n_fft/2 + 1` weights per mel filter.
    filters: Vec<Vec<f64>>,
}

impl std::fmt::Debug for FbankExtractor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbankExtractor").field("cfg", &self.cfg).field("n_fft", &self.n_fft).finish_non_exhaustive()
    }
}

impl FbankExtractor {
    pub fn new(cfg: &FrontendConfig) -> Result<Self, FrontendError> {
        cfg.validate()?;
        let len = cfg.frame_len_samples();
        let n_fft = len.next_power_of_two();
        let window = (0..len).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos()).collect();
        let fft = FftPlanner::new().plan_fft_forward(n_fft);
        Ok(Self { cfg: cfg.clone(), window, fft, n_fft, filters: mel_filters(cfg, n_fft) })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    /// Center frequency of each mel filter in Hz.
    pub fn center_frequencies(&self) -> Vec<f64> {
        let (lo, hi) = (hz_to_mel(self.cfg.fmin_hz), hz_to_mel(self.cfg.fmax_hz));
        let step = (hi - lo) / (self.cfg.n_mels + 1) as f64;
        (1..=self.cfg.n_mels).map(|j| mel_to_hz(lo + step * j as f64)).collect()
    }

    pub fn filters(&self) -> &[Vec<f64>] {
        &self.filters
    }

    pub fn compute(&self, clip: &AudioClip) -> Result<FeatureMatrix, FrontendError> {
        let cfg = &self.cfg;
        if clip.sample_rate_hz != cfg.sample_rate_hz {
            return Err(FrontendError::RateMismatch { expected: cfg.sample_rate_hz, found: clip.sample_rate_hz });
        }
        let len = cfg.frame_len_samples();
        let shift = cfg.frame_shift_samples();
        let n_frames = cfg.n_frames(clip.samples.len());
        if n_frames == 0 {
            return Err(FrontendError::TooShort { samples: clip.samples.len(), frame_len: len });
        }
        let n_bins = self.n_fft / 2 + 1;
        let mut buf = vec![Complex::new(0.0, 0.0); self.n_fft];
        let mut power = vec![0.0; n_bins];
        let mut values = Vec::with_capacity(n_frames * cfg.n_mels);
        for t in 0..n_frames {
            let frame = &clip.samples[t * shift..t * shift + len];
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for n in 0..len {
                // first sample of the frame uses itself as predecessor
                let prev = if n == 0 { frame[0] } else { frame[n - 1] };
                buf[n].re = (frame[n] - cfg.preemphasis * prev) * self.window[n];
            }
            self.fft.process(&mut buf);
            power.iter_mut().zip(&buf).for_each(|(p, c)| *p = c.norm_sqr());
            for filt in &self.filters {
                let e: f64 = filt.iter().zip(&power).map(|(w, p)| w * p).sum();
                values.push(e.max(cfg.log_floor).ln());
            }
        }
        FeatureMatrix::new(n_frames, cfg.n_mels, values)
    }
}

/// Triangular filters equally spaced on the mel axis between fmin and fmax.
fn mel_filters(cfg: &FrontendConfig, n_fft: usize) -> Vec<Vec<f64>> {
    let n_bins = n_fft / 2 + 1;
    let (lo, hi) = (hz_to_mel(cfg.fmin_hz), hz_to_mel(cfg.fmax_hz));
    let step = (hi - lo) / (cfg.n_mels + 1) as f64;
    let bin_mel: Vec<f64> =
        (0..n_bins).map(|k| hz_to_mel(k as f64 * cfg.sample_rate_hz as f64 / n_fft as f64)).collect();
    (0..cfg.n_mels)
        .map(|j| {
            let (left, center, right) = (lo + step * j as f64, lo + step * (j + 1) as f64, lo + step * (j + 2) as f64);
            bin_mel
                .iter()
                .map(|&m| {
                    if m > left && m <= center {
                        (m - left) / (center - left)
                    } else if m > center && m < right {
                        (right - m) / (right - center)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn compute_fbank(clip: &AudioClip, cfg: &FrontendConfig) -> Result<FeatureMatrix, FrontendError> {
    FbankExtractor::new(cfg)?.compute(clip)
}
