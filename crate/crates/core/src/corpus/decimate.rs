use std::f64::consts::PI;

use super::{AudioClip, CorpusError};

pub const DECIMATION_TAPS: usize = 63;

/// Cutoff of the anti-alias filter as a fraction of the output Nyquist rate.
const CUTOFF_FRACTION: f64 = 0.9;

/// Hamming-windowed sinc low-pass with unit DC gain.
///
/// `cutoff` is in cycles per sample of the input rate (0.5 = input Nyquist).
pub fn lowpass_taps(n_taps: usize, cutoff: f64) -> Vec<f64> {
    let mid = (n_taps - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = (0..n_taps)
        .map(|n| {
            let x = n as f64 - mid;
            let sinc = if x == 0.0 { 2.0 * cutoff } else { (2.0 * PI * cutoff * x).sin() / (PI * x) };
            let window = 0.54 - 0.46 * (2.0 * PI * n as f64 / (n_taps - 1) as f64).cos();
            sinc * window
        })
        .collect();
    let gain: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= gain);
    taps
}

/// Halves the sample rate: zero-phase low-pass, then keeps every even sample.
///
/// Output length is `ceil(n / 2)`.
pub fn decimate_2x(clip: &AudioClip) -> Result<AudioClip, CorpusError> {
    if clip.sample_rate_hz % 2 != 0 {
        return Err(CorpusError::OddRate(clip.sample_rate_hz));
    }
    // output Nyquist is a quarter of the input rate
    let taps = lowpass_taps(DECIMATION_TAPS, 0.25 * CUTOFF_FRACTION);
    let half = (DECIMATION_TAPS / 2) as isize;
    let x = &clip.samples;
    let n = x.len() as isize;
    let samples = (0..n)
        .step_by(2)
        .map(|i| {
            taps.iter()
                .enumerate()
                .filter_map(|(k, h)| {
                    let j = i + half - k as isize;
                    (0..n).contains(&j).then(|| h * x[j as usize])
                })
                .sum()
        })
        .collect();
    Ok(AudioClip::new(samples, clip.sample_rate_hz / 2))
}
