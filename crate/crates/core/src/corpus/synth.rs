use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AudioClip, CorpusError, Event, ManifestEntry};
use crate::rng::derive_seed;

/// Parameters of a synthetic trivial-event corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_speakers: usize,
    pub utts_per_speaker_per_event: usize,
    pub events: Vec<Event>,
    pub duration_range_s: (f64, f64),
    pub sample_rate_hz: u32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_speakers: 20,
            utts_per_speaker_per_event: 8,
            events: Event::TRIVIAL.to_vec(),
            duration_range_s: (0.2, 0.4),
            sample_rate_hz: 16000,
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let (lo, hi) = self.duration_range_s;
        let bad = |m: &str| Err(CorpusError::InvalidSpec(m.to_string()));
        if self.n_speakers == 0 {
            return bad("n_speakers must be positive");
        }
        if self.utts_per_speaker_per_event == 0 {
            return bad("utts_per_speaker_per_event must be positive");
        }
        if self.events.is_empty() || self.events.contains(&Event::Other) {
            return bad("events must be a nonempty subset of {cough, laugh, wei}");
        }
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("duration range must satisfy 0 < min <= max");
        }
        if self.sample_rate_hz < 8000 {
            return bad("sample rate must be at least 8000 Hz");
        }
        // every rendered length must land inside the range
        let fs = self.sample_rate_hz as f64;
        if (lo * fs).ceil() > (hi * fs).floor() {
            return bad("duration range narrower than one sample");
        }
        Ok(())
    }
}

/// Per-speaker identity: four two-pole resonators (eight poles) and a pitch.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerVoice {
    /// (center Hz, bandwidth Hz) per resonator.
    pub resonators: [(f64, f64); 4],
    pub pitch_hz: f64,
}

const FORMANT_BANDS: [(f64, f64); 4] = [(300.0, 850.0), (900.0, 1900.0), (2000.0, 2800.0), (2900.0, 3500.0)];

impl SpeakerVoice {
    pub fn draw(rng: &mut impl Rng) -> Self {
        let mut resonators = [(0.0, 0.0); 4];
        for (r, &(lo, hi)) in resonators.iter_mut().zip(&FORMANT_BANDS) {
            *r = (rng.random_range(lo..hi), rng.random_range(60.0..160.0));
        }
        Self { resonators, pitch_hz: rng.random_range(90.0..260.0) }
    }

    /// Cascade of the four resonators applied in place.
    pub fn filter(&self, x: &mut [f64], sample_rate_hz: u32) {
        let fs = sample_rate_hz as f64;
        for &(freq, bw) in &self.resonators {
            let r = (-PI * bw / fs).exp();
            let a1 = 2.0 * r * (2.0 * PI * freq / fs).cos();
            let a2 = -r * r;
            let g = 1.0 - r;
            let (mut y1, mut y2) = (0.0, 0.0);
            for v in x.iter_mut() {
                let y = g * *v + a1 * y1 + a2 * y2;
                y2 = y1;
                y1 = y;
                *v = y;
            }
        }
    }
}

/// Glottal-like pulse train following an instantaneous pitch contour.
fn pulse_train(pitch: impl Fn(usize) -> f64, n: usize, fs: f64) -> Vec<f64> {
    let mut phase = 0.0;
    let mut lp = 0.0;
    (0..n)
        .map(|i| {
            phase += pitch(i) / fs;
            let pulse = if phase >= 1.0 {
                phase -= 1.0;
                1.0
            } else {
                0.0
            };
            // spectral tilt
            lp = pulse + 0.6 * lp;
            lp
        })
        .collect()
}

fn render(voice: &SpeakerVoice, event: Event, n: usize, fs: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let fsf = fs as f64;
    let pitch = voice.pitch_hz * (1.0 + rng.random_range(-0.05..0.05));
    let dur = n as f64 / fsf;
    let t = |i: usize| i as f64 / fsf;
    let mut x: Vec<f64> = match event {
        Event::Cough => {
            let decay = dur / 3.0;
            (0..n)
                .map(|i| {
                    let env = (1.0 - (-t(i) / 0.004).exp()) * (-t(i) / decay).exp();
                    env * rng.random_range(-1.0..1.0)
                })
                .collect()
        }
        Event::Laugh => {
            let rate = rng.random_range(4.0..6.0);
            let src = pulse_train(|_| pitch * 1.3, n, fsf);
            src.into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let am = 0.5 * (1.0 - (2.0 * PI * rate * t(i)).cos());
                    am * (p + 0.3 * rng.random_range(-1.0..1.0))
                })
                .collect()
        }
        Event::Wei => {
            let src = pulse_train(|i| pitch * (1.15 - 0.25 * i as f64 / n as f64), n, fsf);
            let ramp = (0.015 * fsf) as usize;
            src.into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let edge = i.min(n - 1 - i);
                    if edge < ramp { p * edge as f64 / ramp as f64 } else { p }
                })
                .collect()
        }
        Event::Other => unreachable!("validated"),
    };
    voice.filter(&mut x, fs);
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let target = 0.6 * 10f64.powf(rng.random_range(-6.0..0.0) / 20.0);
    if peak > 0.0 {
        x.iter_mut().for_each(|v| *v *= target / peak);
    }
    x
}

/// Deterministic synthetic corpus: clips and matching manifest entries.
///
/// Utterance ids are `S###-event-##`, paths are `<utt_id>.wav` relative to
/// wherever the caller stores the clips.
pub fn synth_corpus(spec: &SynthSpec) -> Result<(Vec<AudioClip>, Vec<ManifestEntry>), CorpusError> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let (lo, hi) = spec.duration_range_s;
    let (min_n, max_n) = ((lo * fs as f64).ceil() as usize, (hi * fs as f64).floor() as usize);
    let mut voice_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, "synth.voices"));
    let voices: Vec<SpeakerVoice> = (0..spec.n_speakers).map(|_| SpeakerVoice::draw(&mut voice_rng)).collect();

    let mut clips = Vec::new();
    let mut entries = Vec::new();
    for (s, voice) in voices.iter().enumerate() {
        let spk_id = format!("S{:03}", s + 1);
        for &event in &spec.events {
            for k in 0..spec.utts_per_speaker_per_event {
                let utt_id = format!("{spk_id}-{event}-{:02}", k + 1);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &utt_id));
                let n = rng.random_range(min_n..=max_n);
                let samples = render(voice, event, n, fs, &mut rng);
                entries.push(ManifestEntry {
                    utt_id: utt_id.clone(),
                    spk_id: spk_id.clone(),
                    event,
                    path: PathBuf::from(format!("{utt_id}.wav")),
                    duration_s: n as f64 / fs as f64,
                });
                clips.push(AudioClip::new(samples, fs));
            }
        }
    }
    Ok((clips, entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthSpec {
        SynthSpec { n_speakers: 3, utts_per_speaker_per_event: 2, seed, ..SynthSpec::default() }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_corpus(&small(11)).unwrap();
        let b = synth_corpus(&small(11)).unwrap();
        assert_eq!(a, b);
        let c = synth_corpus(&small(12)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn default_shape_counts() {
        let spec = SynthSpec::default();
        let (clips, entries) = synth_corpus(&spec).unwrap();
        assert_eq!(entries.len(), 480);
        assert_eq!(clips.len(), 480);
        let spks: std::collections::BTreeSet<_> = entries.iter().map(|e| &e.spk_id).collect();
        assert_eq!(spks.len(), 20);
        for (c, e) in clips.iter().zip(&entries) {
            assert!(e.duration_s >= 0.2 && e.duration_s <= 0.4);
            assert_eq!(c.duration_s(), e.duration_s);
            assert!(c.samples.iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn invalid_specs() {
        let mut s = small(1);
        s.duration_range_s = (0.3, 0.2);
        assert!(matches!(synth_corpus(&s), Err(CorpusError::InvalidSpec(_))));
        let mut s = small(1);
        s.duration_range_s = (0.0, 0.2);
        assert!(synth_corpus(&s).is_err());
        let mut s = small(1);
        s.events.clear();
        assert!(synth_corpus(&s).is_err());
    }
}
