use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sre_core::backend::{Backend, BackendError, BackendOptions, DVector, ScorerKind};
use sre_core::corpus::{synth_corpus, AudioClip, Event, SynthSpec};
use sre_core::eval::eer_from_scores;
use sre_core::frontend::{FeatureMatrix, FrontendConfig, InputPipeline, SpliceSpec};
use sre_core::rng::derive_seed;

pub const MAX_SPEAKER: usize = 40;
pub const MAX_TAKE: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error("unknown event `{0}`; expected cough, laugh or wei")]
    UnknownEvent(String),
    #[error("{0} out of range")]
    OutOfRange(&'static str),
    #[error(transparent)]
    Corpus(#[from] sre_core::corpus::CorpusError),
    #[error(transparent)]
    Frontend(#[from] sre_core::frontend::FrontendError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Eval(#[from] sre_core::eval::EvalError),
}

pub struct EventSpectrogram {
    pub clip: AudioClip,
    pub features: FeatureMatrix,
}

/// Renders take `take` of `event` by speaker `speaker` (both 0-based) and
/// computes its log-mel filterbank at the default frontend settings.
pub fn event_spectrogram(event: &str, speaker: usize, take: usize, seed: u64, n_mels: usize) -> Result<EventSpectrogram, DemoError> {
    let ev = Event::from_token(event);
    if ev == Event::Other {
        return Err(DemoError::UnknownEvent(event.to_string()));
    }
    if speaker >= MAX_SPEAKER {
        return Err(DemoError::OutOfRange("speaker"));
    }
    if take >= MAX_TAKE {
        return Err(DemoError::OutOfRange("take"));
    }
    let spec = SynthSpec {
        n_speakers: speaker + 1,
        utts_per_speaker_per_event: take + 1,
        events: vec![ev],
        seed,
        ..SynthSpec::default()
    };
    let (mut clips, _) = synth_corpus(&spec)?;
    let clip = clips.swap_remove(speaker * (take + 1) + take);
    let cfg = FrontendConfig { n_mels, ..FrontendConfig::default() };
    let features = InputPipeline::new(&cfg, false, SpliceSpec::default())?.fbank(&clip)?;
    Ok(EventSpectrogram { clip, features })
}

pub fn gaussian_scores(n_target: usize, n_nontarget: usize, separation: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, mean: f64| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + z
            })
            .collect()
    };
    let tar = draw(n_target, separation);
    let non = draw(n_nontarget, 0.0);
    (tar, non)
}

/// Simulated embeddings: speaker means from N(0, I), isotropic within-speaker
/// noise, plus a shared two-dimensional nuisance subspace that cosine scoring
/// cannot discount.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub n_speakers: usize,
    pub utts_per_speaker: usize,
    pub dim: usize,
    pub nuisance_sd: f64,
    pub within_sd: f64,
    pub seed: u64,
}

const ENROLL: usize = 3;

impl Population {
    fn validate(&self) -> Result<(), DemoError> {
        if !(3..=200).contains(&self.n_speakers) {
            return Err(DemoError::OutOfRange("n_speakers"));
        }
        if !(ENROLL + 1..=50).contains(&self.utts_per_speaker) {
            return Err(DemoError::OutOfRange("utts_per_speaker"));
        }
        if !(2..=64).contains(&self.dim) {
            return Err(DemoError::OutOfRange("dim"));
        }
        if !(self.nuisance_sd >= 0.0 && self.within_sd > 0.0) {
            return Err(DemoError::OutOfRange("noise level"));
        }
        Ok(())
    }

    fn nuisance_axes(&self) -> [Vec<f64>; 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, "nuisance"));
        let mut axis = || -> Vec<f64> { (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect() };
        let a = axis();
        let b = axis();
        [a, b]
    }

    /// `utts_per_speaker` vectors per speaker, grouped by speaker.
    pub fn draw(&self, tag: &str) -> Vec<DVector> {
        let axes = self.nuisance_axes();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, tag));
        let mut out = Vec::new();
        for s in 0..self.n_speakers {
            let mean: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            for u in 0..self.utts_per_speaker {
                let mut v = mean.clone();
                for axis in &axes {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    v.iter_mut().zip(axis).for_each(|(x, a)| *x += self.nuisance_sd * z * a);
                }
                for x in v.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x += self.within_sd * z;
                }
                out.push(DVector::new(format!("{tag}{s}-{u}"), v).with_speaker(format!("{tag}{s}")));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub cosine: f64,
    pub lda: f64,
    pub plda: f64,
    pub lda_dim: usize,
}

/// Fits each back-end on one population and reports its EER on a second,
/// disjoint population. Each evaluation speaker enrolls with three vectors
/// and every remaining vector is tested against every enrolled speaker.
pub fn compare_scorers(p: &Population) -> Result<Comparison, DemoError> {
    p.validate()?;
    let train = p.draw("train");
    let test = p.draw("eval");
    let eer = |kind: ScorerKind| -> Result<(f64, Option<usize>), DemoError> {
        let opts = BackendOptions { kind, lda_dim: p.dim, ..BackendOptions::default() };
        let backend = Backend::fit(&opts, &train)?;
        let (tar, non) = trial_scores(&backend, &test, p.utts_per_speaker)?;
        Ok((eer_from_scores(&tar, &non)?.eer, backend.lda_dim))
    };
    let (cosine, _) = eer(ScorerKind::Cosine)?;
    let (lda, k) = eer(ScorerKind::LdaCosine)?;
    let (plda, _) = eer(ScorerKind::Plda)?;
    Ok(Comparison { cosine, lda, plda, lda_dim: k.unwrap_or(p.dim) })
}

fn trial_scores(backend: &Backend, vectors: &[DVector], per_spk: usize) -> Result<(Vec<f64>, Vec<f64>), DemoError> {
    let groups: Vec<&[DVector]> = vectors.chunks(per_spk).collect();
    let models = groups
        .iter()
        .map(|g| backend.enroll(&g[..ENROLL].iter().map(|v| v.values.as_slice()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()?;
    let (mut tar, mut non) = (Vec::new(), Vec::new());
    for (i, model) in models.iter().enumerate() {
        for (j, g) in groups.iter().enumerate() {
            for v in &g[ENROLL..] {
                let s = backend.score(model, &v.values)?;
                if i == j { tar.push(s) } else { non.push(s) }
            }
        }
    }
    Ok((tar, non))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrogram_shape_follows_duration() {
        let s = event_spectrogram("laugh", 2, 1, 7, 40).unwrap();
        assert_eq!(s.features.dim(), 40);
        let n8k = s.clip.samples.len().div_ceil(2);
        assert_eq!(s.features.n_frames(), FrontendConfig::default().n_frames(n8k));
        assert!(s.features.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn spectrogram_matches_the_corpus_clip() {
        let spec = SynthSpec { n_speakers: 2, utts_per_speaker_per_event: 3, events: vec![Event::Wei], seed: 5, ..SynthSpec::default() };
        let (clips, entries) = synth_corpus(&spec).unwrap();
        let s = event_spectrogram("wei", 1, 2, 5, 24).unwrap();
        let idx = entries.iter().position(|e| e.utt_id == "S002-wei-03").unwrap();
        assert_eq!(s.clip, clips[idx]);
    }

    #[test]
    fn spectrogram_rejects_bad_requests() {
        assert!(matches!(event_spectrogram("sneeze", 0, 0, 1, 40), Err(DemoError::UnknownEvent(_))));
        assert!(matches!(event_spectrogram("cough", MAX_SPEAKER, 0, 1, 40), Err(DemoError::OutOfRange(_))));
        assert!(event_spectrogram("cough", 0, 0, 1, 1).is_err());
    }

    #[test]
    fn gaussian_scores_are_seeded() {
        let a = gaussian_scores(10, 20, 2.0, 3);
        assert_eq!(a, gaussian_scores(10, 20, 2.0, 3));
        assert_eq!((a.0.len(), a.1.len()), (10, 20));
    }

    #[test]
    fn wide_separation_drives_eer_to_zero() {
        let (t, n) = gaussian_scores(200, 200, 20.0, 1);
        assert_eq!(eer_from_scores(&t, &n).unwrap().eer, 0.0);
        let (t, n) = gaussian_scores(2000, 2000, 0.0, 1);
        let e = eer_from_scores(&t, &n).unwrap().eer;
        assert!((e - 0.5).abs() < 0.05, "{e}");
    }

    #[test]
    fn trained_backends_discount_the_nuisance_subspace() {
        let p = Population { n_speakers: 30, utts_per_speaker: 8, dim: 10, nuisance_sd: 3.0, within_sd: 0.3, seed: 2 };
        let c = compare_scorers(&p).unwrap();
        assert_eq!(c.lda_dim, 10);
        assert!(c.lda < c.cosine && c.plda < c.cosine, "{c:?}");
        assert_eq!(c, compare_scorers(&p).unwrap());
    }

    #[test]
    fn population_bounds() {
        let p = Population { n_speakers: 2, utts_per_speaker: 8, dim: 10, nuisance_sd: 1.0, within_sd: 0.3, seed: 2 };
        assert!(matches!(compare_scorers(&p), Err(DemoError::OutOfRange("n_speakers"))));
    }
}
