use super::{apply_cmvn, splice, FbankExtractor, FeatureMatrix, FrontendConfig, FrontendError, SpliceSpec};
use crate::corpus::{decimate_2x, AudioClip};

/// Audio → network input: optional 2× decimation, Fbank, optional mean
/// normalization, splicing.
#[derive(Debug, Clone)]
pub struct InputPipeline {
    extractor: FbankExtractor,
    pub cmvn: bool,
    pub splice: SpliceSpec,
}

impl InputPipeline {
    pub fn new(cfg: &FrontendConfig, cmvn: bool, splice: SpliceSpec) -> Result<Self, FrontendError> {
        Ok(Self { extractor: FbankExtractor::new(cfg)?, cmvn, splice })
    }

    pub fn config(&self) -> &FrontendConfig {
        self.extractor.config()
    }

    /// Fbank (and CMVN if enabled) without splicing. Clips at twice the
    /// configured rate are decimated first.
    pub fn fbank(&self, clip: &AudioClip) -> Result<FeatureMatrix, FrontendError> {
        let rate = self.config().sample_rate_hz;
        let feats = if clip.sample_rate_hz == 2 * rate {
            let down = decimate_2x(clip).map_err(|e| FrontendError::InvalidConfig(e.to_string()))?;
            self.extractor.compute(&down)?
        } else {
            self.extractor.compute(clip)?
        };
        if self.cmvn {
            apply_cmvn(&feats)
        } else {
            Ok(feats)
        }
    }

    pub fn prepare(&self, clip: &AudioClip) -> Result<FeatureMatrix, FrontendError> {
        Ok(splice(&self.fbank(clip)?, self.splice))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(rate: u32, n: usize) -> AudioClip {
        AudioClip::new((0..n).map(|i| (i as f64 * 0.3).sin() * 0.2).collect(), rate)
    }

    #[test]
    fn shapes_and_rates() {
        let p = InputPipeline::new(&FrontendConfig::default(), true, SpliceSpec::default()).unwrap();
        let x = p.prepare(&tone(8000, 8000)).unwrap();
        assert_eq!((x.n_frames(), x.dim()), (98, 360));
        let y = p.prepare(&tone(16000, 16000)).unwrap();
        assert_eq!((y.n_frames(), y.dim()), (98, 360));
        assert!(matches!(p.prepare(&tone(11025, 11025)), Err(FrontendError::RateMismatch { .. })));
    }

    #[test]
    fn cmvn_toggle() {
        let clip = tone(8000, 4000);
        let on = InputPipeline::new(&FrontendConfig::default(), true, SpliceSpec::default()).unwrap();
        let off = InputPipeline::new(&FrontendConfig::default(), false, SpliceSpec::default()).unwrap();
        assert!(on.fbank(&clip).unwrap().mean_row().iter().all(|m| m.abs() < 1e-9));
        assert!(off.fbank(&clip).unwrap().mean_row().iter().any(|m| m.abs() > 1.0));
    }
}
