use crate::frontend::SpliceSpec;

use super::NetError;

/// One convolutional layer followed by max-pooling along frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub maps: usize,
    pub patch_time: usize,
    pub patch_freq: usize,
    pub pool_freq: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnormSpec {
    pub p: f64,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtDnnConfig {
    pub input_mels: usize,
    pub splice: SpliceSpec,
    pub conv1: ConvSpec,
    pub conv2: ConvSpec,
    pub bottleneck_dim: usize,
    pub td1_offsets: Vec<i64>,
    pub td2_offsets: Vec<i64>,
    /// Affine output width of each time-delay layer (the P-norm input).
    pub td_dim: usize,
    pub pnorm: PnormSpec,
    pub feature_dim: usize,
    pub n_speakers: usize,
}

impl Default for CtDnnConfig {
    fn default() -> Self {
        Self {
            input_mels: 40,
            splice: SpliceSpec::default(),
            conv1: ConvSpec { maps: 64, patch_time: 3, patch_freq: 5, pool_freq: 2 },
            conv2: ConvSpec { maps: 128, patch_time: 3, patch_freq: 5, pool_freq: 2 },
            bottleneck_dim: 512,
            td1_offsets: vec![-2, 0, 2],
            td2_offsets: vec![-4, 0, 4],
            td_dim: 1600,
            pnorm: PnormSpec { p: 2.0, group: 4 },
            feature_dim: 400,
            n_speakers: 5000,
        }
    }
}

/// Derived layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerDims {
    /// Input image: time rows, freq columns.
    pub in_time: usize,
    pub in_freq: usize,
    /// conv1 output before pooling, and pooled width.
    pub c1_time: usize,
    pub c1_freq: usize,
    pub p1_freq: usize,
    pub c2_time: usize,
    pub c2_freq: usize,
    pub p2_freq: usize,
    /// Flattened conv output per frame.
    pub flat: usize,
    pub bottleneck: usize,
    pub td1_in: usize,
    pub td_dim: usize,
    pub pnorm_out: usize,
    pub td2_in: usize,
    pub feature: usize,
    pub n_speakers: usize,
}

impl CtDnnConfig {
    /// Default architecture with a given number of output speakers.
    pub fn with_speakers(n_speakers: usize) -> Self {
        Self { n_speakers, ..Self::default() }
    }

    pub fn input_dim(&self) -> usize {
        self.splice.width() * self.input_mels
    }

    pub fn dims(&self) -> Result<LayerDims, NetError> {
        let bad = |m: String| Err(NetError::InvalidConfig(m));
        let positive = [
            ("input_mels", self.input_mels),
            ("conv1.maps", self.conv1.maps),
            ("conv2.maps", self.conv2.maps),
            ("conv1.patch", self.conv1.patch_time * self.conv1.patch_freq),
            ("conv2.patch", self.conv2.patch_time * self.conv2.patch_freq),
            ("conv1.pool_freq", self.conv1.pool_freq),
            ("conv2.pool_freq", self.conv2.pool_freq),
            ("bottleneck_dim", self.bottleneck_dim),
            ("td_dim", self.td_dim),
            ("pnorm.group", self.pnorm.group),
            ("feature_dim", self.feature_dim),
            ("n_speakers", self.n_speakers),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return bad(format!("{name} must be positive"));
        }
        if self.td1_offsets.is_empty() || self.td2_offsets.is_empty() {
            return bad("time-delay offsets must be nonempty".into());
        }
        if !(self.pnorm.p >= 1.0 && self.pnorm.p.is_finite()) {
            return bad(format!("pnorm.p must be >= 1, got {}", self.pnorm.p));
        }
        if self.td_dim % self.pnorm.group != 0 {
            return bad(format!("td_dim {} not divisible by P-norm group {}", self.td_dim, self.pnorm.group));
        }
        let conv = |t: usize, f: usize, c: &ConvSpec, which: &str| -> Result<(usize, usize, usize), NetError> {
            if c.patch_time > t || c.patch_freq > f {
                return Err(NetError::InvalidConfig(format!("{which} patch larger than its {t}x{f} input")));
            }
            let (ct, cf) = (t - c.patch_time + 1, f - c.patch_freq + 1);
            let pf = cf / c.pool_freq;
            if pf == 0 {
                return Err(NetError::InvalidConfig(format!("{which} pooling leaves no frequency bins")));
            }
            Ok((ct, cf, pf))
        };
        let (in_time, in_freq) = (self.splice.width(), self.input_mels);
        let (c1_time, c1_freq, p1_freq) = conv(in_time, in_freq, &self.conv1, "conv1")?;
        let (c2_time, c2_freq, p2_freq) = conv(c1_time, p1_freq, &self.conv2, "conv2")?;
        let pnorm_out = self.td_dim / self.pnorm.group;
        Ok(LayerDims {
            in_time,
            in_freq,
            c1_time,
            c1_freq,
            p1_freq,
            c2_time,
            c2_freq,
            p2_freq,
            flat: c2_time * p2_freq * self.conv2.maps,
            bottleneck: self.bottleneck_dim,
            td1_in: self.td1_offsets.len() * self.bottleneck_dim,
            td_dim: self.td_dim,
            pnorm_out,
            td2_in: self.td2_offsets.len() * pnorm_out,
            feature: self.feature_dim,
            n_speakers: self.n_speakers,
        })
    }

    pub fn validate(&self) -> Result<(), NetError> {
        self.dims().map(|_| ())
    }

    /// Frames of input context seen by one output frame, centre included.
    ///
    /// The convolutions act inside the spliced window and add no context of
    /// their own.
    pub fn receptive_field_span(&self) -> usize {
        let reach = |offs: &[i64]| {
            let back = offs.iter().map(|&o| (-o).max(0)).max().unwrap_or(0) as usize;
            let ahead = offs.iter().map(|&o| o.max(0)).max().unwrap_or(0) as usize;
            (back, ahead)
        };
        let (b1, a1) = reach(&self.td1_offsets);
        let (b2, a2) = reach(&self.td2_offsets);
        1 + self.splice.left + b1 + b2 + self.splice.right + a1 + a2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_dims() {
        let d = CtDnnConfig::with_speakers(10).dims().unwrap();
        assert_eq!((d.in_time, d.in_freq), (9, 40));
        assert_eq!((d.c1_time, d.c1_freq, d.p1_freq), (7, 36, 18));
        assert_eq!((d.c2_time, d.c2_freq, d.p2_freq), (5, 14, 7));
        assert_eq!(d.flat, 5 * 7 * 128);
        assert_eq!(d.td1_in, 3 * 512);
        assert_eq!(d.pnorm_out, 400);
        assert_eq!(d.td2_in, 1200);
    }

    #[test]
    fn span_cases() {
        let mut c = CtDnnConfig::default();
        assert_eq!(c.receptive_field_span(), 21);
        c.td1_offsets = vec![0];
        c.td2_offsets = vec![0];
        assert_eq!(c.receptive_field_span(), 9);
        c.splice = SpliceSpec { left: 0, right: 0 };
        assert_eq!(c.receptive_field_span(), 1);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = CtDnnConfig::with_speakers(3);
        c.td_dim = 1602;
        assert!(c.validate().is_err());
        let mut c = CtDnnConfig::with_speakers(3);
        c.input_mels = 8;
        assert!(c.validate().is_err());
        let mut c = CtDnnConfig::with_speakers(3);
        c.n_speakers = 0;
        assert!(c.validate().is_err());
    }
}
