//! Log mel-filterbank (Fbank) features, mean normalization and splicing.

mod dump;
mod fbank;
mod input;

pub use dump::{read_feature_dump, write_feature_dump, DumpHeader, NumberFormat};
pub use fbank::{compute_fbank, hz_to_mel, mel_to_hz, FbankExtractor, FrontendConfig};
pub use input::InputPipeline;

use std::path::PathBuf;

/// `T x D` matrix of frame features, row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_frames: usize,
    dim: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n_frames: usize, dim: usize, values: Vec<f64>) -> Result<Self, FrontendError> {
        if values.len() != n_frames * dim {
            return Err(FrontendError::Shape { expected: n_frames * dim, found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FrontendError::NonFinite { frame: i / dim.max(1) });
        }
        Ok(Self { n_frames, dim, values })
    }

    pub fn zeros(n_frames: usize, dim: usize) -> Self {
        Self { n_frames, dim, values: vec![0.0; n_frames * dim] }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, FrontendError> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(FrontendError::Shape { expected: dim, found: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, values)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim.max(1)).take(self.n_frames)
    }

    /// Column means over frames.
    pub fn mean_row(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for r in self.rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= self.n_frames as f64);
        mean
    }
}

/// Per-utterance mean normalization: subtracts each column's mean over frames.
pub fn apply_cmvn(features: &FeatureMatrix) -> Result<FeatureMatrix, FrontendError> {
    if features.n_frames == 0 {
        return Err(FrontendError::Empty);
    }
    let mean = features.mean_row();
    let mut out = features.clone();
    for r in out.values.chunks_exact_mut(out.dim) {
        r.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
    Ok(out)
}

/// Context window around each frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpliceSpec {
    pub left: usize,
    pub right: usize,
}

impl Default for SpliceSpec {
    fn default() -> Self {
        Self { left: 4, right: 4 }
    }
}

impl SpliceSpec {
    pub fn width(&self) -> usize {
        self.left + self.right + 1
    }
}

/// Concatenates frames `t-left ..= t+right` per row, replicating edge frames.
pub fn splice(features: &FeatureMatrix, spec: SpliceSpec) -> FeatureMatrix {
    let (t_len, d) = (features.n_frames, features.dim);
    let width = spec.width();
    let mut values = Vec::with_capacity(t_len * width * d);
    for t in 0..t_len {
        for k in 0..width {
            let src = (t + k).saturating_sub(spec.left).min(t_len - 1);
            values.extend_from_slice(features.row(src));
        }
    }
    FeatureMatrix { n_frames: t_len, dim: width * d, values }
}

#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error("clip has {samples} samples, fewer than one {frame_len}-sample frame")]
    TooShort { samples: usize, frame_len: usize },
    #[error("sample rate {found} Hz does not match the configured {expected} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("invalid frontend config: {0}")]
    InvalidConfig(String),
    #[error("feature matrix has no frames")]
    Empty,
    #[error("value count mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("non-finite feature value in frame {frame}")]
    NonFinite { frame: usize },
    #[error("feature dump line {line}: {reason}")]
    Dump { line: usize, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(t: usize, d: usize) -> FeatureMatrix {
        FeatureMatrix::new(t, d, (0..t * d).map(|i| i as f64 * 0.5 - 3.0).collect()).unwrap()
    }

    #[test]
    fn cmvn_zero_means_and_single_frame() {
        let out = apply_cmvn(&ramp(7, 5)).unwrap();
        assert!(out.mean_row().iter().all(|m| m.abs() < 1e-9));
        let one = apply_cmvn(&ramp(1, 4)).unwrap();
        assert!(one.values().iter().all(|&v| v == 0.0));
        assert!(matches!(apply_cmvn(&FeatureMatrix::zeros(0, 3)), Err(FrontendError::Empty)));
    }

    #[test]
    fn cmvn_shift_invariant() {
        let a = ramp(6, 3);
        let shifted = FeatureMatrix::new(6, 3, a.values().iter().map(|v| v + 4.25).collect()).unwrap();
        let (x, y) = (apply_cmvn(&a).unwrap(), apply_cmvn(&shifted).unwrap());
        for (p, q) in x.values().iter().zip(y.values()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn splice_shapes_and_edges() {
        let f = ramp(10, 40);
        let s = splice(&f, SpliceSpec::default());
        assert_eq!((s.n_frames(), s.dim()), (10, 360));
        let single = splice(&ramp(1, 3), SpliceSpec::default());
        assert_eq!(single.dim(), 27);
        for k in 0..9 {
            assert_eq!(&single.row(0)[k * 3..k * 3 + 3], ramp(1, 3).row(0));
        }
        assert_eq!(splice(&f, SpliceSpec { left: 0, right: 0 }), f);
        // first row, first block is frame 0 replicated; last block of row 9 is frame 9
        assert_eq!(&s.row(0)[..40], f.row(0));
        assert_eq!(&s.row(9)[320..], f.row(9));
        assert_eq!(&s.row(5)[..40], f.row(1));
    }

    proptest! {
        #[test]
        fn splice_center_block_recovers_input(t in 1usize..20, d in 1usize..6, left in 0usize..5, right in 0usize..5) {
            let f = ramp(t, d);
            let s = splice(&f, SpliceSpec { left, right });
            for i in 0..t {
                prop_assert_eq!(&s.row(i)[left * d..(left + 1) * d], f.row(i));
            }
        }
    }
}
