use std::fmt;
use std::str::FromStr;

use super::{apply_lda, cosine_score, fit_lda, fit_plda, length_normalize, mean_vector, BackendError, DVector, LdaTransform, PldaScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScorerKind {
    #[default]
    Cosine,
    LdaCosine,
    Plda,
}

impl ScorerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScorerKind::Cosine => "cosine",
            ScorerKind::LdaCosine => "lda",
            ScorerKind::Plda => "plda",
        }
    }
}

impl fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScorerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(ScorerKind::Cosine),
            "lda" | "lda-cosine" => Ok(ScorerKind::LdaCosine),
            "plda" => Ok(ScorerKind::Plda),
            _ => Err(format!("unknown scorer `{s}` (expected cosine|lda|plda)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendOptions {
    pub kind: ScorerKind,
    pub length_norm: bool,
    /// LDA output dimension; clamped to `n_classes − 1` by [`Backend::fit`].
    pub lda_dim: usize,
    /// Project with LDA before fitting PLDA.
    pub plda_use_lda: bool,
    pub plda_iters: usize,
}

impl Default for BackendOptions {
    fn default() -> Self {
        Self { kind: ScorerKind::Cosine, length_norm: true, lda_dim: 150, plda_use_lda: true, plda_iters: 10 }
    }
}

/// A fitted scoring backend. Enrollment vectors are embedded, averaged and
/// re-normalized before scoring against a single embedded test vector.
#[derive(Debug, Clone)]
pub struct Backend {
    kind: ScorerKind,
    length_norm: bool,
    lda: Option<LdaTransform>,
    plda: Option<PldaScorer>,
    /// Dimension actually used for LDA, after clamping.
    pub lda_dim: Option<usize>,
    pub plda_log_likelihoods: Vec<f64>,
}

impl Backend {
    /// Cosine scoring needs no training data.
    pub fn cosine(length_norm: bool) -> Self {
        Self { kind: ScorerKind::Cosine, length_norm, lda: None, plda: None, lda_dim: None, plda_log_likelihoods: Vec::new() }
    }

    pub fn fit(opts: &BackendOptions, train: &[DVector]) -> Result<Self, BackendError> {
        let mut b = Self::cosine(opts.length_norm);
        b.kind = opts.kind;
        if opts.kind == ScorerKind::Cosine {
            return Ok(b);
        }
        let mut data: Vec<DVector> = train
            .iter()
            .map(|v| Ok(DVector { values: b.normalize(&v.values)?, ..v.clone() }))
            .collect::<Result<_, BackendError>>()?;
        if opts.kind == ScorerKind::LdaCosine || opts.plda_use_lda {
            let n_classes = data.iter().filter_map(|v| v.spk_id.as_deref()).collect::<std::collections::BTreeSet<_>>().len();
            let dim = data.first().map_or(0, DVector::dim);
            let k = opts.lda_dim.min(n_classes.saturating_sub(1)).min(dim);
            let lda = fit_lda(&data, k)?;
            for v in &mut data {
                v.values = b.normalize(&apply_lda(&lda, &v.values)?)?;
            }
            b.lda_dim = Some(k);
            b.lda = Some(lda);
        }
        if opts.kind == ScorerKind::Plda {
            let fit = fit_plda(&data, opts.plda_iters)?;
            b.plda = Some(PldaScorer::new(&fit.model)?);
            b.plda_log_likelihoods = fit.log_likelihoods;
        }
        Ok(b)
    }

    pub fn kind(&self) -> ScorerKind {
        self.kind
    }

    fn normalize(&self, v: &[f64]) -> Result<Vec<f64>, BackendError> {
        if self.length_norm {
            length_normalize(v)
        } else {
            Ok(v.to_vec())
        }
    }

    /// Maps a raw d-vector into the scoring space.
    pub fn embed(&self, v: &[f64]) -> Result<Vec<f64>, BackendError> {
        let v = self.normalize(v)?;
        match &self.lda {
            Some(lda) => self.normalize(&apply_lda(lda, &v)?),
            None => Ok(v),
        }
    }

    pub fn enroll<V: AsRef<[f64]>>(&self, vs: &[V]) -> Result<Vec<f64>, BackendError> {
        let embedded = vs.iter().map(|v| self.embed(v.as_ref())).collect::<Result<Vec<_>, _>>()?;
        self.normalize(&mean_vector(&embedded)?)
    }

    /// Scores an enrollment embedding from [`Backend::enroll`] against a raw
    /// test d-vector.
    pub fn score(&self, enrolled: &[f64], test: &[f64]) -> Result<f64, BackendError> {
        let t = self.embed(test)?;
        match &self.plda {
            Some(p) => p.score(enrolled, &t),
            None => cosine_score(enrolled, &t),
        }
    }
}
