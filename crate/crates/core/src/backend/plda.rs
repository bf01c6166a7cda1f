use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector as Col, Dyn};

use super::lda::group_by_speaker;
use super::{BackendError, DVector};

/// Two-covariance model: speaker mean `y ~ N(mu, Σb)`, observation
/// `x ~ N(y, Σw)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PldaModel {
    pub mu: Vec<f64>,
    pub between_cov: DMatrix<f64>,
    pub within_cov: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct PldaFit {
    pub model: PldaModel,
    /// Total log-likelihood of the training data under the initial model and
    /// after each EM iteration.
    pub log_likelihoods: Vec<f64>,
}

impl PldaModel {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

struct SpeakerStats {
    n: usize,
    mean: Col<f64>,
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn mean_diag(m: &DMatrix<f64>) -> f64 {
    m.trace() / m.nrows() as f64
}

fn chol(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    m.clone().cholesky()
}

fn log_det(c: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>()
}

/// Makes `within` positive definite, adding a relative ridge when needed.
fn regularize(within: &mut DMatrix<f64>, between: &DMatrix<f64>) -> Result<(), BackendError> {
    if chol(within).is_some() {
        return Ok(());
    }
    let base = if mean_diag(within) > 0.0 { mean_diag(within) } else { mean_diag(between) };
    let ridge = 1e-6 * base;
    for i in 0..within.nrows() {
        within[(i, i)] += ridge;
    }
    match chol(within) {
        Some(_) if ridge > 0.0 => Ok(()),
        _ => Err(BackendError::SingularCovariance("PLDA within-speaker")),
    }
}

/// Marginal log-likelihood of one speaker's observations.
pub fn speaker_log_likelihood(model: &PldaModel, obs: &[&[f64]]) -> Result<f64, BackendError> {
    let d = model.dim();
    let n = obs.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut mean = Col::zeros(d);
    for x in obs {
        if x.len() != d {
            return Err(BackendError::DimMismatch { expected: d, found: x.len() });
        }
        mean += Col::from_column_slice(x);
    }
    mean /= n as f64;
    let mut scatter = DMatrix::zeros(d, d);
    for x in obs {
        let dev = Col::from_column_slice(x) - &mean;
        scatter.ger(1.0, &dev, &dev, 1.0);
    }
    let cw = chol(&model.within_cov).ok_or(BackendError::SingularCovariance("PLDA within-speaker"))?;
    let mu = Col::from_column_slice(&model.mu);
    Ok(log_lik_terms(&cw, &model.between_cov, &model.within_cov, &mu, n, &mean, &scatter))
}

fn log_lik_terms(
    cw: &Cholesky<f64, Dyn>,
    between: &DMatrix<f64>,
    within: &DMatrix<f64>,
    mu: &Col<f64>,
    n: usize,
    mean: &Col<f64>,
    scatter: &DMatrix<f64>,
) -> f64 {
    let d = mu.len() as f64;
    let nf = n as f64;
    let tot = within + between * nf;
    let ct = chol(&tot).expect("Σw + nΣb is PD when Σw is");
    let dev = mean - mu;
    let quad_mean = dev.dot(&ct.solve(&dev));
    let quad_dev = cw.solve(scatter).trace();
    -0.5 * nf * d * (2.0 * PI).ln() - 0.5 * (nf - 1.0) * log_det(cw) - 0.5 * log_det(&ct) - 0.5 * quad_dev - 0.5 * nf * quad_mean
}

fn total_log_lik(
    model: &PldaModel,
    speakers: &[SpeakerStats],
    scatter_by_n: &BTreeMap<usize, DMatrix<f64>>,
) -> Result<f64, BackendError> {
    let cw = chol(&model.within_cov).ok_or(BackendError::SingularCovariance("PLDA within-speaker"))?;
    let mu = Col::from_column_slice(&model.mu);
    let d = model.dim();
    let zero = DMatrix::zeros(d, d);
    let mut total = 0.0;
    // The deviation term only needs the summed scatter, so it is charged once
    // per group size.
    let mut charged = std::collections::BTreeSet::new();
    for s in speakers {
        let sc = if charged.insert(s.n) { &scatter_by_n[&s.n] } else { &zero };
        total += log_lik_terms(&cw, &model.between_cov, &model.within_cov, &mu, s.n, &s.mean, sc);
    }
    Ok(total)
}

/// Fits the two-covariance model by EM over the speaker means.
pub fn fit_plda(vectors: &[DVector], iters: usize) -> Result<PldaFit, BackendError> {
    let (d, groups) = group_by_speaker(vectors)?;
    let n_total = vectors.len() as f64;
    let mut speakers = Vec::with_capacity(groups.len());
    let mut scatter_by_n: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
    for g in groups.values() {
        let mut mean = Col::zeros(d);
        for x in g {
            mean += Col::from_column_slice(x);
        }
        mean /= g.len() as f64;
        let sc = scatter_by_n.entry(g.len()).or_insert_with(|| DMatrix::zeros(d, d));
        for x in g {
            let dev = Col::from_column_slice(x) - &mean;
            sc.ger(1.0, &dev, &dev, 1.0);
        }
        speakers.push(SpeakerStats { n: g.len(), mean });
    }
    let within_scatter: DMatrix<f64> = scatter_by_n.values().fold(DMatrix::zeros(d, d), |a, s| a + s);

    let n_spk = speakers.len() as f64;
    let mut mu = speakers.iter().fold(Col::zeros(d), |a, s| a + &s.mean) / n_spk;
    let mut between = DMatrix::zeros(d, d);
    for s in &speakers {
        let dev = &s.mean - &mu;
        between.ger(1.0 / n_spk, &dev, &dev, 1.0);
    }
    let mut within = &within_scatter / n_total;
    regularize(&mut within, &between)?;

    let mut model = PldaModel { mu: mu.iter().copied().collect(), between_cov: between.clone(), within_cov: within.clone() };
    let mut log_likelihoods = vec![total_log_lik(&model, &speakers, &scatter_by_n)?];

    for _ in 0..iters {
        // E-step: posterior of each speaker mean, shared per group size.
        let mut post_by_n: BTreeMap<usize, (DMatrix<f64>, DMatrix<f64>)> = BTreeMap::new();
        for s in &speakers {
            post_by_n.entry(s.n).or_insert_with(|| {
                let w = &within / s.n as f64;
                let g = &between + &w;
                let cg = chol(&g).expect("Σb + Σw/n is PD when Σw is");
                let gain = cg.solve(&between).transpose();
                // Equals Σb − K·Σb without the cancellation once Σw is small.
                let mut cov = &w * cg.solve(&between);
                symmetrize(&mut cov);
                (gain, cov)
            });
        }
        let means: Vec<Col<f64>> = speakers
            .iter()
            .map(|s| {
                let gain = &post_by_n[&s.n].0;
                &mu + gain * (&s.mean - &mu)
            })
            .collect();

        // M-step.
        mu = means.iter().fold(Col::zeros(d), |a, m| a + m) / n_spk;
        let mut new_between = DMatrix::zeros(d, d);
        let mut new_within = within_scatter.clone();
        for (s, m) in speakers.iter().zip(&means) {
            let cov = &post_by_n[&s.n].1;
            let dev = m - &mu;
            new_between += cov;
            new_between.ger(1.0, &dev, &dev, 1.0);
            let resid = &s.mean - m;
            new_within += cov * s.n as f64;
            new_within.ger(s.n as f64, &resid, &resid, 1.0);
        }
        between = new_between / n_spk;
        within = new_within / n_total;
        symmetrize(&mut between);
        symmetrize(&mut within);
        regularize(&mut within, &between)?;

        model = PldaModel { mu: mu.iter().copied().collect(), between_cov: between.clone(), within_cov: within.clone() };
        log_likelihoods.push(total_log_lik(&model, &speakers, &scatter_by_n)?);
    }
    Ok(PldaFit { model, log_likelihoods })
}

/// Closed-form verification score, precomputed from a model:
/// `llr = c + ½eᵀQe + ½tᵀQt + eᵀPt` with `e`, `t` centered on `mu`.
#[derive(Debug, Clone)]
pub struct PldaScorer {
    mu: Vec<f64>,
    q: DMatrix<f64>,
    p: DMatrix<f64>,
    constant: f64,
}

impl PldaScorer {
    pub fn new(model: &PldaModel) -> Result<Self, BackendError> {
        let d = model.dim();
        let b = &model.between_cov;
        let t = b + &model.within_cov;
        let ct = chol(&t).ok_or(BackendError::SingularCovariance("PLDA total"))?;
        let t_inv = ct.inverse();
        let mut s = &t - b * &t_inv * b;
        symmetrize(&mut s);
        let cs = chol(&s).ok_or(BackendError::SingularCovariance("PLDA conditional"))?;
        let a = cs.inverse();
        let mut q = &t_inv - &a;
        symmetrize(&mut q);
        let mut p = &t_inv * b * &a;
        symmetrize(&mut p);
        debug_assert_eq!(q.nrows(), d);
        Ok(Self { mu: model.mu.clone(), q, p, constant: 0.5 * log_det(&ct) - 0.5 * log_det(&cs) })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn score(&self, enroll: &[f64], test: &[f64]) -> Result<f64, BackendError> {
        for v in [enroll, test] {
            if v.len() != self.dim() {
                return Err(BackendError::DimMismatch { expected: self.dim(), found: v.len() });
            }
        }
        let e = Col::from_iterator(self.dim(), enroll.iter().zip(&self.mu).map(|(x, m)| x - m));
        let t = Col::from_iterator(self.dim(), test.iter().zip(&self.mu).map(|(x, m)| x - m));
        Ok(self.constant + 0.5 * e.dot(&(&self.q * &e)) + 0.5 * t.dot(&(&self.q * &t)) + e.dot(&(&self.p * &t)))
    }
}

pub fn plda_score(model: &PldaModel, enroll: &[f64], test: &[f64]) -> Result<f64, BackendError> {
    PldaScorer::new(model)?.score(enroll, test)
}
