use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{BackendError, DVector};

/// Projection `P·(v − mean)`; rows of `projection` are ordered by decreasing
/// generalized eigenvalue and satisfy `P·Sw·Pᵀ = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaTransform {
    pub mean: Vec<f64>,
    /// Row-major `out_dim × dim`.
    pub projection: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

impl LdaTransform {
    pub fn in_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn out_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let d = self.in_dim();
        &self.projection[k * d..(k + 1) * d]
    }
}

/// Class scatter used by [`fit_lda`]. `within` already includes `ridge` on its
/// diagonal.
#[derive(Debug, Clone)]
pub struct Scatter {
    pub mean: Vec<f64>,
    pub within: DMatrix<f64>,
    pub between: DMatrix<f64>,
    pub ridge: f64,
    pub n_classes: usize,
}

pub(crate) fn group_by_speaker(vectors: &[DVector]) -> Result<(usize, BTreeMap<&str, Vec<&[f64]>>), BackendError> {
    let dim = vectors.first().map_or(0, DVector::dim);
    let mut groups: BTreeMap<&str, Vec<&[f64]>> = BTreeMap::new();
    for v in vectors {
        if v.dim() != dim {
            return Err(BackendError::DimMismatch { expected: dim, found: v.dim() });
        }
        let spk = v.spk_id.as_deref().ok_or_else(|| BackendError::MissingLabel(v.utt_id.clone()))?;
        groups.entry(spk).or_default().push(&v.values);
    }
    if groups.len() < 2 {
        return Err(BackendError::TooFewSamples(format!("{} class(es)", groups.len())));
    }
    if let Some((spk, g)) = groups.iter().find(|(_, g)| g.len() < 2) {
        return Err(BackendError::TooFewSamples(format!("class `{spk}` has {} vector(s)", g.len())));
    }
    Ok((dim, groups))
}

fn mean_of(vs: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    for v in vs {
        m.iter_mut().zip(*v).for_each(|(a, x)| *a += x);
    }
    m.iter_mut().for_each(|a| *a /= vs.len() as f64);
    m
}

fn add_outer(acc: &mut DMatrix<f64>, d: &[f64], w: f64) {
    let n = d.len();
    for j in 0..n {
        let dj = w * d[j];
        if dj == 0.0 {
            continue;
        }
        for i in 0..n {
            acc[(i, j)] += d[i] * dj;
        }
    }
}

pub fn scatter_matrices(vectors: &[DVector]) -> Result<Scatter, BackendError> {
    let (dim, groups) = group_by_speaker(vectors)?;
    let n = vectors.len();
    let n_classes = groups.len();
    let all: Vec<&[f64]> = vectors.iter().map(|v| v.values.as_slice()).collect();
    let mean = mean_of(&all, dim);
    let mut within = DMatrix::zeros(dim, dim);
    let mut between = DMatrix::zeros(dim, dim);
    let mut diff = vec![0.0; dim];
    for g in groups.values() {
        let m = mean_of(g, dim);
        for v in g {
            diff.iter_mut().zip(v.iter().zip(&m)).for_each(|(d, (x, mu))| *d = x - mu);
            add_outer(&mut within, &diff, 1.0);
        }
        diff.iter_mut().zip(m.iter().zip(&mean)).for_each(|(d, (x, mu))| *d = x - mu);
        add_outer(&mut between, &diff, g.len() as f64);
    }
    within /= (n - n_classes) as f64;
    between /= n as f64;
    let between_trace = between.trace();
    if between_trace <= 0.0 || !between_trace.is_finite() {
        return Err(BackendError::DegenerateScatter);
    }
    // Classes with identical members leave Sw at zero; borrow the scale of Sb
    // so the ridge stays positive.
    let scale = if within.trace() > 0.0 { within.trace() } else { between_trace };
    let ridge = 1e-6 * scale / dim as f64;
    for i in 0..dim {
        within[(i, i)] += ridge;
    }
    Ok(Scatter { mean, within, between, ridge, n_classes })
}

pub fn fit_lda(vectors: &[DVector], out_dim: usize) -> Result<LdaTransform, BackendError> {
    let sc = scatter_matrices(vectors)?;
    let dim = sc.mean.len();
    let max = dim.min(sc.n_classes - 1);
    if out_dim == 0 || out_dim > max {
        return Err(BackendError::BadDim { requested: out_dim, max });
    }
    let chol = sc.within.clone().cholesky().ok_or(BackendError::SingularCovariance("LDA within-class"))?;
    let l_inv = chol.l().solve_lower_triangular(&DMatrix::identity(dim, dim)).ok_or(BackendError::SingularCovariance("LDA within-class"))?;
    let m = &l_inv * &sc.between * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut projection = Vec::with_capacity(out_dim * dim);
    let mut eigenvalues = Vec::with_capacity(out_dim);
    for &k in &order[..out_dim] {
        let u = eig.eigenvectors.column(k);
        let mut row: Vec<f64> = (l_inv.transpose() * u).iter().copied().collect();
        // Fix the sign so the largest-magnitude component is positive.
        let pivot = row.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if pivot < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
        projection.extend(row);
        eigenvalues.push(eig.eigenvalues[k]);
    }
    Ok(LdaTransform { mean: sc.mean, projection, eigenvalues })
}

pub fn apply_lda(t: &LdaTransform, v: &[f64]) -> Result<Vec<f64>, BackendError> {
    if v.len() != t.in_dim() {
        return Err(BackendError::DimMismatch { expected: t.in_dim(), found: v.len() });
    }
    let centered: Vec<f64> = v.iter().zip(&t.mean).map(|(x, m)| x - m).collect();
    Ok((0..t.out_dim()).map(|k| t.row(k).iter().zip(&centered).map(|(p, c)| p * c).sum()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn labelled(spk: &str, i: usize, values: Vec<f64>) -> DVector {
        DVector::new(format!("{spk}-{i}"), values).with_speaker(spk)
    }

    fn whitening_error(t: &LdaTransform, sw: &DMatrix<f64>) -> f64 {
        let p = DMatrix::from_row_slice(t.out_dim(), t.in_dim(), &t.projection);
        let w = &p * sw * p.transpose();
        (w - DMatrix::<f64>::identity(t.out_dim(), t.out_dim())).amax()
    }

    #[test]
    fn separated_classes_give_x_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut vs = Vec::new();
        for (c, x0) in [("a", -3.0), ("b", 3.0)] {
            for i in 0..100 {
                let nx: f64 = StandardNormal.sample(&mut rng);
                let ny: f64 = StandardNormal.sample(&mut rng);
                vs.push(labelled(c, i, vec![x0 + nx, ny]));
            }
        }
        let t = fit_lda(&vs, 1).unwrap();
        let r = t.row(0);
        let angle = (r[1].abs() / (r[0] * r[0] + r[1] * r[1]).sqrt()).asin().to_degrees();
        assert!(angle < 5.0, "angle {angle}");
        assert!(whitening_error(&t, &scatter_matrices(&vs).unwrap().within) < 1e-6);
    }

    #[test]
    fn bad_dims_and_degenerate_inputs() {
        let vs = vec![
            labelled("a", 0, vec![0.0, 1.0]),
            labelled("a", 1, vec![0.5, 1.0]),
            labelled("b", 0, vec![2.0, 0.0]),
            labelled("b", 1, vec![2.5, 0.1]),
        ];
        assert!(matches!(fit_lda(&vs, 2), Err(BackendError::BadDim { requested: 2, max: 1 })));
        assert!(matches!(fit_lda(&vs, 0), Err(BackendError::BadDim { .. })));
        assert!(matches!(fit_lda(&vs[..3], 1), Err(BackendError::TooFewSamples(_))));
        let same: Vec<DVector> = (0..4).map(|i| labelled(if i < 2 { "a" } else { "b" }, i, vec![1.0, 1.0])).collect();
        assert!(matches!(fit_lda(&same, 1), Err(BackendError::DegenerateScatter)));
        assert!(matches!(fit_lda(&[DVector::new("x", vec![1.0])], 1), Err(BackendError::MissingLabel(_))));
    }

    #[test]
    fn identical_members_use_ridge_only() {
        let mut vs = Vec::new();
        for (c, m) in [("a", [0.0, 0.0, 1.0]), ("b", [1.0, 2.0, 0.0]), ("c", [-1.0, 0.5, 0.5])] {
            for i in 0..3 {
                vs.push(labelled(c, i, m.to_vec()));
            }
        }
        let sc = scatter_matrices(&vs).unwrap();
        assert!(sc.ridge > 0.0);
        let off = &sc.within - DMatrix::<f64>::identity(3, 3) * sc.ridge;
        assert!(off.amax() < 1e-15);
        let t = fit_lda(&vs, 2).unwrap();
        assert!(whitening_error(&t, &sc.within) < 1e-6);
    }

    #[test]
    fn apply_is_affine() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut vs = Vec::new();
        for c in 0..5 {
            for i in 0..4 {
                let v: Vec<f64> = (0..6).map(|_| StandardNormal.sample(&mut rng)).collect();
                vs.push(labelled(&format!("s{c}"), i, v));
            }
        }
        let t = fit_lda(&vs, 3).unwrap();
        assert!(apply_lda(&t, &t.mean).unwrap().iter().all(|x| x.abs() < 1e-12));
        let v1 = &vs[0].values;
        let d = [0.1, -0.2, 0.3, 0.0, 0.5, -1.0];
        let moved: Vec<f64> = v1.iter().zip(&d).map(|(a, b)| a + b).collect();
        let lhs: Vec<f64> = apply_lda(&t, &moved).unwrap().iter().zip(apply_lda(&t, v1).unwrap()).map(|(a, b)| a - b).collect();
        for k in 0..3 {
            let pd: f64 = t.row(k).iter().zip(&d).map(|(p, x)| p * x).sum();
            assert!((lhs[k] - pd).abs() < 1e-12);
        }
        assert_eq!(apply_lda(&t, v1).unwrap().len(), 3);
        assert!(matches!(apply_lda(&t, &[1.0]), Err(BackendError::DimMismatch { .. })));
        assert!(t.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}
