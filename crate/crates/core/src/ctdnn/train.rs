use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::batch_gradients;
use super::{CtDnnParams, NetError, ParamSet, TENSOR_NAMES};
use crate::frontend::FeatureMatrix;
use crate::rng::derive_seed;

/// Momentum buffer, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity(pub ParamSet);

impl Velocity {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Self(params.zeros_like())
    }
}

/// One momentum SGD update: `v <- momentum*v - lr*g; w <- w + v`.
///
/// Gradients are checked for finiteness before anything is modified.
pub fn sgd_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    lr: f64,
    momentum: f64,
    velocity: &mut Velocity,
) -> Result<(), NetError> {
    if !(lr > 0.0) || !(0.0..1.0).contains(&momentum) {
        return Err(NetError::InvalidOptions(format!("need lr > 0 and momentum in [0, 1), got {lr}, {momentum}")));
    }
    for (name, g) in TENSOR_NAMES.iter().zip(&grads.tensors) {
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(NetError::NonFiniteGradient(name));
        }
    }
    for ((w, g), v) in params.tensors.iter_mut().zip(&grads.tensors).zip(velocity.0.tensors.iter_mut()) {
        for ((wi, gi), vi) in w.values.iter_mut().zip(&g.values).zip(v.values.iter_mut()) {
            *vi = momentum * *vi - lr * gi;
            *wi += *vi;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    /// Minibatches collect whole utterances up to this many frames.
    pub frame_budget: usize,
    /// Learning rate multiplier applied after every epoch.
    pub lr_decay: f64,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { epochs: 6, lr: 0.002, momentum: 0.9, frame_budget: 512, lr_decay: 0.8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epoch: usize,
    /// Mean over the epoch's frames, measured before each update (nats).
    pub mean_cross_entropy: f64,
    pub frame_accuracy: f64,
}

/// Groups shuffled utterance indices into batches of at most `budget`
/// frames; an utterance longer than the budget forms its own batch.
fn make_batches(order: &[usize], lens: &[usize], budget: usize) -> Vec<Vec<usize>> {
    let mut batches = Vec::new();
    let mut cur = Vec::new();
    let mut frames = 0;
    for &i in order {
        if !cur.is_empty() && frames + lens[i] > budget {
            batches.push(std::mem::take(&mut cur));
            frames = 0;
        }
        cur.push(i);
        frames += lens[i];
    }
    if !cur.is_empty() {
        batches.push(cur);
    }
    batches
}

/// Momentum SGD over utterance minibatches; `on_epoch` sees each report as
/// it is produced.
pub fn train_with(
    mut params: CtDnnParams,
    dataset: &[(FeatureMatrix, Vec<usize>)],
    opts: &TrainOptions,
    mut on_epoch: impl FnMut(&TrainReport),
) -> Result<(CtDnnParams, Vec<TrainReport>), NetError> {
    if dataset.is_empty() {
        return Err(NetError::EmptyDataset);
    }
    if opts.frame_budget == 0 || !(opts.lr_decay > 0.0) {
        return Err(NetError::InvalidOptions("frame_budget and lr_decay must be positive".into()));
    }
    params.check_shapes()?;
    let lens: Vec<usize> = dataset.iter().map(|(f, _)| f.n_frames()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, "ctdnn.shuffle"));
    let mut velocity = Velocity::zeros_like(&params.weights);
    let mut reports = Vec::with_capacity(opts.epochs);
    let mut lr = opts.lr;
    for epoch in 0..opts.epochs {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct, mut frames) = (0.0, 0usize, 0usize);
        for batch in make_batches(&order, &lens, opts.frame_budget) {
            let items: Vec<(&FeatureMatrix, &[usize])> = batch.iter().map(|&i| (&dataset[i].0, &dataset[i].1[..])).collect();
            let r = batch_gradients(&params, &items)?;
            loss_sum += r.loss * r.n_frames as f64;
            correct += r.n_correct;
            frames += r.n_frames;
            sgd_step(&mut params.weights, &r.grads, lr, opts.momentum, &mut velocity)?;
        }
        let report = TrainReport {
            epoch: epoch + 1,
            mean_cross_entropy: loss_sum / frames.max(1) as f64,
            frame_accuracy: correct as f64 / frames.max(1) as f64,
        };
        on_epoch(&report);
        reports.push(report);
        lr *= opts.lr_decay;
    }
    Ok((params, reports))
}

pub fn train(
    params: CtDnnParams,
    dataset: &[(FeatureMatrix, Vec<usize>)],
    opts: &TrainOptions,
) -> Result<(CtDnnParams, Vec<TrainReport>), NetError> {
    train_with(params, dataset, opts, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctdnn::{init_params, Tensor};

    fn scalar(v: f64) -> ParamSet {
        ParamSet { tensors: vec![Tensor { shape: vec![1], values: vec![v] }] }
    }

    #[test]
    fn plain_step_and_zero_grad() {
        let mut w = ParamSet { tensors: vec![Tensor { shape: vec![3], values: vec![1.0, -2.0, 0.5] }] };
        let g = ParamSet { tensors: vec![Tensor { shape: vec![3], values: vec![0.5, 1.0, -4.0] }] };
        let mut v = Velocity::zeros_like(&w);
        sgd_step(&mut w, &g, 0.1, 0.0, &mut v).unwrap();
        assert_eq!(w.tensors[0].values, vec![1.0 - 0.05, -2.0 - 0.1, 0.5 + 0.4]);
        let before = w.clone();
        let mut v = Velocity::zeros_like(&w);
        sgd_step(&mut w, &g.zeros_like(), 0.1, 0.0, &mut v).unwrap();
        assert_eq!(w, before);
    }

    #[test]
    fn momentum_recurrence() {
        let mut w = scalar(0.0);
        let g = scalar(1.0);
        let mut v = Velocity::zeros_like(&w);
        sgd_step(&mut w, &g, 0.1, 0.9, &mut v).unwrap();
        assert!((w.tensors[0].values[0] + 0.1).abs() < 1e-15);
        sgd_step(&mut w, &g, 0.1, 0.9, &mut v).unwrap();
        assert!((w.tensors[0].values[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_bad_options() {
        let mut w = scalar(1.0);
        let mut v = Velocity::zeros_like(&w);
        assert!(matches!(sgd_step(&mut w, &scalar(f64::NAN), 0.1, 0.0, &mut v), Err(NetError::NonFiniteGradient(_))));
        assert_eq!(w, scalar(1.0));
        assert!(sgd_step(&mut w, &scalar(1.0), 0.0, 0.0, &mut v).is_err());
        assert!(sgd_step(&mut w, &scalar(1.0), 0.1, 1.0, &mut v).is_err());
    }

    #[test]
    fn batches_respect_budget() {
        let lens = [100, 300, 200, 600, 50];
        let b = make_batches(&[0, 1, 2, 3, 4], &lens, 512);
        assert_eq!(b, vec![vec![0, 1], vec![2], vec![3], vec![4]]);
    }

    #[test]
    fn zero_epochs_is_identity() {
        let cfg = crate::ctdnn::net_test_config();
        let p = init_params(&cfg, 1).unwrap();
        let data = vec![(FeatureMatrix::zeros(3, cfg.input_dim()), vec![0, 1, 2])];
        let opts = TrainOptions { epochs: 0, ..Default::default() };
        let (q, reports) = train(p.clone(), &data, &opts).unwrap();
        assert_eq!(p, q);
        assert!(reports.is_empty());
        assert!(matches!(train(p, &[], &opts), Err(NetError::EmptyDataset)));
    }
}
