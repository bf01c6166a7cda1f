mod common;

use common::fixtures::{random_input, random_params, tiny_configs};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sre_core::ctdnn::{
    batch_loss_and_grads, forward, init_params, sgd_step, train, ConvSpec, CtDnnConfig, TrainOptions, Velocity,
};
use sre_core::frontend::{splice, FeatureMatrix};

/// Speaker `s` has its Fbank mean raised by 2.0 on its own band of mels.
fn toy_speakers(cfg: &CtDnnConfig, n_utts: usize, frames: usize, seed: u64) -> Vec<(FeatureMatrix, Vec<usize>)> {
    let band = cfg.input_mels / cfg.n_speakers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for u in 0..n_utts {
        let spk = u % cfg.n_speakers;
        let vals: Vec<f64> = (0..frames * cfg.input_mels)
            .map(|i| {
                let n: f64 = StandardNormal.sample(&mut rng);
                if (i % cfg.input_mels) / band == spk { 2.0 + n } else { n }
            })
            .collect();
        let fb = FeatureMatrix::new(frames, cfg.input_mels, vals).unwrap();
        out.push((splice(&fb, cfg.splice), vec![spk; frames]));
    }
    out
}

#[test]
fn separable_toy_speakers_are_learned() {
    let base = tiny_configs()[0].clone();
    let cfg = CtDnnConfig {
        conv1: ConvSpec { maps: 4, patch_time: 3, patch_freq: 3, pool_freq: 1 },
        conv2: ConvSpec { maps: 8, patch_time: 3, patch_freq: 3, pool_freq: 1 },
        bottleneck_dim: 32,
        td_dim: 32,
        feature_dim: 16,
        n_speakers: 4,
        ..base
    };
    let data = toy_speakers(&cfg, 16, 20, 1);
    let params = init_params(&cfg, 3).unwrap();
    let opts = TrainOptions { epochs: 20, lr: 0.01, momentum: 0.9, lr_decay: 0.9, frame_budget: 40, seed: 5 };
    let (_, reports) = train(params, &data, &opts).unwrap();
    let best = reports.iter().map(|r| r.frame_accuracy).fold(0.0, f64::max);
    assert!(best > 0.95, "{reports:?}");
}

#[test]
fn training_is_deterministic() {
    let cfg = CtDnnConfig { n_speakers: 2, ..tiny_configs()[1].clone() };
    let data = toy_speakers(&cfg, 8, 12, 2);
    let opts = TrainOptions { epochs: 3, lr: 0.01, frame_budget: 30, seed: 9, ..Default::default() };
    let a = train(init_params(&cfg, 1).unwrap(), &data, &opts).unwrap();
    let b = train(init_params(&cfg, 1).unwrap(), &data, &opts).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
}

#[test]
fn small_steps_reduce_full_batch_loss() {
    let cfg = tiny_configs()[2].clone();
    let mut params = random_params(&cfg, 17);
    let (x, labels) = random_input(&cfg, 24, 18);
    let batch = [(&x, labels.as_slice())];
    let mut velocity = Velocity::zeros_like(&params.weights);
    let initial = batch_loss_and_grads(&params, &batch).unwrap().0;
    let mut last = initial;
    for _ in 0..50 {
        let (loss, grads) = batch_loss_and_grads(&params, &batch).unwrap();
        last = loss;
        sgd_step(&mut params.weights, &grads, 1e-3, 0.0, &mut velocity).unwrap();
    }
    assert!(last < initial, "{last} >= {initial}");
}

#[test]
fn forward_is_translation_consistent() {
    for (k, cfg) in tiny_configs().iter().enumerate() {
        let p = random_params(cfg, 40 + k as u64);
        let (long, _) = random_input(cfg, 40, 50 + k as u64);
        let shift = 3;
        let rows = |from: usize, n: usize| {
            let r: Vec<&[f64]> = (from..from + n).map(|t| long.row(t)).collect();
            FeatureMatrix::from_rows(&r).unwrap()
        };
        let a = forward(&p, &rows(0, 36)).unwrap().features;
        let b = forward(&p, &rows(shift, 36)).unwrap().features;
        for t in 10..36 - 10 - shift {
            assert_eq!(a.row(t + shift), b.row(t), "config {k} frame {t}");
        }
    }
}
