//! Small seeded networks and inputs shared by the integration tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sre_core::ctdnn::{init_params, ConvSpec, CtDnnConfig, CtDnnParams, PnormSpec};
use sre_core::frontend::{FeatureMatrix, SpliceSpec};

/// Three small networks: 2 speakers, 8 mels, 2 and 3 feature maps.
pub fn tiny_configs() -> Vec<CtDnnConfig> {
    let base = CtDnnConfig {
        input_mels: 8,
        splice: SpliceSpec { left: 4, right: 4 },
        conv1: ConvSpec { maps: 2, patch_time: 3, patch_freq: 3, pool_freq: 2 },
        conv2: ConvSpec { maps: 3, patch_time: 3, patch_freq: 2, pool_freq: 2 },
        bottleneck_dim: 6,
        td1_offsets: vec![-2, 0, 2],
        td2_offsets: vec![-4, 0, 4],
        td_dim: 8,
        pnorm: PnormSpec { p: 2.0, group: 4 },
        feature_dim: 5,
        n_speakers: 2,
    };
    vec![
        base.clone(),
        CtDnnConfig {
            splice: SpliceSpec { left: 2, right: 2 },
            conv1: ConvSpec { maps: 2, patch_time: 2, patch_freq: 3, pool_freq: 1 },
            conv2: ConvSpec { maps: 3, patch_time: 2, patch_freq: 3, pool_freq: 2 },
            td1_offsets: vec![-1, 0, 1],
            td2_offsets: vec![-3, 0, 3],
            td_dim: 12,
            pnorm: PnormSpec { p: 2.0, group: 3 },
            ..base.clone()
        },
        CtDnnConfig {
            conv1: ConvSpec { maps: 2, patch_time: 3, patch_freq: 2, pool_freq: 2 },
            conv2: ConvSpec { maps: 3, patch_time: 2, patch_freq: 2, pool_freq: 1 },
            bottleneck_dim: 5,
            td2_offsets: vec![-2, 0, 2],
            feature_dim: 3,
            ..base
        },
    ]
}

/// Xavier weights plus small random biases, so every bias path is exercised.
pub fn random_params(cfg: &CtDnnConfig, seed: u64) -> CtDnnParams {
    let mut p = init_params(cfg, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
    for t in p.weights.tensors.iter_mut().filter(|t| t.shape.len() == 1) {
        t.values.iter_mut().for_each(|v| *v = rng.random_range(-0.1..0.1));
    }
    p
}

pub fn random_input(cfg: &CtDnnConfig, t: usize, seed: u64) -> (FeatureMatrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = cfg.input_dim();
    let x = FeatureMatrix::new(t, d, (0..t * d).map(|_| rng.random_range(-1.5..1.5)).collect()).unwrap();
    let labels = (0..t).map(|_| rng.random_range(0..cfg.n_speakers)).collect();
    (x, labels)
}
