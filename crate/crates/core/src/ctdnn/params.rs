use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CtDnnConfig, NetError};
use crate::rng::derive_seed;

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self { shape: shape.to_vec(), values: vec![0.0; shape.iter().product()] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Tensor order used everywhere: storage, gradients, serialization.
pub const TENSOR_NAMES: [&str; 14] = [
    "conv1.w",
    "conv1.b",
    "conv2.w",
    "conv2.b",
    "bottleneck.w",
    "bottleneck.b",
    "td1.w",
    "td1.b",
    "td2.w",
    "td2.b",
    "feature.w",
    "feature.b",
    "output.w",
    "output.b",
];

pub(crate) mod idx {
    pub const CONV1_W: usize = 0;
    pub const CONV1_B: usize = 1;
    pub const CONV2_W: usize = 2;
    pub const CONV2_B: usize = 3;
    pub const BN_W: usize = 4;
    pub const BN_B: usize = 5;
    pub const TD1_W: usize = 6;
    pub const TD1_B: usize = 7;
    pub const TD2_W: usize = 8;
    pub const TD2_B: usize = 9;
    pub const FEAT_W: usize = 10;
    pub const FEAT_B: usize = 11;
    pub const OUT_W: usize = 12;
    pub const OUT_B: usize = 13;
}

/// The fourteen weight/bias tensors of a network, or anything shaped like
/// them (gradients, momentum buffers).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    pub tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn zeros_for(config: &CtDnnConfig) -> Result<Self, NetError> {
        Ok(Self { tensors: tensor_shapes(config)?.iter().map(|s| Tensor::zeros(s)).collect() })
    }

    pub fn zeros_like(&self) -> Self {
        Self { tensors: self.tensors.iter().map(|t| Tensor::zeros(&t.shape)).collect() }
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        TENSOR_NAMES.iter().position(|n| *n == name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        TENSOR_NAMES.iter().position(|n| *n == name).map(move |i| &mut self.tensors[i])
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, &Tensor)> {
        TENSOR_NAMES.iter().copied().zip(&self.tensors)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &ParamSet) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            a.values.iter_mut().zip(&b.values).for_each(|(x, y)| *x += alpha * y);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.tensors.iter_mut().for_each(|t| t.values.iter_mut().for_each(|x| *x *= alpha));
    }

    pub fn n_values(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

/// Expected tensor shapes, in [`TENSOR_NAMES`] order.
pub(crate) fn tensor_shapes(config: &CtDnnConfig) -> Result<Vec<Vec<usize>>, NetError> {
    let d = config.dims()?;
    let (c1, c2) = (&config.conv1, &config.conv2);
    Ok(vec![
        vec![c1.maps, 1, c1.patch_time, c1.patch_freq],
        vec![c1.maps],
        vec![c2.maps, c1.maps, c2.patch_time, c2.patch_freq],
        vec![c2.maps],
        vec![d.bottleneck, d.flat],
        vec![d.bottleneck],
        vec![d.td_dim, d.td1_in],
        vec![d.td_dim],
        vec![d.td_dim, d.td2_in],
        vec![d.td_dim],
        vec![d.feature, d.pnorm_out],
        vec![d.feature],
        vec![d.n_speakers, d.feature],
        vec![d.n_speakers],
    ])
}

/// Network configuration plus its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CtDnnParams {
    pub config: CtDnnConfig,
    pub weights: ParamSet,
}

impl CtDnnParams {
    /// All-zero weights.
    pub fn zeros(config: &CtDnnConfig) -> Result<Self, NetError> {
        Ok(Self { config: config.clone(), weights: ParamSet::zeros_for(config)? })
    }

    /// Checks every tensor against the shapes implied by the config.
    pub fn check_shapes(&self) -> Result<(), NetError> {
        let shapes = tensor_shapes(&self.config)?;
        if self.weights.tensors.len() != shapes.len() {
            return Err(NetError::ShapeMismatch(format!("expected {} tensors", shapes.len())));
        }
        for ((name, t), s) in self.weights.named().zip(&shapes) {
            if &t.shape != s || t.values.len() != s.iter().product::<usize>() {
                return Err(NetError::ShapeMismatch(format!("{name}: expected {s:?}, found {:?}", t.shape)));
            }
        }
        Ok(())
    }
}

/// Xavier-uniform weights, zero biases, deterministic per seed.
///
/// Conv fan-in/out count the patch area: `C*kt*kf` and `M*kt*kf`.
pub fn init_params(config: &CtDnnConfig, seed: u64) -> Result<CtDnnParams, NetError> {
    let mut params = CtDnnParams::zeros(config)?;
    for (name, t) in TENSOR_NAMES.iter().zip(params.weights.tensors.iter_mut()) {
        if t.shape.len() < 2 {
            continue;
        }
        let bound = xavier_bound(&t.shape);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, name));
        t.values.iter_mut().for_each(|w| *w = rng.random_range(-bound..=bound));
    }
    Ok(params)
}

pub(crate) fn xavier_bound(shape: &[usize]) -> f64 {
    let receptive: usize = shape[2..].iter().product();
    let fan_in = shape[1] * receptive;
    let fan_out = shape[0] * receptive;
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
