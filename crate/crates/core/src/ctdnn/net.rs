use matrixmultiply::dgemm;

use super::params::idx;
use super::{CtDnnParams, LayerDims, NetError, ParamSet};
use crate::frontend::FeatureMatrix;

/// `c = a' * b' + beta * c` on row-major buffers, where `a'` is `m x k`
/// (`a` stored transposed if `ta`) and `b'` is `k x n` (likewise `tb`).
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, beta: f64, c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the slices cover the strided extents asserted above.
    unsafe {
        dgemm(m, k, n, 1.0, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), n as isize, 1);
    }
}

fn add_bias(y: &mut [f64], bias: &[f64]) {
    for row in y.chunks_exact_mut(bias.len()) {
        row.iter_mut().zip(bias).for_each(|(v, b)| *v += b);
    }
}

fn accumulate_bias_grad(dy: &[f64], db: &mut [f64]) {
    for row in dy.chunks_exact(db.len()) {
        db.iter_mut().zip(row).for_each(|(g, v)| *g += v);
    }
}

/// `y = x w^T + b` for `x: rows x n_in`, `w: n_out x n_in`.
fn affine(x: &[f64], rows: usize, n_in: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    let n_out = b.len();
    let mut y = vec![0.0; rows * n_out];
    gemm(rows, n_in, n_out, x, false, w, true, 0.0, &mut y);
    add_bias(&mut y, b);
    y
}

/// Accumulates weight/bias grads and returns the input gradient.
#[allow(clippy::too_many_arguments)]
fn affine_backward(
    x: &[f64],
    dy: &[f64],
    rows: usize,
    n_in: usize,
    w: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    want_dx: bool,
) -> Vec<f64> {
    let n_out = db.len();
    gemm(n_out, rows, n_in, dy, true, x, false, 1.0, dw);
    accumulate_bias_grad(dy, db);
    if !want_dx {
        return Vec::new();
    }
    let mut dx = vec![0.0; rows * n_in];
    gemm(rows, n_out, n_in, dy, false, w, false, 0.0, &mut dx);
    dx
}

fn relu_inplace(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Zeroes gradient entries whose ReLU output was not positive.
fn relu_backward(activated: &[f64], grad: &mut [f64]) {
    grad.iter_mut().zip(activated).for_each(|(g, a)| {
        if *a <= 0.0 {
            *g = 0.0;
        }
    });
}

/// Geometry of a valid 2-D convolution over channel-last frames.
#[derive(Debug, Clone, Copy)]
struct ConvGeom {
    in_t: usize,
    in_f: usize,
    in_c: usize,
    kt: usize,
    kf: usize,
    maps: usize,
}

/// Upper bound on im2col rows held at once.
const IM2COL_ROWS: usize = 4096;

impl ConvGeom {
    fn out_t(&self) -> usize {
        self.in_t - self.kt + 1
    }
    fn out_f(&self) -> usize {
        self.in_f - self.kf + 1
    }
    fn in_size(&self) -> usize {
        self.in_t * self.in_f * self.in_c
    }
    fn out_positions(&self) -> usize {
        self.out_t() * self.out_f()
    }
    fn patch(&self) -> usize {
        self.in_c * self.kt * self.kf
    }
    fn chunk_frames(&self) -> usize {
        (IM2COL_ROWS / self.out_positions()).max(1)
    }

    /// Rows `(frame, t, f)`, columns `(c, dt, df)` matching the `[M, C, kt, kf]` weight layout.
    fn im2col(&self, input: &[f64], n_frames: usize) -> Vec<f64> {
        let (ot, of, patch) = (self.out_t(), self.out_f(), self.patch());
        let mut cols = vec![0.0; n_frames * ot * of * patch];
        let mut r = 0;
        for fr in 0..n_frames {
            let img = &input[fr * self.in_size()..(fr + 1) * self.in_size()];
            for t in 0..ot {
                for f in 0..of {
                    let row = &mut cols[r * patch..(r + 1) * patch];
                    for c in 0..self.in_c {
                        for dt in 0..self.kt {
                            for df in 0..self.kf {
                                row[(c * self.kt + dt) * self.kf + df] =
                                    img[((t + dt) * self.in_f + f + df) * self.in_c + c];
                            }
                        }
                    }
                    r += 1;
                }
            }
        }
        cols
    }

    fn col2im_add(&self, dcols: &[f64], n_frames: usize, d_input: &mut [f64]) {
        let (ot, of, patch) = (self.out_t(), self.out_f(), self.patch());
        let mut r = 0;
        for fr in 0..n_frames {
            let img = &mut d_input[fr * self.in_size()..(fr + 1) * self.in_size()];
            for t in 0..ot {
                for f in 0..of {
                    let row = &dcols[r * patch..(r + 1) * patch];
                    for c in 0..self.in_c {
                        for dt in 0..self.kt {
                            for df in 0..self.kf {
                                img[((t + dt) * self.in_f + f + df) * self.in_c + c] +=
                                    row[(c * self.kt + dt) * self.kf + df];
                            }
                        }
                    }
                    r += 1;
                }
            }
        }
    }

    /// Pre-activation output, `[frame][t][f][map]`.
    fn forward(&self, input: &[f64], n_frames: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
        let out_per_frame = self.out_positions() * self.maps;
        let mut out = vec![0.0; n_frames * out_per_frame];
        let step = self.chunk_frames();
        for start in (0..n_frames).step_by(step) {
            let nf = step.min(n_frames - start);
            let cols = self.im2col(&input[start * self.in_size()..(start + nf) * self.in_size()], nf);
            let rows = nf * self.out_positions();
            let y = &mut out[start * out_per_frame..(start + nf) * out_per_frame];
            gemm(rows, self.patch(), self.maps, &cols, false, w, true, 0.0, y);
            add_bias(y, b);
        }
        out
    }

    /// `d_out` is the gradient w.r.t. the pre-activation output.
    #[allow(clippy::too_many_arguments)]
    fn backward(
        &self,
        input: &[f64],
        d_out: &[f64],
        n_frames: usize,
        w: &[f64],
        dw: &mut [f64],
        db: &mut [f64],
        d_input: Option<&mut [f64]>,
    ) {
        let out_per_frame = self.out_positions() * self.maps;
        let step = self.chunk_frames();
        let mut d_input = d_input;
        for start in (0..n_frames).step_by(step) {
            let nf = step.min(n_frames - start);
            let in_range = start * self.in_size()..(start + nf) * self.in_size();
            let cols = self.im2col(&input[in_range.clone()], nf);
            let rows = nf * self.out_positions();
            let dy = &d_out[start * out_per_frame..(start + nf) * out_per_frame];
            gemm(self.maps, rows, self.patch(), dy, true, &cols, false, 1.0, dw);
            accumulate_bias_grad(dy, db);
            if let Some(di) = d_input.as_deref_mut() {
                let mut dcols = vec![0.0; rows * self.patch()];
                gemm(rows, self.maps, self.patch(), dy, false, w, false, 0.0, &mut dcols);
                self.col2im_add(&dcols, nf, &mut di[in_range]);
            }
        }
    }
}

/// Max over non-overlapping frequency windows of width `pool`; trailing
/// bins that do not fill a window are dropped. Returns the pooled map and,
/// per output, the flat input index that won.
fn pool_freq(x: &[f64], n_frames: usize, t_len: usize, f_len: usize, c: usize, pool: usize) -> (Vec<f64>, Vec<u32>) {
    let pf = f_len / pool;
    let n_out = n_frames * t_len * pf * c;
    let mut out = Vec::with_capacity(n_out);
    let mut arg = Vec::with_capacity(n_out);
    for fr in 0..n_frames {
        for t in 0..t_len {
            for j in 0..pf {
                for ch in 0..c {
                    let mut best = usize::MAX;
                    let mut best_v = f64::NEG_INFINITY;
                    for u in 0..pool {
                        let i = ((fr * t_len + t) * f_len + j * pool + u) * c + ch;
                        if x[i] > best_v {
                            best_v = x[i];
                            best = i;
                        }
                    }
                    out.push(best_v);
                    arg.push(best as u32);
                }
            }
        }
    }
    (out, arg)
}

/// Splices rows of `x` (one block per segment) at the given frame offsets,
/// clamping at segment edges.
fn td_splice(x: &[f64], dim: usize, segments: &[(usize, usize)], offsets: &[i64]) -> Vec<f64> {
    let n: usize = segments.iter().map(|s| s.1).sum();
    let mut out = Vec::with_capacity(n * dim * offsets.len());
    for &(start, len) in segments {
        for t in 0..len {
            for &o in offsets {
                let src = start + (t as i64 + o).clamp(0, len as i64 - 1) as usize;
                out.extend_from_slice(&x[src * dim..(src + 1) * dim]);
            }
        }
    }
    out
}

fn td_splice_backward(d_out: &[f64], dim: usize, segments: &[(usize, usize)], offsets: &[i64], d_x: &mut [f64]) {
    let width = dim * offsets.len();
    for &(start, len) in segments {
        for t in 0..len {
            let row = &d_out[(start + t) * width..(start + t + 1) * width];
            for (k, &o) in offsets.iter().enumerate() {
                let src = start + (t as i64 + o).clamp(0, len as i64 - 1) as usize;
                d_x[src * dim..(src + 1) * dim].iter_mut().zip(&row[k * dim..(k + 1) * dim]).for_each(|(a, b)| *a += b);
            }
        }
    }
}

/// P-norm over consecutive groups: `(sum |x|^p)^(1/p)`.
pub fn pnorm(x: &[f64], group: usize, p: f64) -> Vec<f64> {
    x.chunks_exact(group)
        .map(|g| {
            if p == 2.0 {
                g.iter().map(|v| v * v).sum::<f64>().sqrt()
            } else {
                g.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            }
        })
        .collect()
}

fn pnorm_backward(x: &[f64], y: &[f64], dy: &[f64], group: usize, p: f64) -> Vec<f64> {
    let mut dx = vec![0.0; x.len()];
    for (k, (xg, dxg)) in x.chunks_exact(group).zip(dx.chunks_exact_mut(group)).enumerate() {
        let norm = y[k];
        if norm <= 0.0 {
            continue;
        }
        for (d, &v) in dxg.iter_mut().zip(xg) {
            *d = if p == 2.0 {
                dy[k] * v / norm
            } else {
                dy[k] * v.signum() * v.abs().powf(p - 1.0) * norm.powf(1.0 - p)
            };
        }
    }
    dx
}

/// Output of a forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub features: FeatureMatrix,
    pub logits: FeatureMatrix,
}

/// Everything backward needs.
struct Activations {
    segments: Vec<(usize, usize)>,
    input: Vec<f64>,
    conv1: Vec<f64>,
    pool1: Vec<f64>,
    pool1_arg: Vec<u32>,
    conv2: Vec<f64>,
    flat: Vec<f64>,
    pool2_arg: Vec<u32>,
    bottleneck: Vec<f64>,
    td1_in: Vec<f64>,
    td1_lin: Vec<f64>,
    td1_out: Vec<f64>,
    td2_in: Vec<f64>,
    td2_lin: Vec<f64>,
    td2_out: Vec<f64>,
    features: Vec<f64>,
    logits: Vec<f64>,
}

struct Geometry {
    dims: LayerDims,
    conv1: ConvGeom,
    conv2: ConvGeom,
}

fn geometry(params: &CtDnnParams) -> Result<Geometry, NetError> {
    params.check_shapes()?;
    let cfg = &params.config;
    let dims = cfg.dims()?;
    let conv1 = ConvGeom {
        in_t: dims.in_time,
        in_f: dims.in_freq,
        in_c: 1,
        kt: cfg.conv1.patch_time,
        kf: cfg.conv1.patch_freq,
        maps: cfg.conv1.maps,
    };
    let conv2 = ConvGeom {
        in_t: dims.c1_time,
        in_f: dims.p1_freq,
        in_c: cfg.conv1.maps,
        kt: cfg.conv2.patch_time,
        kf: cfg.conv2.patch_freq,
        maps: cfg.conv2.maps,
    };
    Ok(Geometry { dims, conv1, conv2 })
}

fn run_forward(params: &CtDnnParams, geo: &Geometry, utts: &[&FeatureMatrix]) -> Result<Activations, NetError> {
    let cfg = &params.config;
    let d = &geo.dims;
    let w = &params.weights.tensors;
    let mut segments = Vec::with_capacity(utts.len());
    let mut input = Vec::new();
    let mut n = 0;
    for u in utts {
        if u.dim() != cfg.input_dim() {
            return Err(NetError::ShapeMismatch(format!(
                "input dim {} but network expects {} ({} frames x {} mels)",
                u.dim(),
                cfg.input_dim(),
                cfg.splice.width(),
                cfg.input_mels
            )));
        }
        segments.push((n, u.n_frames()));
        n += u.n_frames();
        input.extend_from_slice(u.values());
    }

    let mut conv1 = geo.conv1.forward(&input, n, &w[idx::CONV1_W].values, &w[idx::CONV1_B].values);
    relu_inplace(&mut conv1);
    let (pool1, pool1_arg) = pool_freq(&conv1, n, d.c1_time, d.c1_freq, cfg.conv1.maps, cfg.conv1.pool_freq);
    let mut conv2 = geo.conv2.forward(&pool1, n, &w[idx::CONV2_W].values, &w[idx::CONV2_B].values);
    relu_inplace(&mut conv2);
    let (flat, pool2_arg) = pool_freq(&conv2, n, d.c2_time, d.c2_freq, cfg.conv2.maps, cfg.conv2.pool_freq);

    let mut bottleneck = affine(&flat, n, d.flat, &w[idx::BN_W].values, &w[idx::BN_B].values);
    relu_inplace(&mut bottleneck);

    let td1_in = td_splice(&bottleneck, d.bottleneck, &segments, &cfg.td1_offsets);
    let td1_lin = affine(&td1_in, n, d.td1_in, &w[idx::TD1_W].values, &w[idx::TD1_B].values);
    let td1_out = pnorm(&td1_lin, cfg.pnorm.group, cfg.pnorm.p);

    let td2_in = td_splice(&td1_out, d.pnorm_out, &segments, &cfg.td2_offsets);
    let td2_lin = affine(&td2_in, n, d.td2_in, &w[idx::TD2_W].values, &w[idx::TD2_B].values);
    let td2_out = pnorm(&td2_lin, cfg.pnorm.group, cfg.pnorm.p);

    let features = affine(&td2_out, n, d.pnorm_out, &w[idx::FEAT_W].values, &w[idx::FEAT_B].values);
    let logits = affine(&features, n, d.feature, &w[idx::OUT_W].values, &w[idx::OUT_B].values);

    Ok(Activations {
        segments,
        input,
        conv1,
        pool1,
        pool1_arg,
        conv2,
        flat,
        pool2_arg,
        bottleneck,
        td1_in,
        td1_lin,
        td1_out,
        td2_in,
        td2_lin,
        td2_out,
        features,
        logits,
    })
}

/// Feature-layer rows and speaker logits for one spliced utterance.
pub fn forward(params: &CtDnnParams, spliced: &FeatureMatrix) -> Result<Forward, NetError> {
    let geo = geometry(params)?;
    let act = run_forward(params, &geo, &[spliced])?;
    let n = spliced.n_frames();
    let to_matrix = |v: Vec<f64>, dim: usize| {
        FeatureMatrix::new(n, dim, v).map_err(|e| NetError::ShapeMismatch(format!("non-finite activations: {e}")))
    };
    Ok(Forward {
        features: to_matrix(act.features, geo.dims.feature)?,
        logits: to_matrix(act.logits, geo.dims.n_speakers)?,
    })
}

/// Loss, gradients and the number of frames whose argmax logit was correct.
pub(crate) struct BatchResult {
    pub loss: f64,
    pub grads: ParamSet,
    pub n_frames: usize,
    pub n_correct: usize,
}

pub(crate) fn batch_gradients(params: &CtDnnParams, batch: &[(&FeatureMatrix, &[usize])]) -> Result<BatchResult, NetError> {
    let geo = geometry(params)?;
    let d = geo.dims;
    let cfg = &params.config;
    let mut frame = 0;
    for (f, labels) in batch {
        if labels.len() != f.n_frames() {
            return Err(NetError::ShapeMismatch(format!("{} labels for {} frames", labels.len(), f.n_frames())));
        }
        for &l in labels.iter() {
            if l >= cfg.n_speakers {
                return Err(NetError::LabelOutOfRange { frame, label: l, n_speakers: cfg.n_speakers });
            }
            frame += 1;
        }
    }
    let utts: Vec<&FeatureMatrix> = batch.iter().map(|b| b.0).collect();
    let labels: Vec<usize> = batch.iter().flat_map(|b| b.1.iter().copied()).collect();
    let act = run_forward(params, &geo, &utts)?;
    let n = labels.len();
    let s = d.n_speakers;
    let w = &params.weights.tensors;
    let mut grads = params.weights.zeros_like();

    // softmax cross-entropy, mean over frames
    let mut loss = 0.0;
    let mut n_correct = 0;
    let mut d_logits = vec![0.0; n * s];
    for (t, &label) in labels.iter().enumerate() {
        let z = &act.logits[t * s..(t + 1) * s];
        let (arg, max) = z.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if arg == label {
            n_correct += 1;
        }
        let sum: f64 = z.iter().map(|v| (v - max).exp()).sum();
        let log_sum = max + sum.ln();
        loss += log_sum - z[label];
        let dz = &mut d_logits[t * s..(t + 1) * s];
        for (dv, &v) in dz.iter_mut().zip(z) {
            *dv = (v - log_sum).exp() / n as f64;
        }
        dz[label] -= 1.0 / n as f64;
    }
    loss /= n as f64;

    let g = &mut grads.tensors;
    let (gw, gb) = split_pair(g, idx::OUT_W);
    let d_feat = affine_backward(&act.features, &d_logits, n, d.feature, &w[idx::OUT_W].values, gw, gb, true);
    let (gw, gb) = split_pair(g, idx::FEAT_W);
    let d_td2_out = affine_backward(&act.td2_out, &d_feat, n, d.pnorm_out, &w[idx::FEAT_W].values, gw, gb, true);
    let d_td2_lin = pnorm_backward(&act.td2_lin, &act.td2_out, &d_td2_out, cfg.pnorm.group, cfg.pnorm.p);
    let (gw, gb) = split_pair(g, idx::TD2_W);
    let d_td2_in = affine_backward(&act.td2_in, &d_td2_lin, n, d.td2_in, &w[idx::TD2_W].values, gw, gb, true);
    let mut d_td1_out = vec![0.0; n * d.pnorm_out];
    td_splice_backward(&d_td2_in, d.pnorm_out, &act.segments, &cfg.td2_offsets, &mut d_td1_out);
    let d_td1_lin = pnorm_backward(&act.td1_lin, &act.td1_out, &d_td1_out, cfg.pnorm.group, cfg.pnorm.p);
    let (gw, gb) = split_pair(g, idx::TD1_W);
    let d_td1_in = affine_backward(&act.td1_in, &d_td1_lin, n, d.td1_in, &w[idx::TD1_W].values, gw, gb, true);
    let mut d_bn = vec![0.0; n * d.bottleneck];
    td_splice_backward(&d_td1_in, d.bottleneck, &act.segments, &cfg.td1_offsets, &mut d_bn);
    relu_backward(&act.bottleneck, &mut d_bn);
    let (gw, gb) = split_pair(g, idx::BN_W);
    let d_flat = affine_backward(&act.flat, &d_bn, n, d.flat, &w[idx::BN_W].values, gw, gb, true);

    let mut d_conv2 = vec![0.0; act.conv2.len()];
    for (o, &i) in act.pool2_arg.iter().enumerate() {
        d_conv2[i as usize] += d_flat[o];
    }
    relu_backward(&act.conv2, &mut d_conv2);
    let mut d_pool1 = vec![0.0; act.pool1.len()];
    let (gw, gb) = split_pair(g, idx::CONV2_W);
    geo.conv2.backward(&act.pool1, &d_conv2, n, &w[idx::CONV2_W].values, gw, gb, Some(&mut d_pool1));

    let mut d_conv1 = vec![0.0; act.conv1.len()];
    for (o, &i) in act.pool1_arg.iter().enumerate() {
        d_conv1[i as usize] += d_pool1[o];
    }
    relu_backward(&act.conv1, &mut d_conv1);
    let (gw, gb) = split_pair(g, idx::CONV1_W);
    geo.conv1.backward(&act.input, &d_conv1, n, &w[idx::CONV1_W].values, gw, gb, None);

    Ok(BatchResult { loss, grads, n_frames: n, n_correct })
}

/// Mutable views of a weight tensor and the bias tensor that follows it.
fn split_pair(g: &mut [super::Tensor], w_idx: usize) -> (&mut [f64], &mut [f64]) {
    let (a, b) = g.split_at_mut(w_idx + 1);
    (&mut a[w_idx].values, &mut b[0].values)
}

/// Mean softmax cross-entropy (nats) over the frames of one utterance and
/// its exact gradient w.r.t. every tensor.
pub fn loss_and_grads(params: &CtDnnParams, spliced: &FeatureMatrix, labels: &[usize]) -> Result<(f64, ParamSet), NetError> {
    let r = batch_gradients(params, &[(spliced, labels)])?;
    Ok((r.loss, r.grads))
}

/// As [`loss_and_grads`], with the mean taken over all frames of all
/// utterances in the batch. Time-delay context never crosses utterances.
pub fn batch_loss_and_grads(params: &CtDnnParams, batch: &[(&FeatureMatrix, &[usize])]) -> Result<(f64, ParamSet), NetError> {
    let r = batch_gradients(params, batch)?;
    Ok((r.loss, r.grads))
}
