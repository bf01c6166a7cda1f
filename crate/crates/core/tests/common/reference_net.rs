//! Straight-line, loop-only evaluation of the CT-DNN layer formulas.
//!
//! Written against the tensor layouts only: conv weights `[M, C, kt, kf]`,
//! affine weights `[out, in]`, flattened conv output indexed
//! `(time, freq, map)`, time-delay splices clamped at utterance edges.

use sre_core::ctdnn::CtDnnParams;
use sre_core::frontend::FeatureMatrix;

fn w<'a>(p: &'a CtDnnParams, name: &str) -> &'a [f64] {
    &p.weights.get(name).unwrap().values
}

/// `[map][time][freq]` after conv + ReLU + frequency max-pool.
fn conv_relu_pool(
    input: &[Vec<Vec<f64>>],
    weights: &[f64],
    bias: &[f64],
    maps: usize,
    kt: usize,
    kf: usize,
    pool: usize,
) -> Vec<Vec<Vec<f64>>> {
    let in_c = input.len();
    let (h, wd) = (input[0].len(), input[0][0].len());
    let (oh, ow) = (h - kt + 1, wd - kf + 1);
    let mut out = vec![vec![vec![0.0; ow / pool]; oh]; maps];
    for m in 0..maps {
        for i in 0..oh {
            let mut row = vec![0.0; ow];
            for j in 0..ow {
                let mut s = bias[m];
                for c in 0..in_c {
                    for dt in 0..kt {
                        for df in 0..kf {
                            s += weights[((m * in_c + c) * kt + dt) * kf + df] * input[c][i + dt][j + df];
                        }
                    }
                }
                row[j] = if s > 0.0 { s } else { 0.0 };
            }
            for jp in 0..ow / pool {
                let mut best = f64::NEG_INFINITY;
                for u in 0..pool {
                    if row[jp * pool + u] > best {
                        best = row[jp * pool + u];
                    }
                }
                out[m][i][jp] = best;
            }
        }
    }
    out
}

fn dense(x: &[f64], weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    let mut y = vec![0.0; bias.len()];
    for o in 0..bias.len() {
        let mut s = bias[o];
        for i in 0..n_in {
            s += weights[o * n_in + i] * x[i];
        }
        y[o] = s;
    }
    y
}

fn group_norm(x: &[f64], group: usize, p: f64) -> Vec<f64> {
    let mut y = Vec::new();
    let mut k = 0;
    while k < x.len() {
        let mut s = 0.0;
        for q in 0..group {
            s += x[k + q].abs().powf(p);
        }
        y.push(s.powf(1.0 / p));
        k += group;
    }
    y
}

fn splice_at(rows: &[Vec<f64>], t: usize, offsets: &[i64]) -> Vec<f64> {
    let last = rows.len() as i64 - 1;
    let mut out = Vec::new();
    for &o in offsets {
        let mut src = t as i64 + o;
        if src < 0 {
            src = 0;
        }
        if src > last {
            src = last;
        }
        out.extend_from_slice(&rows[src as usize]);
    }
    out
}

/// Returns (feature rows, logit rows).
pub fn reference_forward(p: &CtDnnParams, spliced: &FeatureMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let c = &p.config;
    let time = c.splice.left + c.splice.right + 1;
    let mels = c.input_mels;
    let mut bottleneck = Vec::new();
    for t in 0..spliced.n_frames() {
        let row = spliced.row(t);
        let mut image = vec![vec![vec![0.0; mels]; time]];
        for i in 0..time {
            for j in 0..mels {
                image[0][i][j] = row[i * mels + j];
            }
        }
        let p1 = conv_relu_pool(
            &image,
            w(p, "conv1.w"),
            w(p, "conv1.b"),
            c.conv1.maps,
            c.conv1.patch_time,
            c.conv1.patch_freq,
            c.conv1.pool_freq,
        );
        let p2 = conv_relu_pool(
            &p1,
            w(p, "conv2.w"),
            w(p, "conv2.b"),
            c.conv2.maps,
            c.conv2.patch_time,
            c.conv2.patch_freq,
            c.conv2.pool_freq,
        );
        let mut flat = Vec::new();
        for i in 0..p2[0].len() {
            for j in 0..p2[0][0].len() {
                for m in 0..p2.len() {
                    flat.push(p2[m][i][j]);
                }
            }
        }
        let mut b = dense(&flat, w(p, "bottleneck.w"), w(p, "bottleneck.b"));
        for v in b.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        bottleneck.push(b);
    }
    let n = bottleneck.len();
    let mut td1 = Vec::new();
    for t in 0..n {
        let lin = dense(&splice_at(&bottleneck, t, &c.td1_offsets), w(p, "td1.w"), w(p, "td1.b"));
        td1.push(group_norm(&lin, c.pnorm.group, c.pnorm.p));
    }
    let mut features = Vec::new();
    let mut logits = Vec::new();
    for t in 0..n {
        let lin = dense(&splice_at(&td1, t, &c.td2_offsets), w(p, "td2.w"), w(p, "td2.b"));
        let td2 = group_norm(&lin, c.pnorm.group, c.pnorm.p);
        let f = dense(&td2, w(p, "feature.w"), w(p, "feature.b"));
        logits.push(dense(&f, w(p, "output.w"), w(p, "output.b")));
        features.push(f);
    }
    (features, logits)
}

/// Mean softmax cross-entropy from the reference forward pass.
pub fn reference_loss(p: &CtDnnParams, spliced: &FeatureMatrix, labels: &[usize]) -> f64 {
    let (_, logits) = reference_forward(p, spliced);
    let mut total = 0.0;
    for (z, &l) in logits.iter().zip(labels) {
        let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - z[l];
    }
    total / labels.len() as f64
}

/// Central finite-difference gradient of `reference_loss` w.r.t. one value.
pub fn fd_gradient(p: &CtDnnParams, tensor: usize, i: usize, x: &FeatureMatrix, labels: &[usize], h: f64) -> f64 {
    let mut q = p.clone();
    let orig = q.weights.tensors[tensor].values[i];
    q.weights.tensors[tensor].values[i] = orig + h;
    let up = reference_loss(&q, x, labels);
    q.weights.tensors[tensor].values[i] = orig - h;
    let down = reference_loss(&q, x, labels);
    (up - down) / (2.0 * h)
}
