use std::time::Instant;
use sre_core::ctdnn::{batch_loss_and_grads, init_params, CtDnnConfig};
use sre_core::frontend::FeatureMatrix;

fn main() {
    let cfg = CtDnnConfig::with_speakers(20);
    let p = init_params(&cfg, 1).unwrap();
    let utts: Vec<(FeatureMatrix, Vec<usize>)> = (0..16)
        .map(|k| (FeatureMatrix::new(32, 360, (0..32 * 360).map(|i| ((i * 7 + k) % 13) as f64 * 0.1).collect()).unwrap(), vec![k % 20; 32]))
        .collect();
    let batch: Vec<_> = utts.iter().map(|(f, l)| (f, &l[..])).collect();
    let t = Instant::now();
    let (loss, _) = batch_loss_and_grads(&p, &batch).unwrap();
    println!("512-frame batch: {:?} loss {loss}", t.elapsed());
}
