use std::io::{BufWriter, Write};
use std::path::Path;

use super::EvalError;
use crate::corpus::{read_wav, ManifestEntry};
use crate::ctdnn::{forward, CtDnnParams};
use crate::frontend::{write_feature_dump, DumpHeader, InputPipeline, NumberFormat};

/// Writes per-frame feature-layer outputs for each manifest entry, labelled
/// with speaker and event. Relative audio paths resolve against `audio_dir`.
/// Returns the number of frame rows written.
pub fn dump_features(
    model: &CtDnnParams,
    input: &InputPipeline,
    manifest: &[ManifestEntry],
    audio_dir: &Path,
    out: &Path,
    format: NumberFormat,
) -> Result<usize, EvalError> {
    let io = |source| EvalError::Io { path: out.to_path_buf(), source };
    let mut w = BufWriter::new(std::fs::File::create(out).map_err(io)?);
    let mut rows = 0;
    for e in manifest {
        let clip = read_wav(audio_dir.join(&e.path))?;
        let feats = forward(model, &input.prepare(&clip)?)?.features;
        let header = DumpHeader { utt_id: e.utt_id.clone(), labels: Some((e.spk_id.clone(), e.event.to_string())) };
        write_feature_dump(&mut w, &header, &feats, format)?;
        rows += feats.n_frames();
    }
    w.flush().map_err(io)?;
    Ok(rows)
}
