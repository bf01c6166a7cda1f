//! Text model format.
//!
//! ```text
//! CTDNN1
//! input_mels=40
//! ...                      (one key=value line per config field)
//! end_config
//! tensor conv1.w 64 1 3 5  (name, then extents)
//! 0x1.2p-3 -0x1.8p-4 ...   (all values on one line, hex floats)
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::params::tensor_shapes;
use super::{ConvSpec, CtDnnConfig, CtDnnParams, NetError, ParamSet, PnormSpec, Tensor, TENSOR_NAMES};
use crate::frontend::SpliceSpec;
use crate::hexfloat;

pub const MODEL_HEADER: &str = "CTDNN1";

fn join_offsets(o: &[i64]) -> String {
    o.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn config_lines(c: &CtDnnConfig) -> Vec<(String, String)> {
    let mut kv = vec![
        ("input_mels".to_string(), c.input_mels.to_string()),
        ("splice.left".into(), c.splice.left.to_string()),
        ("splice.right".into(), c.splice.right.to_string()),
    ];
    for (name, conv) in [("conv1", &c.conv1), ("conv2", &c.conv2)] {
        kv.push((format!("{name}.maps"), conv.maps.to_string()));
        kv.push((format!("{name}.patch_time"), conv.patch_time.to_string()));
        kv.push((format!("{name}.patch_freq"), conv.patch_freq.to_string()));
        kv.push((format!("{name}.pool_freq"), conv.pool_freq.to_string()));
    }
    kv.extend([
        ("bottleneck_dim".into(), c.bottleneck_dim.to_string()),
        ("td1_offsets".into(), join_offsets(&c.td1_offsets)),
        ("td2_offsets".into(), join_offsets(&c.td2_offsets)),
        ("td_dim".into(), c.td_dim.to_string()),
        ("pnorm.p".into(), hexfloat::format(c.pnorm.p)),
        ("pnorm.group".into(), c.pnorm.group.to_string()),
        ("feature_dim".into(), c.feature_dim.to_string()),
        ("n_speakers".into(), c.n_speakers.to_string()),
    ]);
    kv
}

pub fn params_to_text(params: &CtDnnParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_HEADER}");
    for (k, v) in config_lines(&params.config) {
        let _ = writeln!(out, "{k}={v}");
    }
    let _ = writeln!(out, "end_config");
    for (name, t) in params.weights.named() {
        let extents: Vec<String> = t.shape.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "tensor {name} {}", extents.join(" "));
        let values: Vec<String> = t.values.iter().map(|&v| hexfloat::format(v)).collect();
        let _ = writeln!(out, "{}", values.join(" "));
    }
    out
}

fn parse_config(lines: &mut std::iter::Enumerate<std::str::Lines<'_>>) -> Result<CtDnnConfig, NetError> {
    let mut c = CtDnnConfig::default();
    loop {
        let (i, line) = lines.next().ok_or(NetError::Format { line: 0, reason: "missing end_config".into() })?;
        let line_no = i + 1;
        let line = line.trim();
        if line == "end_config" {
            return Ok(c);
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| NetError::Format { line: line_no, reason: format!("expected key=value, got `{line}`") })?;
        let bad = || NetError::Format { line: line_no, reason: format!("bad value for {key}: `{value}`") };
        let count = || value.parse::<usize>().map_err(|_| bad());
        let offsets = || value.split(',').map(|v| v.trim().parse::<i64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>();
        let conv = |c: &mut ConvSpec, field: &str| -> Result<(), NetError> {
            let v = count()?;
            match field {
                "maps" => c.maps = v,
                "patch_time" => c.patch_time = v,
                "patch_freq" => c.patch_freq = v,
                "pool_freq" => c.pool_freq = v,
                _ => return Err(NetError::Format { line: line_no, reason: format!("unknown key {key}") }),
            }
            Ok(())
        };
        match key {
            "input_mels" => c.input_mels = count()?,
            "splice.left" => c.splice = SpliceSpec { left: count()?, ..c.splice },
            "splice.right" => c.splice = SpliceSpec { right: count()?, ..c.splice },
            "bottleneck_dim" => c.bottleneck_dim = count()?,
            "td1_offsets" => c.td1_offsets = offsets()?,
            "td2_offsets" => c.td2_offsets = offsets()?,
            "td_dim" => c.td_dim = count()?,
            "pnorm.p" => c.pnorm = PnormSpec { p: hexfloat::parse(value).ok_or_else(bad)?, ..c.pnorm },
            "pnorm.group" => c.pnorm = PnormSpec { group: count()?, ..c.pnorm },
            "feature_dim" => c.feature_dim = count()?,
            "n_speakers" => c.n_speakers = count()?,
            k => match k.split_once('.') {
                Some(("conv1", f)) => conv(&mut c.conv1, f)?,
                Some(("conv2", f)) => conv(&mut c.conv2, f)?,
                _ => return Err(NetError::Format { line: line_no, reason: format!("unknown key {key}") }),
            },
        }
    }
}

pub fn params_from_text(text: &str) -> Result<CtDnnParams, NetError> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != MODEL_HEADER {
        return Err(NetError::VersionMismatch(header.to_string()));
    }
    let config = parse_config(&mut lines)?;
    let shapes = tensor_shapes(&config)?;
    let mut tensors = Vec::with_capacity(TENSOR_NAMES.len());
    for (name, expected) in TENSOR_NAMES.iter().zip(&shapes) {
        let corrupt = |reason: String| NetError::CorruptTensor { name: name.to_string(), reason };
        let (_, head) = lines.next().ok_or_else(|| corrupt("missing tensor".into()))?;
        let mut fields = head.split_whitespace();
        if fields.next() != Some("tensor") || fields.next() != Some(*name) {
            return Err(corrupt(format!("expected `tensor {name} ...`, got `{head}`")));
        }
        let shape = fields.map(|f| f.parse::<usize>()).collect::<Result<Vec<_>, _>>().map_err(|_| corrupt("bad extents".into()))?;
        if &shape != expected {
            return Err(corrupt(format!("shape {shape:?} disagrees with config {expected:?}")));
        }
        let (_, body) = lines.next().ok_or_else(|| corrupt("missing values".into()))?;
        let values = body
            .split_whitespace()
            .map(|tok| hexfloat::parse(tok).filter(|v| v.is_finite()).ok_or_else(|| corrupt(format!("bad value `{tok}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let want: usize = shape.iter().product();
        if values.len() != want {
            return Err(corrupt(format!("{} values for shape {shape:?} ({want} expected)", values.len())));
        }
        tensors.push(Tensor { shape, values });
    }
    Ok(CtDnnParams { config, weights: ParamSet { tensors } })
}

pub fn save_params(params: &CtDnnParams, path: impl AsRef<Path>) -> Result<(), NetError> {
    let path = path.as_ref();
    params.check_shapes()?;
    std::fs::write(path, params_to_text(params)).map_err(|source| NetError::Io { path: path.to_path_buf(), source })
}

pub fn load_params(path: impl AsRef<Path>) -> Result<CtDnnParams, NetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| NetError::Io { path: path.to_path_buf(), source })?;
    params_from_text(&text)
}
