//! Text dump of feature matrices: a header line `utt_id T D` (optionally
//! followed by `spk_id event`), then one line of space-separated values per
//! frame.

use std::io::{BufRead, Write};

use super::{FeatureMatrix, FrontendError};
use crate::hexfloat;

/// Number encoding of dumped values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumberFormat {
    /// Nine significant decimal digits; lossy for f64.
    #[default]
    Decimal,
    /// Hexadecimal floats; exact.
    Hex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub utt_id: String,
    /// Optional `(spk_id, event)` labels.
    pub labels: Option<(String, String)>,
}

fn io_err(e: std::io::Error) -> FrontendError {
    FrontendError::Io { path: "<stream>".into(), source: e }
}

pub fn write_feature_dump<W: Write>(
    out: &mut W,
    header: &DumpHeader,
    features: &FeatureMatrix,
    format: NumberFormat,
) -> Result<(), FrontendError> {
    write!(out, "{} {} {}", header.utt_id, features.n_frames(), features.dim()).map_err(io_err)?;
    if let Some((spk, event)) = &header.labels {
        write!(out, " {spk} {event}").map_err(io_err)?;
    }
    writeln!(out).map_err(io_err)?;
    for row in features.rows() {
        let line: Vec<String> = row
            .iter()
            .map(|&v| match format {
                NumberFormat::Decimal => format!("{v:.8e}"),
                NumberFormat::Hex => hexfloat::format(v),
            })
            .collect();
        writeln!(out, "{}", line.join(" ")).map_err(io_err)?;
    }
    Ok(())
}

/// Reads every block of a dump stream. Decimal and hex values are both accepted.
pub fn read_feature_dump<R: BufRead>(input: R) -> Result<Vec<(DumpHeader, FeatureMatrix)>, FrontendError> {
    let mut lines = input.lines().enumerate();
    let mut blocks = Vec::new();
    let dump_err = |line: usize, reason: String| FrontendError::Dump { line: line + 1, reason };
    while let Some((i, line)) = lines.next() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 5 {
            return Err(dump_err(i, "header must be `utt_id T D [spk_id event]`".into()));
        }
        let parse_count = |s: &str| s.parse::<usize>().map_err(|_| dump_err(i, format!("bad count `{s}`")));
        let (t_len, dim) = (parse_count(fields[1])?, parse_count(fields[2])?);
        let labels = (fields.len() == 5).then(|| (fields[3].to_string(), fields[4].to_string()));
        let mut values = Vec::with_capacity(t_len * dim);
        for _ in 0..t_len {
            let (j, row) = lines.next().ok_or_else(|| dump_err(i, "missing frame rows".into()))?;
            let row = row.map_err(io_err)?;
            let before = values.len();
            for tok in row.split_whitespace() {
                values.push(hexfloat::parse(tok).ok_or_else(|| dump_err(j, format!("bad value `{tok}`")))?);
            }
            if values.len() - before != dim {
                return Err(dump_err(j, format!("expected {dim} values, found {}", values.len() - before)));
            }
        }
        let header = DumpHeader { utt_id: fields[0].to_string(), labels };
        blocks.push((header, FeatureMatrix::new(t_len, dim, values)?));
    }
    Ok(blocks)
}
