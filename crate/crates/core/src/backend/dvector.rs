use std::fmt::Write as _;
use std::path::Path;

use super::BackendError;
use crate::corpus::Event;
use crate::ctdnn::{forward, CtDnnParams};
use crate::frontend::FeatureMatrix;

/// Utterance-level embedding with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DVector {
    pub utt_id: String,
    pub spk_id: Option<String>,
    pub event: Option<Event>,
    pub values: Vec<f64>,
}

impl DVector {
    pub fn new(utt_id: impl Into<String>, values: Vec<f64>) -> Self {
        Self { utt_id: utt_id.into(), spk_id: None, event: None, values }
    }

    pub fn with_speaker(mut self, spk_id: impl Into<String>) -> Self {
        self.spk_id = Some(spk_id.into());
        self
    }

    pub fn with_event(mut self, event: Event) -> Self {
        self.event = Some(event);
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Mean of the feature-layer rows over all frames of a spliced utterance.
pub fn extract_dvector(model: &CtDnnParams, spliced: &FeatureMatrix) -> Result<Vec<f64>, BackendError> {
    if spliced.n_frames() == 0 {
        return Err(BackendError::EmptyUtterance);
    }
    Ok(forward(model, spliced)?.features.mean_row())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn length_normalize(v: &[f64]) -> Result<Vec<f64>, BackendError> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(BackendError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

pub fn cosine_score(enroll: &[f64], test: &[f64]) -> Result<f64, BackendError> {
    if enroll.len() != test.len() {
        return Err(BackendError::DimMismatch { expected: enroll.len(), found: test.len() });
    }
    let (ne, nt) = (norm(enroll), norm(test));
    if ne == 0.0 || nt == 0.0 {
        return Err(BackendError::ZeroVector);
    }
    let dot: f64 = enroll.iter().zip(test).map(|(a, b)| a * b).sum();
    Ok((dot / (ne * nt)).clamp(-1.0, 1.0))
}

/// Element-wise mean of equally sized vectors.
pub fn mean_vector<V: AsRef<[f64]>>(vs: &[V]) -> Result<Vec<f64>, BackendError> {
    let first = vs.first().ok_or(BackendError::EmptyUtterance)?.as_ref();
    let mut mean = vec![0.0; first.len()];
    for v in vs {
        let v = v.as_ref();
        if v.len() != mean.len() {
            return Err(BackendError::DimMismatch { expected: mean.len(), found: v.len() });
        }
        mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= vs.len() as f64);
    Ok(mean)
}

/// Header `utt_id spk_id event dim` (`-` for a missing label), then one line
/// of values in shortest round-trip decimal form.
pub fn write_dvectors(path: impl AsRef<Path>, vectors: &[DVector]) -> Result<(), BackendError> {
    let path = path.as_ref();
    let mut out = String::new();
    for v in vectors {
        let spk = v.spk_id.as_deref().unwrap_or("-");
        let event = v.event.map_or("-", Event::as_str);
        let _ = writeln!(out, "{} {spk} {event} {}", v.utt_id, v.dim());
        let vals: Vec<String> = v.values.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "{}", vals.join(" "));
    }
    std::fs::write(path, out).map_err(|source| BackendError::Io { path: path.to_path_buf(), source })
}

pub fn read_dvectors(path: impl AsRef<Path>) -> Result<Vec<DVector>, BackendError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BackendError::Io { path: path.to_path_buf(), source })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut out = Vec::new();
    while let Some((i, header)) = lines.next() {
        let err = |line: usize, reason: String| BackendError::Parse { line: line + 1, reason };
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err(i, "header must be `utt_id spk_id event dim`".into()));
        }
        let dim: usize = f[3].parse().map_err(|_| err(i, format!("bad dim `{}`", f[3])))?;
        let (j, body) = lines.next().ok_or_else(|| err(i, "missing value line".into()))?;
        let values = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| err(j, format!("bad value `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(err(j, format!("expected {dim} values, found {}", values.len())));
        }
        out.push(DVector {
            utt_id: f[0].to_string(),
            spk_id: (f[1] != "-").then(|| f[1].to_string()),
            event: (f[2] != "-").then(|| Event::from_token(f[2])),
            values,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn length_normalize_cases() {
        assert_eq!(length_normalize(&[3.0, 4.0]).unwrap(), vec![0.6, 0.8]);
        assert_eq!(length_normalize(&[0.0, 1.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0]);
        assert!(matches!(length_normalize(&[0.0, 0.0]), Err(BackendError::ZeroVector)));
    }

    #[test]
    fn cosine_cases() {
        let v = [0.3, -1.2, 2.0];
        assert!((cosine_score(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_score(&[1.0, 0.0], &[0.0, 2.0]).unwrap(), 0.0);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_score(&v, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(cosine_score(&v, &[1.0]), Err(BackendError::DimMismatch { .. })));
        assert!(matches!(cosine_score(&v, &[0.0; 3]), Err(BackendError::ZeroVector)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.txt");
        let vs = vec![
            DVector::new("u1", vec![0.1, -3.0, 1e-9]).with_speaker("S001").with_event(Event::Laugh),
            DVector::new("u2", vec![2.0, 0.0, 0.5]),
        ];
        write_dvectors(&p, &vs).unwrap();
        assert_eq!(read_dvectors(&p).unwrap(), vs);
    }

    proptest! {
        #[test]
        fn cosine_is_scale_invariant(
            e in proptest::collection::vec(-10.0f64..10.0, 5),
            t in proptest::collection::vec(-10.0f64..10.0, 5),
            a in 0.01f64..100.0,
            b in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&e) > 1e-3 && norm(&t) > 1e-3);
            let s = cosine_score(&e, &t).unwrap();
            let ea: Vec<f64> = e.iter().map(|x| a * x).collect();
            let tb: Vec<f64> = t.iter().map(|x| b * x).collect();
            prop_assert!((cosine_score(&ea, &tb).unwrap() - s).abs() < 1e-12);
        }

        #[test]
        fn normalized_has_unit_norm(v in proptest::collection::vec(-5.0f64..5.0, 1..12)) {
            prop_assume!(norm(&v) > 1e-6);
            prop_assert!((norm(&length_normalize(&v).unwrap()) - 1.0).abs() < 1e-12);
        }
    }
}
