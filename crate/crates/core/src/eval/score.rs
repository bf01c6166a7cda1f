use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::trials::parse_lines;
use super::{EvalError, Trial};
use crate::backend::{Backend, DVector};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreSet {
    pub records: Vec<(Trial, f64)>,
}

pub fn score_trials(trials: &[Trial], dvectors: &[DVector], backend: &Backend) -> Result<ScoreSet, EvalError> {
    let index: HashMap<&str, &[f64]> = dvectors.iter().map(|v| (v.utt_id.as_str(), v.values.as_slice())).collect();
    let lookup = |u: &str| index.get(u).copied().ok_or_else(|| EvalError::MissingEmbedding(u.to_string()));
    let mut enrolled: HashMap<&[String], Vec<f64>> = HashMap::new();
    let mut records = Vec::with_capacity(trials.len());
    for t in trials {
        if !enrolled.contains_key(t.enroll_utts.as_slice()) {
            let vs = t.enroll_utts.iter().map(|u| lookup(u)).collect::<Result<Vec<_>, _>>()?;
            enrolled.insert(&t.enroll_utts, backend.enroll(&vs)?);
        }
        let score = backend.score(&enrolled[t.enroll_utts.as_slice()], lookup(&t.test_utt)?)?;
        if !score.is_finite() {
            return Err(EvalError::NonFiniteScore(t.test_utt.clone()));
        }
        records.push((t.clone(), score));
    }
    Ok(ScoreSet { records })
}

/// One trial line per record with the score appended as a fifth column.
pub fn write_scores(path: impl AsRef<Path>, scores: &ScoreSet) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut s = String::new();
    for (t, score) in &scores.records {
        let _ = writeln!(s, "{}\t{score:e}", t.to_line());
    }
    std::fs::write(path, s).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<ScoreSet, EvalError> {
    let path = path.as_ref();
    let mut records = Vec::new();
    for (i, (t, extra)) in parse_lines(path)?.into_iter().enumerate() {
        let bad = |reason: String| EvalError::Parse { path: path.to_path_buf(), line: i + 1, reason };
        let tok = extra.ok_or_else(|| bad("missing score column".into()))?;
        let s: f64 = tok.trim().parse().map_err(|_| bad(format!("bad score `{tok}`")))?;
        if !s.is_finite() {
            return Err(bad(format!("non-finite score `{tok}`")));
        }
        records.push((t, s));
    }
    Ok(ScoreSet { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{BackendOptions, ScorerKind};
    use crate::corpus::Event;
    use crate::eval::{compute_eer, Label};

    fn trial(enroll: &[&str], test: &str, label: Label) -> Trial {
        Trial { enroll_utts: enroll.iter().map(|s| s.to_string()).collect(), test_utt: test.into(), label, event: Event::Cough }
    }

    fn vectors() -> Vec<DVector> {
        vec![
            DVector::new("a1", vec![1.0, 0.1]).with_speaker("a"),
            DVector::new("a2", vec![1.0, 0.1]).with_speaker("a"),
            DVector::new("a3", vec![0.9, -0.1]).with_speaker("a"),
            DVector::new("b1", vec![0.1, 1.0]).with_speaker("b"),
            DVector::new("b2", vec![-0.1, 0.8]).with_speaker("b"),
            DVector::new("b3", vec![0.0, 1.1]).with_speaker("b"),
        ]
    }

    #[test]
    fn identical_vectors_score_one_and_missing_is_named() {
        let b = Backend::cosine(true);
        let s = score_trials(&[trial(&["a1"], "a2", Label::Target)], &vectors(), &b).unwrap();
        assert!((s.records[0].1 - 1.0).abs() < 1e-12);
        match score_trials(&[trial(&["a1"], "zz9", Label::Target)], &vectors(), &b) {
            Err(EvalError::MissingEmbedding(u)) => assert_eq!(u, "zz9"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scorers_separate_toy_speakers() {
        let trials = vec![
            trial(&["a1", "a2"], "a3", Label::Target),
            trial(&["a1", "a2"], "b3", Label::Nontarget),
            trial(&["b1", "b2"], "b3", Label::Target),
            trial(&["b1", "b2"], "a3", Label::Nontarget),
        ];
        for kind in [ScorerKind::Cosine, ScorerKind::LdaCosine, ScorerKind::Plda] {
            let b = Backend::fit(&BackendOptions { kind, ..Default::default() }, &vectors()).unwrap();
            let s = score_trials(&trials, &vectors(), &b).unwrap();
            assert_eq!(compute_eer(&s).unwrap().eer, 0.0, "{kind}");
        }
    }

    #[test]
    fn score_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("scores.tsv");
        let s = ScoreSet { records: vec![(trial(&["a1", "a2"], "b1", Label::Nontarget), -0.125), (trial(&["x"], "y", Label::Target), 0.1)] };
        write_scores(&p, &s).unwrap();
        assert_eq!(read_scores(&p).unwrap(), s);
        std::fs::write(&p, "a\tb\ttarget\tcough\n").unwrap();
        assert!(matches!(read_scores(&p), Err(EvalError::Parse { .. })));
    }
}
