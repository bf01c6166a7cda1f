use std::fmt::Write as _;

use super::{EvalError, Label, ScoreSet};

/// Operating point for the rule "accept iff score ≥ threshold".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub far: f64,
    pub frr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EerReport {
    pub eer: f64,
    pub threshold: f64,
    pub n_target: usize,
    pub n_nontarget: usize,
    pub det_points: Vec<DetPoint>,
}

fn split(scores: &ScoreSet) -> (Vec<f64>, Vec<f64>) {
    let mut tar = Vec::new();
    let mut non = Vec::new();
    for (t, s) in &scores.records {
        match t.label {
            Label::Target => tar.push(*s),
            Label::Nontarget => non.push(*s),
        }
    }
    (tar, non)
}

/// Points at every distinct score in ascending order, then at +∞.
fn sweep(targets: &[f64], nontargets: &[f64]) -> Result<Vec<DetPoint>, EvalError> {
    if targets.is_empty() || nontargets.is_empty() {
        return Err(EvalError::OneClassOnly { n_target: targets.len(), n_nontarget: nontargets.len() });
    }
    let mut all: Vec<(f64, bool)> =
        targets.iter().map(|&s| (s, true)).chain(nontargets.iter().map(|&s| (s, false))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nt, nn) = (targets.len() as f64, nontargets.len() as f64);
    let mut points = Vec::new();
    // Counts of scores strictly below the current threshold.
    let (mut tar_below, mut non_below) = (0usize, 0usize);
    let mut i = 0;
    while i < all.len() {
        let th = all[i].0;
        points.push(DetPoint { threshold: th, far: (nn - non_below as f64) / nn, frr: tar_below as f64 / nt });
        while i < all.len() && all[i].0 == th {
            if all[i].1 {
                tar_below += 1;
            } else {
                non_below += 1;
            }
            i += 1;
        }
    }
    points.push(DetPoint { threshold: f64::INFINITY, far: 0.0, frr: 1.0 });
    Ok(points)
}

pub fn det_points(scores: &ScoreSet) -> Result<Vec<DetPoint>, EvalError> {
    let (tar, non) = split(scores);
    sweep(&tar, &non)
}

pub fn compute_eer(scores: &ScoreSet) -> Result<EerReport, EvalError> {
    let (tar, non) = split(scores);
    eer_from_scores(&tar, &non)
}

/// EER at the crossing of FAR and FRR over the sweep, interpolating linearly
/// between the two points that straddle it.
pub fn eer_from_scores(targets: &[f64], nontargets: &[f64]) -> Result<EerReport, EvalError> {
    let points = sweep(targets, nontargets)?;
    // FAR − FRR starts at 1 and falls to −1, so a crossing index j ≥ 1 exists.
    let j = points.iter().position(|p| p.far - p.frr <= 0.0).expect("sweep ends at FAR − FRR = −1");
    let (a, b) = (points[j - 1], points[j]);
    let (da, db) = (a.far - a.frr, b.far - b.frr);
    let (eer, threshold) = if db == 0.0 {
        (b.far, b.threshold)
    } else {
        let alpha = da / (da - db);
        let eer = a.far + alpha * (b.far - a.far);
        (eer, if da <= -db { a.threshold } else { b.threshold })
    };
    Ok(EerReport { eer, threshold, n_target: targets.len(), n_nontarget: nontargets.len(), det_points: points })
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

impl EerReport {
    /// Plain-text report. `header` lines are written first as `# key=value`.
    pub fn to_text(&self, header: &[(&str, String)]) -> String {
        let mut s = String::new();
        for (k, v) in header {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "eer={}", num(self.eer));
        let _ = writeln!(s, "threshold={}", num(self.threshold));
        let _ = writeln!(s, "n_target={}", self.n_target);
        let _ = writeln!(s, "n_nontarget={}", self.n_nontarget);
        let _ = writeln!(s, "det:");
        for p in &self.det_points {
            let _ = writeln!(s, "{} {}", num(p.far), num(p.frr));
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold,far,frr\n");
        for p in &self.det_points {
            let _ = writeln!(s, "{},{},{}", num(p.threshold), num(p.far), num(p.frr));
        }
        s
    }
}
