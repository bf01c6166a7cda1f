use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::corpus::{Event, ManifestEntry};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Target,
    Nontarget,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Target => "target",
            Label::Nontarget => "nontarget",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll_utts: Vec<String>,
    pub test_utt: String,
    pub label: Label,
    pub event: Event,
}

impl Trial {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}", self.enroll_utts.join(","), self.test_utt, self.label.as_str(), self.event)
    }

    fn parse(line: &str) -> Result<(Self, Option<&str>), String> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 && f.len() != 5 {
            return Err(format!("expected 4 or 5 tab-separated fields, found {}", f.len()));
        }
        let enroll_utts: Vec<String> = f[0].split(',').filter(|s| !s.is_empty()).map(str::to_string).collect();
        if enroll_utts.is_empty() {
            return Err("empty enrollment list".into());
        }
        let label = match f[2] {
            "target" => Label::Target,
            "nontarget" => Label::Nontarget,
            other => return Err(format!("bad label `{other}`")),
        };
        let event = f[3].parse::<Event>().map_err(|e| e.to_string())?;
        Ok((Trial { enroll_utts, test_utt: f[1].to_string(), label, event }, f.get(4).copied()))
    }
}

/// Enrollment/test partition of one speaker's utterances of an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakerSplit {
    pub spk_id: String,
    pub enroll: Vec<String>,
    pub test: Vec<String>,
}

/// Per speaker (sorted by id), shuffles that speaker's utterances of `event`
/// with a seed derived from `seed`, the event and the speaker, and takes the
/// first `enroll_per_spk` as enrollment. Speakers with fewer utterances than
/// that are left out.
pub fn enrollment_split(
    manifest: &[ManifestEntry],
    event: Event,
    enroll_per_spk: usize,
    seed: u64,
) -> Result<Vec<SpeakerSplit>, EvalError> {
    if enroll_per_spk == 0 {
        return Err(EvalError::InsufficientData("enroll_per_spk must be at least 1".into()));
    }
    let mut by_spk: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in manifest.iter().filter(|e| e.event == event) {
        by_spk.entry(&e.spk_id).or_default().push(&e.utt_id);
    }
    let eligible = by_spk.values().filter(|u| u.len() > enroll_per_spk).count();
    if eligible < 2 {
        return Err(EvalError::InsufficientData(format!(
            "event {event}: {eligible} speaker(s) with more than {enroll_per_spk} utterances, need 2"
        )));
    }
    let mut out = Vec::new();
    for (spk, mut utts) in by_spk {
        if utts.len() < enroll_per_spk {
            continue;
        }
        utts.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("trials.{event}.{spk}")));
        utts.shuffle(&mut rng);
        let (enroll, test) = utts.split_at(enroll_per_spk);
        out.push(SpeakerSplit {
            spk_id: spk.to_string(),
            enroll: enroll.iter().map(|s| s.to_string()).collect(),
            test: test.iter().map(|s| s.to_string()).collect(),
        });
    }
    Ok(out)
}

/// Every test utterance against every enrollment set.
pub fn build_trials(
    manifest: &[ManifestEntry],
    event: Event,
    enroll_per_spk: usize,
    seed: u64,
) -> Result<Vec<Trial>, EvalError> {
    let splits = enrollment_split(manifest, event, enroll_per_spk, seed)?;
    let mut trials = Vec::new();
    for e in &splits {
        for t in &splits {
            for utt in &t.test {
                trials.push(Trial {
                    enroll_utts: e.enroll.clone(),
                    test_utt: utt.clone(),
                    label: if e.spk_id == t.spk_id { Label::Target } else { Label::Nontarget },
                    event,
                });
            }
        }
    }
    Ok(trials)
}

pub fn write_trials(path: impl AsRef<Path>, trials: &[Trial]) -> Result<(), EvalError> {
    let path = path.as_ref();
    let mut s = String::new();
    for t in trials {
        let _ = writeln!(s, "{}", t.to_line());
    }
    std::fs::write(path, s).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn parse_lines(path: &Path) -> Result<Vec<(Trial, Option<String>)>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            Trial::parse(l)
                .map(|(t, extra)| (t, extra.map(str::to_string)))
                .map_err(|reason| EvalError::Parse { path: path.to_path_buf(), line: i + 1, reason })
        })
        .collect()
}

pub fn read_trials(path: impl AsRef<Path>) -> Result<Vec<Trial>, EvalError> {
    Ok(parse_lines(path.as_ref())?.into_iter().map(|(t, _)| t).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn manifest(n_spk: usize, n_utt: usize, event: Event) -> Vec<ManifestEntry> {
        let mut out = Vec::new();
        for s in 0..n_spk {
            for u in 0..n_utt {
                let utt_id = format!("S{s:03}-{event}-{u:02}");
                out.push(ManifestEntry {
                    path: format!("{utt_id}.wav").into(),
                    utt_id,
                    spk_id: format!("S{s:03}"),
                    event,
                    duration_s: 0.3,
                });
            }
        }
        out
    }

    #[test]
    fn counting_example() {
        let m = manifest(2, 3, Event::Cough);
        let t = build_trials(&m, Event::Cough, 2, 1).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.iter().filter(|t| t.label == Label::Target).count(), 2);
        for tr in &t {
            assert!(!tr.enroll_utts.contains(&tr.test_utt));
            assert_eq!(tr.enroll_utts.len(), 2);
        }
        assert_eq!(t, build_trials(&m, Event::Cough, 2, 1).unwrap());
        assert!(build_trials(&m, Event::Laugh, 2, 1).is_err());
        assert!(matches!(build_trials(&m, Event::Cough, 3, 1), Err(EvalError::InsufficientData(_))));
    }

    #[test]
    fn speaker_without_tests_still_enrolls() {
        let mut m = manifest(2, 4, Event::Wei);
        m.extend(manifest(3, 2, Event::Wei).into_iter().skip(4));
        let splits = enrollment_split(&m, Event::Wei, 2, 3).unwrap();
        assert_eq!(splits.len(), 3);
        assert!(splits[2].test.is_empty());
        let t = build_trials(&m, Event::Wei, 2, 3).unwrap();
        assert_eq!(t.len(), 3 * 4);
    }

    #[test]
    fn seed_changes_split() {
        let m = manifest(3, 8, Event::Laugh);
        let a = enrollment_split(&m, Event::Laugh, 3, 1).unwrap();
        let b = enrollment_split(&m, Event::Laugh, 3, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("trials.tsv");
        let t = build_trials(&manifest(3, 3, Event::Cough), Event::Cough, 1, 0).unwrap();
        write_trials(&p, &t).unwrap();
        assert_eq!(read_trials(&p).unwrap(), t);
        std::fs::write(&p, "a\tb\tmaybe\tcough\n").unwrap();
        assert!(matches!(read_trials(&p), Err(EvalError::Parse { line: 1, .. })));
    }
}
