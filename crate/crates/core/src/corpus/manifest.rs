use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{CorpusError, Event};

/// One utterance of a corpus manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub utt_id: String,
    pub spk_id: String,
    pub event: Event,
    pub path: PathBuf,
    pub duration_s: f64,
}

impl ManifestEntry {
    pub fn to_line(&self) -> String {
        format!("{}\t{}\t{}\t{}\t{}", self.utt_id, self.spk_id, self.event, self.path.display(), self.duration_s)
    }
}

/// Parses manifest text: `utt_id TAB spk_id TAB event TAB path TAB duration_s`.
///
/// Blank lines and lines starting with `#` are skipped. Line numbers in
/// errors are 1-based.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, CorpusError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(CorpusError::Parse {
                line: line_no,
                reason: format!("expected 5 tab-separated fields, found {}", fields.len()),
            });
        }
        let duration_s: f64 = fields[4].trim().parse().map_err(|_| CorpusError::Parse {
            line: line_no,
            reason: format!("non-numeric duration `{}`", fields[4]),
        })?;
        if !duration_s.is_finite() || duration_s < 0.0 {
            return Err(CorpusError::Parse { line: line_no, reason: format!("invalid duration `{}`", fields[4]) });
        }
        let utt_id = fields[0].trim().to_string();
        if utt_id.is_empty() {
            return Err(CorpusError::Parse { line: line_no, reason: "empty utt_id".into() });
        }
        if !seen.insert(utt_id.clone()) {
            return Err(CorpusError::DuplicateUttId(utt_id));
        }
        entries.push(ManifestEntry {
            utt_id,
            spk_id: fields[1].trim().to_string(),
            event: Event::from_token(fields[2]),
            path: PathBuf::from(fields[3].trim()),
            duration_s,
        });
    }
    Ok(entries)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => CorpusError::NotFound(path.to_path_buf()),
        _ => CorpusError::Io { path: path.to_path_buf(), source },
    })?;
    parse_manifest(&text)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let mut text = String::from("# utt_id\tspk_id\tevent\tpath\tduration_s\n");
    for e in entries {
        let _ = writeln!(text, "{}", e.to_line());
    }
    std::fs::write(path, text).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

/// Counts and means for one slice of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStats {
    pub n_speakers: usize,
    pub n_utts: usize,
    pub utts_per_spk: f64,
    pub avg_dur_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub overall: EventStats,
    pub per_event: BTreeMap<Event, EventStats>,
}

fn stats_of<'a>(entries: impl Iterator<Item = &'a ManifestEntry>) -> EventStats {
    let mut speakers = BTreeSet::new();
    let mut n_utts = 0usize;
    let mut total_dur = 0.0;
    for e in entries {
        speakers.insert(e.spk_id.as_str());
        n_utts += 1;
        total_dur += e.duration_s;
    }
    let n_speakers = speakers.len();
    EventStats {
        n_speakers,
        n_utts,
        utts_per_spk: n_utts as f64 / n_speakers as f64,
        avg_dur_s: total_dur / n_utts as f64,
    }
}

/// Per-event and overall speaker/utterance counts and mean duration.
pub fn manifest_stats(entries: &[ManifestEntry]) -> Result<CorpusStats, CorpusError> {
    if entries.is_empty() {
        return Err(CorpusError::EmptyManifest);
    }
    let events: BTreeSet<Event> = entries.iter().map(|e| e.event).collect();
    let per_event = events
        .into_iter()
        .map(|ev| (ev, stats_of(entries.iter().filter(|e| e.event == ev))))
        .collect();
    Ok(CorpusStats { overall: stats_of(entries.iter()), per_event })
}

impl CorpusStats {
    /// Table with one row per event plus a total row.
    pub fn to_table(&self) -> String {
        let mut out = String::from("event\tspks\tutts\tutts/spk\tavg_dur_s\n");
        let mut row = |name: &str, s: &EventStats| {
            let _ = writeln!(out, "{name}\t{}\t{}\t{:.1}\t{:.2}", s.n_speakers, s.n_utts, s.utts_per_spk, s.avg_dur_s);
        };
        for (ev, s) in &self.per_event {
            row(ev.as_str(), s);
        }
        row("all", &self.overall);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(utt: &str, spk: &str, ev: Event, dur: f64) -> ManifestEntry {
        ManifestEntry { utt_id: utt.into(), spk_id: spk.into(), event: ev, path: format!("{utt}.wav").into(), duration_s: dur }
    }

    #[test]
    fn empty_text_is_empty_list() {
        assert!(parse_manifest("").unwrap().is_empty());
        assert!(parse_manifest("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn parses_single_line() {
        let e = parse_manifest("c01\tS001\tcough\t/d/c01.wav\t0.27").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].event, Event::Cough);
        assert_eq!(e[0].duration_s, 0.27);
        assert_eq!(e[0].path, PathBuf::from("/d/c01.wav"));
    }

    #[test]
    fn unknown_event_maps_to_other() {
        let e = parse_manifest("x\tS1\tsneeze\tx.wav\t0.1").unwrap();
        assert_eq!(e[0].event, Event::Other);
    }

    #[test]
    fn duplicate_and_parse_errors() {
        let dup = "c01\tS001\tcough\ta.wav\t0.2\nc01\tS002\tlaugh\tb.wav\t0.3\n";
        assert!(matches!(parse_manifest(dup), Err(CorpusError::DuplicateUttId(id)) if id == "c01"));
        let bad = "# header\nc01\tS001\tcough\ta.wav\tabc\n";
        assert!(matches!(parse_manifest(bad), Err(CorpusError::Parse { line: 2, .. })));
        let short = "c01\tS001\tcough\n";
        assert!(matches!(parse_manifest(short), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn stats_small_cases() {
        let one = manifest_stats(&[entry("a", "S1", Event::Wei, 0.5)]).unwrap();
        assert_eq!(one.overall.n_speakers, 1);
        assert_eq!(one.overall.n_utts, 1);
        assert_eq!(one.overall.avg_dur_s, 0.5);

        let mut two = Vec::new();
        for i in 0..2 {
            two.push(entry(&format!("a{i}"), "A", Event::Cough, 0.2));
        }
        for i in 0..4 {
            two.push(entry(&format!("b{i}"), "B", Event::Cough, 0.2));
        }
        assert_eq!(manifest_stats(&two).unwrap().overall.utts_per_spk, 3.0);
        assert!(matches!(manifest_stats(&[]), Err(CorpusError::EmptyManifest)));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tsv");
        let entries = vec![entry("a", "S1", Event::Cough, 0.25), entry("b", "S2", Event::Laugh, 0.375)];
        write_manifest(&p, &entries).unwrap();
        assert_eq!(load_manifest(&p).unwrap(), entries);
    }
}
