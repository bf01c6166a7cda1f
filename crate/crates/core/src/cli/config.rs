use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::backend::BackendOptions;
use crate::corpus::{Event, SynthSpec};
use crate::ctdnn::{CtDnnConfig, TrainOptions};
use crate::frontend::{FrontendConfig, SpliceSpec};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{path} line {line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("cannot read config {path}: {reason}")]
    Read { path: String, reason: String },
}

/// Which events a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventFilter {
    #[default]
    All,
    One(Event),
}

impl EventFilter {
    pub fn events(self) -> Vec<Event> {
        match self {
            EventFilter::All => Event::TRIVIAL.to_vec(),
            EventFilter::One(e) => vec![e],
        }
    }
}

impl FromStr for EventFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(EventFilter::All),
            "cough" | "laugh" | "wei" => Ok(EventFilter::One(Event::from_token(s))),
            _ => Err("expected cough|laugh|wei|all".into()),
        }
    }
}

impl std::fmt::Display for EventFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventFilter::All => f.write_str("all"),
            EventFilter::One(e) => write!(f, "{e}"),
        }
    }
}

/// Which utterances train the network and the LDA/PLDA backends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainSplit {
    /// Enrollment utterances of the trial protocol; test utterances stay unseen.
    #[default]
    Enroll,
    All,
}

impl FromStr for TrainSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "enroll" => Ok(TrainSplit::Enroll),
            "all" => Ok(TrainSplit::All),
            _ => Err("expected enroll|all".into()),
        }
    }
}

impl std::fmt::Display for TrainSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TrainSplit::Enroll => "enroll",
            TrainSplit::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Empty means a default location under `out_dir`.
    pub manifest: PathBuf,
    pub model: PathBuf,
    pub dvectors: PathBuf,
    pub synth: SynthSpec,
    pub frontend: FrontendConfig,
    pub cmvn: bool,
    pub net: CtDnnConfig,
    pub trainer: TrainOptions,
    pub train_split: TrainSplit,
    pub backend: BackendOptions,
    pub enroll_per_spk: usize,
    pub event: EventFilter,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            out_dir: "out".into(),
            manifest: PathBuf::new(),
            model: PathBuf::new(),
            dvectors: PathBuf::new(),
            synth: SynthSpec::default(),
            frontend: FrontendConfig::default(),
            cmvn: false,
            net: CtDnnConfig::default(),
            trainer: TrainOptions::default(),
            train_split: TrainSplit::Enroll,
            backend: BackendOptions::default(),
            enroll_per_spk: 3,
            event: EventFilter::All,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_offsets(key: &str, value: &str) -> Result<Vec<i64>, ConfigError> {
    value.split(',').map(|t| parse::<i64>(key, t)).collect()
}

fn parse_events(key: &str, value: &str) -> Result<Vec<Event>, ConfigError> {
    value
        .split(',')
        .map(|t| match t.trim() {
            "cough" | "laugh" | "wei" => Ok(Event::from_token(t.trim())),
            _ => Err(ConfigError::BadValue { key: key.into(), value: value.into(), reason: "expected cough,laugh,wei".into() }),
        })
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Every key with its current value, in documentation order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = &self.frontend;
        let n = &self.net;
        let t = &self.trainer;
        let b = &self.backend;
        let s = &self.synth;
        let path = |p: &Path| p.display().to_string();
        vec![
            ("seed", self.seed.to_string()),
            ("paths.out_dir", path(&self.out_dir)),
            ("paths.manifest", path(&self.manifest)),
            ("paths.model", path(&self.model)),
            ("paths.dvectors", path(&self.dvectors)),
            ("synth.n_speakers", s.n_speakers.to_string()),
            ("synth.utts_per_event", s.utts_per_speaker_per_event.to_string()),
            ("synth.events", join(&s.events)),
            ("synth.min_duration_s", s.duration_range_s.0.to_string()),
            ("synth.max_duration_s", s.duration_range_s.1.to_string()),
            ("synth.sample_rate_hz", s.sample_rate_hz.to_string()),
            ("frontend.sample_rate_hz", f.sample_rate_hz.to_string()),
            ("frontend.frame_len_ms", f.frame_len_ms.to_string()),
            ("frontend.frame_shift_ms", f.frame_shift_ms.to_string()),
            ("frontend.preemphasis", f.preemphasis.to_string()),
            ("frontend.n_mels", f.n_mels.to_string()),
            ("frontend.fmin_hz", f.fmin_hz.to_string()),
            ("frontend.fmax_hz", f.fmax_hz.to_string()),
            ("frontend.log_floor", f.log_floor.to_string()),
            ("frontend.cmvn", self.cmvn.to_string()),
            ("frontend.splice_left", n.splice.left.to_string()),
            ("frontend.splice_right", n.splice.right.to_string()),
            ("net.conv1_maps", n.conv1.maps.to_string()),
            ("net.conv1_patch_time", n.conv1.patch_time.to_string()),
            ("net.conv1_patch_freq", n.conv1.patch_freq.to_string()),
            ("net.conv1_pool_freq", n.conv1.pool_freq.to_string()),
            ("net.conv2_maps", n.conv2.maps.to_string()),
            ("net.conv2_patch_time", n.conv2.patch_time.to_string()),
            ("net.conv2_patch_freq", n.conv2.patch_freq.to_string()),
            ("net.conv2_pool_freq", n.conv2.pool_freq.to_string()),
            ("net.bottleneck_dim", n.bottleneck_dim.to_string()),
            ("net.td1_offsets", join(&n.td1_offsets)),
            ("net.td2_offsets", join(&n.td2_offsets)),
            ("net.td_dim", n.td_dim.to_string()),
            ("net.pnorm_p", n.pnorm.p.to_string()),
            ("net.pnorm_group", n.pnorm.group.to_string()),
            ("net.feature_dim", n.feature_dim.to_string()),
            ("trainer.epochs", t.epochs.to_string()),
            ("trainer.lr", t.lr.to_string()),
            ("trainer.momentum", t.momentum.to_string()),
            ("trainer.lr_decay", t.lr_decay.to_string()),
            ("trainer.frame_budget", t.frame_budget.to_string()),
            ("trainer.split", self.train_split.to_string()),
            ("backend.scorer", b.kind.to_string()),
            ("backend.length_norm", b.length_norm.to_string()),
            ("backend.lda_dim", b.lda_dim.to_string()),
            ("backend.plda_use_lda", b.plda_use_lda.to_string()),
            ("backend.plda_iters", b.plda_iters.to_string()),
            ("trials.enroll_per_spk", self.enroll_per_spk.to_string()),
            ("eval.event", self.event.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "paths.out_dir" => self.out_dir = v.into(),
            "paths.manifest" => self.manifest = v.into(),
            "paths.model" => self.model = v.into(),
            "paths.dvectors" => self.dvectors = v.into(),
            "synth.n_speakers" => self.synth.n_speakers = parse(key, v)?,
            "synth.utts_per_event" => self.synth.utts_per_speaker_per_event = parse(key, v)?,
            "synth.events" => self.synth.events = parse_events(key, v)?,
            "synth.min_duration_s" => self.synth.duration_range_s.0 = parse(key, v)?,
            "synth.max_duration_s" => self.synth.duration_range_s.1 = parse(key, v)?,
            "synth.sample_rate_hz" => self.synth.sample_rate_hz = parse(key, v)?,
            "frontend.sample_rate_hz" => self.frontend.sample_rate_hz = parse(key, v)?,
            "frontend.frame_len_ms" => self.frontend.frame_len_ms = parse(key, v)?,
            "frontend.frame_shift_ms" => self.frontend.frame_shift_ms = parse(key, v)?,
            "frontend.preemphasis" => self.frontend.preemphasis = parse(key, v)?,
            "frontend.n_mels" => {
                self.frontend.n_mels = parse(key, v)?;
                self.net.input_mels = self.frontend.n_mels;
            }
            "frontend.fmin_hz" => self.frontend.fmin_hz = parse(key, v)?,
            "frontend.fmax_hz" => self.frontend.fmax_hz = parse(key, v)?,
            "frontend.log_floor" => self.frontend.log_floor = parse(key, v)?,
            "frontend.cmvn" => self.cmvn = parse(key, v)?,
            "frontend.splice_left" => self.net.splice.left = parse(key, v)?,
            "frontend.splice_right" => self.net.splice.right = parse(key, v)?,
            "net.conv1_maps" => self.net.conv1.maps = parse(key, v)?,
            "net.conv1_patch_time" => self.net.conv1.patch_time = parse(key, v)?,
            "net.conv1_patch_freq" => self.net.conv1.patch_freq = parse(key, v)?,
            "net.conv1_pool_freq" => self.net.conv1.pool_freq = parse(key, v)?,
            "net.conv2_maps" => self.net.conv2.maps = parse(key, v)?,
            "net.conv2_patch_time" => self.net.conv2.patch_time = parse(key, v)?,
            "net.conv2_patch_freq" => self.net.conv2.patch_freq = parse(key, v)?,
            "net.conv2_pool_freq" => self.net.conv2.pool_freq = parse(key, v)?,
            "net.bottleneck_dim" => self.net.bottleneck_dim = parse(key, v)?,
            "net.td1_offsets" => self.net.td1_offsets = parse_offsets(key, v)?,
            "net.td2_offsets" => self.net.td2_offsets = parse_offsets(key, v)?,
            "net.td_dim" => self.net.td_dim = parse(key, v)?,
            "net.pnorm_p" => self.net.pnorm.p = parse(key, v)?,
            "net.pnorm_group" => self.net.pnorm.group = parse(key, v)?,
            "net.feature_dim" => self.net.feature_dim = parse(key, v)?,
            "trainer.epochs" => self.trainer.epochs = parse(key, v)?,
            "trainer.lr" => self.trainer.lr = parse(key, v)?,
            "trainer.momentum" => self.trainer.momentum = parse(key, v)?,
            "trainer.lr_decay" => self.trainer.lr_decay = parse(key, v)?,
            "trainer.frame_budget" => self.trainer.frame_budget = parse(key, v)?,
            "trainer.split" => self.train_split = parse(key, v)?,
            "backend.scorer" => self.backend.kind = parse(key, v)?,
            "backend.length_norm" => self.backend.length_norm = parse(key, v)?,
            "backend.lda_dim" => self.backend.lda_dim = parse(key, v)?,
            "backend.plda_use_lda" => self.backend.plda_use_lda = parse(key, v)?,
            "backend.plda_iters" => self.backend.plda_iters = parse(key, v)?,
            "trials.enroll_per_spk" => self.enroll_per_spk = parse(key, v)?,
            "eval.event" => self.event = parse(key, v)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines (`#` starts a comment), then `overrides`.
    /// Returns warnings for keys repeated within the text.
    pub fn apply_text(&mut self, text: &str, source: &str) -> Result<Vec<String>, ConfigError> {
        let mut seen = std::collections::HashMap::new();
        let mut warnings = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                path: source.to_string(),
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            let k = k.trim();
            self.set(k, v).map_err(|e| match e {
                ConfigError::BadValue { .. } => ConfigError::Parse { path: source.to_string(), line: i + 1, reason: e.to_string() },
                other => other,
            })?;
            if let Some(prev) = seen.insert(k.to_string(), i + 1) {
                warnings.push(format!("{source}: `{k}` set on lines {prev} and {}; the last value wins", i + 1));
            }
        }
        Ok(warnings)
    }

    pub fn manifest_path(&self) -> PathBuf {
        if self.manifest.as_os_str().is_empty() { self.out_dir.join("corpus").join("manifest.txt") } else { self.manifest.clone() }
    }

    pub fn model_path(&self) -> PathBuf {
        if self.model.as_os_str().is_empty() { self.out_dir.join("model.ctdnn") } else { self.model.clone() }
    }

    pub fn dvectors_path(&self) -> PathBuf {
        if self.dvectors.as_os_str().is_empty() { self.out_dir.join("dvectors.txt") } else { self.dvectors.clone() }
    }

    pub fn splice(&self) -> SpliceSpec {
        self.net.splice
    }

    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Defaults, then the file (if any), then `overrides` in order.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let mut cfg = RunConfig::default();
    let mut warnings = Vec::new();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| ConfigError::Read { path: p.display().to_string(), reason: e.to_string() })?;
        warnings = cfg.apply_text(&text, &p.display().to_string())?;
    }
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::Parse {
            path: "--set".into(),
            line: 0,
            reason: format!("expected key=value, got `{o}`"),
        })?;
        cfg.set(k.trim(), v)?;
    }
    Ok((cfg, warnings))
}
