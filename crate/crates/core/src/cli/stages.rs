use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{RunConfig, TrainSplit};
use crate::backend::{extract_dvector, read_dvectors, write_dvectors, Backend, DVector};
use crate::corpus::{load_manifest, read_wav, synth_corpus, write_manifest, write_wav, Event, ManifestEntry, SynthSpec};
use crate::ctdnn::{init_params, load_params, save_params, train_with, TrainOptions};
use crate::eval::{build_trials, compute_eer, enrollment_split, read_scores, score_trials, write_scores, write_trials, EerReport};
use crate::frontend::{FeatureMatrix, InputPipeline, NumberFormat};
use crate::rng::derive_seed;

/// Failure of one pipeline stage, attributed to the file being handled.
#[derive(Debug, thiserror::Error)]
#[error("stage `{stage}` failed on {}: {message}", file.display())]
pub struct StageError {
    pub stage: &'static str,
    pub file: PathBuf,
    pub message: String,
}

fn fail<E: std::fmt::Display>(stage: &'static str, file: &Path) -> impl FnOnce(E) -> StageError {
    let file = file.to_path_buf();
    move |e| StageError { stage, file, message: e.to_string() }
}

fn ensure_dir(stage: &'static str, dir: &Path) -> Result<(), StageError> {
    std::fs::create_dir_all(dir).map_err(fail(stage, dir))
}

fn write_text(stage: &'static str, path: &Path, text: &str) -> Result<(), StageError> {
    std::fs::write(path, text).map_err(fail(stage, path))
}

fn audio_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn trials_seed(cfg: &RunConfig) -> u64 {
    derive_seed(cfg.seed, "trials")
}

pub fn synth_spec(cfg: &RunConfig) -> SynthSpec {
    SynthSpec { seed: derive_seed(cfg.seed, "synth"), ..cfg.synth.clone() }
}

pub fn run_synth(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "synth";
    let manifest = cfg.manifest_path();
    let dir = audio_dir(&manifest);
    ensure_dir(STAGE, &dir)?;
    let (clips, entries) = synth_corpus(&synth_spec(cfg)).map_err(fail(STAGE, &manifest))?;
    for (clip, e) in clips.iter().zip(&entries) {
        let p = dir.join(&e.path);
        write_wav(&p, clip).map_err(fail(STAGE, &p))?;
    }
    write_manifest(&manifest, &entries).map_err(fail(STAGE, &manifest))?;
    eprintln!("synth: {} utterances -> {}", entries.len(), manifest.display());
    Ok(manifest)
}

fn load_selected(stage: &'static str, cfg: &RunConfig) -> Result<Vec<ManifestEntry>, StageError> {
    let path = cfg.manifest_path();
    let events = cfg.event.events();
    let all = load_manifest(&path).map_err(fail(stage, &path))?;
    Ok(all.into_iter().filter(|e| events.contains(&e.event)).collect())
}

/// Utterance ids used to train the network and the backend.
fn training_ids(stage: &'static str, cfg: &RunConfig, manifest: &[ManifestEntry]) -> Result<BTreeSet<String>, StageError> {
    let path = cfg.manifest_path();
    match cfg.train_split {
        TrainSplit::All => Ok(manifest.iter().map(|e| e.utt_id.clone()).collect()),
        TrainSplit::Enroll => {
            let mut ids = BTreeSet::new();
            for ev in cfg.event.events() {
                let splits = enrollment_split(manifest, ev, cfg.enroll_per_spk, trials_seed(cfg)).map_err(fail(stage, &path))?;
                ids.extend(splits.into_iter().flat_map(|s| s.enroll));
            }
            Ok(ids)
        }
    }
}

fn input_pipeline(stage: &'static str, cfg: &RunConfig) -> Result<InputPipeline, StageError> {
    InputPipeline::new(&cfg.frontend, cfg.cmvn, cfg.splice()).map_err(|e| StageError {
        stage,
        file: PathBuf::from("<config>"),
        message: e.to_string(),
    })
}

fn prepare(stage: &'static str, input: &InputPipeline, dir: &Path, e: &ManifestEntry) -> Result<FeatureMatrix, StageError> {
    let p = dir.join(&e.path);
    let clip = read_wav(&p).map_err(fail(stage, &p))?;
    input.prepare(&clip).map_err(fail(stage, &p))
}

pub fn train_options(cfg: &RunConfig) -> TrainOptions {
    TrainOptions { seed: derive_seed(cfg.seed, "train"), ..cfg.trainer.clone() }
}

pub fn run_train(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "train";
    let manifest = load_selected(STAGE, cfg)?;
    let ids = training_ids(STAGE, cfg, &manifest)?;
    let input = input_pipeline(STAGE, cfg)?;
    let dir = audio_dir(&cfg.manifest_path());
    let chosen: Vec<&ManifestEntry> = manifest.iter().filter(|e| ids.contains(&e.utt_id)).collect();
    let speakers: BTreeMap<&str, usize> = chosen
        .iter()
        .map(|e| e.spk_id.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    let mut dataset = Vec::with_capacity(chosen.len());
    for e in &chosen {
        let x = prepare(STAGE, &input, &dir, e)?;
        let labels = vec![speakers[e.spk_id.as_str()]; x.n_frames()];
        dataset.push((x, labels));
    }
    let model_path = cfg.model_path();
    let net = crate::ctdnn::CtDnnConfig { n_speakers: speakers.len(), ..cfg.net.clone() };
    let params = init_params(&net, derive_seed(cfg.seed, "init")).map_err(fail(STAGE, &model_path))?;
    let frames: usize = dataset.iter().map(|(x, _)| x.n_frames()).sum();
    eprintln!("train: {} utterances, {frames} frames, {} speakers", dataset.len(), speakers.len());
    let (params, reports) = train_with(params, &dataset, &train_options(cfg), |r| {
        eprintln!("train: epoch {} cross-entropy {:.4} frame accuracy {:.4}", r.epoch, r.mean_cross_entropy, r.frame_accuracy);
    })
    .map_err(fail(STAGE, &model_path))?;
    if let Some(parent) = model_path.parent() {
        ensure_dir(STAGE, parent)?;
    }
    save_params(&params, &model_path).map_err(fail(STAGE, &model_path))?;
    let mut report = String::from("epoch\tcross_entropy\tframe_accuracy\n");
    for r in &reports {
        let _ = writeln!(report, "{}\t{}\t{}", r.epoch, r.mean_cross_entropy, r.frame_accuracy);
    }
    let report_path = model_path.with_extension("train.tsv");
    write_text(STAGE, &report_path, &report)?;
    Ok(model_path)
}

pub fn run_extract(cfg: &RunConfig) -> Result<PathBuf, StageError> {
    const STAGE: &str = "extract";
    let manifest = load_selected(STAGE, cfg)?;
    let model_path = cfg.model_path();
    let model = load_params(&model_path).map_err(fail(STAGE, &model_path))?;
    let input = input_pipeline(STAGE, cfg)?;
    let dir = audio_dir(&cfg.manifest_path());
    let mut out = Vec::with_capacity(manifest.len());
    for e in &manifest {
        let x = prepare(STAGE, &input, &dir, e)?;
        let v = extract_dvector(&model, &x).map_err(fail(STAGE, &dir.join(&e.path)))?;
        out.push(DVector::new(e.utt_id.clone(), v).with_speaker(e.spk_id.clone()).with_event(e.event));
    }
    let path = cfg.dvectors_path();
    if let Some(parent) = path.parent() {
        ensure_dir(STAGE, parent)?;
    }
    write_dvectors(&path, &out).map_err(fail(STAGE, &path))?;
    eprintln!("extract: {} d-vectors -> {}", out.len(), path.display());
    Ok(path)
}

fn scores_path(cfg: &RunConfig, ev: Event) -> PathBuf {
    cfg.out_dir.join(format!("scores_{ev}.tsv"))
}

pub fn run_score(cfg: &RunConfig) -> Result<Vec<PathBuf>, StageError> {
    const STAGE: &str = "score";
    let manifest = load_selected(STAGE, cfg)?;
    let dv_path = cfg.dvectors_path();
    let dvectors = read_dvectors(&dv_path).map_err(fail(STAGE, &dv_path))?;
    let ids = training_ids(STAGE, cfg, &manifest)?;
    let train: Vec<DVector> = dvectors.iter().filter(|v| ids.contains(&v.utt_id)).cloned().collect();
    let backend = Backend::fit(&cfg.backend, &train).map_err(fail(STAGE, &dv_path))?;
    if let Some(k) = backend.lda_dim {
        if k < cfg.backend.lda_dim {
            eprintln!("score: warning: LDA dimension {} exceeds the data's limit; using {k}", cfg.backend.lda_dim);
        }
    }
    ensure_dir(STAGE, &cfg.out_dir)?;
    let mut written = Vec::new();
    for ev in cfg.event.events() {
        let manifest_path = cfg.manifest_path();
        let trials = build_trials(&manifest, ev, cfg.enroll_per_spk, trials_seed(cfg)).map_err(fail(STAGE, &manifest_path))?;
        let tp = cfg.out_dir.join(format!("trials_{ev}.tsv"));
        write_trials(&tp, &trials).map_err(fail(STAGE, &tp))?;
        let scores = score_trials(&trials, &dvectors, &backend).map_err(fail(STAGE, &dv_path))?;
        let sp = scores_path(cfg, ev);
        write_scores(&sp, &scores).map_err(fail(STAGE, &sp))?;
        eprintln!("score: {ev}: {} trials ({}) -> {}", trials.len(), cfg.backend.kind, sp.display());
        written.push(sp);
    }
    Ok(written)
}

pub fn run_eval(cfg: &RunConfig) -> Result<Vec<(Event, EerReport)>, StageError> {
    const STAGE: &str = "eval";
    let mut out = Vec::new();
    for ev in cfg.event.events() {
        let sp = scores_path(cfg, ev);
        let scores = read_scores(&sp).map_err(fail(STAGE, &sp))?;
        let report = compute_eer(&scores).map_err(fail(STAGE, &sp))?;
        let header = [
            ("event", ev.to_string()),
            ("scorer", cfg.backend.kind.to_string()),
            ("enroll_per_spk", cfg.enroll_per_spk.to_string()),
            ("seed", cfg.seed.to_string()),
        ];
        write_text(STAGE, &cfg.out_dir.join(format!("eer_{ev}.txt")), &report.to_text(&header))?;
        write_text(STAGE, &cfg.out_dir.join(format!("det_{ev}.csv")), &report.to_csv())?;
        println!(
            "{ev}\teer={:.4}\tthreshold={:.6}\tn_target={}\tn_nontarget={}",
            report.eer, report.threshold, report.n_target, report.n_nontarget
        );
        out.push((ev, report));
    }
    Ok(out)
}

pub fn run_dump(cfg: &RunConfig, out: &Path, format: NumberFormat) -> Result<usize, StageError> {
    const STAGE: &str = "dump";
    let manifest = load_selected(STAGE, cfg)?;
    let model_path = cfg.model_path();
    let model = load_params(&model_path).map_err(fail(STAGE, &model_path))?;
    let input = input_pipeline(STAGE, cfg)?;
    let dir = audio_dir(&cfg.manifest_path());
    crate::eval::dump_features(&model, &input, &manifest, &dir, out, format).map_err(fail(STAGE, out))
}

/// synth → train → extract → score → eval, each stage reading the previous
/// stage's files.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Vec<(Event, EerReport)>, StageError> {
    ensure_dir("pipeline", &cfg.out_dir)?;
    write_text("pipeline", &cfg.out_dir.join("config.txt"), &cfg.to_text())?;
    run_synth(cfg)?;
    run_train(cfg)?;
    run_extract(cfg)?;
    run_score(cfg)?;
    run_eval(cfg)
}
