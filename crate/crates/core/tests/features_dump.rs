mod common;

use common::fixtures::tiny_configs;
use sre_core::backend::extract_dvector;
use sre_core::corpus::{synth_corpus, write_wav, SynthSpec};
use sre_core::ctdnn::{forward, init_params, CtDnnConfig};
use sre_core::eval::dump_features;
use sre_core::frontend::{read_feature_dump, FrontendConfig, InputPipeline, NumberFormat};

fn setup() -> (tempfile::TempDir, Vec<sre_core::corpus::ManifestEntry>, InputPipeline, sre_core::ctdnn::CtDnnParams) {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { n_speakers: 3, utts_per_speaker_per_event: 2, ..Default::default() };
    let (clips, entries) = synth_corpus(&spec).unwrap();
    for (c, e) in clips.iter().zip(&entries) {
        write_wav(dir.path().join(&e.path), c).unwrap();
    }
    let fe = FrontendConfig { n_mels: 8, ..Default::default() };
    let net = CtDnnConfig { n_speakers: 3, ..tiny_configs()[0].clone() };
    let input = InputPipeline::new(&fe, false, net.splice).unwrap();
    (dir, entries, input, init_params(&net, 4).unwrap())
}

#[test]
fn hex_dump_round_trips_and_counts_rows() {
    let (dir, entries, input, model) = setup();
    let out = dir.path().join("feats.txt");
    let rows = dump_features(&model, &input, &entries, dir.path(), &out, NumberFormat::Hex).unwrap();
    let blocks = read_feature_dump(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(blocks.len(), entries.len());
    let mut total = 0;
    for ((h, m), e) in blocks.iter().zip(&entries) {
        let clip = sre_core::corpus::read_wav(dir.path().join(&e.path)).unwrap();
        let want = forward(&model, &input.prepare(&clip).unwrap()).unwrap().features;
        assert_eq!(m, &want);
        assert_eq!(h.labels, Some((e.spk_id.clone(), e.event.to_string())));
        total += m.n_frames();
    }
    assert_eq!(rows, total);
}

#[test]
fn empty_manifest_writes_empty_file() {
    let (dir, _, input, model) = setup();
    let out = dir.path().join("none.txt");
    assert_eq!(dump_features(&model, &input, &[], dir.path(), &out, NumberFormat::Decimal).unwrap(), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn dvector_is_mean_of_feature_rows() {
    let (dir, entries, input, model) = setup();
    for e in entries.iter().take(4) {
        let x = input.prepare(&sre_core::corpus::read_wav(dir.path().join(&e.path)).unwrap()).unwrap();
        let f = forward(&model, &x).unwrap().features;
        let mut mean = vec![0.0; f.dim()];
        for r in f.rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= f.n_frames() as f64);
        assert_eq!(extract_dvector(&model, &x).unwrap(), mean);
    }
}
