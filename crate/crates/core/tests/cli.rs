use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = "\
# small enough to run in seconds
synth.n_speakers=4
synth.utts_per_event=4
frontend.n_mels=16
net.conv1_maps=4
net.conv2_maps=4
net.conv1_pool_freq=1
net.bottleneck_dim=16
net.td_dim=16
net.feature_dim=8
trainer.epochs=2
trials.enroll_per_spk=2
backend.lda_dim=3
";

fn sre(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sre")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn pipeline_produces_every_artifact_and_stages_compose() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.cfg"), TINY).unwrap();
    let out = sre(dir.path(), &["pipeline", "--config", "tiny.cfg", "--out", "run"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let run = dir.path().join("run");
    for f in ["corpus/manifest.txt", "model.ctdnn", "model.train.tsv", "dvectors.txt", "config.txt"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    for ev in ["cough", "laugh", "wei"] {
        for f in [format!("trials_{ev}.tsv"), format!("scores_{ev}.tsv"), format!("eer_{ev}.txt"), format!("det_{ev}.csv")] {
            assert!(run.join(&f).is_file(), "missing {f}");
        }
        let report = std::fs::read_to_string(run.join(format!("eer_{ev}.txt"))).unwrap();
        for key in ["eer=", "threshold=", "n_target=", "n_nontarget=", "det:"] {
            assert!(report.contains(key), "{key} missing from report");
        }
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 3);

    // Later stages rerun from files alone, with another scorer and one event.
    for scorer in ["lda", "plda"] {
        let out = sre(dir.path(), &["score", "--config", "tiny.cfg", "--out", "run", "--scorer", scorer, "--event", "laugh"]);
        assert!(out.status.success(), "{scorer}: {}", stderr(&out));
        let out = sre(dir.path(), &["eval", "--config", "tiny.cfg", "--out", "run", "--scorer", scorer, "--event", "laugh"]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("laugh\teer="));
    }

    let out = sre(dir.path(), &["dump-features", "feats.txt", "--config", "tiny.cfg", "--out", "run", "--event", "wei"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dump = std::fs::read_to_string(dir.path().join("feats.txt")).unwrap();
    let header = dump.lines().next().unwrap();
    assert_eq!(header.split_whitespace().nth(2), Some("8"));
    assert!(header.ends_with(" wei"));
}

#[test]
fn missing_manifest_exits_one_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = sre(dir.path(), &["train", "--set", "paths.manifest=nowhere/manifest.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("nowhere/manifest.txt") && err.contains("train"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "learnig_rate=0.1\n").unwrap();
    let out = sre(dir.path(), &["show-config", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("learnig_rate"));
    let out = sre(dir.path(), &["show-config", "--set", "trainer.epochs=many"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn duplicate_keys_warn_and_last_wins() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("dup.cfg"), "trainer.epochs=3\ntrainer.epochs=0\n").unwrap();
    let out = sre(dir.path(), &["show-config", "--config", "dup.cfg"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\ntrainer.epochs=0\n"));
}

#[test]
fn help_lists_defaults() {
    let out = sre(Path::new("."), &["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["frontend.n_mels=40", "frontend.frame_len_ms=25", "net.feature_dim=400", "trainer.epochs="] {
        assert!(text.contains(key), "{key} missing from --help");
    }
}
