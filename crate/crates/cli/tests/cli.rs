use std::path::Path;
use std::process::{Command, Output};

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-qcbm")).current_dir(dir).args(args).output().unwrap()
}

fn csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count() - 1
}

#[test]
fn check_grad_succeeds_and_fails_on_an_impossible_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let ok = cli(dir.path(), &["check-grad", "--m", "4", "--n", "2", "--mesh", "qr_haar", "--seed", "1"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("check_grad.csv").exists());
    assert!(dir.path().join("check_grad.csv.manifest.json").exists());
    let strict = cli(dir.path(), &["check-grad", "--m", "4", "--n", "2", "--seed", "1", "--tolerance", "0"]);
    assert!(!strict.status.success());
}

#[test]
fn explicit_flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "# uniform data\nm = 6\nn = 2\nsize = 10\nseed = 4\nout = from_config.txt\n")
        .unwrap();
    let out = cli(dir.path(), &["--config", "run.conf", "gen-dataset", "uniform", "--size", "25"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(photon_qcbm::data::read_dataset(dir.path().join("from_config.txt")).unwrap().len(), 25);
}

#[test]
fn gen_dataset_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        assert!(cli(dir.path(), &["gen-dataset", "boson", "--m", "5", "--n", "2", "--size", "50", "--seed", seed, "--out", out])
            .status
            .success());
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("3", "a.txt");
    assert_eq!(a, run("3", "a.txt"));
    assert_ne!(a, run("4", "a.txt"));
}

#[test]
fn failures_exit_nonzero_with_a_single_error_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["train", "--dataset", "missing.txt", "--seed", "1"][..],
        &["check-grad", "--m", "6", "--n", "2", "--mesh", "butterfly", "--seed", "1"][..],
        &["gen-dataset", "uniform", "--m", "3", "--n", "5", "--size", "4", "--seed", "1"][..],
    ] {
        let out = cli(dir.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.starts_with("error: ") && err.trim_end().lines().count() == 1, "{args:?}: {err}");
    }
}

#[test]
fn train_writes_trace_checkpoints_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cli(dir.path(), &["gen-dataset", "boson", "--m", "5", "--n", "2", "--size", "200", "--seed", "2", "--out", "d.txt"])
        .status
        .success());
    let out = cli(
        dir.path(),
        &["train", "--dataset", "d.txt", "--steps", "4", "--kbatch", "100", "--zbatch", "100", "--eval-every", "2", "--seed", "3"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    for f in ["trace.csv", "eval.csv", "final.txt", "checkpoint_000002.txt", "checkpoint_000004.txt", "manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    assert_eq!(csv_rows(&run.join("trace.csv")), 4);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    let hash = manifest["hash"].as_str().unwrap();
    assert!(std::fs::read_to_string(run.join("trace.csv")).unwrap().starts_with(&format!("# manifest {hash}")));
}
