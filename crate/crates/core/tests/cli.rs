//! The command line tool end to end.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ising-sle"))
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    bin().arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in ["", "curves", "plots"] {
        let mut entries: Vec<_> = fs::read_dir(dir.join(sub)).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
        entries.sort();
        for p in entries {
            files.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
        }
    }
    files
}

#[test]
fn worker_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(
        &cfg,
        "# small spin run\nmodel = spin\nmesh = 1/16\nsamples = 200\nchains = 5\nburn_in = 50\n\
         decorrelation = 3\nseed = 9\nobservable_points = 1, 0.5\nquads = 1\nquad_rows = 6\ncrossing_samples = 100\ncurves = 3\n",
    )
    .unwrap();
    let outs: Vec<_> = [1, 4].iter().map(|w| tmp.path().join(format!("out{w}"))).collect();
    for (w, out) in ["1", "4"].iter().zip(&outs) {
        let r = run(&cfg, out, &["--workers", w]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let (a, b) = (tree(&outs[0]), tree(&outs[1]));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    for f in ["drives.csv", "variance.csv", "kappa.txt", "crossings.csv", "stats.csv", "annuli.csv", "plots/variance.svg"] {
        assert!(names.contains(&f), "{f} missing from {names:?}");
    }
    assert!(names.iter().any(|n| n.starts_with("curves/")));
    assert_eq!(a, b);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "model = synthetic-sle\nkappa = 2\nsamples = 300\nsynthetic_steps = 50\nseed = 1\n").unwrap();
    let read = |dir: &str| fs::read(tmp.path().join(dir).join("drives.csv")).unwrap();
    assert!(run(&cfg, &tmp.path().join("a"), &[]).status.success());
    assert!(run(&cfg, &tmp.path().join("b"), &["--seed", "1"]).status.success());
    assert!(run(&cfg, &tmp.path().join("c"), &["--seed", "2"]).status.success());
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn missing_seed_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "model = spin\nmesh = 1/16\n").unwrap();
    let r = run(&cfg, &tmp.path().join("out"), &[]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("seed"));
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    for (text, key) in [
        ("seed = 1\nmodel = spin\nfoo = 3\n", "foo"),
        ("seed = 1\nmodel = spin\nmesh = -1\n", "mesh"),
        ("seed = 1\nmodel = synthetic-sle\n", "kappa"),
    ] {
        fs::write(&cfg, text).unwrap();
        let r = run(&cfg, &tmp.path().join("out"), &[]);
        assert_eq!(r.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&r.stderr).contains(key), "{text}");
    }
    let r = run(&tmp.path().join("absent.conf"), &tmp.path().join("out"), &[]);
    assert_eq!(r.status.code(), Some(2));
    let r = bin().arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "model = synthetic-sle\nkappa = 3\nsamples = 200\nsynthetic_steps = 20\nseed = 4\n").unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let r = run(&cfg, &blocker.join("out"), &[]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn synthetic_ensemble_recovers_kappa() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    fs::write(&cfg, "model = synthetic-sle\nkappa = 3\nsamples = 10000\nsynthetic_steps = 200\nseed = 21\n").unwrap();
    let out = tmp.path().join("out");
    assert!(run(&cfg, &out, &["--workers", "2"]).status.success());
    let text = fs::read_to_string(out.join("kappa.txt")).unwrap();
    let kappa: f64 = text.lines().next().unwrap().trim_start_matches("kappa = ").parse().unwrap();
    assert!((2.9..=3.1).contains(&kappa), "{kappa}");
}
