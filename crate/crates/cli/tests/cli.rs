use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn specgap(args: &[&str], dir: &Path, env: Option<(&str, &str)>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_specgap"));
    cmd.args(args).current_dir(dir).env_remove("SPECGAP_JOBS");
    if let Some((k, v)) = env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_identities_within_tolerance() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "vi.toml", "");
    let o = specgap(&["verify-identities", "--config", &cfg, "--out", "out"], d.path(), None);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path().join("out/results.json"));
    assert_eq!(r["all_within_tolerance"], true);
    let cases = r["cases"].as_array().unwrap();
    assert!(!cases.is_empty());
    for c in cases {
        assert!(c["deviation"].as_f64().unwrap() <= 1e-12 * c["scale"].as_f64().unwrap());
    }
    let m = json(d.path().join("out/manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["versions"]["specgap-core"], specgap_core::VERSION);
    assert!(m["jobs"].as_array().unwrap().iter().all(|j| j["status"] == "ok" && j["wall_time_s"].is_number()));
}

#[test]
fn bands_are_byte_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "bands.toml", "[bands]\nk = 1\n");
    let a = specgap(&["bands", "--config", &cfg, "--out", "a", "--jobs", "1"], d.path(), None);
    let b = specgap(&["bands", "--config", &cfg, "--out", "b", "--jobs", "3"], d.path(), None);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)), "{}", stderr(&a));
    for name in ["bands.csv", "results.json", "config.toml"] {
        let x = std::fs::read(d.path().join("a").join(name)).unwrap();
        let y = std::fs::read(d.path().join("b").join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
    let table = std::fs::read_to_string(d.path().join("a/bands.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 102);
    assert!(lines.iter().all(|l| l.split(',').count() == 6));
    assert_eq!(json(d.path().join("a/results.json"))["minimum"]["interior"], true);
}

#[test]
fn ascending_sweep_is_rejected_with_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "bad.toml", "experiment = \"supercell\"\n\n[sweep]\nh = [0.01, 0.02]\n");
    let o = specgap(&["supercell", "--config", &cfg, "--out", "out"], d.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.starts_with("bad.toml:4: sweep.h:"), "{msg}");
    assert!(!d.path().join("out/manifest.json").exists());
}

#[test]
fn validation_failures_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let cases = [
        ("family.toml", "[field]\nfamily = \"nonesuch\"\n", "supercell"),
        ("unknown.toml", "[grid]\nspacing = 0.1\n", "supercell"),
        ("mismatch.toml", "experiment = \"bands\"\n", "gaps"),
        ("negative.toml", "[sweep]\nh = [0.02, -0.01]\n", "localization"),
        ("kind.toml", "[field]\nfamily = \"sin_squared\"\namplitude = 1.0\n", "model2d"),
    ];
    for (name, text, exp) in cases {
        let cfg = write(d.path(), name, text);
        let o = specgap(&[exp, "--config", &cfg, "--out", "out"], d.path(), None);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        let msg = stderr(&o);
        let anchored = msg
            .strip_prefix(&format!("{name}:"))
            .and_then(|r| r.split(':').next())
            .is_some_and(|l| l.parse::<usize>().is_ok());
        assert!(anchored, "{name}: {msg}");
    }
    let o = specgap(&["bands", "--config", "missing.toml"], d.path(), None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_2() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "blocker", "");
    let cfg = write(d.path(), "vi.toml", "output = \"blocker/out\"\n");
    let o = specgap(&["verify-identities", "--config", &cfg], d.path(), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("vi.toml:1: output:"), "{}", stderr(&o));
}

#[test]
fn env_overrides_jobs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "vi.toml", "");
    let o = specgap(
        &["verify-identities", "--config", &cfg, "--out", "out", "--jobs", "1"],
        d.path(),
        Some(("SPECGAP_JOBS", "3")),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(d.path().join("out/manifest.json"))["jobs_requested"], 3);
    let o = specgap(&["verify-identities", "--config", &cfg, "--out", "out"], d.path(), Some(("SPECGAP_JOBS", "many")));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3_with_job_in_manifest() {
    let d = tempfile::tempdir().unwrap();
    // a box of one magnetic length cannot hold the cutoff support
    let cfg = write(
        d.path(),
        "q.toml",
        "[sweep]\nh = [0.04, 0.02]\n\n[quasimode]\nrecipe = \"model_rescaled\"\nbox_half_width = 1.0\ncertify = false\n",
    );
    let o = specgap(&["quasimode", "--config", &cfg, "--out", "out"], d.path(), None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).lines().any(|l| l.starts_with("error: quasimode")));
    let m = json(d.path().join("out/manifest.json"));
    assert_eq!(m["exit_code"], 3);
    let jobs = m["jobs"].as_array().unwrap();
    assert_eq!(jobs.len(), 2);
    assert!(jobs.iter().all(|j| j["status"] == "failed" && j["error"].is_string()));
    assert_eq!(jobs[0]["params"]["h"], 0.04);
    // the empty sweep still yields a header-only residual table
    let table = std::fs::read_to_string(d.path().join("out/residuals.csv")).unwrap();
    assert_eq!(table.trim(), "h,residual,log_h,log_residual");
}
