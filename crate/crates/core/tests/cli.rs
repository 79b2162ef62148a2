use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gch(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gch"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("gch runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const CH: &str = r#"
[model]
preset = "camassa_holm"
[grid]
n = 64
[control]
dt = 1e-3
t_end = 0.2
[outputs]
csv = "out/run.csv"
snapshots = "out/snaps"
cadence = 100
"#;

#[test]
fn run_writes_csv_and_snapshots_then_resumes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ch.toml"), CH).unwrap();
    let out = gch(&["run", "ch.toml"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("status=Completed"));

    let csv = fs::read_to_string(dir.path().join("out/run.csv")).unwrap();
    assert!(csv.starts_with("t,"));
    assert_eq!(csv.lines().count(), 1 + 3);
    let snaps = dir.path().join("out/snaps");
    assert!(snaps.join("t0.100000000.gchs").exists());

    let out = gch(
        &[
            "resume",
            "out/snaps/t0.100000000.gchs",
            "--t-end",
            "0.3",
            "--config",
            "ch.toml",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("t=0.3"));
}

#[test]
fn presets_lists_tuples() {
    let dir = tempfile::tempdir().unwrap();
    let out = gch(&["presets"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("camassa_holm") && text.contains("k=1 p=1 b=2"));
    assert!(text.contains("novikov") && text.contains("k=1 p=2 b=3"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        "[model]\nk = 0\np = 1\nb = 2\n[grid]\nn = 32\n[control]\nt_end = 1\n",
    )
    .unwrap();
    let out = gch(&["run", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.k"));

    assert_eq!(
        gch(&["run", "missing.toml"], dir.path()).status.code(),
        Some(4)
    );
    assert_eq!(
        gch(&["resume", "missing.gchs", "--t-end", "1"], dir.path())
            .status
            .code(),
        Some(4)
    );

    let steep = r#"
[model]
k = 1
p = 1
b = 3
[grid]
n = 512
[control]
t_end = 1
breaking_threshold = 20
[initial]
kind = "gaussian"
amplitude = 2
width = 0.3
"#;
    fs::write(dir.path().join("steep.toml"), steep).unwrap();
    let out = gch(&["run", "steep.toml"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).contains("status=Breaking"));
}

#[test]
fn converge_and_lemmas_report() {
    let dir = tempfile::tempdir().unwrap();
    let doc = "[model]\npreset = \"camassa_holm\"\n[grid]\nn = 32\n[control]\ndt = 0.02\nt_end = 0.2\n[initial]\nkind = \"cosine_packet\"\nmodes = [[1, 0.5]]\n";
    fs::write(dir.path().join("c.toml"), doc).unwrap();
    let out = gch(&["converge", "c.toml", "--levels", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("observed_order="), "{text}");
    assert!(text.contains("spectral=true"), "{text}");

    // Lemma ratios need a finer grid than the solver study to be refinement-stable.
    fs::write(dir.path().join("l.toml"), doc.replace("n = 32", "n = 128")).unwrap();
    let out = gch(&["lemmas", "l.toml", "--samples", "100"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.ends_with("stable=true")));
}
