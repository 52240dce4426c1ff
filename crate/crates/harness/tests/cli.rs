use std::path::Path;
use std::process::{Command, Output};

fn ddesim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddesim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn spectrum_writes_default_file_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hayes.ini", "[problem]\nbuiltin = hayes\nb = -1\n");
    let out = ddesim(dir.path(), &["spectrum", "--config", &cfg, "--N", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("verdict: stable"));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("# {\n"));
    assert!(csv.contains("#   \"N\": 12,\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn out_dash_streams_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ode.ini", "[problem]\nbuiltin = pure-ode\na = 0.25\n");
    let out = ddesim(dir.path(), &["spectrum", "--config", &cfg, "--out", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("re,im,modulus"));
    assert!(String::from_utf8(out.stderr).unwrap().contains("verdict: unstable"));
    assert!(!dir.path().join("spectrum.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unstable = write(dir.path(), "u.ini", "[problem]\nbuiltin = hayes\nb = -2\n");
    let out = ddesim(dir.path(), &["spectrum", "--config", &unstable, "--fail-on-unstable"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ddesim(dir.path(), &["spectrum", "--config", &unstable]);
    assert_eq!(out.status.code(), Some(0));

    let bad = write(dir.path(), "bad.ini", "[problem]\nbuiltin = nosuch\n");
    let out = ddesim(dir.path(), &["spectrum", "--config", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown builtin"));

    let missing = dir.path().join("absent.ini");
    let out = ddesim(dir.path(), &["spectrum", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "chart.ini",
        "[problem]\nbuiltin = hayes\n[discretization]\nN = 10\n[chart]\np1 = a\np1_min = -1\np1_max = 1\np1_steps = 3\n\
         p2 = b\np2_min = -2\np2_max = 0\np2_steps = 3\n",
    );
    for out in ["one.csv", "two.csv"] {
        let o = ddesim(dir.path(), &["chart", "--config", &cfg, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let one = std::fs::read(dir.path().join("one.csv")).unwrap();
    let two = std::fs::read(dir.path().join("two.csv")).unwrap();
    assert_eq!(one, two);
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "all.ini",
        "[problem]\nbuiltin = periodic-scalar\na0 = -1\nb0 = -0.5\n[discretization]\nN = 10\n\
         [converge]\nN_list = 6, 10\ntarget_re = 0.3\n[chart]\np1 = a0\np1_min = -1\np1_max = 0\np1_steps = 2\n\
         p2 = b0\np2_min = -1\np2_max = 0\np2_steps = 2\n[floquet]\nomega = 1\n[solve]\nphi = \"1 + theta\"\n",
    );
    for cmd in ["spectrum", "converge", "chart", "floquet", "solve"] {
        let o = ddesim(dir.path(), &["--config", &cfg, cmd]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(dir.path().join(format!("{cmd}.csv")).exists());
    }
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let dir = tempfile::tempdir().unwrap();
    let runs = [
        ("hayes.ini", "spectrum"),
        ("hayes.ini", "converge"),
        ("hayes_chart.ini", "chart"),
        ("mathieu_delay.ini", "floquet"),
        ("mathieu_delay.ini", "solve"),
        ("distributed.ini", "converge"),
    ];
    for (file, cmd) in runs {
        let cfg = configs.join(file);
        let o = ddesim(dir.path(), &[cmd, "--config", cfg.to_str().unwrap(), "--N", "10"]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{file} {cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}
