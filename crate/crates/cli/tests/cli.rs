use std::process::{Command, Output};

fn dyadrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadrep")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(dyadrep(&["--help"]).status.code(), Some(0));
    assert_eq!(dyadrep(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(dyadrep(&["dini", "--omega", "cubic"]).status.code(), Some(2));
    assert_eq!(dyadrep(&["verify-bcr", "--a", "3", "--b", "1", "--out", out]).status.code(), Some(2));
    // error-decay with random inputs is rejected before any work
    assert_eq!(dyadrep(&["error-decay", "--f", "random", "--out", out]).status.code(), Some(2));
    let ok = dyadrep(&["dini", "--omega", "power:1", "--s", "0", "--out", out]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8(ok.stdout).unwrap().starts_with("PASS dini s=0: power:1:1 -> 0.4999999999999999"));
}

#[test]
fn artifacts_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# standard pair\nf = hilbert-standard\ng = hilbert-standard\na = -2\nb = 3\nseed = 5\n").unwrap();
    let out = dir.path().join("out");
    let r = dyadrep(&["verify-bcr", "--config", cfg.to_str().unwrap(), "--seed", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("verify-bcr.csv")).unwrap();
    let mut lines = csv.lines();
    let head: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!((head[0], head[2], head[3]), ("config_sha256", "seed", "6"));
    assert_eq!(head[1].len(), 64);
    assert!(lines.next().unwrap().starts_with("instance,a,b,reference"));
    let echoed = std::fs::read_to_string(out.join("verify-bcr.config.txt")).unwrap();
    assert!(echoed.contains("seed=6") && echoed.contains("b=3"));
    assert!(std::fs::read_to_string(out.join("verify-bcr.verdict.txt")).unwrap().starts_with("PASS verify-bcr"));
    assert!(out.join("plot_verify-bcr.py").exists());
}
