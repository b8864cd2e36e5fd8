use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn dsfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsfc")).args(args).output().expect("run dsfc")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dsfc-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

fn parse_symbols(bytes: &[u8]) -> Vec<u64> {
    String::from_utf8_lossy(bytes).split_whitespace().map(|t| t.parse().unwrap()).collect()
}

#[test]
fn encode_decode_roundtrip_within_d() {
    let input = scratch("roundtrip.txt");
    let x: Vec<u64> = (0..300u64).map(|i| (i * 7 + i / 5) % 9).collect();
    fs::write(&input, x.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")).unwrap();
    let stream = scratch("roundtrip.dsfc");
    let out = dsfc(&["--d", "1/2", "--envelope", "geometric:ratio=0.5", "--out", path(&stream), "encode", path(&input)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let again = scratch("roundtrip2.dsfc");
    dsfc(&["--d", "1/2", "--envelope", "geometric:ratio=0.5", "--out", path(&again), "encode", path(&input)]);
    assert_eq!(fs::read(&stream).unwrap(), fs::read(&again).unwrap());

    let out = dsfc(&["decode", path(&stream), "--reference", path(&input)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let xhat = parse_symbols(&out.stdout);
    assert_eq!(xhat.len(), x.len());
    let total: u64 = x.iter().zip(&xhat).map(|(a, b)| a.abs_diff(*b)).sum();
    assert!(2 * total <= x.len() as u64, "mean distortion {total}/{}", x.len());
}

#[test]
fn damaged_streams_exit_4() {
    let input = scratch("damaged.txt");
    fs::write(&input, "1 2 3 4 5 6 7 8 9 10").unwrap();
    let stream = scratch("damaged.dsfc");
    let out = dsfc(&["--d", "1", "--envelope", "polynomial:p=2", "--out", path(&stream), "encode", path(&input)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut bytes = fs::read(&stream).unwrap();
    bytes.truncate(bytes.len() - 1);
    let cut = scratch("damaged-cut.dsfc");
    fs::write(&cut, &bytes).unwrap();
    assert_eq!(dsfc(&["decode", path(&cut)]).status.code(), Some(4));
    let junk = scratch("junk.dsfc");
    fs::write(&junk, b"not a stream").unwrap();
    assert_eq!(dsfc(&["decode", path(&junk)]).status.code(), Some(4));
}

#[test]
fn config_errors_exit_2() {
    let input = scratch("config.txt");
    fs::write(&input, "1 2 3").unwrap();
    assert_eq!(dsfc(&["--d", "-1", "encode", path(&input)]).status.code(), Some(2));
    assert_eq!(dsfc(&["--envelope", "polynomial:p=1", "encode", path(&input)]).status.code(), Some(2));
    assert_eq!(dsfc(&["--trials", "0", "sweep"]).status.code(), Some(2));
    assert_eq!(dsfc(&["oracle", "--task", "nope"]).status.code(), Some(2));
    assert_eq!(dsfc(&["encode", "/nonexistent/input"]).status.code(), Some(2));
}

#[test]
fn budget_rows_exit_3_unless_partial() {
    let cfg = scratch("budget.cfg");
    fs::write(&cfg, "window = 1,2,3,4\nn = 2\n").unwrap();
    let out = dsfc(&["--config", path(&cfg), "oracle", "--task", "rn"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("budget-exceeded"));
    let out = dsfc(&["--config", path(&cfg), "--allow-partial", "oracle", "--task", "rn"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn oracle_tasks_emit_tagged_csv() {
    let out = dsfc(&["oracle", "--task", "disjoint"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("instance,quantity,value,bound"));
    let radii: Vec<f64> = text
        .lines()
        .filter(|l| l.contains(",radius,"))
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(radii.len(), 3);
    for (r, want) in radii.iter().zip([1.0, 2.0, 3.0]) {
        assert!((r - want).abs() < 1e-3, "{r}");
    }
    let out = dsfc(&["oracle", "--task", "conditions"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("budget-exceeded"));
}

#[test]
fn sweep_is_deterministic() {
    let args = ["--n-grid", "4,8", "--trials", "20", "--seed", "5", "sweep"];
    let a = dsfc(&args);
    let b = dsfc(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("n=4,") && l.ends_with("subfamily-max")));
    let c = dsfc(&["--n-grid", "4,8", "--trials", "20", "--seed", "6", "sweep"]);
    assert_ne!(text.as_bytes(), c.stdout.as_slice());
}

#[test]
fn envelope_info_reports_thresholds() {
    let out = dsfc(&["--envelope", "geometric:ratio=0.5", "--n-grid", "16", "envelope-info"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("envelope,tau,1,exact"), "{text}");
    assert!(text.lines().any(|l| l.starts_with("n=16,u_f,")));
}
