use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shenchannel"));
    c.env("SHENCHANNEL_THREADS", "2");
    c
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn roundoff_writes_table() {
    let dir = scratch("roundoff");
    let out = dir.join("run");
    let o = run(&[
        "roundoff",
        "--nx",
        "64,128",
        "--z",
        "0,200",
        "--runs",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(out.join("table.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "n_x,z,biharmonic,helmholtz");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("64,0,"));
    assert!(lines[4].starts_with("128,200,"));
    assert!(read(out.join("checks.csv"))
        .lines()
        .skip(1)
        .all(|l| l.ends_with("true")));
}

#[test]
fn echoed_config_reproduces_outputs() {
    let dir = scratch("echo");
    let (a, b) = (dir.join("a"), dir.join("b"));
    let o = run(&[
        "roundoff",
        "--nx",
        "32,64",
        "--z",
        "0,10",
        "--runs",
        "3",
        "--seed",
        "9",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let cfg = a.join("config.toml");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
        "roundoff",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(a.join("table.csv")), read(b.join("table.csv")));
    assert_eq!(read(a.join("checks.csv")), read(b.join("checks.csv")));
}

#[test]
fn orr_sommerfeld_time_report() {
    let dir = scratch("os_time");
    let cfg = dir.join("os.toml");
    std::fs::write(&cfg, "[os_time]\nn_x = 32\nt_end = 1.0\n").unwrap();
    let out = dir.join("run");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "orr-sommerfeld-time",
        "--dt",
        "0.1,0.05",
    ]);
    assert!(
        [0, 1].contains(&code(&o)),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = read(out.join("table.csv"));
    assert_eq!(
        table.lines().next().unwrap(),
        "dt,l2_error,l2_order,energy_integral,energy_order"
    );
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn missing_config_exits_with_two() {
    let o = run(&["--config", "/nonexistent/run.toml", "roundoff"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read config"));
}

#[test]
fn unknown_key_exits_with_two() {
    let dir = scratch("unknown");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "[mesh]\nn_x = 16\nnxx = 4\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "roundoff"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nxx"));
}

#[test]
fn invalid_values_exit_with_two_before_running() {
    let dir = scratch("invalid");
    let o = run(&[
        "channel",
        "--ny",
        "7",
        "--out",
        dir.join("run").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!dir.join("run").exists());
}

#[test]
fn dump_matrix_prints_rows() {
    let dir = scratch("dump");
    let o = run(&[
        "dump-matrix",
        "--name",
        "Q-biharmonic",
        "--nx",
        "8",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    let o = run(&[
        "dump-matrix",
        "--name",
        "Q-biharmonic",
        "--nx",
        "8",
        "--oracle",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let oracle = String::from_utf8(o.stdout).unwrap();
    let parse =
        |s: &str| -> Vec<f64> { s.split_whitespace().map(|v| v.parse().unwrap()).collect() };
    for (a, b) in parse(&text).iter().zip(parse(&oracle)) {
        assert!((a - b).abs() <= 1e-5 * a.abs().max(1.0));
    }
    assert_eq!(
        code(&run(&[
            "dump-matrix",
            "--name",
            "Z",
            "--out",
            dir.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn channel_run_and_restart() {
    let dir = scratch("channel");
    let (a, b) = (dir.join("a"), dir.join("b"));
    let small = ["--nx", "16", "--ny", "8", "--nz", "8"];
    let mut args = vec!["channel", "--steps", "6", "--out", a.to_str().unwrap()];
    args.extend(small);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "stats.csv",
        "profile.csv",
        "checkpoint.bin",
        "config.toml",
        "checks.csv",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    assert_eq!(
        read(a.join("stats.csv")).lines().next().unwrap(),
        "t,flux,beta,e_kin"
    );
    let ckpt = a.join("checkpoint.bin");
    let o = run(&[
        "channel",
        "--restart",
        ckpt.to_str().unwrap(),
        "--steps",
        "3",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(b.join("config.toml")).contains("n_x = 16"));
    let last_t: f64 = read(b.join("stats.csv"))
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((last_t - 10.0 * 1e-3).abs() < 1e-12);
    let missing = dir.join("none.bin");
    assert_eq!(
        code(&run(&[
            "channel",
            "--restart",
            missing.to_str().unwrap(),
            "--out",
            b.to_str().unwrap()
        ])),
        2
    );
}
