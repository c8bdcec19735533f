use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_abbsim");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env_remove("ABBSIM_OUT")
        .args(args)
        .output()
        .expect("spawn abbsim")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// Value of a `key,value` row in a CSV summary block.
fn summary(csv: &str, key: &str) -> f64 {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{csv}"))
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(d.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(
        run(d.path(), &["--preset", "other", "calibrate"])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(d.path().join("bad.cfg"), "abb.gain = fast\n").unwrap();
    let o = run(d.path(), &["--config", "bad.cfg", "calibrate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    // Missing input file is an I/O failure.
    assert_eq!(
        run(d.path(), &["--config", "missing.cfg", "calibrate"])
            .status
            .code(),
        Some(1)
    );
    let o = run(d.path(), &["table2", "--trace", "missing.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.txt"));
    // Infeasible retention anchors are a model error.
    std::fs::write(
        d.path().join("a.cfg"),
        "retention_uW@25C=3.2\nretention_uW@125C=3.0\nvdd_nom=0.55\n",
    )
    .unwrap();
    std::fs::write(d.path().join("c.cfg"), "anchors.path = a.cfg\n").unwrap();
    assert_eq!(
        run(d.path(), &["--config", "c.cfg", "calibrate"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn output_dir_precedence() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("o.cfg"), "output.dir = from_cfg\n").unwrap();
    assert!(run(d.path(), &["--config", "o.cfg", "calibrate"])
        .status
        .success());
    assert!(d.path().join("from_cfg/calibration.csv").exists());

    let o = Command::new(BIN)
        .current_dir(d.path())
        .env("ABBSIM_OUT", "from_env")
        .args(["--config", "o.cfg", "calibrate"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("from_env/calibration.csv").exists());

    let o = Command::new(BIN)
        .current_dir(d.path())
        .env("ABBSIM_OUT", "from_env2")
        .args(["--config", "o.cfg", "--out", "from_flag", "calibrate"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(d.path().join("from_flag/calibration.csv").exists());
    assert!(!d.path().join("from_env2").exists());

    assert!(run(d.path(), &["calibrate"]).status.success());
    assert!(d.path().join("abbsim-out/calibration.csv").exists());
}

#[test]
fn config_hash_tracks_model_settings_only() {
    let d = tempfile::tempdir().unwrap();
    let hash = |args: &[&str]| {
        let o = run(d.path(), args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let out = args[args.iter().position(|a| *a == "--out").unwrap() + 1];
        let csv = read(d.path().join(out).join("calibration.csv"));
        csv.lines().nth(1).unwrap().to_string()
    };
    let base = hash(&["--out", "a", "calibrate"]);
    assert!(base.starts_with("# config_sha256: "));
    assert_eq!(base, hash(&["--out", "b", "--seed", "9", "calibrate"]));
    std::fs::write(d.path().join("g.cfg"), "abb.gain = 0.5\n").unwrap();
    assert_ne!(
        base,
        hash(&["--out", "c", "--config", "g.cfg", "calibrate"])
    );
}

#[test]
fn seed_changes_only_seeded_outputs() {
    let d = tempfile::tempdir().unwrap();
    for (out, seed) in [("s1", "1"), ("s2", "2")] {
        assert!(run(
            d.path(),
            &[
                "--out",
                out,
                "--seed",
                seed,
                "trace-gen",
                "--cycles",
                "5000"
            ]
        )
        .status
        .success());
    }
    let a = read(d.path().join("s1/trace.txt"));
    let b = read(d.path().join("s2/trace.txt"));
    assert_ne!(a, b);
    assert!(a.contains("# cycles: 5000"));
}

#[test]
fn duty_cycled_schedule_energy() {
    let d = tempfile::tempdir().unwrap();
    assert!(run(d.path(), &["--out", "m", "modes"]).status.success());
    let csv = read(d.path().join("m/modes.csv"));
    // 1 % of 240 uW plus 99 % of 3.2 uW.
    let avg = summary(&csv, "average_power_uW");
    assert!((avg - (0.01 * 240.0 + 0.99 * 3.2)).abs() < 0.01, "{avg}");

    assert!(run(
        d.path(),
        &["--out", "n", "modes", "--segments", "active 1s"]
    )
    .status
    .success());
    let e = summary(&read(d.path().join("n/modes.csv")), "total_energy_uJ");
    assert!((e - 240.0).abs() < 0.5, "{e}");
}

#[test]
fn wake_from_retention_costs_energy() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("s.txt"),
        "retention 10ms\nactive 1ms # burst\nretention 10ms\n",
    )
    .unwrap();
    assert!(
        run(d.path(), &["--out", "w", "modes", "--schedule", "s.txt"])
            .status
            .success()
    );
    let csv = read(d.path().join("w/modes.csv"));
    assert_eq!(summary(&csv, "wake_transitions"), 1.0);
    assert!(summary(&csv, "transition_energy_uJ") > 0.0);
    assert!((summary(&csv, "duration_s") - 0.021).abs() < 1e-12);
}

#[test]
fn small_macro_warns() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("k.cfg"), "sram.macro_kib = 1\n").unwrap();
    let o = run(
        d.path(),
        &[
            "--config", "k.cfg", "--out", "t", "table2", "--cycles", "20000",
        ],
    );
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(read(d.path().join("t/table2.csv")).contains("# warning:"));
}

#[test]
fn table2_reads_generated_trace() {
    let d = tempfile::tempdir().unwrap();
    assert!(
        run(d.path(), &["--out", "x", "trace-gen", "--cycles", "40000"])
            .status
            .success()
    );
    let o = run(
        d.path(),
        &["--out", "y", "table2", "--trace", "x/trace.txt"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let from_file = read(d.path().join("y/table2.csv"));
    assert!(
        run(d.path(), &["--out", "z", "table2", "--cycles", "40000"])
            .status
            .success()
    );
    assert_eq!(from_file, read(d.path().join("z/table2.csv")));
}

#[test]
fn shmoo_options() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "--out",
            "s",
            "shmoo",
            "--vdd",
            "0.5:0.6:0.05",
            "--freq",
            "10:60:10",
            "--temp",
            "-40",
            "--corner",
            "ss",
            "--svg",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(d.path().join("s/shmoo.csv"));
    assert!(csv.contains("corner ss and -40.0 C"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(read(d.path().join("s/shmoo.svg")).starts_with("<svg"));
    assert_eq!(
        run(d.path(), &["shmoo", "--vdd", "0.6:0.5:0.1"])
            .status
            .code(),
        Some(2)
    );
}
