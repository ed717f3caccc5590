use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cim(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cim"))
        .args(args)
        .env("CIM_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_reports_each_property() {
    let dir = tempfile::tempdir().unwrap();
    let out = cim(&["check"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    for name in ["kernel identity", "half-sum equivalence", "1x1 oracle"] {
        assert!(
            text.lines()
                .any(|l| l.starts_with("PASS") && l.contains(name)),
            "{text}"
        );
    }
}

#[test]
fn scalar_solve_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = cim(
        &[
            "solve",
            "--case",
            "scalar_ex1",
            "--alpha",
            "0.2",
            "--beta",
            "0.77",
            "--N",
            "60",
            "--t",
            "0.5",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,u"));
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let exact = 1.0 + 1.5 * std::f64::consts::PI.sqrt() * 0.5;
    assert_eq!(row[0], 0.5);
    assert!((row[1] - exact).abs() < 1e-9, "{row:?}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "table-temporal",
            "--case",
            "nonsmooth_1d_ex4",
            "--exact",
            "--reference",
        ][..],
        &["solve", "--case", "homog_1d_ex2", "--h", "0.3"],
        &["solve", "--case", "no_such_case"],
        &["solve", "--case", "scalar_ex1", "--t", "5"],
        &["frobnicate"],
    ] {
        let out = cim(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(
            stderr(&out)
                .lines()
                .any(|l| l.starts_with("error: code=2 kind=usage message=")),
            "{args:?}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn reference_populates_cache() {
    let dir = tempfile::tempdir().unwrap();
    let out = cim(
        &[
            "reference",
            "--case",
            "homog_2d_ex2",
            "--alpha",
            "0.5",
            "--beta",
            "0.5",
            "--ref-N",
            "20",
            "--ref-h",
            "1/8",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let path = stdout(&out).trim().to_string();
    assert!(path.starts_with(dir.path().to_str().unwrap()), "{path}");
    let body = fs::read_to_string(&path).unwrap();
    assert!(body.starts_with("#cim-cache v1 "));
}

#[test]
fn warm_cache_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |name: &str| {
        let target = dir.path().join(name);
        let out = cim(
            &[
                "table-temporal",
                "--case",
                "homog_1d_ex2",
                "--alpha",
                "0.5",
                "--beta",
                "0.5",
                "--h",
                "1/16",
                "--N-list",
                "10,20",
                "--ref-N",
                "40",
                "--ref-h",
                "1/16",
                "--verbose",
                "--output",
                target.to_str().unwrap(),
            ],
            &cache,
        );
        assert!(out.status.success(), "{}", stderr(&out));
        (
            stderr(&out),
            fs::read(&target).unwrap(),
            fs::read(dir.path().join(name.replace(".csv", ".window.csv"))).unwrap(),
        )
    };
    let (cold_log, cold_at, cold_win) = run("a.csv");
    assert!(cold_log.contains("reference_solves=40"), "{cold_log}");
    let (warm_log, warm_at, warm_win) = run("b.csv");
    assert!(warm_log.contains("reference_solves=0"), "{warm_log}");
    assert_eq!(cold_at, warm_at);
    assert_eq!(cold_win, warm_win);
    let text = String::from_utf8(cold_at).unwrap();
    assert!(
        text.starts_with("alpha,beta,param,error,order\n0.5,0.5,10,"),
        "{text}"
    );
}

#[test]
fn corrupt_cache_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "table-temporal",
        "--case",
        "homog_1d_ex2",
        "--alpha",
        "0.5",
        "--beta",
        "0.5",
        "--h",
        "1/8",
        "--N-list",
        "8",
        "--ref-N",
        "16",
        "--ref-h",
        "1/8",
    ];
    assert!(cim(&args, dir.path()).status.success());
    for entry in fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        let body = fs::read_to_string(&p).unwrap();
        fs::write(&p, body.replacen(',', ",x", 1)).unwrap();
    }
    let out = cim(&args, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("kind=cache"), "{}", stderr(&out));
}

#[test]
fn spatial_table_has_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = cim(
        &[
            "table-spatial",
            "--case",
            "homog_1d_ex2",
            "--alpha",
            "0.5",
            "--beta",
            "0.5",
            "--h-list",
            "1/16,1/32,1/64",
            "--N",
            "60",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let orders: Vec<f64> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.rsplit(',').next().and_then(|o| o.parse().ok()))
        .collect();
    assert_eq!(orders.len(), 2, "{text}");
    assert!(orders.iter().all(|q| (1.7..2.3).contains(q)), "{text}");
}
