use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_requ-forge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gadget_probes() {
    let o = bin(&["gadget", "product2", "--probe", "3", "-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("-> -6\n"), "{}", stdout(&o));
    assert!(stdout(&o).contains("hidden_layers=1 max_width=4"));

    let o = bin(&["gadget", "identity", "--s", "1", "--probe", "0.5"]);
    assert!(stdout(&o).contains("-> 0.5\n"), "{}", stdout(&o));

    let o = bin(&[
        "gadget",
        "bump",
        "--M",
        "2",
        "--d",
        "1",
        "--probe",
        "at-center",
    ]);
    assert!(stdout(&o).contains("-> 1\n"), "{}", stdout(&o));

    let o = bin(&[
        "gadget",
        "indicator",
        "--a",
        "-0.5",
        "--b",
        "0.5",
        "--s",
        "100",
        "--probe",
        "0",
    ]);
    assert!(stdout(&o).contains("-> 1\n"), "{}", stdout(&o));

    let o = bin(&["gadget", "product-d", "--d", "3", "--probe", "2", "3", "-1"]);
    assert!(stdout(&o).contains("-> -6\n"), "{}", stdout(&o));
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(bin(&["gadget", "nope"]).status.code(), Some(2));
    assert_eq!(
        bin(&["gadget", "product2", "--probe", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bin(&["sqrt", "--t", "1", "--eps", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bin(&["sqrt", "--t", "0.5", "--eps", "0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        bin(&["sweep", "--net", "/nonexistent.json", "--fn", "const"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let (n, r) = (dir.path().join("n.json"), dir.path().join("r.json"));
    let o = bin(&[
        "build",
        "--fn",
        "const",
        "--d",
        "1",
        "--r",
        "0.5",
        "--eps",
        "0.1",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!n.exists());
    let o = bin(&[
        "build",
        "--fn",
        "cosh",
        "--d",
        "1",
        "--r",
        "2",
        "--eps",
        "0.1",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(2));
    // declared radius below the measured derivative bound
    let o = bin(&[
        "build",
        "--fn",
        "quadratic",
        "--d",
        "1",
        "--r",
        "2",
        "--R",
        "0.5",
        "--eps",
        "0.1",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_sweep_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let (n, r, c) = (
        dir.path().join("n.json"),
        dir.path().join("r.json"),
        dir.path().join("s.csv"),
    );
    let o = bin(&[
        "build",
        "--fn",
        "sin_sum",
        "--d",
        "1",
        "--r",
        "2",
        "--R",
        "2",
        "--eps",
        "0.25",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report = std::fs::read_to_string(&r).unwrap();
    // (c R d^(r/2) / eps')^(1/(2r)) = 16^(1/4) = 2 with c = 1, R = 2, eps' = 0.125; M lies strictly above
    assert!(report.contains("\"M\": 3"), "{report}");

    let o = bin(&[
        "sweep",
        "--net",
        p(&n),
        "--fn",
        "sin_sum",
        "--report",
        p(&r),
        "--points",
        "2000",
        "--out",
        p(&c),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
    let csv = std::fs::read_to_string(&c).unwrap();
    assert_eq!(csv.lines().count(), 2001);
    assert!(csv.starts_with("x_1,f,phi,abs_err\n"));

    // an unreachable tolerance is a verification failure
    let o = bin(&[
        "sweep",
        "--net",
        p(&n),
        "--fn",
        "sin_sum",
        "--eps",
        "1e-12",
        "--points",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    let o = bin(&[
        "sweep",
        "--net",
        p(&n),
        "--fn",
        "sin_sum",
        "--points",
        "0",
        "--out",
        p(&c),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no samples"));
    assert_eq!(std::fs::read_to_string(&c).unwrap(), "x_1,f,phi,abs_err\n");

    let o = bin(&["sweep", "--net", p(&n), "--fn", "sin_sum", "--d", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let o = bin(&["inspect", "--net", p(&n)]);
    assert!(stdout(&o).contains("input_dim=1 output_dim=1"));

    let dense = dir.path().join("dense.json");
    assert_eq!(
        bin(&[
            "export",
            "--net",
            p(&n),
            "--format",
            "dense",
            "--out",
            p(&dense)
        ])
        .status
        .code(),
        Some(0)
    );
    let a = stdout(&bin(&["eval", "--net", p(&n), "--x", "-0.3"]));
    let b = stdout(&bin(&["eval", "--net", p(&dense), "--x", "-0.3"]));
    assert_eq!(a, b);
    let y: f64 = a.trim().parse().unwrap();
    assert!((y - (-0.3f64).sin()).abs() <= 0.25);
}

#[test]
fn constant_is_reproduced_inside_the_cubes() {
    let dir = tempfile::tempdir().unwrap();
    let (n, r) = (dir.path().join("n.json"), dir.path().join("r.json"));
    let o = bin(&[
        "build",
        "--fn",
        "const",
        "--d",
        "1",
        "--r",
        "2",
        "--eps",
        "0.5",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = bin(&["sweep", "--net", p(&n), "--fn", "const", "--report", p(&r)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn wider_domain() {
    let dir = tempfile::tempdir().unwrap();
    let (n, r) = (dir.path().join("n.json"), dir.path().join("r.json"));
    let o = bin(&[
        "build",
        "--fn",
        "sin_sum",
        "--d",
        "1",
        "--r",
        "2",
        "--eps",
        "0.25",
        "--domain",
        "1",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let o = bin(&[
        "sweep",
        "--net",
        p(&n),
        "--fn",
        "sin_sum",
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn sqrt_command() {
    let o = bin(&["sqrt", "--t", "1", "--eps", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("n=10 "), "{}", stdout(&o));
    // too few iterations leaves a visible error
    let o = bin(&["sqrt", "--t", "1", "--eps", "0.1", "--iterations", "1"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn m_override_below_the_bound_warns() {
    let dir = tempfile::tempdir().unwrap();
    let (n, r) = (dir.path().join("n.json"), dir.path().join("r.json"));
    let o = bin(&[
        "build",
        "--fn",
        "exp_neg_sq",
        "--d",
        "1",
        "--r",
        "2",
        "--eps",
        "0.01",
        "--M-override",
        "2",
        "--out",
        p(&n),
        "--report",
        p(&r),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
