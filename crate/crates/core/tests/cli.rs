use std::process::{Command, Output};

fn isocrit(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_isocrit"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("ISOCRIT_THREADS", t),
        None => cmd.env_remove("ISOCRIT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

#[test]
fn index_reports_magnitude() {
    let out = isocrit(
        &[
            "index",
            "--gallery",
            "z_pow_n:4",
            "--center",
            "0,0",
            "--radius",
            "0.5",
        ],
        None,
    );
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["index_magnitude"], 4);
    assert_eq!(v["homeomorphism"], false);
}

#[test]
fn output_independent_of_thread_count() {
    let args = [
        "hadamard",
        "--gallery",
        "hadamard_demo",
        "--box",
        "-6,-6:6,6",
        "--radii",
        "1,2,4,6",
        "--seed",
        "3",
    ];
    let one = isocrit(&args, Some("1"));
    let four = isocrit(&args, Some("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);

    let xc = [
        "xcurve",
        "--gallery",
        "z_pow_n:3",
        "--seeds",
        "1,0:-0.5,0.8660254037844386",
        "--rmin",
        "0.1",
        "--rmax",
        "1.5",
        "--steps",
        "8",
        "--res",
        "128",
    ];
    assert_eq!(
        isocrit(&xc, Some("1")).stdout,
        isocrit(&xc, Some("3")).stdout
    );
}

#[test]
fn exit_codes() {
    assert_eq!(
        isocrit(&["index", "--radius", "0.5"], None).status.code(),
        Some(2)
    );
    assert_eq!(isocrit(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(
        isocrit(&["parse-check", "--expr", "x1 +* 2"], None)
            .status
            .code(),
        Some(2)
    );
    // -0.5 is on the circle and shares the image of the center: numeric failure, not usage
    let out = isocrit(
        &[
            "winding",
            "--gallery",
            "z_pow_n:2",
            "--center",
            "0.5,0",
            "--radius",
            "1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(
        isocrit(
            &[
                "index",
                "--gallery",
                "z_pow_n:1",
                "--center",
                "0,0",
                "--radius",
                "1"
            ],
            Some("x")
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn field_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.txt");
    std::fs::write(&field, "x1^2 - x2^2 ; 2*x1*x2\n").unwrap();
    let report = dir.path().join("report.json");
    let out = isocrit(
        &[
            "degree",
            "--field-file",
            field.to_str().unwrap(),
            "--target",
            "1,0",
            "--box",
            "-2,-2:2,2",
            "--output",
            report.to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["degree"], 2);
}

#[test]
fn parse_check_round_trips() {
    let first = isocrit(
        &[
            "parse-check",
            "--expr",
            "sin(x1)*x2^2 - 3 ; exp(-x1) + x2/2",
        ],
        None,
    );
    assert!(first.status.success());
    let canonical = String::from_utf8(first.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&canonical).unwrap();
    let text = v["canonical"].as_str().expect("canonical form");
    let second = isocrit(&["parse-check", "--expr", text], None);
    assert_eq!(canonical.as_bytes(), second.stdout.as_slice());
}

#[test]
fn gallery_lists_ids() {
    let out = isocrit(&["gallery", "--list"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let ids: Vec<&str> = v["ids"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|i| i.as_str())
        .collect();
    for id in [
        "z_pow_n",
        "z_abs2",
        "z2_minus_w4",
        "belitskii_kerner",
        "hadamard_demo",
    ] {
        assert!(
            ids.iter().any(|i| i.starts_with(id)),
            "{id} missing from {ids:?}"
        );
    }
}
