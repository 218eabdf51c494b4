use std::process::{Command, Output};

fn ppdio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppdio"))
        .args(args)
        .env_remove("PPDIO_FORMAT")
        .env_remove("PPDIO_SEED")
        .env_remove("PPDIO_EPSILON")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exponents_for_seven_halves() {
    let o = ppdio(&["exponents", "--theta", "3.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rho"].as_f64().unwrap(), 1.0 / 150.0);
    assert_eq!(v["rho_d"].as_f64().unwrap(), 1.0 / 450.0);
}

#[test]
fn exponents_from_polynomial() {
    let o = ppdio(&["exponents", "--f", "x^3.5+x"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["theta"].as_f64().unwrap(), 3.5);
}

#[test]
fn vaaler_check_passes() {
    let o = ppdio(&["vaaler-check", "--left", "0.1", "--right", "0.35", "--H", "8", "--grid", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("left,right,h,grid,max_violation,holds\n"));
    assert!(out.trim_end().ends_with("true"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ppdio(&["exponents", "--bogus"]).status.code(), Some(2));
    assert_eq!(ppdio(&["min-search", "--f", "x^3.5"]).status.code(), Some(2));
    // exponents below 1 are rejected while parsing
    assert_eq!(ppdio(&["min-search", "--f", "x^0.5", "--xi", "sqrt2", "--xmax", "64"]).status.code(), Some(2));
    assert_eq!(ppdio(&["exponents", "--theta", "3.5", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let o = ppdio(&["exponents", "--theta", "1/2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));
    let o = ppdio(&["divisibility", "--f", "x^3.5", "--m-min", "9", "--m-max", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ppdio(&["exponents", "--theta", "3.5", "--epsilon", "-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_headers() {
    let cases: [(&[&str], &str); 4] = [
        (&["min-search", "--f", "x^3.5+x", "--xi", "sqrt2", "--xmax", "256"], "X,p_star,m_value,bound_X_pow_neg_rho_d,ratio"),
        (&["divisibility", "--f", "x^3.5", "--m-max", "6", "--p-cap", "10000"], "m,witness_p,log_p_over_log_m,bound_exponent"),
        (&["discrepancy", "--f", "x^3.5", "--xmax", "256"], "X,N,D_star"),
        (&["three-sums", "--f", "x^3.5", "--xi", "sqrt2", "--grid", "500"], "X,m,q,H,sum1,sum2,sum3,context,balanced_bound"),
    ];
    for (args, header) in cases {
        let o = ppdio(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&o).lines().next().unwrap(), header);
    }
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let o = ppdio(&[
            "exp-sum", "--f", "sqrt2*x^(7/3)", "--y", "1", "--xmax", "4096",
            "--threads", threads, "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert!(a.starts_with("kind,f,y,X,"));
    assert_eq!(a.lines().count(), 1 + 12);
    assert_eq!(a, b);
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "format = json\nseed = 5\n").unwrap();
    let base = ["montgomery-check", "--M", "8", "--N", "50", "--config", path.to_str().unwrap()];

    let o = ppdio(&base);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["kind"], "montgomery_check");

    let o = Command::new(env!("CARGO_BIN_EXE_ppdio"))
        .args(base)
        .env("PPDIO_SEED", "9")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 9);

    let mut args = base.to_vec();
    args.extend(["--seed", "11"]);
    let o = Command::new(env!("CARGO_BIN_EXE_ppdio"))
        .args(&args)
        .env("PPDIO_SEED", "9")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["rows"][0]["holds"], true);
}

#[test]
fn compare_reports_regions() {
    let o = ppdio(&["compare", "--lo", "4", "--hi", "12", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &v["rows"]["advantage_regions"][0];
    assert_eq!(first[0].as_f64().unwrap(), 8.0);
    assert!((first[1].as_f64().unwrap() - 8.4458).abs() < 1e-3);
}
