use mkbell::cli::{run, CSV_HEADER};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mkbell").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn maxbell_pure_three_parties() {
    let (code, out, _) = invoke(&["maxbell", "--n", "3", "--channel", "none"]);
    assert_eq!(code, 0);
    assert!(out.contains("best value 2.000000000"), "{out}");
    assert!(out.contains("converged true"));
    assert_eq!(out.lines().filter(|l| l.starts_with("party ")).count(), 3);
}

#[test]
fn maxbell_full_dissipation() {
    let (code, out, _) = invoke(&["maxbell", "--n", "2", "--channel", "dissipation", "--p", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("best value 1.000000000"), "{out}");
}

#[test]
fn maxbell_rejects_bad_input() {
    for args in [
        &["maxbell", "--n", "2", "--channel", "badname", "--p", "0.1"][..],
        &["maxbell", "--n", "2", "--channel", "dephasing"],
        &["maxbell", "--n", "2", "--channel", "dephasing", "--p", "1.5"],
        &["maxbell", "--n", "1", "--channel", "none"],
        &["maxbell", "--n", "two", "--channel", "none"],
        &["bogus"],
    ] {
        let (code, _, err) = invoke(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(err.starts_with("error:"), "{err}");
    }
}

#[test]
fn maxbell_nonconvergence_exits_one() {
    // a single start with a one-sweep budget cannot meet the tolerance
    let (code, out, err) = invoke(&[
        "maxbell", "--n", "3", "--channel", "none", "--starts", "1", "--max-sweeps", "1",
    ]);
    assert_eq!(code, 1, "{out}{err}");
    assert!(out.contains("converged false"));
    assert!(err.contains("error"));
}

#[test]
fn maxbell_json_shape() {
    let (code, out, _) = invoke(&["maxbell", "--n", "2", "--channel", "dephasing", "--p", "0.5", "--json", "--starts", "8"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["channel", "converged", "max_bell", "n", "p", "seed", "settings"]);
    assert_eq!(obj["n"], 2);
    assert_eq!(obj["channel"], "dephasing");
    assert_eq!(obj["p"], 0.5);
    assert!((obj["max_bell"].as_f64().unwrap() - 1.0625f64.sqrt()).abs() < 1e-5);
    let settings = obj["settings"].as_array().unwrap();
    assert_eq!(settings.len(), 2);
    for party in settings {
        for key in ["theta", "theta_prime", "phi", "phi_prime"] {
            assert!(party[key].is_f64(), "{key}");
        }
    }

    let (_, out, _) = invoke(&["maxbell", "--n", "2", "--channel", "none", "--json", "--starts", "4"]);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["p"].is_null());
}

#[test]
fn maxbell_is_reproducible() {
    let args = ["maxbell", "--n", "3", "--channel", "dissipation", "--p", "0.2", "--seed", "42", "--starts", "8"];
    assert_eq!(invoke(&args), invoke(&args));
}

#[test]
fn pmax_depolarizing_two_parties() {
    let (code, out, _) = invoke(&["pmax", "--n", "2", "--channel", "depolarizing"]);
    assert_eq!(code, 0);
    let numeric: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("numeric p_max "))
        .and_then(|rest| rest.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((numeric - 0.159104).abs() < 1e-4, "{out}");
    assert!(out.contains("analytic p_max 0.159103585"));
    assert!(out.contains("difference"));
}

#[test]
fn pmax_even_dephasing_reports_no_threshold() {
    let (code, out, _) = invoke(&["pmax", "--n", "2", "--channel", "dephasing", "--tol", "1e-3"]);
    assert_eq!(code, 0);
    assert!(out.contains("no threshold found below cap 0.999"), "{out}");
    assert!(out.contains("analytic p_max n/a"));
}

#[test]
fn pmax_rejects_bad_input() {
    for args in [
        &["pmax", "--n", "2", "--channel", "none"][..],
        &["pmax", "--n", "2", "--channel", "depolarizing", "--tol", "1e-9"],
        &["pmax", "--n", "2"],
    ] {
        assert_eq!(invoke(args).0, 2, "{args:?}");
    }
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let path_s = path.to_str().unwrap();
    let args = [
        "sweep", "--n", "2", "--channel", "dephasing", "--p-min", "0", "--p-max", "1", "--steps", "11", "--out", path_s,
    ];
    let (code, _, err) = invoke(&args);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "channel,n,p,max_bell");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "dephasing,2,0.000000000,1.414213562");
    assert_eq!(lines[11], "dephasing,2,1.000000000,1.000000000");
    assert_eq!(lines[6], format!("dephasing,2,0.500000000,{:.9}", 1.0625f64.sqrt()));

    // parsed values re-render to the identical strings
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), CSV_HEADER.as_slice());
    for record in reader.records() {
        let record = record.unwrap();
        for field in [2, 3] {
            let value: f64 = record[field].parse().unwrap();
            assert_eq!(format!("{value:.9}"), &record[field]);
        }
    }

    // identical flags give identical bytes
    let first = std::fs::read(&path).unwrap();
    assert_eq!(invoke(&args).0, 0);
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn sweep_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    for args in [
        &["sweep", "--n", "2", "--channel", "dephasing", "--p-min", "0.6", "--p-max", "0.5", "--steps", "3", "--out", out][..],
        &["sweep", "--n", "2", "--channel", "dephasing", "--p-min", "0", "--p-max", "1", "--steps", "1", "--out", out],
        &["sweep", "--n", "2", "--channel", "dephasing", "--p-min", "0", "--p-max", "2", "--steps", "3", "--out", out],
    ] {
        assert_eq!(invoke(args).0, 2, "{args:?}");
    }
}

#[test]
fn sweep_write_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("f.csv");
    let (code, _, err) = invoke(&[
        "sweep", "--n", "2", "--channel", "none", "--p-min", "0", "--p-max", "1", "--steps", "2", "--starts", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("error"));
}

#[test]
fn verify_smoke_and_default() {
    let (code, out, _) = invoke(&["verify", "--n-max", "2", "--trials", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("PASS"));

    let (code, out, _) = invoke(&["verify"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("max correlation deviation < 1e-12"));
    assert!(out.ends_with("PASS\n"));

    assert_eq!(invoke(&["verify", "--n-max", "1"]).0, 2);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("maxbell") && out.contains("sweep"));
}
