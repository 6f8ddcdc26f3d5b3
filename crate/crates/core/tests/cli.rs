use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sltransmute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV table, header checked.
fn csv(o: &Output, header: &str) -> Vec<Vec<String>> {
    let text = stdout(o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header), "stderr: {}", stderr(o));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s}"))
}

const EIG_HEADER: &str = "index,lambda_re,lambda_im,omega_re,omega_im,residual,method";

#[test]
fn square_well_bound_states() {
    let o = run(&["eigs", "--builtin", "square_well", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv(&o, EIG_HEADER);
    assert_eq!(rows.len(), 3);
    let beta = [
        3.667_813_222_754_881_4,
        2.995_470_746_073_158_5,
        1.544_367_163_762_827_2,
    ];
    for (r, b) in rows.iter().zip(beta) {
        let got = (-num(&r[1])).sqrt();
        assert!((got - b).abs() < 1e-9, "{got} vs {b}");
    }
}

#[test]
fn well_shortfall_exits_4() {
    let o = run(&["eigs", "--builtin", "square_well", "--count", "5"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(csv(&o, EIG_HEADER).len(), 3);
    assert!(stderr(&o).contains("bound states"));
}

#[test]
fn free_dirichlet() {
    let o = run(&[
        "eigs",
        "--potential",
        "0",
        "--interval",
        "0,pi",
        "--bc-left",
        "dirichlet",
        "--bc-right",
        "dirichlet",
        "--count",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv(&o, EIG_HEADER);
    assert_eq!(rows.len(), 5);
    for (n, r) in rows.iter().enumerate() {
        assert_eq!(num(&r[0]) as usize, n);
        let want = ((n + 1) * (n + 1)) as f64;
        assert!((num(&r[1]) - want).abs() < 1e-9 * want, "{r:?}");
        assert_eq!(num(&r[2]), 0.0);
    }
}

#[test]
fn diagnose_sweep_decreases() {
    let o = run(&["diagnose", "--builtin", "paine1", "--n-sweep", "8:32:4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv(&o, "n,eps1,eps2");
    let ns: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, vec![8, 12, 16, 20, 24, 28, 32]);
    for col in [1, 2] {
        let e: Vec<f64> = rows.iter().map(|r| num(&r[col])).collect();
        for w in e.windows(2) {
            assert!(w[1] < 0.5 * w[0], "column {col}: {e:?}");
        }
        assert!(e[6] < 1e-6 * e[0], "column {col}: {e:?}");
    }
}

#[test]
fn diagnose_ratios() {
    let o = run(&[
        "diagnose",
        "--builtin",
        "paine1",
        "--x",
        "1",
        "-n",
        "40",
        "-m",
        "256",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["flagged"], Value::Bool(false));
    assert_eq!(v["meta"]["x"].as_f64(), Some(1.0));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 41);
    for r in rows {
        let ratio = r["ratio"].as_f64().unwrap();
        assert!((0.5..2.0).contains(&ratio), "{r}");
    }
    let o = run(&["diagnose", "--builtin", "paine1", "--x", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let parse = run(&["eigs", "--potential", "exp(x", "--interval", "0,1"]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).starts_with("error (config): parse error at position"));

    let floor = run(&["eigs", "--potential", "x", "--interval", "0,1", "-m", "20", "-n", "30"]);
    assert_eq!(floor.status.code(), Some(2));

    let unknown = run(&["eigs", "--builtin", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));

    let flags = run(&["eigs", "--no-such-flag"]);
    assert_eq!(flags.status.code(), Some(2));

    let overflow = run(&["eigs", "--potential", "1e4", "--interval", "0,10", "--count", "2"]);
    assert_eq!(overflow.status.code(), Some(3));
    assert!(stderr(&overflow).starts_with("error (construction)"));

    let short = run(&[
        "eigs",
        "--potential",
        "0",
        "--interval",
        "0,pi",
        "--count",
        "5",
        "--omega-max",
        "3.5",
    ]);
    assert_eq!(short.status.code(), Some(4));
    assert_eq!(csv(&short, EIG_HEADER).len(), 3);
}

// CSV carries 17 significant digits, JSON the shortest round-trip form:
// both must give back the same doubles
#[test]
fn json_and_csv_agree_bit_for_bit() {
    let base = ["eigs", "--builtin", "paine1", "--count", "8"];
    let c = run(&base);
    let j = run(&[&base[..], &["--format", "json"]].concat());
    assert_eq!(c.status.code(), Some(0));
    assert_eq!(j.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&j)).unwrap();
    for key in ["N", "M", "eps1", "eps2", "runtime_ms"] {
        assert!(v["meta"].get(key).is_some(), "meta lacks {key}");
    }
    let rows = csv(&c, EIG_HEADER);
    let jrows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (r, jr) in rows.iter().zip(jrows) {
        for (col, key) in [
            (1, "lambda_re"),
            (2, "lambda_im"),
            (3, "omega_re"),
            (4, "omega_im"),
            (5, "residual"),
        ] {
            let a = num(&r[col]);
            let b = jr[key].as_f64().unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{key}: {} vs {}", r[col], jr[key]);
            // and once more through a 17-digit decimal
            let again: f64 = format!("{b:.16e}").parse().unwrap();
            assert_eq!(again.to_bits(), b.to_bits());
        }
        assert_eq!(r[6], jr["method"].as_str().unwrap());
    }
}

#[test]
fn config_file_with_relative_samples() {
    let dir = tempfile::tempdir().unwrap();
    // q = x^2 sampled densely; the cubic interpolant is accurate to ~h^4
    let mut text = String::from("# x q\n");
    for j in 0..=400 {
        let x = PI * j as f64 / 400.0;
        text.push_str(&format!("{x:.17e} {:.17e}\n", x * x));
    }
    fs::create_dir(dir.path().join("data")).unwrap();
    fs::write(dir.path().join("data/q.dat"), text).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        r#"
[problem]
interval = "0,pi"
samples_file = "data/q.dat"
bc_left = "dirichlet"
bc_right = { alpha = 1, beta = 0 }

[run]
m = 128
n = 24
count = 4

[output]
format = "json"
out = "eigs.json"
"#,
    )
    .unwrap();
    let o = run(&["eigs", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("eigs.json")).unwrap()).unwrap();
    assert_eq!(v["meta"]["N"], 24);
    assert_eq!(v["meta"]["M"], 128);

    let e = run(&[
        "eigs",
        "--potential",
        "x^2",
        "--interval",
        "0,pi",
        "-m",
        "128",
        "-n",
        "24",
        "--count",
        "4",
        "--format",
        "json",
    ]);
    let w: Value = serde_json::from_str(&stdout(&e)).unwrap();
    let (a, b) = (v["rows"].as_array().unwrap(), w["rows"].as_array().unwrap());
    assert_eq!(a.len(), 4);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x["lambda_re"].as_f64().unwrap(), y["lambda_re"].as_f64().unwrap());
        assert!((x - y).abs() < 1e-6 * y.abs(), "{x} vs {y}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[problem]\ninterval = \"0,pi\"\npotential = \"0\"\n[run]\ncount = 4\n[output]\nformat = \"json\"\n",
    )
    .unwrap();
    let o = run(&[
        "eigs",
        "--config",
        cfg.to_str().unwrap(),
        "--count",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(csv(&o, EIG_HEADER).len(), 2);
}

#[test]
fn ivp_samples() {
    let o = run(&[
        "ivp",
        "--potential",
        "0",
        "--interval",
        "1,3",
        "--lambda",
        "4",
        "--points",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv(&o, "x,y_re,y_im,dy_re,dy_im");
    assert_eq!(rows.len(), 11);
    assert_eq!(num(&rows[0][0]), 1.0);
    assert_eq!(num(&rows[10][0]), 3.0);
    for r in rows {
        let t = num(&r[0]) - 1.0;
        assert!((num(&r[1]) - (2.0 * t).sin() / 2.0).abs() < 1e-12, "{r:?}");
        assert!((num(&r[3]) - (2.0 * t).cos()).abs() < 1e-11, "{r:?}");
    }
}

#[test]
fn kernel_grid() {
    let o = run(&["kernel", "--builtin", "paine1", "--grid", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = csv(&o, "x,t,k_re,k_im");
    assert_eq!(rows.len(), 15);
    for r in &rows {
        let (x, t) = (num(&r[0]), num(&r[1]));
        assert!(t.abs() <= x + 1e-15 && x <= PI + 1e-15);
        assert!(num(&r[2]).is_finite());
    }
    let seg = run(&["kernel", "--builtin", "paine1", "--segments", "2"]);
    assert_eq!(seg.status.code(), Some(2));
}
