use std::process::{Command, Output};

fn mdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdlab")).args(args).env("MDLAB_THREADS", "1").output().expect("spawn mdlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn parse_value(s: &str) -> (f64, f64) {
    let line = s.lines().find(|l| l.starts_with("value = ")).expect("value line");
    let mut it = line["value = ".len()..].split_whitespace();
    let re: f64 = it.next().unwrap().parse().unwrap();
    let im: f64 = it.next().unwrap().trim_end_matches('i').parse().unwrap();
    (re, im)
}

#[test]
fn wb_has_unit_modulus_on_the_real_line() {
    for x in ["0.5", "-1.3", "2.25"] {
        let o = mdlab(&["eval", "wb", "--x", x]);
        assert!(o.status.success());
        let (re, im) = parse_value(&stdout(&o));
        assert!((re.hypot(im) - 1.0).abs() < 1e-12, "{x}: {re} {im}");
    }
}

#[test]
fn omega_is_a_phase() {
    let o = mdlab(&["eval", "omega", "--s3", "0.3", "--s2", "0.5", "--s1", "0.2"]);
    assert!(o.status.success());
    let (re, im) = parse_value(&stdout(&o));
    assert!((re.hypot(im) - 1.0).abs() < 1e-14);
}

#[test]
fn verma_suite_passes() {
    let o = mdlab(&["verify", "--suite", "verma"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["suite"], "verma");
    assert_eq!(r["summary"]["failed"], 0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn reports_are_deterministic() {
    let a = mdlab(&["verify", "--suite", "identities", "--seed", "5"]);
    let b = mdlab(&["verify", "--suite", "identities", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn tolerance_override_can_fail_a_check() {
    let o = mdlab(&["verify", "--suite", "verma", "--tol", "verma_intertwine_e=1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let r: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r["params"]["tols"]["verma_intertwine_e"], 1e-300);
    assert_eq!(r["summary"]["failed"], 1);
}

#[test]
fn bad_configuration_exits_with_two() {
    assert_eq!(mdlab(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(mdlab(&["verify", "--suite", "lattice", "--grid", "48"]).status.code(), Some(2));
    assert_eq!(mdlab(&["verify", "--suite", "verma", "--tol", "x=-1"]).status.code(), Some(2));
    assert_eq!(mdlab(&["eval", "wb"]).status.code(), Some(2));
}

#[test]
fn evaluation_at_a_pole_exits_with_one() {
    // x = 0 is a pole of G_b
    let o = mdlab(&["eval", "Gb", "--x", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rkernel_writes_csv() {
    let o = mdlab(&["eval", "rkernel", "--mode", "momentum", "--at", "0.3", "--s2", "0.5", "--s1", "0.3", "--grid", "4", "--csv"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("k2,k1,re,im,eta,epsilon"));
    assert_eq!(lines.count(), 16);
}
