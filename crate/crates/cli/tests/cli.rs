use std::process::{Command, Output};

fn rootclose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rootclose"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn example_passes_and_is_byte_stable() {
    let a = rootclose(&["example", "--no-timestamp"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    let b = rootclose(&["example", "--no-timestamp"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert_eq!(v["config"]["p"], 5);
    assert_eq!(v["config"]["m_max"], 5);
    let cert = &checks[3]["details"]["certificates"][0]["certificate"];
    assert_eq!(cert["m"], 1);
    assert!(cert["witness_terms"][0][3].is_string());
    assert!(v.get("timestamp").is_none());
    assert!(json(&rootclose(&["example"])).get("timestamp").is_some());
}

#[test]
fn plain_control_fails() {
    let out = rootclose(&["example", "--no-timestamp", "--plain-e5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["checks"][4]["status"], "fail");
    assert_eq!(v["checks"][4]["details"]["component"], 1);
}

#[test]
fn small_prime_is_rejected() {
    let out = rootclose(&["example", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p > 3"));
}

#[test]
fn eval_certifies_c1() {
    let out = rootclose(&["eval", "(p^(3/5)+x^(3/5)+y^(3/5))/p^(1/5)", "--check-closure", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["checks"][0]["details"]["certificate"]["m"], 1);
    assert_eq!(v["checks"][0]["details"]["certificate"]["denom_exp"], 1);

    let bad = rootclose(&["eval", "x^(1/3)"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("not a power of 5"));

    let refuted = rootclose(&["eval", "x/p", "--check-closure", "--format", "text"]);
    assert_eq!(refuted.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refuted.stdout).contains("FAIL"));
}

#[test]
fn revalidate_confirms_and_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = rootclose(&["example", "--no-timestamp"]);
    std::fs::write(&path, &out.stdout).unwrap();
    let ok = rootclose(&["revalidate", path.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));

    let mut v = json(&out);
    let row = &mut v["checks"][3]["details"]["certificates"][0]["certificate"]["witness_terms"][0][3];
    let c: i64 = row.as_str().unwrap().parse().unwrap();
    *row = serde_json::Value::String((c + 1).to_string());
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    let bad = rootclose(&["revalidate", path.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["checks"][3]["status"], "fail");

    let missing = rootclose(&["revalidate", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn props_pass_and_negative_control_fails() {
    let out = rootclose(&["props", "--seed", "7", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let bad = rootclose(&["props", "--tamper-witt", "--no-timestamp"]);
    assert_eq!(bad.status.code(), Some(1));
}
