use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn capacheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capacheck"))
        .args(args)
        .env_remove("CAPACHECK_BUDGET")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const EXTRASPECIAL: &str = "n=4 p=3\n[3,1][3,2]^-1\n[3,1][4,1]^-1\n[4,2]\n[4,3]\n[2,1]\n";

#[test]
fn check_json_text_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "es.grp", EXTRASPECIAL);

    let out = capacheck(&["check", &f]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "capacheck/1");
    assert_eq!(v["capable"], false);
    assert_eq!(v["witness_names"], serde_json::json!(["v32"]));
    assert_eq!(v["z"]["dim"], 6);

    let text = capacheck(&["check", &f, "--format", "text"]);
    let s = String::from_utf8(text.stdout).unwrap();
    assert!(s.contains("therefore G is not capable"), "{s}");
    assert!(s.contains("  v32"), "{s}");

    let csv = capacheck(&["check", &f, "--format", "csv"]);
    let s = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(s.lines().nth(1), Some("4,3,5,20,6,false,0,false,false"));
}

#[test]
fn check_capable_and_raw() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.grp", "n=4 p=5\n[2,1]\n[4,3]\n");
    let v = json(&capacheck(&["check", &f]));
    assert_eq!(v["capable"], true);
    assert_eq!(v["witnesses"], serde_json::json!([]));

    let raw = write(dir.path(), "x.raw", "raw-V\n1,0,0\n");
    let v = json(&capacheck(&["check", &raw, "--n", "3", "--p", "3"]));
    assert_eq!(v["dim_x"], 1);
    assert_eq!(v["capable"], true);
    let out = capacheck(&["check", &raw]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let even = write(dir.path(), "even.grp", "n=4 p=2\n[2,1]\n");
    let out = capacheck(&["check", &even]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("odd prime"), "{err}");

    let bad = write(dir.path(), "bad.grp", "n=4 p=3\n[3,1]]\n");
    let out = capacheck(&["check", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("line 2, column 6"));

    assert_eq!(
        capacheck(&["check", "/nonexistent/file"]).status.code(),
        Some(2)
    );
    assert_eq!(capacheck(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(capacheck(&["oracle"]).status.code(), Some(2));
    assert_eq!(
        capacheck(&["phi", "--n", "4", "--p", "9"]).status.code(),
        Some(2)
    );
    assert_eq!(
        capacheck(&["verify", "--suite", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        capacheck(&["census", "--n", "3", "--p", "3", "--dims", "2..1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn phi_dump() {
    let v = json(&capacheck(&["phi", "--n", "3", "--p", "5"]));
    assert_eq!(v["dim_v"], 3);
    assert_eq!(v["dim_w"], 8);
    assert_eq!(v["pair_order"], serde_json::json!(["v21", "v31", "v32"]));
    assert_eq!(v["triple_order"].as_array().unwrap().len(), 8);
    // phi_1(v32) = w312 - w213.
    let col = &v["phi"][0]["columns"][2];
    let order: Vec<String> = v["triple_order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap().to_string())
        .collect();
    let entries: Vec<(String, u64)> = col
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                order[e[0].as_u64().unwrap() as usize].clone(),
                e[1].as_u64().unwrap(),
            )
        })
        .collect();
    assert!(entries.contains(&("w312".into(), 1)));
    assert!(entries.contains(&("w213".into(), 4)));
}

#[test]
fn census_formats_and_determinism() {
    let a = capacheck(&["census", "--n", "4", "--p", "3", "--dims", "4..5"]);
    assert_eq!(a.status.code(), Some(0));
    let b = capacheck(&[
        "census",
        "--n",
        "4",
        "--p",
        "3",
        "--dims",
        "4..5",
        "--workers",
        "4",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["total"], 11011 + 364);
    assert_eq!(v["non_capable_total"], 234);

    let csv = capacheck(&["census", "--n", "3", "--p", "5", "--format", "csv"]);
    let s = String::from_utf8(csv.stdout).unwrap();
    assert!(s.contains("3,5,1,capable,31"), "{s}");
}

#[test]
fn census_budget() {
    let out = capacheck(&["census", "--n", "4", "--p", "3", "--budget", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("56632"));

    let env = Command::new(env!("CARGO_BIN_EXE_capacheck"))
        .args(["census", "--n", "4", "--p", "3"])
        .env("CAPACHECK_BUDGET", "1e3")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(2));
    let ok = Command::new(env!("CARGO_BIN_EXE_capacheck"))
        .args(["census", "--n", "3", "--p", "3"])
        .env("CAPACHECK_BUDGET", "28")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn census_sample_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let ck = ck.to_str().unwrap();
    let args = [
        "census", "--n", "5", "--p", "3", "--dims", "3", "--sample", "40", "--seed", "2",
    ];
    let plain = capacheck(&args);
    assert_eq!(plain.status.code(), Some(0));
    assert_eq!(json(&plain)["total"], 40);
    let mut with = args.to_vec();
    with.extend(["--resume", ck]);
    let first = capacheck(&with);
    assert_eq!(first.stdout, plain.stdout);
    assert!(Path::new(ck).exists());
    let again = capacheck(&with);
    assert_eq!(again.stdout, plain.stdout);
    // A checkpoint from another configuration is refused.
    let mut other = with.clone();
    other[9] = "3";
    assert_eq!(capacheck(&other).status.code(), Some(2));
}

#[test]
fn dimy_and_verify_and_oracle() {
    let v = json(&capacheck(&["dimy", "--n", "4", "--p", "3", "--k", "2"]));
    assert_eq!(v["histogram"], serde_json::json!({"8": 11011}));

    let out = capacheck(&["verify", "--suite", "coordsub", "--n", "4", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"], 64);

    for suite in ["addcyclic", "coprod", "limits", "hn", "crosscheck"] {
        let out = capacheck(&["verify", "--suite", suite, "--samples", "20"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
    }

    let out = capacheck(&["oracle", "--selftest", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}
