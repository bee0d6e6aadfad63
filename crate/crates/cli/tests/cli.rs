use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn zbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zbias"))
        .args(args)
        .env_remove("ZBIAS_THREADS")
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    scenario(name).to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(&zbias(args))).unwrap()
}

/// Exit status and the single diagnostic line.
fn failure(o: &Output) -> (i32, String) {
    assert!(o.stdout.is_empty());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err:?}");
    assert!(err.starts_with("zbias: error: "), "{err:?}");
    (o.status.code().unwrap(), err)
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut f, text.as_bytes()).unwrap();
    f
}

#[test]
fn table_rows_golden() {
    let expected = [
        ("case1.scn", "  0.0550     0.0574   0.0584     YES"),
        ("case2.scn", "  0.0050     0.0076   0.0077     YES"),
        ("case3.scn", "  0.0150     0.0173   0.0172      NO"),
    ];
    for (file, row) in expected {
        let out = stdout(&zbias(&[
            "eval",
            &path(file),
            "--conditioning",
            "on_z",
            "--table",
        ]));
        assert_eq!(
            out,
            format!("ACE_true  ACE_unadj  ACE_adj  Z-bias\n{row}\n"),
            "{file}"
        );
    }
}

#[test]
fn eval_json_golden() {
    let out = stdout(&zbias(&["eval", &path("case1.scn")]));
    let expected = r#"{
  "true_treated": 0.055882352941176466,
  "true_control": 0.054347826086956527,
  "true_all": 0.055000000000000007,
  "unadj": 0.057416879795396419,
  "adj_treated": 0.05818915801614763,
  "adj_control": 0.058488612836438927,
  "adj_all": 0.058361344537815121,
  "f": 0.42499999999999999,
  "conditioning": "on_z"
}
"#;
    assert_eq!(out, expected);
}

#[test]
fn propensity_conditioning_matches_on_z_for_binary_instrument() {
    let z = json(&["eval", &path("case3.scn")]);
    let pi = json(&[
        "eval",
        &path("case3.scn"),
        "--conditioning",
        "on_propensity",
    ]);
    assert_eq!(pi["conditioning"], "on_propensity");
    for key in ["adj_treated", "adj_control", "adj_all"] {
        let (a, b) = (z[key].as_f64().unwrap(), pi[key].as_f64().unwrap());
        assert!((a - b).abs() < 1e-15, "{key}");
    }
}

#[test]
fn check_weaker_holds_for_case1() {
    let v = json(&["check", &path("case1.scn"), "--theorem", "weaker"]);
    assert_eq!(v[0]["theorem"], "weaker");
    assert_eq!(v[0]["holds"], true);
    assert_eq!(v[0]["reports"][0]["condition_id"], "weaker_condition");
}

#[test]
fn check_case2_reports_witnesses() {
    let v = json(&["check", &path("case2.scn"), "--theorem", "thm1,weaker,cor1"]);
    let thm1 = &v[0];
    assert_eq!(thm1["holds"], false);
    let b = thm1["reports"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["condition_id"] == "thm1.b")
        .unwrap();
    assert_eq!(b["holds"], false);
    assert_eq!(b["witnesses"][0]["cell"], "a=0, z=1 vs a=0, z=0");
    assert_eq!(v[1]["holds"], false);
    assert_eq!(v[1]["reports"][0]["witnesses"][0]["cell"], "A=0");
    assert_eq!(v[2]["theorem"], "cor1");
    assert_eq!(v[2]["holds"], false);

    // The lemma premises need an additive table, which case 2 lacks.
    let (code, msg) = failure(&zbias(&[
        "check",
        &path("case2.scn"),
        "--theorem",
        "lemma_s5",
    ]));
    assert_eq!(code, 1);
    assert!(msg.contains("premise"), "{msg}");
}

#[test]
fn check_potential_outcome_file() {
    let v = json(&[
        "check",
        &path("potential.scn"),
        "--theorem",
        "thm4,thm5-binary,cor3",
    ]);
    for bundle in v.as_array().unwrap() {
        assert_eq!(bundle["holds"], true, "{bundle}");
    }
    let e = json(&["eval", &path("potential.scn")]);
    assert_eq!(e["conditioning"], "on_propensity");
    let t = e["true_all"].as_f64().unwrap();
    assert!(e["adj_all"].as_f64().unwrap() >= e["unadj"].as_f64().unwrap());
    assert!(e["unadj"].as_f64().unwrap() >= t);
}

#[test]
fn collider_check_has_both_arms() {
    let v = json(&["check", &path("case1.scn"), "--theorem", "collider"]);
    let ids: Vec<&str> = v[0]["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["condition_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["collider.a1", "collider.a0"]);
}

#[test]
fn dce_rr_and_average() {
    let d = json(&["dce", &path("case1.scn"), "--threshold", "0.5"]);
    let e = json(&["eval", &path("case1.scn")]);
    assert_eq!(d["threshold"], 0.5);
    for key in ["true_all", "unadj", "adj_all"] {
        assert_eq!(d[key], e[key], "{key}");
    }
    let below = json(&["dce", &path("case1.scn"), "--threshold", "-1"]);
    assert_eq!(below["true_all"].as_f64().unwrap(), 0.0);

    let r = json(&["rr", &path("case1.scn")]);
    let unadj = (0.0305 / 0.425) / (0.00825 / 0.575);
    assert!((r["unadj"].as_f64().unwrap() - unadj).abs() < 1e-12);

    let a = json(&["average", &path("family.scn")]);
    let c1 = json(&["eval", &path("case1.scn")]);
    let c3 = json(&["eval", &path("case3.scn")]);
    let mix = 0.4 * c1["true_all"].as_f64().unwrap() + 0.6 * c3["true_all"].as_f64().unwrap();
    assert!((a["true_all"].as_f64().unwrap() - mix).abs() < 1e-15);
}

#[test]
fn mc_output_is_byte_stable_across_thread_counts() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_zbias"))
            .args(["mc", "--draws", "20000", "--seed", "7"])
            .env("ZBIAS_THREADS", threads)
            .output()
            .unwrap();
        stdout(&o)
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one, run("0"));
    let v: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["draws"], 20000);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tie_count"], 0);
}

#[test]
fn scatter_rows_are_consistent_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = zbias(&[
            "scatter",
            "--draws",
            "300",
            "--seed",
            "5",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success() && o.stdout.is_empty());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "pZ,pU,p11,p10,p01,p00,r11,r10,r01,r00,bias_adj,bias_unadj,zbias"
    );
    let mut yes = 0;
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 13);
        let adj: f64 = f[10].parse().unwrap();
        let unadj: f64 = f[11].parse().unwrap();
        let flag = f[12] == "true";
        assert_eq!(flag, adj.abs() > unadj.abs(), "{line}");
        yes += flag as u32;
        rows += 1;
    }
    assert_eq!(rows, 300);
    let v = json(&["mc", "--draws", "300", "--seed", "5"]);
    assert_eq!(v["volume"].as_f64().unwrap(), yes as f64 / 300.0);
}

#[test]
fn exit_codes_and_diagnostics() {
    let missing = path("no-such-file.scn");
    assert_eq!(failure(&zbias(&["eval", &missing])).0, 2);
    assert_eq!(
        failure(&zbias(&["eval", &path("case1.scn"), "--bogus"])).0,
        1
    );
    assert_eq!(failure(&zbias(&["check", &path("case1.scn")])).0, 1);
    assert_eq!(
        failure(&zbias(&["check", &path("case1.scn"), "--theorem", "thm9"])).0,
        1
    );
    assert_eq!(failure(&zbias(&["dce", &path("case1.scn")])).0, 1);
    assert_eq!(failure(&zbias(&[])).0, 1);
    assert_eq!(failure(&zbias(&["mc", "--draws", "0", "--seed", "1"])).0, 1);

    let (code, msg) = failure(&zbias(&["check", &path("case1.scn"), "--theorem", "thm4"]));
    assert_eq!(code, 1);
    assert!(msg.contains("potential_outcomes"), "{msg}");
    assert_eq!(failure(&zbias(&["average", &path("case1.scn")])).0, 1);

    let text = std::fs::read_to_string(scenario("case1.scn")).unwrap();
    let bad = write_temp(&text.replace("p10 = 0.6", "p10 = 0.6.1"));
    let (code, msg) = failure(&zbias(&["eval", bad.path().to_str().unwrap()]));
    assert_eq!(code, 1);
    assert!(msg.contains("line 6"), "{msg}");

    let all_treated = ["p11", "p10", "p01", "p00"]
        .iter()
        .fold(text.clone(), |t, k| {
            let line = t.lines().find(|l| l.starts_with(k)).unwrap().to_owned();
            t.replace(&line, &format!("{k} = 1"))
        });
    let degenerate = write_temp(&all_treated);
    let (code, msg) = failure(&zbias(&["eval", degenerate.path().to_str().unwrap()]));
    assert_eq!(code, 3);
    assert!(msg.contains("degenerate"), "{msg}");

    let zero_control = write_temp(
        &text
            .replace("r01 = 0.02", "r01 = 0")
            .replace("r00 = 0.01", "r00 = 0"),
    );
    assert_eq!(
        failure(&zbias(&["rr", zero_control.path().to_str().unwrap()])).0,
        3
    );

    let out = zbias(&[
        "scatter",
        "--draws",
        "3",
        "--seed",
        "1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(failure(&out).0, 2);

    let o = Command::new(env!("CARGO_BIN_EXE_zbias"))
        .args(["mc", "--draws", "5", "--seed", "1"])
        .env("ZBIAS_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(failure(&o).0, 1);
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let o = zbias(&[flag]);
        assert!(o.status.success());
        assert!(!o.stdout.is_empty());
    }
}
