use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn halfdisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfdisk")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

/// One `path: type` line per leaf; arrays contribute the schema of their
/// first element.
fn schema(v: &Value, path: &str, lines: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                schema(x, &format!("{path}.{k}"), lines);
            }
        }
        Value::Array(items) => match items.first() {
            Some(first) => schema(first, &format!("{path}[]"), lines),
            None => lines.push(format!("{path}: empty array")),
        },
        Value::Null => lines.push(format!("{path}: null")),
        Value::Bool(_) => lines.push(format!("{path}: bool")),
        Value::Number(_) => lines.push(format!("{path}: number")),
        Value::String(_) => lines.push(format!("{path}: string")),
    }
}

fn assert_schema(v: &Value, golden: &str) {
    let mut lines = Vec::new();
    schema(v, "", &mut lines);
    let actual = lines.join("\n") + "\n";
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(golden);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "schema drift against {golden}");
}

#[test]
fn bounds_matches_library() {
    let v = stdout_json(&halfdisk(&["bounds", "--N", "1e5", "--d", "1e-3", "--eta", "0.5"]));
    let lib = halfdisk::bounds::sigma_total(1e5, 1e-3, 0.5).unwrap();
    let b = &v["bound_report"];
    assert_eq!(b["sigma_interior"].as_f64().unwrap(), lib.sigma_interior);
    assert_eq!(b["sigma_edge"].as_f64().unwrap(), lib.sigma_edge);
    assert_eq!(b["sigma_total"].as_f64().unwrap(), lib.sigma_total);
    assert_eq!(v["asymptotic_hop_ratio"].as_f64().unwrap(), 0.75 * std::f64::consts::PI);
}

#[test]
fn bounds_schema_is_stable() {
    let v = stdout_json(&halfdisk(&["bounds", "--h-over-R", "10,25", "--max-i", "3", "--etas", "0.25,0.5"]));
    assert_eq!(v["hop_bounds"].as_array().unwrap().len(), 2);
    assert_eq!(v["empty_wedge"].as_array().unwrap().len(), 6);
    assert_eq!(v["empty_wedge"][1]["exact"].as_f64().unwrap(), halfdisk::bounds::empty_wedge_prob_exact(2, 0.25).unwrap());
    assert_schema(&v, "bounds.schema");
}

#[test]
fn experiment_report_schema_is_stable() {
    let v = stdout_json(&halfdisk(&["exp", "hopcount", "--h-over-R", "5", "--trials", "50", "--seed", "1"]));
    assert_eq!(v["name"], "hopcount");
    assert_eq!(v["cells"][0]["label"], "h/R=5");
    assert_schema(&v, "report.schema");
}

#[test]
fn route_and_walk_schemas_are_stable() {
    let v = stdout_json(&halfdisk(&["route", "--h-over-R", "6", "--seed", "3"]));
    assert_eq!(v["status"], "Delivered");
    assert_schema(&v, "route.schema");
    let v = stdout_json(&halfdisk(&["walk", "--h-over-R", "4", "--seed", "3"]));
    assert_eq!(v["absorbed"], true);
    assert_schema(&v, "walk.schema");
}

#[test]
fn stepdist_reruns_are_byte_identical() {
    let args = ["exp", "stepdist", "--r-over-R", "2", "--trials", "1e6", "--seed", "7"];
    let a = halfdisk(&args);
    let b = halfdisk(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "2"]);
    assert_eq!(a.stdout, halfdisk(&threaded).stdout);
}

#[test]
fn empty_network_route_is_stuck() {
    let out = halfdisk(&["route", "--lambda", "1e-6", "--h-over-R", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "Stuck");
    assert_eq!(v["hops"], 0);
}

#[test]
fn unknown_config_key_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"N\": 1e5,\n  \"lamda\": 3\n}\n").unwrap();
    let out = halfdisk(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cfg.json:3:") && err.contains("lamda"), "{err}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\n  \"N\": 1e5,\n  \"d\": \n}\n").unwrap();
    let out = halfdisk(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfg.json:4:"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, "{\"N\": 2000, \"d\": 0.01, \"eta\": 0.25, \"seed\": 5}").unwrap();
    let path = cfg.to_str().unwrap();
    let v = stdout_json(&halfdisk(&["bounds", "--config", path, "--eta", "0.5"]));
    assert_eq!(v["bound_report"]["N"].as_f64().unwrap(), 2000.0);
    assert_eq!(v["bound_report"]["eta"].as_f64().unwrap(), 0.5);
    let gen_cfg = dir.path().join("gen.json");
    std::fs::write(&gen_cfg, "{\"seed\": 5, \"size\": 3}").unwrap();
    let gen_path = gen_cfg.to_str().unwrap();
    let from_file = halfdisk(&["gen", "--config", gen_path]);
    let from_flags = halfdisk(&["gen", "--seed", "5", "--size", "3"]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);
    let overridden = halfdisk(&["gen", "--config", gen_path, "--seed", "6"]);
    assert_eq!(overridden.stdout, halfdisk(&["gen", "--seed", "6", "--size", "3"]).stdout);
    assert_ne!(overridden.stdout, from_file.stdout);
}

#[test]
fn csv_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nodes.csv");
    let out = halfdisk(&["gen", "--size", "3", "--seed", "2", "--format", "csv", "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("id,x,y\n") && !text.contains('\r'));
    let report = halfdisk(&["exp", "uwedge", "--max-i", "2", "--trials", "1000", "--format", "csv"]);
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.starts_with("name,label,analytical,lower,upper,estimate,std_error,samples,verdict,details\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn route_reads_node_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nodes.csv");
    std::fs::write(&file, "id,x,y\n0,0,0\n1,0.9,0\n2,1.8,0\n3,2.7,0\n").unwrap();
    let v = stdout_json(&halfdisk(&[
        "route", "--nodes", file.to_str().unwrap(), "--src", "0", "--dst", "3", "--size", "6", "--region", "square",
    ]));
    assert_eq!(v["status"], "Delivered");
    assert_eq!(v["path"], serde_json::json!([0, 1, 2]));
    assert_eq!(v["hops"], 3);
}

#[test]
fn invalid_parameters_exit_2() {
    assert_eq!(halfdisk(&["bounds", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(halfdisk(&["exp", "hopcount", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(halfdisk(&["bounds", "--bogus"]).status.code(), Some(2));
}
