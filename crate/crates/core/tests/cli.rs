use serde_json::Value;

use qclt::cli::{exit, run};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("qclt").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out, err) = call(&a);
    assert_eq!(code, exit::OK, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn exact_column(doc: &Value) -> Vec<String> {
    doc["results"].as_array().unwrap().iter().map(|r| r["exact"].as_str().unwrap().to_string()).collect()
}

#[test]
fn limit_examples() {
    assert_eq!(exact_column(&json(&["limit", "--kind", "free", "--n", "2,4,6,8"])), ["1", "2", "5", "14"]);
    assert_eq!(exact_column(&json(&["limit", "--kind", "tensor", "--n", "2,4,6"])), ["1", "3", "15"]);
    assert_eq!(exact_column(&json(&["qlimit", "--n", "6"])), ["5 + 6*q + 3*q^2 + q^3"]);
    assert_eq!(exact_column(&json(&["qlimit", "--n", "4", "--q", "1/2"])), ["5/2"]);
}

#[test]
fn json_schema_and_determinism() {
    let args = ["finite-n", "--kind", "monotone", "--n", "4,5", "--N", "1,2,3,4", "--json"];
    let (_, a, _) = call(&args);
    let (_, b, _) = call(&args);
    assert_eq!(a, b);
    let doc: Value = serde_json::from_str(&a).unwrap();
    let keys: Vec<&str> = doc.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["schema_version", "command", "inputs", "results", "timings"]);
    for row in doc["results"].as_array().unwrap() {
        assert!(row.get("n").is_some() && row.get("N").is_some());
        let exact = row["exact"].as_str().unwrap();
        let approx = row["approx"].as_f64().unwrap();
        if !exact.contains("sqrt") {
            let (p, q) = exact.split_once('/').unwrap_or((exact, "1"));
            let v = p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap();
            assert!((v - approx).abs() <= 4.0 * f64::EPSILON * v.abs().max(1.0));
        }
    }
    let last = &doc["results"].as_array().unwrap()[4];
    assert_eq!(last["N"], "limit");
    assert!(last.get("error_exact").is_none());
}

#[test]
fn finite_n_closed_form_and_csv() {
    let doc = json(&["finite-n", "--kind", "tensor", "--n", "4", "--N", "1,2,4,8"]);
    assert_eq!(exact_column(&doc), ["1", "2", "5/2", "11/4", "3"]);
    let (code, csv, _) = call(&["finite-n", "--kind", "boolean", "--n", "4", "--N", "1,2,4", "--csv"]);
    assert_eq!(code, exit::OK);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,labels,N,exact,approx,error_exact,error_approx");
    assert_eq!(lines[1], "4,b b b b,1,1,1.0,0,0.0");
    assert_eq!(lines.len(), 5);
}

#[test]
fn input_errors_exit_one_with_error_object() {
    let (code, out, _) = call(&["limit", "--kind", "bogus", "--json"]);
    assert_eq!(code, exit::INPUT);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["error"]["kind"], "parse");
    let (code, _, _) = call(&["limit", "--nonsense"]);
    assert_eq!(code, exit::INPUT);
    let (code, _, _) = call(&["finite-n", "--kind", "free", "--N", "4,2"]);
    assert_eq!(code, exit::INPUT);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, exit::OK);
    assert!(out.contains("verify"));
}

fn temp_file(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qclt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn missing_moment_exits_two() {
    let dist = temp_file("short.toml", "[moments]\n\"b\" = \"0\"\n\"b b\" = \"1\"\n");
    let (code, out, _) = call(&["finite-n", "--kind", "free", "--n", "4", "--dist", dist.to_str().unwrap(), "--json"]);
    assert_eq!(code, exit::EVALUATION);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["error"]["kind"], "missing_moment");
    // the limit only needs second moments
    let (code, _, _) = call(&["limit", "--kind", "free", "--n", "4", "--dist", dist.to_str().unwrap()]);
    assert_eq!(code, exit::OK);
}

#[test]
fn problem_file_runs() {
    let spec = temp_file(
        "problem.toml",
        r#"
command = "finite-n"
kind = "free"
degrees = [4]
N_values = [2, 4]

[distribution.moments]
"s" = "0"
"s s" = "1"
"s s s" = "0"
"s s s s" = "2"
"#,
    );
    let doc = json(&["run", spec.to_str().unwrap()]);
    let rows = doc["results"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // m4/N + 2(N-1)/N with m4 = 2 is already the Catalan limit
    assert_eq!(exact_column(&doc), ["2", "2", "2"]);
    let bad = temp_file("bad.toml", "command = \"limit\"\nkind = \"free\"\ndegres = [2]\n");
    let (code, out, _) = call(&["run", bad.to_str().unwrap(), "--json"]);
    assert_eq!(code, exit::INPUT);
    let msg = serde_json::from_str::<Value>(&out).unwrap()["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("degres") && msg.contains("line 3"), "{msg}");
}

#[test]
fn fock_qccr_opvalued_and_hypotheses() {
    let doc = json(&["fock", "--kind", "boson", "--n", "2,4,6"]);
    assert_eq!(exact_column(&doc), ["1", "3", "15"]);
    assert_eq!(doc["results"][2]["matrix_approx"].as_f64().unwrap().round(), 15.0);
    assert_eq!(exact_column(&json(&["fock", "--kind", "q", "--n", "4"])), ["2 + q"]);

    let doc = json(&["qccr", "--q", "1/2", "--depth", "32", "--k-max", "6"]);
    let row = &doc["results"][0];
    assert!(row["ccr_interior"].as_f64().unwrap() < 1e-12);
    assert!(row["reconstruction_error"].as_f64().unwrap() <= row["tail_bound"].as_f64().unwrap() + 1e-9);

    let doc = json(&["opvalued", "--seed", "3", "--n", "2,4", "--N", "2,4"]);
    for r in doc["results"].as_array().unwrap() {
        if r["N"] == "limit" {
            assert_eq!(r["vacuum_agrees"], true);
            assert_eq!(r["exact"].as_array().unwrap().len(), 2);
        }
    }
    assert_eq!(json(&["opvalued", "--seed", "3", "--n", "4"]), json(&["opvalued", "--seed", "3", "--n", "4"]));

    let doc = json(&["check-hypotheses", "--kind", "monotone", "--n", "4"]);
    let rows = doc["results"].as_array().unwrap();
    let passed: Vec<bool> = rows[..3].iter().map(|r| r["passed"].as_bool().unwrap()).collect();
    assert_eq!(passed, [true, true, false]);
    assert_eq!(rows[3]["exact"], "1");
}

#[test]
fn verify_filter_and_fault_injection() {
    let doc = json(&["verify", "--only", "qccr"]);
    let rows = doc["results"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["check"], "qccr");
    assert_eq!(rows[0]["passed"], true);

    let (code, out, _) = call(&["verify", "--only", "free-limit,tensor-limit", "--inject-fault", "catalan-off-by-one"]);
    assert_eq!(code, exit::VERIFICATION);
    assert!(out.lines().any(|l| l.starts_with("free-limit") && l.contains("false")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("tensor-limit") && l.contains("true")), "{out}");

    let (code, _, _) = call(&["verify", "--only", "nope"]);
    assert_eq!(code, exit::INPUT);
}

#[test]
fn jobs_flag_bounds_the_pool() {
    let one = json(&["finite-n", "--kind", "free", "--n", "6", "--N", "2,3", "--jobs", "1"]);
    let many = json(&["finite-n", "--kind", "free", "--n", "6", "--N", "2,3", "--jobs", "4"]);
    assert_eq!(one["results"], many["results"]);
    let (code, _, _) = call(&["limit", "--kind", "free", "--jobs", "0"]);
    assert_eq!(code, exit::INPUT);
}
