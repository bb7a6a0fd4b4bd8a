use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gl1n(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gl1n"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

/// Runs a verb with `--output json`, checks exit 0 and the schema.
fn json_of(verb: &str, args: &[&str]) -> Value {
    let mut all = vec![verb];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--output", "json"]);
    let out = gl1n(&all);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{all:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let validator = schema(verb);
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(
        errors.is_empty(),
        "{verb} output breaks its schema: {errors:?}"
    );
    v
}

#[test]
fn fock_spectrum_has_mirrored_levels() {
    let v = json_of("spectrum", &["--fock", "5", "--n", "3", "--r", "1"]);
    let levels = v["levels"].as_array().unwrap();
    let mult: Vec<u64> = levels
        .iter()
        .map(|l| l["multiplicity"].as_u64().unwrap())
        .collect();
    assert_eq!(mult, vec![1, 2, 1, 1, 2, 1]);
    let values: Vec<f64> = levels
        .iter()
        .map(|l| l["value"].as_f64().unwrap())
        .collect();
    for (a, b) in values.iter().zip(values.iter().rev()) {
        assert!((a + b).abs() < 1e-12);
    }
    // x_K = scale * sqrt(p - K) with scale sqrt(hbar gamma / (mu n))
    let scale = v["scale"].as_f64().unwrap();
    for (k, x) in values[3..].iter().enumerate() {
        assert!((x - scale * ((3 + k) as f64).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn verify_example_passes() {
    let out = gl1n(&["verify", "--n", "3", "--hw", "4,2,1,0", "--seed", "7"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v = json_of("verify", &["--n", "3", "--hw", "4,2,1,0", "--seed", "7"]);
    assert_eq!(v["passed"], Value::Bool(true));
}

#[test]
fn ladder_dimension() {
    let out = gl1n(&["dims", "--ladder", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "5\n");
    let v = json_of("dims", &["--ladder", "2", "--n", "2"]);
    assert_eq!(v["dim"], 5);
}

#[test]
fn every_verb_matches_its_schema() {
    json_of("dims", &["--hw", "3/2,1,0"]);
    json_of("branch", &["--hw", "4,2,1,0"]);
    json_of("eigvecs", &["--fock", "3", "--n", "3"]);
    json_of(
        "eigvecs",
        &["--hw", "4,2,1,0", "--observable", "momentum", "--r", "2"],
    );
    json_of("eigvecs", &["--hw", "2,1", "--alpha", "1-2i"]);
    json_of("probs", &["--fock", "3", "--n", "3", "--state", "1,0,1"]);
    json_of("probs", &["--ladder", "2", "--n", "2"]);
    json_of("energy", &["--ladder", "3", "--n", "3", "--c", "0.1"]);
    json_of("verify", &["--fock", "2", "--n", "2"]);
}

#[test]
fn probabilities_sum_to_one() {
    let v = json_of("probs", &["--hw", "3,1,0,0", "--r", "2"]);
    for s in v["states"].as_array().unwrap() {
        assert!((s["total"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
    let v = json_of("probs", &["--fock", "4", "--n", "4", "--state", "1,1,0,1"]);
    for o in v["states"][0]["outcomes"].as_array().unwrap() {
        assert!((o["probability"].as_f64().unwrap() - o["law"].as_f64().unwrap()).abs() < 1e-10);
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["eigvecs", "--hw", "4,2,1,0", "--output", "csv"][..],
        &[
            "verify", "--hw", "3,1,1,0", "--seed", "11", "--output", "json",
        ][..],
        &["probs", "--ladder", "3", "--n", "3", "--output", "csv"][..],
    ] {
        let a = gl1n(args);
        let b = gl1n(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn csv_floats_round_trip() {
    let out = gl1n(&["spectrum", "--fock", "5", "--n", "3", "--output", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let values: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[0].parse().unwrap())
        .collect();
    let v = json_of("spectrum", &["--fock", "5", "--n", "3"]);
    let json_values: Vec<f64> = v["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["value"].as_f64().unwrap())
        .collect();
    assert_eq!(values, json_values);
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = std::env::temp_dir().join(format!("gl1n-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("chain.toml");
    std::fs::write(
        &path,
        "n = 3\nrep = \"fock\"\np = 5\nomega = 2.0\nc = 0.5\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = json_of("spectrum", &["--config", p]);
    let flags = json_of(
        "spectrum",
        &["--fock", "5", "--n", "3", "--omega", "2.0", "--c", "0.5"],
    );
    assert_eq!(from_file, flags);
    let overridden = json_of("spectrum", &["--config", p, "--c", "0"]);
    assert_ne!(from_file["scale"], overridden["scale"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| gl1n(args).status.code();
    // non-unitary labels
    assert_eq!(code(&["spectrum", "--hw", "1/4,1,0"]), Some(2));
    assert_eq!(code(&["dims", "--hw", "1/2,1,0"]), Some(2));
    // Fock module without n
    assert_eq!(code(&["dims", "--fock", "3"]), Some(2));
    // supercritical coupling
    assert_eq!(
        code(&["spectrum", "--fock", "3", "--n", "4", "--c", "1e6"]),
        Some(2)
    );
    // out-of-range state
    assert_eq!(code(&["probs", "--hw", "2,1,0", "--state", "999"]), Some(2));
    // wrong alpha length
    assert_eq!(
        code(&["spectrum", "--hw", "2,1,0", "--alpha", "1"]),
        Some(2)
    );
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn dimension_cap_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_gl1n"))
        .args(["dims", "--hw", "6,3,2,1,0"])
        .env("GL1N_DIM_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("10"));
}
