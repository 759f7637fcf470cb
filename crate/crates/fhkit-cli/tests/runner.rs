use std::path::Path;
use std::process::Command;

use fhkit::fhcheck::{structural_classify, StructuralTag};
use fhkit::TrigPoly;
use fhkit_cli::config::{parse_config, plan};
use fhkit_cli::corpus::bundle_corpus;
use fhkit_cli::ops::{load_phase, NList};
use fhkit_cli::runner::{run, run_text, RunOptions};
use fhkit_cli::CliError;

fn opts(dir: &Path, jobs: usize) -> RunOptions {
    RunOptions { jobs, seed: None, out_dir: dir.to_path_buf() }
}

fn config_field(err: CliError) -> (String, String) {
    match err {
        CliError::Config { field, message } => (field, message),
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn empty_config_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let records = run_text("", dir.path(), &opts(dir.path(), 1)).unwrap();
    assert!(records.is_empty());
    let manifest = std::fs::read_to_string(dir.path().join("run.json")).unwrap();
    assert!(manifest.contains("\"schema_version\": 1"));
}

#[test]
fn unknown_operation_names_the_field() {
    let text = "[[scenario]]\nid = \"x\"\noperation = \"divine\"\n";
    let (field, message) = config_field(parse_config(text).unwrap_err());
    assert_eq!(field, "scenario[0].operation");
    assert!(message.contains("divine"), "{message}");
}

#[test]
fn unknown_keys_are_rejected() {
    let (field, message) = config_field(parse_config("[[scenario]]\nid = \"x\"\noperation = \"fefferman\"\ncolour = 3\n").unwrap_err());
    assert!(field.starts_with("scenario[0]"), "{field}");
    assert!(message.contains("colour"), "{message}");

    let text = "[[scenario]]\nid = \"x\"\noperation = \"fefferman\"\nparams = { lambda_grd = \"log:1:2:3\" }\n";
    let (field, message) = config_field(plan(parse_config(text).unwrap(), Path::new("."), None).unwrap_err());
    assert_eq!(field, "scenario[0].params.lambda_grd");
    assert!(message.contains("lambda_grd"), "{message}");

    let text = "[[scenario]]\nid = \"x\"\noperation = \"fefferman\"\nexpect = { slope_mn = 1.0 }\n";
    let (_, message) = config_field(parse_config(text).unwrap_err());
    assert!(message.contains("slope_mn"), "{message}");
}

#[test]
fn schema_rules() {
    let check = |text: &str, seed: Option<u64>| plan(parse_config(text).unwrap(), Path::new("."), seed);
    let sw = "[[scenario]]\nid = \"sw\"\noperation = \"sw-sweep\"\nparams = { degree = 2, trials = 5 }\n";
    assert_eq!(config_field(check(sw, None).unwrap_err()).0, "scenario[0].seed");
    assert_eq!(check(sw, Some(3)).unwrap()[0].seed, Some(3));

    let dup = format!("{sw}seed = 1\n{sw}seed = 2\n");
    assert_eq!(config_field(check(&dup, None).unwrap_err()).0, "scenario[1].id");

    let no_phase = "[[scenario]]\nid = \"f\"\noperation = \"fh-check\"\n";
    assert_eq!(config_field(check(no_phase, None).unwrap_err()).0, "scenario[0].phase");

    let wrong = "[[scenario]]\nid = \"f\"\noperation = \"fefferman\"\nexpect = { verdict = \"VIOLATED\" }\n";
    assert_eq!(config_field(check(wrong, None).unwrap_err()).0, "scenario[0].expect.verdict");

    let dangling = "[[scenario]]\nid = \"f\"\noperation = \"fefferman\"\nexpect = { slope_fraction_of = { scenario = \"g\", fraction = 0.1 } }\n";
    assert_eq!(config_field(check(dangling, None).unwrap_err()).0, "scenario[0].expect.slope_fraction_of.scenario");
}

#[test]
fn module_errors_carry_the_scenario_id() {
    let dir = tempfile::tempdir().unwrap();
    bundle_corpus(dir.path()).unwrap();
    let text = "[[scenario]]\nid = \"short\"\noperation = \"norm-sweep\"\nphase = \"split.json\"\nparams = { mode = \"rect\", n = [1, 2, 4] }\n";
    match run_text(text, dir.path(), &opts(&dir.path().join("out"), 1)).unwrap_err() {
        CliError::Scenario { id, source } => {
            assert_eq!(id, "short");
            assert!(matches!(*source, CliError::Module(fhkit::Error::RangeError(_))));
        }
        other => panic!("{other}"),
    }
    let missing = "[[scenario]]\nid = \"gone\"\noperation = \"fh-check\"\nphase = \"nowhere.json\"\n";
    let err = run_text(missing, dir.path(), &opts(&dir.path().join("out"), 1)).unwrap_err();
    assert!(matches!(err, CliError::Scenario { ref id, ref source } if id == "gone" && matches!(**source, CliError::Io { .. })));
}

#[test]
fn n_lists() {
    assert_eq!("2^3..2^6".parse::<NList>().unwrap().0, vec![8, 16, 32, 64]);
    assert_eq!("5, 7,9".parse::<NList>().unwrap().0, vec![5, 7, 9]);
    assert!("2^6..2^3".parse::<NList>().is_err());
    assert!("lots".parse::<NList>().is_err());
}

const SMALL: &str = r#"
[[scenario]]
id = "fh"
operation = "fh-check"
phase = "vector_product.json"
params = { grid = 128, omega_samples = 6 }
expect = { verdict = "VIOLATED" }

[[scenario]]
id = "q"
operation = "qcalc-verify"
seed = 4
params = { max_depth = 6, check = "identity", draws = 20 }
expect = { all_pass = true }

[[scenario]]
id = "fef"
operation = "fefferman"
params = { lambda_grid = "log:1e2:1e5:7" }

[[scenario]]
id = "sw"
operation = "sw-sweep"
seed = 11
params = { degree = 3, trials = 300 }

[[scenario]]
id = "split"
operation = "norm-sweep"
phase = "split.json"
params = { mode = "sq", n = "2^1..2^4" }

[[scenario]]
id = "square"
operation = "square-sum"
phase = "square_divergent.json"
params = { lattice = "tuned", point = [0.125, 0.0], n = [2, 4, 8, 16] }
"#;

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    bundle_corpus(dir.path()).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let ra = run_text(SMALL, dir.path(), &opts(&a, 1)).unwrap();
    let rb = run_text(SMALL, dir.path(), &opts(&b, 3)).unwrap();
    assert_eq!(ra.len(), 6);
    assert!(ra.iter().all(|r| r.passed()));
    assert_eq!(ra.iter().map(|r| &r.scenario).collect::<Vec<_>>(), rb.iter().map(|r| &r.scenario).collect::<Vec<_>>());
    let mut files = 0;
    for r in &ra {
        for p in &r.outputs {
            let name = p.file_name().unwrap();
            assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name:?}");
            files += 1;
        }
    }
    assert_eq!(files, 9);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("sw.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["argmax"]["coefficients"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(a.join("split.csv")).unwrap();
    assert!(csv.starts_with("n,lambda,norm,M,N,x,y,grid,dyadic_norm\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn failing_assertion_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    bundle_corpus(dir.path()).unwrap();
    let text = "[[scenario]]\nid = \"p\"\noperation = \"fh-check\"\nphase = \"product.json\"\nparams = { grid = 128 }\nexpect = { verdict = \"NO_WITNESS_FOUND\" }\n";
    let r = run_text(text, dir.path(), &opts(&dir.path().join("out"), 1)).unwrap();
    assert!(!r[0].passed());
    assert_eq!(r[0].assertions[0].detail, "got VIOLATED, expected NO_WITNESS_FOUND");
}

#[test]
fn corpus_contents() {
    let dir = tempfile::tempdir().unwrap();
    let files = bundle_corpus(dir.path()).unwrap();
    let phases: Vec<_> = files.iter().filter(|p| p.extension().is_some_and(|e| e == "json")).collect();
    assert_eq!(phases.len(), 7);
    assert!(dir.path().join("scenarios.toml").exists());

    let product = load_phase(&dir.path().join("product.json")).unwrap();
    let text = product.components[0].to_text();
    let back = TrigPoly::from_text(&text, 2).unwrap();
    assert_eq!(back, product.components[0]);
    assert_eq!(back.to_text(), text);
    let txt = dir.path().join("product.txt");
    std::fs::write(&txt, &text).unwrap();
    assert_eq!(load_phase(&txt).unwrap(), product);

    let composite = load_phase(&dir.path().join("composite.json")).unwrap();
    assert_eq!(structural_classify(&composite).unwrap(), StructuralTag::Composite);
}

#[test]
fn bundled_corpus_passes() {
    let dir = tempfile::tempdir().unwrap();
    bundle_corpus(dir.path()).unwrap();
    let records = run(&dir.path().join("scenarios.toml"), &opts(&dir.path().join("out"), 2)).unwrap();
    for r in &records {
        for a in &r.assertions {
            assert!(a.pass, "{} {}: {}", r.scenario, a.name, a.detail);
        }
    }
}

fn fhkit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fhkit")).args(args).output().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(fhkit(&["corpus", "--out-dir", d]).status.success());
    let out = format!("{d}/out");
    let product = format!("{d}/product.json");
    let split = format!("{d}/split.json");
    let v = fhkit(&["fh-check", "--phase", &product, "--grid", "128", "--out-dir", &out]);
    assert_eq!(v.status.code(), Some(2));
    let n = fhkit(&["fh-check", "--phase", &split, "--grid", "128", "--json", &format!("{out}/split.json")]);
    assert_eq!(n.status.code(), Some(0));
    assert!(Path::new(&format!("{out}/split.json")).exists());

    let good = format!("{d}/good.toml");
    std::fs::write(&good, "[[scenario]]\nid = \"p\"\noperation = \"fh-check\"\nphase = \"product.json\"\nparams = { grid = 128 }\nexpect = { verdict = \"VIOLATED\" }\n").unwrap();
    assert_eq!(fhkit(&["run", &good, "--out-dir", &out]).status.code(), Some(0));
    let bad = format!("{d}/bad.toml");
    std::fs::write(&bad, "[[scenario]]\nid = \"p\"\noperation = \"fh-check\"\nphase = \"product.json\"\nparams = { grid = 128 }\nexpect = { verdict = \"NO_WITNESS_FOUND\" }\n").unwrap();
    assert_eq!(fhkit(&["run", &bad, "--out-dir", &out]).status.code(), Some(1));

    let sw = fhkit(&["sw-sweep", "--degree", "2", "--trials", "50", "--seed", "9", "--out-dir", &out]);
    assert!(sw.status.success());
    let json: serde_json::Value = serde_json::from_slice(&sw.stdout).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert!(!fhkit(&["sw-sweep", "--degree", "2", "--trials", "50", "--out-dir", &out]).status.success());
}
