use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn privpost(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privpost"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

const DGAUSS_CONFIG: &str = r#"{
  "model": {"id": "dgauss-table", "n": 40, "sigma": 2.0},
  "sdp": {"table": [12, 9, 6, 13]},
  "niter": 300,
  "warmup": 100,
  "chains": 2,
  "seed": 7,
  "init_par": [0.25, 0.25, 0.25, 0.25],
  "output": {"dir": "out"}
}"#;

fn write_config(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn run_writes_every_file() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", DGAUSS_CONFIG);
    let out = privpost(&["run", "--config", "c.json"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("variable"));

    let dir = tmp.path().join("out");
    let draws = fs::read_to_string(dir.join("draws.csv")).unwrap();
    let lines: Vec<&str> = draws.lines().collect();
    assert_eq!(lines[0], "chain,iteration,pi_11,pi_10,pi_01,pi_00");
    assert_eq!(lines.len(), 1 + 2 * 200);
    assert!(lines[1].starts_with("1,101,"));
    assert!(lines[400].starts_with("2,300,"));
    assert!(!draws.contains('\r'));
    let value = lines[1].split(',').nth(2).unwrap();
    assert_eq!(value.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

    let acceptance = fs::read_to_string(dir.join("acceptance.csv")).unwrap();
    assert!(acceptance.starts_with("chain,iteration,mean_alpha\n1,1,"));
    assert_eq!(acceptance.lines().count(), 1 + 2 * 300);

    let summary = fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("variable,mean,median,sd,mad,q5,q95,rhat,ess_bulk,ess_tail\n"));
    assert_eq!(summary.lines().count(), 5);

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["warmup"], 100);
    assert_eq!(manifest["config"]["varnames"][0], "pi_11");
    assert_eq!(manifest["derived"]["sdp"], serde_json::json!([12.0, 9.0, 6.0, 13.0]));
}

#[test]
fn summarize_round_trip_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", DGAUSS_CONFIG);
    assert_eq!(code(&privpost(&["run", "--config", "c.json"], tmp.path())), 0);
    let out = privpost(&["summarize", "out/draws.csv", "--output", "again.csv"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        fs::read(tmp.path().join("again.csv")).unwrap(),
        fs::read(tmp.path().join("out/summary.csv")).unwrap()
    );
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", DGAUSS_CONFIG);
    let a = privpost(&["run", "--config", "c.json", "--threads", "1", "--output-dir", "a"], tmp.path());
    let b = privpost(&["run", "--config", "c.json", "--threads", "2", "--output-dir", "b"], tmp.path());
    assert_eq!((code(&a), code(&b)), (0, 0));
    for file in ["draws.csv", "acceptance.csv", "summary.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(file)).unwrap(),
            fs::read(tmp.path().join("b").join(file)).unwrap(),
            "{file}"
        );
    }
    let c = privpost(&["run", "--config", "c.json", "--seed", "8", "--output-dir", "c"], tmp.path());
    assert_eq!(code(&c), 0);
    assert_ne!(
        fs::read(tmp.path().join("a/draws.csv")).unwrap(),
        fs::read(tmp.path().join("c/draws.csv")).unwrap()
    );
}

#[test]
fn invalid_warmup_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", DGAUSS_CONFIG);
    let out = privpost(&["run", "--config", "c.json", "--warmup", "300"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("warmup"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn config_errors_name_the_field() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "typo.json", &DGAUSS_CONFIG.replace("\"sigma\"", "\"sigam\""));
    let out = privpost(&["run", "--config", "typo.json"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("model"), "{}", stderr(&out));

    write_config(tmp.path(), "neg.json", &DGAUSS_CONFIG.replace("2.0", "-2.0"));
    let out = privpost(&["run", "--config", "neg.json"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("model.sigma"), "{}", stderr(&out));

    write_config(tmp.path(), "shape.json", &DGAUSS_CONFIG.replace("\"table\": [12, 9, 6, 13]", "\"values\": [1, 2, 3]"));
    let out = privpost(&["run", "--config", "shape.json"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sdp"), "{}", stderr(&out));

    write_config(tmp.path(), "init.json", &DGAUSS_CONFIG.replace("[0.25, 0.25, 0.25, 0.25]", "[0.5, 0.5]"));
    let out = privpost(&["run", "--config", "init.json"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("init_par"), "{}", stderr(&out));

    let out = privpost(&["run", "--config", "missing.json"], tmp.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", DGAUSS_CONFIG);
    fs::write(tmp.path().join("out"), "not a directory").unwrap();
    let out = privpost(&["run", "--config", "c.json"], tmp.path());
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn summarize_reports_parse_errors_with_line() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("d.csv"), "chain,iteration,a\n1,1,0.5\n1,2,oops\n").unwrap();
    let out = privpost(&["summarize", "d.csv"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("d.csv:3"), "{}", stderr(&out));

    fs::write(tmp.path().join("h.csv"), "x,y\n1,2\n").unwrap();
    assert_eq!(code(&privpost(&["summarize", "h.csv"], tmp.path())), 2);
}

#[test]
fn constant_draws_have_zero_sd() {
    let tmp = TempDir::new().unwrap();
    let mut text = String::from("chain,iteration,a\n");
    for i in 1..=50 {
        text.push_str(&format!("1,{i},2.5\n2,{i},2.5\n"));
    }
    fs::write(tmp.path().join("d.csv"), text).unwrap();
    let out = privpost(&["summarize", "d.csv", "--output", "s.csv"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(tmp.path().join("s.csv")).unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(row[7], "NA");
}

#[test]
fn mech_pmf_and_sample() {
    let tmp = TempDir::new().unwrap();
    let out = privpost(&["mech", "pmf", "dgauss", "--sigma", "1"], tmp.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("x,pmf\n"));
    let p0: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("0,"))
        .expect("row x = 0")
        .parse()
        .unwrap();
    assert!((p0 - 0.39894).abs() < 1e-5);

    let out = privpost(&["mech", "sample", "dlaplace", "--t", "1", "--count", "0"], tmp.path());
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());

    let args = ["mech", "sample", "dgauss", "--sigma", "6.32", "--count", "100", "--seed", "4"];
    let a = privpost(&args, tmp.path());
    let b = privpost(&args, tmp.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 101);

    let out = privpost(&["mech", "pmf", "dgauss", "--sigma", "-1"], tmp.path());
    assert_eq!(code(&out), 2);
    let out = privpost(&["mech", "pmf", "laplace", "--scale", "1"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn example_config_round_trips_through_run() {
    let tmp = TempDir::new().unwrap();
    let out = privpost(&["run", "example", "rr-table", "--published-table", "--dump-config"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let config: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(config["sdp"]["table"], serde_json::json!([104, 120, 74, 102]));
    assert_eq!(config["model"]["keep_prob"], 0.75);
    fs::write(tmp.path().join("ex.json"), &out.stdout).unwrap();
    let out = privpost(
        &["run", "--config", "ex.json", "--niter", "40", "--warmup", "20", "--output-dir", "ex"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(tmp.path().join("ex/draws.csv").exists());

    let out = privpost(&["run", "example", "linreg", "--published-table"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn linreg_manifest_records_derived_scale() {
    let tmp = TempDir::new().unwrap();
    let out = privpost(
        &["run", "example", "linreg", "--niter", "60", "--warmup", "30", "--chains", "1", "--output-dir", "lr"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("lr/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["derived"]["laplace_scale"], 1.5);
    assert_eq!(manifest["derived"]["sensitivity"], 15.0);
    assert_eq!(manifest["derived"]["sdp_shape"], serde_json::json!([9, 1]));
}

#[test]
fn oracle_reports_exact_moments() {
    let tmp = TempDir::new().unwrap();
    // noiseless randomized response reduces to Dirichlet(3, 2, 2, 2)
    let out = privpost(&["oracle", "rr", "--table", "2,1,1,1", "--keep-prob", "1", "--grid", "80"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("variable,mean,sd\n"));
    let mean: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((mean - 3.0 / 9.0).abs() < 5e-3, "{mean}");

    let out = privpost(&["oracle", "dgauss", "--table", "1,1,1,1", "--sigma", "1", "--n", "20"], tmp.path());
    assert_eq!(code(&out), 2);
}
