use std::process::{Command, Output};

use serde_json::Value;

fn daniell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_daniell"))
        .args(args)
        .env_remove("DANIELL_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn rational(v: &Value) -> f64 {
    v[0].as_f64().unwrap() / v[1].as_f64().unwrap()
}

#[test]
fn integrate_identity_lies_in_bracket() {
    let out = daniell(&["integrate", "--function", "t", "--interval", "0", "1", "--depth", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let value = rational(&v["result"]["value"]);
    assert!((value - 0.5).abs() <= 1.0 / 256.0, "{value}");
    assert_eq!(v["config"]["command"]["integrate"]["depth"], 8);
}

#[test]
fn decompose_two_point_example() {
    let v = json(&daniell(&["decompose", "--weights", "2,-1"]));
    assert_eq!(v["result"]["Splus"], serde_json::json!([2, 1]));
    assert_eq!(v["result"]["Sminus"], serde_json::json!([1, 1]));
    assert_eq!(v["result"]["abs"], serde_json::json!([3, 1]));
    assert_eq!(v["pass"], true);
}

#[test]
fn lebesgue_bracket_contains_length() {
    let v = json(&daniell(&["lebesgue", "--interval", "-1/2", "3", "--depth", "20"]));
    assert_eq!(v["result"]["contains_length"], true);
    assert_eq!(v["result"]["ramp_integral"], serde_json::json!([273, 80]));
}

#[test]
fn verify_all_quick_succeeds() {
    let out = daniell(&["verify-all", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["result"]["failed"], 0);
}

#[test]
fn stochastic_output_is_byte_identical() {
    let args = ["dirichlet", "--g", "arc:0:pi", "--x", "0.2,0.1", "--solver", "wos", "--walks", "20000", "--seed", "7"];
    let (a, b) = (daniell(&args), daniell(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let cyl = r#"{"times":["1/2",1],"sets":[[0,"+inf"],[0,"+inf"]]}"#;
    let args = ["wiener", "--cylinder", cyl, "--method", "mc", "--paths", "50000", "--seed", "3"];
    assert_eq!(daniell(&args).stdout, daniell(&args).stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_daniell"))
        .args(["decompose", "--weights", "1"])
        .env("DANIELL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["seed"], 99);
}

#[test]
fn output_file_and_csv() {
    let dir = std::env::temp_dir().join(format!("daniell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let out = daniell(&["decompose", "--weights", "2,-1", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("Splus,2/1"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes_are_distinct() {
    assert_eq!(daniell(&["integrate", "--bogus"]).status.code(), Some(2));
    assert_eq!(daniell(&["rings", "--a", "{not json"]).status.code(), Some(3));
    let unreachable = daniell(&["dirichlet", "--g", "arc:0:pi", "--x", "0,0", "--cells", "16", "--depth", "2", "--tol", "0.001"]);
    assert_eq!(unreachable.status.code(), Some(4));
    assert_eq!(daniell(&["dirichlet", "--g", "cos", "--x", "2,0"]).status.code(), Some(5));
}

#[test]
fn rings_additivity_on_a_partition() {
    let a = r#"{"universe":{"finite":["a","b","c"]},"points":["a","b","c"]}"#;
    let parts = r#"[{"universe":{"finite":["a","b","c"]},"points":["a"]},{"universe":{"finite":["a","b","c"]},"points":["b","c"]}]"#;
    let v = json(&daniell(&["rings", "--a", a, "--weights", "1,inf,1/2", "--partition", parts]));
    assert_eq!(v["result"]["additivity"]["pass"], true);
    assert_eq!(v["pass"], true);
}
