use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn spec(name: &str) -> String {
    root().join("specs").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tileforge"))
        .args(args)
        .env_remove("TILEFORGE_MAX_CELLS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_schema(name: &str, value: &Value) {
    let path = root().join("docs/schemas").join(format!("{name}.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{value:#}");
}

#[test]
fn reports_match_their_schemas() {
    let tmp = tempfile::tempdir().unwrap();
    let ppm = tmp.path().join("a.ppm");
    let ppm = ppm.to_str().unwrap();
    let cases: Vec<(&str, Vec<String>, i32)> = vec![
        ("tile_check", vec!["tile".into(), "check".into(), spec("dragon.json")], 0),
        ("tile_check", vec!["tile".into(), "check".into(), spec("stretched.json")], 1),
        ("tile_measure", vec!["tile".into(), "measure".into(), spec("rectangle.json")], 0),
        (
            "tile_render",
            vec!["tile".into(), "render".into(), spec("rectangle.json"), "--out".into(), ppm.into(), "--tiling".into(), "2".into()],
            0,
        ),
        ("box_build", vec!["box".into(), "build".into(), "-p".into(), "1,1,2".into(), "--sign".into(), "+".into()], 0),
        ("box_digits", vec!["box".into(), "digits".into(), "-p".into(), "2,2".into(), "--sign".into(), "-".into()], 0),
        ("box_detect", vec!["box".into(), "detect".into(), spec("rectangle.json")], 0),
        ("box_detect", vec!["box".into(), "detect".into(), spec("dragon.json")], 1),
        ("haar_build", vec!["haar".into(), "build".into(), spec("box_322.json")], 0),
        ("haar_build", vec!["haar".into(), "build".into(), spec("dragon.json")], 0),
        ("haar_gram", vec!["haar".into(), "gram".into(), spec("classic_haar.json")], 0),
        ("haar_gram", vec!["haar".into(), "gram".into(), spec("dragon.json"), "--depth".into(), "12".into()], 0),
        ("oned_oracle", vec!["oned".into(), "oracle".into(), "0,3,6,18,21,24".into()], 0),
        ("oned_oracle", vec!["oned".into(), "oracle".into(), "0,2,3".into()], 1),
        ("oned_classify", vec!["oned".into(), "classify".into(), spec("oned_example.json")], 0),
        ("oned_classify", vec!["oned".into(), "classify".into(), "0,1,3,4,6".into()], 1),
        ("oned_enumerate", vec!["oned".into(), "enumerate".into(), "12".into()], 0),
        ("oned_lset", vec!["oned".into(), "lset".into(), "0,1,2,9,10,11".into(), "-l".into(), "3".into()], 0),
        ("oned_lset", vec!["oned".into(), "lset".into(), "0,1,3".into(), "-l".into(), "2".into()], 1),
        ("problem_spec", vec!["product".into(), spec("classic_haar.json"), spec("dragon.json")], 0),
        ("problem_spec", vec!["product".into(), spec("classic_haar.json"), spec("twin_dragon_real.json")], 0),
    ];
    for (schema, args, code) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_schema(schema, &json(&out));
    }
}

#[test]
fn shipped_specs_match_the_schema() {
    for entry in std::fs::read_dir(root().join("specs")).unwrap() {
        let path = entry.unwrap().path();
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_schema("problem_spec", &value);
    }
    let path = root().join("docs/schemas/problem_spec.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for bad in [
        serde_json::json!({"kind": "oned"}),
        serde_json::json!({"kind": "oned", "set": [0, 1], "p": [2]}),
        serde_json::json!({"kind": "attractor", "matrix": [[2]]}),
        serde_json::json!({"kind": "attractor", "matrix": [[2]], "digits": [[0]], "shifts": [[0.0]]}),
        serde_json::json!({"kind": "boxform", "p": [2], "sign": 0}),
    ] {
        assert!(!validator.is_valid(&bad), "{bad}");
    }
}

#[test]
fn outputs_do_not_depend_on_threads_or_repetition() {
    let tmp = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut images = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let img = tmp.path().join(format!("{i}.ppm"));
        let img_s = img.to_str().unwrap();
        let r = run(&["--threads", threads, "tile", "render", &spec("dragon.json"), "--depth", "14", "--resolution", "96", "--out", img_s]);
        assert!(r.status.success());
        let c = run(&["--threads", threads, "tile", "check", &spec("dragon.json")]);
        let g = run(&["--threads", threads, "haar", "gram", &spec("dragon.json"), "--depth", "12"]);
        let m = run(&["--threads", threads, "tile", "measure", &spec("rectangle.json")]);
        reports.push([r.stdout, c.stdout, g.stdout, m.stdout]);
        images.push(std::fs::read(&img).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
    assert!(images.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn input_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    let cases = [
        r#"{"kind":"oned","#,
        r#"{"kind":"oned"}"#,
        r#"{"kind":"oned","set":[0,3],"matrix":[[2]]}"#,
        r#"{"kind":"attractor","matrix":[[2]],"digits":[[0],[1]],"extra":0}"#,
        r#"{"kind":"attractor","matrix":[[1]],"digits":[[0],[1]]}"#,
        r#"{"kind":"attractor","matrix":[[2]],"digits":[[0],[2]]}"#,
    ];
    for text in cases {
        std::fs::write(&bad, text).unwrap();
        let out = run(&["tile", "check", bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_schema("error", &err);
    }
    assert_eq!(run(&["oned", "classify", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["box", "build", "-p", "1,0", "--sign", "+"]).status.code(), Some(2));
    assert_eq!(run(&["tile", "check"]).status.code(), Some(2));
    let out = run(&["tile", "render", &spec("dragon.json"), "--out", "/nonexistent/dir/x.ppm"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resource_cap_exits_with_code_three() {
    let out = Command::new(env!("CARGO_BIN_EXE_tileforge"))
        .args(["tile", "check", &spec("dragon.json")])
        .env("TILEFORGE_MAX_CELLS", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "resource_cap");
}

#[test]
fn paper_cli_examples() {
    let out = json(&run(&["box", "build", "-p", "1,1,2", "--sign", "+"]));
    assert_eq!(out["matrix"], serde_json::json!([[0, 1, 0], [0, 0, 1], [2, 0, 0]]));
    assert_eq!(out["digit_count"], 2);
    let out = json(&run(&["oned", "classify", "0,3,6,18,21,24"]));
    assert_eq!(out["progressions"], serde_json::json!([{"a": 3, "d": 3}, {"a": 18, "d": 2}]));
    let out = json(&run(&["oned", "enumerate", "6"]));
    assert_eq!(out["count"], 6);
    let out = json(&run(&["haar", "gram", &spec("box_322.json")]));
    assert_eq!(out["method"], "exact");
    assert_eq!(out["max_offdiag_deviation"], 0.0);
}

#[test]
fn product_specs_are_reproducible() {
    for (a, b, shipped) in [
        ("oned_x.json", "oned_y.json", "twodim.json"),
        ("oned_example.json", "oned_example.json", "twodim2.json"),
    ] {
        let out = run(&["product", &spec(a), &spec(b)]);
        assert!(out.status.success());
        let fresh: Value = json(&out);
        let stored: Value = serde_json::from_str(&std::fs::read_to_string(spec(shipped)).unwrap()).unwrap();
        assert_eq!(fresh, stored, "{shipped} is stale");
    }
}
