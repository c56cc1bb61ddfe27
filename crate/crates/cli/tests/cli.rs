use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn stsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stsum"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn info_reports_fixture_values() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    fs::write(&a, [b"P5\n2 2\n255\n".as_slice(), &[0, 0, 0, 255]].concat()).unwrap();
    fs::write(
        &b,
        [b"P5\n2 2\n255\n".as_slice(), &[0, 0, 255, 255]].concat(),
    )
    .unwrap();
    let out = stsum(&[
        "info",
        "--pair",
        s(&a),
        s(&b),
        "--measure",
        "surprise",
        "--bins",
        "2",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["mutual_information"].as_f64().unwrap() - 0.3113).abs() < 1e-4);
    let per_bin: Vec<f64> = serde_json::from_value(v["per_bin"].clone()).unwrap();
    assert!((per_bin[0] - 0.4150).abs() < 1e-4 && (per_bin[1] - 0.2075).abs() < 1e-4);

    let out = stsum(&[
        "info",
        "--pair",
        s(&a),
        s(&b),
        "--measure",
        "pmi",
        "--bins",
        "2",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["pmi"][0][0].as_f64().unwrap() - 0.4150).abs() < 1e-4);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = stsum(&[
        "run",
        "--input",
        s(&empty),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(5));

    let out = stsum(&[
        "gen",
        "rolling-ball",
        "--out",
        s(&dir.path().join("b")),
        "--dx",
        "90",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = stsum(&[
        "gen",
        "multiblob",
        "--out",
        s(&dir.path().join("m")),
        "--schedule",
        "1-4@20,20,6;2-3@30,20,6",
    ]);
    assert_eq!(out.status.code(), Some(7));

    let missing = dir.path().join("nope");
    let out = stsum(&[
        "run",
        "--input",
        s(&missing),
        "--out",
        s(&dir.path().join("o2")),
    ]);
    assert_eq!(out.status.code(), Some(8));
}

#[test]
fn multiblob_schedule_truth() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("f");
    let out = stsum(&[
        "gen",
        "multiblob",
        "--out",
        s(&frames),
        "--schedule",
        "3-10@20,20,6; 6-8@60,40,5",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let truth: Value =
        serde_json::from_str(&fs::read_to_string(frames.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["trigger_indices"], serde_json::json!([3, 6, 9, 11]));
    assert_eq!(fs::read_dir(&frames).unwrap().count(), 13);

    let res = dir.path().join("r");
    assert!(stsum(&[
        "run",
        "--input",
        s(&frames),
        "--trigger",
        "count-change",
        "--out",
        s(&res)
    ])
    .status
    .success());
    let m: Value =
        serde_json::from_str(&fs::read_to_string(res.join("manifest.json")).unwrap()).unwrap();
    let kinds: Vec<&str> = m["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert_eq!(
        kinds,
        [
            "key",
            "fused",
            "key",
            "fused",
            "key",
            "fused",
            "key",
            "discarded",
            "key"
        ]
    );
    assert!(res.join("fused_000001_000002/labels.png").exists());
    assert!(res.join("key_000003/gray.f32").exists());
}

#[test]
fn raw_input_with_background_model() {
    let dir = tempfile::tempdir().unwrap();
    let frames = dir.path().join("raw");
    fs::create_dir(&frames).unwrap();
    fs::write(frames.join("meta.txt"), "width=8\nheight=4\ndtype=f32\n").unwrap();
    // static gradient background; a bright pixel appears at t=4 and leaves at t=7
    for t in 0..9 {
        let mut v: Vec<f32> = (0..32).map(|i| (i % 8) as f32 * 0.1).collect();
        if (4..7).contains(&t) {
            v[10 + t] += 5.0;
        }
        let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
        fs::write(frames.join(format!("t{t:03}.f32")), bytes).unwrap();
    }
    let res = dir.path().join("out");
    let out = stsum(&[
        "run",
        "--input",
        s(&frames),
        "--format",
        "raw-f32",
        "--trigger",
        "count-change",
        "--background-frames",
        "3",
        "--seg-threshold",
        "1",
        "--out",
        s(&res),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m: Value =
        serde_json::from_str(&fs::read_to_string(res.join("manifest.json")).unwrap()).unwrap();
    let keys: Vec<u64> = m["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["kind"] == "key")
        .map(|e| e["index"].as_u64().unwrap())
        .collect();
    assert_eq!(keys, [0, 4, 7]);
    assert_eq!(m["config"]["fusion"]["bin_count"], 128);
}
