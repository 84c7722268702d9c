use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use slider_core::raster::{composite_render, read_png, write_png, Raster};
use slider_core::svg::parse_slide_svg;

fn slider(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slider"))
        .args(args)
        .env_remove("SLIDER_BACKEND_NOPE_URL")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = slider(args);
    assert!(
        out.status.success(),
        "{args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn slide_svg(i: usize, bg: &str, img: &str) -> String {
    let x = 10 + 10 * i;
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="400" height="200">
  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="{bg}" />
  <g id="images">
    <image x="{x}.0%" y="40.0%" width="30.0%" height="50.0%" href="{img}" />
  </g>
  <g id="text">
    <foreignObject x="5.0%" y="5.0%" width="60.0%" height="10.0%" overflow="visible">
      <div xmlns="http://www.w3.org/1999/xhtml" style="font-family: Inter; font-size: 20px; letter-spacing: 0.0em; color: #102030; text-align: left;">
        <div>Slide number {i}</div>
      </div>
    </foreignObject>
  </g>
</svg>
"#
    )
}

fn assets(i: usize) -> (Raster, Raster) {
    let c = 40 * i as u8;
    let bg = Raster::filled(8, 8, [250, 240 - c, 230]);
    let mut img = Raster::filled(16, 16, [c, 90, 200 - c]);
    for k in 0..16 {
        img.put(k, k, [255, 255, 0]);
    }
    (bg, img)
}

/// `<dir>/in.png` rendered from `<dir>/in.svg`, which doubles as the mock's answer.
fn single_slide(dir: &Path) -> PathBuf {
    let svg = slide_svg(1, "background.png", "image_1.png");
    let doc = parse_slide_svg(&svg).unwrap();
    let (bg, img) = assets(1);
    let map = HashMap::from([("background.png".to_string(), bg), ("image_1.png".to_string(), img)]);
    let input = dir.join("in.png");
    write_png(&input, &composite_render(&doc, &map).unwrap()).unwrap();
    std::fs::write(dir.join("in.svg"), svg).unwrap();
    input
}

/// Raw exported slides `s{i}.svg` with their referenced images.
fn raw_export(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let (bg, img) = assets(i);
        let (bg_name, img_name) = (format!("s{i}_bg.png"), format!("s{i}_img.png"));
        write_png(dir.join(&bg_name), &bg).unwrap();
        write_png(dir.join(&img_name), &img).unwrap();
        std::fs::write(dir.join(format!("s{i}.svg")), slide_svg(i, &bg_name, &img_name)).unwrap();
    }
}

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("stderr has an error line");
    serde_json::from_str(last).expect("error line is JSON")
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(slider(&[]).status.code(), Some(2));
    assert_eq!(slider(&["derender", "--no-such-flag", "x.png"]).status.code(), Some(2));
    assert_eq!(slider(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(slider(&["arena", "serve"]).status.code(), Some(2), "missing --corpora");

    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let out = slider(&["derender", s(&input), "-o", s(&tmp.path().join("o")), "--start", "guess"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["error"]["kind"], "UsageError");
    let out = slider(&["derender", s(&input), "--start", "skeleton"]);
    assert_eq!(out.status.code(), Some(2), "missing -o");
}

#[test]
fn derender_writes_bundle_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        ok(&[
            "derender", "--backend", "mock", "--start", "skeleton", "--refine", "1", "--seed", "5",
            "--mock-jitter", "3", s(&input), "-o", s(&dir),
        ]);
        dir
    };
    let a = run("a");
    for f in ["slide.svg", "background.png", "image_1.png", "manifest.json"] {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    let doc = parse_slide_svg(&std::fs::read_to_string(a.join("slide.svg")).unwrap()).unwrap();
    assert_eq!(doc.images.len(), 1);
    assert_eq!(doc.texts.len(), 1);
    assert!(!doc.has_unknown());
    let bg = read_png(a.join("background.png")).unwrap();
    assert_eq!((bg.width(), bg.height()), (400, 200));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.to_string().matches("pass_index").count(), 2);

    let b = run("b");
    assert_eq!(tree_bytes(&a), tree_bytes(&b));
}

#[test]
fn config_file_merges_under_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"backend": "mock", "start": "skeleton", "refine": 2, "out": "{}"}}"#,
            s(&tmp.path().join("from_cfg"))
        ),
    )
    .unwrap();

    ok(&["derender", s(&input), "--config", s(&cfg)]);
    let m = std::fs::read_to_string(tmp.path().join("from_cfg/manifest.json")).unwrap();
    assert_eq!(m.matches("pass_index").count(), 3);

    let flag_out = tmp.path().join("from_flag");
    ok(&["derender", s(&input), "--config", s(&cfg), "--refine", "0", "-o", s(&flag_out)]);
    let m = std::fs::read_to_string(flag_out.join("manifest.json")).unwrap();
    assert_eq!(m.matches("pass_index").count(), 1);

    std::fs::write(&cfg, r#"{"bogus-key": 1}"#).unwrap();
    assert_eq!(slider(&["derender", s(&input), "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn http_backend_without_env_fails_with_json_error() {
    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let out = slider(&["derender", "--backend", "http:nope", s(&input), "-o", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_line(&out);
    assert_eq!(err["error"]["kind"], "BackendError");
    assert!(err["error"]["message"].as_str().unwrap().contains("SLIDER_BACKEND_NOPE_URL"));
}

#[test]
fn refine_from_prior() {
    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let out = tmp.path().join("r");
    ok(&["refine", s(&input), "--prior", s(&tmp.path().join("in.svg")), "-o", s(&out), "--refine", "2"]);
    let m = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert_eq!(m.matches("pass_index").count(), 3);
    assert!(out.join("image_1.png").is_file());
}

#[test]
fn dataset_eval_and_export_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw");
    raw_export(&raw, 5);
    let corpus = tmp.path().join("corpus");
    let summary = ok(&["dataset", "build", s(&raw), "-o", s(&corpus), "--train-frac", "0.6", "--seed", "3"]);
    let summary: serde_json::Value = serde_json::from_slice(&summary.stdout).unwrap();
    assert_eq!(summary["samples"], 5);
    assert_eq!(summary["splits"]["train"], 3);
    assert_eq!(summary["splits"]["test"], 2);

    let again = tmp.path().join("corpus2");
    ok(&["dataset", "build", s(&raw), "-o", s(&again), "--train-frac", "0.6", "--seed", "3", "--parallelism", "3"]);
    assert_eq!(tree_bytes(&corpus), tree_bytes(&again));

    let stats = ok(&["dataset", "stats", s(&corpus)]);
    assert!(!stats.stdout.is_empty());

    // Predictions from the oracle are the ground truth, so geometry and text score perfectly.
    let test_inputs: Vec<PathBuf> = std::fs::read_dir(corpus.join("test"))
        .unwrap()
        .map(|e| e.unwrap().path().join("slide.png"))
        .collect();
    let pred = tmp.path().join("pred");
    let mut args = vec!["derender", "--mock-manifest"];
    let manifest = corpus.join("oracle_manifest.json");
    args.push(s(&manifest));
    args.extend(["-o", s(&pred)]);
    args.extend(test_inputs.iter().map(|p| s(p)));
    ok(&args);

    let report = tmp.path().join("report");
    let gt = corpus.join("test");
    let pred_spec = format!("oracle={}", s(&pred));
    let out = ok(&["eval", "--gt", s(&gt), "--pred", &pred_spec, "-o", s(&report)]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,mIoU (%),OCR Accuracy (%),MSE"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "oracle");
    assert_eq!(row[1], "100.00");
    assert_eq!(row[2], "100.00");
    assert_eq!(std::fs::read_to_string(report.join("summary.csv")).unwrap(), csv);
    assert_eq!(std::fs::read_to_string(report.join("metrics.jsonl")).unwrap().lines().count(), 2);

    let export = tmp.path().join("train.jsonl");
    let out = ok(&["export-train", s(&corpus), "-o", s(&export), "--seed", "1"]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let text = std::fs::read_to_string(&export).unwrap();
    assert_eq!(text.lines().count() as u64, summary["records"].as_u64().unwrap());
    assert!(text.lines().count() >= 3);
    for line in text.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["prompt"].as_str().unwrap().contains("<image>"));
    }
    let export2 = tmp.path().join("train2.jsonl");
    ok(&["export-train", s(&corpus), "-o", s(&export2), "--seed", "1"]);
    assert_eq!(std::fs::read(&export).unwrap(), std::fs::read(&export2).unwrap());
}

#[test]
fn eval_reports_missing_prediction() {
    let tmp = tempfile::tempdir().unwrap();
    let raw = tmp.path().join("raw");
    raw_export(&raw, 2);
    let corpus = tmp.path().join("corpus");
    ok(&["dataset", "build", s(&raw), "-o", s(&corpus), "--train-frac", "0"]);
    let empty = tmp.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = slider(&["eval", "--gt", s(&corpus.join("test")), "--pred", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"]["kind"], "EvalError");
}

#[test]
fn derender_from_partial_detections() {
    let tmp = tempfile::tempdir().unwrap();
    let input = single_slide(tmp.path());
    let dets = tmp.path().join("dets.jsonl");
    std::fs::write(
        &dets,
        concat!(
            r#"{"image_path": "in.png", "boxes": [{"cls": "image", "x": 20.0, "y": 40.0, "w": 30.0, "h": 50.0, "conf": 0.9},"#,
            r#" {"cls": "text", "x": 5.0, "y": 5.0, "w": 60.0, "h": 10.0, "conf": 0.1}]}"#,
            "\n"
        ),
    )
    .unwrap();
    let start = format!("partial:{}", s(&dets));
    let out = tmp.path().join("p");
    ok(&["derender", s(&input), "--start", &start, "--conf", "0.5", "-o", s(&out)]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["run"]["passes"][0]["context_kind"], "partial");
    assert!(out.join("image_1.png").is_file());

    let other = tmp.path().join("other.png");
    std::fs::copy(&input, &other).unwrap();
    std::fs::copy(tmp.path().join("in.svg"), tmp.path().join("other.svg")).unwrap();
    let failed = slider(&["derender", s(&other), "--start", &start, "-o", s(&tmp.path().join("q"))]);
    assert_eq!(failed.status.code(), Some(1));
    assert_eq!(error_line(&failed)["error"]["kind"], "ContextError");
}
