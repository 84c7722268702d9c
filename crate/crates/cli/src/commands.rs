use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use slider_arena::{serve_blocking, Arena, ServeOptions};
use slider_core::context::{
    export_training_variants, parse_detections_jsonl, records_jsonl, ContextKind, DetectionSet, PartialOptions,
    TrainingSample, DEFAULT_CONFIDENCE_THRESHOLD,
};
use slider_core::dataset::{build_corpus, corpus_stats, CorpusOptions, MAX_IMAGES, MAX_TEXTS};
use slider_core::engine::{
    derender_pipeline, par_map, refine as refine_pass, Backend, DerenderResult, GenerationParams, HttpBackend,
    MockOracle, Perturbation, PipelineOptions, PipelineRun, RetryPolicy, Retrying, StartContext, DEFAULT_MAX_TOKENS,
};
use slider_core::metrics::{evaluate_sample, records_jsonl as metric_jsonl, summarize, summary_csv, ExternalScorer};
use slider_core::postprocess::{extract_assets, SVG_FILE};
use slider_core::raster::{
    composite_render, read_png, resize_max_side, write_png, ExternalRenderer, Raster, DEFAULT_INPAINT_RADIUS,
    DEFAULT_MAX_SIDE,
};
use slider_core::svg::{parse_slide_svg, SlideDoc};

use crate::config::{self, pick, FileConfig};
use crate::{
    ArenaServeArgs, DatasetBuildArgs, DatasetStatsArgs, DerenderArgs, EngineArgs, EvalArgs, ExportArgs, Failure,
    RefineArgs,
};

type CmdResult = Result<Value, Failure>;

fn fail(kind: &'static str) -> impl Fn(&dyn std::fmt::Display) -> Failure {
    move |e| Failure::module(kind, e)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::module("IoError", format!("{}: {e}", path.display()))
}

fn positive(name: &str, v: usize) -> Result<usize, Failure> {
    if v == 0 {
        return Err(Failure::usage(format!("--{name} must be at least 1")));
    }
    Ok(v)
}

fn required<T>(name: &str, v: Option<T>) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::usage(format!("--{name} is required")))
}

/// Engine settings after merging flags over the config file.
struct Engine {
    backend: String,
    max_side: u32,
    inpaint_radius: u32,
    seed: u64,
    parallelism: usize,
    params: GenerationParams,
    mock_manifest: Option<PathBuf>,
    mock_jitter: f64,
}

impl Engine {
    fn resolve(a: &EngineArgs, cfg: &FileConfig) -> Result<Self, Failure> {
        let defaults = GenerationParams::default();
        Ok(Engine {
            backend: pick(a.backend.clone(), cfg.backend.clone(), "mock".into()),
            max_side: pick(a.max_side, cfg.max_side, DEFAULT_MAX_SIDE),
            inpaint_radius: pick(a.inpaint_radius, cfg.inpaint_radius, DEFAULT_INPAINT_RADIUS),
            seed: pick(a.seed, cfg.seed, 0),
            parallelism: positive("parallelism", pick(a.parallelism, cfg.parallelism, 1))?,
            params: GenerationParams {
                max_tokens: pick(a.max_tokens, cfg.max_tokens, DEFAULT_MAX_TOKENS),
                temperature: pick(a.temperature, cfg.temperature, defaults.temperature),
            },
            mock_manifest: a.mock_manifest.clone().or(cfg.mock_manifest.clone()),
            mock_jitter: pick(a.mock_jitter, cfg.mock_jitter, 0.0),
        })
    }

    fn pipeline(&self, refine_steps: usize) -> PipelineOptions {
        PipelineOptions {
            refine_steps,
            max_side: self.max_side,
            params: self.params,
        }
    }

    /// `mock` answers from the manifest, else from `fallback` pairs (already
    /// at model input size); `http:<name>` reads credentials from the
    /// environment and retries transient failures.
    fn backend(&self, fallback: impl FnOnce() -> Result<Vec<(Raster, SlideDoc)>, Failure>) -> Result<Box<dyn Backend>, Failure> {
        if self.backend == "mock" {
            let oracle = match &self.mock_manifest {
                Some(path) => MockOracle::from_manifest(path, self.max_side).map_err(|e| fail("BackendError")(&e))?,
                None => MockOracle::new(fallback()?),
            };
            let oracle = if self.mock_jitter > 0.0 {
                oracle.with_perturbation(Perturbation {
                    max_percent: self.mock_jitter,
                    seed: self.seed,
                })
            } else {
                oracle
            };
            return Ok(Box::new(oracle));
        }
        if let Some(name) = self.backend.strip_prefix("http:").filter(|n| !n.is_empty()) {
            let http = HttpBackend::from_env(name).map_err(|e| fail("BackendError")(&e))?;
            return Ok(Box::new(Retrying::new(http, RetryPolicy::default())));
        }
        Err(Failure::usage(format!("--backend must be mock or http:<name>, got {:?}", self.backend)))
    }
}

fn read_doc(path: &Path) -> Result<SlideDoc, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_slide_svg(&text).map_err(|e| Failure::module("SvgError", format!("{}: {e}", path.display())))
}

fn read_raster(path: &Path) -> Result<Raster, Failure> {
    read_png(path).map_err(|e| Failure::module("RasterError", format!("{}: {e}", path.display())))
}

/// Mock ground truth from `<input>.svg` next to each input image.
fn sidecar_pairs(inputs: &[PathBuf], max_side: u32) -> Result<Vec<(Raster, SlideDoc)>, Failure> {
    inputs
        .iter()
        .map(|input| {
            let svg = input.with_extension("svg");
            if !svg.is_file() {
                return Err(Failure::module(
                    "BackendError",
                    format!("mock backend needs --mock-manifest or a sidecar {}", svg.display()),
                ));
            }
            Ok((resize_max_side(&read_raster(input)?, max_side), read_doc(&svg)?))
        })
        .collect()
}

fn run_meta(input: &Path, backend: &str, run: &PipelineRun, start: &str) -> Value {
    json!({
        "input": input.to_string_lossy(),
        "backend": backend,
        "start": start,
        "refine_steps": run.passes.len() - 1,
        "passes": run.passes.iter().map(|p| json!({
            "pass_index": p.pass_index,
            "context_kind": p.context_kind,
            "repairs_applied": p.repairs_applied,
        })).collect::<Vec<_>>(),
    })
}

/// Per-input output directory names: file stems, or parent directory names
/// when stems collide (`<corpus>/test/<id>/slide.png`).
fn output_names(inputs: &[PathBuf]) -> Result<Vec<String>, Failure> {
    let name = |p: Option<&std::ffi::OsStr>| p.unwrap_or_default().to_string_lossy().into_owned();
    let unique = |v: &[String]| v.iter().collect::<std::collections::BTreeSet<_>>().len() == v.len();
    let stems: Vec<String> = inputs.iter().map(|p| name(p.file_stem())).collect();
    if unique(&stems) {
        return Ok(stems);
    }
    let parents: Vec<String> = inputs
        .iter()
        .map(|p| name(p.parent().and_then(|d| d.file_name())))
        .collect();
    if unique(&parents) && parents.iter().all(|p| !p.is_empty()) {
        return Ok(parents);
    }
    Err(Failure::usage("inputs share file stems and parent directory names; derender them separately"))
}

fn lookup_detections<'a>(dets: &'a BTreeMap<String, DetectionSet>, input: &Path) -> Option<&'a DetectionSet> {
    let full = input.to_string_lossy();
    let name = input.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
    let stem = input.file_stem().map(|n| n.to_string_lossy()).unwrap_or_default();
    dets.get(full.as_ref())
        .or_else(|| dets.get(name.as_ref()))
        .or_else(|| dets.get(stem.as_ref()))
}

fn read_detections(path: &Path) -> Result<BTreeMap<String, DetectionSet>, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_detections_jsonl(&text).map_err(|e| Failure::module("ContextError", format!("{}: {e}", path.display())))
}

pub fn derender(a: &DerenderArgs) -> CmdResult {
    let cfg = config::load(a.engine.config.as_deref())?;
    let engine = Engine::resolve(&a.engine, &cfg)?;
    let out = required("out", a.out.clone().or(cfg.out.clone()))?;
    let start_spec = pick(a.start.clone(), cfg.start.clone(), "skeleton".into());
    let refine_steps = pick(a.refine, cfg.refine, 0);
    let conf = pick(a.conf, cfg.conf, DEFAULT_CONFIDENCE_THRESHOLD);
    let n_images = pick(a.n_images, cfg.n_images, 1);
    let n_texts = pick(a.n_texts, cfg.n_texts, 1);
    if !(0.0..=1.0).contains(&conf) {
        return Err(Failure::usage("--conf must be within [0, 1]"));
    }

    let detections = if start_spec == "skeleton" {
        None
    } else if let Some(path) = start_spec.strip_prefix("partial:").filter(|p| !p.is_empty()) {
        Some(read_detections(Path::new(path))?)
    } else {
        return Err(Failure::usage(format!("--start must be skeleton or partial:<file>, got {start_spec:?}")));
    };

    let backend = engine.backend(|| sidecar_pairs(&a.inputs, engine.max_side))?;
    let opts = engine.pipeline(refine_steps);
    let single = a.inputs.len() == 1;
    let names = output_names(&a.inputs)?;
    let jobs: Vec<(&PathBuf, &String)> = a.inputs.iter().zip(&names).collect();

    let results = par_map(&jobs, engine.parallelism, |&(input, name)| -> Result<Value, Failure> {
        let raster = read_raster(input)?;
        let start = match &detections {
            None => StartContext::Skeleton { n_images, n_texts },
            Some(all) => StartContext::Partial {
                detections: lookup_detections(all, input).cloned().ok_or_else(|| {
                    Failure::module("ContextError", format!("no detections for {}", input.display()))
                })?,
                options: PartialOptions {
                    confidence_threshold: conf,
                    clamp: false,
                },
            },
        };
        let run = derender_pipeline(&raster, &start, backend.as_ref(), &opts).map_err(|e| {
            Failure::module("EngineError", format!("{}: {e}", input.display()))
        })?;
        let dir = if single {
            out.clone()
        } else {
            out.join(name)
        };
        let meta = run_meta(input, &engine.backend, &run, &start_spec);
        let bundle = extract_assets(&run.input, &run.final_result().doc, &dir, engine.inpaint_radius, &meta)
            .map_err(|e| Failure::module("PostprocessError", format!("{}: {e}", input.display())))?;
        tracing::info!(input = %input.display(), out = %dir.display(), passes = run.passes.len(), "derendered");
        Ok(json!({
            "input": input.to_string_lossy(),
            "out_dir": dir.to_string_lossy(),
            "svg": dir.join(SVG_FILE).to_string_lossy(),
            "assets": bundle.asset_files,
        }))
    });
    let outputs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "outputs": outputs }))
}

pub fn refine(a: &RefineArgs) -> CmdResult {
    let cfg = config::load(a.engine.config.as_deref())?;
    let engine = Engine::resolve(&a.engine, &cfg)?;
    let out = required("out", a.out.clone().or(cfg.out.clone()))?;
    let prior_path = required("prior", a.prior.clone().or(cfg.prior.clone()))?;
    let steps = positive("refine", pick(a.refine, cfg.refine, 1))?;

    let raster = resize_max_side(&read_raster(&a.input)?, engine.max_side);
    let prior_doc = read_doc(&prior_path)?;
    let backend = engine.backend(|| sidecar_pairs(std::slice::from_ref(&a.input), engine.max_side))?;
    let mut passes = vec![DerenderResult {
        doc: prior_doc,
        raw_response: String::new(),
        repairs_applied: Vec::new(),
        pass_index: 0,
        context_kind: ContextKind::Initial,
    }];
    for _ in 0..steps {
        let next = refine_pass(&raster, passes.last().expect("non-empty"), backend.as_ref(), &engine.params)
            .map_err(|e| Failure::module("EngineError", e))?;
        passes.push(next);
    }
    let run = PipelineRun { input: raster, passes };
    let meta = run_meta(&a.input, &engine.backend, &run, &format!("prior:{}", prior_path.display()));
    let bundle = extract_assets(&run.input, &run.final_result().doc, &out, engine.inpaint_radius, &meta)
        .map_err(|e| Failure::module("PostprocessError", e))?;
    Ok(json!({
        "out_dir": out.to_string_lossy(),
        "svg": out.join(SVG_FILE).to_string_lossy(),
        "assets": bundle.asset_files,
        "refine_steps": steps,
    }))
}

/// Every directory under `root` holding `slide.svg`, keyed by directory name.
fn find_samples(root: &Path) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let mut found = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        let entries = std::fs::read_dir(&dir).map_err(io_err(&dir))?;
        for entry in entries {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.is_dir() {
                stack.push(path);
            }
        }
        if dir.join(SVG_FILE).is_file() && dir != root {
            let id = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
            if let Some(prev) = found.insert(id.clone(), dir.clone()) {
                return Err(Failure::module(
                    "EvalError",
                    format!("sample id {id:?} appears twice: {} and {}", prev.display(), dir.display()),
                ));
            }
        }
    }
    if root.join(SVG_FILE).is_file() {
        let id = root.file_name().unwrap_or_default().to_string_lossy().into_owned();
        found.entry(id).or_insert_with(|| root.to_path_buf());
    }
    Ok(found)
}

/// Renders a prediction bundle at the ground-truth canvas size.
fn render_prediction(dir: &Path, doc: &SlideDoc, width: u32, height: u32) -> Result<Raster, Failure> {
    let mut doc = doc.clone();
    doc.width = width;
    doc.height = height;
    let mut assets = HashMap::new();
    for href in std::iter::once(&doc.background.href).chain(doc.images.iter().map(|i| &i.href)) {
        assets.insert(href.clone(), read_raster(&dir.join(href))?);
    }
    composite_render(&doc, &assets).map_err(|e| Failure::module("RasterError", format!("{}: {e}", dir.display())))
}

pub fn eval(a: &EvalArgs) -> CmdResult {
    let cfg = config::load(a.config.as_deref())?;
    let gt_root = required("gt", a.gt.clone().or(cfg.gt.clone()))?;
    let preds = if a.pred.is_empty() { cfg.pred.clone().unwrap_or_default() } else { a.pred.clone() };
    if preds.is_empty() {
        return Err(Failure::usage("--pred is required"));
    }
    let out = a.out.clone().or(cfg.out.clone());
    let scorer = a.scorer.clone().or(cfg.scorer.clone()).map(ExternalScorer::new);
    if scorer.is_some() && out.is_none() {
        return Err(Failure::usage("--scorer needs -o/--out for prediction renders"));
    }
    let parallelism = positive("parallelism", pick(a.parallelism, cfg.parallelism, 1))?;

    let methods: Vec<(String, PathBuf)> = preds
        .iter()
        .map(|spec| match spec.split_once('=') {
            Some((name, dir)) => (name.to_string(), PathBuf::from(dir)),
            None => {
                let dir = PathBuf::from(spec);
                let name = dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
                (name, dir)
            }
        })
        .collect();
    let gt = find_samples(&gt_root)?;
    if gt.is_empty() {
        return Err(Failure::module("EvalError", format!("no samples under {}", gt_root.display())));
    }
    let mut jobs = Vec::new();
    for (name, dir) in &methods {
        let found = find_samples(dir)?;
        for (id, gt_dir) in &gt {
            let pred_dir = found
                .get(id)
                .ok_or_else(|| Failure::module("EvalError", format!("{name}: no prediction for sample {id:?}")))?;
            jobs.push((id.clone(), name.clone(), gt_dir.clone(), pred_dir.clone()));
        }
    }

    let results = par_map(&jobs, parallelism, |(id, method, gt_dir, pred_dir)| {
        let gt_doc = read_doc(&gt_dir.join(SVG_FILE))?;
        let gt_raster = read_raster(&gt_dir.join("slide.png"))?;
        let pred_doc = read_doc(&pred_dir.join(SVG_FILE))?;
        let pred_raster = render_prediction(pred_dir, &pred_doc, gt_raster.width(), gt_raster.height())?;
        let mut record = evaluate_sample(&gt_doc, &gt_raster, &pred_doc, &pred_raster)
            .map_err(|e| Failure::module("MetricError", format!("{id}: {e}")))?;
        record.sample_id = id.clone();
        record.method = method.clone();
        if let (Some(scorer), Some(out)) = (&scorer, &out) {
            let render = out.join("renders").join(method).join(format!("{id}.png"));
            std::fs::create_dir_all(render.parent().expect("has parent")).map_err(io_err(&render))?;
            write_png(&render, &pred_raster).map_err(|e| Failure::module("RasterError", e))?;
            scorer
                .merge_into(&mut record, &gt_dir.join("slide.png"), &render)
                .map_err(|e| Failure::module("MetricError", format!("{id}: {e}")))?;
        }
        Ok::<_, Failure>(record)
    });
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let rows = summarize(&records);
    let csv = summary_csv(&rows);
    print!("{csv}");
    if let Some(out) = &out {
        std::fs::create_dir_all(out).map_err(io_err(out))?;
        std::fs::write(out.join("metrics.jsonl"), metric_jsonl(&records)).map_err(io_err(out))?;
        std::fs::write(out.join("summary.csv"), &csv).map_err(io_err(out))?;
    }
    Ok(Value::Null)
}

pub fn dataset_build(a: &DatasetBuildArgs) -> CmdResult {
    let cfg = config::load(a.config.as_deref())?;
    let out = required("out", a.out.clone().or(cfg.out.clone()))?;
    let train_fraction = pick(a.train_frac, cfg.train_frac, 0.9);
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Failure::usage("--train-frac must be within [0, 1]"));
    }
    let opts = CorpusOptions {
        train_fraction,
        seed: pick(a.seed, cfg.seed, 0),
        max_images: pick(a.max_images, cfg.max_images, MAX_IMAGES),
        max_texts: pick(a.max_texts, cfg.max_texts, MAX_TEXTS),
        max_side: pick(a.max_side, cfg.max_side, DEFAULT_MAX_SIDE),
        inpaint_radius: pick(a.inpaint_radius, cfg.inpaint_radius, DEFAULT_INPAINT_RADIUS),
        detections: a.detections.clone().or(cfg.detections.clone()),
        renderer: a.renderer.clone().or(cfg.renderer.clone()).map(ExternalRenderer::new),
        parallelism: positive("parallelism", pick(a.parallelism, cfg.parallelism, 1))?,
    };
    let stats = build_corpus(&a.input, &out, &opts).map_err(|e| Failure::module("DatasetError", e))?;
    Ok(json!({
        "out_dir": out.to_string_lossy(),
        "samples": stats.samples,
        "splits": stats.splits,
        "filtered_out": stats.filtered_out,
        "skipped": stats.skipped.len(),
    }))
}

pub fn dataset_stats(a: &DatasetStatsArgs) -> CmdResult {
    let cfg = config::load(a.config.as_deref())?;
    let stats = corpus_stats(&a.corpus).map_err(|e| Failure::module("DatasetError", e))?;
    match a.out.clone().or(cfg.out.clone()) {
        Some(out) => {
            std::fs::create_dir_all(&out).map_err(io_err(&out))?;
            stats.write(&out).map_err(|e| Failure::module("DatasetError", e))?;
            Ok(json!({ "samples": stats.samples, "splits": stats.splits }))
        }
        None => {
            print!("{}", stats.to_csv());
            Ok(Value::Null)
        }
    }
}

pub fn export_train(a: &ExportArgs) -> CmdResult {
    let cfg = config::load(a.engine.config.as_deref())?;
    let engine = Engine::resolve(&a.engine, &cfg)?;
    let split = pick(a.split.clone(), cfg.split.clone(), "train".into());
    let conf = pick(a.conf, cfg.conf, DEFAULT_CONFIDENCE_THRESHOLD);
    let detections = match a.detections.clone().or(cfg.detections.clone()) {
        Some(p) => Some(read_detections(&p)?),
        None => None,
    };

    let split_dir = a.corpus.join(&split);
    let mut ids: Vec<String> = std::fs::read_dir(&split_dir)
        .map_err(io_err(&split_dir))?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().join(SVG_FILE).is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    ids.sort();
    let corpus: Vec<TrainingSample> = ids
        .iter()
        .map(|id| {
            Ok(TrainingSample {
                id: id.clone(),
                image_path: format!("{split}/{id}/slide.png"),
                doc: read_doc(&split_dir.join(id).join(SVG_FILE))?,
            })
        })
        .collect::<Result<_, Failure>>()?;
    if corpus.is_empty() {
        return Err(Failure::module("ExportError", format!("no samples in {}", split_dir.display())));
    }

    let det_for = |s: &TrainingSample| -> Option<DetectionSet> {
        match &detections {
            Some(all) => all.get(&s.image_path).or_else(|| all.get(&s.id)).cloned(),
            None => Some(DetectionSet::from_doc(&s.doc)),
        }
    };
    let partial_opts = PartialOptions {
        confidence_threshold: conf,
        clamp: false,
    };

    let manifest = engine
        .mock_manifest
        .clone()
        .unwrap_or_else(|| a.corpus.join("oracle_manifest.json"));
    let engine = Engine {
        mock_manifest: Some(manifest),
        ..engine
    };
    let backend = engine.backend(|| Ok(Vec::new()))?;
    let opts = engine.pipeline(0);
    let prior = |s: &TrainingSample, kind: ContextKind| -> Option<SlideDoc> {
        let raster = read_png(a.corpus.join(&s.image_path)).ok()?;
        let start = match kind {
            ContextKind::Partial => StartContext::Partial {
                detections: det_for(s)?,
                options: partial_opts,
            },
            _ => StartContext::Skeleton {
                n_images: s.doc.images.len(),
                n_texts: s.doc.texts.len(),
            },
        };
        match derender_pipeline(&raster, &start, backend.as_ref(), &opts) {
            Ok(run) => Some(run.final_result().doc.clone()),
            Err(e) => {
                tracing::warn!(sample = s.id.as_str(), error = %e, "no prior prediction");
                None
            }
        }
    };
    let records = export_training_variants(
        &corpus,
        engine.seed,
        &partial_opts,
        &|s| {
            det_for(s).ok_or_else(|| slider_core::context::ContextError::InvalidDetection(format!("no detections for {}", s.id)))
        },
        &prior,
    )
    .map_err(|e| Failure::module("ExportError", e))?;

    let jsonl = records_jsonl(&records);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(r.context_kind.as_str()).or_default() += 1;
    }
    match a.out.clone().or(cfg.out.clone()) {
        Some(out) => {
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            std::fs::write(&out, jsonl).map_err(io_err(&out))?;
            Ok(json!({ "out": out.to_string_lossy(), "records": records.len(), "by_kind": counts }))
        }
        None => {
            print!("{jsonl}");
            Ok(Value::Null)
        }
    }
}

pub fn arena_serve(a: &ArenaServeArgs) -> CmdResult {
    let cfg = config::load(a.config.as_deref())?;
    let corpora = required("corpora", a.corpora.clone().or(cfg.corpora.clone()))?;
    let events = pick(a.events.clone(), cfg.events.clone(), corpora.join("events.jsonl"));
    let addr_text = pick(a.addr.clone(), cfg.addr.clone(), "127.0.0.1:8080".into());
    let addr: SocketAddr = addr_text
        .parse()
        .map_err(|e| Failure::usage(format!("--addr {addr_text:?}: {e}")))?;
    let arena = Arena::open(&corpora, Some(&events)).map_err(|e| Failure::module("ArenaError", e))?;
    let opts = ServeOptions {
        ui_dir: a.ui.clone().or(cfg.ui.clone()),
        token: std::env::var("SLIDER_ARENA_TOKEN").ok().filter(|t| !t.is_empty()),
    };
    serve_blocking(addr, arena, opts).map_err(|e| Failure::module("ArenaError", e))?;
    Ok(Value::Null)
}
