//! Ground-truth corpus assembly: flattening exported slides, normalizing
//! coordinates, grouping text, filtering outliers, splitting and statistics.

mod group;
mod raw;

pub use group::{group_text_boxes, overlap_components};
pub use raw::{normalize_coords, parse_raw_svg, raw_from_doc, Length, RawBox, RawImage, RawSlide, RawText};

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::context::{parse_detections_jsonl, ContextError, DetectionSet};
use crate::postprocess::extract_background;
use crate::raster::{
    composite_render, read_png, resize_max_side, write_png, ExternalRenderer, Raster, RasterError, DEFAULT_INPAINT_RADIUS,
    DEFAULT_MAX_SIDE,
};
use crate::svg::{parse_slide_svg, serialize_slide_svg, validate, SlideDoc, SvgError};

pub const MAX_IMAGES: usize = 8;
pub const MAX_TEXTS: usize = 31;
/// Width of the SVG character-count histogram buckets.
pub const SVG_CHAR_BUCKET: usize = 1000;
pub const SPLITS: [&str; 2] = ["train", "test"];

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("malformed slide: {0}")]
    Malformed(String),
    #[error("canvas has zero width or height")]
    ZeroCanvas,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error(transparent)]
    Context(#[from] ContextError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSample {
    pub id: String,
    pub raster_path: PathBuf,
    pub svg_path: PathBuf,
    pub asset_paths: Vec<PathBuf>,
    pub n_images: usize,
    pub n_texts: usize,
}

/// Keeps samples with at most `max_images` images and at most `max_texts`
/// text blocks.
pub fn filter_outliers(samples: &[CorpusSample], max_images: usize, max_texts: usize) -> Vec<CorpusSample> {
    samples
        .iter()
        .filter(|s| s.n_images <= max_images && s.n_texts <= max_texts)
        .cloned()
        .collect()
}

/// Seeded split into (train, test). The train share is
/// `round(n * train_fraction)`; both halves come back sorted.
pub fn split_ids(ids: &[String], train_fraction: f64, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut shuffled: Vec<String> = ids.to_vec();
    shuffled.sort();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((ids.len() as f64 * train_fraction.clamp(0.0, 1.0)).round() as usize).min(ids.len());
    let mut test = shuffled.split_off(n_train);
    shuffled.sort();
    test.sort();
    (shuffled, test)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SkippedSample {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub samples: usize,
    pub image_assets: BTreeMap<usize, usize>,
    pub text_assets: BTreeMap<usize, usize>,
    /// Slide SVG length in characters, keyed by bucket lower bound.
    pub svg_chars: BTreeMap<usize, usize>,
    pub splits: BTreeMap<String, usize>,
    pub filtered_out: usize,
    pub skipped: Vec<SkippedSample>,
}

impl CorpusStats {
    fn add(&mut self, split: &str, doc: &SlideDoc, svg_chars: usize) {
        self.samples += 1;
        *self.image_assets.entry(doc.images.len()).or_default() += 1;
        *self.text_assets.entry(doc.texts.len()).or_default() += 1;
        *self.svg_chars.entry(svg_chars / SVG_CHAR_BUCKET * SVG_CHAR_BUCKET).or_default() += 1;
        *self.splits.entry(split.to_string()).or_default() += 1;
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,bucket,count\n");
        for (name, hist) in [
            ("image_assets", &self.image_assets),
            ("text_assets", &self.text_assets),
            ("svg_chars", &self.svg_chars),
        ] {
            for (k, v) in hist {
                out.push_str(&format!("{name},{k},{v}\n"));
            }
        }
        for (k, v) in &self.splits {
            out.push_str(&format!("split,{k},{v}\n"));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), DatasetError> {
        let json = serde_json::to_string_pretty(self).expect("stats serialize");
        std::fs::write(dir.join("stats.json"), json + "\n")?;
        std::fs::write(dir.join("stats.csv"), self.to_csv())?;
        Ok(())
    }
}

/// Histograms over a written corpus (`<root>/{train,test}/<id>/slide.svg`).
pub fn corpus_stats(corpus_dir: &Path) -> Result<CorpusStats, DatasetError> {
    let mut stats = CorpusStats::default();
    for split in SPLITS {
        let dir = corpus_dir.join(split);
        if !dir.is_dir() {
            continue;
        }
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for sample_dir in entries {
            let svg_path = sample_dir.join("slide.svg");
            if !svg_path.is_file() {
                continue;
            }
            let text = std::fs::read_to_string(&svg_path)?;
            let doc = parse_slide_svg(&text)?;
            stats.add(split, &doc, text.chars().count());
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub train_fraction: f64,
    pub seed: u64,
    pub max_images: usize,
    pub max_texts: usize,
    pub max_side: u32,
    pub inpaint_radius: u32,
    /// Line-delimited detections keyed by `<id>.png`, used for text grouping.
    pub detections: Option<PathBuf>,
    /// Re-rasterizes each processed slide instead of using the source PNG.
    pub renderer: Option<ExternalRenderer>,
    pub parallelism: usize,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            train_fraction: 0.9,
            seed: 0,
            max_images: MAX_IMAGES,
            max_texts: MAX_TEXTS,
            max_side: DEFAULT_MAX_SIDE,
            inpaint_radius: DEFAULT_INPAINT_RADIUS,
            detections: None,
            renderer: None,
            parallelism: 1,
        }
    }
}

struct Prepared {
    sample: CorpusSample,
    doc: SlideDoc,
}

fn prepare(input_dir: &Path, svg_path: &Path, det: Option<&DetectionSet>) -> Result<Prepared, DatasetError> {
    let id = svg_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| DatasetError::Malformed(format!("bad file name {}", svg_path.display())))?
        .to_string();
    let raw = parse_raw_svg(&std::fs::read_to_string(svg_path)?)?;
    let mut doc = normalize_coords(&raw)?;
    doc.texts = group_text_boxes(&doc.texts, det.unwrap_or(&DetectionSet::default()));
    let violations = validate(&doc);
    if !violations.is_empty() {
        return Err(SvgError::InvariantViolation(violations).into());
    }
    let asset_paths = doc.images.iter().map(|i| input_dir.join(&i.href)).collect();
    Ok(Prepared {
        sample: CorpusSample {
            id: id.clone(),
            raster_path: input_dir.join(format!("{id}.png")),
            svg_path: svg_path.to_path_buf(),
            asset_paths,
            n_images: doc.images.len(),
            n_texts: doc.texts.len(),
        },
        doc,
    })
}

fn write_sample(
    p: &Prepared,
    input_dir: &Path,
    sample_dir: &Path,
    opts: &CorpusOptions,
) -> Result<CorpusSample, DatasetError> {
    let assets_dir = sample_dir.join("assets");
    std::fs::create_dir_all(&assets_dir)?;
    let source = if p.sample.raster_path.is_file() {
        Some(read_png(&p.sample.raster_path)?)
    } else {
        None
    };

    let mut doc = p.doc.clone();
    let mut loaded: HashMap<String, Raster> = HashMap::new();
    let mut asset_paths = Vec::new();

    let bg_src = input_dir.join(&p.doc.background.href);
    let background = if bg_src.is_file() {
        read_png(&bg_src)?
    } else if let Some(src) = &source {
        extract_background(src, &p.doc, opts.inpaint_radius).map_err(|e| DatasetError::Malformed(e.to_string()))?
    } else {
        Raster::filled(doc.width, doc.height, [255, 255, 255])
    };
    doc.background.href = "assets/background.png".into();
    write_png(sample_dir.join(&doc.background.href), &background)?;
    loaded.insert(doc.background.href.clone(), background);

    for (k, (img, src)) in doc.images.iter_mut().zip(&p.sample.asset_paths).enumerate() {
        let asset = read_png(src)?;
        img.href = format!("assets/image_{}.png", k + 1);
        let dest = sample_dir.join(&img.href);
        write_png(&dest, &asset)?;
        asset_paths.push(dest);
        loaded.insert(img.href.clone(), asset);
    }

    let svg_text = serialize_slide_svg(&doc)?;
    let svg_path = sample_dir.join("slide.svg");
    std::fs::write(&svg_path, &svg_text)?;

    let raster = match (&opts.renderer, source) {
        (Some(r), _) => r.render_doc(&doc, sample_dir)?,
        (None, Some(src)) => src,
        (None, None) => composite_render(&doc, &loaded)?,
    };
    let raster_path = sample_dir.join("slide.png");
    write_png(&raster_path, &resize_max_side(&raster, opts.max_side))?;

    Ok(CorpusSample {
        id: p.sample.id.clone(),
        raster_path,
        svg_path,
        asset_paths,
        n_images: doc.images.len(),
        n_texts: doc.texts.len(),
    })
}

/// Builds `<out>/{train,test}/<id>/{slide.png, slide.svg, assets/…}` from
/// `<input>/<id>.svg` files (with optional `<id>.png` rasters and the image
/// files their hrefs name).
///
/// Slides are flattened, normalized to percent coordinates, text-grouped and
/// outlier-filtered before the seeded split. Slides that cannot be read are
/// skipped and listed in the stats. Also writes `samples.jsonl` (paths
/// relative to `out_dir`), `oracle_manifest.json`, `stats.json` and
/// `stats.csv` at the root.
pub fn build_corpus(input_dir: &Path, out_dir: &Path, opts: &CorpusOptions) -> Result<CorpusStats, DatasetError> {
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(input_dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")))
        .collect();
    inputs.sort();

    let detections = match &opts.detections {
        Some(path) => parse_detections_jsonl(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };

    let mut skipped = Vec::new();
    let mut prepared = Vec::new();
    for path in &inputs {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let det = detections.get(&format!("{stem}.png")).or_else(|| detections.get(stem));
        match prepare(input_dir, path, det) {
            Ok(p) => prepared.push(p),
            Err(e) => {
                tracing::warn!(id = stem, error = %e, "skipping slide");
                skipped.push(SkippedSample {
                    id: stem.to_string(),
                    reason: e.to_string(),
                });
            }
        }
    }

    let samples: Vec<CorpusSample> = prepared.iter().map(|p| p.sample.clone()).collect();
    let kept = filter_outliers(&samples, opts.max_images, opts.max_texts);
    let filtered_out = samples.len() - kept.len();
    let kept_ids: Vec<String> = kept.iter().map(|s| s.id.clone()).collect();
    let (train, test) = split_ids(&kept_ids, opts.train_fraction, opts.seed);
    let split_of: HashMap<&str, &str> = train
        .iter()
        .map(|id| (id.as_str(), "train"))
        .chain(test.iter().map(|id| (id.as_str(), "test")))
        .collect();

    let jobs: Vec<(&Prepared, &str)> = prepared
        .iter()
        .filter_map(|p| split_of.get(p.sample.id.as_str()).map(|s| (p, *s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.parallelism.max(1))
        .build()
        .expect("thread pool");
    let results: Vec<(String, &str, Result<CorpusSample, DatasetError>)> = pool.install(|| {
        jobs.par_iter()
            .map(|(p, split)| {
                let dir = out_dir.join(split).join(&p.sample.id);
                (p.sample.id.clone(), *split, write_sample(p, input_dir, &dir, opts))
            })
            .collect()
    });

    let mut index = String::new();
    let mut manifest = BTreeMap::new();
    for (id, split, result) in results {
        match result {
            Ok(mut sample) => {
                let rel = |p: &Path| PathBuf::from(p.strip_prefix(out_dir).unwrap_or(p).to_string_lossy().replace('\\', "/"));
                sample.raster_path = rel(&sample.raster_path);
                sample.svg_path = rel(&sample.svg_path);
                sample.asset_paths = sample.asset_paths.iter().map(|p| rel(p)).collect();
                manifest.insert(
                    sample.raster_path.to_string_lossy().into_owned(),
                    sample.svg_path.to_string_lossy().into_owned(),
                );
                let line = serde_json::json!({ "split": split, "sample": sample });
                index.push_str(&line.to_string());
                index.push('\n');
            }
            Err(e) => {
                tracing::warn!(id = id.as_str(), error = %e, "failed to write slide");
                let _ = std::fs::remove_dir_all(out_dir.join(split).join(&id));
                skipped.push(SkippedSample { id, reason: e.to_string() });
            }
        }
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("samples.jsonl"), index)?;
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out_dir.join("oracle_manifest.json"), manifest_json + "\n")?;

    let mut stats = corpus_stats(out_dir)?;
    stats.filtered_out = filtered_out;
    stats.skipped = skipped;
    stats.write(out_dir)?;
    Ok(stats)
}
