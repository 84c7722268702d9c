//! Auxiliary SVG contexts handed to the model alongside the raster, and the
//! instruction prompt that carries them.
//!
//! Three context kinds exist: a skeleton with every attribute `UNKNOWN`, a
//! partial template with detected boxes filled in, and an initial prediction
//! used for refinement.

mod detections;
mod export;

use serde::{Deserialize, Serialize};

pub use detections::{detections_jsonl_line, parse_detections_jsonl, AssetClass, Detection, DetectionSet};
pub use export::{export_training_variants, records_jsonl, TrainingRecord, TrainingSample};

use crate::svg::{
    serialize_slide_svg, validate_complete, write_slide_svg, BBox, ImageAsset, Placement, Slot, SlideDoc, SvgError,
    TextAsset, TextStyle, Violation,
};

pub const PROMPT_PREFIX: &str = "De-render this raster image: <image>. You may find the provided SVG template useful: ";
/// Marks where a backend attaches the raster.
pub const IMAGE_TOKEN: &str = "<image>";
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextKind {
    Skeleton,
    Partial,
    Initial,
}

impl ContextKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextKind::Skeleton => "skeleton",
            ContextKind::Partial => "partial",
            ContextKind::Initial => "initial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxContext {
    pub kind: ContextKind,
    pub svg_text: String,
    /// Where the context came from, e.g. a detector run or a prior pass.
    pub source: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ContextError {
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("no prior prediction for sample {0:?}")]
    MissingPrior(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error(transparent)]
    Svg(#[from] SvgError),
}

impl ContextError {
    fn violations(v: Vec<Violation>) -> Self {
        ContextError::Svg(SvgError::InvariantViolation(v))
    }
}

/// The skeleton style: every key but `font-size` present and `UNKNOWN`.
fn skeleton_style() -> TextStyle {
    TextStyle {
        font_size: None,
        ..TextStyle::all_unknown()
    }
}

fn placeholder_image(k: usize, placement: Placement) -> ImageAsset {
    ImageAsset {
        placement,
        href: format!("image_{k}.png"),
    }
}

/// Document form of a skeleton context.
pub fn skeleton_doc(n_images: usize, n_texts: usize, width: u32, height: u32) -> SlideDoc {
    let mut doc = SlideDoc::empty(width, height);
    doc.images = (1..=n_images)
        .map(|k| placeholder_image(k, Placement::unknown()))
        .collect();
    doc.texts = (0..n_texts)
        .map(|_| TextAsset {
            placement: Placement::unknown(),
            style: skeleton_style(),
            lines: Slot::Unknown,
        })
        .collect();
    doc
}

pub fn build_skeleton(n_images: usize, n_texts: usize, width: u32, height: u32) -> AuxContext {
    AuxContext {
        kind: ContextKind::Skeleton,
        svg_text: write_slide_svg(&skeleton_doc(n_images, n_texts, width, height)),
        source: format!("skeleton:{n_images}i{n_texts}t"),
    }
}

/// Number of `UNKNOWN` markers in a skeleton: four coordinates per image,
/// and per text block four coordinates, five style keys and the content.
pub fn skeleton_unknown_count(n_images: usize, n_texts: usize) -> usize {
    4 * n_images + 10 * n_texts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialOptions {
    /// Detections with confidence strictly below this are dropped.
    pub confidence_threshold: f64,
    /// Clip boxes to the canvas instead of rejecting them.
    pub clamp: bool,
}

impl Default for PartialOptions {
    fn default() -> Self {
        PartialOptions {
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            clamp: false,
        }
    }
}

/// Document form of a partial context. Assets of each class appear in
/// reading order (top edge, then left edge).
pub fn partial_doc(det: &DetectionSet, width: u32, height: u32, opts: &PartialOptions) -> Result<SlideDoc, ContextError> {
    let mut kept: Vec<(BBox, AssetClass)> = Vec::new();
    for (i, d) in det.boxes.iter().enumerate() {
        if !(0.0..=1.0).contains(&d.confidence) {
            return Err(ContextError::InvalidDetection(format!("box {i}: confidence {}", d.confidence)));
        }
        if d.confidence < opts.confidence_threshold {
            continue;
        }
        let b = if opts.clamp { clamp_box(d.bbox) } else { d.bbox };
        let inside = b.left() >= 0 && b.top() >= 0 && b.right() <= 1000 && b.bottom() <= 1000;
        if !inside || b.w.tenths() <= 0 || b.h.tenths() <= 0 {
            return Err(ContextError::InvalidDetection(format!(
                "box {i} ({}, {}, {}, {}) is outside the canvas or empty",
                b.x, b.y, b.w, b.h
            )));
        }
        kept.push((b, d.cls));
    }
    kept.sort_by_key(|(b, _)| (b.top(), b.left()));

    let mut doc = SlideDoc::empty(width, height);
    for (b, cls) in kept {
        match cls {
            AssetClass::Image => {
                let k = doc.images.len() + 1;
                doc.images.push(placeholder_image(k, b.into()));
            }
            AssetClass::Text => doc.texts.push(TextAsset {
                placement: b.into(),
                style: TextStyle::all_unknown(),
                lines: Slot::Unknown,
            }),
        }
    }
    Ok(doc)
}

fn clamp_box(b: BBox) -> BBox {
    let x0 = b.left().clamp(0, 1000);
    let y0 = b.top().clamp(0, 1000);
    let x1 = b.right().clamp(0, 1000);
    let y1 = b.bottom().clamp(0, 1000);
    BBox::from_tenths(x0, y0, x1 - x0, y1 - y0)
}

pub fn build_partial(
    det: &DetectionSet,
    width: u32,
    height: u32,
    opts: &PartialOptions,
) -> Result<AuxContext, ContextError> {
    let doc = partial_doc(det, width, height, opts)?;
    Ok(AuxContext {
        kind: ContextKind::Partial,
        svg_text: write_slide_svg(&doc),
        source: format!("detections:{}kept", doc.images.len() + doc.texts.len()),
    })
}

/// Wraps a finished prediction as an initial context for another pass.
pub fn build_refinement_context(prior: &SlideDoc) -> Result<AuxContext, ContextError> {
    let violations = validate_complete(prior);
    if !violations.is_empty() {
        return Err(ContextError::violations(violations));
    }
    Ok(AuxContext {
        kind: ContextKind::Initial,
        svg_text: serialize_slide_svg(prior)?,
        source: "prior".into(),
    })
}

pub fn build_prompt(ctx: &AuxContext) -> String {
    let mut prompt = String::with_capacity(PROMPT_PREFIX.len() + ctx.svg_text.len());
    prompt.push_str(PROMPT_PREFIX);
    prompt.push_str(&ctx.svg_text);
    prompt
}
