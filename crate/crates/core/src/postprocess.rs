//! Turning a predicted document plus its source raster into an SVG with
//! external image files: occlusion repair, background isolation, extraction.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::raster::{telea_inpaint, write_png, Mask, PixelRect, Raster, RasterError};
use crate::svg::{serialize_slide_svg, SlideDoc, SvgError, Violation};

pub const BACKGROUND_FILE: &str = "background.png";
pub const SVG_FILE: &str = "slide.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum PostprocessError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Svg(#[from] SvgError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One image asset cut from the raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedAsset {
    pub href: String,
    pub rect: PixelRect,
    pub raster: Raster,
    /// Pixels filled by inpainting because something drawn later covers them.
    pub inpainted_pixels: usize,
}

fn pixel_rect(doc_index: &str, b: Option<crate::svg::BBox>, raster: &Raster) -> Result<PixelRect, PostprocessError> {
    let b = b.ok_or_else(|| {
        SvgError::InvariantViolation(vec![Violation::new(doc_index.to_string(), "no UNKNOWN placeholders")])
    })?;
    Ok(PixelRect::from_bbox(&b, raster.width(), raster.height()).clamp(raster.width(), raster.height()))
}

/// Crops every image asset in document order. Pixels covered by a later
/// image or by any text block (text paints above images) are masked and
/// TELEA-inpainted; assets with nothing on top are plain crops.
pub fn resolve_overlaps(raster: &Raster, doc: &SlideDoc, radius: u32) -> Result<Vec<ResolvedAsset>, PostprocessError> {
    let image_rects = doc
        .images
        .iter()
        .enumerate()
        .map(|(i, img)| pixel_rect(&format!("images[{i}].bbox"), img.placement.bbox(), raster))
        .collect::<Result<Vec<_>, _>>()?;
    let text_rects = doc
        .texts
        .iter()
        .enumerate()
        .map(|(i, t)| pixel_rect(&format!("texts[{i}].bbox"), t.placement.bbox(), raster))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = Vec::with_capacity(doc.images.len());
    for (i, img) in doc.images.iter().enumerate() {
        let rect = image_rects[i];
        let crop = raster.sub_image(rect)?;
        let mut mask = Mask::new(crop.width(), crop.height());
        for occluder in image_rects[i + 1..].iter().chain(&text_rects) {
            let hit = occluder.intersect(&rect);
            if !hit.is_empty() {
                mask.set_rect(hit.translate(-rect.x0, -rect.y0));
            }
        }
        let inpainted_pixels = mask.count();
        let resolved = if mask.is_empty() { crop } else { telea_inpaint(&crop, &mask, radius)? };
        out.push(ResolvedAsset {
            href: img.href.clone(),
            rect,
            raster: resolved,
            inpainted_pixels,
        });
    }
    Ok(out)
}

/// Union of all image and text rectangles, in raster pixels.
pub fn foreground_mask(raster: &Raster, doc: &SlideDoc) -> Mask {
    let mut mask = Mask::new(raster.width(), raster.height());
    for b in doc.image_boxes().iter().chain(&doc.text_boxes()) {
        mask.set_rect(PixelRect::from_bbox(b, raster.width(), raster.height()));
    }
    mask
}

/// The raster with every foreground box inpainted away.
pub fn extract_background(raster: &Raster, doc: &SlideDoc, radius: u32) -> Result<Raster, PostprocessError> {
    let mask = foreground_mask(raster, doc);
    if mask.is_empty() {
        return Ok(raster.clone());
    }
    Ok(telea_inpaint(raster, &mask, radius)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionBundle {
    pub final_svg: String,
    pub doc: SlideDoc,
    pub background_file: String,
    /// One file per image element, in document order.
    pub asset_files: Vec<String>,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct ManifestAsset<'a> {
    file: &'a str,
    source_href: &'a str,
    bbox: [f64; 4],
    pixel_rect: [i64; 4],
    inpainted_pixels: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    width: u32,
    height: u32,
    svg: &'a str,
    background: &'a str,
    images: Vec<ManifestAsset<'a>>,
    text_blocks: Vec<[f64; 4]>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    run: &'a serde_json::Value,
}

/// Writes `background.png`, `image_1.png`, … (document order), `slide.svg`
/// with hrefs rewritten to those names, and `manifest.json`. `run_meta` is
/// stored under the manifest's `run` key when not null.
pub fn extract_assets(
    raster: &Raster,
    doc: &SlideDoc,
    out_dir: &Path,
    radius: u32,
    run_meta: &serde_json::Value,
) -> Result<ExtractionBundle, PostprocessError> {
    let assets = resolve_overlaps(raster, doc, radius)?;
    let background = extract_background(raster, doc, radius)?;
    std::fs::create_dir_all(out_dir)?;

    let mut final_doc = doc.clone();
    final_doc.background.href = BACKGROUND_FILE.to_string();
    let asset_files: Vec<String> = (1..=assets.len()).map(|k| format!("image_{k}.png")).collect();
    for (img, file) in final_doc.images.iter_mut().zip(&asset_files) {
        img.href = file.clone();
    }
    let final_svg = serialize_slide_svg(&final_doc)?;

    write_png(out_dir.join(BACKGROUND_FILE), &background)?;
    for (asset, file) in assets.iter().zip(&asset_files) {
        write_png(out_dir.join(file), &asset.raster)?;
    }
    std::fs::write(out_dir.join(SVG_FILE), &final_svg)?;

    let bbox = |b: crate::svg::BBox| [b.x.percent(), b.y.percent(), b.w.percent(), b.h.percent()];
    let manifest = Manifest {
        width: final_doc.width,
        height: final_doc.height,
        svg: SVG_FILE,
        background: BACKGROUND_FILE,
        images: assets
            .iter()
            .zip(&asset_files)
            .zip(doc.image_boxes())
            .map(|((a, file), b)| ManifestAsset {
                file,
                source_href: &a.href,
                bbox: bbox(b),
                pixel_rect: [a.rect.x0, a.rect.y0, a.rect.x1, a.rect.y1],
                inpainted_pixels: a.inpainted_pixels,
            })
            .collect(),
        text_blocks: doc.text_boxes().into_iter().map(bbox).collect(),
        run: run_meta,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(out_dir.join(MANIFEST_FILE), json + "\n")?;

    Ok(ExtractionBundle {
        final_svg,
        doc: final_doc,
        background_file: BACKGROUND_FILE.to_string(),
        asset_files,
        out_dir: out_dir.to_path_buf(),
    })
}
