use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use super::{read_png, PixelRect, Raster, RasterError};
use crate::svg::{write_slide_svg, Color, SlideDoc};

/// Renders a document with solid boxes standing in for glyphs.
///
/// The background is stretched over the canvas, images are painted in
/// document order with nearest-neighbor scaling into their pixel rectangles,
/// then each text line becomes a rectangle of the text color, one line
/// height (`font-size` px) tall, stacked from the top of its box.
pub fn composite_render(doc: &SlideDoc, assets: &HashMap<String, Raster>) -> Result<Raster, RasterError> {
    if doc.width == 0 || doc.height == 0 {
        return Err(RasterError::Invalid(format!("canvas {}x{}", doc.width, doc.height)));
    }
    let lookup = |href: &str| assets.get(href).ok_or_else(|| RasterError::MissingAsset(href.to_string()));

    let background = lookup(&doc.background.href)?;
    let mut canvas = Raster::filled(doc.width, doc.height, [255, 255, 255]);
    let full = PixelRect {
        x0: 0,
        y0: 0,
        x1: i64::from(doc.width),
        y1: i64::from(doc.height),
    };
    paint_scaled(&mut canvas, background, full);

    for img in &doc.images {
        let src = lookup(&img.href)?;
        if let Some(b) = img.placement.bbox() {
            paint_scaled(&mut canvas, src, PixelRect::from_bbox(&b, doc.width, doc.height));
        }
    }

    for text in &doc.texts {
        let Some(b) = text.placement.bbox() else { continue };
        let rect = PixelRect::from_bbox(&b, doc.width, doc.height);
        let lines = text.line_texts().len() as i64;
        if lines == 0 || rect.is_empty() {
            continue;
        }
        let line_height = match text.style.font_size_px() {
            Some(px) if px > 0 => i64::from(px),
            _ => (rect.height() / lines).max(1),
        };
        let color = text.style.color_value().unwrap_or(Color::BLACK).0;
        for k in 0..lines {
            let top = rect.y0 + k * line_height;
            canvas.fill_rect(
                PixelRect {
                    x0: rect.x0,
                    y0: top,
                    x1: rect.x1,
                    y1: top + line_height,
                },
                color,
            );
        }
    }
    Ok(canvas)
}

fn paint_scaled(canvas: &mut Raster, src: &Raster, dest: PixelRect) {
    if dest.is_empty() {
        return;
    }
    let (dw, dh) = (dest.width(), dest.height());
    let (sw, sh) = (i64::from(src.width()), i64::from(src.height()));
    let visible = dest.clamp(canvas.width(), canvas.height());
    for y in visible.y0..visible.y1 {
        let sy = ((2 * (y - dest.y0) + 1) * sh) / (2 * dh);
        for x in visible.x0..visible.x1 {
            let sx = ((2 * (x - dest.x0) + 1) * sw) / (2 * dw);
            canvas.put(x as u32, y as u32, src.get(sx as u32, sy as u32));
        }
    }
}

/// An external SVG rasterizer invoked as `<cmd> <in.svg> <out.png> <width> <height>`.
///
/// The command string is split on whitespace, so it may carry fixed leading
/// arguments. Used when glyph-accurate rendering is needed.
#[derive(Debug, Clone)]
pub struct ExternalRenderer {
    pub command: String,
}

impl ExternalRenderer {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalRenderer { command: command.into() }
    }

    pub fn render_file(&self, svg_path: &Path, out_png: &Path, width: u32, height: u32) -> Result<Raster, RasterError> {
        let mut parts = self.command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| RasterError::Render("empty renderer command".into()))?;
        let status = Command::new(program)
            .args(parts)
            .arg(svg_path)
            .arg(out_png)
            .arg(width.to_string())
            .arg(height.to_string())
            .status()
            .map_err(|e| RasterError::Render(format!("{program}: {e}")))?;
        if !status.success() {
            return Err(RasterError::Render(format!("{program} exited with {status}")));
        }
        read_png(out_png)
    }

    /// Writes the document into `work_dir` (whose relative hrefs must
    /// resolve there) and renders it at canvas size.
    pub fn render_doc(&self, doc: &SlideDoc, work_dir: &Path) -> Result<Raster, RasterError> {
        let svg_path: PathBuf = work_dir.join("render_input.svg");
        let png_path = work_dir.join("render_output.png");
        std::fs::write(&svg_path, write_slide_svg(doc))?;
        let out = self.render_file(&svg_path, &png_path, doc.width, doc.height);
        let _ = std::fs::remove_file(&svg_path);
        let _ = std::fs::remove_file(&png_path);
        out
    }
}
