use std::collections::HashSet;
use std::fmt;

use super::model::*;

/// One failed invariant, located by a path such as `images[0].bbox.w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub rule: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.rule)
    }
}

const RASTER_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "gif", "webp", "bmp"];

pub(crate) fn has_raster_extension(href: &str) -> bool {
    href.rsplit_once('.')
        .is_some_and(|(stem, ext)| !stem.is_empty() && RASTER_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()))
}

/// Checks the type invariants of a document. Placeholders are allowed here;
/// see [`validate_complete`] for predictions.
pub fn validate(doc: &SlideDoc) -> Vec<Violation> {
    let mut out = Vec::new();
    if doc.width == 0 {
        out.push(Violation::new("width", "width > 0"));
    }
    if doc.height == 0 {
        out.push(Violation::new("height", "height > 0"));
    }
    if !has_raster_extension(&doc.background.href) {
        out.push(Violation::new("background.href", "raster image filename"));
    }

    let mut seen = HashSet::new();
    for (i, img) in doc.images.iter().enumerate() {
        check_placement(&format!("images[{i}]"), &img.placement, &mut out);
        if !has_raster_extension(&img.href) {
            out.push(Violation::new(format!("images[{i}].href"), "raster image filename"));
        }
        if !seen.insert(img.href.as_str()) {
            out.push(Violation::new(format!("images[{i}].href"), "unique hrefs"));
        }
    }

    for (i, text) in doc.texts.iter().enumerate() {
        let base = format!("texts[{i}]");
        check_placement(&base, &text.placement, &mut out);
        if let Slot::Known(lines) = &text.lines {
            if lines.is_empty() {
                out.push(Violation::new(format!("{base}.lines"), "at least one line"));
            }
            for (j, line) in lines.iter().enumerate() {
                if contains_markup(line) {
                    out.push(Violation::new(format!("{base}.lines[{j}]"), "no raw markup"));
                }
            }
        }
        if let Some(Slot::Known(size)) = text.style.font_size {
            if size < 1 {
                out.push(Violation::new(format!("{base}.style.font_size"), "font_size >= 1"));
            }
        }
    }
    out
}

/// [`validate`] plus the completeness rules for a finished prediction: no
/// placeholders anywhere and an explicit font size on every text block.
pub fn validate_complete(doc: &SlideDoc) -> Vec<Violation> {
    let mut out = validate(doc);
    for (i, img) in doc.images.iter().enumerate() {
        if img.placement.has_unknown() {
            out.push(Violation::new(format!("images[{i}].bbox"), "no UNKNOWN placeholders"));
        }
    }
    for (i, text) in doc.texts.iter().enumerate() {
        if text.placement.has_unknown() {
            out.push(Violation::new(format!("texts[{i}].bbox"), "no UNKNOWN placeholders"));
        }
        if text.style.has_unknown() {
            out.push(Violation::new(format!("texts[{i}].style"), "no UNKNOWN placeholders"));
        }
        if text.lines.is_unknown() {
            out.push(Violation::new(format!("texts[{i}].lines"), "no UNKNOWN placeholders"));
        }
        if text.style.font_size.is_none() {
            out.push(Violation::new(format!("texts[{i}].style.font_size"), "font-size present"));
        }
    }
    out
}

fn check_placement(base: &str, p: &Placement, out: &mut Vec<Violation>) {
    for (name, slot) in [("x", &p.x), ("y", &p.y)] {
        if let Slot::Known(v) = slot {
            if !(0..=1000).contains(&v.tenths()) {
                out.push(Violation::new(format!("{base}.bbox.{name}"), format!("0 <= {name} <= 100")));
            }
        }
    }
    for (name, slot) in [("w", &p.w), ("h", &p.h)] {
        if let Slot::Known(v) = slot {
            if v.tenths() <= 0 {
                out.push(Violation::new(format!("{base}.bbox.{name}"), format!("{name} > 0")));
            }
        }
    }
}

fn contains_markup(line: &str) -> bool {
    line.as_bytes()
        .windows(2)
        .any(|w| w[0] == b'<' && (w[1].is_ascii_alphabetic() || matches!(w[1], b'/' | b'!' | b'?')))
}
