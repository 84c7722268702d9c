//! Lenient reading of exported slide SVGs before they enter the corpus.
//!
//! Group wrappers are dropped and their children hoisted, coordinates may be
//! pixels or percentages, and elements outside the dialect are skipped and
//! reported rather than rejected.

use roxmltree::{Document, Node};

use super::DatasetError;
use crate::svg::{
    has_raster_extension, parse_style, BBox, BackgroundAsset, Em, ImageAsset, Pct, Placement, Slot, SlideDoc, TextAsset,
    TextStyle,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Px(f64),
    Percent(f64),
}

impl Length {
    pub fn parse(raw: &str) -> Option<Length> {
        let s = raw.trim();
        if let Some(p) = s.strip_suffix('%') {
            return p.trim().parse().ok().filter(|v: &f64| v.is_finite()).map(Length::Percent);
        }
        let n = s.strip_suffix("px").unwrap_or(s).trim();
        n.parse().ok().filter(|v: &f64| v.is_finite()).map(Length::Px)
    }

    fn to_percent(self, dim: u32) -> f64 {
        match self {
            Length::Px(v) => v / f64::from(dim) * 100.0,
            Length::Percent(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawBox {
    pub x: Length,
    pub y: Length,
    pub w: Length,
    pub h: Length,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub bbox: RawBox,
    pub href: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawText {
    pub bbox: RawBox,
    pub style: TextStyle,
    pub lines: Vec<String>,
}

/// A slide as exported, with coordinates still in their source units.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSlide {
    pub width: u32,
    pub height: u32,
    pub background: Option<String>,
    pub images: Vec<RawImage>,
    pub texts: Vec<RawText>,
    /// Names of skipped elements and style declarations, in document order.
    pub dropped: Vec<String>,
}

pub fn parse_raw_svg(text: &str) -> Result<RawSlide, DatasetError> {
    let xml = Document::parse(text).map_err(|e| DatasetError::Malformed(e.to_string()))?;
    let root = xml.root_element();
    if root.tag_name().name() != "svg" {
        return Err(DatasetError::Malformed(format!("root is <{}>", root.tag_name().name())));
    }
    let (width, height) = canvas(root)?;
    let mut slide = RawSlide {
        width,
        height,
        background: None,
        images: Vec::new(),
        texts: Vec::new(),
        dropped: Vec::new(),
    };
    collect(root, &mut slide)?;
    Ok(slide)
}

fn canvas(root: Node) -> Result<(u32, u32), DatasetError> {
    let dim = |name: &str, idx: usize| -> Option<u32> {
        match root.attribute(name).and_then(Length::parse) {
            Some(Length::Px(v)) => Some(v.round() as u32),
            _ => root
                .attribute("viewBox")
                .and_then(|vb| vb.split([' ', ',']).filter(|s| !s.is_empty()).nth(idx)?.parse::<f64>().ok())
                .map(|v| v.round() as u32),
        }
    };
    match (dim("width", 2), dim("height", 3)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(DatasetError::Malformed("canvas size missing".into())),
    }
}

fn collect(parent: Node, slide: &mut RawSlide) -> Result<(), DatasetError> {
    for node in parent.children().filter(Node::is_element) {
        match node.tag_name().name() {
            "g" | "a" | "switch" => collect(node, slide)?,
            "image" => {
                let href = node
                    .attributes()
                    .find(|a| a.name() == "href")
                    .map(|a| a.value().to_string())
                    .unwrap_or_default();
                let Some(bbox) = raw_box(node) else {
                    slide.dropped.push("image (bad geometry)".into());
                    continue;
                };
                if !has_raster_extension(&href) {
                    slide.dropped.push(format!("image ({href})"));
                } else if slide.background.is_none() && slide.images.is_empty() && is_full_canvas(&bbox, slide) {
                    slide.background = Some(href);
                } else {
                    slide.images.push(RawImage { bbox, href });
                }
            }
            "foreignObject" => match raw_text(node, &mut slide.dropped) {
                Some(t) => slide.texts.push(t),
                None => slide.dropped.push("foreignObject (no text)".into()),
            },
            "defs" | "title" | "desc" | "metadata" | "style" => {}
            other => slide.dropped.push(other.to_string()),
        }
    }
    Ok(())
}

fn is_full_canvas(b: &RawBox, slide: &RawSlide) -> bool {
    let near = |l: Length, dim: u32, full: f64| (l.to_percent(dim) - full).abs() < 0.05;
    near(b.x, slide.width, 0.0)
        && near(b.y, slide.height, 0.0)
        && near(b.w, slide.width, 100.0)
        && near(b.h, slide.height, 100.0)
}

fn raw_box(node: Node) -> Option<RawBox> {
    let get = |name: &str, default: Option<Length>| node.attribute(name).map_or(default, Length::parse);
    Some(RawBox {
        x: get("x", Some(Length::Px(0.0)))?,
        y: get("y", Some(Length::Px(0.0)))?,
        w: get("width", None)?,
        h: get("height", None)?,
    })
}

fn raw_text(fo: Node, dropped: &mut Vec<String>) -> Option<RawText> {
    let bbox = raw_box(fo)?;
    let block = fo.descendants().find(|n| n.is_element() && n.tag_name().name() == "div")?;
    let style = lenient_style(block.attribute("style").unwrap_or(""), dropped);
    let line_divs: Vec<Node> = block
        .children()
        .filter(|n| n.is_element() && n.tag_name().name() == "div")
        .collect();
    let raw_lines: Vec<String> = if line_divs.is_empty() {
        all_text(block).lines().map(str::to_string).collect()
    } else {
        line_divs.into_iter().map(all_text).collect()
    };
    let lines: Vec<String> = raw_lines
        .iter()
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return None;
    }
    Some(RawText { bbox, style, lines })
}

fn all_text(node: Node) -> String {
    node.descendants().filter(Node::is_text).filter_map(|n| n.text()).collect()
}

/// Parses each declaration on its own, dropping the ones the dialect cannot
/// carry. Pixel letter spacing is converted to em when the font size is known.
fn lenient_style(raw: &str, dropped: &mut Vec<String>) -> TextStyle {
    let mut style = TextStyle::default();
    let mut px_spacing: Option<f64> = None;
    for decl in raw.split(';').map(str::trim).filter(|d| !d.is_empty()) {
        match parse_style(decl) {
            Ok(one) => merge(&mut style, one),
            Err(_) => {
                let px = decl
                    .split_once(':')
                    .filter(|(k, _)| k.trim().eq_ignore_ascii_case("letter-spacing"))
                    .and_then(|(_, v)| v.trim().strip_suffix("px")?.trim().parse::<f64>().ok());
                match px {
                    Some(v) => px_spacing = Some(v),
                    None => dropped.push(format!("style {decl}")),
                }
            }
        }
    }
    if let Some(px) = px_spacing {
        match style.font_size_px() {
            Some(size) if size > 0 => {
                let milli = (px / f64::from(size) * 1000.0).round() as i32;
                style.letter_spacing = Some(Slot::Known(Em::from_milli(milli)));
            }
            _ => dropped.push("style letter-spacing (px without font-size)".into()),
        }
    }
    style
}

fn merge(into: &mut TextStyle, one: TextStyle) {
    macro_rules! take {
        ($($f:ident),*) => { $( if one.$f.is_some() { into.$f = one.$f; } )* };
    }
    take!(font_family, font_size, letter_spacing, font_weight, color, text_align);
    for (k, v) in one.extras {
        match into.extras.iter_mut().find(|(ek, _)| *ek == k) {
            Some(e) => e.1 = v,
            None => into.extras.push((k, v)),
        }
    }
}

/// Converts source coordinates to percent of the canvas, rounded to one
/// decimal. Percent inputs pass through unchanged, so normalizing a
/// normalized slide is the identity.
pub fn normalize_coords(raw: &RawSlide) -> Result<SlideDoc, DatasetError> {
    if raw.width == 0 || raw.height == 0 {
        return Err(DatasetError::ZeroCanvas);
    }
    let place = |b: &RawBox| -> Placement {
        BBox {
            x: Pct::from_percent(b.x.to_percent(raw.width)),
            y: Pct::from_percent(b.y.to_percent(raw.height)),
            w: Pct::from_percent(b.w.to_percent(raw.width)),
            h: Pct::from_percent(b.h.to_percent(raw.height)),
        }
        .into()
    };
    let mut doc = SlideDoc::empty(raw.width, raw.height);
    if let Some(bg) = &raw.background {
        doc.background = BackgroundAsset { href: bg.clone() };
    }
    doc.images = raw
        .images
        .iter()
        .map(|i| ImageAsset {
            placement: place(&i.bbox),
            href: i.href.clone(),
        })
        .collect();
    doc.texts = raw
        .texts
        .iter()
        .map(|t| TextAsset {
            placement: place(&t.bbox),
            style: t.style.clone(),
            lines: Slot::Known(t.lines.clone()),
        })
        .collect();
    Ok(doc)
}

/// The percent form of a document, for feeding dialect documents back through
/// [`normalize_coords`].
pub fn raw_from_doc(doc: &SlideDoc) -> RawSlide {
    let raw_box = |p: &Placement| {
        let b = p.bbox().unwrap_or(BBox::from_tenths(0, 0, 0, 0));
        RawBox {
            x: Length::Percent(b.x.percent()),
            y: Length::Percent(b.y.percent()),
            w: Length::Percent(b.w.percent()),
            h: Length::Percent(b.h.percent()),
        }
    };
    RawSlide {
        width: doc.width,
        height: doc.height,
        background: Some(doc.background.href.clone()),
        images: doc
            .images
            .iter()
            .map(|i| RawImage {
                bbox: raw_box(&i.placement),
                href: i.href.clone(),
            })
            .collect(),
        texts: doc
            .texts
            .iter()
            .map(|t| RawText {
                bbox: raw_box(&t.placement),
                style: t.style.clone(),
                lines: t.line_texts().to_vec(),
            })
            .collect(),
        dropped: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::{parse_slide_svg, write_slide_svg, Color};

    const EXPORT: &str = r##"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="720" height="405" viewBox="0 0 720 405">
  <image x="0" y="0" width="720" height="405" xlink:href="bg.png"/>
  <g id="Frame 1">
    <g>
      <image x="360" y="81" width="180" height="162" href="photo.png"/>
      <rect x="0" y="0" width="10" height="10"/>
    </g>
    <foreignObject x="36" y="20.25" width="288" height="40.5">
      <div xmlns="http://www.w3.org/1999/xhtml" style="font-family: Inter; font-size: 24px; letter-spacing: 2.4px; color: #112233; line-height: 1.2">
        <div>Hello   <span>world</span></div>
        <div>  </div>
      </div>
    </foreignObject>
  </g>
</svg>"##;

    #[test]
    fn flattens_and_normalizes() {
        let raw = parse_raw_svg(EXPORT).unwrap();
        assert_eq!((raw.width, raw.height), (720, 405));
        assert_eq!(raw.background.as_deref(), Some("bg.png"));
        assert_eq!(raw.images.len(), 1);
        assert_eq!(raw.dropped, vec!["rect".to_string()]);
        let doc = normalize_coords(&raw).unwrap();
        assert_eq!(doc.images[0].placement.bbox(), Some(BBox::from_tenths(500, 200, 250, 400)));
        assert_eq!(doc.texts[0].placement.bbox(), Some(BBox::from_tenths(50, 50, 400, 100)));
        assert_eq!(doc.texts[0].line_texts(), &["Hello world".to_string()]);
        let style = &doc.texts[0].style;
        assert_eq!(style.letter_spacing, Some(Slot::Known(Em::from_milli(100))));
        assert_eq!(style.color, Some(Slot::Known(Color([0x11, 0x22, 0x33]))));
        assert_eq!(style.extras, vec![("line-height".to_string(), "1.2".to_string())]);
        let text = write_slide_svg(&doc);
        assert_eq!(parse_slide_svg(&text).unwrap(), doc);
    }

    #[test]
    fn pixel_to_percent() {
        assert_eq!(Pct::from_percent(Length::Px(360.0).to_percent(720)), Pct::from_tenths(500));
        assert_eq!(Pct::from_percent(Length::Px(0.0).to_percent(720)), Pct::ZERO);
    }

    #[test]
    fn normalize_idempotent() {
        let doc = normalize_coords(&parse_raw_svg(EXPORT).unwrap()).unwrap();
        assert_eq!(normalize_coords(&raw_from_doc(&doc)).unwrap(), doc);
    }

    #[test]
    fn zero_canvas() {
        let raw = parse_raw_svg(r#"<svg width="0" height="10"></svg>"#).unwrap();
        assert!(matches!(normalize_coords(&raw), Err(DatasetError::ZeroCanvas)));
    }
}
