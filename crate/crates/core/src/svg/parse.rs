use roxmltree::{Document, Node};

use super::model::*;
use super::SvgError;

const XLINK_NS: &str = "http://www.w3.org/1999/xlink";

/// Parses a document in the slide dialect.
///
/// `UNKNOWN` in any attribute, style value, or as the sole text content of a
/// block is kept as [`Slot::Unknown`]. A missing background element is
/// replaced by the default `background.png`.
pub fn parse_slide_svg(svg_text: &str) -> Result<SlideDoc, SvgError> {
    let doc = Document::parse(svg_text).map_err(|e| SvgError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(SvgError::UnsupportedElement(root.tag_name().name().to_string()));
    }
    let width = canvas_dim(root, "width")?;
    let height = canvas_dim(root, "height")?;

    let mut slide = SlideDoc::empty(width, height);
    let mut saw_background = false;
    for child in root.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "image" => {
                if saw_background {
                    return Err(SvgError::Malformed(
                        "more than one background image at the root".into(),
                    ));
                }
                let placement = parse_placement(child)?;
                if placement != Placement::from(BBox::FULL_CANVAS) {
                    return Err(SvgError::Malformed(
                        "background image must cover the full canvas".into(),
                    ));
                }
                slide.background.href = href(child)?;
                saw_background = true;
            }
            "g" => match child.attribute("id") {
                Some("images") => {
                    for img in child.children().filter(Node::is_element) {
                        if img.tag_name().name() != "image" {
                            return Err(unsupported(img));
                        }
                        slide.images.push(ImageAsset {
                            placement: parse_placement(img)?,
                            href: href(img)?,
                        });
                    }
                }
                Some("text") => {
                    for fo in child.children().filter(Node::is_element) {
                        if fo.tag_name().name() != "foreignObject" {
                            return Err(unsupported(fo));
                        }
                        slide.texts.push(parse_text(fo)?);
                    }
                }
                other => {
                    return Err(SvgError::UnsupportedElement(format!(
                        "g#{}",
                        other.unwrap_or("")
                    )))
                }
            },
            _ => return Err(unsupported(child)),
        }
    }
    Ok(slide)
}

fn unsupported(node: Node) -> SvgError {
    SvgError::UnsupportedElement(node.tag_name().name().to_string())
}

fn canvas_dim(root: Node, name: &str) -> Result<u32, SvgError> {
    let raw = root.attribute(name).ok_or(SvgError::MissingCanvas)?;
    let trimmed = raw.trim().trim_end_matches("px");
    let value: f64 = trimmed
        .parse()
        .map_err(|_| SvgError::Malformed(format!("canvas {name} {raw:?} is not a number")))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(SvgError::Malformed(format!("canvas {name} {raw:?} out of range")));
    }
    Ok(round_half_up(value) as u32)
}

fn href(node: Node) -> Result<String, SvgError> {
    node.attribute("href")
        .or_else(|| node.attribute((XLINK_NS, "href")))
        .map(str::to_string)
        .ok_or_else(|| SvgError::Malformed(format!("<{}> without href", node.tag_name().name())))
}

fn parse_placement(node: Node) -> Result<Placement, SvgError> {
    let coord = |name: &str| -> Result<Slot<Pct>, SvgError> {
        let raw = node.attribute(name).ok_or_else(|| {
            SvgError::Malformed(format!("<{}> missing {name}", node.tag_name().name()))
        })?;
        parse_pct_slot(raw)
    };
    Ok(Placement {
        x: coord("x")?,
        y: coord("y")?,
        w: coord("width")?,
        h: coord("height")?,
    })
}

fn parse_pct_slot(raw: &str) -> Result<Slot<Pct>, SvgError> {
    let raw = raw.trim();
    if raw == UNKNOWN {
        return Ok(Slot::Unknown);
    }
    let number = raw
        .strip_suffix('%')
        .ok_or_else(|| SvgError::Malformed(format!("coordinate {raw:?} is not a percentage")))?;
    let tenths = parse_decimal_scaled(number, 1)
        .ok_or_else(|| SvgError::Malformed(format!("coordinate {raw:?} is not a number")))?;
    i32::try_from(tenths)
        .map(|t| Slot::Known(Pct::from_tenths(t)))
        .map_err(|_| SvgError::Malformed(format!("coordinate {raw:?} out of range")))
}

/// Parses a plain decimal string into an integer count of `10^-digits`
/// units, rounding half-up on the exact decimal digits.
pub(crate) fn parse_decimal_scaled(s: &str, digits: u32) -> Option<i64> {
    let s = s.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut value: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let frac = frac_part.as_bytes();
    for i in 0..digits as usize {
        let d = frac.get(i).map_or(0, |b| i64::from(b - b'0'));
        value = value.checked_mul(10)?.checked_add(d)?;
    }
    if frac.get(digits as usize).is_some_and(|b| *b >= b'5') {
        value += 1;
    }
    Some(if negative { -value } else { value })
}

fn parse_text(fo: Node) -> Result<TextAsset, SvgError> {
    let placement = parse_placement(fo)?;
    let mut outer = fo.children().filter(Node::is_element);
    let block = outer
        .next()
        .ok_or_else(|| SvgError::Malformed("foreignObject without a text block".into()))?;
    if let Some(extra) = outer.next() {
        return Err(unsupported(extra));
    }
    if block.tag_name().name() != "div" {
        return Err(unsupported(block));
    }
    let style = parse_style(block.attribute("style").unwrap_or(""))?;

    let mut lines = Vec::new();
    let mut has_line_divs = false;
    for child in block.children() {
        if child.is_element() {
            if child.tag_name().name() != "div" {
                return Err(unsupported(child));
            }
            if let Some(inner) = child.children().find(Node::is_element) {
                return Err(unsupported(inner));
            }
            has_line_divs = true;
            let text = child.text().unwrap_or("").trim();
            if !text.is_empty() {
                lines.push(text.to_string());
            }
        } else if child.is_text() && !has_line_divs {
            let text = child.text().unwrap_or("").trim();
            if !text.is_empty() {
                lines.push(text.to_string());
            }
        }
    }
    let lines = if lines.len() == 1 && lines[0] == UNKNOWN {
        Slot::Unknown
    } else {
        Slot::Known(lines)
    };
    Ok(TextAsset {
        placement,
        style,
        lines,
    })
}

/// Parses the inline `style` attribute of a text block.
pub fn parse_style(raw: &str) -> Result<TextStyle, SvgError> {
    let mut style = TextStyle::default();
    for decl in raw.split(';') {
        let decl = decl.trim();
        if decl.is_empty() {
            continue;
        }
        let (key, value) = decl
            .split_once(':')
            .ok_or_else(|| SvgError::Malformed(format!("style declaration {decl:?}")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "font-family" => style.font_family = Some(slot(value, |v| Some(v.to_string()), &key)?),
            "font-size" => style.font_size = Some(slot(value, parse_font_size, &key)?),
            "letter-spacing" => style.letter_spacing = Some(slot(value, parse_em, &key)?),
            "font-weight" => style.font_weight = Some(slot(value, parse_weight, &key)?),
            "color" => style.color = Some(slot(value, parse_color, &key)?),
            "text-align" => style.text_align = Some(slot(value, parse_align, &key)?),
            _ => {
                if let Some(existing) = style.extras.iter_mut().find(|(k, _)| *k == key) {
                    existing.1 = value.to_string();
                } else {
                    style.extras.push((key, value.to_string()));
                }
            }
        }
    }
    Ok(style)
}

fn slot<T>(value: &str, f: impl Fn(&str) -> Option<T>, key: &str) -> Result<Slot<T>, SvgError> {
    if value == UNKNOWN {
        return Ok(Slot::Unknown);
    }
    f(value)
        .map(Slot::Known)
        .ok_or_else(|| SvgError::Malformed(format!("invalid {key} value {value:?}")))
}

fn parse_font_size(v: &str) -> Option<u32> {
    let number = v.strip_suffix("px").unwrap_or(v).trim();
    let tenths = parse_decimal_scaled(number, 0)?;
    u32::try_from(tenths).ok()
}

fn parse_em(v: &str) -> Option<Em> {
    let number = v.strip_suffix("em").unwrap_or(v).trim();
    let milli = parse_decimal_scaled(number, 3)?;
    i32::try_from(milli).ok().map(Em::from_milli)
}

fn parse_weight(v: &str) -> Option<FontWeight> {
    match v.to_ascii_lowercase().as_str() {
        "normal" => Some(FontWeight::Normal),
        "bold" => Some(FontWeight::Bold),
        n => n.parse().ok().map(FontWeight::Numeric),
    }
}

fn parse_align(v: &str) -> Option<TextAlign> {
    match v.to_ascii_lowercase().as_str() {
        "left" => Some(TextAlign::Left),
        "center" => Some(TextAlign::Center),
        "right" => Some(TextAlign::Right),
        _ => None,
    }
}

/// Accepts hex (short or long) and CSS named colors; alpha is dropped.
pub fn parse_color(v: &str) -> Option<Color> {
    let c = csscolorparser::parse(v).ok()?;
    let [r, g, b, _] = c.to_rgba8();
    Some(Color([r, g, b]))
}
