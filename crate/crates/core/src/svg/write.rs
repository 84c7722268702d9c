use std::fmt::Write as _;

use super::model::*;

const SVG_NS: &str = "http://www.w3.org/2000/svg";
const XLINK_NS: &str = "http://www.w3.org/1999/xlink";
const XHTML_NS: &str = "http://www.w3.org/1999/xhtml";

/// Writes the canonical text of a document without validating it.
///
/// Templates (which carry placeholders and may repeat hrefs) go through this
/// directly; [`super::serialize_slide_svg`] validates first.
pub fn write_slide_svg(doc: &SlideDoc) -> String {
    let mut out = String::with_capacity(512 + 256 * (doc.images.len() + doc.texts.len()));
    let _ = writeln!(
        out,
        r#"<svg xmlns="{SVG_NS}" xmlns:xlink="{XLINK_NS}" width="{}" height="{}" fill="white">"#,
        doc.width, doc.height
    );
    let _ = writeln!(
        out,
        r#"  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="{}" />"#,
        escape_attr(&doc.background.href)
    );
    out.push_str("  <g id=\"images\">\n");
    for img in &doc.images {
        let _ = writeln!(
            out,
            r#"    <image {} href="{}" />"#,
            placement_attrs(&img.placement),
            escape_attr(&img.href)
        );
    }
    out.push_str("  </g>\n");
    out.push_str("  <g id=\"text\">\n");
    for text in &doc.texts {
        let _ = writeln!(
            out,
            r#"    <foreignObject {} overflow="visible">"#,
            placement_attrs(&text.placement)
        );
        let _ = writeln!(
            out,
            r#"      <div xmlns="{XHTML_NS}" style="{}">"#,
            escape_attr(&style_string(&text.style))
        );
        match &text.lines {
            Slot::Unknown => {
                let _ = writeln!(out, "        <div>{UNKNOWN}</div>");
            }
            Slot::Known(lines) => {
                for line in lines {
                    let _ = writeln!(out, "        <div>{}</div>", escape_text(line));
                }
            }
        }
        out.push_str("      </div>\n");
        out.push_str("    </foreignObject>\n");
    }
    out.push_str("  </g>\n");
    out.push_str("</svg>\n");
    out
}

fn placement_attrs(p: &Placement) -> String {
    format!(
        r#"x="{}" y="{}" width="{}" height="{}""#,
        pct(&p.x),
        pct(&p.y),
        pct(&p.w),
        pct(&p.h)
    )
}

fn pct(slot: &Slot<Pct>) -> String {
    match slot {
        Slot::Known(v) => format!("{v}%"),
        Slot::Unknown => UNKNOWN.to_string(),
    }
}

/// Renders a style in the canonical key order followed by any extras.
pub fn style_string(style: &TextStyle) -> String {
    fn push<T>(out: &mut String, key: &str, slot: &Option<Slot<T>>, fmt: impl Fn(&T) -> String) {
        if let Some(slot) = slot {
            let value = match slot {
                Slot::Known(v) => fmt(v),
                Slot::Unknown => UNKNOWN.to_string(),
            };
            if !out.is_empty() {
                out.push(' ');
            }
            let _ = write!(out, "{key}: {value};");
        }
    }
    let mut out = String::new();
    push(&mut out, "font-family", &style.font_family, |v| v.clone());
    push(&mut out, "font-size", &style.font_size, |v| format!("{v}px"));
    push(&mut out, "letter-spacing", &style.letter_spacing, Em::to_string);
    push(&mut out, "font-weight", &style.font_weight, FontWeight::to_string);
    push(&mut out, "color", &style.color, Color::to_string);
    push(&mut out, "text-align", &style.text_align, TextAlign::to_string);
    for (k, v) in &style.extras {
        if !out.is_empty() {
            out.push(' ');
        }
        let _ = write!(out, "{k}: {v};");
    }
    out
}

fn escape_text(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_attr(s: &str) -> String {
    escape_text(s).replace('"', "&quot;")
}
