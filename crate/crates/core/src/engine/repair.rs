//! Recovering SVG text from raw model responses.

pub const STRIP_FENCES: &str = "strip_fences";
pub const TRIM_AMBLE: &str = "trim_amble";
pub const CLOSE_TRAILING_TAG: &str = "close_trailing_tag";

/// Applies the repairs in order and reports which ones changed the text.
///
/// 1. `strip_fences`: drop markdown fence lines (lines starting with three backticks).
/// 2. `trim_amble`: cut everything before the first `<svg` and after the last `</svg>`.
/// 3. `close_trailing_tag`: if exactly one element is left open, close it.
///
/// Surrounding whitespace is trimmed silently. Input without any matching
/// repair is returned as is.
pub fn repair_svg_text_logged(raw: &str) -> (String, Vec<&'static str>) {
    let mut repairs = Vec::new();
    let mut text = raw.trim().to_string();

    if text.lines().any(is_fence) {
        text = text.lines().filter(|l| !is_fence(l)).collect::<Vec<_>>().join("\n");
        text = text.trim().to_string();
        repairs.push(STRIP_FENCES);
    }

    if let Some(start) = text.find("<svg") {
        let end = text
            .rfind("</svg>")
            .map(|i| i + "</svg>".len())
            .filter(|&e| e > start)
            .unwrap_or(text.len());
        let trimmed = text[start..end].trim();
        if trimmed.len() != text.len() {
            text = trimmed.to_string();
            repairs.push(TRIM_AMBLE);
        }
    }

    if let Some(name) = single_unclosed_tag(&text) {
        text.push_str(&format!("\n</{name}>"));
        repairs.push(CLOSE_TRAILING_TAG);
    }
    (text, repairs)
}

pub fn repair_svg_text(raw: &str) -> String {
    repair_svg_text_logged(raw).0
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// Name of the only element still open at the end of `text`, provided the
/// text ends outside any tag and every close tag matched.
fn single_unclosed_tag(text: &str) -> Option<String> {
    if !text.starts_with('<') || !text.ends_with('>') {
        return None;
    }
    let mut stack: Vec<&str> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        rest = &rest[open..];
        if let Some(after) = rest.strip_prefix("<!--") {
            let close = after.find("-->")?;
            rest = &after[close + 3..];
            continue;
        }
        let close = find_tag_end(rest)?;
        let tag = &rest[1..close];
        rest = &rest[close + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            if stack.pop() != Some(name.trim()) {
                return None;
            }
        } else if !tag.ends_with('/') {
            let name = tag.split(|c: char| c.is_whitespace()).next().unwrap_or("");
            if name.is_empty() {
                return None;
            }
            stack.push(name);
        }
    }
    (stack.len() == 1).then(|| stack[0].to_string())
}

/// Index of the `>` ending the tag that starts `s`, skipping quoted values.
fn find_tag_end(s: &str) -> Option<usize> {
    let mut quote: Option<char> = None;
    for (i, c) in s.char_indices().skip(1) {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '"' || c == '\'' => quote = Some(c),
            None if c == '>' => return Some(i),
            None => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const SVG: &str = r#"<svg width="1" height="1"><g id="text"></g></svg>"#;

    #[test]
    fn fences() {
        let (out, repairs) = repair_svg_text_logged(&format!("```svg\n{SVG}\n```"));
        assert_eq!(out, SVG);
        assert_eq!(repairs, vec![STRIP_FENCES]);
    }

    #[test]
    fn amble() {
        let (out, repairs) = repair_svg_text_logged(&format!("Here is your SVG: {SVG} Hope this helps"));
        assert_eq!(out, SVG);
        assert_eq!(repairs, vec![TRIM_AMBLE]);
    }

    #[test]
    fn unclosed_root() {
        let (out, repairs) = repair_svg_text_logged(r#"<svg a=">"><g id="x"></g>"#);
        assert_eq!(out, "<svg a=\">\"><g id=\"x\"></g>\n</svg>");
        assert_eq!(repairs, vec![CLOSE_TRAILING_TAG]);
    }

    #[test]
    fn clean_input_unchanged() {
        let (out, repairs) = repair_svg_text_logged(SVG);
        assert_eq!(out, SVG);
        assert!(repairs.is_empty());
        assert_eq!(repair_svg_text("no markup here"), "no markup here");
    }

    #[test]
    fn two_open_tags_left_alone() {
        let text = "<svg><g>";
        assert_eq!(repair_svg_text(text), text);
    }
}
