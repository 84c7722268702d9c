//! Slide document model and the strict SVG dialect used to exchange it.
//!
//! A slide is a root `<svg>` with pixel `width`/`height`, a full-canvas
//! background `<image>`, a `<g id="images">` group of `<image>` elements and
//! a `<g id="text">` group of `<foreignObject>` text blocks. All coordinates
//! are percentages of the canvas with one decimal digit.

mod model;
mod parse;
mod validate;
mod write;

pub use model::*;
pub use parse::{parse_color, parse_slide_svg, parse_style};
pub use validate::{validate, validate_complete, Violation};
pub(crate) use validate::has_raster_extension;
pub use write::{style_string, write_slide_svg};

#[derive(Debug, thiserror::Error)]
pub enum SvgError {
    #[error("malformed SVG: {0}")]
    Malformed(String),
    #[error("unsupported element <{0}>")]
    UnsupportedElement(String),
    #[error("root <svg> has no width/height")]
    MissingCanvas,
    #[error("document violates invariants: {}", join(.0))]
    InvariantViolation(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Serializes a document to canonical dialect text after checking its
/// invariants.
pub fn serialize_slide_svg(doc: &SlideDoc) -> Result<String, SvgError> {
    let violations = validate(doc);
    if !violations.is_empty() {
        return Err(SvgError::InvariantViolation(violations));
    }
    Ok(write_slide_svg(doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    const INITIAL_PREDICTION: &str = r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="720" height="405" fill="white">
  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="background.png" />
  <g id="images">
    <image x="35.3%" y="20.1%" width="60.2%" height="70.4%" href="image.png" />
  </g>
  <g id="text">
    <foreignObject x="1.8%" y="5.0%" width="40.0%" height="8.3%" overflow="visible">
      <div xmlns="http://www.w3.org/1999/xhtml" style="font-family: Inter; font-size: 24px; letter-spacing: 0.0em; color: #000000; text-align: left;">
        <div>MOLERE Algorithm</div>
      </div>
    </foreignObject>
  </g>
</svg>
"#;

    #[test]
    fn parses_initial_prediction_listing() {
        let doc = parse_slide_svg(INITIAL_PREDICTION).unwrap();
        assert_eq!((doc.width, doc.height), (720, 405));
        assert_eq!(doc.images.len(), 1);
        assert_eq!(doc.texts.len(), 1);
        assert_eq!(doc.images[0].placement.x, Slot::Known(Pct::from_tenths(353)));
        let style = &doc.texts[0].style;
        assert_eq!(style.font_family, Some(Slot::Known("Inter".to_string())));
        assert_eq!(style.font_size, Some(Slot::Known(24)));
        assert_eq!(style.letter_spacing, Some(Slot::Known(Em::from_milli(0))));
        assert_eq!(style.font_weight, None);
        assert_eq!(style.color, Some(Slot::Known(Color::BLACK)));
        assert_eq!(style.text_align, Some(Slot::Known(TextAlign::Left)));
        assert_eq!(doc.texts[0].lines, Slot::Known(vec!["MOLERE Algorithm".to_string()]));
    }

    #[test]
    fn canonical_text_is_a_fixpoint() {
        let doc = parse_slide_svg(INITIAL_PREDICTION).unwrap();
        assert_eq!(serialize_slide_svg(&doc).unwrap(), INITIAL_PREDICTION);
    }

    #[test]
    fn empty_groups_give_empty_doc() {
        let svg = r#"<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">
            <g id="images"></g><g id="text"/></svg>"#;
        let doc = parse_slide_svg(svg).unwrap();
        assert!(doc.images.is_empty() && doc.texts.is_empty());
        let out = serialize_slide_svg(&doc).unwrap();
        assert!(out.contains("<g id=\"images\">\n  </g>"));
        assert!(out.contains("<g id=\"text\">\n  </g>"));
    }

    #[test]
    fn serializes_one_decimal_percent() {
        let mut doc = SlideDoc::empty(720, 405);
        doc.images.push(ImageAsset {
            placement: BBox::from_percent(35.3, 10.0, 20.0, 30.0).into(),
            href: "image_1.png".into(),
        });
        let out = serialize_slide_svg(&doc).unwrap();
        assert!(out.contains(r#"<image x="35.3%" y="10.0%" width="20.0%" height="30.0%" href="image_1.png" />"#));
    }

    #[test]
    fn unknown_placeholders_round_trip() {
        let svg = r#"<svg xmlns="http://www.w3.org/2000/svg" width="792" height="612">
  <g id="images"><image x="UNKNOWN" y="UNKNOWN" width="UNKNOWN" height="UNKNOWN" href="image.png" /></g>
  <g id="text">
    <foreignObject x="UNKNOWN" y="UNKNOWN" width="UNKNOWN" height="UNKNOWN" overflow="visible">
      <div xmlns="http://www.w3.org/1999/xhtml" style="font-family: UNKNOWN; letter-spacing: UNKNOWN; font-weight: UNKNOWN; color: UNKNOWN; text-align: UNKNOWN;">
        <div>
          UNKNOWN
        </div>
      </div>
    </foreignObject>
  </g>
</svg>"#;
        let doc = parse_slide_svg(svg).unwrap();
        assert_eq!(doc.images[0].placement, Placement::unknown());
        assert_eq!(doc.texts[0].lines, Slot::Unknown);
        assert_eq!(doc.texts[0].style.font_size, None);
        let out = write_slide_svg(&doc);
        assert_eq!(parse_slide_svg(&out).unwrap(), doc);
        assert_eq!(out.matches(UNKNOWN).count(), 4 + 10);
    }

    #[test]
    fn named_color_canonicalizes_to_hex() {
        let svg = INITIAL_PREDICTION.replace("color: #000000", "color: blue");
        let doc = parse_slide_svg(&svg).unwrap();
        assert!(write_slide_svg(&doc).contains("color: #0000ff;"));
    }

    #[test]
    fn xlink_href_accepted() {
        let svg = INITIAL_PREDICTION.replace(r#"href="image.png""#, r#"xlink:href="image.png""#);
        assert_eq!(parse_slide_svg(&svg).unwrap().images[0].href, "image.png");
    }

    #[test]
    fn text_escaping_round_trips() {
        let svg = INITIAL_PREDICTION.replace("MOLERE Algorithm", "A &amp; B &lt; C");
        let doc = parse_slide_svg(&svg).unwrap();
        assert_eq!(doc.texts[0].line_texts(), ["A & B < C"]);
        assert_eq!(write_slide_svg(&doc), svg);
    }

    #[test]
    fn empty_line_divs_dropped() {
        let svg = INITIAL_PREDICTION.replace(
            "<div>MOLERE Algorithm</div>",
            "<div>one</div><div>  </div><div>two</div>",
        );
        let doc = parse_slide_svg(&svg).unwrap();
        assert_eq!(doc.texts[0].line_texts(), ["one", "two"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_slide_svg("<svg"), Err(SvgError::Malformed(_))));
        assert!(matches!(
            parse_slide_svg(r#"<svg xmlns="http://www.w3.org/2000/svg"><g id="images"/></svg>"#),
            Err(SvgError::MissingCanvas)
        ));
        let with_path = INITIAL_PREDICTION.replace("<g id=\"images\">", "<path d=\"M0 0\"/><g id=\"images\">");
        match parse_slide_svg(&with_path) {
            Err(SvgError::UnsupportedElement(name)) => assert_eq!(name, "path"),
            other => panic!("unexpected {other:?}"),
        }
        let with_span = INITIAL_PREDICTION.replace("<div>MOLERE", "<div><span>x</span>MOLERE");
        assert!(matches!(parse_slide_svg(&with_span), Err(SvgError::UnsupportedElement(_))));
        let pixels = INITIAL_PREDICTION.replace("x=\"35.3%\"", "x=\"35.3\"");
        assert!(matches!(parse_slide_svg(&pixels), Err(SvgError::Malformed(_))));
    }

    #[test]
    fn serialize_rejects_invalid() {
        let mut doc = SlideDoc::empty(10, 10);
        doc.images.push(ImageAsset {
            placement: BBox::from_tenths(0, 0, 0, 10).into(),
            href: "a.png".into(),
        });
        assert!(matches!(serialize_slide_svg(&doc), Err(SvgError::InvariantViolation(v)) if v.len() == 1));
    }

    #[test]
    fn out_of_canvas_boxes_parse() {
        let svg = INITIAL_PREDICTION.replace("width=\"60.2%\"", "width=\"80.0%\"");
        let doc = parse_slide_svg(&svg).unwrap();
        assert_eq!(doc.images[0].placement.bbox().unwrap().right(), 1153);
        assert!(validate(&doc).is_empty());
    }
}
