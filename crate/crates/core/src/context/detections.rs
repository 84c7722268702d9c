use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ContextError;
use crate::svg::{BBox, SlideDoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetClass {
    Image,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub cls: AssetClass,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    pub boxes: Vec<Detection>,
}

impl DetectionSet {
    pub fn new(boxes: Vec<Detection>) -> Self {
        DetectionSet { boxes }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Detections taken straight from a document's boxes at confidence 1.
    pub fn from_doc(doc: &SlideDoc) -> Self {
        let images = doc.image_boxes().into_iter().map(|bbox| Detection {
            cls: AssetClass::Image,
            bbox,
            confidence: 1.0,
        });
        let texts = doc.text_boxes().into_iter().map(|bbox| Detection {
            cls: AssetClass::Text,
            bbox,
            confidence: 1.0,
        });
        DetectionSet {
            boxes: images.chain(texts).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBox {
    cls: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    conf: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawLine {
    image_path: String,
    boxes: Vec<RawBox>,
}

/// Reads line-delimited detections `{image_path, boxes: [{cls, x, y, w, h, conf}]}`
/// with coordinates in percent. Blank lines are skipped; a repeated
/// `image_path` appends to the earlier entry.
pub fn parse_detections_jsonl(text: &str) -> Result<BTreeMap<String, DetectionSet>, ContextError> {
    let mut out: BTreeMap<String, DetectionSet> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawLine = serde_json::from_str(line)
            .map_err(|e| ContextError::InvalidDetection(format!("line {}: {e}", lineno + 1)))?;
        let set = out.entry(raw.image_path).or_default();
        for b in raw.boxes {
            let cls = match b.cls.to_ascii_lowercase().as_str() {
                "image" => AssetClass::Image,
                "text" => AssetClass::Text,
                other => {
                    return Err(ContextError::InvalidDetection(format!(
                        "line {}: unknown class {other:?}",
                        lineno + 1
                    )))
                }
            };
            if ![b.x, b.y, b.w, b.h, b.conf].iter().all(|v| v.is_finite()) {
                return Err(ContextError::InvalidDetection(format!("line {}: non-finite value", lineno + 1)));
            }
            set.boxes.push(Detection {
                cls,
                bbox: BBox::from_percent(b.x, b.y, b.w, b.h),
                confidence: b.conf,
            });
        }
    }
    Ok(out)
}

/// Inverse of [`parse_detections_jsonl`] for one image.
pub fn detections_jsonl_line(image_path: &str, set: &DetectionSet) -> String {
    let raw = RawLine {
        image_path: image_path.to_string(),
        boxes: set
            .boxes
            .iter()
            .map(|d| RawBox {
                cls: match d.cls {
                    AssetClass::Image => "image".into(),
                    AssetClass::Text => "text".into(),
                },
                x: d.bbox.x.percent(),
                y: d.bbox.y.percent(),
                w: d.bbox.w.percent(),
                h: d.bbox.h.percent(),
                conf: d.confidence,
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("detections serialize")
}
