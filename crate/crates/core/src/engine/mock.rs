use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::backend::{Backend, BackendError, BackendRequest};
use crate::context::PROMPT_PREFIX;
use crate::raster::{decode_png, read_png, resize_max_side, Raster};
use crate::svg::{parse_slide_svg, write_slide_svg, BBox, Placement, SlideDoc, UNKNOWN};

/// Content hash of a decoded raster (dimensions and RGB bytes).
pub fn raster_key(r: &Raster) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(r.width().to_le_bytes());
    h.update(r.height().to_le_bytes());
    h.update(r.as_raw());
    h.finalize().into()
}

/// Bounding-box jitter applied to answers for non-initial contexts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    /// Maximum shift of x and y, in percent.
    pub max_percent: f64,
    pub seed: u64,
}

/// Answers every request with the ground truth for the attached raster.
///
/// Rasters are matched by content, so the oracle must be built from images
/// at the size the engine sends (after resizing). With a perturbation set,
/// answers to skeleton and partial contexts have their boxes jittered while
/// answers to initial contexts stay exact.
pub struct MockOracle {
    truth: HashMap<[u8; 32], SlideDoc>,
    perturbation: Option<Perturbation>,
}

impl MockOracle {
    pub fn new(pairs: impl IntoIterator<Item = (Raster, SlideDoc)>) -> Self {
        MockOracle {
            truth: pairs.into_iter().map(|(r, d)| (raster_key(&r), d)).collect(),
            perturbation: None,
        }
    }

    pub fn with_perturbation(mut self, p: Perturbation) -> Self {
        self.perturbation = Some(p);
        self
    }

    /// Loads a JSON manifest mapping image paths to ground-truth SVG paths,
    /// both relative to the manifest's directory unless absolute. Images are
    /// resized to `max_side` before keying.
    pub fn from_manifest(path: &Path, max_side: u32) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let manifest: BTreeMap<String, String> =
            serde_json::from_str(&text).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut pairs = Vec::with_capacity(manifest.len());
        for (image, svg) in manifest {
            let img = read_png(base.join(&image)).map_err(|e| BackendError::Config(format!("{image}: {e}")))?;
            let svg_text =
                std::fs::read_to_string(base.join(&svg)).map_err(|e| BackendError::Config(format!("{svg}: {e}")))?;
            let doc = parse_slide_svg(&svg_text).map_err(|e| BackendError::Config(format!("{svg}: {e}")))?;
            pairs.push((resize_max_side(&img, max_side), doc));
        }
        Ok(Self::new(pairs))
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }
}

impl Backend for MockOracle {
    fn name(&self) -> &str {
        "mock"
    }

    fn generate(&self, req: &BackendRequest) -> Result<String, BackendError> {
        req.check()?;
        let raster = decode_png(&req.image).map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let key = raster_key(&raster);
        let doc = self
            .truth
            .get(&key)
            .ok_or_else(|| BackendError::Remote("image not in oracle manifest".into()))?;
        let template = req.prompt.strip_prefix(PROMPT_PREFIX).unwrap_or(&req.prompt);
        match self.perturbation {
            Some(p) if template.contains(UNKNOWN) => {
                let seed = p.seed ^ u64::from_le_bytes(key[..8].try_into().expect("8 bytes"));
                Ok(write_slide_svg(&jitter(doc, p.max_percent, seed)))
            }
            _ => Ok(write_slide_svg(doc)),
        }
    }
}

/// Shifts every box by up to `max_percent` in x and y, keeping it on the canvas.
pub fn jitter(doc: &SlideDoc, max_percent: f64, seed: u64) -> SlideDoc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = (max_percent * 10.0).round() as i32;
    let mut shift = |p: &mut Placement| {
        if let Some(b) = p.bbox() {
            let dx = rng.random_range(-max..=max);
            let dy = rng.random_range(-max..=max);
            let x = (b.left() + dx).clamp(0, (1000 - b.w.tenths()).max(0));
            let y = (b.top() + dy).clamp(0, (1000 - b.h.tenths()).max(0));
            *p = BBox::from_tenths(x, y, b.w.tenths(), b.h.tenths()).into();
        }
    };
    let mut out = doc.clone();
    for img in &mut out.images {
        shift(&mut img.placement);
    }
    for text in &mut out.texts {
        shift(&mut text.placement);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{build_prompt, build_refinement_context, build_skeleton};
    use crate::raster::encode_png;
    use crate::svg::ImageAsset;

    fn sample() -> (Raster, SlideDoc) {
        let r = Raster::from_fn(8, 4, |x, y| [x as u8 * 20, y as u8 * 40, 7]);
        let mut d = SlideDoc::empty(8, 4);
        d.images.push(ImageAsset {
            placement: BBox::from_tenths(100, 200, 300, 400).into(),
            href: "image_1.png".into(),
        });
        (r, d)
    }

    #[test]
    fn answers_ground_truth() {
        let (r, d) = sample();
        let oracle = MockOracle::new([(r.clone(), d.clone())]);
        let req = BackendRequest::new(build_prompt(&build_skeleton(1, 0, 8, 4)), encode_png(&r).unwrap());
        assert_eq!(parse_slide_svg(&oracle.generate(&req).unwrap()).unwrap(), d);
    }

    #[test]
    fn unknown_image() {
        let (r, d) = sample();
        let oracle = MockOracle::new([(r, d)]);
        let other = Raster::filled(8, 4, [0; 3]);
        let req = BackendRequest::new(build_prompt(&build_skeleton(1, 0, 8, 4)), encode_png(&other).unwrap());
        assert!(matches!(oracle.generate(&req), Err(BackendError::Remote(_))));
    }

    #[test]
    fn perturbation_only_for_templates() {
        let (r, d) = sample();
        let p = Perturbation {
            max_percent: 5.0,
            seed: 3,
        };
        let oracle = MockOracle::new([(r.clone(), d.clone())]).with_perturbation(p);
        let png = encode_png(&r).unwrap();
        let skel = BackendRequest::new(build_prompt(&build_skeleton(1, 0, 8, 4)), png.clone());
        let jittered = parse_slide_svg(&oracle.generate(&skel).unwrap()).unwrap();
        let (a, b) = (jittered.image_boxes()[0], d.image_boxes()[0]);
        assert!((a.left() - b.left()).abs() <= 50 && (a.top() - b.top()).abs() <= 50);
        assert_eq!((a.w, a.h), (b.w, b.h));
        assert_eq!(oracle.generate(&skel).unwrap(), oracle.generate(&skel).unwrap());

        let init = BackendRequest::new(build_prompt(&build_refinement_context(&jittered).unwrap()), png);
        assert_eq!(parse_slide_svg(&oracle.generate(&init).unwrap()).unwrap(), d);
    }
}
