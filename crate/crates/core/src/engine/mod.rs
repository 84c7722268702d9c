//! Derendering passes against a pluggable model backend, response repair,
//! and iterative refinement.

mod backend;
mod mock;
mod repair;

pub use backend::{
    env_name, Backend, BackendError, BackendRequest, Counting, HttpBackend, RetryPolicy, Retrying, Scripted,
    DEFAULT_MAX_TOKENS,
};
pub use mock::{jitter, raster_key, MockOracle, Perturbation};
pub use repair::{repair_svg_text, repair_svg_text_logged, CLOSE_TRAILING_TAG, STRIP_FENCES, TRIM_AMBLE};

use rayon::prelude::*;

use crate::context::{
    build_partial, build_prompt, build_refinement_context, build_skeleton, AuxContext, ContextError, ContextKind,
    DetectionSet, PartialOptions,
};
use crate::raster::{encode_png, resize_max_side, Raster, RasterError, DEFAULT_MAX_SIDE};
use crate::svg::{parse_slide_svg, validate_complete, SlideDoc, Violation};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("no parseable SVG in response: {0}")]
    UnrepairableResponse(String),
    #[error("response parsed but is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidDoc(Vec<Violation>),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerenderResult {
    pub doc: SlideDoc,
    pub raw_response: String,
    pub repairs_applied: Vec<String>,
    /// 0 for the initial pass, then one more per refinement.
    pub pass_index: usize,
    pub context_kind: ContextKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationParams {
    pub max_tokens: u32,
    pub temperature: f32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }
}

/// Turns a raw response into a validated document.
pub fn parse_response(raw: &str) -> Result<(SlideDoc, Vec<String>), EngineError> {
    let (text, repairs) = repair_svg_text_logged(raw);
    let doc = parse_slide_svg(&text).map_err(|e| EngineError::UnrepairableResponse(e.to_string()))?;
    let violations = validate_complete(&doc);
    if !violations.is_empty() {
        return Err(EngineError::InvalidDoc(violations));
    }
    Ok((doc, repairs.into_iter().map(String::from).collect()))
}

/// One pass: prompt from `ctx`, backend call, repair, parse, validate.
pub fn derender_once(
    raster: &Raster,
    ctx: &AuxContext,
    backend: &dyn Backend,
    params: &GenerationParams,
) -> Result<DerenderResult, EngineError> {
    let mut req = BackendRequest::new(build_prompt(ctx), encode_png(raster)?);
    req.max_tokens = params.max_tokens;
    req.temperature = params.temperature;
    let raw = backend.generate(&req)?;
    let (doc, repairs_applied) = parse_response(&raw)?;
    tracing::debug!(backend = backend.name(), kind = ctx.kind.as_str(), repairs = ?repairs_applied, "pass done");
    Ok(DerenderResult {
        doc,
        raw_response: raw,
        repairs_applied,
        pass_index: 0,
        context_kind: ctx.kind,
    })
}

/// One further pass with the prior prediction as an initial context.
pub fn refine(
    raster: &Raster,
    prior: &DerenderResult,
    backend: &dyn Backend,
    params: &GenerationParams,
) -> Result<DerenderResult, EngineError> {
    let ctx = build_refinement_context(&prior.doc)?;
    let mut out = derender_once(raster, &ctx, backend, params)?;
    out.pass_index = prior.pass_index + 1;
    Ok(out)
}

/// How the first pass is primed.
#[derive(Debug, Clone, PartialEq)]
pub enum StartContext {
    /// Placeholder counts for the skeleton template.
    Skeleton { n_images: usize, n_texts: usize },
    Partial { detections: DetectionSet, options: PartialOptions },
}

impl StartContext {
    pub fn build(&self, width: u32, height: u32) -> Result<AuxContext, ContextError> {
        match self {
            StartContext::Skeleton { n_images, n_texts } => Ok(build_skeleton(*n_images, *n_texts, width, height)),
            StartContext::Partial { detections, options } => build_partial(detections, width, height, options),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub refine_steps: usize,
    pub max_side: u32,
    pub params: GenerationParams,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            refine_steps: 0,
            max_side: DEFAULT_MAX_SIDE,
            params: GenerationParams::default(),
        }
    }
}

/// Every pass of a pipeline run, oldest first, plus the raster the model saw.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub input: Raster,
    pub passes: Vec<DerenderResult>,
}

impl PipelineRun {
    pub fn final_result(&self) -> &DerenderResult {
        self.passes.last().expect("pipeline has at least one pass")
    }
}

/// Resize, build the start context, run the first pass, then refine
/// `refine_steps` times. Issues exactly `1 + refine_steps` backend calls on
/// success.
pub fn derender_pipeline(
    raster: &Raster,
    start: &StartContext,
    backend: &dyn Backend,
    opts: &PipelineOptions,
) -> Result<PipelineRun, EngineError> {
    let input = resize_max_side(raster, opts.max_side);
    let ctx = start.build(input.width(), input.height())?;
    let mut passes = vec![derender_once(&input, &ctx, backend, &opts.params)?];
    for _ in 0..opts.refine_steps {
        let next = refine(&input, passes.last().expect("non-empty"), backend, &opts.params)?;
        passes.push(next);
    }
    Ok(PipelineRun { input, passes })
}

/// Maps `f` over `items` on a pool of `parallelism` threads, keeping input order.
pub fn par_map<T, R, F>(items: &[T], parallelism: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| items.par_iter().map(&f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::{write_slide_svg, BBox, Color, ImageAsset, Slot, TextAsset, TextStyle};

    fn gt() -> (Raster, SlideDoc) {
        let raster = Raster::from_fn(40, 20, |x, y| [(x * 6) as u8, (y * 12) as u8, 50]);
        let mut doc = SlideDoc::empty(40, 20);
        doc.images.push(ImageAsset {
            placement: BBox::from_tenths(550, 100, 400, 400).into(),
            href: "image_1.png".into(),
        });
        doc.texts.push(TextAsset {
            placement: BBox::from_tenths(50, 100, 400, 400).into(),
            style: TextStyle {
                font_family: Some(Slot::Known("Inter".into())),
                font_size: Some(Slot::Known(10)),
                color: Some(Slot::Known(Color::BLACK)),
                ..TextStyle::default()
            },
            lines: Slot::Known(vec!["Title".into()]),
        });
        (raster, doc)
    }

    fn skeleton() -> StartContext {
        StartContext::Skeleton { n_images: 1, n_texts: 1 }
    }

    #[test]
    fn oracle_single_pass() {
        let (r, d) = gt();
        let oracle = Counting::new(MockOracle::new([(r.clone(), d.clone())]));
        let run = derender_pipeline(&r, &skeleton(), &oracle, &PipelineOptions::default()).unwrap();
        assert_eq!(run.passes.len(), 1);
        assert_eq!(run.final_result().doc, d);
        assert_eq!(oracle.calls(), 1);
    }

    #[test]
    fn call_count_matches_refine_steps() {
        let (r, d) = gt();
        for steps in 0..4 {
            let oracle = Counting::new(MockOracle::new([(r.clone(), d.clone())]));
            let opts = PipelineOptions {
                refine_steps: steps,
                ..PipelineOptions::default()
            };
            let run = derender_pipeline(&r, &skeleton(), &oracle, &opts).unwrap();
            assert_eq!(oracle.calls(), 1 + steps);
            assert_eq!(run.final_result().pass_index, steps);
            assert_eq!(run.final_result().doc, d);
        }
    }

    #[test]
    fn refinement_corrects_perturbed_start() {
        let (r, d) = gt();
        let oracle = MockOracle::new([(r.clone(), d.clone())]).with_perturbation(Perturbation {
            max_percent: 4.0,
            seed: 11,
        });
        let start = StartContext::Partial {
            detections: DetectionSet::from_doc(&d),
            options: PartialOptions::default(),
        };
        let opts = PipelineOptions {
            refine_steps: 1,
            ..PipelineOptions::default()
        };
        let run = derender_pipeline(&r, &start, &oracle, &opts).unwrap();
        assert_ne!(run.passes[0].doc, d);
        assert_eq!(run.passes[1].doc, d);
        assert_eq!(run.passes[1].context_kind, ContextKind::Initial);
    }

    #[test]
    fn fenced_response_repaired() {
        let (r, d) = gt();
        let backend = Scripted::new(vec![Ok(format!("```svg\n{}```", write_slide_svg(&d)))]);
        let res = derender_once(&r, &build_skeleton(1, 1, 40, 20), &backend, &GenerationParams::default()).unwrap();
        assert_eq!(res.doc, d);
        assert_eq!(res.repairs_applied, vec![STRIP_FENCES.to_string()]);
    }

    #[test]
    fn prose_is_unrepairable() {
        let (r, _) = gt();
        let backend = Scripted::new(vec![Ok("I cannot help with that.".into())]);
        let err = derender_once(&r, &build_skeleton(1, 1, 40, 20), &backend, &GenerationParams::default());
        assert!(matches!(err, Err(EngineError::UnrepairableResponse(_))));
    }

    #[test]
    fn placeholder_answer_is_invalid() {
        let (r, _) = gt();
        let backend = Scripted::new(vec![Ok(build_skeleton(1, 0, 40, 20).svg_text)]);
        let err = derender_once(&r, &build_skeleton(1, 0, 40, 20), &backend, &GenerationParams::default());
        assert!(matches!(err, Err(EngineError::InvalidDoc(v)) if !v.is_empty()));
    }

    #[test]
    fn refine_on_oracle_prior_is_fixpoint() {
        let (r, d) = gt();
        let oracle = MockOracle::new([(r.clone(), d.clone())]);
        let first = derender_once(&r, &build_skeleton(1, 1, 40, 20), &oracle, &GenerationParams::default()).unwrap();
        let second = refine(&r, &first, &oracle, &GenerationParams::default()).unwrap();
        assert_eq!(second.doc, first.doc);
        assert_eq!(second.pass_index, 1);
    }

    #[test]
    fn par_map_keeps_order() {
        let v: Vec<usize> = (0..50).collect();
        assert_eq!(par_map(&v, 4, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }
}
