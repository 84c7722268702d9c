use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    build_partial, build_prompt, build_refinement_context, build_skeleton, ContextError, ContextKind, DetectionSet,
    PartialOptions,
};
use crate::svg::{serialize_slide_svg, SlideDoc};

/// A ground-truth slide available for export.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub id: String,
    pub image_path: String,
    pub doc: SlideDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub id: String,
    pub context_kind: ContextKind,
    pub prompt: String,
    pub image_path: String,
    pub target_svg: String,
}

/// Emits a skeleton and a partial record for every sample, plus two initial
/// records (priors from a skeleton start and from a partial start) for a
/// seeded random half of the corpus of size `floor(N/2)`.
///
/// Skeleton asset counts come from the ground truth. Output is ordered by
/// sample id, then skeleton, partial, initial-from-skeleton,
/// initial-from-partial.
pub fn export_training_variants(
    corpus: &[TrainingSample],
    seed: u64,
    partial_opts: &PartialOptions,
    det_source: &dyn Fn(&TrainingSample) -> Result<DetectionSet, ContextError>,
    prior_source: &dyn Fn(&TrainingSample, ContextKind) -> Option<SlideDoc>,
) -> Result<Vec<TrainingRecord>, ContextError> {
    if corpus.is_empty() {
        return Err(ContextError::EmptyCorpus);
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| corpus[a].id.cmp(&corpus[b].id));

    let mut shuffled = order.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut refine_half = vec![false; corpus.len()];
    for &i in &shuffled[..corpus.len() / 2] {
        refine_half[i] = true;
    }

    let mut records = Vec::with_capacity(corpus.len() * 3);
    for i in order {
        let sample = &corpus[i];
        let target_svg = serialize_slide_svg(&sample.doc)?;
        let (w, h) = (sample.doc.width, sample.doc.height);
        let record = |suffix: &str, kind: ContextKind, prompt: String| TrainingRecord {
            id: format!("{}:{suffix}", sample.id),
            context_kind: kind,
            prompt,
            image_path: sample.image_path.clone(),
            target_svg: target_svg.clone(),
        };

        let skeleton = build_skeleton(sample.doc.images.len(), sample.doc.texts.len(), w, h);
        records.push(record("skeleton", ContextKind::Skeleton, build_prompt(&skeleton)));

        let partial = build_partial(&det_source(sample)?, w, h, partial_opts)?;
        records.push(record("partial", ContextKind::Partial, build_prompt(&partial)));

        if refine_half[i] {
            for start in [ContextKind::Skeleton, ContextKind::Partial] {
                let prior = prior_source(sample, start).ok_or_else(|| ContextError::MissingPrior(sample.id.clone()))?;
                let ctx = build_refinement_context(&prior)?;
                let suffix = format!("initial-from-{}", start.as_str());
                records.push(record(&suffix, ContextKind::Initial, build_prompt(&ctx)));
            }
        }
    }
    Ok(records)
}

pub fn records_jsonl(records: &[TrainingRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}
