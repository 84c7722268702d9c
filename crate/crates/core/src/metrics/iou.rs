use serde::{Deserialize, Serialize};

use crate::svg::{BBox, SlideDoc};

/// Directional coverage scores for one asset class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageScores {
    /// Mean fraction of each ground-truth box covered by the union of predictions.
    pub gt_coverage: f64,
    /// Mean fraction of each predicted box covered by the union of ground truth.
    pub pred_coverage: f64,
    /// `(gt_coverage + pred_coverage) / 2`.
    pub symmetric_iou: f64,
}

impl CoverageScores {
    fn new(gt_coverage: f64, pred_coverage: f64) -> Self {
        CoverageScores {
            gt_coverage,
            pred_coverage,
            symmetric_iou: (gt_coverage + pred_coverage) / 2.0,
        }
    }
}

/// Symmetric coverage IoU between two box sets.
///
/// Both sets empty scores 1 (absence predicted correctly); exactly one empty
/// scores 0. Zero-area boxes carry no area and are ignored.
pub fn symmetric_iou(gt_boxes: &[BBox], pred_boxes: &[BBox]) -> CoverageScores {
    let gt: Vec<BBox> = gt_boxes.iter().copied().filter(|b| b.area() > 0).collect();
    let pred: Vec<BBox> = pred_boxes.iter().copied().filter(|b| b.area() > 0).collect();
    match (gt.is_empty(), pred.is_empty()) {
        (true, true) => CoverageScores::new(1.0, 1.0),
        (true, false) | (false, true) => CoverageScores::new(0.0, 0.0),
        (false, false) => CoverageScores::new(mean_coverage(&gt, &pred), mean_coverage(&pred, &gt)),
    }
}

fn mean_coverage(targets: &[BBox], cover: &[BBox]) -> f64 {
    let sum: f64 = targets
        .iter()
        .map(|t| covered_area(t, cover) as f64 / t.area() as f64)
        .sum();
    sum / targets.len() as f64
}

/// Exact area of `target` covered by the union of `cover`, by coordinate
/// compression over the clipped boxes.
pub fn covered_area(target: &BBox, cover: &[BBox]) -> i64 {
    let clipped: Vec<(i32, i32, i32, i32)> = cover
        .iter()
        .filter_map(|c| {
            let x0 = c.left().max(target.left());
            let y0 = c.top().max(target.top());
            let x1 = c.right().min(target.right());
            let y1 = c.bottom().min(target.bottom());
            (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
        })
        .collect();
    if clipped.is_empty() {
        return 0;
    }
    let mut xs: Vec<i32> = clipped.iter().flat_map(|r| [r.0, r.2]).collect();
    let mut ys: Vec<i32> = clipped.iter().flat_map(|r| [r.1, r.3]).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0i64;
    for xi in 0..xs.len() - 1 {
        for yi in 0..ys.len() - 1 {
            let (cx, cy) = (xs[xi], ys[yi]);
            let covered = clipped.iter().any(|r| r.0 <= cx && cx < r.2 && r.1 <= cy && cy < r.3);
            if covered {
                area += i64::from(xs[xi + 1] - cx) * i64::from(ys[yi + 1] - cy);
            }
        }
    }
    area
}

/// Mean of the text-class and image-class symmetric IoUs.
pub fn miou(gt: &SlideDoc, pred: &SlideDoc) -> f64 {
    let text = symmetric_iou(&gt.text_boxes(), &pred.text_boxes()).symmetric_iou;
    let image = symmetric_iou(&gt.image_boxes(), &pred.image_boxes()).symmetric_iou;
    0.5 * (text + image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: i32, y: i32, w: i32, h: i32) -> BBox {
        BBox::from_tenths(x, y, w, h)
    }

    #[test]
    fn identical_boxes() {
        let s = symmetric_iou(&[b(0, 0, 100, 100)], &[b(0, 0, 100, 100)]);
        assert_eq!((s.gt_coverage, s.pred_coverage, s.symmetric_iou), (1.0, 1.0, 1.0));
    }

    #[test]
    fn half_width_prediction() {
        let s = symmetric_iou(&[b(0, 0, 100, 100)], &[b(0, 0, 50, 100)]);
        assert_eq!((s.gt_coverage, s.pred_coverage, s.symmetric_iou), (0.5, 1.0, 0.75));
    }

    #[test]
    fn two_halves_cover_fully() {
        let s = symmetric_iou(&[b(0, 0, 100, 100)], &[b(0, 0, 50, 100), b(50, 0, 50, 100)]);
        assert_eq!(s.gt_coverage, 1.0);
        assert_eq!(s.pred_coverage, 1.0);
    }

    #[test]
    fn overlapping_cover_not_double_counted() {
        assert_eq!(covered_area(&b(0, 0, 100, 100), &[b(0, 0, 60, 100), b(40, 0, 60, 100)]), 10_000);
    }

    #[test]
    fn empty_conventions() {
        assert_eq!(symmetric_iou(&[], &[]).symmetric_iou, 1.0);
        assert_eq!(symmetric_iou(&[b(0, 0, 1, 1)], &[]).symmetric_iou, 0.0);
        assert_eq!(symmetric_iou(&[], &[b(0, 0, 1, 1)]).symmetric_iou, 0.0);
    }

    #[test]
    fn disjoint_is_zero() {
        assert_eq!(symmetric_iou(&[b(0, 0, 10, 10)], &[b(500, 500, 10, 10)]).symmetric_iou, 0.0);
    }
}
