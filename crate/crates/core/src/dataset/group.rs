use crate::context::{AssetClass, DetectionSet};
use crate::svg::{BBox, Slot, TextAsset};

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so component ids follow first appearance.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Partition of `boxes` into connected components of the overlap graph,
/// where two boxes are linked if they overlap with positive area or both
/// overlap a common region. Components are listed by their first member;
/// members stay in input order.
pub fn overlap_components(boxes: &[BBox], regions: &[BBox]) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(boxes.len());
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if boxes[i].overlaps(&boxes[j]) {
                uf.union(i, j);
            }
        }
    }
    for region in regions {
        let mut first: Option<usize> = None;
        for (i, b) in boxes.iter().enumerate() {
            if b.overlaps(region) {
                match first {
                    Some(f) => uf.union(f, i),
                    None => first = Some(i),
                }
            }
        }
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut slot_of_root: Vec<Option<usize>> = vec![None; boxes.len()];
    for i in 0..boxes.len() {
        let r = uf.find(i);
        match slot_of_root[r] {
            Some(c) => components[c].push(i),
            None => {
                slot_of_root[r] = Some(components.len());
                components.push(vec![i]);
            }
        }
    }
    components
}

/// Merges text blocks that overlap each other or share a text detection.
///
/// A merged block takes the union box, the members' lines in reading order
/// (top edge, then left edge) and the style of the largest member. Blocks
/// with unresolved placement are passed through untouched.
pub fn group_text_boxes(texts: &[TextAsset], det: &DetectionSet) -> Vec<TextAsset> {
    let placed: Vec<usize> = (0..texts.len()).filter(|&i| texts[i].placement.bbox().is_some()).collect();
    let boxes: Vec<BBox> = placed.iter().map(|&i| texts[i].placement.bbox().expect("filtered")).collect();
    let regions: Vec<BBox> = det
        .boxes
        .iter()
        .filter(|d| d.cls == AssetClass::Text)
        .map(|d| d.bbox)
        .collect();

    let mut merged_at: Vec<Option<TextAsset>> = vec![None; texts.len()];
    for component in overlap_components(&boxes, &regions) {
        let members: Vec<usize> = component.iter().map(|&c| placed[c]).collect();
        let first = members[0];
        if members.len() == 1 {
            merged_at[first] = Some(texts[first].clone());
            continue;
        }
        let bbox_of = |i: usize| texts[i].placement.bbox().expect("placed");
        let union = members[1..].iter().fold(bbox_of(first), |acc, &i| acc.union(&bbox_of(i)));
        let largest = *members
            .iter()
            .max_by(|&&a, &&b| bbox_of(a).area().cmp(&bbox_of(b).area()).then(b.cmp(&a)))
            .expect("non-empty");
        let mut reading = members.clone();
        reading.sort_by_key(|&i| (bbox_of(i).top(), bbox_of(i).left(), i));
        let lines: Vec<String> = reading.iter().flat_map(|&i| texts[i].line_texts().to_vec()).collect();
        merged_at[first] = Some(TextAsset {
            placement: union.into(),
            style: texts[largest].style.clone(),
            lines: Slot::Known(lines),
        });
    }
    texts
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            if t.placement.bbox().is_none() {
                Some(t.clone())
            } else {
                merged_at[i].take()
            }
        })
        .collect()
}
