use crate::svg::SlideDoc;

/// Character-level edit distance (unit-cost insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// All text lines in DOM order, joined with single newlines.
pub fn concatenated_text(doc: &SlideDoc) -> String {
    doc.texts
        .iter()
        .flat_map(|t| t.line_texts().iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `1 - lev(a, b) / max(|a|, |b|)`; two empty strings score 1.
pub fn normalized_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

pub fn ocr_accuracy(gt: &SlideDoc, pred: &SlideDoc) -> f64 {
    normalized_similarity(&concatenated_text(gt), &concatenated_text(pred))
}
