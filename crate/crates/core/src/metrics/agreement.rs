use std::collections::{BTreeMap, HashMap};

use super::MetricError;

/// `k` raters each ranking the same `n` methods, stored as rank positions
/// (1 = best) indexed `[rater][method]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingSet {
    pub methods: Vec<String>,
    pub ranks: Vec<Vec<usize>>,
}

impl RankingSet {
    /// Builds a set from best-first orderings, each a permutation of `methods`.
    pub fn from_orderings<S: AsRef<str>, T: AsRef<str>>(
        methods: &[S],
        orderings: &[Vec<T>],
    ) -> Result<Self, MetricError> {
        let methods: Vec<String> = methods.iter().map(|m| m.as_ref().to_string()).collect();
        let index: HashMap<&str, usize> = methods.iter().enumerate().map(|(i, m)| (m.as_str(), i)).collect();
        if index.len() != methods.len() {
            return Err(MetricError::DegenerateInput("duplicate method names".into()));
        }
        let mut ranks = Vec::with_capacity(orderings.len());
        for (r, ordering) in orderings.iter().enumerate() {
            if ordering.len() != methods.len() {
                return Err(MetricError::InvalidRanking(format!(
                    "ranking {r} has {} entries, expected {}",
                    ordering.len(),
                    methods.len()
                )));
            }
            let mut row = vec![0usize; methods.len()];
            for (pos, m) in ordering.iter().enumerate() {
                let i = *index
                    .get(m.as_ref())
                    .ok_or_else(|| MetricError::UnknownMethod(m.as_ref().to_string()))?;
                if row[i] != 0 {
                    return Err(MetricError::DuplicateMethod(m.as_ref().to_string()));
                }
                row[i] = pos + 1;
            }
            ranks.push(row);
        }
        Ok(RankingSet { methods, ranks })
    }

    pub fn n_methods(&self) -> usize {
        self.methods.len()
    }

    pub fn n_raters(&self) -> usize {
        self.ranks.len()
    }

    /// Method names best-first for rater `r`.
    pub fn ordering(&self, r: usize) -> Vec<&str> {
        let mut order: Vec<(usize, &str)> = self.ranks[r]
            .iter()
            .zip(&self.methods)
            .map(|(&rank, m)| (rank, m.as_str()))
            .collect();
        order.sort_unstable();
        order.into_iter().map(|(_, m)| m).collect()
    }
}

/// Kendall's coefficient of concordance, `12 S / (k^2 (n^3 - n))`.
pub fn kendalls_w(set: &RankingSet) -> Result<f64, MetricError> {
    let n = set.n_methods();
    let k = set.n_raters();
    if n < 2 {
        return Err(MetricError::DegenerateInput(format!("{n} methods")));
    }
    if k < 1 {
        return Err(MetricError::DegenerateInput("no raters".into()));
    }
    let totals: Vec<f64> = (0..n)
        .map(|i| set.ranks.iter().map(|row| row[i] as f64).sum())
        .collect();
    let mean = totals.iter().sum::<f64>() / n as f64;
    let s: f64 = totals.iter().map(|t| (t - mean).powi(2)).sum();
    let (n, k) = (n as f64, k as f64);
    Ok(12.0 * s / (k * k * (n * n * n - n)))
}

/// Percentage of raters placing each method first. Methods never ranked
/// first appear with 0.
pub fn top_rank_frequency(set: &RankingSet) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = set.methods.iter().map(|m| (m.clone(), 0.0)).collect();
    if set.ranks.is_empty() {
        return out;
    }
    let share = 100.0 / set.n_raters() as f64;
    for row in &set.ranks {
        if let Some(i) = row.iter().position(|&r| r == 1) {
            *out.get_mut(&set.methods[i]).expect("method present") += share;
        }
    }
    out
}
