//! Elo ratings from pairwise outcomes, with full rankings decomposed into
//! every constituent pair.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::MetricError;

pub const DEFAULT_K_FACTOR: f64 = 4.0;
pub const DEFAULT_INITIAL_RATING: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub winner: String,
    pub loser: String,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloTable {
    pub ratings: BTreeMap<String, f64>,
    pub k_factor: f64,
    pub initial: f64,
    pub history: Vec<PairOutcome>,
}

impl EloTable {
    pub fn new<S: AsRef<str>>(methods: &[S], k_factor: f64, initial: f64) -> Self {
        EloTable {
            ratings: methods.iter().map(|m| (m.as_ref().to_string(), initial)).collect(),
            k_factor,
            initial,
            history: Vec::new(),
        }
    }

    /// K = 4 and a starting rating of 1000.
    pub fn with_defaults<S: AsRef<str>>(methods: &[S]) -> Self {
        Self::new(methods, DEFAULT_K_FACTOR, DEFAULT_INITIAL_RATING)
    }

    /// Adds a method at the initial rating. Returns false if already present.
    pub fn add_method(&mut self, method: &str) -> bool {
        if self.ratings.contains_key(method) {
            return false;
        }
        self.ratings.insert(method.to_string(), self.initial);
        true
    }

    pub fn rating(&self, method: &str) -> Option<f64> {
        self.ratings.get(method).copied()
    }

    pub fn rating_sum(&self) -> f64 {
        self.ratings.values().sum()
    }

    /// Applies one win in place and returns the rating change.
    pub fn record_win(&mut self, winner: &str, loser: &str) -> Result<f64, MetricError> {
        let rw = self.rating(winner).ok_or_else(|| MetricError::UnknownMethod(winner.to_string()))?;
        let rl = self.rating(loser).ok_or_else(|| MetricError::UnknownMethod(loser.to_string()))?;
        let delta = self.k_factor * (1.0 - win_rate(rw, rl));
        *self.ratings.get_mut(winner).expect("checked") += delta;
        *self.ratings.get_mut(loser).expect("checked") -= delta;
        self.history.push(PairOutcome {
            winner: winner.to_string(),
            loser: loser.to_string(),
            delta,
        });
        Ok(delta)
    }

    /// Decomposes a best-first ranking and applies each pair in emitted order.
    pub fn record_ranking<S: AsRef<str>>(&mut self, ranking: &[S]) -> Result<usize, MetricError> {
        let pairs = decompose_ranking(ranking)?;
        if let Some(unknown) = ranking.iter().find(|m| !self.ratings.contains_key(m.as_ref())) {
            return Err(MetricError::UnknownMethod(unknown.as_ref().to_string()));
        }
        for (w, l) in &pairs {
            self.record_win(w, l)?;
        }
        Ok(pairs.len())
    }
}

/// Returns a copy of `table` after one pairwise win.
pub fn elo_update(table: &EloTable, winner: &str, loser: &str) -> Result<EloTable, MetricError> {
    let mut next = table.clone();
    next.record_win(winner, loser)?;
    Ok(next)
}

/// Expected score of A against B: `1 / (1 + 10^((elo_b - elo_a) / 400))`.
pub fn win_rate(elo_a: f64, elo_b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((elo_b - elo_a) / 400.0))
}

/// All `n(n-1)/2` (winner, loser) pairs of a best-first ranking, ordered by
/// the winner's rank then the loser's rank.
pub fn decompose_ranking<S: AsRef<str>>(ranking: &[S]) -> Result<Vec<(String, String)>, MetricError> {
    let mut seen = HashSet::new();
    for m in ranking {
        if !seen.insert(m.as_ref()) {
            return Err(MetricError::DuplicateMethod(m.as_ref().to_string()));
        }
    }
    let mut pairs = Vec::with_capacity(ranking.len() * ranking.len().saturating_sub(1) / 2);
    for (i, w) in ranking.iter().enumerate() {
        for l in &ranking[i + 1..] {
            pairs.push((w.as_ref().to_string(), l.as_ref().to_string()));
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_ratings_move_by_half_k() {
        let t = EloTable::with_defaults(&["a", "b"]);
        let t = elo_update(&t, "a", "b").unwrap();
        assert_eq!(t.rating("a"), Some(1002.0));
        assert_eq!(t.rating("b"), Some(998.0));
        assert_eq!(t.history.len(), 1);
    }

    #[test]
    fn favourite_gains_little() {
        let mut t = EloTable::with_defaults(&["a", "b"]);
        t.ratings.insert("a".into(), 1400.0);
        let delta = t.record_win("a", "b").unwrap();
        let expected = 4.0 * (1.0 - 1.0 / (1.0 + 10f64.powf(-1.0)));
        assert!((delta - expected).abs() < 1e-12);
        assert!((delta - 0.3636).abs() < 1e-4);
    }

    #[test]
    fn unknown_method_rejected() {
        let t = EloTable::with_defaults(&["a", "b"]);
        assert!(matches!(elo_update(&t, "a", "z"), Err(MetricError::UnknownMethod(m)) if m == "z"));
    }

    #[test]
    fn win_rate_values() {
        assert_eq!(win_rate(1000.0, 1000.0), 0.5);
        assert!((win_rate(1245.0, 948.0) - 0.8468).abs() < 1e-4);
        let (a, b) = (1207.0, 880.0);
        assert!((win_rate(a, b) + win_rate(b, a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decomposition() {
        assert_eq!(decompose_ranking(&["A", "B"]).unwrap(), vec![("A".to_string(), "B".to_string())]);
        let six = ["a", "b", "c", "d", "e", "f"];
        let pairs = decompose_ranking(&six).unwrap();
        assert_eq!(pairs.len(), 15);
        for m in six {
            assert_eq!(pairs.iter().filter(|(w, l)| w == m || l == m).count(), 5);
        }
        assert!(matches!(decompose_ranking(&["a", "a"]), Err(MetricError::DuplicateMethod(_))));
    }

    #[test]
    fn ranking_is_zero_sum() {
        let six = ["a", "b", "c", "d", "e", "f"];
        let mut t = EloTable::with_defaults(&six);
        assert_eq!(t.record_ranking(&six).unwrap(), 15);
        assert_eq!(t.record_ranking(&["f", "e", "d", "c", "b", "a"]).unwrap(), 15);
        assert!((t.rating_sum() - 6000.0).abs() < 1e-9);
    }
}
