use std::collections::HashMap;

use crate::metrics::MetricError;

fn same_pairs<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> u64 {
    let mut counts: HashMap<K, u64> = HashMap::new();
    for k in keys {
        *counts.entry(k).or_default() += 1;
    }
    counts.values().map(|&c| c * c.saturating_sub(1) / 2).sum()
}

/// Fraction of entity pairs on which two partitions disagree about
/// co-membership. Computed exactly from the contingency table:
/// disagreements = same(a) + same(b) − 2·same(a ∧ b).
pub fn clustering_distance(a: &[usize], b: &[usize]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as u64;
    let pairs = n * n.saturating_sub(1) / 2;
    if pairs == 0 {
        return Ok(0.0);
    }
    let sa = same_pairs(a.iter());
    let sb = same_pairs(b.iter());
    let sab = same_pairs(a.iter().zip(b));
    Ok((sa + sb - 2 * sab) as f64 / pairs as f64)
}
