//! Small helpers for sparse nonnegative vectors stored as ordered maps.
//!
//! Ordered maps keep every summation in key order, which makes all derived
//! quantities bit-reproducible across runs.

use std::collections::BTreeMap;

pub type SparseVec<K> = BTreeMap<K, f64>;

pub fn l1<K>(v: &SparseVec<K>) -> f64 {
    v.values().map(|w| w.abs()).sum()
}

pub fn l2<K>(v: &SparseVec<K>) -> f64 {
    v.values().map(|w| w * w).sum::<f64>().sqrt()
}

/// Scales `v` in place so that its L1 norm is 1. Returns false when the
/// vector has no mass and was left untouched.
pub fn normalize_l1<K>(v: &mut SparseVec<K>) -> bool {
    let total = l1(v);
    if total <= 0.0 || !total.is_finite() {
        return false;
    }
    for w in v.values_mut() {
        *w /= total;
    }
    true
}

pub fn dot<K: Ord>(a: &SparseVec<K>, b: &SparseVec<K>) -> f64 {
    // iterate the smaller map, probe the larger
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small
        .iter()
        .filter_map(|(k, x)| large.get(k).map(|y| x * y))
        .sum()
}

/// Cosine similarity. Returns 0 when either vector is all-zero.
pub fn cosine<K: Ord>(a: &SparseVec<K>, b: &SparseVec<K>) -> f64 {
    let aa: f64 = a.values().map(|w| w * w).sum();
    let bb: f64 = b.values().map(|w| w * w).sum();
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    // sqrt(aa * bb) == aa exactly when a == b
    let c = dot(a, b) / (aa * bb).sqrt();
    c.clamp(0.0, 1.0)
}

/// Entries sorted by weight descending, ties broken by key ascending.
pub fn ranked<K: Ord + Clone>(v: &SparseVec<K>) -> Vec<(K, f64)> {
    let mut out: Vec<(K, f64)> = v.iter().map(|(k, w)| (k.clone(), *w)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
