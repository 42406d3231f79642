//! Dynamic weighted sampling: a binary-indexed prefix-sum tree over
//! per-item weights with `O(log n)` update and proportional sampling.

use crate::error::{Error, Result};

/// Rebuild the tree from the exact weights after this many updates.
pub const REBUILD_INTERVAL: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct WeightIndex {
    /// 1-based Fenwick array of size `cap + 1`; `tree[cap]` is the total.
    tree: Vec<f64>,
    /// Exact current weights.
    values: Vec<f64>,
    cap: usize,
    updates_since_rebuild: u64,
    rebuilds: u64,
}

impl WeightIndex {
    /// Room for `capacity` items; grows by doubling when exceeded.
    pub fn with_capacity(capacity: usize) -> Self {
        let cap = capacity.max(1).next_power_of_two();
        Self { tree: vec![0.0; cap + 1], values: Vec::with_capacity(capacity), cap, updates_since_rebuild: 0, rebuilds: 0 }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Current weight of item `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rebuilds(&self) -> u64 {
        self.rebuilds
    }

    /// Sum of all weights.
    #[inline]
    pub fn total(&self) -> f64 {
        self.tree[self.cap]
    }

    /// Appends an item with weight `w`.
    pub fn push(&mut self, w: f64) {
        if self.values.len() == self.cap {
            self.values.push(w);
            self.cap *= 2;
            self.tree = vec![0.0; self.cap + 1];
            self.rebuild();
            return;
        }
        self.values.push(w);
        self.add(self.values.len() - 1, w);
    }

    /// Sets the weight of item `i` to `w`.
    #[inline]
    pub fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.values[i];
        self.values[i] = w;
        self.add(i, delta);
    }

    #[inline]
    fn add(&mut self, i: usize, delta: f64) {
        let mut j = i + 1;
        while j <= self.cap {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
        self.updates_since_rebuild += 1;
    }

    /// `sum_{j < i} w_j`.
    pub fn prefix(&self, i: usize) -> f64 {
        let mut s = 0.0;
        let mut j = i;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    /// Index `i` with `prefix(i) <= target < prefix(i + 1)`, by descent.
    /// Zero-weight items are never returned.
    #[inline]
    pub fn find(&self, mut target: f64) -> usize {
        let mut pos = 0;
        let mut step = self.cap;
        while step > 0 {
            let next = pos + step;
            if next <= self.cap && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        let n = self.values.len();
        if pos >= n || self.values[pos] <= 0.0 {
            // rounding pushed the descent past the last live item
            pos = pos.min(n - 1);
            while pos > 0 && self.values[pos] <= 0.0 {
                pos -= 1;
            }
        }
        pos
    }

    /// Item drawn with probability proportional to its weight, from `u` uniform on `[0, 1)`.
    #[inline]
    pub fn sample(&self, u: f64) -> usize {
        self.find(u * self.total())
    }

    /// Whether the periodic rebuild is due.
    #[inline]
    pub fn rebuild_due(&self) -> bool {
        self.updates_since_rebuild >= REBUILD_INTERVAL
    }

    /// Recomputes the tree from the exact weights in `O(n)`.
    pub fn rebuild(&mut self) {
        self.tree.iter_mut().for_each(|t| *t = 0.0);
        for (i, &w) in self.values.iter().enumerate() {
            self.tree[i + 1] = w;
        }
        for j in 1..=self.cap {
            let parent = j + (j & j.wrapping_neg());
            if parent <= self.cap {
                self.tree[parent] += self.tree[j];
            }
        }
        self.updates_since_rebuild = 0;
        self.rebuilds += 1;
    }

    /// Largest relative gap between the incremental tree and a fresh rebuild.
    pub fn drift(&self) -> f64 {
        let mut fresh = self.clone();
        fresh.rebuild();
        self.tree
            .iter()
            .zip(&fresh.tree)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() / b.abs().max(f64::MIN_POSITIVE) })
            .fold(0.0, f64::max)
    }

    /// Rebuilds when due or when the total is no longer a positive finite number.
    pub fn maintain(&mut self) -> Result<()> {
        let t = self.total();
        if self.rebuild_due() || !(t.is_finite() && t > 0.0) {
            self.rebuild();
            let t = self.total();
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Numeric(format!("weight total {t} after rebuild")));
            }
        }
        Ok(())
    }

    /// The raw tree, for consistency checks.
    pub fn tree(&self) -> &[f64] {
        &self.tree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_respects_prefix_order() {
        let mut w = WeightIndex::with_capacity(4);
        for x in [1.0, 0.0, 2.0, 3.0] {
            w.push(x);
        }
        assert_eq!(w.total(), 6.0);
        assert_eq!(w.find(0.0), 0);
        assert_eq!(w.find(0.999), 0);
        assert_eq!(w.find(1.0), 2);
        assert_eq!(w.find(2.999), 2);
        assert_eq!(w.find(3.0), 3);
        assert_eq!(w.find(5.999), 3);
        assert_eq!(w.find(6.0), 3);
    }

    #[test]
    fn growth_past_capacity_keeps_sums() {
        let mut w = WeightIndex::with_capacity(2);
        for i in 0..37 {
            w.push(i as f64 + 1.0);
        }
        assert_eq!(w.total(), (37 * 38 / 2) as f64);
        assert_eq!(w.prefix(10), 55.0);
        w.set(0, 10.0);
        assert_eq!(w.prefix(1), 10.0);
        assert_eq!(w.drift(), 0.0);
    }
}
