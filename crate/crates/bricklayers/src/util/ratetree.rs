//! Hierarchical partial-sum structure over event rates.
//!
//! A complete binary tree stores one rate per leaf; internal nodes hold the
//! sum of their children. Point updates and proportional selection are both
//! O(log n), which keeps the event loop cost logarithmic in the number of
//! bonds (or occupied walker positions).

/// Partial-sum tree over non-negative rates.
#[derive(Debug, Clone)]
pub struct RateTree {
    /// Number of leaves (a power of two); `tree[1]` is the root,
    /// leaves occupy `tree[base..base + len]`.
    base: usize,
    len: usize,
    tree: Vec<f64>,
}

impl RateTree {
    /// Tree with `len` leaves, all rates zero.
    pub fn new(len: usize) -> Self {
        let base = len.max(1).next_power_of_two();
        RateTree {
            base,
            len,
            tree: vec![0.0; 2 * base],
        }
    }

    /// Tree initialized from a slice of rates.
    pub fn from_rates(rates: &[f64]) -> Self {
        let mut t = RateTree::new(rates.len());
        t.tree[t.base..t.base + rates.len()].copy_from_slice(rates);
        t.rebuild();
        t
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Current rate of leaf `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.tree[self.base + i]
    }

    /// Set leaf `i` to `rate`, updating all partial sums on the path to the root.
    pub fn set(&mut self, i: usize, rate: f64) {
        debug_assert!(rate >= 0.0, "negative rate {rate}");
        let mut node = self.base + i;
        self.tree[node] = rate;
        while node > 1 {
            node /= 2;
            self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1];
        }
    }

    /// Total rate (root sum).
    pub fn total(&self) -> f64 {
        self.tree[1]
    }

    /// Index of the leaf containing cumulative coordinate `target`,
    /// for `target` in `[0, total())`. Zero-rate leaves are never selected.
    pub fn select(&self, mut target: f64) -> usize {
        let mut node = 1;
        while node < self.base {
            let left = self.tree[2 * node];
            if target < left {
                node *= 2;
            } else {
                target -= left;
                node = 2 * node + 1;
            }
        }
        let mut i = node - self.base;
        // Floating-point edge: if rounding walked us onto a zero leaf or past
        // the end, step back to the last positive leaf.
        if i >= self.len || self.tree[self.base + i] <= 0.0 {
            i = (0..self.len.min(i + 1))
                .rev()
                .find(|&j| self.tree[self.base + j] > 0.0)
                .unwrap_or(0);
        }
        i
    }

    /// Recompute all internal sums from the leaves. Returns the absolute
    /// drift of the root sum accumulated since the last rebuild, so long
    /// runs can verify that incremental updates never diverged.
    pub fn resync(&mut self) -> f64 {
        let before = self.tree[1];
        self.rebuild();
        (self.tree[1] - before).abs()
    }

    fn rebuild(&mut self) {
        for node in (1..self.base).rev() {
            self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1];
        }
    }
}
