//! Small shared utilities: deterministic summation and a seedable generator.

/// Deterministic pairwise summation.
///
/// The reduction tree depends only on the slice length, so sums are
/// bit-reproducible no matter how the inputs were produced (serially or from
/// a parallel map collected in index order).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// SplitMix64: tiny deterministic generator for randomized suites.
///
/// Used instead of an external RNG so that seeded runs are reproducible
/// across platforms and dependency upgrades.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Relative difference |a-b| / max(|a|, |b|, 1).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_uniform_data() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i + 1) as f64).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
