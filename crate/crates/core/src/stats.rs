//! Running means and standard errors.

use serde::{Deserialize, Serialize};

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Adds `n` Bernoulli samples of which `hits` are ones.
    pub fn push_bernoulli(&mut self, hits: u64, n: u64) {
        if n == 0 {
            return;
        }
        let p = hits as f64 / n as f64;
        let other = Self { n, mean: p, m2: n as f64 * p * (1.0 - p) };
        self.merge(&other);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 { 0.0 } else { self.m2 / (self.n - 1) as f64 }
    }

    pub fn std_error(&self) -> f64 {
        if self.n < 2 { f64::INFINITY } else { (self.variance() / self.n as f64).sqrt() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let mut a = MeanAccumulator::new();
        xs.iter().for_each(|&x| a.push(x));
        let mut b = MeanAccumulator::new();
        let mut c = MeanAccumulator::new();
        xs[..40].iter().for_each(|&x| b.push(x));
        xs[40..].iter().for_each(|&x| c.push(x));
        b.merge(&c);
        assert!((a.mean() - b.mean()).abs() < 1e-12);
        assert!((a.variance() - b.variance()).abs() < 1e-10);
    }

    #[test]
    fn bernoulli_batch() {
        let mut a = MeanAccumulator::new();
        for i in 0..50 {
            a.push(if i < 20 { 1.0 } else { 0.0 });
        }
        let mut b = MeanAccumulator::new();
        b.push_bernoulli(20, 50);
        assert!((a.variance() - b.variance()).abs() < 1e-12);
    }
}
