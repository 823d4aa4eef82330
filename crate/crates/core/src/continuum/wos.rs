//! Walk-on-spheres estimator of Brownian capacity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::panels::kernel_constant;
use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;
use crate::shape::GridShape;
use crate::stats::MeanAccumulator;

/// A closed target set known through its distance function.
pub trait DistanceTarget: Sync {
    fn dim(&self) -> usize;
    /// Euclidean distance from `x` to the set (zero inside).
    fn distance(&self, x: &[f64]) -> f64;
    /// Centre and radius of a ball containing the set.
    fn enclosing_ball(&self) -> ([f64; MAX_DIM], f64);
}

/// Union of closed axis-aligned boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxUnion {
    dim: usize,
    boxes: Vec<([f64; MAX_DIM], [f64; MAX_DIM])>,
}

impl BoxUnion {
    pub fn new(dim: usize, boxes: Vec<([f64; MAX_DIM], [f64; MAX_DIM])>) -> Self {
        Self { dim, boxes }
    }

    /// Greedy decomposition of the cells into maximal boxes.
    pub fn from_shape(shape: &GridShape) -> Self {
        let d = shape.dim();
        let cells = shape.cells().to_vec();
        let mut covered = std::collections::HashSet::new();
        let mut boxes = Vec::new();
        for c in &cells {
            if covered.contains(c) {
                continue;
            }
            let mut hi = *c;
            for axis in (0..d).rev() {
                loop {
                    // Try to extend the slab [c, hi] by one layer along `axis`.
                    let mut layer_lo = *c;
                    layer_lo.coords_mut()[axis] = hi.get(axis) + 1;
                    let mut layer_hi = hi;
                    layer_hi.coords_mut()[axis] = hi.get(axis) + 1;
                    let layer = crate::lattice::LatticeSet::from_predicate(layer_lo, layer_hi, |_| true);
                    if layer.iter().all(|p| shape.contains_cell(&p) && !covered.contains(&p)) {
                        hi.coords_mut()[axis] += 1;
                    } else {
                        break;
                    }
                }
            }
            for p in crate::lattice::LatticeSet::from_predicate(*c, hi, |_| true).iter() {
                covered.insert(p);
            }
            let (lo, _) = shape.cell_bounds(c);
            let (_, up) = shape.cell_bounds(&hi);
            boxes.push((lo, up));
        }
        Self { dim: d, boxes }
    }

    pub fn boxes(&self) -> &[([f64; MAX_DIM], [f64; MAX_DIM])] {
        &self.boxes
    }
}

impl DistanceTarget for BoxUnion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, x: &[f64]) -> f64 {
        let mut best = f64::INFINITY;
        for (lo, hi) in &self.boxes {
            let mut s = 0.0;
            for i in 0..self.dim {
                let e = (lo[i] - x[i]).max(x[i] - hi[i]).max(0.0);
                s += e * e;
            }
            best = best.min(s);
        }
        best.sqrt()
    }

    fn enclosing_ball(&self) -> ([f64; MAX_DIM], f64) {
        let mut lo = [f64::INFINITY; MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; MAX_DIM];
        for (a, b) in &self.boxes {
            for i in 0..self.dim {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(b[i]);
            }
        }
        let mut c = [0.0; MAX_DIM];
        let mut r2 = 0.0;
        for i in 0..self.dim {
            c[i] = 0.5 * (lo[i] + hi[i]);
            r2 += (0.5 * (hi[i] - lo[i])).powi(2);
        }
        (c, r2.sqrt())
    }
}

/// Euclidean ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub dim: usize,
    pub center: [f64; MAX_DIM],
    pub radius: f64,
}

impl DistanceTarget for Ball {
    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, x: &[f64]) -> f64 {
        let r: f64 = (0..self.dim).map(|i| (x[i] - self.center[i]).powi(2)).sum::<f64>().sqrt();
        (r - self.radius).max(0.0)
    }

    fn enclosing_ball(&self) -> ([f64; MAX_DIM], f64) {
        (self.center, self.radius)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WosConfig {
    /// Snap tolerance as a fraction of the target diameter.
    pub snap: f64,
    /// Escape test radius as a multiple of the target diameter.
    pub escape_factor: f64,
    /// Radius of the starting sphere about the enclosing-ball centre; defaults to the enclosing radius.
    pub start_radius: Option<f64>,
    pub max_steps: u64,
    /// Walks per independent RNG stream.
    pub chunk: usize,
}

impl Default for WosConfig {
    fn default() -> Self {
        Self { snap: 1e-4, escape_factor: 8.0, start_radius: None, max_steps: 1_000_000, chunk: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WosEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub hit_fraction: f64,
    pub start_radius: f64,
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> [f64; MAX_DIM] {
    loop {
        let mut v = [0.0; MAX_DIM];
        let mut n: f64 = 0.0;
        for vi in v.iter_mut().take(d) {
            *vi = rng.sample::<f64, _>(StandardNormal);
            n += *vi * *vi;
        }
        if n > 1e-300 {
            let s = 1.0 / n.sqrt();
            for vi in v.iter_mut().take(d) {
                *vi *= s;
            }
            return v;
        }
    }
}

/// Point of `S(c, r)` hit first by Brownian motion started at `x` outside, given that it hits.
fn exterior_harmonic_sample(rng: &mut ChaCha8Rng, d: usize, c: &[f64], r: f64, x: &[f64]) -> [f64; MAX_DIM] {
    let mut rel = [0.0; MAX_DIM];
    let mut n2 = 0.0;
    for i in 0..d {
        rel[i] = x[i] - c[i];
        n2 += rel[i] * rel[i];
    }
    // Kelvin image inside the sphere; the hitting density is proportional to |x* − y|^{−d}.
    let mut star = [0.0; MAX_DIM];
    let k = r * r / n2;
    for i in 0..d {
        star[i] = k * rel[i];
    }
    let s = (k * k * n2).sqrt();
    loop {
        let u = unit_vector(rng, d);
        let mut dist2 = 0.0;
        for i in 0..d {
            dist2 += (r * u[i] - star[i]).powi(2);
        }
        let ratio = (r - s) / dist2.sqrt();
        if rng.random::<f64>() < ratio.powi(d as i32) {
            let mut y = [0.0; MAX_DIM];
            for i in 0..d {
                y[i] = c[i] + r * u[i];
            }
            return y;
        }
    }
}

/// `cap̃(A) ≈ cap̃(S_R) · P[hit A]`, walks started uniformly on `S_R`.
pub fn wos_capacity_target<T: DistanceTarget>(target: &T, samples: u64, seed: u64, cfg: &WosConfig) -> Result<WosEstimate> {
    let d = target.dim();
    let (c, r_enc) = target.enclosing_ball();
    let r = cfg.start_radius.unwrap_or(r_enc);
    if !(r > 0.0) || r < r_enc * (1.0 - 1e-12) {
        return Err(Error::NotEnclosing { radius: r });
    }
    let diameter = 2.0 * r_enc;
    let eps = cfg.snap * diameter;
    let escape = cfg.escape_factor * diameter.max(r);
    let chunks = (samples as usize).div_ceil(cfg.chunk);
    let results: Vec<Result<(u64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let n = cfg.chunk.min(samples as usize - chunk * cfg.chunk);
            let mut hits = 0u64;
            for _ in 0..n {
                let u = unit_vector(&mut rng, d);
                let mut x = [0.0; MAX_DIM];
                for i in 0..d {
                    x[i] = c[i] + r * u[i];
                }
                let mut steps = 0u64;
                loop {
                    let dist = target.distance(&x[..d]);
                    if dist < eps {
                        hits += 1;
                        break;
                    }
                    let rho = (0..d).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>().sqrt();
                    if rho > escape {
                        if rng.random::<f64>() < (r / rho).powi(d as i32 - 2) {
                            x = exterior_harmonic_sample(&mut rng, d, &c[..d], r, &x[..d]);
                        } else {
                            break;
                        }
                    } else {
                        let v = unit_vector(&mut rng, d);
                        for i in 0..d {
                            x[i] += dist * v[i];
                        }
                    }
                    steps += 1;
                    if steps > cfg.max_steps {
                        return Err(Error::NoConvergence { iterations: steps as usize, residual: dist });
                    }
                }
            }
            Ok((hits, n as u64))
        })
        .collect();
    let mut acc = MeanAccumulator::new();
    let mut total_hits = 0u64;
    for res in results {
        let (h, n) = res?;
        total_hits += h;
        acc.push_bernoulli(h, n);
    }
    let cap_sphere = r.powi(d as i32 - 2) / kernel_constant(d);
    let p = acc.mean();
    Ok(WosEstimate {
        estimate: cap_sphere * p,
        std_error: cap_sphere * acc.std_error(),
        samples,
        hit_fraction: total_hits as f64 / samples as f64,
        start_radius: r,
    })
}

pub fn wos_capacity(shape: &GridShape, samples: u64, seed: u64, cfg: &WosConfig) -> Result<WosEstimate> {
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    wos_capacity_target(&BoxUnion::from_shape(shape), samples, seed, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_capacity_from_larger_sphere() {
        let ball = Ball { dim: 3, center: [0.0; MAX_DIM], radius: 1.0 };
        let cfg = WosConfig { start_radius: Some(2.0), ..WosConfig::default() };
        let est = wos_capacity_target(&ball, 20_000, 3, &cfg).unwrap();
        let exact = 2.0 * std::f64::consts::PI;
        assert!((est.estimate - exact).abs() < 4.0 * est.std_error + 1e-3, "{est:?}");
    }

    #[test]
    fn box_union_of_full_shape_is_one_box() {
        let s = GridShape::unit_box(3, 4);
        let u = BoxUnion::from_shape(&s);
        assert_eq!(u.boxes().len(), 1);
        assert!((u.distance(&[2.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_sphere_is_rejected() {
        let s = GridShape::unit_box(3, 1);
        let cfg = WosConfig { start_radius: Some(1.0), ..WosConfig::default() };
        assert!(matches!(wos_capacity(&s, 10, 1, &cfg), Err(Error::NotEnclosing { .. })));
    }

    #[test]
    fn deterministic_in_seed() {
        let s = GridShape::unit_box(3, 1);
        let cfg = WosConfig::default();
        let a = wos_capacity(&s, 5000, 9, &cfg).unwrap();
        let b = wos_capacity(&s, 5000, 9, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
