//! Poisson soup of trajectories through a window.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Direction, InterlacementSample, TrajectoryPiece};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticePoint, Symmetry, MAX_DIM};
use crate::linalg::{Cholesky, Matrix};
use crate::potential::{equilibrium_measure, GreenTable, SolverConfig};

/// What happens when a walk leaves the guard box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GuardRule {
    /// Re-enter the window with the hitting law of the window seen from the exit point.
    Balayage,
    /// Stop the walk.
    Kill,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Guard radius is `max(⌈γN⌉, N + 1)`.
    pub guard_factor: f64,
    pub guard_rule: GuardRule,
    /// Largest window boundary for which the hitting law is solved exactly; above it the
    /// return point is drawn from the normalised equilibrium measure.
    pub balayage_limit: usize,
    /// Restarts allowed for one backward piece.
    pub retry_limit: u64,
    /// Keep full vertex lists (both directions) for export. Recording draws extra holding times,
    /// so a recorded sample differs from an unrecorded one with the same seed.
    pub record_paths: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { guard_factor: 4.0, guard_rule: GuardRule::Balayage, balayage_limit: 5000, retry_limit: 1_000_000, record_paths: false }
    }
}

struct ReturnLaw {
    prob: f64,
    /// Cumulative weights over the window boundary; empty means "use the equilibrium law".
    cdf: Vec<f64>,
}

enum ReturnKind {
    Exact(Cholesky<f64>),
    FarField,
}

struct Trace {
    mark: f64,
    visits: Vec<(u32, f64)>,
    pieces: Vec<TrajectoryPiece>,
}

/// Prepared sampler for the window `B(0, N)`; samples are translated to the requested centre.
pub struct Sampler {
    dim: usize,
    radius: u64,
    guard: i64,
    cfg: SamplerConfig,
    green: Arc<GreenTable>,
    capacity: f64,
    boundary: Vec<LatticePoint>,
    /// Equilibrium masses aligned with `boundary`.
    masses: Vec<f64>,
    eq_cdf: Vec<f64>,
    sym: Symmetry,
    kind: OnceLock<ReturnKind>,
    cache: Mutex<HashMap<LatticePoint, Arc<ReturnLaw>>>,
}

fn cumulative(w: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = w
        .map(|x| {
            acc += x.max(0.0);
            acc
        })
        .collect();
    if acc > 0.0 {
        out.iter_mut().for_each(|c| *c /= acc);
    }
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let v: f64 = rng.random();
    cdf.partition_point(|&c| c <= v).min(cdf.len() - 1)
}

impl Sampler {
    pub fn new(dim: usize, radius: u64, cfg: SamplerConfig) -> Result<Self> {
        if !(cfg.guard_factor >= 1.0) {
            return Err(Error::InvalidParameter(format!("guard factor {} below 1", cfg.guard_factor)));
        }
        let green = GreenTable::shared(dim)?;
        let window = LatticeBox::centered(dim, radius);
        let e = equilibrium_measure::<f64>(&window.to_set(), &green, &SolverConfig::default())?;
        let boundary = window.inner_boundary().to_vec();
        let masses: Vec<f64> = boundary.iter().map(|p| e.mass_at(p)).collect();
        let eq_cdf = cumulative(masses.iter().copied());
        let guard = ((cfg.guard_factor * radius as f64).ceil() as i64).max(radius as i64 + 1);
        Ok(Self {
            dim,
            radius,
            guard,
            cfg,
            green,
            capacity: e.total(),
            boundary,
            masses,
            eq_cdf,
            sym: Symmetry::full_about(dim, &[0; MAX_DIM][..dim]),
            kind: OnceLock::new(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn guard_radius(&self) -> u64 {
        self.guard as u64
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// `cap(B(0, N))`.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    /// Whether the return law from outside the guard is the exact hitting law.
    pub fn exact_return(&self) -> bool {
        self.boundary.len() <= self.cfg.balayage_limit
    }

    fn kind(&self) -> &ReturnKind {
        self.kind.get_or_init(|| {
            if self.exact_return() {
                let g = Matrix::from_fn(self.boundary.len(), |i, j| self.green.g(&self.boundary[i], &self.boundary[j]));
                match Cholesky::factor(g) {
                    Ok(c) => ReturnKind::Exact(c),
                    Err(_) => ReturnKind::FarField,
                }
            } else {
                ReturnKind::FarField
            }
        })
    }

    fn law(&self, z: &LatticePoint) -> Arc<ReturnLaw> {
        if let Some(l) = self.cache.lock().expect("cache lock").get(z) {
            return l.clone();
        }
        let law = match self.kind() {
            ReturnKind::Exact(chol) => {
                let b: Vec<f64> = self.boundary.iter().map(|y| self.green.g(y, z)).collect();
                let mu = chol.solve(&b);
                ReturnLaw { prob: mu.iter().sum::<f64>().clamp(0.0, 1.0), cdf: cumulative(mu.into_iter()) }
            }
            ReturnKind::FarField => {
                let p: f64 = self.boundary.iter().zip(&self.masses).map(|(y, m)| m * self.green.g(y, z)).sum();
                ReturnLaw { prob: p.clamp(0.0, 1.0), cdf: Vec::new() }
            }
        };
        let law = Arc::new(law);
        self.cache.lock().expect("cache lock").insert(*z, law.clone());
        law
    }

    /// Decides whether a walk that just left the guard at `z` comes back, and where.
    fn guard_exit(&self, z: &LatticePoint, rng: &mut ChaCha8Rng) -> Option<LatticePoint> {
        if self.cfg.guard_rule == GuardRule::Kill {
            return None;
        }
        let (q, g) = self.sym.canonical(z);
        let law = self.law(&q);
        if rng.random::<f64>() >= law.prob {
            return None;
        }
        let y = if law.cdf.is_empty() { self.boundary[draw(&self.eq_cdf, rng)] } else { self.boundary[draw(&law.cdf, rng)] };
        Some(self.sym.apply_inverse(g, &y))
    }

    fn index(&self, x: &LatticePoint) -> Option<u32> {
        let n = self.radius as i64;
        let side = 2 * n + 1;
        let mut idx = 0i64;
        for i in 0..self.dim {
            let c = x.get(i);
            if c.abs() > n {
                return None;
            }
            idx = idx * side + (c + n);
        }
        Some(idx as u32)
    }

    fn step(&self, x: &mut LatticePoint, rng: &mut ChaCha8Rng) -> usize {
        let k = rng.random_range(0..2 * self.dim);
        let axis = k / 2;
        x.coords_mut()[axis] += if k % 2 == 0 { 1 } else { -1 };
        axis
    }

    fn forward(&self, start: LatticePoint, rng: &mut ChaCha8Rng) -> (Vec<(u32, f64)>, Vec<TrajectoryPiece>) {
        let mut visits = Vec::new();
        let mut pieces = Vec::new();
        let record = self.cfg.record_paths;
        let mut piece = TrajectoryPiece::new(Direction::Forward);
        let mut x = start;
        loop {
            let idx = self.index(&x);
            if idx.is_some() || record {
                let hold: f64 = Exp1.sample(rng);
                if let Some(i) = idx {
                    visits.push((i, hold));
                }
                if record {
                    piece.push(x, hold);
                }
            }
            let axis = self.step(&mut x, rng);
            if x.get(axis).abs() > self.guard {
                if record {
                    pieces.push(std::mem::replace(&mut piece, TrajectoryPiece::new(Direction::Forward)));
                }
                match self.guard_exit(&x, rng) {
                    Some(y) => x = y,
                    None => break,
                }
            }
        }
        (visits, pieces)
    }

    /// Backward piece: a walk from `start` conditioned never to return to the window, by rejection.
    fn backward(&self, start: LatticePoint, rng: &mut ChaCha8Rng) -> Result<TrajectoryPiece> {
        'attempt: for _ in 0..self.cfg.retry_limit {
            let mut piece = TrajectoryPiece::new(Direction::Backward);
            let mut x = start;
            loop {
                let axis = self.step(&mut x, rng);
                if self.index(&x).is_some() {
                    continue 'attempt;
                }
                if x.get(axis).abs() > self.guard {
                    if self.guard_exit(&x, rng).is_some() {
                        continue 'attempt;
                    }
                    return Ok(piece);
                }
                piece.push(x, Exp1.sample(rng));
            }
        }
        Err(Error::ConditioningFailure(self.cfg.retry_limit))
    }

    fn soup(&self, u: f64, seed: u64) -> Result<Vec<Trace>> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::InvalidParameter(format!("intensity {u} must be a nonnegative number")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda = u * self.capacity;
        let count = if lambda > 0.0 {
            let p = Poisson::new(lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            p.sample(&mut rng) as u64
        } else {
            0
        };
        let heads: Vec<(LatticePoint, f64)> =
            (0..count).map(|_| (self.boundary[draw(&self.eq_cdf, &mut rng)], rng.random::<f64>())).collect();
        heads
            .into_par_iter()
            .enumerate()
            .map(|(i, (start, mark))| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(i as u64 + 1);
                let (visits, mut pieces) = self.forward(start, &mut r);
                if self.cfg.record_paths {
                    pieces.push(self.backward(start, &mut r)?);
                }
                Ok(Trace { mark, visits, pieces })
            })
            .collect()
    }

    fn assemble<'a>(&self, u: f64, window: &LatticeBox, seed: u64, traces: impl Iterator<Item = &'a Trace>) -> InterlacementSample {
        let side = 2 * self.radius as usize + 1;
        let mut lt = vec![0.0; side.pow(self.dim as u32)];
        let mut n = 0u64;
        let mut pieces = Vec::new();
        for t in traces {
            n += 1;
            for &(i, h) in &t.visits {
                lt[i as usize] += h;
            }
            pieces.extend(t.pieces.iter().map(|p| p.translate(&window.center)));
        }
        InterlacementSample::from_dense(u, *window, n, lt, seed, self.guard as u64, pieces)
    }

    fn check_window(&self, window: &LatticeBox) -> Result<()> {
        if window.dim() != self.dim || window.radius != self.radius {
            return Err(Error::WindowMismatch);
        }
        Ok(())
    }

    pub fn sample(&self, u: f64, window: &LatticeBox, seed: u64) -> Result<InterlacementSample> {
        self.check_window(window)?;
        let soup = self.soup(u, seed)?;
        Ok(self.assemble(u, window, seed, soup.iter()))
    }

    /// Samples at `u₁ ≤ u₂` from one soup at level `u₂`, the first keeping marks below `u₁/u₂`.
    pub fn couple(&self, u1: f64, u2: f64, window: &LatticeBox, seed: u64) -> Result<(InterlacementSample, InterlacementSample)> {
        self.check_window(window)?;
        if !(u1 >= 0.0) || u1 > u2 {
            return Err(Error::InvalidParameter(format!("levels must satisfy 0 <= u1 <= u2, got {u1}, {u2}")));
        }
        let soup = self.soup(u2, seed)?;
        let ratio = if u2 > 0.0 { u1 / u2 } else { 0.0 };
        let first = self.assemble(u1, window, seed, soup.iter().filter(|t| t.mark < ratio));
        let second = self.assemble(u2, window, seed, soup.iter());
        Ok((first, second))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct SamplerKey {
    dim: usize,
    radius: u64,
    guard_bits: u64,
    rule: GuardRule,
    limit: usize,
    retry: u64,
    record: bool,
}

/// Shared sampler for a window shape and configuration.
pub fn shared_sampler(dim: usize, radius: u64, cfg: &SamplerConfig) -> Result<Arc<Sampler>> {
    static CACHE: OnceLock<Mutex<HashMap<SamplerKey, Arc<Sampler>>>> = OnceLock::new();
    let key = SamplerKey {
        dim,
        radius,
        guard_bits: cfg.guard_factor.to_bits(),
        rule: cfg.guard_rule,
        limit: cfg.balayage_limit,
        retry: cfg.retry_limit,
        record: cfg.record_paths,
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("sampler cache").get(&key) {
        return Ok(s.clone());
    }
    let s = Arc::new(Sampler::new(dim, radius, cfg.clone())?);
    Ok(cache.lock().expect("sampler cache").entry(key).or_insert(s).clone())
}

/// Interlacement trace in `window` at level `u` with the default configuration.
pub fn sample(u: f64, window: &LatticeBox, seed: u64) -> Result<InterlacementSample> {
    sample_with(u, window, seed, &SamplerConfig::default())
}

pub fn sample_with(u: f64, window: &LatticeBox, seed: u64, cfg: &SamplerConfig) -> Result<InterlacementSample> {
    shared_sampler(window.dim(), window.radius, cfg)?.sample(u, window, seed)
}

pub fn monotone_couple(u1: f64, u2: f64, window: &LatticeBox, seed: u64) -> Result<(InterlacementSample, InterlacementSample)> {
    shared_sampler(window.dim(), window.radius, &SamplerConfig::default())?.couple(u1, u2, window, seed)
}
