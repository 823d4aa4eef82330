//! Upper bounds for `f(λ) = inf { cap̃(B̃(0,1) \ A) : cap̃(A) ≤ λ }` over cell unions.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::continuum::{brownian_capacity, panel_system_with_symmetry, BemConfig};
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticeSet, Symmetry};
use crate::shape::GridShape;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FSolverConfig {
    pub dim: usize,
    /// Panels per unit length, shared by all resolutions so that refined witnesses keep their capacities.
    pub panel_density: u32,
    pub bem: BemConfig,
    /// Initial temperature as a fraction of `cap̃(B̃(0,1))`.
    pub temperature: f64,
    pub cooling: f64,
    pub moves_per_sweep: usize,
    /// Cap on greedy descent steps before annealing.
    pub greedy_steps: usize,
    /// Search over cell orbits of the box symmetry group instead of single cells.
    pub symmetric: bool,
}

impl Default for FSolverConfig {
    fn default() -> Self {
        Self { dim: 3, panel_density: 16, bem: BemConfig::default(), temperature: 0.2, cooling: 0.95, moves_per_sweep: 4, greedy_steps: 64, symmetric: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FCurvePoint {
    pub lambda: f64,
    pub upper_bound: f64,
    pub witness: GridShape,
    pub cap_a: f64,
    pub cap_complement: f64,
    pub resolution: u32,
    pub iterations: u64,
    pub seed: u64,
    /// Capacity solver tolerance at this resolution.
    pub tolerance: f64,
}

/// Evaluates capacities of unit-box cell unions with cavities filled, memoised by shape.
pub struct CapacityOracle {
    m: u32,
    dim: usize,
    bem: BemConfig,
    density: u32,
    sym: Option<Symmetry>,
    cache: HashMap<GridShape, f64>,
    evaluations: u64,
    tolerance: Option<f64>,
}

impl CapacityOracle {
    /// Oracle at resolution `m` with `density` panels per unit length (`m` must divide it).
    pub fn new(dim: usize, m: u32, density: u32, bem: BemConfig) -> Result<Self> {
        if m == 0 || density % m != 0 {
            return Err(Error::InvalidParameter(format!("resolution {m} does not divide panel density {density}")));
        }
        let bem = BemConfig { refine: density / m, ..bem };
        Ok(Self { m, dim, bem, density, sym: None, cache: HashMap::new(), evaluations: 0, tolerance: None })
    }

    /// Declares that every queried shape is invariant under the symmetry group of the unit box.
    fn assume_box_symmetry(&mut self) {
        self.sym = Some(Symmetry::of_set(GridShape::unit_box(self.dim, self.m).cells()));
    }

    pub fn capacity(&mut self, shape: &GridShape) -> Result<f64> {
        let filled = shape.fill_cavities();
        if let Some(&c) = self.cache.get(&filled) {
            return Ok(c);
        }
        self.evaluations += 1;
        // Cavity filling keeps the box symmetry, so the declared group still applies.
        let c = panel_system_with_symmetry::<f64>(&filled, &self.bem, self.sym.as_ref())?.capacity;
        self.cache.insert(filled, c);
        Ok(c)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn box_capacity(&mut self) -> Result<f64> {
        self.capacity(&GridShape::unit_box(self.dim, self.m))
    }

    /// `2·|cap̃_ρ(box) − cap̃_{2ρ}(box)|` at panel density `ρ`: the first-order extrapolation bound on
    /// the error of the coarse value.
    pub fn tolerance(&mut self) -> Result<f64> {
        if let Some(t) = self.tolerance {
            return Ok(t);
        }
        let coarse = self.box_capacity()?;
        let fine = box_capacity_at_density(self.dim, 2 * self.density, &self.bem)?;
        let t = 2.0 * (fine - coarse).abs();
        self.tolerance = Some(t);
        Ok(t)
    }
}

/// `cap̃(B̃(0,1))` with `density` panels per unit length.
pub fn box_capacity_at_density(dim: usize, density: u32, bem: &BemConfig) -> Result<f64> {
    brownian_capacity(&GridShape::unit_box(dim, 1), &BemConfig { refine: density, ..bem.clone() })
}

struct Search {
    m: u32,
    dim: usize,
    orbits: Vec<Vec<LatticePoint>>,
    orbit_of: HashMap<LatticePoint, usize>,
    adjacent: Vec<Vec<usize>>,
    surface: Vec<bool>,
}

impl Search {
    fn new(dim: usize, m: u32, symmetric: bool) -> Self {
        let full = GridShape::unit_box(dim, m);
        let cells = full.cells().to_vec();
        let orbits: Vec<Vec<LatticePoint>> = if symmetric {
            let o = Symmetry::of_set(full.cells()).orbits(&cells);
            o.members.iter().map(|mem| mem.iter().map(|&i| cells[i]).collect()).collect()
        } else {
            cells.iter().map(|&c| vec![c]).collect()
        };
        let mut orbit_of = HashMap::new();
        for (o, mem) in orbits.iter().enumerate() {
            for c in mem {
                orbit_of.insert(*c, o);
            }
        }
        let mut adjacent = vec![Vec::new(); orbits.len()];
        let mut surface = vec![false; orbits.len()];
        for (o, mem) in orbits.iter().enumerate() {
            for c in mem {
                for q in c.neighbors() {
                    match orbit_of.get(&q) {
                        Some(&p) if p != o => adjacent[o].push(p),
                        Some(_) => {}
                        None => surface[o] = true,
                    }
                }
            }
            adjacent[o].sort_unstable();
            adjacent[o].dedup();
        }
        Self { m, dim, orbits, orbit_of, adjacent, surface }
    }

    fn shape(&self, state: &[bool], inside: bool) -> GridShape {
        let cells = LatticeSet::from_points(
            self.dim,
            self.orbits.iter().zip(state).filter(|(_, &s)| s == inside).flat_map(|(mem, _)| mem.iter().copied()),
        )
        .expect("dimension");
        GridShape::new(self.m, false, cells).expect("resolution")
    }

    fn state_of(&self, witness: &GridShape) -> Vec<bool> {
        let mut st = vec![false; self.orbits.len()];
        for c in witness.cells().iter() {
            if let Some(&o) = self.orbit_of.get(&c) {
                st[o] = true;
            }
        }
        st
    }

    fn frontier(&self, state: &[bool]) -> Vec<usize> {
        (0..self.orbits.len())
            .filter(|&o| self.surface[o] || self.adjacent[o].iter().any(|&p| state[p] != state[o]))
            .filter(|&o| state[o] || self.surface[o] || self.adjacent[o].iter().any(|&p| state[p]))
            .collect()
    }

    fn cell_count(&self, state: &[bool]) -> usize {
        self.orbits.iter().zip(state).filter(|(_, &s)| s).map(|(m, _)| m.len()).sum()
    }
}

#[derive(Clone)]
struct Eval {
    state: Vec<bool>,
    cap_a: f64,
    cap_c: f64,
    cells: usize,
}

fn better(a: &Eval, b: &Eval) -> bool {
    a.cap_c < b.cap_c - 1e-12 || ((a.cap_c - b.cap_c).abs() <= 1e-12 && a.cells < b.cells)
}

/// Capacities of `A` and of its complement; the complement is skipped (infinite) when `cap̃(A) > limit`.
fn evaluate(search: &Search, oracle: &mut CapacityOracle, state: Vec<bool>, limit: f64) -> Result<Eval> {
    let cap_a = oracle.capacity(&search.shape(&state, true))?;
    let cap_c = if cap_a <= limit { oracle.capacity(&search.shape(&state, false))? } else { f64::INFINITY };
    let cells = search.cell_count(&state);
    Ok(Eval { state, cap_a, cap_c, cells })
}

fn run_search(
    lambda: f64,
    search: &Search,
    oracle: &mut CapacityOracle,
    starts: &[GridShape],
    admit_slack: f64,
    budget: usize,
    seed: u64,
    cfg: &FSolverConfig,
) -> Result<(Eval, u64)> {
    let before = oracle.evaluations();
    let mut cur = evaluate(search, oracle, vec![false; search.orbits.len()], f64::INFINITY)?;
    let full = evaluate(search, oracle, vec![true; search.orbits.len()], lambda)?;
    if full.cap_a <= lambda && better(&full, &cur) {
        cur = full;
    }
    for w in starts {
        let e = evaluate(search, oracle, search.state_of(w), lambda + admit_slack)?;
        if e.cap_a <= lambda + admit_slack && better(&e, &cur) {
            cur = e;
        }
    }
    // Greedy descent over frontier moves.
    for _ in 0..cfg.greedy_steps {
        let mut best: Option<Eval> = None;
        for o in search.frontier(&cur.state) {
            let mut st = cur.state.clone();
            st[o] = !st[o];
            let e = evaluate(search, oracle, st, lambda)?;
            if e.cap_a <= lambda && better(&e, &cur) && best.as_ref().is_none_or(|b| better(&e, b)) {
                best = Some(e);
            }
        }
        match best {
            Some(b) => cur = b,
            None => break,
        }
    }
    // Annealing from the greedy optimum.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = cur.clone();
    let mut temp = cfg.temperature * oracle.box_capacity()?;
    for _ in 0..budget {
        for _ in 0..cfg.moves_per_sweep {
            let front = search.frontier(&cur.state);
            if front.is_empty() {
                break;
            }
            let o = front[rng.random_range(0..front.len())];
            let mut st = cur.state.clone();
            st[o] = !st[o];
            let e = evaluate(search, oracle, st, lambda)?;
            let accept_draw: f64 = rng.random();
            if e.cap_a > lambda {
                continue;
            }
            let delta = e.cap_c - cur.cap_c;
            if delta <= 0.0 || accept_draw < (-delta / temp).exp() {
                cur = e;
                if better(&cur, &best) {
                    best = cur.clone();
                }
            }
        }
        temp *= cfg.cooling;
    }
    Ok((best, oracle.evaluations() - before))
}

fn prepare(m: u32, cfg: &FSolverConfig) -> Result<(Search, CapacityOracle)> {
    let mut oracle = CapacityOracle::new(cfg.dim, m, cfg.panel_density, cfg.bem.clone())?;
    if cfg.symmetric {
        oracle.assume_box_symmetry();
    }
    Ok((Search::new(cfg.dim, m, cfg.symmetric), oracle))
}

fn check_resolution(m: u32) -> Result<()> {
    if ![4, 8, 16].contains(&m) {
        return Err(Error::InvalidParameter(format!("resolution {m} not in {{4, 8, 16}}")));
    }
    Ok(())
}

/// Best feasible witness found for `λ`; `budget` is the number of annealing sweeps.
pub fn f_upper_bound(lambda: f64, m: u32, budget: usize, seed: u64, cfg: &FSolverConfig) -> Result<FCurvePoint> {
    check_resolution(m)?;
    let (search, mut oracle) = prepare(m, cfg)?;
    point(lambda, &search, &mut oracle, &[], 0.0, budget, seed, cfg)
}

#[allow(clippy::too_many_arguments)]
fn point(
    lambda: f64,
    search: &Search,
    oracle: &mut CapacityOracle,
    starts: &[GridShape],
    admit_slack: f64,
    budget: usize,
    seed: u64,
    cfg: &FSolverConfig,
) -> Result<FCurvePoint> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda {lambda} negative")));
    }
    let (best, iterations) = run_search(lambda, search, oracle, starts, admit_slack, budget, seed, cfg)?;
    Ok(FCurvePoint {
        lambda,
        upper_bound: best.cap_c,
        witness: search.shape(&best.state, true),
        cap_a: best.cap_a,
        cap_complement: best.cap_c,
        resolution: search.m,
        iterations,
        seed,
        tolerance: oracle.tolerance()?,
    })
}

/// Upper bounds along an ascending `λ` grid, warm-started from the previous point and, when given,
/// from the matching point of a coarser curve (admitted up to the solver tolerance). The result is
/// made non-increasing by carrying earlier witnesses forward.
pub fn f_curve(
    lambdas: &[f64],
    m: u32,
    budget: usize,
    seed: u64,
    cfg: &FSolverConfig,
    coarse: Option<&[FCurvePoint]>,
) -> Result<Vec<FCurvePoint>> {
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("lambda grid must be ascending".into()));
    }
    check_resolution(m)?;
    let (search, mut oracle) = prepare(m, cfg)?;
    let tol = oracle.tolerance()?;
    let mut out: Vec<FCurvePoint> = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let mut starts = Vec::new();
        if let Some(prev) = out.last() {
            starts.push(prev.witness.clone());
        }
        let mut slack = 0.0;
        if let Some(c) = coarse.and_then(|c| c.iter().find(|p| p.lambda == lambda)) {
            if c.resolution <= m && m % c.resolution == 0 {
                starts.push(c.witness.refine(m / c.resolution));
                slack = tol;
            }
        }
        let p = point(lambda, &search, &mut oracle, &starts, slack, budget, seed.wrapping_add(i as u64), cfg)?;
        out.push(p);
    }
    for i in 1..out.len() {
        if out[i - 1].upper_bound < out[i].upper_bound {
            let lambda = out[i].lambda;
            let iterations = out[i].iterations;
            out[i] = FCurvePoint { lambda, iterations, ..out[i - 1].clone() };
        }
    }
    Ok(out)
}

/// One JSON object per point.
pub fn write_curve(curve: &[FCurvePoint], path: &Path) -> Result<()> {
    let mut s = String::new();
    for p in curve {
        s.push_str(&serde_json::to_string(p)?);
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Smallest upper bound available for `f(x)` from the curve: any point with `λ ≤ x` bounds it.
pub fn f_upper_at(x: f64, curve: &[FCurvePoint], cap_box: f64) -> f64 {
    if x >= cap_box {
        return 0.0;
    }
    curve.iter().filter(|p| p.lambda <= x).map(|p| p.upper_bound).fold(cap_box, f64::min)
}

/// `(u/d)·f(dλ)` bounded through the curve, for each `λ`.
pub fn rate_predictions(u: f64, dim: usize, lambdas: &[f64], curve: &[FCurvePoint], cap_box: f64) -> Vec<f64> {
    let d = dim as f64;
    lambdas.iter().map(|&l| u / d * f_upper_at(d * l, curve, cap_box)).collect()
}

/// `(min(u₁,u₂)/d)·cap̃(B̃(0,1))`.
pub fn intersection_rate(u1: f64, u2: f64, dim: usize, cap_box: f64) -> f64 {
    u1.min(u2) / dim as f64 * cap_box
}
