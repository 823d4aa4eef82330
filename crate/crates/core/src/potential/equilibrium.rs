//! Equilibrium measures and capacities of finite lattice sets.

use serde::{Deserialize, Serialize};

use super::fft::GreenConvolution;
use super::GreenTable;
use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticeSet, Orbits, Symmetry};
use crate::linalg::{conjugate_gradient, dot, Cholesky, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest (symmetry-reduced) system solved with an assembled matrix.
    pub dense_limit: usize,
    /// Assembled systems up to this size are factorised; larger ones use conjugate gradients.
    pub factor_limit: usize,
    /// Largest system accepted at all.
    pub max_unknowns: usize,
    /// Bound on `‖G e − 1‖∞`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Reduce by the signed-permutation symmetries of the set.
    pub use_symmetry: bool,
    /// Largest acceptable pivot-spread condition estimate.
    pub max_condition: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dense_limit: 2000,
            factor_limit: 256,
            max_unknowns: 2_000_000,
            residual_tol: 1e-8,
            max_iterations: 5000,
            use_symmetry: true,
            max_condition: 1e12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    Dense,
    Iterative,
}

/// Solution of `Σ_y g(x,y) e(y) = 1` on a finite set.
///
/// Only boundary-relevant points (members with a neighbour outside the set) carry mass; the rest are zero.
#[derive(Clone, Debug)]
pub struct EquilibriumMeasure<T> {
    set: LatticeSet,
    points: Vec<LatticePoint>,
    mass: Vec<T>,
    total: T,
    residual: f64,
    method: SolveMethod,
    reduced_size: usize,
}

impl<T: Scalar> EquilibriumMeasure<T> {
    pub fn support(&self) -> &LatticeSet {
        &self.set
    }

    /// Points that may carry mass, in lexicographic order.
    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn masses(&self) -> &[T] {
        &self.mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, T)> + '_ {
        self.points.iter().copied().zip(self.mass.iter().copied())
    }

    pub fn mass_at(&self, p: &LatticePoint) -> T {
        match self.points.binary_search(p) {
            Ok(i) => self.mass[i],
            Err(_) => T::zero(),
        }
    }

    /// Capacity.
    pub fn total(&self) -> T {
        self.total
    }

    /// `‖G e − 1‖∞` over the solved rows.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    /// Number of unknowns after symmetry reduction.
    pub fn reduced_size(&self) -> usize {
        self.reduced_size
    }

    /// `Σ_y g(x,y) e(y)`, which equals `P_x[H_A < ∞]`.
    pub fn potential(&self, green: &GreenTable, x: &LatticePoint) -> f64 {
        self.iter().map(|(y, m)| green.g(x, &y) * m.to_f64_lossy()).sum()
    }

    /// Smallest mass; negative values indicate solver trouble.
    pub fn min_mass(&self) -> T {
        self.mass.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Dense `G` restricted to `points`.
pub fn green_matrix<T: Scalar>(green: &GreenTable, points: &[LatticePoint]) -> Matrix<T> {
    Matrix::from_fn(points.len(), |i, j| T::of(green.g(&points[i], &points[j])))
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn equilibrium_measure<T: Scalar>(
    a: &LatticeSet,
    green: &GreenTable,
    cfg: &SolverConfig,
) -> Result<EquilibriumMeasure<T>> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.dim() != green.dim() {
        return Err(Error::DimensionMismatch { expected: green.dim(), got: a.dim() });
    }
    let points = a.boundary_points().to_vec();
    let n = points.len();
    if n > cfg.max_unknowns {
        return Err(Error::SizeLimit { size: n, limit: cfg.max_unknowns });
    }
    let sym = if cfg.use_symmetry && n > 1 { Symmetry::of_set(a) } else { Symmetry::trivial(a.dim()) };
    let orbits = sym.orbits(&points);
    let (mass, residual, method) = if orbits.len() <= cfg.dense_limit {
        let (m, r) = solve_reduced::<T>(green, &points, &orbits, cfg)?;
        (m, r, SolveMethod::Dense)
    } else {
        let (m, r) = solve_iterative::<T>(green, &points, cfg)?;
        (m, r, SolveMethod::Iterative)
    };
    if !(residual <= cfg.residual_tol) {
        return Err(Error::NoConvergence { iterations: 0, residual });
    }
    let total = mass.iter().copied().sum();
    Ok(EquilibriumMeasure { set: a.clone(), points, mass, total, residual, method, reduced_size: orbits.len() })
}

fn solve_reduced<T: Scalar>(
    green: &GreenTable,
    points: &[LatticePoint],
    orbits: &Orbits,
    cfg: &SolverConfig,
) -> Result<(Vec<T>, f64)> {
    let k = orbits.len();
    // m[o][o'] = Σ_{y ∈ o'} g(rep(o), y); the symmetric form is diag(|o|) m.
    let mut m = vec![0.0f64; k * k];
    for o in 0..k {
        let x = points[orbits.representative(o)];
        let row = &mut m[o * k..(o + 1) * k];
        for (j, y) in points.iter().enumerate() {
            row[orbits.orbit_of[j]] += green.g(&x, y);
        }
    }
    let sizes: Vec<f64> = orbits.members.iter().map(|v| v.len() as f64).collect();
    if k > cfg.factor_limit {
        return solve_assembled_cg(&m, &sizes, points, orbits, cfg);
    }
    let t = Matrix::from_fn(k, |i, j| T::of(sizes[i] * m[i * k + j]));
    let chol = Cholesky::factor(t)?;
    if chol.condition_estimate().to_f64_lossy() > cfg.max_condition {
        return Err(Error::IllConditioned { row: 0, n: k, pivot: chol.condition_estimate().to_f64_lossy() });
    }
    let rhs: Vec<T> = sizes.iter().map(|&s| T::of(s)).collect();
    let e = chol.solve(&rhs);
    let e64: Vec<f64> = e.iter().map(|v| v.to_f64_lossy()).collect();
    let residual = (0..k).map(|o| (dot(&m[o * k..(o + 1) * k], &e64) - 1.0).abs()).fold(0.0, f64::max);
    let mass = (0..points.len()).map(|j| e[orbits.orbit_of[j]]).collect();
    Ok((mass, residual))
}

/// Dot product with four independent accumulators so the reduction vectorises.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Preconditioned CG on `diag(|o|) m e = |o|`, which is symmetric positive definite.
fn solve_assembled_cg<T: Scalar>(
    m: &[f64],
    sizes: &[f64],
    points: &[LatticePoint],
    orbits: &Orbits,
    cfg: &SolverConfig,
) -> Result<(Vec<T>, f64)> {
    let k = sizes.len();
    let apply = |v: &[f64], out: &mut [f64]| {
        for o in 0..k {
            out[o] = sizes[o] * dot4(&m[o * k..(o + 1) * k], v);
        }
    };
    let inv_diag: Vec<f64> = (0..k).map(|o| 1.0 / (sizes[o] * m[o * k + o])).collect();
    let (e, _) = conjugate_gradient(
        apply,
        |r: &[f64], z: &mut [f64]| {
            for i in 0..k {
                z[i] = r[i] * inv_diag[i];
            }
        },
        sizes,
        None,
        0.25 * cfg.residual_tol,
        cfg.max_iterations,
    )?;
    let residual = (0..k).map(|o| (dot(&m[o * k..(o + 1) * k], &e) - 1.0).abs()).fold(0.0, f64::max);
    let mass = (0..points.len()).map(|j| T::of(e[orbits.orbit_of[j]])).collect();
    Ok((mass, residual))
}

fn solve_iterative<T: Scalar>(green: &GreenTable, points: &[LatticePoint], cfg: &SolverConfig) -> Result<(Vec<T>, f64)> {
    let n = points.len();
    let conv = GreenConvolution::new(green, points);
    let b = vec![1.0; n];
    let inv_diag = 1.0 / green.origin();
    let (x, _) = conjugate_gradient(
        |v: &[f64], out: &mut [f64]| conv.apply(v, out),
        |r: &[f64], z: &mut [f64]| {
            for (zi, ri) in z.iter_mut().zip(r) {
                *zi = ri * inv_diag;
            }
        },
        &b,
        None,
        0.25 * cfg.residual_tol,
        cfg.max_iterations,
    )?;
    let mut gx = vec![0.0; n];
    conv.apply(&x, &mut gx);
    let residual = norm_inf(&gx.iter().map(|v| v - 1.0).collect::<Vec<_>>());
    Ok((x.into_iter().map(T::of).collect(), residual))
}

/// `cap(A)` with the shared Green table and default settings.
pub fn capacity(a: &LatticeSet) -> Result<f64> {
    let green = GreenTable::shared(a.dim())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(equilibrium_measure::<f64>(a, &green, &SolverConfig::default())?.total())
}
