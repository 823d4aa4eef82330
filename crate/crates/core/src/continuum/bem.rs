//! Single-layer collocation for the Brownian capacity of cell unions.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::panels::{kernel_constant, Panel, RectPanel};
use crate::error::{Error, Result};
use crate::lattice::{Symmetry, MAX_DIM};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Scalar;
use crate::shape::GridShape;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BemConfig {
    /// Panels per cell edge.
    pub refine: u32,
    pub max_panels: usize,
    /// Largest (symmetry-reduced) system handed to the dense solver.
    pub dense_limit: usize,
    pub use_symmetry: bool,
}

impl Default for BemConfig {
    fn default() -> Self {
        Self { refine: 1, max_panels: 400_000, dense_limit: 4000, use_symmetry: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    /// `|value − value at half the panel density|`.
    pub mesh_error: f64,
    /// Richardson extrapolation assuming first-order convergence.
    pub extrapolated: f64,
    pub panels: usize,
}

/// Collocation system for one shape.
#[derive(Clone, Debug)]
pub struct PanelSystem<T> {
    pub dim: usize,
    pub panels: Vec<RectPanel>,
    pub orbit_of: Vec<usize>,
    pub density: Vec<T>,
    pub capacity: T,
}

impl<T: Scalar> PanelSystem<T> {
    /// Smallest panel density; slightly negative values are discretisation noise.
    pub fn min_density(&self) -> T {
        self.density.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Exposed faces of the cells, each split into `refine^{d-1}` panels, in deterministic order.
pub fn shape_panels(shape: &GridShape, refine: u32) -> Vec<RectPanel> {
    let d = shape.dim();
    let m2 = 2.0 * shape.resolution() as f64;
    let step = 1.0 / (shape.resolution() as f64 * refine as f64);
    let mut out = Vec::new();
    for c in shape.cells().iter() {
        for axis in 0..d {
            for dir in [-1i64, 1] {
                let mut nb = c;
                nb.coords_mut()[axis] += dir;
                if shape.contains_cell(&nb) {
                    continue;
                }
                let lower = |i: usize| shape.lower2(c.get(i)) as f64 / m2;
                let offset = if dir < 0 { lower(axis) } else { lower(axis) + 1.0 / shape.resolution() as f64 };
                let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
                let count = (refine as usize).pow(others.len() as u32);
                for k in 0..count {
                    let mut lo = [0.0; MAX_DIM];
                    let mut hi = [0.0; MAX_DIM];
                    let mut r = k;
                    for &j in &others {
                        let t = (r % refine as usize) as f64;
                        r /= refine as usize;
                        lo[j] = lower(j) + t * step;
                        hi[j] = lo[j] + step;
                    }
                    out.push(RectPanel { dim: d, axis, offset, lo, hi });
                }
            }
        }
    }
    out
}

/// Panel orbits under the signed-permutation symmetries of the cell set.
fn panel_orbits(shape: &GridShape, panels: &[RectPanel], refine: u32, sym: &Symmetry) -> Vec<usize> {
    let d = shape.dim();
    if sym.order() <= 1 {
        return (0..panels.len()).collect();
    }
    let m = shape.resolution() as f64;
    let shift = if shape.is_centered() { 0.5 } else { 0.0 };
    let mut center = [0.0; MAX_DIM];
    for i in 0..d {
        center[i] = (0.5 * sym.center2()[i] as f64 + 0.5 - shift) / m;
    }
    let scale = 4.0 * m * refine as f64;
    let key = |x: &[f64]| -> [i64; MAX_DIM] {
        let mut k = [0; MAX_DIM];
        for i in 0..d {
            k[i] = (x[i] * scale).round() as i64;
        }
        k
    };
    let index: HashMap<[i64; MAX_DIM], usize> = panels.iter().enumerate().map(|(i, p)| (key(&p.centroid()), i)).collect();
    let mut orbit_of = vec![usize::MAX; panels.len()];
    let mut next = 0;
    for i in 0..panels.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let c = panels[i].centroid();
        let mut v = [0.0; MAX_DIM];
        for k in 0..d {
            v[k] = c[k] - center[k];
        }
        for g in sym.elements() {
            let w = g.apply_f64(&v);
            let mut y = [0.0; MAX_DIM];
            for k in 0..d {
                y[k] = w[k] + center[k];
            }
            let j = *index.get(&key(&y)).expect("panel set is invariant");
            orbit_of[j] = next;
        }
        next += 1;
    }
    orbit_of
}

/// Solves `Σ_j c_d ∫_{P_j} |x_i − y|^{2−d} σ_j dy = 1` at all centroids, with panels grouped into orbits
/// on which the density is constant. Returns the density per panel and the capacity.
pub fn solve_collocation<T: Scalar, P: Panel>(panels: &[P], dim: usize, orbit_of: &[usize], dense_limit: usize) -> Result<(Vec<T>, T)> {
    let k = orbit_of.iter().copied().max().map_or(0, |m| m + 1);
    if k > dense_limit {
        return Err(Error::SizeLimit { size: k, limit: dense_limit });
    }
    let mut reps = vec![usize::MAX; k];
    for (i, &o) in orbit_of.iter().enumerate() {
        if reps[o] == usize::MAX {
            reps[o] = i;
        }
    }
    let cd = kernel_constant(dim);
    let rows: Vec<Vec<f64>> = reps
        .par_iter()
        .map(|&r| {
            let x = panels[r].centroid();
            let mut row = vec![0.0; k];
            for (j, p) in panels.iter().enumerate() {
                row[orbit_of[j]] += cd * p.kernel_integral(&x[..dim], dim);
            }
            row
        })
        .collect();
    let mat = Matrix::from_fn(k, |i, j| T::of(rows[i][j]));
    let sigma = Lu::factor(mat)?.solve(&vec![T::one(); k]);
    let mut orbit_area = vec![0.0; k];
    for (i, p) in panels.iter().enumerate() {
        orbit_area[orbit_of[i]] += p.area();
    }
    let cap = (0..k).map(|o| sigma[o] * T::of(orbit_area[o])).sum();
    let density = orbit_of.iter().map(|&o| sigma[o]).collect();
    Ok((density, cap))
}

pub fn panel_system<T: Scalar>(shape: &GridShape, cfg: &BemConfig) -> Result<PanelSystem<T>> {
    panel_system_with_symmetry(shape, cfg, None)
}

/// As [`panel_system`], with a known symmetry group of the cell set (computed when `None`).
pub fn panel_system_with_symmetry<T: Scalar>(shape: &GridShape, cfg: &BemConfig, sym: Option<&Symmetry>) -> Result<PanelSystem<T>> {
    let d = shape.dim();
    if shape.is_empty() {
        return Ok(PanelSystem { dim: d, panels: vec![], orbit_of: vec![], density: vec![], capacity: T::zero() });
    }
    let panels = shape_panels(shape, cfg.refine);
    if panels.len() > cfg.max_panels {
        return Err(Error::SizeLimit { size: panels.len(), limit: cfg.max_panels });
    }
    let orbit_of = if cfg.use_symmetry {
        match sym {
            Some(g) => panel_orbits(shape, &panels, cfg.refine, g),
            None => panel_orbits(shape, &panels, cfg.refine, &Symmetry::of_set(shape.cells())),
        }
    } else {
        (0..panels.len()).collect()
    };
    let (density, capacity) = solve_collocation::<T, _>(&panels, d, &orbit_of, cfg.dense_limit)?;
    Ok(PanelSystem { dim: d, panels, orbit_of, density, capacity })
}

/// `cap̃(shape)`; zero for the empty shape.
pub fn brownian_capacity(shape: &GridShape, cfg: &BemConfig) -> Result<f64> {
    Ok(panel_system::<f64>(shape, cfg)?.capacity)
}

/// Capacity at `cfg.refine` and `2·cfg.refine` panels per cell edge, with the difference as error estimate.
pub fn brownian_capacity_with_error(shape: &GridShape, cfg: &BemConfig) -> Result<CapacityEstimate> {
    let coarse = brownian_capacity(shape, cfg)?;
    let fine_cfg = BemConfig { refine: 2 * cfg.refine, ..cfg.clone() };
    let fine = panel_system::<f64>(shape, &fine_cfg)?;
    let diff = fine.capacity - coarse;
    Ok(CapacityEstimate {
        value: fine.capacity,
        mesh_error: diff.abs(),
        extrapolated: fine.capacity + diff,
        panels: fine.panels.len(),
    })
}
