//! Discrete against continuum capacity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::bem::{brownian_capacity_with_error, solve_collocation, BemConfig, CapacityEstimate};
use super::panels::{Panel, RectPanel};
use crate::error::{Error, Result};
use crate::lattice::{blow_up, LatticeBox, LatticeSet, Symmetry, MAX_DIM};
use crate::potential::{equilibrium_measure, GreenTable, SolverConfig};
use crate::shape::GridShape;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: u64,
    pub discrete_capacity: f64,
    /// `cap(A_N) / N^{d−2}`.
    pub scaled: f64,
    /// `d·cap(A_N) / (N^{d−2}·cap̃(A))`.
    pub ratio: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub dim: usize,
    pub continuum: CapacityEstimate,
    pub rows: Vec<CompareRow>,
    /// `|ratio − 1|` strictly decreasing along the rows.
    pub monotone: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Ratio of `d·cap(A_N)/N^{d−2}` to `cap̃(A)` for each `N`.
pub fn discrete_continuum_compare(
    shape: &GridShape,
    n_list: &[u64],
    bem: &BemConfig,
    solver: &SolverConfig,
) -> Result<CompareReport> {
    let d = shape.dim();
    let green = GreenTable::shared(d)?;
    let continuum = brownian_capacity_with_error(shape, bem)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let a = blow_up(shape, n)?;
        let cap = if a.is_empty() { 0.0 } else { equilibrium_measure::<f64>(&a, &green, solver)?.total() };
        let scaled = cap / (n as f64).powi(d as i32 - 2);
        let ratio = d as f64 * scaled / continuum.value;
        rows.push(CompareRow { n, discrete_capacity: cap, scaled, ratio, deviation: (ratio - 1.0).abs() });
    }
    let monotone = strictly_decreasing(&rows.iter().map(|r| r.deviation).collect::<Vec<_>>());
    Ok(CompareReport { dim: d, continuum, rows, monotone })
}

/// Faces of the fillings `[c − r − ½, c + r + ½]` of disjoint lattice boxes, `per_edge` panels per face edge.
pub fn box_filling_panels(boxes: &[LatticeBox], per_edge: u32) -> Vec<RectPanel> {
    let mut out = Vec::new();
    for b in boxes {
        let d = b.dim();
        let half = b.radius as f64 + 0.5;
        let step = 2.0 * half / per_edge as f64;
        for axis in 0..d {
            for dir in [-1.0, 1.0] {
                let offset = b.center.get(axis) as f64 + dir * half;
                let others: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
                let count = (per_edge as usize).pow(others.len() as u32);
                for k in 0..count {
                    let mut lo = [0.0; MAX_DIM];
                    let mut hi = [0.0; MAX_DIM];
                    let mut r = k;
                    for &j in &others {
                        let t = (r % per_edge as usize) as f64;
                        r /= per_edge as usize;
                        lo[j] = b.center.get(j) as f64 - half + t * step;
                        hi[j] = lo[j] + step;
                    }
                    out.push(RectPanel { dim: d, axis, offset, lo, hi });
                }
            }
        }
    }
    out
}

fn orbits_under(sym: &Symmetry, panels: &[RectPanel], resolution: f64) -> Vec<usize> {
    let d = sym.dim();
    let key = |x: &[f64]| -> [i64; MAX_DIM] {
        let mut k = [0; MAX_DIM];
        for i in 0..d {
            k[i] = (x[i] * resolution).round() as i64;
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
        for g in 0..sym.order() {
            let y = sym.apply_real(g, &c[..d]);
            let j = *index.get(&key(&y[..d])).expect("panel set is invariant");
            orbit_of[j] = next;
        }
        next += 1;
    }
    orbit_of
}

/// `cap̃` of the filling of a disjoint box collection.
pub fn box_filling_capacity(boxes: &[LatticeBox], per_edge: u32, cfg: &BemConfig) -> Result<f64> {
    if boxes.is_empty() {
        return Ok(0.0);
    }
    for (i, a) in boxes.iter().enumerate() {
        for (j, b) in boxes.iter().enumerate().skip(i + 1) {
            if a.dilate(1).intersects(b) {
                return Err(Error::OverlappingBoxes(i, j));
            }
        }
    }
    let d = boxes[0].dim();
    let panels = box_filling_panels(boxes, per_edge);
    if panels.len() > cfg.max_panels {
        return Err(Error::SizeLimit { size: panels.len(), limit: cfg.max_panels });
    }
    let orbit_of = if cfg.use_symmetry {
        let union = LatticeSet::from_points(d, boxes.iter().flat_map(|b| b.to_set().to_vec()))?;
        let min_step = boxes.iter().map(|b| (2 * b.radius + 1) as f64 / per_edge as f64).fold(f64::INFINITY, f64::min);
        orbits_under(&Symmetry::of_set(&union), &panels, 4.0 / min_step)
    } else {
        (0..panels.len()).collect()
    };
    Ok(solve_collocation::<f64, _>(&panels, d, &orbit_of, cfg.dense_limit)?.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionRow {
    pub l: u64,
    pub discrete_capacity: f64,
    pub continuum_capacity: f64,
    /// `d·cap(𝒞) / cap̃(𝒞̃)`.
    pub ratio: f64,
    pub delta_obs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectionReport {
    pub k: u64,
    pub rows: Vec<CollectionRow>,
    pub monotone: bool,
}

/// Compares `d·cap(𝒞)` with `cap̃(𝒞̃)` for `L`-boxes placed at the given cells of `(2K+1)L·Z^d`.
pub fn collection_compare(
    dim: usize,
    sites: &[Vec<i64>],
    k: u64,
    l_list: &[u64],
    per_edge: u32,
    bem: &BemConfig,
    solver: &SolverConfig,
) -> Result<CollectionReport> {
    let green = GreenTable::shared(dim)?;
    let mut rows = Vec::new();
    for &l in l_list {
        let spacing = ((2 * k + 1) * l) as i64;
        let boxes = sites
            .iter()
            .map(|s| {
                let c: Vec<i64> = s.iter().map(|&v| v * spacing).collect();
                Ok(LatticeBox::new(crate::lattice::LatticePoint::new(&c)?, l))
            })
            .collect::<Result<Vec<_>>>()?;
        let union = LatticeSet::from_points(dim, boxes.iter().flat_map(|b| b.to_set().to_vec()))?;
        let discrete = equilibrium_measure::<f64>(&union, &green, solver)?.total();
        let continuum = box_filling_capacity(&boxes, per_edge, bem)?;
        let ratio = dim as f64 * discrete / continuum;
        rows.push(CollectionRow { l, discrete_capacity: discrete, continuum_capacity: continuum, ratio, delta_obs: (ratio - 1.0).abs() });
    }
    let monotone = strictly_decreasing(&rows.iter().map(|r| r.delta_obs).collect::<Vec<_>>());
    Ok(CollectionReport { k, rows, monotone })
}
