//! Comparison of the equilibrium measure of a box collection with single-box measures.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::equilibrium::{equilibrium_measure, EquilibriumMeasure, SolverConfig};
use super::GreenTable;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticePoint, LatticeSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeEquilibriumReport {
    /// `max_B max_x |e_𝒞(x)/e_𝒞(B) − ē_B(x)| / ē_B(x)` over points with `ē_B(x) > 0`.
    pub delta_obs: f64,
    /// Worst deviation per box, in input order.
    pub per_box: Vec<f64>,
    /// Largest value of `e_𝒞(x) / (e_𝒞(B) ē_B(x)) − 1`.
    pub upper_deviation: f64,
    pub capacity: f64,
}

fn union_of(boxes: &[LatticeBox]) -> Result<LatticeSet> {
    let d = boxes[0].dim();
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            if boxes[i].intersects(&boxes[j]) {
                return Err(Error::OverlappingBoxes(i, j));
            }
        }
    }
    LatticeSet::from_points(d, boxes.iter().flat_map(|b| b.to_set().to_vec()))
}

/// Equilibrium measure of a disjoint box union, plus the deviation report.
pub fn relative_equilibrium(
    boxes: &[LatticeBox],
    green: &GreenTable,
    cfg: &SolverConfig,
) -> Result<(EquilibriumMeasure<f64>, RelativeEquilibriumReport)> {
    if boxes.is_empty() {
        return Err(Error::EmptySet);
    }
    let union = union_of(boxes)?;
    let e = equilibrium_measure::<f64>(&union, green, cfg)?;
    let mut single: HashMap<u64, EquilibriumMeasure<f64>> = HashMap::new();
    let mut per_box = Vec::with_capacity(boxes.len());
    let mut upper = f64::NEG_INFINITY;
    for b in boxes {
        if !single.contains_key(&b.radius) {
            let eb = equilibrium_measure::<f64>(&LatticeBox::centered(b.dim(), b.radius).to_set(), green, cfg)?;
            single.insert(b.radius, eb);
        }
        let eb = &single[&b.radius];
        let cap_b = eb.total();
        let pts: Vec<(LatticePoint, f64)> = eb.iter().map(|(p, m)| (p + b.center, m / cap_b)).collect();
        let mass_b: f64 = pts.iter().map(|(p, _)| e.mass_at(p)).sum();
        let mut worst = 0.0f64;
        for (p, bar) in &pts {
            if *bar <= 0.0 {
                continue;
            }
            let ratio = e.mass_at(p) / (mass_b * bar);
            worst = worst.max((ratio - 1.0).abs());
            upper = upper.max(ratio - 1.0);
        }
        per_box.push(worst);
    }
    let delta_obs = per_box.iter().copied().fold(0.0, f64::max);
    let capacity = e.total();
    Ok((e, RelativeEquilibriumReport { delta_obs, per_box, upper_deviation: upper, capacity }))
}

/// Deviation report for a collection of disjoint boxes, using the shared Green table.
pub fn relative_equilibrium_check(boxes: &[LatticeBox]) -> Result<RelativeEquilibriumReport> {
    if boxes.is_empty() {
        return Err(Error::EmptySet);
    }
    let green = GreenTable::shared(boxes[0].dim())?;
    Ok(relative_equilibrium(boxes, &green, &SolverConfig::default())?.1)
}
