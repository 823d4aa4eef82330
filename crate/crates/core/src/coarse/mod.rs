//! Good and bad mesoscopic boxes of an interlacement sample.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interlacement::{local_time_functional, InterlacementSample};
use crate::lattice::{mesoscopic_partition, LatticeBox, LatticePoint, PartitionConfig};
use crate::potential::{equilibrium_measure, relative_equilibrium, EquilibriumMeasure, GreenTable, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoxLabel {
    TypeIGood,
    TypeIIGood,
    Bad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxClassification {
    #[serde(rename = "box")]
    pub bx: LatticeBox,
    pub label: BoxLabel,
    /// `max_{z ∈ ∂ᵢB} P_z[trace in B never hit]`.
    pub max_escape: f64,
    /// `⟨L^u, ē_B⟩`.
    pub avg_local_time: f64,
}

/// Type-I if the escape witness is below `δ`, else Type-II if the local-time witness is below `δu`
/// (or vanishes at `u = 0`), else bad.
pub fn derive_label(max_escape: f64, avg_local_time: f64, delta: f64, u: f64) -> BoxLabel {
    if max_escape < delta {
        BoxLabel::TypeIGood
    } else if avg_local_time < delta * u || (u == 0.0 && avg_local_time == 0.0) {
        BoxLabel::TypeIIGood
    } else {
        BoxLabel::Bad
    }
}

impl BoxClassification {
    pub fn rederive(&self, delta: f64, u: f64) -> BoxLabel {
        derive_label(self.max_escape, self.avg_local_time, delta, u)
    }
}

fn box_measure(green: &GreenTable, b: &LatticeBox) -> Result<Arc<EquilibriumMeasure<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<EquilibriumMeasure<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (b.dim(), b.radius);
    if let Some(e) = cache.lock().expect("measure cache").get(&key) {
        return Ok(e.clone());
    }
    let e = Arc::new(equilibrium_measure::<f64>(&LatticeBox::centered(b.dim(), b.radius).to_set(), green, &SolverConfig::default())?);
    cache.lock().expect("measure cache").insert(key, e.clone());
    Ok(e)
}

fn validate_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0,1)")));
    }
    Ok(())
}

/// Classifies one box of the window. Escape probabilities use `P_z[H_T < ∞] = Σ_y g(z,y) e_T(y)`.
pub fn classify_box(s: &InterlacementSample, bx: &LatticeBox, delta: f64) -> Result<BoxClassification> {
    validate_delta(delta)?;
    if !s.window.contains_box(bx) {
        return Err(Error::OutsideWindow);
    }
    let green = GreenTable::shared(bx.dim())?;
    let trace = s.occupancy.restrict_to_box(bx);
    let max_escape = if trace.is_empty() {
        1.0
    } else {
        let e = equilibrium_measure::<f64>(&trace, &green, &SolverConfig::default())?;
        let mut worst = 0.0f64;
        for z in bx.inner_boundary().iter() {
            if trace.contains(&z) {
                continue;
            }
            let hit: f64 = e.iter().map(|(y, m)| m * green.g(&z, &y)).sum();
            worst = worst.max((1.0 - hit).clamp(0.0, 1.0));
        }
        worst
    };
    let eb = box_measure(&green, bx)?;
    let cap_b = eb.total();
    let mut avg = 0.0;
    for (p, m) in eb.iter() {
        avg += s.local_time(&(p + bx.center)) * m / cap_b;
    }
    Ok(BoxClassification { bx: *bx, label: derive_label(max_escape, avg, delta, s.u), max_escape, avg_local_time: avg })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrainReport {
    pub n: u64,
    pub l: u64,
    pub k: u64,
    pub delta: f64,
    pub rho: f64,
    pub u: f64,
    pub seed: u64,
    pub boxes: Vec<BoxClassification>,
    pub bad_count: usize,
    /// At most `ρ(N/L)^d` bad boxes.
    pub event_a: bool,
}

impl CoarseGrainReport {
    pub fn count(&self, label: BoxLabel) -> usize {
        self.boxes.iter().filter(|b| b.label == label).count()
    }

    pub fn bad_fraction(&self) -> f64 {
        if self.boxes.is_empty() { 0.0 } else { self.bad_count as f64 / self.boxes.len() as f64 }
    }

    pub fn type_two_boxes(&self) -> Vec<LatticeBox> {
        self.boxes.iter().filter(|b| b.label == BoxLabel::TypeIIGood).map(|b| b.bx).collect()
    }

    /// Labels recomputed from the stored witnesses agree with the stored labels.
    pub fn labels_consistent(&self) -> bool {
        self.boxes.iter().all(|b| b.rederive(self.delta, self.u) == b.label)
    }

    /// One JSON object per box.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for b in &self.boxes {
            out.push_str(&serde_json::to_string(b)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }
}

/// Classifies every `L`-box of the partition of the sample window.
pub fn census(s: &InterlacementSample, delta: f64, rho: f64, partition: &PartitionConfig) -> Result<CoarseGrainReport> {
    validate_delta(delta)?;
    if !(rho >= 0.0) {
        return Err(Error::InvalidParameter(format!("rho {rho} negative")));
    }
    let d = s.window.dim();
    let n = s.window.radius;
    let part = mesoscopic_partition(n, d, partition)?;
    if part.boxes.is_empty() {
        return Err(Error::EmptySet);
    }
    let shift: LatticePoint = s.window.center;
    let boxes: Vec<BoxClassification> = part
        .boxes
        .par_iter()
        .map(|b| classify_box(s, &LatticeBox::new(b.center + shift, b.radius), delta))
        .collect::<Result<_>>()?;
    let bad_count = boxes.iter().filter(|b| b.label == BoxLabel::Bad).count();
    let threshold = rho * (n as f64 / part.l as f64).powi(d as i32);
    Ok(CoarseGrainReport {
        n,
        l: part.l,
        k: part.k,
        delta,
        rho,
        u: s.u,
        seed: s.seed,
        boxes,
        bad_count,
        event_a: bad_count as f64 <= threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HReport {
    /// `⟨L^u, e_{𝒞₂}⟩`.
    pub h: f64,
    pub capacity: f64,
    /// Largest `e_{𝒞₂}(x) / (e_{𝒞₂}(B) ē_B(x)) − 1` over the collection.
    pub delta_obs: f64,
    /// `(1 + δ_obs)·δu·cap(𝒞₂)`.
    pub bound: f64,
    pub holds: bool,
    /// Set when `𝒞₂` is empty.
    pub empty: bool,
}

/// `H = ⟨L^u, e_{𝒞₂}⟩` for the union of Type-II boxes, with the bound it must satisfy.
pub fn h_functional(s: &InterlacementSample, report: &CoarseGrainReport) -> Result<HReport> {
    if report.seed != s.seed || report.n != s.window.radius || report.u != s.u {
        return Err(Error::InvalidParameter("report does not belong to this sample".into()));
    }
    let boxes = report.type_two_boxes();
    if boxes.is_empty() {
        return Ok(HReport { h: 0.0, capacity: 0.0, delta_obs: 0.0, bound: 0.0, holds: true, empty: true });
    }
    let green = GreenTable::shared(s.window.dim())?;
    let (e, rel) = relative_equilibrium(&boxes, &green, &SolverConfig::default())?;
    let h = local_time_functional(s, &e)?;
    let delta_obs = rel.upper_deviation.max(0.0);
    let bound = (1.0 + delta_obs) * report.delta * s.u * rel.capacity;
    // Rounding slack only; the inequality is exact given the witnesses.
    let holds = h <= bound * (1.0 + 1e-9) + 1e-12;
    Ok(HReport { h, capacity: rel.capacity, delta_obs, bound, holds, empty: false })
}
