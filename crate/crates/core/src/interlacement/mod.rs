//! Random interlacements seen through a finite window.

pub mod sampler;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticePoint, LatticeSet};
use crate::potential::EquilibriumMeasure;
use crate::scalar::Scalar;

pub use sampler::{monotone_couple, sample, sample_with, shared_sampler, GuardRule, Sampler, SamplerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// Nearest-neighbour path segment with holding times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPiece {
    pub direction: Direction,
    pub vertices: Vec<LatticePoint>,
    pub holding: Vec<f64>,
}

impl TrajectoryPiece {
    pub fn new(direction: Direction) -> Self {
        Self { direction, vertices: Vec::new(), holding: Vec::new() }
    }

    pub fn push(&mut self, x: LatticePoint, hold: f64) {
        self.vertices.push(x);
        self.holding.push(hold);
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn translate(&self, v: &LatticePoint) -> Self {
        Self { direction: self.direction, vertices: self.vertices.iter().map(|&p| p + *v).collect(), holding: self.holding.clone() }
    }

    pub fn is_valid(&self) -> bool {
        self.vertices.len() == self.holding.len()
            && self.holding.iter().all(|&h| h > 0.0)
            && self.vertices.windows(2).all(|w| w[0].is_neighbor(&w[1]))
    }
}

/// Occupancy and local times of `ℐ^u` inside a window.
#[derive(Clone, Debug, PartialEq)]
pub struct InterlacementSample {
    pub u: f64,
    pub window: LatticeBox,
    pub n_trajectories: u64,
    pub occupancy: LatticeSet,
    /// Dense over the window, first coordinate slowest.
    local_time: Vec<f64>,
    pub seed: u64,
    pub truncation_radius: u64,
    pub pieces: Vec<TrajectoryPiece>,
}

impl InterlacementSample {
    pub(crate) fn from_dense(
        u: f64,
        window: LatticeBox,
        n_trajectories: u64,
        local_time: Vec<f64>,
        seed: u64,
        truncation_radius: u64,
        pieces: Vec<TrajectoryPiece>,
    ) -> Self {
        let d = window.dim();
        let lo = window.lo();
        let side = window.side() as usize;
        let occupancy = LatticeSet::from_points(
            d,
            local_time.iter().enumerate().filter(|(_, &l)| l > 0.0).map(|(i, _)| Self::point_of(d, side, &lo, i)),
        )
        .expect("window dimension");
        Self { u, window, n_trajectories, occupancy, local_time, seed, truncation_radius, pieces }
    }

    fn point_of(d: usize, side: usize, lo: &LatticePoint, mut i: usize) -> LatticePoint {
        let mut p = *lo;
        for k in (0..d).rev() {
            p.coords_mut()[k] += (i % side) as i64;
            i /= side;
        }
        p
    }

    fn offset(&self, p: &LatticePoint) -> Option<usize> {
        if !self.window.contains(p) {
            return None;
        }
        let lo = self.window.lo();
        let side = self.window.side() as usize;
        Some((0..self.window.dim()).fold(0, |acc, k| acc * side + (p.get(k) - lo.get(k)) as usize))
    }

    /// `L^u(x)`; zero off the window.
    pub fn local_time(&self, p: &LatticePoint) -> f64 {
        self.offset(p).map_or(0.0, |i| self.local_time[i])
    }

    /// Local times of occupied vertices in occupancy order.
    pub fn local_time_entries(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        self.occupancy.iter().map(|p| (p, self.local_time(&p)))
    }

    pub fn total_local_time(&self) -> f64 {
        self.local_time.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    /// Occupancy and local times restricted to a sub-box of the window.
    pub fn restrict(&self, sub: &LatticeBox) -> Result<InterlacementSample> {
        if !self.window.contains_box(sub) {
            return Err(Error::OutsideWindow);
        }
        let d = sub.dim();
        let lo = sub.lo();
        let side = sub.side() as usize;
        let lt = (0..side.pow(d as u32)).map(|i| self.local_time(&Self::point_of(d, side, &lo, i))).collect();
        Ok(Self::from_dense(self.u, *sub, self.n_trajectories, lt, self.seed, self.truncation_radius, Vec::new()))
    }

    pub fn to_record(&self) -> SampleRecord {
        let mut runs: Vec<[u64; 2]> = Vec::new();
        for (i, &l) in self.local_time.iter().enumerate() {
            if l > 0.0 {
                match runs.last_mut() {
                    Some(r) if r[0] + r[1] == i as u64 => r[1] += 1,
                    _ => runs.push([i as u64, 1]),
                }
            }
        }
        SampleRecord {
            seed: self.seed,
            u: self.u,
            window: self.window,
            n_trajectories: self.n_trajectories,
            truncation_radius: self.truncation_radius,
            occupancy_rle: runs,
            local_time: self.local_time.iter().copied().filter(|&l| l > 0.0).collect(),
            pieces: self.pieces.clone(),
        }
    }

    pub fn from_record(r: SampleRecord) -> Result<Self> {
        let volume = r.window.volume() as usize;
        let mut lt = vec![0.0; volume];
        let mut values = r.local_time.iter();
        for &[start, len] in &r.occupancy_rle {
            for i in start..start + len {
                let v = *values.next().ok_or_else(|| Error::Parse("local time list shorter than occupancy".into()))?;
                if !(v > 0.0) || i as usize >= volume {
                    return Err(Error::Parse(format!("bad occupancy entry at offset {i}")));
                }
                lt[i as usize] = v;
            }
        }
        if values.next().is_some() {
            return Err(Error::Parse("local time list longer than occupancy".into()));
        }
        Ok(Self::from_dense(r.u, r.window, r.n_trajectories, lt, r.seed, r.truncation_radius, r.pieces))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Serialised sample; occupancy as runs `[offset, length]` over the window in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub u: f64,
    pub window: LatticeBox,
    pub n_trajectories: u64,
    pub truncation_radius: u64,
    pub occupancy_rle: Vec<[u64; 2]>,
    pub local_time: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<TrajectoryPiece>,
}

/// Vertices visited by both samples.
pub fn intersect(s1: &InterlacementSample, s2: &InterlacementSample) -> Result<LatticeSet> {
    if s1.window != s2.window {
        return Err(Error::WindowMismatch);
    }
    Ok(s1.occupancy.intersection(&s2.occupancy))
}

/// `⟨L^u, e⟩`.
pub fn local_time_functional<T: Scalar>(s: &InterlacementSample, e: &EquilibriumMeasure<T>) -> Result<T> {
    let mut acc = T::zero();
    for (p, m) in e.iter() {
        if !s.window.contains(&p) {
            return Err(Error::OutsideWindow);
        }
        acc += T::of(s.local_time(&p)) * m;
    }
    Ok(acc)
}
