use serde::{Deserialize, Serialize};

use super::{LatticePoint, LatticeSet};

/// The l∞ ball `B(center, radius)` in Z^d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub center: LatticePoint,
    pub radius: u64,
}

impl LatticeBox {
    pub fn new(center: LatticePoint, radius: u64) -> Self {
        Self { center, radius }
    }

    pub fn centered(dim: usize, radius: u64) -> Self {
        Self { center: LatticePoint::origin(dim), radius }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn side(&self) -> u64 {
        2 * self.radius + 1
    }

    pub fn volume(&self) -> u64 {
        self.side().pow(self.dim() as u32)
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim() && (*p - self.center).norm_inf() <= self.radius as i64
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        (other.center - self.center).norm_inf() + other.radius as i64 <= self.radius as i64
    }

    /// True when the two boxes share at least one lattice point.
    pub fn intersects(&self, other: &LatticeBox) -> bool {
        (other.center - self.center).norm_inf() <= (self.radius + other.radius) as i64
    }

    pub fn lo(&self) -> LatticePoint {
        let mut p = self.center;
        for c in p.coords_mut() {
            *c -= self.radius as i64;
        }
        p
    }

    pub fn hi(&self) -> LatticePoint {
        let mut p = self.center;
        for c in p.coords_mut() {
            *c += self.radius as i64;
        }
        p
    }

    pub fn dilate(&self, radius: u64) -> LatticeBox {
        LatticeBox { center: self.center, radius }
    }

    pub fn to_set(&self) -> LatticeSet {
        LatticeSet::from_box(self)
    }

    /// Points of the box with a neighbour outside it.
    pub fn inner_boundary(&self) -> LatticeSet {
        let r = self.radius as i64;
        LatticeSet::from_predicate(self.lo(), self.hi(), |p| (*p - self.center).norm_inf() == r)
    }
}
