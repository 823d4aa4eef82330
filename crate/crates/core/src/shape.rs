//! Unions of axis-aligned cells in R^d.

use std::hash::{Hash, Hasher};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticeSet, Rational, MAX_DIM};

/// Union of closed cubes of side `1/resolution`.
///
/// Cell `c` is `∏ [(c_i - s)/M, (c_i - s + 1)/M]` with `s = 1/2` for centred shapes
/// (cells centred on `(1/M)Z^d`, as produced by [`crate::lattice::filling`]) and `s = 0` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    resolution: u32,
    centered: bool,
    cells: LatticeSet,
}

impl Hash for GridShape {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.resolution.hash(state);
        self.centered.hash(state);
        self.cells.dim().hash(state);
        for c in self.cells.iter() {
            c.hash(state);
        }
    }
}

impl GridShape {
    pub fn new(resolution: u32, centered: bool, cells: LatticeSet) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        Ok(Self { resolution, centered, cells })
    }

    /// Cells of the unit-box grid `[-M, M-1]^d`; errors if any lies outside it.
    pub fn from_cells(dim: usize, m: u32, cells: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let set = LatticeSet::from_points(dim, cells)?;
        let s = Self { resolution: m, centered: false, cells: set };
        if !s.within_unit_box() {
            return Err(Error::InvalidParameter("cells outside the unit box".into()));
        }
        Ok(s)
    }

    pub(crate) fn from_cell_box(dim: usize, m: u32, lo: &[i64], hi: &[i64]) -> Result<Self> {
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: lo.len() });
        }
        let lo = LatticePoint::new(lo)?;
        let hi = LatticePoint::new(hi)?;
        let cells = LatticeSet::from_predicate(lo, hi, |_| true);
        if cells.is_empty() {
            return Err(Error::EmptyShape);
        }
        Self::new(m, false, cells)
    }

    /// `B̃(0,1)` at resolution `m`: `(2m)^d` cells.
    pub fn unit_box(dim: usize, m: u32) -> Self {
        let lo = vec![-(m as i64); dim];
        let hi = vec![m as i64 - 1; dim];
        Self::from_cell_box(dim, m, &lo, &hi).expect("nonempty")
    }

    pub fn empty(dim: usize, m: u32) -> Self {
        Self { resolution: m, centered: false, cells: LatticeSet::empty(dim) }
    }

    pub fn dim(&self) -> usize {
        self.cells.dim()
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn cells(&self) -> &LatticeSet {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_cell(&self, c: &LatticePoint) -> bool {
        self.cells.contains(c)
    }

    pub fn volume(&self) -> f64 {
        self.len() as f64 / (self.resolution as f64).powi(self.dim() as i32)
    }

    /// Twice the cell offset `s`, in cell units.
    pub(crate) fn shift2(&self) -> i64 {
        i64::from(self.centered)
    }

    /// Exact lower corner of cell `c` along axis `i`, as `numerator / (2M)`.
    pub(crate) fn lower2(&self, c: i64) -> i64 {
        2 * c - self.shift2()
    }

    pub fn cell_bounds(&self, c: &LatticePoint) -> ([f64; MAX_DIM], [f64; MAX_DIM]) {
        let m2 = 2.0 * self.resolution as f64;
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        for i in 0..self.dim() {
            lo[i] = self.lower2(c.get(i)) as f64 / m2;
            hi[i] = (self.lower2(c.get(i)) + 2) as f64 / m2;
        }
        (lo, hi)
    }

    pub fn cell_bounds_exact(&self, c: &LatticePoint) -> (Vec<Rational>, Vec<Rational>) {
        let m2 = 2 * self.resolution as i64;
        let lo = (0..self.dim()).map(|i| Ratio::new(self.lower2(c.get(i)), m2)).collect();
        let hi = (0..self.dim()).map(|i| Ratio::new(self.lower2(c.get(i)) + 2, m2)).collect();
        (lo, hi)
    }

    /// Coordinatewise bounds of the union, in real coordinates.
    pub fn real_bounds(&self) -> Option<([f64; MAX_DIM], [f64; MAX_DIM])> {
        let (lo, hi) = self.cells.bounds()?;
        Some((self.cell_bounds(&lo).0, self.cell_bounds(&hi).1))
    }

    pub fn within_unit_box(&self) -> bool {
        let m = self.resolution as i64;
        !self.centered && self.cells.iter().all(|c| c.coords().iter().all(|&x| -m <= x && x < m))
    }

    /// `B̃(0,1) \ self` at the same resolution.
    pub fn complement_in_unit_box(&self) -> Result<GridShape> {
        if !self.within_unit_box() {
            return Err(Error::InvalidParameter("shape is not a unit-box cell union".into()));
        }
        let full = GridShape::unit_box(self.dim(), self.resolution);
        Ok(GridShape { resolution: self.resolution, centered: false, cells: full.cells.difference(&self.cells) })
    }

    /// Same set at resolution `factor * M`.
    pub fn refine(&self, factor: u32) -> GridShape {
        if factor == 1 {
            return self.clone();
        }
        let f = factor as i64;
        let d = self.dim();
        // A centred shape at odd factor stays centred; otherwise refinement lands on the uncentred grid.
        let centered = self.centered && factor % 2 == 1;
        let mut pts = Vec::with_capacity(self.len() * (factor as usize).pow(d as u32));
        for c in self.cells.iter() {
            let mut base = c;
            for i in 0..d {
                // Lower corner in units of 1/(2fM): f * (2c - s2); subcell index k has lower corner 2k - s2'.
                let lo2 = f * self.lower2(c.get(i));
                let s2 = i64::from(centered);
                base.coords_mut()[i] = (lo2 + s2) / 2;
            }
            let n = (factor as usize).pow(d as u32);
            for k in 0..n {
                let mut q = base;
                let mut r = k;
                for i in 0..d {
                    q.coords_mut()[i] += (r % factor as usize) as i64;
                    r /= factor as usize;
                }
                pts.push(q);
            }
        }
        GridShape {
            resolution: self.resolution * factor,
            centered,
            cells: LatticeSet::from_points(d, pts).expect("same dimension"),
        }
    }

    pub fn union(&self, other: &GridShape) -> Result<GridShape> {
        if self.resolution != other.resolution || self.centered != other.centered {
            return Err(Error::InvalidParameter("grid mismatch".into()));
        }
        Ok(GridShape { resolution: self.resolution, centered: self.centered, cells: self.cells.union(&other.cells) })
    }

    pub fn is_subset(&self, other: &GridShape) -> bool {
        self.resolution == other.resolution && self.centered == other.centered && self.cells.is_subset(&other.cells)
    }

    /// Adds every cell not connected to the unbounded component of the complement.
    pub fn fill_cavities(&self) -> GridShape {
        let Some((lo, hi)) = self.cells.bounds() else {
            return self.clone();
        };
        let d = self.dim();
        let mut plo = lo;
        let mut phi = hi;
        for i in 0..d {
            plo.coords_mut()[i] -= 1;
            phi.coords_mut()[i] += 1;
        }
        let frame = LatticeSet::from_predicate(plo, phi, |_| true);
        let mut outside = std::collections::HashSet::new();
        let mut stack = vec![plo];
        outside.insert(plo);
        while let Some(p) = stack.pop() {
            for q in p.neighbors() {
                if frame.contains(&q) && !self.cells.contains(&q) && outside.insert(q) {
                    stack.push(q);
                }
            }
        }
        let cells = LatticeSet::from_predicate(lo, hi, |p| !outside.contains(p));
        GridShape { resolution: self.resolution, centered: self.centered, cells }
    }

    /// Cell index list, for export.
    pub fn cell_list(&self) -> Vec<Vec<i64>> {
        self.cells.iter().map(|c| c.coords().to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cavity_is_filled() {
        let full = GridShape::unit_box(3, 2);
        let hollow = GridShape::new(2, false, full.cells().difference(&LatticeSet::from_points(3, [LatticePoint::origin(3)]).unwrap())).unwrap();
        assert_eq!(hollow.len() + 1, full.len());
        assert_eq!(hollow.fill_cavities(), full);
        let open = full.complement_in_unit_box().unwrap();
        assert!(open.fill_cavities().is_empty());
    }

    #[test]
    fn unit_box_volume() {
        let s = GridShape::unit_box(3, 4);
        assert_eq!(s.len(), 512);
        assert!((s.volume() - 8.0).abs() < 1e-12);
        assert!(s.within_unit_box());
    }

    #[test]
    fn refine_preserves_volume() {
        let s = GridShape::from_cells(3, 2, [LatticePoint::from_slice(&[0, 0, 0]), LatticePoint::from_slice(&[-2, 1, 0])])
            .unwrap();
        let r = s.refine(2);
        assert_eq!(r.resolution(), 4);
        assert!((r.volume() - s.volume()).abs() < 1e-12);
        assert!(r.within_unit_box());
        let (lo, hi) = r.real_bounds().unwrap();
        let (lo0, hi0) = s.real_bounds().unwrap();
        assert_eq!(lo, lo0);
        assert_eq!(hi, hi0);
    }

    #[test]
    fn refine_centered() {
        let s = GridShape::new(1, true, LatticeSet::from_points(3, [LatticePoint::origin(3)]).unwrap()).unwrap();
        let r2 = s.refine(2);
        assert!(!r2.is_centered());
        assert_eq!(r2.len(), 8);
        assert_eq!(r2.real_bounds(), s.real_bounds());
        let r3 = s.refine(3);
        assert!(r3.is_centered());
        assert_eq!(r3.len(), 27);
        assert_eq!(r3.real_bounds(), s.real_bounds());
    }

    #[test]
    fn complement() {
        let s = GridShape::from_cells(3, 2, [LatticePoint::from_slice(&[0, 0, 0])]).unwrap();
        assert_eq!(s.complement_in_unit_box().unwrap().len(), 63);
    }
}
