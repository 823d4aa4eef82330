use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LatticeBox, LatticePoint, MAX_DIM};
use crate::error::{Error, Result};

/// Finite subset of Z^d stored as a bitmask over a bounding box.
///
/// Iteration is lexicographic in the coordinates (first coordinate slowest).
#[derive(Clone)]
pub struct LatticeSet {
    dim: usize,
    lo: [i64; MAX_DIM],
    ext: [usize; MAX_DIM],
    stride: [usize; MAX_DIM],
    mask: Vec<u64>,
    count: usize,
}

fn strides(dim: usize, ext: &[usize; MAX_DIM]) -> ([usize; MAX_DIM], usize) {
    let mut stride = [0; MAX_DIM];
    let mut s = 1usize;
    for i in (0..dim).rev() {
        stride[i] = s;
        s *= ext[i];
    }
    (stride, s)
}

impl LatticeSet {
    pub fn empty(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        Self { dim, lo: [0; MAX_DIM], ext: [0; MAX_DIM], stride: [0; MAX_DIM], mask: Vec::new(), count: 0 }
    }

    fn with_bounds(lo: LatticePoint, hi: LatticePoint) -> Self {
        let dim = lo.dim();
        let mut l = [0; MAX_DIM];
        let mut ext = [0; MAX_DIM];
        for i in 0..dim {
            l[i] = lo.get(i);
            ext[i] = (hi.get(i) - lo.get(i) + 1).max(0) as usize;
        }
        let (stride, total) = strides(dim, &ext);
        Self { dim, lo: l, ext, stride, mask: vec![0; total.div_ceil(64)], count: 0 }
    }

    pub fn from_box(b: &LatticeBox) -> Self {
        let mut s = Self::with_bounds(b.lo(), b.hi());
        let total = s.volume();
        for w in 0..total / 64 {
            s.mask[w] = u64::MAX;
        }
        if total % 64 != 0 {
            s.mask[total / 64] = (1u64 << (total % 64)) - 1;
        }
        s.count = total;
        s
    }

    /// All points `p` with `lo <= p <= hi` coordinatewise satisfying `f`.
    pub fn from_predicate(lo: LatticePoint, hi: LatticePoint, mut f: impl FnMut(&LatticePoint) -> bool) -> Self {
        let mut s = Self::with_bounds(lo, hi);
        for idx in 0..s.volume() {
            let p = s.point_at(idx);
            if f(&p) {
                s.mask[idx / 64] |= 1 << (idx % 64);
                s.count += 1;
            }
        }
        s
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let pts: Vec<LatticePoint> = points.into_iter().collect();
        if pts.is_empty() {
            return Ok(Self::empty(dim));
        }
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            for i in 0..dim {
                lo.coords_mut()[i] = lo.get(i).min(p.get(i));
                hi.coords_mut()[i] = hi.get(i).max(p.get(i));
            }
        }
        let mut s = Self::with_bounds(lo, hi);
        for p in &pts {
            let idx = s.linear_index(p).expect("inside bounds");
            if s.mask[idx / 64] & (1 << (idx % 64)) == 0 {
                s.mask[idx / 64] |= 1 << (idx % 64);
                s.count += 1;
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn volume(&self) -> usize {
        if self.dim == 0 {
            return 0;
        }
        self.ext[..self.dim].iter().product()
    }

    #[inline]
    fn linear_index(&self, p: &LatticePoint) -> Option<usize> {
        if p.dim() != self.dim {
            return None;
        }
        let mut idx = 0;
        for i in 0..self.dim {
            let off = p.get(i) - self.lo[i];
            if off < 0 || off as usize >= self.ext[i] {
                return None;
            }
            idx += off as usize * self.stride[i];
        }
        Some(idx)
    }

    #[inline]
    fn point_at(&self, mut idx: usize) -> LatticePoint {
        let mut p = LatticePoint::origin(self.dim);
        let c = p.coords_mut();
        for i in 0..self.dim {
            c[i] = self.lo[i] + (idx / self.stride[i]) as i64;
            idx %= self.stride[i];
        }
        p
    }

    #[inline]
    pub fn contains(&self, p: &LatticePoint) -> bool {
        match self.linear_index(p) {
            Some(idx) => self.mask[idx / 64] & (1 << (idx % 64)) != 0,
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        self.mask.iter().enumerate().flat_map(move |(w, &bits)| {
            let mut b = bits;
            std::iter::from_fn(move || {
                if b == 0 {
                    return None;
                }
                let t = b.trailing_zeros() as usize;
                b &= b - 1;
                Some(w * 64 + t)
            })
            .map(move |idx| self.point_at(idx))
        })
    }

    pub fn to_vec(&self) -> Vec<LatticePoint> {
        self.iter().collect()
    }

    /// Smallest coordinatewise bounds of the members, if any.
    pub fn bounds(&self) -> Option<(LatticePoint, LatticePoint)> {
        let mut it = self.iter();
        let first = it.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in it {
            for i in 0..self.dim {
                lo.coords_mut()[i] = lo.get(i).min(p.get(i));
                hi.coords_mut()[i] = hi.get(i).max(p.get(i));
            }
        }
        Some((lo, hi))
    }

    pub fn union(&self, other: &LatticeSet) -> LatticeSet {
        LatticeSet::from_points(self.dim, self.iter().chain(other.iter())).expect("same dimension")
    }

    pub fn intersection(&self, other: &LatticeSet) -> LatticeSet {
        LatticeSet::from_points(self.dim, self.iter().filter(|p| other.contains(p))).expect("same dimension")
    }

    pub fn difference(&self, other: &LatticeSet) -> LatticeSet {
        LatticeSet::from_points(self.dim, self.iter().filter(|p| !other.contains(p))).expect("same dimension")
    }

    pub fn is_subset(&self, other: &LatticeSet) -> bool {
        self.iter().all(|p| other.contains(&p))
    }

    pub fn is_disjoint(&self, other: &LatticeSet) -> bool {
        self.iter().all(|p| !other.contains(&p))
    }

    pub fn within_box(&self, b: &LatticeBox) -> bool {
        self.iter().all(|p| b.contains(&p))
    }

    pub fn restrict_to_box(&self, b: &LatticeBox) -> LatticeSet {
        LatticeSet::from_points(self.dim, self.iter().filter(|p| b.contains(p))).expect("same dimension")
    }

    pub fn translate(&self, v: &LatticePoint) -> LatticeSet {
        let mut s = self.clone();
        for i in 0..self.dim {
            s.lo[i] += v.get(i);
        }
        s
    }

    /// Members having at least one neighbour outside the set.
    pub fn boundary_points(&self) -> LatticeSet {
        LatticeSet::from_points(self.dim, self.iter().filter(|p| p.neighbors().any(|q| !self.contains(&q))))
            .expect("same dimension")
    }

    /// Position of each member in iteration order, or `None`.
    pub fn rank_map(&self) -> impl Fn(&LatticePoint) -> Option<usize> + '_ {
        let mut prefix = Vec::with_capacity(self.mask.len() + 1);
        let mut acc = 0usize;
        for w in &self.mask {
            prefix.push(acc);
            acc += w.count_ones() as usize;
        }
        move |p| {
            let idx = self.linear_index(p)?;
            let w = idx / 64;
            let bit = 1u64 << (idx % 64);
            if self.mask[w] & bit == 0 {
                return None;
            }
            Some(prefix[w] + (self.mask[w] & (bit - 1)).count_ones() as usize)
        }
    }
}

impl PartialEq for LatticeSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.count == other.count && self.is_subset(other)
    }
}

impl Eq for LatticeSet {}

impl fmt::Debug for LatticeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    dim: usize,
    points: Vec<LatticePoint>,
}

impl Serialize for LatticeSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SetRepr { dim: self.dim, points: self.to_vec() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SetRepr::deserialize(d)?;
        LatticeSet::from_points(r.dim, r.points).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::from_slice(c)
    }

    #[test]
    fn box_set_counts_and_order() {
        let s = LatticeSet::from_box(&LatticeBox::centered(3, 2));
        assert_eq!(s.len(), 125);
        let v = s.to_vec();
        assert_eq!(v[0], p(&[-2, -2, -2]));
        assert_eq!(v[1], p(&[-2, -2, -1]));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rank_map_matches_iteration() {
        let s = LatticeSet::from_points(3, [p(&[0, 0, 0]), p(&[5, 1, -3]), p(&[2, 2, 2]), p(&[0, 0, 1])]).unwrap();
        let rank = s.rank_map();
        for (i, q) in s.iter().enumerate() {
            assert_eq!(rank(&q), Some(i));
        }
        assert_eq!(rank(&p(&[1, 1, 1])), None);
    }

    #[test]
    fn boundary_of_box_is_shell() {
        let b = LatticeBox::centered(3, 3);
        assert_eq!(b.to_set().boundary_points(), b.inner_boundary());
        assert_eq!(b.inner_boundary().len(), 343 - 125);
    }

    #[test]
    fn set_algebra() {
        let a = LatticeSet::from_box(&LatticeBox::centered(2, 1));
        let b = LatticeSet::from_box(&LatticeBox::new(p(&[1, 1]), 1));
        assert_eq!(a.intersection(&b).len(), 4);
        assert_eq!(a.union(&b).len(), 14);
        assert_eq!(a.difference(&b).len(), 5);
        assert!(a.intersection(&b).is_subset(&a));
    }
}
