//! Hyperoctahedral symmetries (signed coordinate permutations).

use std::collections::HashMap;

use super::{LatticeBox, LatticePoint, LatticeSet, MAX_DIM};

/// `(σv)_i = ±v_{perm[i]}`, negated when `neg[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedPerm {
    dim: usize,
    perm: [u8; MAX_DIM],
    neg: [bool; MAX_DIM],
}

impl SignedPerm {
    pub fn identity(dim: usize) -> Self {
        let mut perm = [0u8; MAX_DIM];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i as u8;
        }
        Self { dim, perm, neg: [false; MAX_DIM] }
    }

    /// All `2^d d!` elements; the identity comes first.
    pub fn all(dim: usize) -> Vec<SignedPerm> {
        let mut perms: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::new();
            for p in &perms {
                for j in 0..dim as u8 {
                    if !p.contains(&j) {
                        let mut q = p.clone();
                        q.push(j);
                        next.push(q);
                    }
                }
            }
            perms = next;
        }
        let mut out = Vec::with_capacity(perms.len() << dim);
        for p in &perms {
            for signs in 0..(1u32 << dim) {
                let mut perm = [0u8; MAX_DIM];
                let mut neg = [false; MAX_DIM];
                for i in 0..dim {
                    perm[i] = p[i];
                    neg[i] = signs & (1 << i) != 0;
                }
                out.push(SignedPerm { dim, perm, neg });
            }
        }
        out
    }

    #[inline]
    pub fn apply_i64(&self, v: &[i64]) -> [i64; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for i in 0..self.dim {
            let x = v[self.perm[i] as usize];
            out[i] = if self.neg[i] { -x } else { x };
        }
        out
    }

    #[inline]
    pub fn apply_f64(&self, v: &[f64]) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for i in 0..self.dim {
            let x = v[self.perm[i] as usize];
            out[i] = if self.neg[i] { -x } else { x };
        }
        out
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut inv = SignedPerm::identity(self.dim);
        for i in 0..self.dim {
            let j = self.perm[i] as usize;
            inv.perm[j] = i as u8;
            inv.neg[j] = self.neg[i];
        }
        inv
    }

    /// Image of axis `i` under the linear part: `σ e_i = ±e_{axis}`.
    pub fn axis_image(&self, i: usize) -> (usize, bool) {
        let k = self.perm[..self.dim].iter().position(|&p| p as usize == i).expect("permutation");
        (k, self.neg[k])
    }
}

/// A group of signed permutations acting about a (possibly half-integer) centre.
#[derive(Clone, Debug)]
pub struct Symmetry {
    dim: usize,
    center2: [i64; MAX_DIM],
    elements: Vec<SignedPerm>,
}

/// Partition of an indexed point list into orbits.
#[derive(Clone, Debug)]
pub struct Orbits {
    pub orbit_of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Orbits {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn representative(&self, o: usize) -> usize {
        self.members[o][0]
    }
}

impl Symmetry {
    pub fn trivial(dim: usize) -> Self {
        Self { dim, center2: [0; MAX_DIM], elements: vec![SignedPerm::identity(dim)] }
    }

    /// Full hyperoctahedral group about the box centre.
    pub fn of_box(b: &LatticeBox) -> Self {
        let mut center2 = [0; MAX_DIM];
        for (i, c) in b.center.coords().iter().enumerate() {
            center2[i] = 2 * c;
        }
        Self { dim: b.dim(), center2, elements: SignedPerm::all(b.dim()) }
    }

    /// Full group about a doubled centre, without checking invariance of anything.
    pub fn full_about(dim: usize, center2: &[i64]) -> Self {
        let mut c = [0; MAX_DIM];
        c[..dim].copy_from_slice(&center2[..dim]);
        Self { dim, center2: c, elements: SignedPerm::all(dim) }
    }

    /// Subgroup of signed permutations about the centre of the tight bounding box that map `set` to itself.
    pub fn of_set(set: &LatticeSet) -> Self {
        let dim = set.dim();
        let Some((lo, hi)) = set.bounds() else {
            return Self::trivial(dim);
        };
        let mut center2 = [0; MAX_DIM];
        let mut ext = [0; MAX_DIM];
        for i in 0..dim {
            center2[i] = lo.get(i) + hi.get(i);
            ext[i] = hi.get(i) - lo.get(i);
        }
        let candidates = SignedPerm::all(dim);
        let pts = set.to_vec();
        let mut elements = Vec::new();
        let probe = Self { dim, center2, elements: vec![] };
        for g in candidates {
            if (0..dim).any(|i| ext[i] != ext[g.perm[i] as usize]) {
                continue;
            }
            if pts.iter().all(|p| set.contains(&probe.act(&g, p))) {
                elements.push(g);
            }
        }
        Self { dim, center2, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[SignedPerm] {
        &self.elements
    }

    /// Doubled centre of the action.
    pub fn center2(&self) -> &[i64] {
        &self.center2[..self.dim]
    }

    #[inline]
    fn act(&self, g: &SignedPerm, p: &LatticePoint) -> LatticePoint {
        let mut v = [0; MAX_DIM];
        for i in 0..self.dim {
            v[i] = 2 * p.get(i) - self.center2[i];
        }
        let w = g.apply_i64(&v);
        let mut out = *p;
        for (i, c) in out.coords_mut().iter_mut().enumerate() {
            *c = (w[i] + self.center2[i]) / 2;
        }
        out
    }

    #[inline]
    pub fn apply(&self, g: usize, p: &LatticePoint) -> LatticePoint {
        self.act(&self.elements[g], p)
    }

    pub fn apply_inverse(&self, g: usize, p: &LatticePoint) -> LatticePoint {
        self.act(&self.elements[g].inverse(), p)
    }

    /// Real-coordinate action about the same centre.
    pub fn apply_real(&self, g: usize, x: &[f64]) -> [f64; MAX_DIM] {
        let mut v = [0.0; MAX_DIM];
        for i in 0..self.dim {
            v[i] = x[i] - 0.5 * self.center2[i] as f64;
        }
        let mut w = self.elements[g].apply_f64(&v);
        for i in 0..self.dim {
            w[i] += 0.5 * self.center2[i] as f64;
        }
        w
    }

    /// Lexicographically largest image of `p` and the element producing it.
    pub fn canonical(&self, p: &LatticePoint) -> (LatticePoint, usize) {
        let mut best = (*p, 0);
        for g in 1..self.elements.len() {
            let q = self.apply(g, p);
            if q > best.0 {
                best = (q, g);
            }
        }
        best
    }

    /// Orbits of an invariant point list; `members[o][0]` is the first point of the orbit in list order.
    pub fn orbits(&self, points: &[LatticePoint]) -> Orbits {
        let index: HashMap<LatticePoint, usize> = points.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let mut orbit_of = vec![usize::MAX; points.len()];
        let mut members = Vec::new();
        for (i, p) in points.iter().enumerate() {
            if orbit_of[i] != usize::MAX {
                continue;
            }
            let o = members.len();
            let mut m = Vec::new();
            for g in 0..self.elements.len() {
                let q = self.apply(g, p);
                let j = *index.get(&q).expect("point list is not invariant under the group");
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = o;
                    m.push(j);
                }
            }
            m.sort_unstable();
            members.push(m);
        }
        Orbits { orbit_of, members }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(SignedPerm::all(3).len(), 48);
        assert_eq!(SignedPerm::all(4).len(), 384);
    }

    #[test]
    fn inverse_roundtrip() {
        let b = LatticeBox::new(LatticePoint::from_slice(&[1, -2, 3]), 2);
        let s = Symmetry::of_box(&b);
        let p = LatticePoint::from_slice(&[2, -1, 5]);
        for g in 0..s.order() {
            assert_eq!(s.apply_inverse(g, &s.apply(g, &p)), p);
            assert!(b.contains(&s.apply(g, &p)));
        }
    }

    #[test]
    fn set_symmetry_of_slab() {
        let set = LatticeSet::from_points(3, [LatticePoint::from_slice(&[0, 0, 0]), LatticePoint::from_slice(&[1, 0, 0])])
            .unwrap();
        // Half-integer centre along the first axis: flips of every axis plus the swap of the last two.
        assert_eq!(Symmetry::of_set(&set).order(), 16);
    }

    #[test]
    fn box_shell_orbits() {
        let b = LatticeBox::centered(3, 2);
        let pts = b.inner_boundary().to_vec();
        let orbits = Symmetry::of_box(&b).orbits(&pts);
        // Orbits of the shell of B(0,2): sorted |coords| with max = 2.
        assert_eq!(orbits.len(), 6);
        let total: usize = orbits.members.iter().map(|m| m.len()).sum();
        assert_eq!(total, pts.len());
    }
}
