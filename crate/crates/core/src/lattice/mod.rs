//! Geometry of Z^d and R^d.

mod boxes;
mod point;
mod realbox;
mod set;
pub mod symmetry;

pub use boxes::LatticeBox;
pub use point::LatticePoint;
pub use realbox::{Rational, RealBox};
pub use set::LatticeSet;
pub use symmetry::{Orbits, SignedPerm, Symmetry};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::GridShape;

/// Largest supported dimension.
pub const MAX_DIM: usize = 6;

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Lattice points at l∞-distance `< 1` from `N·shape`.
pub fn blow_up(shape: &GridShape, n: u64) -> Result<LatticeSet> {
    if shape.is_empty() {
        return Err(Error::EmptyShape);
    }
    if n == 0 {
        return Err(Error::InvalidParameter("blow-up factor must be positive".into()));
    }
    let d = shape.dim();
    let n = n as i64;
    let m2 = 2 * shape.resolution() as i64;
    // Cell c along an axis scales to [n*l/m2, n*(l+2)/m2] with l = lower2(c); keep x with
    // n*l/m2 - 1 < x < n*(l+2)/m2 + 1.
    let range = |c: i64| {
        let l = shape.lower2(c);
        let lo = div_floor(n * l - m2, m2) + 1;
        let hi = div_ceil(n * (l + 2) + m2, m2) - 1;
        (lo, hi)
    };
    let (clo, chi) = shape.cells().bounds().expect("nonempty");
    let mut lo = clo;
    let mut hi = chi;
    for i in 0..d {
        lo.coords_mut()[i] = range(clo.get(i)).0;
        hi.coords_mut()[i] = range(chi.get(i)).1;
    }
    let mut ext = [0usize; MAX_DIM];
    for i in 0..d {
        ext[i] = (hi.get(i) - lo.get(i) + 1) as usize;
    }
    let total: usize = ext[..d].iter().product();
    let mut dense = vec![false; total];
    for c in shape.cells().iter() {
        let mut a = [0i64; MAX_DIM];
        let mut b = [0i64; MAX_DIM];
        for i in 0..d {
            let (x0, x1) = range(c.get(i));
            a[i] = x0 - lo.get(i);
            b[i] = x1 - lo.get(i);
        }
        let mut cur = a;
        'cell: loop {
            let mut idx = 0usize;
            for i in 0..d {
                idx = idx * ext[i] + cur[i] as usize;
            }
            dense[idx] = true;
            for i in (0..d).rev() {
                if cur[i] < b[i] {
                    cur[i] += 1;
                    continue 'cell;
                }
                cur[i] = a[i];
            }
            break;
        }
    }
    Ok(LatticeSet::from_predicate(lo, hi, |p| {
        let mut idx = 0usize;
        for i in 0..d {
            idx = idx * ext[i] + (p.get(i) - lo.get(i)) as usize;
        }
        dense[idx]
    }))
}

/// Union of the closed unit cubes centred at the points of `a`.
pub fn filling(a: &LatticeSet) -> Result<GridShape> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    GridShape::new(1, true, a.clone())
}

/// Parameters of the mesoscopic box partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    /// Separation factor: box centres lie on `(2K+1)L·Z^d`.
    pub k: u64,
    /// Floor applied to the computed `L` outside the strict regime.
    pub min_l: u64,
    /// Fixed `L`, bypassing the formula.
    pub l_override: Option<u64>,
    /// Enforce `N > 100^d` and `K > 100`.
    pub strict: bool,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { k: 2, min_l: 3, l_override: None, strict: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MesoscopicPartition {
    pub n: u64,
    pub l: u64,
    pub k: u64,
    pub boxes: Vec<LatticeBox>,
}

/// `⌊N^{2/d} (ln N)^{1/d}⌋`.
pub fn mesoscopic_scale(n: u64, d: usize) -> u64 {
    let nf = n as f64;
    if n <= 1 {
        return 0;
    }
    (nf.powf(2.0 / d as f64) * nf.ln().powf(1.0 / d as f64)).floor() as u64
}

/// All boxes `B(x,L)` with `x ∈ (2K+1)L·Z^d` and `B(x,L) ⊆ B(0,N)`.
pub fn mesoscopic_partition(n: u64, d: usize, cfg: &PartitionConfig) -> Result<MesoscopicPartition> {
    if !(1..=MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if cfg.strict {
        let big = 100f64.powi(d as i32);
        if (n as f64) <= big || cfg.k <= 100 {
            return Err(Error::StrictRegime { n, k: cfg.k, d });
        }
    }
    let l = match cfg.l_override {
        Some(l) => l,
        None if cfg.strict => mesoscopic_scale(n, d),
        None => mesoscopic_scale(n, d).max(cfg.min_l),
    };
    if l == 0 || l >= n {
        return Err(Error::NoScaleSeparation { l, n });
    }
    let spacing = (2 * cfg.k + 1) * l;
    let jmax = ((n - l) / spacing) as i64;
    let side = (2 * jmax + 1) as usize;
    let mut boxes = Vec::with_capacity(side.pow(d as u32));
    for idx in 0..side.pow(d as u32) {
        let mut c = LatticePoint::origin(d);
        let mut r = idx;
        for i in (0..d).rev() {
            c.coords_mut()[i] = ((r % side) as i64 - jmax) * spacing as i64;
            r /= side;
        }
        boxes.push(LatticeBox::new(c, l));
    }
    Ok(MesoscopicPartition { n, l, k: cfg.k, boxes })
}
