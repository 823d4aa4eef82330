//! Lattice Green function of simple random walk on Z^d.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, MAX_DIM};
use crate::quad;

/// Quadrature and tabulation parameters for [`GreenTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenConfig {
    /// Displacements with `|x|∞ <= r0` are integrated; larger ones use the asymptotic expansion.
    pub r0: u64,
    /// Values with `|x|∞ <= dense_radius` are kept in a lookup table.
    pub dense_radius: u64,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panel count multiplier; raise to check quadrature convergence.
    pub refine: usize,
}

impl GreenConfig {
    pub fn for_dim(d: usize) -> Self {
        let r0 = match d {
            3 => 20,
            4 => 10,
            5 => 4,
            _ => 2,
        };
        let mut dense = 1u64;
        while (dense + 2).pow(d as u32) <= 1 << 20 {
            dense += 1;
        }
        Self { r0, dense_radius: dense.max(r0), order: if d == 3 { 16 } else { 10 }, refine: 1 }
    }
}

/// Tabulated `g(0,x)`, the expected number of visits to `x` by discrete-time SRW started at 0.
#[derive(Clone, Debug)]
pub struct GreenTable {
    dim: usize,
    cfg: GreenConfig,
    side: usize,
    dense: Vec<f64>,
    lead: f64,
    corr: f64,
}

static SHARED: [OnceLock<Arc<GreenTable>>; MAX_DIM + 1] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

impl GreenTable {
    /// Process-wide table with default parameters, built on first use.
    pub fn shared(d: usize) -> Result<Arc<GreenTable>> {
        if d < 3 {
            return Err(Error::TransientDimension(d));
        }
        if d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        Ok(SHARED[d].get_or_init(|| Arc::new(GreenTable::new(d).expect("valid dimension"))).clone())
    }

    pub fn new(d: usize) -> Result<Self> {
        Self::with_config(d, GreenConfig::for_dim(d))
    }

    pub fn with_config(d: usize, cfg: GreenConfig) -> Result<Self> {
        if d < 3 {
            return Err(Error::TransientDimension(d));
        }
        if d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let df = d as f64;
        let gamma = libm::tgamma(df / 2.0 - 1.0);
        let pi_half_d = std::f64::consts::PI.powf(df / 2.0);
        let lead = 2.0 * df * gamma / (4.0 * pi_half_d);
        let corr = 2.0 * df * gamma * df * (df - 2.0) / (96.0 * pi_half_d);
        let side = cfg.dense_radius as usize + 1;
        let mut t = Self { dim: d, cfg, side, dense: vec![0.0; side.pow(d as u32)], lead, corr };

        let r0 = t.cfg.r0.min(t.cfg.dense_radius) as usize;
        let blocks: Vec<Vec<(Vec<usize>, f64)>> = (0..=r0).into_par_iter().map(|a| t.integrate_shell(a)).collect();
        let mut abs = vec![0usize; d];
        for idx in 0..t.dense.len() {
            let mut r = idx;
            for i in (0..d).rev() {
                abs[i] = r % side;
                r /= side;
            }
            if *abs.iter().max().unwrap() > r0 {
                let x: Vec<i64> = abs.iter().map(|&c| c as i64).collect();
                t.dense[idx] = t.asymptotic(&x);
            }
        }
        for block in blocks {
            for (tuple, v) in block {
                t.fill_permutations(&tuple, v);
            }
        }
        Ok(t)
    }

    fn fill_permutations(&mut self, sorted: &[usize], v: f64) {
        let d = self.dim;
        let mut perm: Vec<usize> = (0..d).collect();
        loop {
            let mut idx = 0;
            for &p in &perm {
                idx = idx * self.side + sorted[p];
            }
            self.dense[idx] = v;
            // Next permutation in lexicographic order.
            let Some(i) = (0..d - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
                break;
            };
            let j = (i + 1..d).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
    }

    /// Values `g(0,x)` for all sorted `x = (a, b_2, ..., b_d)` with `a >= b_2 >= ... >= b_d >= 0`.
    ///
    /// Integrating out the first angle leaves
    /// `g = d π^{1-d} ∫_{[0,π]^{d-1}} Π cos(b_j θ_j) · ρ^a / √(β(β+2)) dθ`
    /// with `β = Σ 2 sin²(θ_j/2)` and `ρ = 1/(1 + β + √(β(β+2)))`. The point singularity at θ = 0 is
    /// removed by splitting the cube into pyramids around each axis (θ_k = u, θ_j = u v_j).
    fn integrate_shell(&self, a: usize) -> Vec<(Vec<usize>, f64)> {
        let d = self.dim;
        let m = d - 1;
        let pi = std::f64::consts::PI;
        let refine = self.cfg.refine.max(1);
        let (un, uw) = quad::composite(0.0, pi, (a + 2) * refine, self.cfg.order);
        let (vn, vw) = quad::composite(0.0, 1.0, (a / 2 + 1) * refine, self.cfg.order);
        let nv = vn.len();
        let per_pyramid = un.len() * nv.pow((m - 1) as u32);
        let nodes = m * per_pyramid;
        let scale = d as f64 / pi.powi(m as i32);

        let mut weight = vec![0.0; nodes];
        // cosines[j][b][node] = cos(b θ_j)
        let mut cosines = vec![vec![vec![0.0; nodes]; a + 1]; m];
        let mut theta = vec![0.0; m];
        let mut node = 0;
        for k in 0..m {
            for (&u, &wu) in un.iter().zip(&uw) {
                for iv in 0..nv.pow((m - 1) as u32) {
                    let mut r = iv;
                    let mut w = wu * u.powi((m - 1) as i32);
                    for (j, th) in theta.iter_mut().enumerate() {
                        if j == k {
                            *th = u;
                        } else {
                            let q = r % nv;
                            r /= nv;
                            *th = u * vn[q];
                            w *= vw[q];
                        }
                    }
                    let beta: f64 = theta.iter().map(|t| 2.0 * (0.5 * t).sin().powi(2)).sum();
                    let s = (beta * (beta + 2.0)).sqrt();
                    let log_rho = -(beta + s).ln_1p();
                    weight[node] = scale * w * (a as f64 * log_rho).exp() / s;
                    for (j, &th) in theta.iter().enumerate() {
                        let c1 = th.cos();
                        let col = &mut cosines[j];
                        col[0][node] = 1.0;
                        if a >= 1 {
                            col[1][node] = c1;
                        }
                        for b in 2..=a {
                            col[b][node] = 2.0 * c1 * col[b - 1][node] - col[b - 2][node];
                        }
                    }
                    node += 1;
                }
            }
        }

        let mut out = Vec::new();
        let mut tuple = vec![0usize; m];
        let mut prod = vec![0.0; nodes];
        loop {
            prod.copy_from_slice(&weight);
            for (j, &b) in tuple.iter().enumerate() {
                for (p, c) in prod.iter_mut().zip(&cosines[j][b]) {
                    *p *= c;
                }
            }
            let v: f64 = prod.iter().sum();
            let mut full = Vec::with_capacity(d);
            full.push(a);
            let mut rest = tuple.clone();
            rest.sort_unstable_by(|x, y| y.cmp(x));
            full.extend(rest);
            out.push((full, v));
            // Next non-increasing tuple bounded by a.
            let mut i = m;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                let cap = if i == 0 { a } else { tuple[i - 1] };
                if tuple[i] < cap {
                    tuple[i] += 1;
                    for t in tuple.iter_mut().skip(i + 1) {
                        *t = 0;
                    }
                    break;
                }
            }
        }
    }

    /// Leading power law plus the first anisotropic correction.
    pub fn asymptotic(&self, x: &[i64]) -> f64 {
        let r2: f64 = x.iter().map(|&c| (c * c) as f64).sum();
        let r = r2.sqrt();
        let s4: f64 = x.iter().map(|&c| ((c * c) as f64).powi(2)).sum();
        let d = self.dim as f64;
        self.lead * r.powf(2.0 - d) + self.corr * r.powf(-d) * ((d + 2.0) * s4 / (r2 * r2) - 3.0)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn config(&self) -> &GreenConfig {
        &self.cfg
    }

    /// Radius of the dense lookup table.
    pub fn dense_radius(&self) -> u64 {
        self.cfg.dense_radius
    }

    /// `g(0, x)` for a displacement `x`.
    #[inline]
    pub fn at(&self, x: &[i64]) -> f64 {
        let mut idx = 0usize;
        for &c in &x[..self.dim] {
            let a = c.unsigned_abs() as usize;
            if a >= self.side {
                return self.asymptotic(&x[..self.dim]);
            }
            idx = idx * self.side + a;
        }
        self.dense[idx]
    }

    /// `g(x, y)`.
    #[inline]
    pub fn g(&self, x: &LatticePoint, y: &LatticePoint) -> f64 {
        let mut v = [0i64; MAX_DIM];
        for (i, vi) in v.iter_mut().enumerate().take(self.dim) {
            *vi = y.get(i) - x.get(i);
        }
        self.at(&v)
    }

    /// `g(0,0)`.
    pub fn origin(&self) -> f64 {
        self.dense[0]
    }

    /// Checked variant of [`GreenTable::g`].
    pub fn green(&self, x: &LatticePoint, y: &LatticePoint) -> Result<f64> {
        for p in [x, y] {
            if p.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
            }
        }
        Ok(self.g(x, y))
    }

    /// `max |g(0,x) - (1/2d) Σ_y g(0,y)|` over `0 < |x|∞ <= radius`, and the defect at the origin.
    pub fn harmonicity_residual(&self, radius: i64) -> (f64, f64) {
        let d = self.dim;
        let side = (2 * radius + 1) as usize;
        let mut worst = 0.0f64;
        let mut x = vec![0i64; d];
        for idx in 0..side.pow(d as u32) {
            let mut r = idx;
            for i in (0..d).rev() {
                x[i] = (r % side) as i64 - radius;
                r /= side;
            }
            if x.iter().all(|&c| c == 0) {
                continue;
            }
            let mut s = 0.0;
            for i in 0..d {
                for e in [-1, 1] {
                    x[i] += e;
                    s += self.at(&x);
                    x[i] -= e;
                }
            }
            worst = worst.max((self.at(&x) - s / (2 * d) as f64).abs());
        }
        let mut e1 = vec![0i64; d];
        e1[0] = 1;
        let origin_defect = (self.at(&e1) - (self.origin() - 1.0)).abs();
        (worst, origin_defect)
    }
}

/// Free function form of [`GreenTable::green`] using the shared table.
pub fn green(x: &LatticePoint, y: &LatticePoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    GreenTable::shared(x.dim())?.green(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_recurrent_dimensions() {
        assert_eq!(GreenTable::new(2).unwrap_err(), Error::TransientDimension(2));
    }

    #[test]
    fn quadrature_converged() {
        let cfg = GreenConfig { r0: 6, dense_radius: 8, order: 16, refine: 1 };
        let fine = GreenConfig { refine: 2, ..cfg.clone() };
        let a = GreenTable::with_config(3, cfg).unwrap();
        let b = GreenTable::with_config(3, fine).unwrap();
        for x in [[0, 0, 0], [1, 0, 0], [3, 2, 1], [6, 6, 6], [6, 0, 0]] {
            assert!((a.at(&x) - b.at(&x)).abs() < 1e-12 * b.at(&x), "{x:?}");
        }
    }

    #[test]
    fn symmetric_and_decreasing() {
        let t = GreenTable::shared(3).unwrap();
        assert!(t.origin() > 1.0);
        assert_eq!(t.at(&[3, -1, 2]), t.at(&[-2, 1, 3]));
        for k in 0..40 {
            assert!(t.at(&[k, 0, 0]) > t.at(&[k + 1, 0, 0]));
        }
    }
}
