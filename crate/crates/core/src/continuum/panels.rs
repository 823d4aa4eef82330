//! Boundary panels and integrals of the Newtonian kernel over them.

use crate::lattice::MAX_DIM;
use crate::quad::cached_rule;

/// A flat boundary element.
pub trait Panel: Send + Sync {
    fn centroid(&self) -> [f64; MAX_DIM];
    fn area(&self) -> f64;
    /// Diameter.
    fn size(&self) -> f64;
    /// `∫_panel |x − y|^{2−d} dy`.
    fn kernel_integral(&self, x: &[f64], dim: usize) -> f64;
}

/// `Γ(d/2 − 1) / (2 π^{d/2})`, the Brownian Green kernel constant.
pub fn kernel_constant(dim: usize) -> f64 {
    let d = dim as f64;
    libm::tgamma(d / 2.0 - 1.0) / (2.0 * std::f64::consts::PI.powf(d / 2.0))
}

/// Axis-aligned `(d−1)`-dimensional rectangle `{y : y_k = offset, lo_j <= y_j <= hi_j}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectPanel {
    pub dim: usize,
    pub axis: usize,
    pub offset: f64,
    pub lo: [f64; MAX_DIM],
    pub hi: [f64; MAX_DIM],
}

const FRAC_1_SQRT_3: f64 = 0.577_350_269_189_625_8;

fn asinh_ratio(num: f64, den2: f64) -> f64 {
    if den2 == 0.0 {
        0.0
    } else {
        (num / den2.sqrt()).asinh()
    }
}

/// Antiderivative of `1/r` over a planar rectangle corner at `(X, Y)` with normal offset `z`.
fn corner(x: f64, y: f64, z: f64) -> f64 {
    let mut v = 0.0;
    if x != 0.0 {
        v += x * asinh_ratio(y, x * x + z * z);
    }
    if y != 0.0 {
        v += y * asinh_ratio(x, y * y + z * z);
    }
    if z != 0.0 {
        let r = (x * x + y * y + z * z).sqrt();
        v -= z * (x * y / (z * r)).atan();
    }
    v
}

/// `∫∫_{[x1,x2]×[y1,y2]} 1/√(x² + y² + z²)`, exact.
pub fn rectangle_inverse_distance(x1: f64, x2: f64, y1: f64, y2: f64, z: f64) -> f64 {
    corner(x2, y2, z) - corner(x1, y2, z) - corner(x2, y1, z) + corner(x1, y1, z)
}

impl RectPanel {
    fn kernel_integral_3d(&self, x: &[f64]) -> f64 {
        let (i, j) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        let (hx, hy) = (self.hi[i] - self.lo[i], self.hi[j] - self.lo[j]);
        let dx = x[i] - 0.5 * (self.lo[i] + self.hi[i]);
        let dy = x[j] - 0.5 * (self.lo[j] + self.hi[j]);
        let dz = x[self.axis] - self.offset;
        let dist2 = dx * dx + dy * dy + dz * dz;
        let size2 = hx * hx + hy * hy;
        if dist2 > 400.0 * size2 {
            return hx * hy / dist2.sqrt();
        }
        if dist2 > 36.0 * size2 {
            // Two-point Gauss rule per side, nodes at ±h/(2√3).
            let (ax, ay) = (0.5 * hx * FRAC_1_SQRT_3, 0.5 * hy * FRAC_1_SQRT_3);
            let z2 = dz * dz;
            let mut s = 0.0;
            for ex in [dx - ax, dx + ax] {
                for ey in [dy - ay, dy + ay] {
                    s += 1.0 / (ex * ex + ey * ey + z2).sqrt();
                }
            }
            return 0.25 * hx * hy * s;
        }
        rectangle_inverse_distance(self.lo[i] - x[i], self.hi[i] - x[i], self.lo[j] - x[j], self.hi[j] - x[j], dz)
    }

    fn in_plane_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |&j| j != self.axis)
    }

    fn distance2(&self, x: &[f64]) -> f64 {
        let mut s = (x[self.axis] - self.offset).powi(2);
        for j in self.in_plane_axes() {
            let c = x[j].clamp(self.lo[j], self.hi[j]);
            s += (x[j] - c).powi(2);
        }
        s
    }

    /// Tensor Gauss rule of `q` points per side.
    fn gauss(&self, x: &[f64], q: usize, dim: usize) -> f64 {
        let (gx, gw) = cached_rule(q);
        let axes: Vec<usize> = self.in_plane_axes().collect();
        let m = axes.len();
        let mut y = [0.0; MAX_DIM];
        y[self.axis] = self.offset;
        let mut total = 0.0;
        for idx in 0..q.pow(m as u32) {
            let mut r = idx;
            let mut w = 1.0;
            for &j in &axes {
                let k = r % q;
                r /= q;
                let half = 0.5 * (self.hi[j] - self.lo[j]);
                y[j] = self.lo[j] + half * (gx[k] + 1.0);
                w *= half * gw[k];
            }
            let d2: f64 = (0..dim).map(|i| (x[i] - y[i]).powi(2)).sum();
            total += w * d2.powf(0.5 * (2.0 - dim as f64));
        }
        total
    }

    fn split(&self) -> Vec<RectPanel> {
        let axes: Vec<usize> = self.in_plane_axes().collect();
        let mut out = vec![*self];
        for &j in &axes {
            let mid = 0.5 * (self.lo[j] + self.hi[j]);
            out = out
                .into_iter()
                .flat_map(|p| {
                    let mut a = p;
                    let mut b = p;
                    a.hi[j] = mid;
                    b.lo[j] = mid;
                    [a, b]
                })
                .collect();
        }
        out
    }

    fn adaptive(&self, x: &[f64], dim: usize, depth: u32) -> f64 {
        if self.is_centroid_of(x) {
            return self.self_integral_general(dim);
        }
        if depth == 0 || self.distance2(x).sqrt() > 1.5 * self.size() {
            return self.gauss(x, 6, dim);
        }
        self.split().iter().map(|p| p.adaptive(x, dim, depth - 1)).sum()
    }

    fn is_centroid_of(&self, x: &[f64]) -> bool {
        let c = self.centroid();
        (0..self.dim).all(|i| (x[i] - c[i]).abs() <= 1e-12 * (1.0 + c[i].abs()))
    }

    /// Integral over the panel from its own centroid, `d > 3`, via pyramids around the centroid.
    fn self_integral_general(&self, dim: usize) -> f64 {
        let axes: Vec<usize> = self.in_plane_axes().collect();
        let half: Vec<f64> = axes.iter().map(|&j| 0.5 * (self.hi[j] - self.lo[j])).collect();
        let p = 0.5 * (2.0 - dim as f64);
        let q = 16;
        let (gx, gw) = cached_rule(q);
        let mut total = 0.0;
        for (k, &hk) in half.iter().enumerate() {
            let others: Vec<f64> = half.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, h)| h / hk).collect();
            let mm = others.len();
            let mut s = 0.0;
            for idx in 0..q.pow(mm as u32) {
                let mut r = idx;
                let mut w = 1.0;
                let mut n2 = 0.0;
                for a in &others {
                    let i = r % q;
                    r /= q;
                    let wv = a * gx[i];
                    n2 += wv * wv;
                    w *= a * gw[i];
                }
                s += w * (1.0 + n2).powf(p);
            }
            total += 2.0 * hk * s;
        }
        total
    }
}

impl Panel for RectPanel {
    fn centroid(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for (j, cj) in c.iter_mut().enumerate().take(self.dim) {
            *cj = if j == self.axis { self.offset } else { 0.5 * (self.lo[j] + self.hi[j]) };
        }
        c
    }

    fn area(&self) -> f64 {
        self.in_plane_axes().map(|j| self.hi[j] - self.lo[j]).product()
    }

    fn size(&self) -> f64 {
        self.in_plane_axes().map(|j| (self.hi[j] - self.lo[j]).powi(2)).sum::<f64>().sqrt()
    }

    fn kernel_integral(&self, x: &[f64], dim: usize) -> f64 {
        if dim == 3 {
            return self.kernel_integral_3d(x);
        }
        let dist2 = {
            let c = self.centroid();
            (0..dim).map(|i| (x[i] - c[i]).powi(2)).sum::<f64>()
        };
        let size = self.size();
        if dist2 > 400.0 * size * size {
            return self.area() * dist2.powf(0.5 * (2.0 - dim as f64));
        }
        if dist2 > 36.0 * size * size {
            return self.gauss(x, 3, dim);
        }
        self.adaptive(x, dim, 5)
    }
}

/// Flat triangle in R^3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrianglePanel {
    pub v: [[f64; 3]; 3],
}

const DUNAVANT7: [(f64, f64, f64, f64); 7] = [
    (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506),
    (0.470142064105115, 0.059715871789770, 0.470142064105115, 0.132394152788506),
    (0.470142064105115, 0.470142064105115, 0.059715871789770, 0.132394152788506),
    (0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827),
    (0.101286507323456, 0.797426985353087, 0.101286507323456, 0.125939180544827),
    (0.101286507323456, 0.101286507323456, 0.797426985353087, 0.125939180544827),
];

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

impl TrianglePanel {
    fn point(&self, l: (f64, f64, f64)) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (i, pi) in p.iter_mut().enumerate() {
            *pi = l.0 * self.v[0][i] + l.1 * self.v[1][i] + l.2 * self.v[2][i];
        }
        p
    }

    fn children(&self) -> [TrianglePanel; 4] {
        let m = |a: [f64; 3], b: [f64; 3]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
        let [a, b, c] = self.v;
        let (ab, bc, ca) = (m(a, b), m(b, c), m(c, a));
        [
            TrianglePanel { v: [a, ab, ca] },
            TrianglePanel { v: [ab, b, bc] },
            TrianglePanel { v: [ca, bc, c] },
            TrianglePanel { v: [ab, bc, ca] },
        ]
    }

    fn rule(&self, x: [f64; 3]) -> f64 {
        let area = self.area();
        DUNAVANT7.iter().map(|&(a, b, c, w)| w * area / norm3(sub3(x, self.point((a, b, c))))).sum()
    }

    /// `∫ 1/|p − y|` over the triangle for `p` in its plane and inside it.
    fn from_interior_point(&self, p: [f64; 3]) -> f64 {
        let mut total = 0.0;
        for k in 0..3 {
            let a = self.v[k];
            let b = self.v[(k + 1) % 3];
            let e = sub3(b, a);
            let len = norm3(e);
            let u = [e[0] / len, e[1] / len, e[2] / len];
            let sa = dot3(sub3(a, p), u);
            let sb = dot3(sub3(b, p), u);
            let foot = sub3(sub3(a, p), [sa * u[0], sa * u[1], sa * u[2]]);
            let h = norm3(foot);
            if h > 0.0 {
                total += h * ((sb / h).asinh() - (sa / h).asinh());
            }
        }
        total
    }

    fn integral(&self, x: [f64; 3], depth: u32) -> f64 {
        let c = self.centroid();
        let dist = norm3(sub3(x, [c[0], c[1], c[2]]));
        let size = self.size();
        if dist > 8.0 * size {
            return self.area() / dist;
        }
        if dist > 1.5 * size || depth == 0 {
            return self.rule(x);
        }
        self.children().iter().map(|t| t.integral(x, depth - 1)).sum()
    }
}

impl Panel for TrianglePanel {
    fn centroid(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for (i, ci) in c.iter_mut().enumerate().take(3) {
            *ci = (self.v[0][i] + self.v[1][i] + self.v[2][i]) / 3.0;
        }
        c
    }

    fn area(&self) -> f64 {
        0.5 * norm3(cross3(sub3(self.v[1], self.v[0]), sub3(self.v[2], self.v[0])))
    }

    fn size(&self) -> f64 {
        (0..3).map(|k| norm3(sub3(self.v[(k + 1) % 3], self.v[k]))).fold(0.0, f64::max)
    }

    fn kernel_integral(&self, x: &[f64], _dim: usize) -> f64 {
        let c = self.centroid();
        let p = [x[0], x[1], x[2]];
        if (0..3).all(|i| (p[i] - c[i]).abs() <= 1e-12 * (1.0 + c[i].abs())) {
            return self.from_interior_point(p);
        }
        self.integral(p, 4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> RectPanel {
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        lo[0] = -h / 2.0;
        hi[0] = h / 2.0;
        lo[1] = -h / 2.0;
        hi[1] = h / 2.0;
        RectPanel { dim: 3, axis: 2, offset: 0.0, lo, hi }
    }

    #[test]
    fn square_self_term() {
        let h = 0.3;
        let v = square(h).kernel_integral(&[0.0, 0.0, 0.0], 3);
        assert!((v - 4.0 * h * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn rectangle_formula_matches_quadrature() {
        let p = square(1.0);
        for x in [[0.3, 0.9, 0.4], [1.5, -0.2, 0.0], [0.1, 0.1, -2.0]] {
            let exact = p.kernel_integral(&x, 3);
            let fine = {
                let mut total = 0.0;
                let n = 400;
                for i in 0..n {
                    for j in 0..n {
                        let y = [-0.5 + (i as f64 + 0.5) / n as f64, -0.5 + (j as f64 + 0.5) / n as f64];
                        let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + x[2] * x[2]).sqrt();
                        total += 1.0 / r / (n * n) as f64;
                    }
                }
                total
            };
            assert!((exact - fine).abs() < 2e-4 * fine, "{x:?} {exact} {fine}");
        }
    }

    #[test]
    fn triangle_self_term_matches_polar_integral() {
        let t = TrianglePanel { v: [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.8, 0.0]] };
        let c = t.centroid();
        let exact = t.kernel_integral(&c[..3], 3);
        // In polar coordinates about c the integral is the mean boundary distance times 2π.
        let v = t.v;
        let n = 200_000;
        let mut acc = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) * 2.0 * std::f64::consts::PI / n as f64;
            let dir = [th.cos(), th.sin()];
            let mut best = f64::INFINITY;
            for e in 0..3 {
                let a = v[e];
                let b = v[(e + 1) % 3];
                let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
                let det = dir[0] * (-ey) - dir[1] * (-ex);
                if det.abs() < 1e-15 {
                    continue;
                }
                let (rx, ry) = (a[0] - c[0], a[1] - c[1]);
                let s = (rx * (-ey) - ry * (-ex)) / det;
                let w = (dir[0] * ry - dir[1] * rx) / det;
                if s > 0.0 && (0.0..=1.0).contains(&w) {
                    best = best.min(s);
                }
            }
            acc += best;
        }
        let approx = acc * 2.0 * std::f64::consts::PI / n as f64;
        assert!((exact - approx).abs() < 1e-6 * exact, "{exact} {approx}");
    }

    #[test]
    fn general_dimension_self_term_in_three() {
        // The pyramid rule also applies in d = 3 and must reproduce the closed form.
        let p = square(0.5);
        let v = p.self_integral_general(3);
        assert!((v - 2.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-12, "{v}");
    }
}
