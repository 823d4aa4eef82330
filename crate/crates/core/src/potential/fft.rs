//! Convolution with the Green kernel on a bounding grid via FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::GreenTable;
use crate::lattice::{LatticePoint, MAX_DIM};

fn fast_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Applies `(G x)(p) = Σ_q g(p, q) x(q)` for a fixed point list.
pub struct GreenConvolution {
    dim: usize,
    shape: [usize; MAX_DIM],
    offsets: Vec<usize>,
    kernel_hat: Vec<Complex<f64>>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl GreenConvolution {
    pub fn new(green: &GreenTable, points: &[LatticePoint]) -> Self {
        let d = green.dim();
        let mut lo = [i64::MAX; MAX_DIM];
        let mut hi = [i64::MIN; MAX_DIM];
        for p in points {
            for i in 0..d {
                lo[i] = lo[i].min(p.get(i));
                hi[i] = hi[i].max(p.get(i));
            }
        }
        let mut shape = [1usize; MAX_DIM];
        let mut ext = [1usize; MAX_DIM];
        for i in 0..d {
            ext[i] = (hi[i] - lo[i] + 1).max(1) as usize;
            shape[i] = fast_size(2 * ext[i] - 1);
        }
        let total: usize = shape[..d].iter().product();
        let offsets = points
            .iter()
            .map(|p| {
                let mut idx = 0;
                for i in 0..d {
                    idx = idx * shape[i] + (p.get(i) - lo[i]) as usize;
                }
                idx
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward: Vec<_> = (0..d).map(|i| planner.plan_fft_forward(shape[i])).collect();
        let inverse: Vec<_> = (0..d).map(|i| planner.plan_fft_inverse(shape[i])).collect();
        let mut kernel = vec![Complex::new(0.0, 0.0); total];
        let mut disp = [0i64; MAX_DIM];
        for (idx, k) in kernel.iter_mut().enumerate() {
            let mut r = idx;
            let mut inside = true;
            for i in (0..d).rev() {
                let c = r % shape[i];
                r /= shape[i];
                disp[i] = if c < ext[i] {
                    c as i64
                } else if c + ext[i] > shape[i] {
                    c as i64 - shape[i] as i64
                } else {
                    inside = false;
                    0
                };
            }
            if inside {
                *k = Complex::new(green.at(&disp[..d]), 0.0);
            }
        }
        let mut conv = Self { dim: d, shape, offsets, kernel_hat: Vec::new(), forward, inverse };
        conv.transform(&mut kernel, false);
        conv.kernel_hat = kernel;
        conv
    }

    fn transform(&self, data: &mut [Complex<f64>], inverse: bool) {
        let d = self.dim;
        let plans = if inverse { &self.inverse } else { &self.forward };
        let mut stride = 1usize;
        for axis in (0..d).rev() {
            let n = self.shape[axis];
            let plan = &plans[axis];
            if stride == 1 {
                plan.process(data);
            } else {
                let mut line = vec![Complex::new(0.0, 0.0); n];
                let block = n * stride;
                for start in (0..data.len()).step_by(block) {
                    for s in 0..stride {
                        for k in 0..n {
                            line[k] = data[start + s + k * stride];
                        }
                        plan.process(&mut line);
                        for k in 0..n {
                            data[start + s + k * stride] = line[k];
                        }
                    }
                }
            }
            stride *= n;
        }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let total = self.kernel_hat.len();
        let mut buf = vec![Complex::new(0.0, 0.0); total];
        for (&o, &v) in self.offsets.iter().zip(x) {
            buf[o] = Complex::new(v, 0.0);
        }
        self.transform(&mut buf, false);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= *k;
        }
        self.transform(&mut buf, true);
        let scale = 1.0 / total as f64;
        for (o, &off) in out.iter_mut().zip(&self.offsets) {
            *o = buf[off].re * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeBox;

    #[test]
    fn matches_direct_sum() {
        let g = GreenTable::shared(3).unwrap();
        let pts = LatticeBox::new(LatticePoint::from_slice(&[3, -1, 0]), 3).inner_boundary().to_vec();
        let x: Vec<f64> = (0..pts.len()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let mut out = vec![0.0; pts.len()];
        GreenConvolution::new(&g, &pts).apply(&x, &mut out);
        for (i, p) in pts.iter().enumerate() {
            let direct: f64 = pts.iter().zip(&x).map(|(q, v)| g.g(p, q) * v).sum();
            assert!((direct - out[i]).abs() < 1e-10, "{direct} {}", out[i]);
        }
    }
}
