//! Independent Monte Carlo oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Two-term large-|x| expansion of the d = 3 Green function, written out independently of the library.
pub fn green_expansion_3d(x: [i64; 3]) -> f64 {
    let r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) as f64;
    let r = r2.sqrt();
    let s4: f64 = x.iter().map(|&c| ((c * c) as f64).powi(2)).sum();
    let pi = std::f64::consts::PI;
    3.0 / (2.0 * pi * r) + 3.0 / (16.0 * pi) / (r2 * r) * (5.0 * s4 / (r2 * r2) - 3.0)
}

#[derive(Clone, Copy, Debug)]
pub struct WalkEstimate {
    pub value: f64,
    pub std_error: f64,
    pub walks: u64,
}

/// `g(0,0)` in d = 3 from walks started at a neighbour of the origin and stopped on return or on
/// leaving `|x|∞ ≤ radius`.
///
/// With `a` the expansion above and `p` the return probability, `h = (1−p)a` off the origin and
/// `h(0) = 1` approximates `P_x[hit 0]`. Summing its discrete Laplacian along each walk gives
/// `p = (1−p)·E[S_a] + E[S_0]` with `S_a = a(e₁) + Σ Δ'a(X_n)` (Laplacian ignoring the origin) and
/// `S_0 = #{n : X_n ~ 0}/6`. Only the non-harmonic part of `a` contributes noise.
pub fn green_origin_by_walks(walks: u64, radius: i64, seed: u64) -> WalkEstimate {
    let side = (2 * radius + 3) as usize;
    let off = radius + 1;
    let idx = |x: [i64; 3]| (((x[0] + off) as usize * side) + (x[1] + off) as usize) * side + (x[2] + off) as usize;
    let mut a = vec![0.0; side * side * side];
    for i in -off..=off {
        for j in -off..=off {
            for k in -off..=off {
                if (i, j, k) != (0, 0, 0) {
                    a[idx([i, j, k])] = green_expansion_3d([i, j, k]);
                }
            }
        }
    }
    let steps: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    let mut defect = vec![0.0; side * side * side];
    let mut near = vec![0.0; side * side * side];
    for i in -radius..=radius {
        for j in -radius..=radius {
            for k in -radius..=radius {
                let x = [i, j, k];
                if x == [0, 0, 0] {
                    continue;
                }
                let mut s = 0.0;
                for e in steps {
                    let y = [x[0] + e[0], x[1] + e[1], x[2] + e[2]];
                    if y == [0, 0, 0] {
                        near[idx(x)] = 1.0 / 6.0;
                    } else {
                        s += a[idx(y)];
                    }
                }
                defect[idx(x)] = s / 6.0 - a[idx(x)];
            }
        }
    }
    let start = [1i64, 0, 0];
    let a_start = a[idx(start)];
    let chunk = 1u64 << 14;
    let chunks = walks.div_ceil(chunk);
    let sums: Vec<[f64; 5]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = chunk.min(walks - c * chunk);
            // Σ S_a, Σ S_0, Σ S_a², Σ S_0², Σ S_a S_0
            let mut acc = [0.0; 5];
            for _ in 0..n {
                let mut x = start;
                let (mut sa, mut s0) = (a_start, 0.0);
                loop {
                    let i = idx(x);
                    sa += defect[i];
                    s0 += near[i];
                    let e = steps[rng.random_range(0..6)];
                    x = [x[0] + e[0], x[1] + e[1], x[2] + e[2]];
                    if x == [0, 0, 0] || x.iter().any(|c| c.abs() > radius) {
                        break;
                    }
                }
                acc[0] += sa;
                acc[1] += s0;
                acc[2] += sa * sa;
                acc[3] += s0 * s0;
                acc[4] += sa * s0;
            }
            acc
        })
        .collect();
    let mut t = [0.0; 5];
    for s in &sums {
        for k in 0..5 {
            t[k] += s[k];
        }
    }
    let n = walks as f64;
    let (ea, e0) = (t[0] / n, t[1] / n);
    let p = (ea + e0) / (1.0 + ea);
    let q = 1.0 - p;
    // Delta method on Z = (1−p)S_a + S_0.
    let var_a = t[2] / n - ea * ea;
    let var_0 = t[3] / n - e0 * e0;
    let cov = t[4] / n - ea * e0;
    let var_z = q * q * var_a + var_0 + 2.0 * q * cov;
    let se_p = (var_z / n).sqrt() / (1.0 + ea);
    WalkEstimate { value: 1.0 / q, std_error: se_p / (q * q), walks }
}

/// `P_x[H_A < ∞]` in d = 3 by walks stopped on `A` or outside `|z|∞ ≤ radius`; escaped walks are
/// credited `cap_a·a(z)` with `a` the expansion above, the far-field hitting probability of `A`.
pub fn hitting_by_walks(start: [i64; 3], a: &[[i64; 3]], cap_a: f64, radius: i64, walks: u64, seed: u64) -> (f64, f64) {
    let steps: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
    let values: Vec<f64> = (0..walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut x = start;
            loop {
                if a.contains(&x) {
                    return 1.0;
                }
                if x.iter().any(|c| c.abs() > radius) {
                    return cap_a * green_expansion_3d(x);
                }
                let e = steps[rng.random_range(0..6)];
                x = [x[0] + e[0], x[1] + e[1], x[2] + e[2]];
            }
        })
        .collect();
    let n = walks as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
