//! Triangulated spheres, used to check the kernel normalisation against `cap̃(ball) = 2πr` in d = 3.

use std::collections::HashMap;

use super::bem::solve_collocation;
use super::panels::TrianglePanel;
use crate::error::Result;

/// Icosahedron subdivided `level` times, vertices projected to the sphere of radius `r`.
pub fn icosphere(r: f64, level: u32) -> Vec<TrianglePanel> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    for v in verts.iter_mut() {
        *v = normalize(*v);
    }
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[k] = *mid.entry(key).or_insert_with(|| {
                    let (p, q) = (verts[a], verts[b]);
                    verts.push(normalize([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                    verts.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    faces
        .iter()
        .map(|f| {
            let s = |i: usize| [r * verts[i][0], r * verts[i][1], r * verts[i][2]];
            TrianglePanel { v: [s(f[0]), s(f[1]), s(f[2])] }
        })
        .collect()
}

/// Collocation capacity of the triangulated sphere at `level`.
pub fn ball_capacity_at_level(r: f64, level: u32) -> Result<f64> {
    let panels = icosphere(r, level);
    let orbit: Vec<usize> = (0..panels.len()).collect();
    Ok(solve_collocation::<f64, _>(&panels, 3, &orbit, usize::MAX)?.1)
}

/// Capacity of the ball of radius `r` in d = 3 from two triangulation levels, extrapolated in `h²`.
pub fn ball_capacity(r: f64, level: u32) -> Result<f64> {
    let fine = ball_capacity_at_level(r, level)?;
    if level == 0 {
        return Ok(fine);
    }
    let coarse = ball_capacity_at_level(r, level - 1)?;
    Ok((4.0 * fine - coarse) / 3.0)
}
