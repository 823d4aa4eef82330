use interlace::continuum::panels::{kernel_constant, rectangle_inverse_distance};
use interlace::continuum::sphere::ball_capacity;
use interlace::continuum::wos::{wos_capacity, WosConfig};
use interlace::continuum::{brownian_capacity, brownian_capacity_with_error, BemConfig};
use interlace::{GridShape, LatticePoint, LatticeSet};

fn bem(refine: u32) -> BemConfig {
    BemConfig { refine, ..BemConfig::default() }
}

/// Unit box minus one octant.
fn l_shape() -> GridShape {
    let cells = LatticeSet::from_predicate(LatticePoint::from_slice(&[-1, -1, -1]), LatticePoint::from_slice(&[0, 0, 0]), |c| {
        c.coords() != [0, 0, 0]
    });
    GridShape::from_cells(3, 1, cells.iter()).unwrap()
}

#[test]
fn kernel_constant_values() {
    let pi = std::f64::consts::PI;
    assert!((kernel_constant(3) - 1.0 / (2.0 * pi)).abs() < 1e-15);
    assert!((kernel_constant(4) - 1.0 / (2.0 * pi * pi)).abs() < 1e-15);
}

#[test]
fn rectangle_integral_matches_midpoint_rule() {
    let n = 800;
    for (x1, x2, y1, y2, z) in [(0.0, 1.0, 0.0, 1.0, 0.3), (-0.5, 0.7, 0.2, 1.1, 0.05), (1.0, 2.0, -1.0, 1.0, 2.0)] {
        let (hx, hy) = ((x2 - x1) / n as f64, (y2 - y1) / n as f64);
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = x1 + (i as f64 + 0.5) * hx;
                let y = y1 + (j as f64 + 0.5) * hy;
                sum += 1.0 / (x * x + y * y + z * z).sqrt();
            }
        }
        let exact = rectangle_inverse_distance(x1, x2, y1, y2, z);
        assert!((exact - sum * hx * hy).abs() < 1e-4 * exact, "{exact} vs {}", sum * hx * hy);
    }
}

#[test]
fn ball_capacity_is_two_pi_r() {
    for r in [0.25, 1.5] {
        let c = ball_capacity(r, 3).unwrap();
        let exact = 2.0 * std::f64::consts::PI * r;
        assert!((c / exact - 1.0).abs() < 0.01, "{c} vs {exact}");
    }
}

#[test]
fn capacity_scales_linearly() {
    let unit = brownian_capacity(&GridShape::unit_box(3, 1), &bem(8)).unwrap();
    let big = GridShape::new(1, false, LatticeSet::from_predicate(LatticePoint::from_slice(&[-2, -2, -2]), LatticePoint::from_slice(&[1, 1, 1]), |_| true))
        .unwrap();
    let c = brownian_capacity(&big, &bem(4)).unwrap();
    assert!((c - 2.0 * unit).abs() < 1e-9 * c, "{c} vs {}", 2.0 * unit);
}

#[test]
fn capacity_is_monotone_in_the_shape() {
    let cell = GridShape::from_cells(3, 1, [LatticePoint::from_slice(&[0, 0, 0])]).unwrap();
    let caps: Vec<f64> = [cell, l_shape(), GridShape::unit_box(3, 1)].iter().map(|s| brownian_capacity(s, &bem(8)).unwrap()).collect();
    assert!(caps.windows(2).all(|w| w[0] < w[1]), "{caps:?}");
    assert_eq!(brownian_capacity(&GridShape::empty(3, 1), &bem(8)).unwrap(), 0.0);
}

#[test]
fn collocation_agrees_with_walk_on_spheres_off_the_box() {
    let est = brownian_capacity_with_error(&l_shape(), &bem(8)).unwrap();
    let wos = wos_capacity(&l_shape(), 200_000, 17, &WosConfig::default()).unwrap();
    let gap = (est.value - wos.estimate).abs();
    assert!(gap <= 3.0 * wos.std_error + est.mesh_error, "{} ± {} vs {} ± {}", est.value, est.mesh_error, wos.estimate, wos.std_error);
}
