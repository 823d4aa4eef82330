use interlace::continuum::BemConfig;
use interlace::fsolver::{
    box_capacity_at_density, f_curve, f_upper_at, f_upper_bound, intersection_rate, rate_predictions, CapacityOracle, FSolverConfig,
};
use interlace::GridShape;

fn cfg() -> FSolverConfig {
    FSolverConfig { panel_density: 8, ..FSolverConfig::default() }
}

#[test]
fn witness_is_feasible_and_reproducible() {
    let c = cfg();
    let cap = box_capacity_at_density(3, c.panel_density, &c.bem).unwrap();
    let p = f_upper_bound(0.5 * cap, 4, 2, 3, &c).unwrap();
    assert!(p.cap_a <= p.lambda + p.tolerance);
    assert!(p.upper_bound <= cap + 1e-12);
    assert!(p.upper_bound >= cap - p.lambda - p.tolerance);
    let mut oracle = CapacityOracle::new(3, 4, c.panel_density, c.bem.clone()).unwrap();
    let a = oracle.capacity(&p.witness).unwrap();
    let rest = oracle.capacity(&p.witness.complement_in_unit_box().unwrap()).unwrap();
    assert!((a - p.cap_a).abs() < 1e-9 * cap);
    assert!((rest - p.upper_bound).abs() < 1e-9 * cap);
    assert_eq!(f_upper_bound(0.5 * cap, 4, 2, 3, &c).unwrap(), p);
}

#[test]
fn curve_is_non_increasing_with_box_endpoint() {
    let c = cfg();
    let cap = box_capacity_at_density(3, c.panel_density, &c.bem).unwrap();
    let grid: Vec<f64> = (0..5).map(|i| cap * i as f64 / 5.0).collect();
    let curve = f_curve(&grid, 4, 1, 9, &c, None).unwrap();
    assert!(curve.windows(2).all(|w| w[1].upper_bound <= w[0].upper_bound));
    assert!((curve[0].upper_bound - cap).abs() < 1e-9 * cap);
    assert!(curve.iter().all(|p| p.cap_a <= p.lambda + p.tolerance));
    assert!(f_curve(&[1.0, 0.5], 4, 1, 9, &c, None).is_err());
    assert!(f_curve(&grid, 5, 1, 9, &c, None).is_err());
}

#[test]
fn rate_helpers() {
    let c = cfg();
    let cap = box_capacity_at_density(3, c.panel_density, &c.bem).unwrap();
    let curve = f_curve(&[0.0, 0.5 * cap], 4, 0, 1, &c, None).unwrap();
    assert_eq!(f_upper_at(cap, &curve, cap), 0.0);
    assert_eq!(f_upper_at(0.1 * cap, &curve, cap), curve[0].upper_bound);
    assert_eq!(f_upper_at(0.7 * cap, &curve, cap), curve[1].upper_bound);
    let r = rate_predictions(2.0, 3, &[0.5 * cap / 3.0], &curve, cap);
    assert!((r[0] - 2.0 / 3.0 * curve[1].upper_bound).abs() < 1e-12);
    assert!((intersection_rate(0.25, 0.5, 3, cap) - 0.25 / 3.0 * cap).abs() < 1e-12);
}

#[test]
fn refined_box_keeps_its_capacity() {
    let bem = BemConfig::default();
    let mut coarse = CapacityOracle::new(3, 4, 8, bem.clone()).unwrap();
    let mut fine = CapacityOracle::new(3, 8, 8, bem).unwrap();
    let shape = GridShape::unit_box(3, 4);
    let a = coarse.capacity(&shape).unwrap();
    let b = fine.capacity(&shape.refine(2)).unwrap();
    assert!((a - b).abs() < 1e-9 * a, "{a} vs {b}");
    assert!(CapacityOracle::new(3, 3, 8, BemConfig::default()).is_err());
}
