mod common;

use interlace::lattice::{LatticeBox, LatticePoint, LatticeSet};
use interlace::potential::{capacity, equilibrium_measure, hitting_field, hitting_probability, GreenTable, HittingMethod, SolverConfig};
use proptest::prelude::*;

fn set(points: &[[i64; 3]]) -> LatticeSet {
    LatticeSet::from_points(3, points.iter().map(|p| LatticePoint::from_slice(p))).unwrap()
}

#[test]
fn small_set_capacities_match_closed_forms() {
    let g = GreenTable::shared(3).unwrap();
    let g0 = g.origin();
    let g1 = g.at(&[1, 0, 0]);
    assert!((capacity(&set(&[[0, 0, 0]])).unwrap() - 1.0 / g0).abs() < 1e-12);
    assert!((capacity(&set(&[[0, 0, 0], [1, 0, 0]])).unwrap() - 2.0 / (g0 + g1)).abs() < 1e-12);
    // Three collinear points: solve the 2×2 system left after using the symmetry of the ends.
    let g2 = g.at(&[2, 0, 0]);
    let (end, mid) = {
        // end·(g0 + g2) + mid·g1 = 1, 2·end·g1 + mid·g0 = 1
        let det = (g0 + g2) * g0 - 2.0 * g1 * g1;
        ((g0 - g1) / det, ((g0 + g2) - 2.0 * g1) / det)
    };
    let line = capacity(&set(&[[-1, 0, 0], [0, 0, 0], [1, 0, 0]])).unwrap();
    assert!((line - (2.0 * end + mid)).abs() < 1e-12, "{line}");
}

#[test]
fn hitting_probabilities_match_walks() {
    let pts = [[-1, 0, 0], [0, 0, 0], [1, 0, 0]];
    let a = set(&pts);
    let cap = capacity(&a).unwrap();
    let window = LatticeBox::centered(3, 6);
    for start in [[2, 0, 0], [0, 2, 1], [3, -2, 1]] {
        let exact = hitting_probability(&LatticePoint::from_slice(&start), &a, &window).unwrap();
        let (mc, se) = common::hitting_by_walks(start, &pts, cap, 20, 200_000, 31);
        assert!((exact - mc).abs() < 4.0 * se + 2e-4, "{start:?}: {exact} vs {mc} ± {se}");
    }
}

#[test]
fn hitting_methods_agree() {
    let a = set(&[[0, 0, 0], [1, 0, 0], [0, 1, 0]]);
    let window = LatticeBox::centered(3, 4);
    let g = GreenTable::shared(3).unwrap();
    let cfg = SolverConfig::default();
    let last = hitting_field(&a, &window, HittingMethod::LastExit, &g, &cfg).unwrap();
    let solve = hitting_field(&a, &window, HittingMethod::WindowSolve, &g, &cfg).unwrap();
    for x in window.to_set().iter() {
        let (p, q) = (last.value(&x).unwrap(), solve.value(&x).unwrap());
        assert!((p - q).abs() < 1e-8, "{x:?}: {p} vs {q}");
    }
    assert!(solve.harmonicity_defect() < 1e-8);
}

fn small_set() -> impl Strategy<Value = Vec<[i64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-3i64..=3), 1..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_is_monotone_and_subadditive(a in small_set(), b in small_set()) {
        let (sa, sb) = (set(&a), set(&b));
        let u = sa.union(&sb);
        let (ca, cb, cu) = (capacity(&sa).unwrap(), capacity(&sb).unwrap(), capacity(&u).unwrap());
        prop_assert!(cu >= ca.max(cb) - 1e-10);
        prop_assert!(cu <= ca + cb + 1e-10);
    }

    #[test]
    fn capacity_is_translation_and_reflection_invariant(a in small_set(), v in prop::array::uniform3(-20i64..=20)) {
        let s = set(&a);
        let moved = s.translate(&LatticePoint::from_slice(&v));
        let flipped = set(&a.iter().map(|p| [-p[2], p[0], p[1]]).collect::<Vec<_>>());
        let c = capacity(&s).unwrap();
        prop_assert!((capacity(&moved).unwrap() - c).abs() < 1e-9);
        prop_assert!((capacity(&flipped).unwrap() - c).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_potential_is_one_on_the_set(a in small_set()) {
        let g = GreenTable::shared(3).unwrap();
        let s = set(&a);
        let e = equilibrium_measure::<f64>(&s, &g, &SolverConfig::default()).unwrap();
        prop_assert!(e.min_mass() > 0.0);
        for x in s.iter() {
            prop_assert!((e.potential(&g, &x) - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn solver_routes_agree_on_a_box() {
    let g = GreenTable::shared(3).unwrap();
    let b = LatticeBox::centered(3, 5).to_set();
    let factor = equilibrium_measure::<f64>(&b, &g, &SolverConfig { use_symmetry: false, factor_limit: usize::MAX, ..Default::default() }).unwrap();
    let cg = equilibrium_measure::<f64>(&b, &g, &SolverConfig { use_symmetry: false, factor_limit: 0, ..Default::default() }).unwrap();
    let fft = equilibrium_measure::<f64>(&b, &g, &SolverConfig { dense_limit: 0, ..Default::default() }).unwrap();
    let sym = equilibrium_measure::<f64>(&b, &g, &SolverConfig::default()).unwrap();
    for other in [&cg, &fft, &sym] {
        assert!((other.total() - factor.total()).abs() < 1e-7, "{} vs {}", other.total(), factor.total());
    }
}
