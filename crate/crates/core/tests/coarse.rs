use interlace::coarse::{census, classify_box, derive_label, h_functional, BoxClassification, BoxLabel};
use interlace::interlacement::sample;
use interlace::lattice::PartitionConfig;
use interlace::potential::{equilibrium_measure, GreenTable, SolverConfig};
use interlace::{LatticeBox, LatticePoint, LatticeSet};
use proptest::prelude::*;

fn partition(l: u64) -> PartitionConfig {
    PartitionConfig { k: 1, l_override: Some(l), ..PartitionConfig::default() }
}

#[test]
fn zero_intensity_gives_type_two_everywhere() {
    let s = sample(0.0, &LatticeBox::centered(3, 8), 1).unwrap();
    let rep = census(&s, 0.5, 1e-6, &partition(2)).unwrap();
    assert_eq!(rep.boxes.len(), 27);
    assert_eq!(rep.count(BoxLabel::TypeIIGood), 27);
    assert!(rep.event_a);
    let h = h_functional(&s, &rep).unwrap();
    assert_eq!(h.h, 0.0);
    assert!(h.holds);
}

#[test]
fn averages_use_the_normalised_box_measure() {
    let s = sample(1.0, &LatticeBox::centered(3, 6), 4).unwrap();
    let bx = LatticeBox::new(LatticePoint::from_slice(&[2, -1, 0]), 2);
    let c = classify_box(&s, &bx, 0.5).unwrap();
    let g = GreenTable::shared(3).unwrap();
    let e = equilibrium_measure::<f64>(&bx.to_set(), &g, &SolverConfig::default()).unwrap();
    let avg: f64 = e.iter().map(|(p, m)| s.local_time(&p) * m).sum::<f64>() / e.total();
    assert!((c.avg_local_time - avg).abs() < 1e-9 * avg.max(1.0));
    assert!((0.0..=1.0).contains(&c.max_escape));
    assert!(classify_box(&s, &LatticeBox::centered(3, 7), 0.5).is_err());
    assert!(classify_box(&s, &bx, 1.0).is_err());
}

#[test]
fn vacant_box_escapes_surely() {
    let s = sample(0.0, &LatticeBox::centered(3, 3), 1).unwrap();
    let c = classify_box(&s, &LatticeBox::centered(3, 1), 0.3).unwrap();
    assert_eq!(c.max_escape, 1.0);
    assert_eq!(c.label, BoxLabel::TypeIIGood);
}

#[test]
fn h_matches_direct_pairing() {
    let s = sample(0.3, &LatticeBox::centered(3, 8), 10_003).unwrap();
    let rep = census(&s, 0.5, 0.1, &partition(2)).unwrap();
    let h = h_functional(&s, &rep).unwrap();
    let boxes = rep.type_two_boxes();
    assert!(!boxes.is_empty());
    let union = boxes.iter().fold(LatticeSet::empty(3), |acc, b| acc.union(&b.to_set()));
    let g = GreenTable::shared(3).unwrap();
    let e = equilibrium_measure::<f64>(&union, &g, &SolverConfig::default()).unwrap();
    let direct: f64 = e.iter().map(|(p, m)| s.local_time(&p) * m).sum();
    assert!((h.h - direct).abs() < 1e-7 * direct.max(1.0), "{} vs {direct}", h.h);
    assert!((h.capacity - e.total()).abs() < 1e-7 * e.total());
    assert!(h.holds);
}

#[test]
fn rho_zero_fails_with_a_bad_box() {
    let window = LatticeBox::centered(3, 8);
    let found = (0..40u64).find_map(|seed| {
        let s = sample(0.5, &window, seed).unwrap();
        let rep = census(&s, 0.05, 0.0, &partition(2)).unwrap();
        (rep.bad_count > 0).then_some(rep)
    });
    let rep = found.expect("a sample with a bad box");
    assert!(!rep.event_a);
    assert!(rep.bad_fraction() > 0.0);
}

#[test]
fn report_exports_one_line_per_box() {
    let dir = tempfile::tempdir().unwrap();
    let s = sample(1.0, &LatticeBox::centered(3, 8), 2).unwrap();
    let rep = census(&s, 0.5, 0.1, &partition(2)).unwrap();
    let path = dir.path().join("boxes.jsonl");
    rep.write(&path).unwrap();
    let back: Vec<BoxClassification> =
        std::fs::read_to_string(&path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, rep.boxes);
    assert!(rep.labels_consistent());
}

#[test]
fn census_rejects_foreign_reports() {
    let a = sample(1.0, &LatticeBox::centered(3, 8), 2).unwrap();
    let b = sample(1.0, &LatticeBox::centered(3, 8), 3).unwrap();
    let rep = census(&a, 0.5, 0.1, &partition(2)).unwrap();
    assert!(h_functional(&b, &rep).is_err());
    assert!(census(&a, 0.5, -1.0, &partition(2)).is_err());
}

proptest! {
    #[test]
    fn labels_follow_the_witnesses(esc in 0.0..1.0f64, avg in 0.0..5.0f64, delta in 0.01..0.99f64, u in 0.0..3.0f64) {
        let label = derive_label(esc, avg, delta, u);
        match label {
            BoxLabel::TypeIGood => prop_assert!(esc < delta),
            BoxLabel::TypeIIGood => prop_assert!(esc >= delta && (avg < delta * u || (u == 0.0 && avg == 0.0))),
            BoxLabel::Bad => prop_assert!(esc >= delta && avg >= delta * u),
        }
        // Raising δ never turns a good box bad.
        if label != BoxLabel::Bad {
            prop_assert_ne!(derive_label(esc, avg, (delta * 1.5).min(0.999), u), BoxLabel::Bad);
        }
    }

    #[test]
    fn census_labels_are_consistent(seed in 0u64..1000, u in 0.1..2.0f64, delta in 0.1..0.9f64) {
        let s = sample(u, &LatticeBox::centered(3, 4), seed).unwrap();
        let rep = census(&s, delta, 0.1, &partition(1)).unwrap();
        prop_assert!(rep.labels_consistent());
        prop_assert_eq!(rep.bad_count, rep.count(BoxLabel::Bad));
    }
}
