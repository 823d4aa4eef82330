//! Acceptance suite. Every criterion runs in sequence (runtime limits assume an otherwise idle
//! core) and prints one PASS/FAIL line; the test fails if any criterion fails.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use interlace::coarse::{census, h_functional};
use interlace::continuum::{ball_capacity, brownian_capacity_with_error, wos_capacity, BemConfig, WosConfig};
use interlace::fsolver::{box_capacity_at_density, f_curve, FCurvePoint, FSolverConfig};
use interlace::harness::{
    capacity_deficiency_trend, experiments, laplace_sweep, reference_box_capacity, verify_intersection_identity,
    verify_vacancy, ExperimentConfig, Probe, ResultRecord,
};
use interlace::interlacement::sample;
use interlace::lattice::{LatticeBox, LatticePoint, PartitionConfig};
use interlace::potential::{relative_equilibrium_check, GreenTable};
use interlace::GridShape;

type Outcome = Result<String, String>;

fn line(text: &str) {
    // Written to the raw handle so the line survives output capture.
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{text}");
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn all_pass(records: &[ResultRecord]) -> Outcome {
    let detail: Vec<String> = records.iter().map(|r| r.summary()).collect();
    ensure(records.iter().all(|r| r.pass), detail.join("\n      "))
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn ac1_green() -> Outcome {
    let t = Instant::now();
    let table = GreenTable::shared(3).map_err(|e| e.to_string())?;
    let quad = table.origin();
    let walks = common::green_origin_by_walks(1 << 24, 8, 20_251_016);
    let (off, origin) = table.harmonicity_residual(10);
    let elapsed = t.elapsed();
    let diff = (quad - walks.value).abs();
    ensure(
        diff <= 1e-4 && off < 1e-6 && origin < 1e-6 && within(elapsed, 60),
        format!(
            "quadrature {quad:.9} walks {:.9} ± {:.1e} |diff| {diff:.2e}; harmonicity {off:.1e} / origin {origin:.1e}; {:.1}s",
            walks.value,
            walks.std_error,
            elapsed.as_secs_f64()
        ),
    )
}

fn ac2_vacancy() -> Outcome {
    let t = Instant::now();
    let mut records = Vec::new();
    for probe in [Probe::Origin, Probe::Box1] {
        for u in [0.5, 1.0] {
            let cfg = ExperimentConfig { probe, u, samples: 100_000, seed: 2, ..ExperimentConfig::default() };
            records.push(verify_vacancy(&cfg).map_err(|e| e.to_string())?);
        }
    }
    let elapsed = t.elapsed();
    all_pass(&records).and_then(|d| ensure(within(elapsed, 300), format!("{d}\n      {:.1}s", elapsed.as_secs_f64())))
}

fn ac3_laplace() -> Outcome {
    let t = Instant::now();
    let mut records = Vec::new();
    for probe in [Probe::Origin, Probe::Line3, Probe::Square9] {
        let cfg = ExperimentConfig { u: 1.0, samples: 100_000, seed: 3, ..ExperimentConfig::default() };
        records.extend(laplace_sweep(&cfg, probe, &[-2.0, -1.0, -0.5, 0.5]).map_err(|e| e.to_string())?);
    }
    let elapsed = t.elapsed();
    all_pass(&records).and_then(|d| ensure(within(elapsed, 900), format!("{d}\n      {:.1}s", elapsed.as_secs_f64())))
}

fn ac4_mean_local_time() -> Outcome {
    let cfg = ExperimentConfig { n: 1, u: 1.0, samples: 100_000, seed: 4, ..ExperimentConfig::default() };
    let r = experiments::verify_mean_local_time(&cfg).map_err(|e| e.to_string())?;
    all_pass(&[r])
}

fn ac5_scaling() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig { n_list: vec![8, 16, 32], ..ExperimentConfig::default() };
    let records = experiments::capacity_scaling(&cfg).map_err(|e| e.to_string())?;
    let deviations: Vec<f64> = records.iter().map(|r| (r.estimate - 1.0).abs()).collect();
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    let last = *deviations.last().ok_or("no rows")?;
    let elapsed = t.elapsed();
    ensure(
        decreasing && last < 0.15 && within(elapsed, 600),
        format!("|ratio − 1| at N = 8, 16, 32: {deviations:.4?}; {:.1}s", elapsed.as_secs_f64()),
    )
}

fn ac6_continuum() -> Outcome {
    let shape = GridShape::unit_box(3, 1);
    let bem = brownian_capacity_with_error(&shape, &BemConfig { refine: 16, ..BemConfig::default() }).map_err(|e| e.to_string())?;
    let wos = wos_capacity(&shape, 1_000_000, 6, &WosConfig::default()).map_err(|e| e.to_string())?;
    let gap = (bem.value - wos.estimate).abs();
    let allowed = 3.0 * wos.std_error + bem.mesh_error;
    let mut worst_ball = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let c = ball_capacity(r, 3).map_err(|e| e.to_string())?;
        worst_ball = worst_ball.max((c / (2.0 * std::f64::consts::PI * r) - 1.0).abs());
    }
    ensure(
        gap <= allowed && worst_ball < 0.01,
        format!(
            "collocation {:.5} (mesh {:.4}) vs walk-on-spheres {:.5} ± {:.4}: gap {gap:.4} ≤ {allowed:.4}; ball relative error {worst_ball:.1e}",
            bem.value, bem.mesh_error, wos.estimate, wos.std_error
        ),
    )
}

fn ac7_intersection() -> Outcome {
    let t = Instant::now();
    let cfg = ExperimentConfig { n: 8, u1: 0.25, u2: 0.25, samples: 10_000, seed: 7, ..ExperimentConfig::default() };
    let r = verify_intersection_identity(&cfg).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    all_pass(&[r]).and_then(|d| ensure(within(elapsed, 1800), format!("{d}\n      {:.1}s", elapsed.as_secs_f64())))
}

fn curve_checks(curve: &[FCurvePoint], cap_ref: f64) -> Result<(), String> {
    if curve.windows(2).any(|w| w[1].upper_bound > w[0].upper_bound) {
        return Err("curve increases".into());
    }
    let first = &curve[0];
    if first.lambda != 0.0 || (first.upper_bound - cap_ref).abs() > first.tolerance {
        return Err(format!("f(0) = {} vs {cap_ref} (tol {})", first.upper_bound, first.tolerance));
    }
    for p in curve {
        if p.upper_bound < cap_ref - p.lambda - p.tolerance {
            return Err(format!("bound {} below cap − λ at λ = {}", p.upper_bound, p.lambda));
        }
    }
    Ok(())
}

fn ac8_fcurve() -> Outcome {
    let t = Instant::now();
    let cfg = FSolverConfig::default();
    let cap = box_capacity_at_density(3, cfg.panel_density, &cfg.bem).map_err(|e| e.to_string())?;
    let reference = brownian_capacity_with_error(&GridShape::unit_box(3, 1), &BemConfig { refine: 16, ..BemConfig::default() })
        .map_err(|e| e.to_string())?
        .value;
    let grid: Vec<f64> = [0.0, 0.3, 0.6, 0.9].iter().map(|f| f * cap).collect();
    let c8 = f_curve(&grid, 8, 3, 11, &cfg, None).map_err(|e| e.to_string())?;
    let c16 = f_curve(&grid, 16, 0, 11, &FSolverConfig { greedy_steps: 4, ..cfg }, Some(&c8)).map_err(|e| e.to_string())?;
    curve_checks(&c8, reference).map_err(|e| format!("M = 8: {e}"))?;
    curve_checks(&c16, reference).map_err(|e| format!("M = 16: {e}"))?;
    let rise = c8.iter().zip(&c16).map(|(a, b)| b.upper_bound - a.upper_bound).fold(f64::NEG_INFINITY, f64::max);
    let refined = c8.iter().zip(&c16).all(|(a, b)| b.upper_bound <= a.upper_bound + b.tolerance);
    let show = |c: &[FCurvePoint]| c.iter().map(|p| format!("{:.4}", p.upper_bound)).collect::<Vec<_>>().join(" ");
    ensure(
        refined,
        format!(
            "λ grid {:?}; M=8: {}; M=16: {}; largest rise {rise:.2e}; cap̃ {reference:.5}, tol {:.4}; {:.1}s",
            grid.iter().map(|l| format!("{l:.3}")).collect::<Vec<_>>(),
            show(&c8),
            show(&c16),
            c16[0].tolerance,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn ac9_relative_equilibrium() -> Outcome {
    let l = 3u64;
    let mut deltas = Vec::new();
    for k in [2u64, 4, 8] {
        let spacing = ((2 * k + 1) * l) as i64;
        let mut boxes = Vec::new();
        for i in -1..=1i64 {
            for j in -1..=1i64 {
                for m in -1..=1i64 {
                    boxes.push(LatticeBox::new(LatticePoint::from_slice(&[i * spacing, j * spacing, m * spacing]), l));
                }
            }
        }
        deltas.push(relative_equilibrium_check(&boxes).map_err(|e| e.to_string())?.delta_obs);
    }
    ensure(deltas.windows(2).all(|w| w[1] < w[0]), format!("δ_obs at K = 2, 4, 8 (27 boxes, L = 3): {deltas:.5?}"))
}

fn ac10_h_bound() -> Outcome {
    let window = LatticeBox::centered(3, 8);
    let part = PartitionConfig { k: 1, l_override: Some(2), ..PartitionConfig::default() };
    let (mut violations, mut with_type_two, mut worst) = (0, 0, 0.0f64);
    for seed in 0..100u64 {
        let s = sample(0.3, &window, 10_000 + seed).map_err(|e| e.to_string())?;
        let rep = census(&s, 0.5, 0.1, &part).map_err(|e| e.to_string())?;
        let h = h_functional(&s, &rep).map_err(|e| e.to_string())?;
        if !h.holds {
            violations += 1;
        }
        if !h.empty {
            with_type_two += 1;
            worst = worst.max(h.h / h.bound);
        }
    }
    ensure(
        violations == 0 && with_type_two > 0,
        format!("{violations} violations in 100 runs; {with_type_two} runs with Type-II boxes; largest H/bound {worst:.3}"),
    )
}

fn ac11_trend() -> Outcome {
    line(
        "    The limits of the capacity-deficiency and intersection large deviations and the super-exponential \
         bad-box bound are not reproducible at desk scale (probabilities decay like exp(−cN^{d−2})); \
         criteria 5–10 cover the identities and inequalities behind them, and the trend report below is qualitative.",
    );
    let t = Instant::now();
    let cap = reference_box_capacity(3).map_err(|e| e.to_string())?;
    let observed = ExperimentConfig { u: 0.5, samples: 100, seed: 11, n_list: vec![6, 10, 14], ..ExperimentConfig::default() };
    let rare = ExperimentConfig { lambda: Some(0.5 * cap / 3.0), samples: 50, n_list: vec![6, 10], ..observed.clone() };
    let mut records = capacity_deficiency_trend(&observed).map_err(|e| e.to_string())?;
    records.extend(capacity_deficiency_trend(&rare).map_err(|e| e.to_string())?);
    let rows: Vec<&ResultRecord> = records.iter().filter(|r| r.label != "summary").collect();
    let honest = rows.iter().all(|r| {
        let unobserved = r.note.starts_with("no events");
        !unobserved || (r.one_sided && r.std_error.is_none())
    });
    let one_sided = rows.iter().filter(|r| r.one_sided).count();
    let detail: Vec<String> = records.iter().map(|r| r.summary()).collect();
    ensure(
        honest && one_sided > 0,
        format!("{one_sided} one-sided rows; {:.1}s\n      {}", t.elapsed().as_secs_f64(), detail.join("\n      ")),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("AC1", "Green function: quadrature vs walks, harmonicity", ac1_green),
        ("AC2", "vacancy law", ac2_vacancy),
        ("AC3", "local-time Laplace transform", ac3_laplace),
        ("AC4", "mean local time", ac4_mean_local_time),
        ("AC5", "discrete to continuum capacity scaling", ac5_scaling),
        ("AC6", "continuum solver cross-validation", ac6_continuum),
        ("AC7", "intersection identity", ac7_intersection),
        ("AC8", "f-curve properties", ac8_fcurve),
        ("AC9", "relative equilibrium deviation trend", ac9_relative_equilibrium),
        ("AC10", "H bound over census sweep", ac10_h_bound),
        ("AC11", "non-reproducibility statement and deficiency trend", ac11_trend),
    ];
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => line(&format!("{id} PASS {title} ({secs:.1}s)\n      {d}")),
            Err(d) => {
                line(&format!("{id} FAIL {title} ({secs:.1}s)\n      {d}"));
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
