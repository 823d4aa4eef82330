//! Hitting probabilities `P_x[H_A < ∞]`.

use serde::{Deserialize, Serialize};

use super::equilibrium::{equilibrium_measure, EquilibriumMeasure, SolverConfig};
use super::GreenTable;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticePoint, LatticeSet};
use crate::linalg::conjugate_gradient;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HittingMethod {
    /// `Σ_y g(x,y) e_A(y)`.
    LastExit,
    /// Discrete Dirichlet problem on the window, with exterior data from the last-exit formula.
    WindowSolve,
}

/// `h(x) = P_x[H_target < ∞]` on a window.
#[derive(Clone, Debug)]
pub struct HittingField {
    pub window: LatticeBox,
    pub target: LatticeSet,
    values: Vec<f64>,
    confined: Option<Vec<f64>>,
}

impl HittingField {
    fn index(&self, x: &LatticePoint) -> Option<usize> {
        if !self.window.contains(x) {
            return None;
        }
        let side = self.window.side() as i64;
        let lo = self.window.lo();
        Some((0..x.dim()).fold(0i64, |acc, i| acc * side + (x.get(i) - lo.get(i))) as usize)
    }

    pub fn value(&self, x: &LatticePoint) -> Option<f64> {
        self.index(x).map(|i| self.values[i])
    }

    /// `P_x[H_target < T_window]`, available from the window solve.
    pub fn confined(&self, x: &LatticePoint) -> Option<f64> {
        let i = self.index(x)?;
        self.confined.as_ref().map(|c| c[i])
    }

    /// Largest violation of discrete harmonicity off the target, at points whose neighbours lie in the window.
    pub fn harmonicity_defect(&self) -> f64 {
        let d = self.window.dim();
        let inner = self.window.dilate(self.window.radius.saturating_sub(1));
        let mut worst = 0.0f64;
        for x in inner.to_set().iter() {
            if self.target.contains(&x) {
                continue;
            }
            let avg: f64 = x.neighbors().map(|y| self.value(&y).unwrap()).sum::<f64>() / (2 * d) as f64;
            worst = worst.max((avg - self.value(&x).unwrap()).abs());
        }
        worst
    }
}

/// `P_start[H_A < ∞]` by the last-exit formula.
pub fn hitting_probability(start: &LatticePoint, a: &LatticeSet, window: &LatticeBox) -> Result<f64> {
    if !a.within_box(window) || !window.contains(start) {
        return Err(Error::OutsideWindow);
    }
    if a.contains(start) {
        return Ok(1.0);
    }
    let green = GreenTable::shared(a.dim())?;
    let e = equilibrium_measure::<f64>(a, &green, &SolverConfig::default())?;
    Ok(e.potential(&green, start).clamp(0.0, 1.0))
}

/// Hitting field of `a` on `window` by either method.
pub fn hitting_field(
    a: &LatticeSet,
    window: &LatticeBox,
    method: HittingMethod,
    green: &GreenTable,
    cfg: &SolverConfig,
) -> Result<HittingField> {
    if a.is_empty() {
        return Err(Error::EmptySet);
    }
    if !a.within_box(window) {
        return Err(Error::OutsideWindow);
    }
    let e = equilibrium_measure::<f64>(a, green, cfg)?;
    let cells = window.to_set().to_vec();
    let last_exit = |x: &LatticePoint| if a.contains(x) { 1.0 } else { e.potential(green, x).clamp(0.0, 1.0) };
    match method {
        HittingMethod::LastExit => Ok(HittingField {
            window: *window,
            target: a.clone(),
            values: cells.iter().map(last_exit).collect(),
            confined: None,
        }),
        HittingMethod::WindowSolve => {
            let values = dirichlet_solve(a, window, &cells, |y| e.potential(green, y), cfg)?;
            let confined = dirichlet_solve(a, window, &cells, |_| 0.0, cfg)?;
            Ok(HittingField { window: *window, target: a.clone(), values, confined: Some(confined) })
        }
    }
}

/// Solves `h = P h` on `window \ a`, `h = 1` on `a`, `h = outside(y)` beyond the window.
fn dirichlet_solve(
    a: &LatticeSet,
    window: &LatticeBox,
    cells: &[LatticePoint],
    outside: impl Fn(&LatticePoint) -> f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let d = window.dim();
    let side = window.side() as usize;
    let lo = window.lo();
    let n = cells.len();
    let free: Vec<bool> = cells.iter().map(|x| !a.contains(x)).collect();
    let index = |x: &LatticePoint| -> usize {
        (0..d).fold(0usize, |acc, i| acc * side + (x.get(i) - lo.get(i)) as usize)
    };
    let neighbor_table: Vec<Vec<Option<usize>>> = cells
        .iter()
        .map(|x| x.neighbors().map(|y| if window.contains(&y) { Some(index(&y)) } else { None }).collect())
        .collect();
    let inv = 1.0 / (2 * d) as f64;
    // Right-hand side: contributions of fixed values (target and exterior) to free rows.
    let mut b = vec![0.0; n];
    for i in 0..n {
        if !free[i] {
            continue;
        }
        for (k, y) in cells[i].neighbors().enumerate() {
            b[i] += inv
                * match neighbor_table[i][k] {
                    Some(j) if !free[j] => 1.0,
                    Some(_) => 0.0,
                    None => outside(&y),
                };
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..n {
            if !free[i] {
                out[i] = x[i];
                continue;
            }
            let mut s = x[i];
            for j in neighbor_table[i].iter().flatten() {
                if free[*j] {
                    s -= inv * x[*j];
                }
            }
            out[i] = s;
        }
    };
    let (mut h, _) =
        conjugate_gradient(apply, |r: &[f64], z: &mut [f64]| z.copy_from_slice(r), &b, None, 1e-13, cfg.max_iterations * 10)?;
    for i in 0..n {
        if !free[i] {
            h[i] = 1.0;
        }
    }
    Ok(h)
}

/// Reuses a solved equilibrium measure for many starts.
pub fn hitting_from_measure(e: &EquilibriumMeasure<f64>, green: &GreenTable, x: &LatticePoint) -> f64 {
    if e.support().contains(x) {
        1.0
    } else {
        e.potential(green, x).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_formula() {
        let g = GreenTable::shared(3).unwrap();
        let a = LatticeSet::from_points(3, [LatticePoint::origin(3)]).unwrap();
        let w = LatticeBox::centered(3, 6);
        let x = LatticePoint::from_slice(&[2, 1, -3]);
        let p = hitting_probability(&x, &a, &w).unwrap();
        assert!((p - g.g(&x, &LatticePoint::origin(3)) / g.origin()).abs() < 1e-14);
        assert_eq!(hitting_probability(&LatticePoint::origin(3), &a, &w).unwrap(), 1.0);
    }

    #[test]
    fn window_solve_agrees_with_last_exit() {
        let g = GreenTable::shared(3).unwrap();
        let a = LatticeSet::from_points(
            3,
            [[0, 0, 0], [1, 0, 0], [1, 1, 0], [-2, 0, 1]].iter().map(|c| LatticePoint::from_slice(c)),
        )
        .unwrap();
        let w = LatticeBox::centered(3, 6);
        let cfg = SolverConfig::default();
        let le = hitting_field(&a, &w, HittingMethod::LastExit, &g, &cfg).unwrap();
        let ws = hitting_field(&a, &w, HittingMethod::WindowSolve, &g, &cfg).unwrap();
        for x in w.to_set().iter() {
            assert!((le.value(&x).unwrap() - ws.value(&x).unwrap()).abs() < 1e-4);
            assert!(ws.confined(&x).unwrap() <= ws.value(&x).unwrap() + 1e-12);
        }
        assert!(le.harmonicity_defect() < 1e-9);
    }
}
