//! Flat `key = value` experiment configuration.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, LatticeSet, MAX_DIM};

/// Probe sets used by the local-time and vacancy checks, all containing the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// `{0}`.
    Origin,
    /// `{0, e₁}`.
    Pair,
    /// `{−e₁, 0, e₁}`.
    Line3,
    /// The 3×3 square in the first two coordinates.
    Square9,
    /// `B(0,1)`.
    Box1,
}

impl Probe {
    pub const ALL: [Probe; 5] = [Probe::Origin, Probe::Pair, Probe::Line3, Probe::Square9, Probe::Box1];

    pub fn name(&self) -> &'static str {
        match self {
            Probe::Origin => "origin",
            Probe::Pair => "pair",
            Probe::Line3 => "line3",
            Probe::Square9 => "square9",
            Probe::Box1 => "box1",
        }
    }

    /// Radius of the smallest centred box containing the probe.
    pub fn radius(&self) -> u64 {
        if *self == Probe::Origin { 0 } else { 1 }
    }

    pub fn set(&self, d: usize) -> Result<LatticeSet> {
        let o = LatticePoint::origin(d);
        let e1 = LatticePoint::unit(d, 0);
        let pts: Vec<LatticePoint> = match self {
            Probe::Origin => vec![o],
            Probe::Pair => vec![o, e1],
            Probe::Line3 => vec![o - e1, o, e1],
            Probe::Square9 => {
                let mut v = Vec::new();
                for i in -1..=1i64 {
                    for j in -1..=1i64 {
                        let mut p = o;
                        p.coords_mut()[0] = i;
                        p.coords_mut()[1] = j;
                        v.push(p);
                    }
                }
                v
            }
            Probe::Box1 => return Ok(crate::lattice::LatticeBox::centered(d, 1).to_set()),
        };
        LatticeSet::from_points(d, pts)
    }
}

impl FromStr for Probe {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Probe::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| {
            format!("unknown probe '{s}' (expected one of {})", Probe::ALL.map(|p| p.name()).join(", "))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Experiments run by the suite, in order.
    pub suite: Vec<String>,
    pub d: usize,
    /// Window radius.
    pub n: u64,
    pub u: f64,
    pub u1: f64,
    pub u2: f64,
    /// Laplace-transform argument.
    pub s: f64,
    /// Capacity threshold of the deficiency trend; `None` means `0.9·cap̃(B̃(0,1))/d`.
    pub lambda: Option<f64>,
    pub delta: f64,
    pub k: u64,
    /// Fixed box scale for the census.
    pub l: Option<u64>,
    pub rho: f64,
    /// Guard factor `γ`.
    pub gamma: f64,
    pub samples: u64,
    pub seed: u64,
    pub probe: Probe,
    /// Acceptance width in standard errors.
    pub se_factor: f64,
    /// Window radii of the deficiency trend.
    pub n_list: Vec<u64>,
    /// Grid resolution used for `f` bounds.
    pub resolution: u32,
    /// Annealing sweeps used for `f` bounds.
    pub budget: usize,
}

pub const DEFAULT_SUITE: [&str; 6] = ["laplace", "vacancy", "mean_local_time", "poisson_count", "truncation", "green_harmonicity"];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suite: DEFAULT_SUITE.iter().map(|s| s.to_string()).collect(),
            d: 3,
            n: 2,
            u: 1.0,
            u1: 0.25,
            u2: 0.25,
            s: -1.0,
            lambda: None,
            delta: 0.5,
            k: 1,
            l: Some(2),
            rho: 0.1,
            gamma: 4.0,
            samples: 10_000,
            seed: 1,
            probe: Probe::Line3,
            se_factor: 3.0,
            n_list: vec![6, 10, 14],
            resolution: 4,
            budget: 2,
        }
    }
}

fn parse<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("cannot parse '{v}': {e}"))
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}

fn parse_option<T: FromStr>(v: &str) -> std::result::Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    if v == "auto" || v == "none" { Ok(None) } else { parse(v).map(Some) }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config { line, message: format!("expected 'key = value', found '{body}'") })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config { line, message: format!("duplicate key '{key}'") });
            }
            cfg.set(key, value).map_err(|message| Error::Config { line, message })?;
        }
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter(message) => Error::Config { line: 0, message },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "suite" => self.suite = value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
            "d" => self.d = parse(value)?,
            "n" => self.n = parse(value)?,
            "u" => self.u = parse(value)?,
            "u1" => self.u1 = parse(value)?,
            "u2" => self.u2 = parse(value)?,
            "s" => self.s = parse(value)?,
            "lambda" => self.lambda = parse_option(value)?,
            "delta" => self.delta = parse(value)?,
            "k" => self.k = parse(value)?,
            "l" => self.l = parse_option(value)?,
            "rho" => self.rho = parse(value)?,
            "gamma" => self.gamma = parse(value)?,
            "samples" => self.samples = parse(value)?,
            "seed" => self.seed = parse(value)?,
            "probe" => self.probe = value.parse()?,
            "se_factor" => self.se_factor = parse(value)?,
            "n_list" => self.n_list = parse_list(value)?,
            "resolution" => self.resolution = parse(value)?,
            "budget" => self.budget = parse(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(3..=MAX_DIM).contains(&self.d) {
            return bad(format!("d = {} outside 3..={MAX_DIM}", self.d));
        }
        for (name, v) in [("u", self.u), ("u1", self.u1), ("u2", self.u2), ("rho", self.rho)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if !self.s.is_finite() {
            return bad(format!("s = {} not finite", self.s));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} outside (0,1)", self.delta));
        }
        if !(self.gamma >= 1.0) {
            return bad(format!("gamma = {} below 1", self.gamma));
        }
        if !(self.se_factor > 0.0) {
            return bad(format!("se_factor = {} not positive", self.se_factor));
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return bad(format!("lambda = {l} not positive"));
            }
        }
        if self.n_list.contains(&0) {
            return bad("n_list entries must be positive".into());
        }
        Ok(())
    }
}
