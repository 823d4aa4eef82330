use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use interlace::coarse::{census, h_functional};
use interlace::continuum::{collection_compare, discrete_continuum_compare, BemConfig};
use interlace::fsolver::{box_capacity_at_density, f_curve, FSolverConfig};
use interlace::harness::{run_suite, sample_seed, write_records, ExperimentConfig, Format};
use interlace::interlacement::sample;
use interlace::lattice::PartitionConfig;
use interlace::potential::{equilibrium_measure, GreenTable, SolverConfig};
use interlace::{Error, GridShape, LatticeBox, LatticePoint, LatticeSet};
use serde_json::json;

#[derive(Parser)]
#[command(name = "interlace", version, about = "Random interlacements and capacity tools")]
struct Cli {
    #[arg(long, global = true, default_value_t = 3)]
    dim: usize,
    /// Experiment config file (flat key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "jsonl")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity and equilibrium measure of a lattice set.
    Capacity {
        /// File with one point per line, coordinates separated by spaces or commas.
        #[arg(long, conflicts_with = "radius")]
        set: Option<PathBuf>,
        /// Use the box B(0, radius).
        #[arg(long)]
        radius: Option<u64>,
    },
    /// Samples of the interlacement trace in B(0, radius), one JSON object per line.
    Simulate {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        radius: u64,
    },
    /// Box census of one sample, one JSON object per box, followed by the H report.
    Classify {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        radius: u64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        k: u64,
        #[arg(long)]
        l: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
    },
    /// Upper bounds for the constrained capacity functional on a uniform grid of λ.
    Fcurve {
        #[arg(long, default_value_t = 8)]
        resolution: u32,
        /// Grid points on [0, cap).
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Annealing sweeps per point.
        #[arg(long, default_value_t = 3)]
        budget: usize,
    },
    /// Runs the verification suite of the config file (default suite without one).
    Verify,
    /// Discrete against continuum capacities: unit box blow-ups and separated box collections.
    CompareCaps {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        n_list: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        k_list: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "3,6,12")]
        l_list: Vec<u64>,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Check,
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Config { .. } | Error::InvalidParameter(_) | Error::Parse(_)) => Failure::Usage(e),
            _ => Failure::Runtime(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_points(path: &Path, dim: usize) -> anyhow::Result<LatticeSet> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut pts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let coords = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        if coords.len() != dim {
            return Err(Error::Parse(format!("line {}: expected {dim} coordinates, found {}", i + 1, coords.len())).into());
        }
        pts.push(LatticePoint::new(&coords)?);
    }
    Ok(LatticeSet::from_points(dim, pts)?)
}

fn experiment_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig { d: cli.dim, ..ExperimentConfig::default() },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let d = cli.dim;
    let seed = cli.seed.unwrap_or(1);
    match &cli.command {
        Command::Capacity { set, radius } => {
            let a = match (set, radius) {
                (Some(p), _) => read_points(p, d)?,
                (None, Some(r)) => LatticeBox::centered(d, *r).to_set(),
                (None, None) => return Err(Failure::Usage(anyhow::anyhow!("capacity needs --set or --radius"))),
            };
            let green = GreenTable::shared(d)?;
            let e = equilibrium_measure::<f64>(&a, &green, &SolverConfig::default())?;
            let measure: Vec<_> = e.iter().map(|(p, m)| json!({ "point": p.coords(), "mass": m })).collect();
            let mut out = output(&cli.out)?;
            let doc = json!({ "capacity": e.total(), "residual": e.residual(), "points": a.len(), "measure": measure });
            writeln!(out, "{doc}").map_err(anyhow::Error::from)?;
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Simulate { u, radius } => {
            let window = LatticeBox::centered(d, *radius);
            let mut out = output(&cli.out)?;
            for i in 0..cli.samples.unwrap_or(1) {
                let s = sample(*u, &window, sample_seed(seed, 0, i))?;
                writeln!(out, "{}", s.to_json()?).map_err(anyhow::Error::from)?;
            }
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Classify { u, radius, delta, k, l, rho } => {
            let window = LatticeBox::centered(d, *radius);
            let s = sample(*u, &window, seed)?;
            let part = PartitionConfig { k: *k, l_override: *l, ..PartitionConfig::default() };
            let rep = census(&s, *delta, *rho, &part)?;
            let h = h_functional(&s, &rep)?;
            let mut out = output(&cli.out)?;
            write!(out, "{}", rep.to_jsonl()?).map_err(anyhow::Error::from)?;
            writeln!(out, "{}", json!({ "bad_count": rep.bad_count, "event_a": rep.event_a, "h_report": h }))
                .map_err(anyhow::Error::from)?;
            out.flush().map_err(anyhow::Error::from)?;
            if !h.holds {
                return Err(Failure::Check);
            }
        }
        Command::Fcurve { resolution, points, budget } => {
            let cfg = FSolverConfig { dim: d, ..FSolverConfig::default() };
            let cap = box_capacity_at_density(d, cfg.panel_density, &cfg.bem)?;
            let grid: Vec<f64> = (0..*points).map(|i| cap * i as f64 / *points as f64).collect();
            let curve = f_curve(&grid, *resolution, *budget, seed, &cfg, None)?;
            let mut out = output(&cli.out)?;
            for p in &curve {
                writeln!(out, "{}", serde_json::to_string(p).map_err(anyhow::Error::from)?).map_err(anyhow::Error::from)?;
            }
            out.flush().map_err(anyhow::Error::from)?;
        }
        Command::Verify => {
            let cfg = experiment_config(cli)?;
            let outcome = run_suite(&cfg)?;
            for r in &outcome.records {
                eprintln!("{}", r.summary());
            }
            write_records(&outcome.records, cli.format, output(&cli.out)?)?;
            if outcome.exit_code() != 0 {
                return Err(Failure::Check);
            }
        }
        Command::CompareCaps { n_list, k_list, l_list } => {
            let bem = BemConfig { refine: 16, ..BemConfig::default() };
            let solver = SolverConfig::default();
            let scaling = discrete_continuum_compare(&GridShape::unit_box(d, 1), n_list, &bem, &solver)?;
            let mut out = output(&cli.out)?;
            writeln!(out, "{}", json!({ "report": "scaling", "data": scaling })).map_err(anyhow::Error::from)?;
            let sites: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| if j == i { 1 } else { 0 }).collect()).chain([vec![0; d]]).collect();
            for k in k_list {
                let rep = collection_compare(d, &sites, *k, l_list, 8, &bem, &solver)?;
                writeln!(out, "{}", json!({ "report": "collection", "data": rep })).map_err(anyhow::Error::from)?;
            }
            out.flush().map_err(anyhow::Error::from)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
