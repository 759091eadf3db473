use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use seqcert_core::certify::{EntropyBound, ProgramOptions, Target};
use seqcert_core::quantum::{honest_stats, ObservedStats, ScenarioParams};
use seqcert_core::sdp::SolveStatus;

use crate::commands::{compute, ensemble_for, parse_target};
use crate::config::{grid, Kind, Scenario, SweepFile};
use crate::{Failure, Outcome};

#[derive(Args)]
pub struct SweepArgs {
    /// JSON configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// First grid value (default rδ)
    #[arg(long)]
    q_min: Option<f64>,
    #[arg(long)]
    q_max: Option<f64>,
    #[arg(long)]
    q_step: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_target)]
    targets: Option<Vec<Target>>,
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<Kind>>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Plot description (default: the output path with `.plot.json`)
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Resolved sweep settings.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub scenario: ScenarioParams,
    pub q_grid: Vec<f64>,
    pub targets: Vec<Target>,
    pub kinds: Vec<Kind>,
    pub m_nodes: usize,
    pub output_path: PathBuf,
    pub plot_path: PathBuf,
}

const DEFAULT_STEP: f64 = 0.005;

impl SweepConfig {
    fn resolve(args: &SweepArgs) -> Result<Self, Failure> {
        let file = match &args.config {
            Some(path) => SweepFile::load(path)?,
            None => SweepFile::default(),
        };
        let usage = |msg: &str| Failure::Usage(anyhow!("{msg}"));
        let scenario = Scenario {
            delta: args.delta.or(file.scenario.map(|s| s.delta)).ok_or_else(|| usage("--delta is required"))?,
            r: args.r.or(file.scenario.map(|s| s.r)).ok_or_else(|| usage("--r is required"))?,
        };
        let params = ScenarioParams::new(scenario.delta, scenario.r)?;
        let x = params.x();
        let ranged = args.q_min.is_some() || args.q_max.is_some() || args.q_step.is_some();
        let q_grid = match (&file.q_grid, ranged) {
            (Some(g), false) => g.clone(),
            _ => {
                let step = args.q_step.or(file.q_step).unwrap_or(DEFAULT_STEP);
                if step <= 0.0 {
                    return Err(usage("--q-step must be positive"));
                }
                grid(args.q_min.or(file.q_min).unwrap_or(x), args.q_max.or(file.q_max).unwrap_or(1.0), step)
            }
        };
        if q_grid.is_empty() {
            return Err(usage("empty Q grid"));
        }
        if let Some(q) = q_grid.iter().find(|&&q| !(x - 1e-12..=1.0).contains(&q)) {
            return Err(usage(&format!("grid value {q} outside [rδ, 1] = [{x}, 1]")));
        }
        let targets = match (&args.targets, &file.targets) {
            (Some(t), _) => t.clone(),
            (None, Some(t)) => t.iter().map(|s| parse_target(s)).collect::<Result<_, _>>().map_err(|e| usage(&e))?,
            (None, None) => Target::ALL.to_vec(),
        };
        let kinds = args.kinds.clone().or(file.kinds).unwrap_or_else(|| vec![Kind::MinEntropy]);
        if targets.is_empty() || kinds.is_empty() {
            return Err(usage("targets and kinds must be nonempty"));
        }
        let output_path = args.output.clone().or(file.output_path).unwrap_or_else(|| PathBuf::from("sweep.csv"));
        let plot_path = args.plot.clone().or(file.plot_path).unwrap_or_else(|| output_path.with_extension("plot.json"));
        Ok(Self {
            scenario: params,
            q_grid,
            targets,
            kinds,
            m_nodes: args.m.or(file.m_nodes).unwrap_or(4),
            output_path,
            plot_path,
        })
    }

    /// CSV columns that this sweep fills.
    fn columns(&self) -> Vec<(Target, Kind, &'static str)> {
        COLUMNS
            .iter()
            .copied()
            .filter(|(t, k, _)| self.targets.contains(t) && self.kinds.contains(k))
            .collect()
    }
}

const COLUMNS: [(Target, Kind, &str); 7] = [
    (Target::Bob, Kind::MinEntropy, "hmin_bob"),
    (Target::CharlieTrusted, Kind::MinEntropy, "hmin_charlie_trusted"),
    (Target::Charlie, Kind::MinEntropy, "hmin_charlie"),
    (Target::Joint, Kind::MinEntropy, "hmin_joint"),
    (Target::Bob, Kind::Shannon, "h_bob"),
    (Target::Charlie, Kind::Shannon, "h_charlie"),
    (Target::Joint, Kind::Shannon, "h_joint"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum CellStatus {
    Ok,
    SolverFailure,
    CertificateFailure,
}

struct Cell {
    value: Option<f64>,
    margin: f64,
    status: CellStatus,
}

fn evaluate(cfg: &SweepConfig, q: f64, stats: &ObservedStats, target: Target, kind: Kind) -> Cell {
    let failed = |status| Cell { value: None, margin: f64::NAN, status };
    let bound: Result<EntropyBound, Failure> = ensemble_for(target, &cfg.scenario, Some(q))
        .and_then(|e| compute(target, kind, &e, stats, cfg.m_nodes, 0, &ProgramOptions::default()));
    match bound {
        // Honest statistics always admit a strategy.
        Ok(b) if b.status == SolveStatus::Infeasible => failed(CellStatus::SolverFailure),
        Ok(b) => Cell { value: Some(b.value_bits), margin: b.certificate.slack_margin, status: CellStatus::Ok },
        Err(Failure::Certificate(_)) => failed(CellStatus::CertificateFailure),
        Err(_) => failed(CellStatus::SolverFailure),
    }
}

fn workers() -> Result<Option<usize>, Failure> {
    match std::env::var("SEQCERT_WORKERS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(anyhow!("SEQCERT_WORKERS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

#[derive(Serialize)]
struct Axis {
    column: Option<&'static str>,
    label: String,
}

#[derive(Serialize)]
struct Series {
    column: &'static str,
    label: String,
    style: &'static str,
}

#[derive(Serialize)]
struct PlotSpec {
    data: String,
    title: String,
    x: Axis,
    y: Axis,
    series: Vec<Series>,
}

fn plot_spec(cfg: &SweepConfig, columns: &[(Target, Kind, &'static str)]) -> PlotSpec {
    let series = columns
        .iter()
        .map(|&(t, k, column)| Series {
            column,
            label: match k {
                Kind::MinEntropy => format!("H_min {}", t.name()),
                Kind::Shannon => format!("H {} (m = {})", t.name(), cfg.m_nodes),
            },
            style: if k == Kind::MinEntropy { "solid" } else { "dashed" },
        })
        .collect();
    let data = cfg.output_path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    PlotSpec {
        data,
        title: format!("Certified randomness, delta = {}, r = {}", cfg.scenario.delta, cfg.scenario.r),
        x: Axis { column: Some("Q"), label: "Bob's inconclusive rate Q".into() },
        y: Axis { column: None, label: "bits".into() },
        series,
    }
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| Failure::Usage(anyhow!("writing {}: {e}", path.display())))
}

pub fn run(args: &SweepArgs) -> Outcome {
    let cfg = SweepConfig::resolve(args)?;
    let columns = cfg.columns();
    let stats: Vec<ObservedStats> =
        cfg.q_grid.iter().map(|&q| honest_stats(&cfg.scenario, q)).collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, Target, Kind)> =
        (0..cfg.q_grid.len()).flat_map(|i| columns.iter().map(move |&(t, k, _)| (i, t, k))).collect();
    let run_jobs = || -> Vec<Cell> {
        jobs.par_iter().map(|&(i, t, k)| evaluate(&cfg, cfg.q_grid[i], &stats[i], t, k)).collect()
    };
    let cells = match workers()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::Usage(e.into()))?
            .install(run_jobs),
        None => run_jobs(),
    };

    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["Q", "C_B", "Q_C", "C_C"];
    header.extend(COLUMNS.iter().map(|c| c.2));
    header.extend(["margin", "status"]);
    out.write_record(&header).map_err(|e| Failure::Usage(e.into()))?;
    let mut worst = CellStatus::Ok;
    for (i, row) in cells.chunks(columns.len()).enumerate() {
        let s = &stats[i];
        let mut record = vec![
            format!("{:.6}", cfg.q_grid[i]),
            format!("{:.9}", s.conf_b),
            format!("{:.9}", s.inc_c),
            format!("{:.9}", s.conf_c),
        ];
        for &(t, k, _) in &COLUMNS {
            let cell = columns.iter().position(|c| c.0 == t && c.1 == k).map(|j| &row[j]);
            record.push(match cell {
                Some(Cell { value: Some(v), .. }) => format!("{v:.9}"),
                Some(_) => "NaN".into(),
                None => String::new(),
            });
        }
        let margin = row.iter().map(|c| c.margin).fold(f64::NEG_INFINITY, f64::max);
        let status = row.iter().map(|c| c.status).max().unwrap_or(CellStatus::Ok);
        worst = worst.max(status);
        record.push(format!("{margin:.3e}"));
        record.push(
            match status {
                CellStatus::Ok => "ok",
                CellStatus::SolverFailure => "solver-failure",
                CellStatus::CertificateFailure => "certificate-failure",
            }
            .into(),
        );
        out.write_record(&record).map_err(|e| Failure::Usage(e.into()))?;
    }
    let bytes = out.into_inner().map_err(|e| Failure::Usage(anyhow!("{e}")))?;
    write(&cfg.output_path, &bytes)?;
    write(&cfg.plot_path, serde_json::to_string_pretty(&plot_spec(&cfg, &columns))?.as_bytes())?;

    match worst {
        CellStatus::Ok => Ok(()),
        CellStatus::SolverFailure => Err(Failure::Solver(anyhow!("some grid points failed to solve"))),
        CellStatus::CertificateFailure => {
            Err(Failure::Certificate(anyhow!("some grid points have invalid certificates")))
        }
    }
}
