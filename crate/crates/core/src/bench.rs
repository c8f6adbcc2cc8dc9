//! Timing both formulations side by side on instance suites.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use tep_milp::{solve_milp, MilpConfig, MilpError, ProblemStats, Solution, Status};

use crate::formulation::{FormulationConfig, FormulationError, FormulationKind, PrepareOptions, Prepared, TepModel};
use crate::instancegen::{fixture, generate, GenerationError, InstanceSpec};
use crate::netmodel::Network;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("bad spec matrix: {0}")]
    Matrix(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One benchmark instance: a named fixture or a generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BenchCase {
    Fixture { fixture: String },
    Spec(InstanceSpec),
}

impl BenchCase {
    pub fn name(&self) -> String {
        match self {
            BenchCase::Fixture { fixture } => fixture.clone(),
            BenchCase::Spec(s) => format!(
                "s{}-n{}-z{}-c{}-t{}",
                s.seed,
                s.n_buses,
                s.n_zones,
                s.n_candidates(),
                s.n_snapshots
            ),
        }
    }

    pub fn network(&self) -> Result<Network, BenchError> {
        match self {
            BenchCase::Fixture { fixture: f } => fixture(f).ok_or_else(|| BenchError::UnknownFixture(f.clone())),
            BenchCase::Spec(s) => Ok(generate(s)?),
        }
    }
}

/// Either an explicit case list or a base spec with axes whose Cartesian
/// product is expanded in key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecMatrix {
    List(Vec<BenchCase>),
    Grid {
        #[serde(default)]
        base: Option<InstanceSpec>,
        axes: BTreeMap<String, Vec<serde_json::Value>>,
    },
}

impl SpecMatrix {
    pub fn load(path: &Path) -> Result<SpecMatrix, BenchError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| BenchError::Matrix(e.to_string()))
    }

    pub fn cases(&self) -> Result<Vec<BenchCase>, BenchError> {
        match self {
            SpecMatrix::List(c) => Ok(c.clone()),
            SpecMatrix::Grid { base, axes } => {
                let base = serde_json::to_value(base.clone().unwrap_or_default()).expect("spec serializes");
                let mut out = vec![base];
                for (key, values) in axes {
                    if base_has_no(&out[0], key) {
                        return Err(BenchError::Matrix(format!("unknown axis `{key}`")));
                    }
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            values.iter().map(move |x| {
                                let mut v = v.clone();
                                v[key.as_str()] = x.clone();
                                v
                            })
                        })
                        .collect();
                }
                out.into_iter()
                    .map(|v| {
                        serde_json::from_value(v)
                            .map(BenchCase::Spec)
                            .map_err(|e| BenchError::Matrix(e.to_string()))
                    })
                    .collect()
            }
        }
    }
}

fn base_has_no(v: &serde_json::Value, key: &str) -> bool {
    v.get(key).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchConfig {
    pub mip_gap: f64,
    pub time_limit: Option<f64>,
    /// Timed runs after the discarded warm-up run.
    pub repeats: usize,
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            mip_gap: 0.005,
            time_limit: None,
            repeats: 3,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub status: Status,
    pub objective_upper: f64,
    pub objective_lower: f64,
    pub nodes: usize,
    pub stats: ProblemStats,
    /// Median seconds.
    pub build_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub buses: usize,
    pub lines: usize,
    pub candidates: usize,
    pub snapshots: usize,
    pub angle: Option<RunResult>,
    pub cycle: Option<RunResult>,
}

impl BenchRow {
    /// `t_angle / t_cycle`, when both solved.
    pub fn speedup(&self) -> Option<f64> {
        match (&self.angle, &self.cycle) {
            (Some(a), Some(c)) if c.solve_seconds > 0.0 => Some(a.solve_seconds / c.solve_seconds),
            _ => None,
        }
    }

    pub fn constraint_ratio(&self) -> Option<f64> {
        self.ratio(|s| s.rows)
    }

    pub fn variable_ratio(&self) -> Option<f64> {
        self.ratio(|s| s.columns)
    }

    pub fn nonzero_ratio(&self) -> Option<f64> {
        self.ratio(|s| s.nonzeros)
    }

    fn ratio(&self, f: impl Fn(&ProblemStats) -> usize) -> Option<f64> {
        let (a, c) = (self.angle.as_ref()?, self.cycle.as_ref()?);
        Some(f(&c.stats) as f64 / f(&a.stats) as f64)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Option<Summary> {
        if xs.is_empty() {
            return None;
        }
        Some(Summary {
            count: xs.len(),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
            median: median(xs),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

fn milp_config(cfg: &BenchConfig) -> MilpConfig {
    MilpConfig {
        mip_gap: cfg.mip_gap,
        time_limit: cfg.time_limit,
        ..MilpConfig::default()
    }
}

/// Builds and solves `1 + repeats` times, discarding the first run.
pub fn time_model(
    build: impl Fn() -> Result<TepModel, FormulationError>,
    cfg: &BenchConfig,
) -> Result<RunResult, BenchError> {
    let mcfg = milp_config(cfg);
    let mut builds = Vec::new();
    let mut solves = Vec::new();
    let mut last: Option<(TepModel, Solution)> = None;
    for run in 0..=cfg.repeats.max(1) {
        let t = Instant::now();
        let model = build()?;
        let tb = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let sol = solve_milp(&model.problem, &mcfg)?;
        let ts = t.elapsed().as_secs_f64();
        if run > 0 {
            builds.push(tb);
            solves.push(ts);
        }
        last = Some((model, sol));
    }
    let (model, sol) = last.expect("at least one run");
    Ok(RunResult {
        status: sol.status,
        objective_upper: sol.objective_upper,
        objective_lower: sol.objective_lower,
        nodes: sol.node_count,
        stats: model.stats(),
        build_seconds: median(&builds),
        solve_seconds: median(&solves),
    })
}

pub fn run_case(case: &BenchCase, cfg: &BenchConfig) -> Result<BenchRow, BenchError> {
    let net = case.network()?;
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let mut row = BenchRow {
        instance: case.name(),
        buses: net.n_buses(),
        lines: net.lines().len(),
        candidates: net.n_candidates(),
        snapshots: net.n_snapshots(),
        angle: None,
        cycle: None,
    };
    for kind in [FormulationKind::Angle, FormulationKind::Cycle] {
        let mut fcfg = FormulationConfig::new(kind);
        fcfg.mip_gap = cfg.mip_gap;
        let result = match time_model(|| prep.build(&net, &fcfg), cfg) {
            Ok(r) => Some(r),
            Err(BenchError::Formulation(FormulationError::AngleUnsupported(_))) => None,
            Err(e) => return Err(e),
        };
        match kind {
            FormulationKind::Angle => row.angle = result,
            FormulationKind::Cycle => row.cycle = result,
        }
    }
    Ok(row)
}

/// Same model timed as both sides of a race; its speed-up estimates the
/// timing noise.
pub fn control_race(net: &Network, kind: FormulationKind, cfg: &BenchConfig) -> Result<BenchRow, BenchError> {
    let prep = Prepared::new(net, &PrepareOptions::default());
    let fcfg = FormulationConfig::new(kind);
    let first = time_model(|| prep.build(net, &fcfg), cfg)?;
    let second = time_model(|| prep.build(net, &fcfg), cfg)?;
    Ok(BenchRow {
        instance: format!("control-{kind}"),
        buses: net.n_buses(),
        lines: net.lines().len(),
        candidates: net.n_candidates(),
        snapshots: net.n_snapshots(),
        angle: Some(first),
        cycle: Some(second),
    })
}

pub const CSV_HEADER: [&str; 27] = [
    "instance",
    "buses",
    "lines",
    "candidates",
    "snapshots",
    "angle_status",
    "angle_upper",
    "angle_lower",
    "angle_nodes",
    "angle_rows",
    "angle_columns",
    "angle_nonzeros",
    "cycle_status",
    "cycle_upper",
    "cycle_lower",
    "cycle_nodes",
    "cycle_rows",
    "cycle_columns",
    "cycle_nonzeros",
    "constraint_ratio",
    "variable_ratio",
    "nonzero_ratio",
    "angle_build_s",
    "angle_solve_s",
    "cycle_build_s",
    "cycle_solve_s",
    "speedup",
];

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn status_str(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn csv_record(row: &BenchRow) -> Vec<String> {
    let run = |r: &Option<RunResult>| -> Vec<String> {
        match r {
            None => vec!["unsupported".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new()],
            Some(r) => vec![
                status_str(r.status),
                num(Some(r.objective_upper)),
                num(Some(r.objective_lower)),
                r.nodes.to_string(),
                r.stats.rows.to_string(),
                r.stats.columns.to_string(),
                r.stats.nonzeros.to_string(),
            ],
        }
    };
    let mut rec = vec![
        row.instance.clone(),
        row.buses.to_string(),
        row.lines.to_string(),
        row.candidates.to_string(),
        row.snapshots.to_string(),
    ];
    rec.extend(run(&row.angle));
    rec.extend(run(&row.cycle));
    rec.push(num(row.constraint_ratio()));
    rec.push(num(row.variable_ratio()));
    rec.push(num(row.nonzero_ratio()));
    rec.push(num(row.angle.as_ref().map(|r| r.build_seconds)));
    rec.push(num(row.angle.as_ref().map(|r| r.solve_seconds)));
    rec.push(num(row.cycle.as_ref().map(|r| r.build_seconds)));
    rec.push(num(row.cycle.as_ref().map(|r| r.solve_seconds)));
    rec.push(num(row.speedup()));
    rec
}

/// Summary records over the instances where both formulations solved:
/// `mean`, `median`, `max` and `min` of speed-up and size ratios.
pub fn summary_records(rows: &[BenchRow]) -> Vec<Vec<String>> {
    let col = |f: &dyn Fn(&BenchRow) -> Option<f64>| rows.iter().filter_map(f).collect::<Vec<f64>>();
    let speed = Summary::of(&col(&|r| r.speedup()));
    let cons = Summary::of(&col(&|r| r.constraint_ratio()));
    let vars = Summary::of(&col(&|r| r.variable_ratio()));
    let nnz = Summary::of(&col(&|r| r.nonzero_ratio()));
    let pick = |s: Option<Summary>, i: usize| {
        s.map(|s| [s.mean, s.median, s.max, s.min][i])
    };
    ["mean", "median", "max", "min"]
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let mut rec = vec![String::new(); CSV_HEADER.len()];
            rec[0] = (*label).to_string();
            rec[19] = num(pick(cons, i));
            rec[20] = num(pick(vars, i));
            rec[21] = num(pick(nnz, i));
            rec[26] = num(pick(speed, i));
            rec
        })
        .collect()
}

/// Runs every case and streams one CSV row per instance, flushing after
/// each batch of `jobs` cases so an interrupted run keeps what finished.
/// Errors of single cases are logged and the case is skipped.
pub fn run_benchmark(cases: &[BenchCase], cfg: &BenchConfig, out: &mut dyn Write) -> Result<Vec<BenchRow>, BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    w.flush()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .expect("thread pool");
    let mut rows = Vec::new();
    for chunk in cases.chunks(cfg.jobs.max(1)) {
        let results: Vec<Result<BenchRow, BenchError>> = pool.install(|| chunk.par_iter().map(|c| run_case(c, cfg)).collect());
        for (case, r) in chunk.iter().zip(results) {
            match r {
                Ok(row) => {
                    w.write_record(csv_record(&row))?;
                    rows.push(row);
                }
                Err(e) => log::error!("{}: {e}", case.name()),
            }
        }
        w.flush()?;
    }
    for rec in summary_records(&rows) {
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(rows)
}
