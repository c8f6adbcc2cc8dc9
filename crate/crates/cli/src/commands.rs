use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;
use tep_core::bench::{run_benchmark, BenchCase, BenchConfig, SpecMatrix};
use tep_core::bigm::{BigMKind, BigMSet};
use tep_core::formulation::{FormulationConfig, FormulationKind, PrepareOptions, Prepared};
use tep_core::graph::dump_graph;
use tep_core::instancegen::{desk_suite, fixture, generate, InstanceSpec};
use tep_core::netmodel::{load_network, write_network_csv, write_network_json, Network};
use tep_core::postproc::{verify_solution, FlowReport, SolutionPoint, Violation, VerifyTolerances};
use tep_core::verify::{bigm_keys, bounds_overlap, negative_control, run_oracle, ControlOutcome, OracleConfig, OracleReport};
use tep_milp::{lpfile, mps, solve_milp, MilpConfig, ProblemStats, Status, Timings, Tolerances};

use crate::exit::{CliError, Code};
use crate::{
    BenchmarkArgs, BigmReportArgs, Cli, Command, ExportArgs, ExportFormat, FormulationChoice, GenerateArgs, ModelArgs,
    NetFormat, SingleFormulation, SolveArgs, VerifyArgs,
};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(cli, a),
        Command::Solve(a) => cmd_solve(a),
        Command::Export(a) => cmd_export(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Benchmark(a) => cmd_benchmark(cli, a),
        Command::BigmReport(a) => cmd_bigm_report(a),
    }
}

fn load(spec: &str) -> Result<Network, CliError> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixture(name).ok_or_else(|| CliError::new(Code::Input, format!("unknown fixture `{name}`")));
    }
    Ok(load_network(Path::new(spec))?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn parse_kind(s: &str) -> Option<BigMKind> {
    [BigMKind::KvlAngle, BigMKind::Slack, BigMKind::KvlCycle]
        .into_iter()
        .find(|k| k.prefix() == s)
}

/// Big-M values after `--bigm-scale` and every `--bigm-override`.
fn adjusted_bigm(prep: &Prepared, args: &ModelArgs) -> Result<BigMSet, CliError> {
    let mut bigm = if args.bigm_scale == 1.0 {
        prep.bigm.clone()
    } else {
        prep.bigm.scaled(args.bigm_scale)
    };
    for spec in &args.bigm_override {
        let bad = || CliError::new(Code::Input, format!("bad override `{spec}`, expected kind:key=value"));
        let (lhs, value) = spec.split_once('=').ok_or_else(bad)?;
        let (kind, key) = lhs.split_once(':').ok_or_else(bad)?;
        let kind = parse_kind(kind).ok_or_else(bad)?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        if !bigm.set(kind, key, value) {
            return Err(CliError::new(Code::Input, format!("no {} big-M for `{key}`", kind.prefix())));
        }
    }
    Ok(bigm)
}

fn formulation_config(kind: FormulationKind, args: &ModelArgs, mip_gap: f64) -> FormulationConfig {
    let mut cfg = FormulationConfig::new(kind);
    cfg.include_co2 = !args.no_co2;
    cfg.mip_gap = mip_gap;
    cfg
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> Result<(), CliError> {
    let net = match &a.fixture {
        Some(name) => load(&format!("fixture:{name}"))?,
        None => generate(&InstanceSpec {
            seed: cli.seed,
            n_buses: a.buses,
            mesh_degree: a.mesh_degree,
            n_zones: a.zones,
            candidates_per_corridor: a.per_corridor,
            candidate_corridors: a.corridors,
            n_snapshots: a.snapshots,
            renewable_share: a.renewable_share,
            co2_budget_fraction: a.co2_fraction,
            zone_cycle: a.zone_cycle,
        })?,
    };
    match a.format {
        NetFormat::Csv => write_network_csv(&net, &a.out)?,
        NetFormat::Json => write_network_json(&net, &a.out)?,
    }
    info!(
        "wrote {} buses, {} lines ({} candidates) to {}",
        net.n_buses(),
        net.lines().len(),
        net.n_candidates(),
        a.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct FormulationResult {
    formulation: FormulationKind,
    status: Status,
    objective_upper: f64,
    objective_lower: f64,
    gap: f64,
    node_count: usize,
    simplex_iterations: usize,
    stats: ProblemStats,
    built: Vec<String>,
    report: Option<FlowReport>,
    violations: Vec<Violation>,
    timings: Timings,
}

#[derive(Debug, Serialize)]
struct CrossCheck {
    angle: (f64, f64),
    cycle: (f64, f64),
    passed: bool,
}

#[derive(Debug, Serialize)]
struct SolveOutput {
    network: String,
    results: Vec<FormulationResult>,
    skipped: Vec<(FormulationKind, String)>,
    cross_check: Option<CrossCheck>,
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let net = load(&a.model.network)?;
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let bigm = adjusted_bigm(&prep, &a.model)?;
    if let Some(path) = &a.dump_graph {
        let cycles: Vec<_> = prep.candidate_cycles.as_deref().unwrap_or(&[]).iter().collect();
        std::fs::write(path, dump_graph(&net, &prep.zones, &prep.subnetwork, &cycles))?;
    }
    let kinds: &[FormulationKind] = match a.formulation {
        FormulationChoice::Angle => &[FormulationKind::Angle],
        FormulationChoice::Cycle => &[FormulationKind::Cycle],
        FormulationChoice::Both => &[FormulationKind::Angle, FormulationKind::Cycle],
    };
    let milp_cfg = MilpConfig {
        mip_gap: a.mip_gap,
        time_limit: a.time_limit,
        node_limit: a.node_limit,
        tolerances: Tolerances::default(),
    };

    let mut out = SolveOutput {
        network: a.model.network.clone(),
        results: Vec::new(),
        skipped: Vec::new(),
        cross_check: None,
    };
    let mut failure: Option<CliError> = None;
    for &kind in kinds {
        let model = match prep.build_with(&net, &formulation_config(kind, &a.model, a.mip_gap), &bigm) {
            Ok(m) => m,
            Err(e) => {
                let e = CliError::from(e);
                if kinds.len() == 1 || e.code != Code::AngleUnsupported {
                    return Err(e);
                }
                warn!("{e}");
                out.skipped.push((kind, e.message.clone()));
                failure.get_or_insert(e);
                continue;
            }
        };
        let sol = solve_milp(&model.problem, &milp_cfg)?;
        info!("{kind}: {:?} after {} nodes", sol.status, sol.node_count);
        let mut result = FormulationResult {
            formulation: kind,
            status: sol.status,
            objective_upper: sol.objective_upper,
            objective_lower: sol.objective_lower,
            gap: sol.gap(),
            node_count: sol.node_count,
            simplex_iterations: sol.simplex_iterations,
            stats: model.stats(),
            built: Vec::new(),
            report: None,
            violations: Vec::new(),
            timings: Timings {
                build_seconds: model.build_seconds,
                solve_seconds: sol.timings.solve_seconds,
            },
        };
        if sol.has_point() {
            let point = SolutionPoint::from_model(&net, &model, &sol)
                .map_err(|e| CliError::new(Code::Generic, e.to_string()))?;
            result.built = point.built_ids(&net).into_iter().map(String::from).collect();
            match verify_solution(&net, &point, &VerifyTolerances::default()) {
                Ok(report) => result.report = Some(report),
                Err(failed) => {
                    failure.get_or_insert(CliError::new(Code::Verification, format!("{kind}: {failed}")));
                    result.violations = failed.violations;
                    result.report = Some(*failed.report);
                }
            }
            if a.table {
                if let Some(r) = &result.report {
                    eprint!("{}", r.table());
                }
            }
        } else if matches!(sol.status, Status::Infeasible | Status::Unbounded) {
            failure.get_or_insert(CliError::new(Code::NoSolution, format!("{kind}: {:?}", sol.status)));
        }
        out.results.push(result);
    }

    if let [ra, rc] = out.results.as_slice() {
        let angle = (ra.objective_upper, ra.objective_lower);
        let cycle = (rc.objective_upper, rc.objective_lower);
        let passed = bounds_overlap(angle, cycle, 1e-6);
        if !passed {
            failure.get_or_insert(CliError::new(Code::Verification, "bounds of the two formulations do not overlap"));
        }
        out.cross_check = Some(CrossCheck { angle, cycle, passed });
    }
    emit(&a.out, &to_json(&out))?;
    failure.map_or(Ok(()), Err)
}

fn cmd_export(a: &ExportArgs) -> Result<(), CliError> {
    let net = load(&a.model.network)?;
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let bigm = adjusted_bigm(&prep, &a.model)?;
    let kind = match a.formulation {
        SingleFormulation::Angle => FormulationKind::Angle,
        SingleFormulation::Cycle => FormulationKind::Cycle,
    };
    let model = prep.build_with(&net, &formulation_config(kind, &a.model, 0.0), &bigm)?;
    let text = match a.format {
        ExportFormat::Lp => lpfile::to_lp_string(&model.problem),
        ExportFormat::Mps => mps::to_mps_string(&model.problem),
    };
    emit(&a.out, &text)
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    network: String,
    report: OracleReport,
    negative_control: Option<Vec<ControlOutcome>>,
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let net = load(&a.model.network)?;
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let bigm = adjusted_bigm(&prep, &a.model)?;
    let cfg = OracleConfig {
        max_binaries: a.max_binaries,
        ..Default::default()
    };
    let report = run_oracle(&net, &prep, &bigm, &cfg)?;
    let controls = if a.negative_control {
        let out = negative_control(&net, &prep, &cfg)?;
        for c in out.iter().filter(|c| !c.detected) {
            warn!("halving {}:{} is not detected", c.kind.prefix(), c.key);
        }
        Some(out)
    } else {
        None
    };
    let passed = report.passed();
    for v in &report.violations {
        warn!("{v}");
    }
    emit(
        &a.out,
        &to_json(&VerifyOutput {
            network: a.model.network.clone(),
            report,
            negative_control: controls,
        }),
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::new(Code::Verification, "oracle found violations"))
    }
}

fn cmd_benchmark(cli: &Cli, a: &BenchmarkArgs) -> Result<(), CliError> {
    let cases = match (&a.matrix, a.suite) {
        (Some(path), _) => SpecMatrix::load(path)?.cases()?,
        (None, Some(n)) => desk_suite(n, cli.seed).into_iter().map(BenchCase::Spec).collect(),
        (None, None) => return Err(CliError::new(Code::Input, "give a spec matrix or --suite")),
    };
    let cfg = BenchConfig {
        mip_gap: a.mip_gap,
        time_limit: a.time_limit,
        repeats: a.repeats.max(1),
        jobs: cli.jobs.max(1),
    };
    let rows = match &a.out {
        Some(path) => run_benchmark(&cases, &cfg, &mut File::create(path)?)?,
        None => run_benchmark(&cases, &cfg, &mut std::io::stdout().lock())?,
    };
    info!("{} of {} cases finished", rows.len(), cases.len());
    Ok(())
}

fn cmd_bigm_report(a: &BigmReportArgs) -> Result<(), CliError> {
    let net = load(&a.model.network)?;
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let bigm = adjusted_bigm(&prep, &a.model)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "key", "rule", "value", "members", "terms"])?;
    for (kind, key) in bigm_keys(&bigm) {
        let prov = bigm.provenance.get(&format!("{}:{key}", kind.prefix()));
        let rule = prov
            .and_then(|p| serde_json::to_value(p.rule).ok())
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let members = prov.map(|p| p.members.join(";")).unwrap_or_default();
        let terms = prov
            .map(|p| p.terms.iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(";"))
            .unwrap_or_default();
        let value = bigm.map(kind)[&key].to_string();
        w.write_record([kind.prefix(), key.as_str(), rule.as_str(), value.as_str(), members.as_str(), terms.as_str()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::new(Code::Generic, e.to_string()))?;
    emit(&a.out, &String::from_utf8_lossy(&bytes))
}
