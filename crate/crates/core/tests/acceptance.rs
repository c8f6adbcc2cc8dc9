//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use tep_core::bench::{control_race, run_benchmark, BenchCase, BenchConfig};
use tep_core::formulation::{FormulationConfig, FormulationError, FormulationKind, PrepareOptions, Prepared};
use tep_core::graph::rank::exact_rank;
use tep_core::graph::{
    candidate_cycles_inter, candidate_cycles_intra, cycle_basis, slack_relaxation_plan, CycleSpec, SlackStrategy,
    SubnetworkGraph, DEFAULT_CYCLE_CAP,
};
use tep_core::instancegen::{desk_suite, fixture, generate, InstanceSpec, FIXTURE_NAMES};
use tep_core::netmodel::{synchronous_zones, Network};
use tep_core::verify::{negative_control, run_oracle, OracleConfig, OracleReport, OracleViolation};
use tep_milp::lpfile::{parse_lp, to_lp_string};
use tep_milp::{solve_milp, MilpConfig, Status};

const SUITE_SEED: u64 = 20_240_101;
const SUITE_SIZE: usize = 260;
const MIN_BOTH: usize = 200;
const EQUIV_TOL: f64 = 1e-6;
const SLACK_TOL: f64 = 1e-6;
const ROUNDTRIP_TOL: f64 = 1e-9;
const CONTROL_BAND: (f64, f64) = (0.5, 2.0);
const SUITE_BUDGET: Duration = Duration::from_secs(300);
const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(60);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

struct SuiteRun {
    name: String,
    report: OracleReport,
}

fn suite_networks() -> Vec<(String, Network)> {
    let mut nets: Vec<(String, Network)> = FIXTURE_NAMES.iter().map(|n| (n.to_string(), fixture(n).unwrap())).collect();
    for (i, spec) in desk_suite(SUITE_SIZE, SUITE_SEED).iter().enumerate() {
        nets.push((format!("gen{i:03}"), generate(spec).expect("suite instance")));
    }
    nets
}

fn run_suite(nets: &[(String, Network)]) -> Result<Vec<SuiteRun>, String> {
    let cfg = OracleConfig::default();
    let mut runs = Vec::new();
    for (name, net) in nets {
        let prep = Prepared::new(net, &PrepareOptions::default());
        let report = run_oracle(net, &prep, &prep.bigm, &cfg).map_err(|e| format!("{name}: {e}"))?;
        runs.push(SuiteRun {
            name: name.clone(),
            report,
        });
    }
    Ok(runs)
}

fn first_violation(runs: &[SuiteRun], pick: impl Fn(&OracleViolation) -> bool) -> Option<String> {
    runs.iter()
        .find_map(|r| r.report.violations.iter().find(|v| pick(v)).map(|v| format!("{}: {v}", r.name)))
}

fn criterion_1(runs: &[SuiteRun], elapsed: Duration) -> Outcome {
    let both: Vec<&SuiteRun> = runs.iter().filter(|r| r.report.formulations.len() == 2).collect();
    let mut worst = 0.0f64;
    for r in &both {
        let a = r.report.get(FormulationKind::Angle).unwrap().best_objective;
        let c = r.report.get(FormulationKind::Cycle).unwrap().best_objective;
        if let (Some(a), Some(c)) = (a, c) {
            worst = worst.max((a - c).abs() / a.abs().max(c.abs()).max(1.0));
        }
    }
    let bad = first_violation(runs, |v| {
        matches!(
            v,
            OracleViolation::Equivalence { .. } | OracleViolation::CrossBound { .. } | OracleViolation::BranchAndBound { .. }
        )
    });
    let ok = both.len() >= MIN_BOTH && bad.is_none() && worst <= EQUIV_TOL && elapsed < SUITE_BUDGET;
    outcome(
        ok,
        format!(
            "{} instances with both formulations, max rel diff {worst:.2e}, suite time {:.1}s{}",
            both.len(),
            elapsed.as_secs_f64(),
            bad.map(|b| format!(", {b}")).unwrap_or_default()
        ),
    )
}

fn criterion_2(runs: &[SuiteRun]) -> Outcome {
    let assignments: usize = runs.iter().flat_map(|r| &r.report.formulations).map(|f| f.assignments).sum();
    let min_slack = runs
        .iter()
        .flat_map(|r| &r.report.formulations)
        .map(|f| f.min_gated_slack)
        .fold(f64::INFINITY, f64::min);
    let max_diff = runs
        .iter()
        .flat_map(|r| &r.report.formulations)
        .map(|f| f.max_removal_diff)
        .fold(0.0, f64::max);
    let bad = first_violation(runs, |v| {
        matches!(v, OracleViolation::BindingRow { .. } | OracleViolation::RemovalMismatch { .. })
    });

    let cfg = OracleConfig::default();
    let mut controls = 0;
    let mut missed = Vec::new();
    for name in ["B.1", "B.2"] {
        let net = fixture(name).unwrap();
        let prep = Prepared::new(&net, &PrepareOptions::default());
        match negative_control(&net, &prep, &cfg) {
            Ok(out) => {
                controls += out.len();
                missed.extend(out.iter().filter(|o| !o.detected).map(|o| format!("{name}/{}:{}", o.kind.prefix(), o.key)));
            }
            Err(e) => missed.push(format!("{name}: {e}")),
        }
    }
    let ok = bad.is_none() && min_slack >= SLACK_TOL && max_diff <= EQUIV_TOL && controls > 0 && missed.is_empty();
    outcome(
        ok,
        format!(
            "{assignments} assignments, min gated slack {min_slack:.3e}, max removal diff {max_diff:.2e}, \
             {}/{controls} halvings detected on B.1/B.2{}{}",
            controls - missed.len().min(controls),
            bad.map(|b| format!(", {b}")).unwrap_or_default(),
            if missed.is_empty() { String::new() } else { format!(", missed {missed:?}") }
        ),
    )
}

fn criterion_3(nets: &[(String, Network)]) -> Outcome {
    let mut cycles = 0;
    for (name, net) in nets {
        let zones = synchronous_zones(net);
        let basis = cycle_basis(net, &zones);
        if basis.len() + net.n_buses() != net.n_existing() + zones.len() {
            return outcome(false, format!("{name}: basis size {} off", basis.len()));
        }
        let rows: Vec<Vec<i64>> = basis.iter().map(|c| c.row(net.lines().len())).collect();
        if exact_rank(&rows) != Some(basis.len()) {
            return outcome(false, format!("{name}: basis rank {:?} below {}", exact_rank(&rows), basis.len()));
        }
        cycles += basis.len();
    }
    outcome(true, format!("{} instances, {cycles} basis cycles, all full rank", nets.len()))
}

fn cycle_sets(net: &Network) -> Vec<(BTreeSet<String>, usize, usize)> {
    let zones = synchronous_zones(net);
    let gs = SubnetworkGraph::new(net, &zones);
    let mut all: Vec<CycleSpec> = candidate_cycles_intra(net, &zones);
    all.extend(candidate_cycles_inter(net, &zones, &gs, DEFAULT_CYCLE_CAP).unwrap());
    all.iter()
        .map(|c| {
            let ids = c.line_ids(net).into_iter().map(String::from).collect();
            (ids, c.entries.len(), c.gating.len())
        })
        .collect()
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let b1 = cycle_sets(&fixture("B.1").unwrap());
    if b1.len() != 1 || b1[0].0 != set(&["c1", "l1", "l6"]) {
        failures.push("B.1 cycle");
    }
    let b2 = cycle_sets(&fixture("B.2").unwrap());
    for want in [set(&["c2", "l1", "l2", "l3"]), set(&["c1", "l5", "l1", "l2", "l3", "l4"])] {
        if !b2.iter().any(|c| c.0 == want) {
            failures.push("B.2 cycles");
        }
    }
    let c2net = fixture("C.2").unwrap();
    let c2 = cycle_sets(&c2net);
    if c2.len() != 1 || c2[0].1 != 4 {
        failures.push("C.2 cycle");
    }
    let zones = synchronous_zones(&c2net);
    let gs = SubnetworkGraph::new(&c2net, &zones);
    let relaxing: Vec<String> = slack_relaxation_plan(&gs, &c2net, &SlackStrategy::BreadthFirstCentral)
        .map(|p| p.entries.iter().flat_map(|e| e.relaxing.iter().map(|&k| c2net.line(k).id.clone())).collect())
        .unwrap_or_default();
    let angle = Prepared::new(&c2net, &PrepareOptions::default())
        .build(&c2net, &FormulationConfig::new(FormulationKind::Angle))
        .ok();
    let or_row = angle.as_ref().is_some_and(|m| {
        let p = &m.problem;
        ["hi", "lo"].iter().all(|side| {
            p.row(&format!("slack:w1:0:{side}")).is_some_and(|r| {
                let cols: BTreeSet<String> =
                    p.constraint(r).terms.iter().map(|&(v, _)| p.variable(v).name.clone()).collect();
                cols == set(&["i:c1", "i:c2", "theta:w1:0"])
            })
        })
    });
    if relaxing != ["c1", "c2"] || !or_row {
        failures.push("C.2 slack OR-row");
    }
    let d2 = cycle_sets(&fixture("D.2").unwrap());
    let two = d2.iter().filter(|c| c.1 == 2 && c.2 == 2).count();
    let three = d2.iter().filter(|c| c.2 == 3).count();
    if d2.len() != 11 || two != 3 || three != 8 {
        failures.push("D.2 cycle count");
    }
    let d1 = fixture("D.1").unwrap();
    let prep = Prepared::new(&d1, &PrepareOptions::default());
    let rejected = matches!(
        prep.build(&d1, &FormulationConfig::new(FormulationKind::Angle)),
        Err(FormulationError::AngleUnsupported(_))
    );
    let solved = prep
        .build(&d1, &FormulationConfig::new(FormulationKind::Cycle))
        .ok()
        .and_then(|m| solve_milp(&m.problem, &MilpConfig::exact()).ok())
        .is_some_and(|s| s.status == Status::Optimal);
    if !rejected || !solved {
        failures.push("D.1 angle rejection");
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("B.1, B.2, C.2, D.2 structures and D.1 handling match ({} D.2 cycles: {two}x2 + {three}x3)", d2.len())
        } else {
            format!("mismatch in {failures:?}")
        },
    )
}

fn criterion_5(nets: &[(String, Network)]) -> Outcome {
    let mut checked = 0;
    let mut meshed = 0;
    for (name, net) in nets {
        let prep = Prepared::new(net, &PrepareOptions::default());
        let Ok(a) = prep.build(net, &FormulationConfig::new(FormulationKind::Angle)) else { continue };
        let c = prep.build(net, &FormulationConfig::new(FormulationKind::Cycle)).unwrap();
        let (sa, sc) = (a.stats(), c.stats());
        if sa.columns - sc.columns != net.n_buses() * net.n_snapshots() {
            return outcome(false, format!("{name}: column difference {}", sa.columns - sc.columns));
        }
        checked += 1;
        if FIXTURE_NAMES.contains(&name.as_str()) && !prep.basis.is_empty() {
            meshed += 1;
            if sc.nonzeros >= sa.nonzeros {
                return outcome(false, format!("{name}: nonzeros {} vs {}", sc.nonzeros, sa.nonzeros));
            }
        }
    }
    outcome(meshed > 0, format!("column identity on {checked} instances, fewer nonzeros on {meshed} meshed fixtures"))
}

fn criterion_6(runs: &[SuiteRun]) -> Outcome {
    let solved = runs
        .iter()
        .flat_map(|r| &r.report.formulations)
        .filter(|f| f.best_objective.is_some())
        .count();
    let bad = first_violation(runs, |v| matches!(v, OracleViolation::Physics { .. }));
    outcome(
        bad.is_none() && solved > 0,
        format!(
            "{solved} optimal points checked for kcl, kvl, angle flows and unbuilt flow at 1e-6{}",
            bad.map(|b| format!(", {b}")).unwrap_or_default()
        ),
    )
}

fn parse_opt(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

fn criterion_7() -> Outcome {
    let cases: Vec<BenchCase> = desk_suite(8, 77).into_iter().map(BenchCase::Spec).collect();
    let cfg = BenchConfig::default();
    let mut buf = Vec::new();
    if let Err(e) = run_benchmark(&cases, &cfg, &mut buf) {
        return outcome(false, format!("benchmark failed: {e}"));
    }
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let recs: Vec<csv::StringRecord> = reader.records().filter_map(Result::ok).collect();
    let (data, summary) = recs.split_at(recs.len().saturating_sub(4));
    let mut speeds = Vec::new();
    for r in data {
        let (ta, tc, s) = (parse_opt(&r[23]), parse_opt(&r[25]), parse_opt(&r[26]));
        match (ta, tc, s) {
            (Some(ta), Some(tc), Some(s)) => {
                if (s - ta / tc).abs() > 1e-12 * s.abs() {
                    return outcome(false, format!("{}: speed-up {s} != {ta}/{tc}", &r[0]));
                }
                speeds.push(s);
            }
            (_, _, None) => {}
            _ => return outcome(false, format!("{}: incomplete timing", &r[0])),
        }
    }
    if speeds.is_empty() || summary.len() != 4 {
        return outcome(false, "no summary");
    }
    let mut sorted = speeds.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let med = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let expect = [speeds.iter().sum::<f64>() / n as f64, med, sorted[n - 1], sorted[0]];
    for (rec, (label, want)) in summary.iter().zip(["mean", "median", "max", "min"].iter().zip(expect)) {
        let got = parse_opt(&rec[26]).unwrap_or(f64::NAN);
        if &rec[0] != *label || (got - want).abs() > 1e-12 * want.abs() {
            return outcome(false, format!("summary {label}: {got} vs {want}"));
        }
    }

    let control_net = generate(&InstanceSpec {
        seed: 5,
        n_buses: 12,
        candidate_corridors: 0,
        n_snapshots: 3,
        ..Default::default()
    })
    .unwrap();
    let control = control_race(&control_net, FormulationKind::Angle, &BenchConfig { repeats: 5, ..cfg })
        .ok()
        .and_then(|r| r.speedup());
    let in_band = control.is_some_and(|s| (CONTROL_BAND.0..=CONTROL_BAND.1).contains(&s));
    outcome(
        in_band,
        format!(
            "{n} speed-ups equal t_angle/t_cycle, summary mean {:.3} median {:.3} max {:.3} min {:.3}, control {:.3} in [{}, {}]",
            expect[0],
            expect[1],
            expect[2],
            expect[3],
            control.unwrap_or(f64::NAN),
            CONTROL_BAND.0,
            CONTROL_BAND.1
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    let mut worst = 0.0f64;
    for name in FIXTURE_NAMES {
        let net = fixture(name).unwrap();
        let prep = Prepared::new(&net, &PrepareOptions::default());
        for kind in [FormulationKind::Angle, FormulationKind::Cycle] {
            let Ok(m) = prep.build(&net, &FormulationConfig::new(kind)) else { continue };
            let text = to_lp_string(&m.problem);
            let back = match parse_lp(&text) {
                Ok(p) => p,
                Err(e) => return outcome(false, format!("{name} {kind}: {e}")),
            };
            let s1 = solve_milp(&m.problem, &MilpConfig::exact()).unwrap();
            let s2 = solve_milp(&back, &MilpConfig::exact()).unwrap();
            let rel = (s1.objective() - s2.objective()).abs() / s1.objective().abs().max(1.0);
            worst = worst.max(rel);
            if rel > ROUNDTRIP_TOL || s1.status != s2.status {
                return outcome(false, format!("{name} {kind}: {} vs {}", s1.objective(), s2.objective()));
            }
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        elapsed < ROUNDTRIP_BUDGET,
        format!("{count} models, max rel diff {worst:.2e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn main() {
    let nets = suite_networks();
    let start = Instant::now();
    let suite = run_suite(&nets);
    let elapsed = start.elapsed();

    let mut results: Vec<Outcome> = Vec::new();
    match &suite {
        Ok(runs) => {
            results.push(criterion_1(runs, elapsed));
            results.push(criterion_2(runs));
        }
        Err(e) => {
            results.push(outcome(false, format!("oracle error {e}")));
            results.push(outcome(false, format!("oracle error {e}")));
        }
    }
    results.push(criterion_3(&nets));
    results.push(criterion_4());
    results.push(criterion_5(&nets));
    results.push(match &suite {
        Ok(runs) => criterion_6(runs),
        Err(e) => outcome(false, format!("oracle error {e}")),
    });
    results.push(criterion_7());
    results.push(criterion_8());

    let mut failed = 0;
    for (i, r) in results.iter().enumerate() {
        println!("criterion {} {}: {}", i + 1, if r.ok { "PASS" } else { "FAIL" }, r.detail);
        failed += usize::from(!r.ok);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
