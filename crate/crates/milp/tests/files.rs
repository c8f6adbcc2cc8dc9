use proptest::prelude::*;
use tep_milp::lpfile::{parse_lp, read_lp, to_lp_string, write_lp};
use tep_milp::mps::{parse_mps, to_mps_string};
use tep_milp::{solve_milp, MilpConfig, MilpProblem, Sense, VarKind};

fn sample() -> MilpProblem {
    let mut p = MilpProblem::new("sample");
    let g = p.continuous("g:gen 1:0", 0.0, 40.5, 12.25).unwrap();
    let f = p.continuous("f:l1:0", f64::NEG_INFINITY, f64::INFINITY, 0.0).unwrap();
    let t = p.continuous("theta:n<1>:0", -3.5, 3.5, 0.0).unwrap();
    let z = p.continuous("fixed", 2.0, 2.0, 1.0).unwrap();
    let i = p.binary("i:c1", 1.0e5).unwrap();
    p.add_row("kcl:n1:0", [(g, 1.0), (f, -1.0)], Sense::Eq, 30.0).unwrap();
    p.add_row("kvl:l1:0", [(f, 0.1), (t, -1.0)], Sense::Eq, 0.0).unwrap();
    p.add_row("cand:c1:0:hi", [(f, 1.0), (i, -100.0), (z, 1.0 / 3.0)], Sense::Le, 0.0).unwrap();
    p.add_row("cap", [(g, 1.0), (i, 7.0)], Sense::Ge, -2.0).unwrap();
    p.canonicalize();
    p
}

#[test]
fn lp_round_trip_is_exact() {
    let p = sample();
    let text = to_lp_string(&p);
    let q = parse_lp(&text).unwrap();
    assert_eq!(p.variables(), q.variables());
    assert_eq!(p.constraints(), q.constraints());
    assert_eq!(text, to_lp_string(&q));
}

#[test]
fn lp_file_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.lp");
    let p = sample();
    write_lp(&p, &path).unwrap();
    let q = read_lp(&path).unwrap();
    let a = solve_milp(&p, &MilpConfig::exact()).unwrap();
    let b = solve_milp(&q, &MilpConfig::exact()).unwrap();
    assert_eq!(a.status, b.status);
    assert_eq!(a.objective(), b.objective());
}

#[test]
fn mps_round_trip_keeps_names_and_kinds() {
    let p = sample();
    let text = to_mps_string(&p);
    for line in text.lines().filter(|l| !l.starts_with('*')) {
        assert!(line.len() <= 61, "{line}");
    }
    let q = parse_mps(&text).unwrap();
    assert_eq!(p.num_vars(), q.num_vars());
    assert_eq!(p.num_rows(), q.num_rows());
    for (a, b) in p.variables().iter().zip(q.variables()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.lower, b.lower);
        assert_eq!(a.upper, b.upper);
        assert!((a.cost - b.cost).abs() <= 1e-9 * a.cost.abs().max(1.0));
    }
    for (a, b) in p.constraints().iter().zip(q.constraints()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.sense, b.sense);
        assert_eq!(a.rhs, b.rhs);
        assert_eq!(a.terms.len(), b.terms.len());
        for (x, y) in a.terms.iter().zip(&b.terms) {
            assert_eq!(x.0, y.0);
            assert!((x.1 - y.1).abs() <= 1e-7 * x.1.abs(), "{} vs {}", x.1, y.1);
        }
    }
    assert_eq!(q.variable(q.var("i:c1").unwrap()).kind, VarKind::Binary);
}

fn name_strategy() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9:# <>~.\\-]{0,10}"
}

proptest! {
    #[test]
    fn lp_round_trip_random(
        names in prop::collection::btree_set(name_strategy(), 1..6),
        coefs in prop::collection::vec(-1.0e6f64..1.0e6, 6),
        rhs in -1.0e3f64..1.0e3,
    ) {
        let mut p = MilpProblem::new("r");
        let ids: Vec<_> = names
            .iter()
            .enumerate()
            .map(|(k, n)| {
                if k % 2 == 0 {
                    p.binary(n.clone(), coefs[k]).unwrap()
                } else {
                    p.continuous(n.clone(), -coefs[k].abs(), coefs[k].abs(), coefs[k]).unwrap()
                }
            })
            .collect();
        let terms: Vec<_> = ids.iter().zip(&coefs).map(|(&v, &a)| (v, a)).collect();
        p.add_row("row one", terms.clone(), Sense::Le, rhs).unwrap();
        p.add_row("row-two", terms, Sense::Ge, -rhs).unwrap();
        p.canonicalize();
        let q = parse_lp(&to_lp_string(&p)).unwrap();
        prop_assert_eq!(p.variables(), q.variables());
        prop_assert_eq!(p.constraints(), q.constraints());
    }
}
