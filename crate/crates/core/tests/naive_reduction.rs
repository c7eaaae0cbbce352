use fairslice::oracle::{naive_reduction_counterexample_search, naive_threshold, search_naive_reduction};
use fairslice::rational::{parse_scalar, ratio};
use fairslice::*;

fn v(breaks: &[&str], densities: &[&str]) -> Valuation {
    let p = |xs: &[&str]| xs.iter().map(|s| parse_scalar(s).unwrap()).collect();
    Valuation::new(p(breaks), p(densities)).unwrap()
}

/// Found by `naive_reduction_counterexample_search(42, _)` on its first trial.
fn fixture() -> Vec<Valuation> {
    vec![
        v(&["0", "1/5", "1"], &["5/17", "20/17"]),
        v(&["0", "3/10", "1/2", "4/5", "1"], &["20/9", "10/9", "0", "5/9"]),
        v(&["0", "1"], &["1"]),
        v(&["0", "1/10", "2/5", "7/10", "1"], &["0", "10/9", "20/9", "0"]),
    ]
}

#[test]
fn search_finds_the_pinned_instance() {
    let found = naive_reduction_counterexample_search(42, 10).unwrap().expect("counterexample");
    assert_eq!(found.trial, 0);
    assert_eq!(found.valuations, fixture());
    assert_eq!(found.naive_report.max_envy, ratio(9, 128));
}

#[test]
fn fixture_replays_bit_for_bit() {
    let groups = GroupStructure::new(vec![2, 2]).unwrap();
    let eps = ratio(1, 100);
    let cfg = SolverConfig::default();
    let run = || search_naive_reduction(1, &groups, &eps, &cfg, |_| fixture()).unwrap().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.naive_report.max_envy, ratio(9, 128));
    assert!(a.naive_report.max_envy > naive_threshold(&groups, &eps));
    assert!(a.individual.report.max_envy <= eps);
    assert_eq!(a.naive.membership, vec![1, 0, 0, 1]);
}

#[test]
fn lifted_solver_fixes_the_fixture() {
    let groups = GroupStructure::new(vec![2, 2]).unwrap();
    let sol = solve_groups(&fixture(), &groups, &ratio(1, 100), &SolverConfig::default()).unwrap();
    assert!(sol.report.max_envy <= ratio(1, 100));
    assert!(sol.report.pass);
}
