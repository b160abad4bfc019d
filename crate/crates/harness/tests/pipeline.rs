use proptest::prelude::*;

use rarn::report::{RunReport, SolverConfig};
use rarn_harness::invariants::{hard_count, verify_invariants, Rule};
use rarn_harness::{io, run_single, run_sweep, ExperimentConfig, ProblemConfig};

fn config(solver: &str, problem: &str, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml_str(&format!("seed = {seed}\nsolver = \"{solver}\"\n[problem]\nkind = \"rayleigh\"\nn = 20\n")).unwrap();
    cfg.problem = ProblemConfig::preset(problem).unwrap();
    cfg
}

fn small_rayleigh(solver: &str, seed: u64) -> RunReport {
    let cfg = ExperimentConfig::from_toml_str(&format!("seed = {seed}\nsolver = \"{solver}\"\n[problem]\nkind = \"rayleigh\"\nn = 20\n")).unwrap();
    run_single(&cfg).unwrap()
}

#[test]
fn json_round_trip_of_a_real_report() {
    for solver in ["rar", "rtr"] {
        let rep = small_rayleigh(solver, 3);
        let text = io::report_to_json(&rep).unwrap();
        let back = io::report_from_json(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(io::report_to_json(&back).unwrap(), text);
        assert_eq!(io::trace_from_csv(&io::trace_to_csv(&rep.records).unwrap()).unwrap(), rep.records);
    }
}

#[test]
fn runs_are_byte_identical() {
    for problem in ["rayleigh", "holder_well", "quadratic"] {
        for solver in ["rar", "rtr"] {
            let a = io::report_to_json(&run_single(&config(solver, problem, 8)).unwrap()).unwrap();
            let b = io::report_to_json(&run_single(&config(solver, problem, 8)).unwrap()).unwrap();
            assert_eq!(a, b, "{solver} on {problem}");
        }
    }
}

#[test]
fn real_traces_are_clean() {
    for problem in ["rayleigh", "holder_well", "quadratic"] {
        for solver in ["rar", "rtr"] {
            let rep = run_single(&config(solver, problem, 1)).unwrap();
            assert!(rep.converged(), "{solver} on {problem}");
            assert_eq!(hard_count(&verify_invariants(&rep)), 0, "{solver} on {problem}");
        }
    }
}

fn only_rule(rep: &RunReport, rule: Rule) {
    let v = verify_invariants(rep);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].rule, rule);
}

#[test]
fn planted_sigma_expansion_on_success_is_caught() {
    // the last record's update is not carried forward, so the fault stays isolated
    let mut rep = (0..).map(|seed| small_rayleigh("rar", seed)).find(|r| r.records.last().unwrap().success).unwrap();
    let r = rep.records.last_mut().unwrap();
    r.param_next = r.param * 10.0;
    only_rule(&rep, Rule::ParamUpdate);
}

#[test]
fn planted_radius_corruption_is_caught() {
    let mut rep = small_rayleigh("rtr", 2);
    let last = rep.records.len() - 1;
    rep.records[last].param_next *= 1.5;
    only_rule(&rep, Rule::ParamUpdate);
}

#[test]
fn planted_f_increase_is_caught() {
    let mut rep = small_rayleigh("rar", 4);
    let last = rep.records.len() - 1;
    let r = &mut rep.records[last];
    assert!(r.success);
    r.f_trial = r.f + 1e-3;
    rep.final_value = r.f_trial;
    only_rule(&rep, Rule::MonotoneF);
}

#[test]
fn converged_status_needs_a_certificate() {
    let mut rep = small_rayleigh("rtr", 5);
    rep.certificate = None;
    only_rule(&rep, Rule::Status);
}

#[test]
fn sweep_is_reproducible_and_serializes() {
    let text = "seed = 6\nsolver = \"rar\"\n[problem]\nkind = \"rayleigh\"\nn = 30\n[sweep]\neps_g = [1e-2, 1e-3, 1e-4, 1e-5]\n";
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let a = run_sweep(&cfg).unwrap();
    let mut serial = cfg.clone();
    serial.sweep.as_mut().unwrap().parallel = false;
    let b = run_sweep(&serial).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.points.len(), 4);
    assert!(a.iter_slope.is_some() && !a.partial);
    for (i, p) in a.points.iter().enumerate() {
        assert_eq!(p.seed, 6 + i as u64);
        assert_eq!(p.eps_h, p.eps_g.sqrt());
    }
    assert_eq!(io::sweep_from_json(&io::sweep_to_json(&a).unwrap()).unwrap(), a);
    assert_eq!(io::sweep_points_from_csv(&io::sweep_to_csv(&a).unwrap()).unwrap(), a.points);
}

#[test]
fn explicit_eps_h_is_kept() {
    let text = "solver = \"rtr\"\n[problem]\nkind = \"quadratic\"\nn = 5\n[rtr]\neps_g = 1e-5\neps_h = 0.25\n";
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    match cfg.solver_config() {
        SolverConfig::Rtr(c) => assert_eq!((c.eps_g, c.eps_h), (1e-5, 0.25)),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_rayleigh_traces_pass_the_verifier(seed in 0u64..100_000, rar in any::<bool>()) {
        let rep = small_rayleigh(if rar { "rar" } else { "rtr" }, seed);
        prop_assert!(rep.converged());
        prop_assert_eq!(hard_count(&verify_invariants(&rep)), 0);
    }
}
