//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flowtime::equilibrium::{check_equilibrium, numeric_run, run, EngineOptions, InflowRate};
use flowtime::io::load_instance;
use flowtime::lcp::{build_lcp, find_negative_principal_minor};
use flowtime::parametric::{eval_thin_flow, parametric_solve};
use flowtime::rational::{int, q};
use flowtime::sp::decompose_network;
use flowtime::thinflow::{brute_force_thin_flows, solve_thin_flow_lcp, FlowCompletion, Route, ThinFlowOptions};
use flowtime::{PwlFn, Q};
use num_traits::pow;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lemke_labels(net: &flowtime::Network, g: &flowtime::ShortestPathGraph, value: &Q, sl: &Q) -> Vec<Q> {
    solve_thin_flow_lcp(net, g, value, sl, FlowCompletion::ArcOrder).expect("Lemke succeeds").labels
}

fn breakpoint_bound() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut tight = 0;
    for seed in 0..200u64 {
        let mut rng = common::rng(1_000 + seed);
        let m = rng.gen_range(1..=12);
        let net = common::random_sp_network(&mut rng, m, 2);
        let g = common::all_active(&mut rng, &net, 0.3);
        let tree = decompose_network(&net, &g.active_arcs()).expect("generated graph is series-parallel");
        let (labels, _) = parametric_solve(&tree, |a| g.is_resetting(a), &net.capacities()).expect("parametric solve");
        let bound = 2 * net.num_arcs() as i64 - g.resetting_arcs().len() as i64 - net.num_vertices() as i64 + 1;
        let count = labels.num_breakpoints() as i64;
        if count > bound {
            violations += 1;
        }
        if count == bound {
            tight += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(
        violations == 0 && elapsed < Duration::from_secs(10),
        format!("200 instances, {violations} violations, {tight} attain the bound, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn parametric_matches_lemke() -> Outcome {
    let mut mismatches = 0;
    for seed in 0..100u64 {
        let mut rng = common::rng(2_000 + seed);
        let m = rng.gen_range(1..=10);
        let net = common::random_sp_network(&mut rng, m, 2);
        let g = common::all_active(&mut rng, &net, 0.3);
        let tree = decompose_network(&net, &g.active_arcs()).expect("series-parallel");
        let (labels, flows) = parametric_solve(&tree, |a| g.is_resetting(a), &net.capacities()).expect("parametric solve");
        for _ in 0..20 {
            let value = q(rng.gen_range(0..=40), rng.gen_range(1..=7));
            let (l, _) = eval_thin_flow(&labels, &flows, &value, &int(1)).expect("evaluation");
            let parametric: Vec<Q> = (0..net.num_vertices()).map(|v| l[&v].clone()).collect();
            if parametric != lemke_labels(&net, &g, &value, &int(1)) {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, format!("100 instances x 20 values, {mismatches} mismatches"))
}

fn lemke_matches_enumeration() -> Outcome {
    let mut mismatches = 0;
    let mut largest = 0;
    for seed in 0..100u64 {
        let mut rng = common::rng(3_000 + seed);
        let limit = if seed % 10 == 0 { 24 } else { 18 };
        let (net, g) = common::random_thin_flow_instance(&mut rng, limit);
        largest = largest.max(common::lcp_size(&net, &g));
        let value = common::flow_value(&mut rng);
        let sl = q(rng.gen_range(1..=4), rng.gen_range(1..=2));
        let lemke = lemke_labels(&net, &g, &value, &sl);
        let all = brute_force_thin_flows(&net, &g, &value, &sl).expect("within the enumeration limit");
        if all.is_empty() || all.iter().any(|s| s.labels != lemke) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, format!("100 instances up to {largest} variables, {mismatches} mismatches"))
}

fn monotone_and_scaling() -> Outcome {
    let mut violations = 0;
    for seed in 0..500u64 {
        let mut rng = common::rng(4_000 + seed);
        let (net, g) = common::random_thin_flow_instance(&mut rng, 40);
        let (v1, v2) = (common::flow_value(&mut rng), common::flow_value(&mut rng));
        let (s1, s2) = (q(rng.gen_range(1..=8), 4), q(rng.gen_range(1..=8), 4));
        let (lo_v, hi_v) = (v1.clone().min(v2.clone()), v1.max(v2));
        let (lo_s, hi_s) = (s1.clone().min(s2.clone()), s1.max(s2));
        let lo = lemke_labels(&net, &g, &lo_v, &lo_s);
        let hi = lemke_labels(&net, &g, &hi_v, &hi_s);
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            violations += 1;
        }
        let unit = lemke_labels(&net, &g, &(&lo_v / &lo_s), &int(1));
        if unit.iter().zip(&lo).any(|(u, l)| u * &lo_s != *l) {
            violations += 1;
        }
    }
    ensure(violations == 0, format!("500 pairs, {violations} violations"))
}

fn principal_minors() -> Outcome {
    let mut negative = 0;
    let mut done = 0;
    let mut seed = 5_000u64;
    while done < 50 {
        let mut rng = common::rng(seed);
        seed += 1;
        let (net, g) = common::random_thin_flow_instance(&mut rng, 16);
        if g.active_arcs().len() > 8 {
            continue;
        }
        let lcp = build_lcp(&net, &g, &int(1), &int(1));
        if find_negative_principal_minor(&lcp.matrix).is_some() {
            negative += 1;
        }
        done += 1;
    }
    ensure(negative == 0, format!("50 instances, {negative} with a negative principal minor"))
}

fn two_arc_regression() -> Outcome {
    let inst = load_instance(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/two_arc.json")).map_err(|e| e.to_string())?;
    let trace = run(&inst.network, inst.inflow.as_ref().unwrap(), EngineOptions::default()).map_err(|e| e.to_string())?;
    let t = inst.network.vertex_id("t").unwrap();
    let expected = PwlFn::new(vec![(int(0), int(0)), (int(1), int(2)), (int(2), int(2))], int(1)).unwrap();
    let lt = &trace.labels[t];
    let first_segment = (0..=8).all(|k| lt.at(&q(k, 8)) == q(k, 4));
    ensure(*lt == expected && first_segment, format!("l_t = {lt}"))
}

fn checker_soundness() -> Outcome {
    let mut failed = 0;
    let mut missed = 0;
    let mut phases = 0;
    for seed in 0..50u64 {
        let mut rng = common::rng(7_000 + seed);
        let net = common::random_dynamic_network(&mut rng);
        let inflow = common::random_inflow(&mut rng, 5, int(6));
        let trace = run(&net, &inflow, EngineOptions::default()).map_err(|e| e.to_string())?;
        phases += trace.phases.len();
        if !check_equilibrium(&trace, &net, &inflow, 1).passed() {
            failed += 1;
        }
        let phase = rng.gen_range(0..trace.phases.len());
        let bad = common::corrupt(&trace, &net, phase, seed as usize);
        if check_equilibrium(&bad, &net, &inflow, 1).passed() {
            missed += 1;
        }
    }
    ensure(
        failed == 0 && missed == 0,
        format!("50 runs ({phases} phases): {failed} rejected; 50 corruptions: {missed} accepted"),
    )
}

fn completion_invariance() -> Outcome {
    let mut differing_labels = 0;
    let mut differing_flows = 0;
    for seed in 0..50u64 {
        let mut rng = common::rng(8_000 + seed);
        let net = common::random_dynamic_network(&mut rng);
        let inflow = common::random_inflow(&mut rng, 5, int(6));
        let traces: Vec<_> = [FlowCompletion::ArcOrder, FlowCompletion::ReverseArcOrder]
            .into_iter()
            .map(|completion| {
                let thin_flow = ThinFlowOptions { route: Route::Lcp, completion };
                run(&net, &inflow, EngineOptions { thin_flow, ..Default::default() })
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let auto = run(&net, &inflow, EngineOptions::default()).map_err(|e| e.to_string())?;
        if traces[0].labels != traces[1].labels || traces[0].labels != auto.labels {
            differing_labels += 1;
        }
        if traces[0].cumulative_flows != traces[1].cumulative_flows {
            differing_flows += 1;
        }
    }
    ensure(
        differing_labels == 0,
        format!("50 instances, {differing_labels} label differences ({differing_flows} with different flows)"),
    )
}

fn numeric_convergence() -> Outcome {
    let inst = load_instance(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/two_arc.json")).map_err(|e| e.to_string())?;
    let inflow = inst.inflow.unwrap();
    let exact = run(&inst.network, &inflow, EngineOptions::default()).map_err(|e| e.to_string())?;
    let rate = InflowRate::Step(inflow.rate.clone());
    let errors: Vec<f64> = (6..=10)
        .map(|k| {
            let h: Q = pow(q(1, 2), k);
            numeric_run(&inst.network, &rate, &h, &inflow.horizon, ThinFlowOptions::default())
                .map(|t| t.max_error(&exact))
                .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    let last = *errors.last().unwrap();
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    ensure(
        last <= 1.0 / 32.0 && monotone,
        format!("errors for h = 2^-6..2^-10: {errors:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("breakpoint bound", breakpoint_bound),
        ("parametric vs Lemke labels", parametric_matches_lemke),
        ("Lemke vs support enumeration", lemke_matches_enumeration),
        ("monotonicity and scaling", monotone_and_scaling),
        ("principal minors", principal_minors),
        ("two-arc regression", two_arc_regression),
        ("equilibrium checker soundness", checker_soundness),
        ("label invariance under flow completion", completion_invariance),
        ("numeric convergence", numeric_convergence),
    ];
    let mut all_passed = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                all_passed = false;
                println!("FAIL criterion {}: {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
