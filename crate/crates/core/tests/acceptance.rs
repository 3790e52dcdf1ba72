//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any does.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod support;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oblivious_crn::builtins::{builtin_1d, min1_spec, roof_spec};
use oblivious_crn::compiler::{compile_1d, compile_1d_leaderless, compile_quilt, CompileError};
use oblivious_crn::crn::{Crn, NamedReaction};
use oblivious_crn::funcspec::{extract_eventual_1d, scaled_sample, scaled_spec_sample, FuncError};
use oblivious_crn::rational::Rational;
use oblivious_crn::simulator::{convergence_stats, simulate};
use oblivious_crn::verifier::{
    dickson_search, overproduction_witness, replay, stably_computes, verify_window, Caps, ReachGraph, Status,
};
use support::*;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn verified(name: &str, crn: &Crn, f: &(dyn Fn(&[u64]) -> u64 + Sync), window: &[u64]) -> Outcome {
    let report = verify_window(crn, f, window, Caps::default()).map_err(|e| format!("{name}: {e}"))?;
    ensure!(report.all_verified(), "{name}: {}", report.summary());
    Ok(())
}

fn figure_one() -> Outcome {
    verified("2x", &double_crn(), &builtin("double"), &[8])?;
    verified("min", &min_crn(), &builtin("min"), &[4, 4])?;
    verified("max", &max_crn(), &builtin("max"), &[4, 4])?;
    ensure!(double_crn().is_output_oblivious(), "2x flagged non-oblivious");
    ensure!(min_crn().is_output_oblivious(), "min flagged non-oblivious");
    ensure!(!max_crn().is_output_oblivious(), "max flagged oblivious");
    // both min(1, x) networks shown alongside
    verified("min1 leaderless", &min1_leaderless_crn(), &builtin("min1"), &[8])?;
    verified("min1 leader", &min1_leader_crn(), &builtin("min1"), &[8])?;
    ensure!(
        !min1_leaderless_crn().is_output_oblivious(),
        "2Y -> Y flagged oblivious"
    );
    ensure!(
        min1_leader_crn().is_output_oblivious(),
        "L + X -> Y flagged non-oblivious"
    );
    Ok(())
}

fn quilt_construction() -> Outcome {
    let g = floor_three_halves();
    let crn = compile_quilt(&g).map_err(|e| e.to_string())?;
    ensure!(
        crn.reactions().len() == 3,
        "floor(3x/2): {} reactions",
        crn.reactions().len()
    );
    verified("floor(3x/2)", &crn, &builtin("floor3x2"), &[12])?;

    let h = ceil_half_sum();
    ensure!(h.period() == 2, "period {}", h.period());
    let crn = compile_quilt(&h).map_err(|e| e.to_string())?;
    ensure!(
        crn.reactions().len() == 9,
        "ceil((x1+x2)/2): {} reactions",
        crn.reactions().len()
    );
    verified("ceil((x1+x2)/2)", &crn, &|x| h.eval(x).unwrap() as u64, &[6, 6])
}

fn general_construction() -> Outcome {
    for (name, spec, f, window) in [
        ("min1", min1_spec(), builtin("min1"), vec![6]),
        ("roof", roof_spec(), builtin("roof"), vec![4, 4]),
    ] {
        let crn = oblivious_crn::compiler::compile_spec(&spec).map_err(|e| e.to_string())?;
        let report = verify_window(&crn, &f, &window, Caps::default()).map_err(|e| e.to_string())?;
        ensure!(report.all_verified(), "{name}: {}", report.summary());
        ensure!(report.capped() == 0, "{name}: capped");
        let w = *window.iter().max().unwrap();
        for x in spec.window_points(w) {
            let lhs = spec.eval(&x).map_err(|e| e.to_string())?;
            let rhs = spec.min_decomposition(&x).map_err(|e| e.to_string())?;
            ensure!(
                lhs == rhs && lhs == f(&x),
                "{name} at {x:?}: f={lhs}, decomposition={rhs}"
            );
        }
        println!(
            "    {name}: {} ({} species, {} reactions, largest graph {})",
            report.summary(),
            crn.species().len(),
            crn.reactions().len(),
            report.max_graph_size()
        );
    }
    Ok(())
}

fn impossibility() -> Outcome {
    let max = builtin("max");
    let trace = overproduction_witness(&naive_max_crn(), &max, &[1, 1], Caps::default())
        .map_err(|e| e.to_string())?
        .ok_or("no overproduction witness")?;
    ensure!(trace.len() == 2, "trace has {} steps", trace.len());
    ensure!(
        naive_max_crn().output_count(&trace[1].configuration) == 2,
        "trace ends below 2"
    );

    let w = dickson_search(&max, 2, 5).ok_or("no witness for max")?;
    let fam = &w.family;
    ensure!(
        fam.base == [0, 0] && fam.step == [1, 0] && fam.delta_base == [0, 0] && fam.delta_step == [0, 1],
        "max family {fam:?}"
    );
    for i in 0..=fam.chain_length {
        for j in i + 1..=fam.chain_length {
            ensure!(
                max(&[i, j]) - max(&[i, 0]) == j - i,
                "pattern breaks at ({i},{j})"
            );
            ensure!(max(&[j, j]) - max(&[j, 0]) == 0, "pattern breaks at ({j},{j})");
        }
    }
    ensure!(w.lhs > w.rhs, "witness does not decrease");

    ensure!(dickson_search(&builtin("min"), 2, 5).is_none(), "witness for min");
    ensure!(
        dickson_search(&builtin("floor3x2"), 1, 5).is_none(),
        "witness for floor(3x/2)"
    );
    ensure!(
        dickson_search(&builtin("roof"), 2, 5).is_none(),
        "witness for roof"
    );
    ensure!(
        dickson_search(&builtin("depressed-strip"), 2, 5).is_some(),
        "no witness for depressed strip"
    );
    Ok(())
}

fn one_dimensional() -> Outcome {
    let form = extract_eventual_1d(&builtin_1d("floor3x2").unwrap()).map_err(|e| e.to_string())?;
    ensure!(
        form.n == 0 && form.p == 2 && form.deltas == [1, 2],
        "form {form:?}"
    );
    for name in ["min1", "floor3x2"] {
        let crn = compile_1d(&builtin_1d(name).unwrap()).map_err(|e| e.to_string())?;
        verified(name, &crn, &builtin(name), &[10])?;
    }
    for name in ["double", "floor3x2"] {
        let crn = compile_1d_leaderless(&builtin_1d(name).unwrap(), 16).map_err(|e| e.to_string())?;
        ensure!(crn.leader().is_none(), "{name}: leader present");
        verified(name, &crn, &builtin(name), &[8])?;
    }
    let rejected = compile_1d_leaderless(&builtin_1d("min1").unwrap(), 16);
    ensure!(
        rejected == Err(CompileError::Func(FuncError::NotSuperadditive { x: 1, z: 1 })),
        "min1 leaderless: {rejected:?}"
    );
    Ok(())
}

fn composition() -> Outcome {
    let doubled = crn("inputs: W\noutput: Y\nW -> 2 Y\n");
    let c = oblivious_crn::crn::concatenate(&min_crn(), &doubled).map_err(|e| e.to_string())?;
    verified("2*min", &c, &|x| 2 * x[0].min(x[1]), &[3, 3])?;

    let catalytic = catalytic_identity_crn();
    ensure!(
        !catalytic.is_output_oblivious() && catalytic.is_output_monotonic(),
        "catalyst CRN misclassified"
    );
    verified("catalytic identity", &catalytic, &|x| x[0], &[8])?;
    let oblivious = catalytic.monotonic_to_oblivious().map_err(|e| e.to_string())?;
    ensure!(oblivious.is_output_oblivious(), "transform left Y as a reactant");
    verified("transformed identity", &oblivious, &|x| x[0], &[8])?;
    let c = oblivious_crn::crn::concatenate(&oblivious, &doubled).map_err(|e| e.to_string())?;
    verified("2*identity", &c, &|x| 2 * x[0], &[8])
}

/// Small random networks over `X, Y, A, B` (first `species` of them). The
/// output `Y` may be excluded from reactants to force obliviousness.
fn random_crn(species: usize, oblivious: bool) -> impl Strategy<Value = Option<Crn>> {
    let names = ["X", "Y", "A", "B"];
    let term = prop::collection::vec(0u64..3, species);
    prop::collection::vec((term.clone(), term), 1..5).prop_map(move |rs| {
        let mut b = Crn::builder().inputs(&["X"]).output("Y");
        for (re, pr) in rs {
            let pick = |v: &[u64], skip_y: bool| -> Vec<(String, u64)> {
                v.iter()
                    .enumerate()
                    .filter(|&(i, &k)| k > 0 && !(skip_y && i == 1))
                    .map(|(i, &k)| (names[i].to_string(), k))
                    .collect()
            };
            let reactants = pick(&re, oblivious);
            if reactants.is_empty() {
                continue;
            }
            let r = NamedReaction {
                reactants,
                products: pick(&pr, false),
            };
            if b.add_reaction(&r).is_err() {
                continue;
            }
        }
        b.build().ok().filter(|c| !c.reactions().is_empty())
    })
}

fn config(crn: &Crn, counts: &[u64]) -> oblivious_crn::crn::Configuration {
    let mut c = oblivious_crn::crn::Configuration::zero(crn.species().len());
    for (s, &k) in counts.iter().enumerate().take(crn.species().len()) {
        c.set(s, k);
    }
    c
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: 1000,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn properties() -> Outcome {
    let caps = Caps {
        max_configs: 50_000,
        max_count: 64,
    };
    let counts = || prop::collection::vec(0u64..4, 4);

    // A ->* B (by a random walk) implies A + C ->* B + C (by search).
    runner()
        .run(
            &(2usize..5).prop_flat_map(|n| {
                (
                    random_crn(n, false),
                    counts(),
                    counts(),
                    prop::collection::vec(0usize..8, 0..7),
                )
            }),
            |(crn, a, extra, walk)| {
                let Some(crn) = crn else { return Ok(()) };
                let a = config(&crn, &a);
                let extra = config(&crn, &extra);
                let mut b = a.clone();
                for pick in walk {
                    let enabled: Vec<_> = crn
                        .reactions()
                        .iter()
                        .filter(|r| oblivious_crn::crn::applicable(&b, r))
                        .collect();
                    if enabled.is_empty() {
                        break;
                    }
                    b = oblivious_crn::crn::apply(&b, enabled[pick % enabled.len()]).unwrap();
                }
                let g = ReachGraph::explore(&crn, &a.add(&extra), caps);
                prop_assert!(g.index_of(&b.add(&extra)).is_some(), "B + C unreachable in {crn}");
                Ok(())
            },
        )
        .map_err(|e| format!("additivity: {e}"))?;

    // Output never decreases along an edge of an oblivious network's graph.
    runner()
        .run(
            &((2usize..5).prop_flat_map(|n| random_crn(n, true)), counts()),
            |(crn, c0)| {
                let Some(crn) = crn else { return Ok(()) };
                prop_assert!(crn.is_output_oblivious());
                let g = ReachGraph::explore(
                    &crn,
                    &config(&crn, &c0),
                    Caps {
                        max_configs: 5_000,
                        max_count: 64,
                    },
                );
                for v in 0..g.len() {
                    for (_, w) in g.successors(v) {
                        prop_assert!(g.output(w) >= g.output(v), "edge {v}->{w} lowers Y in {crn}");
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| format!("Y-monotonicity: {e}"))?;

    // Same seed, same trace.
    runner()
        .run(
            &(
                (2usize..5).prop_flat_map(|n| random_crn(n, false)),
                0u64..6,
                any::<u64>(),
            ),
            |(crn, x, seed)| {
                let Some(crn) = crn else { return Ok(()) };
                let t1 = simulate(&crn, &[x], seed, 200).unwrap();
                let t2 = simulate(&crn, &[x], seed, 200).unwrap();
                prop_assert_eq!(t1, t2);
                Ok(())
            },
        )
        .map_err(|e| format!("seed determinism: {e}"))?;

    // Every refutation's trace replays to its last configuration.
    let refutations = std::cell::Cell::new(0u32);
    runner()
        .run(
            &(
                (2usize..5).prop_flat_map(|n| random_crn(n, false)),
                0u64..5,
                0usize..3,
            ),
            |(crn, x, which)| {
                let Some(crn) = crn else { return Ok(()) };
                let f = |v: &[u64]| match which {
                    0 => v[0],
                    1 => v[0].min(1),
                    _ => 2 * v[0],
                };
                let verdict = stably_computes(
                    &crn,
                    &f,
                    &[x],
                    Caps {
                        max_configs: 5_000,
                        max_count: 64,
                    },
                )
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
                if verdict.status == Status::Refuted {
                    refutations.set(refutations.get() + 1);
                    let trace = verdict.witness.expect("refutation carries a trace");
                    let end = replay(&crn, &[x], &trace).map_err(|e| TestCaseError::fail(e.to_string()))?;
                    let expected = trace
                        .last()
                        .map(|s| s.configuration.clone())
                        .unwrap_or_else(|| crn.initial_configuration(&[x]).unwrap());
                    prop_assert_eq!(end, expected);
                }
                Ok(())
            },
        )
        .map_err(|e| format!("trace replay: {e}"))?;
    let refutations = refutations.get();
    ensure!(refutations > 100, "only {refutations} refutations exercised");
    println!("    4 suites x 1000 cases; {refutations} refutation traces replayed");
    Ok(())
}

fn scaling() -> Outcome {
    let spec = roof_spec();
    let got: BTreeSet<Vec<Rational>> = spec.scaling_limit().into_iter().collect();
    let want: BTreeSet<Vec<Rational>> = [
        vec![Rational::integer(1), Rational::integer(0)],
        vec![Rational::integer(0), Rational::integer(1)],
        vec![Rational::new(1, 2), Rational::new(1, 2)],
    ]
    .into_iter()
    .collect();
    ensure!(got == want, "scaling limit {got:?}");

    let c = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z: Vec<Rational> = (0..2)
            .map(|_| Rational::new(rng.gen_range(0..50), rng.gen_range(1..10)))
            .collect();
        let mut best: Option<Rational> = None;
        for g in spec.pieces() {
            let dot: Rational = g.gradient().iter().zip(&z).map(|(a, b)| *a * *b).sum();
            let sampled = scaled_sample(g, &z, c).map_err(|e| e.to_string())?;
            worst = worst.max(to_f64((sampled - dot).abs()));
            best = Some(best.map_or(dot, |b| if dot < b { dot } else { b }));
        }
        let whole = scaled_spec_sample(&spec, &z, c).map_err(|e| e.to_string())?;
        worst = worst.max(to_f64((whole - best.unwrap()).abs()));
    }
    ensure!(worst < 1e-3, "max deviation {worst}");
    println!("    max deviation at c = {c}: {worst:.2e}");
    Ok(())
}

fn to_f64(r: Rational) -> f64 {
    r.numer() as f64 / r.denom() as f64
}

fn simulation_echo() -> Outcome {
    let seeds: Vec<u64> = (0..100).collect();
    let mut pairs = 0;
    let mut worst = 1.0f64;
    for case in corpus() {
        for x in oblivious_crn::verifier::window_points(&case.window) {
            let st = convergence_stats(&case.crn, &x, &case.f, &seeds, 100_000).map_err(|e| e.to_string())?;
            worst = worst.min(st.correct_fraction());
            ensure!(
                st.correct_fraction() >= 0.99,
                "{} at {x:?}: {}/{} correct, failures {:?}",
                case.name,
                st.correct,
                st.runs,
                &st.failures[..st.failures.len().min(5)]
            );
            pairs += 1;
        }
    }
    println!("    {pairs} (network, input) pairs x 100 seeds; lowest correct fraction {worst:.2}");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 hand-written networks", figure_one, 5),
        ("2 quilt-affine construction", quilt_construction, 10),
        ("3 general construction", general_construction, 60),
        ("4 impossibility echoes", impossibility, 5),
        ("5 one-dimensional constructions", one_dimensional, 30),
        ("6 composition", composition, 10),
        ("7 property suites", properties, 600),
        ("8 scaling limit", scaling, 10),
        ("9 simulation echo", simulation_echo, 600),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if took > Duration::from_secs(budget) {
                Err(format!("over the {budget} s budget"))
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => println!("criterion {name}: PASS ({:.2} s)", took.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("criterion {name}: FAIL ({:.2} s): {e}", took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
