//! Randomized invariants beyond the acceptance suites.

use proptest::prelude::*;

use oblivious_crn::compiler::{compile_1d, compile_1d_leaderless, compile_quilt};
use oblivious_crn::crn::{Configuration, Crn, NamedReaction};
use oblivious_crn::funcspec::json::{spec_from_json, spec_to_json};
use oblivious_crn::funcspec::{
    superadditive_check, Domain1D, ObliviousSpec, Piece1D, QuiltAffine, Semilinear1D,
};
use oblivious_crn::rational::Rational;
use oblivious_crn::simulator::simulate;
use oblivious_crn::verifier::{is_stable, verify_window, Caps, ReachGraph};

const NAMES: [&str; 4] = ["X", "Y", "A", "B"];

fn random_crn() -> impl Strategy<Value = Option<Crn>> {
    let term = prop::collection::vec(0u64..3, 4);
    prop::collection::vec((term.clone(), term), 1..5).prop_map(|rs| {
        let mut b = Crn::builder().inputs(&["X"]).output("Y");
        for (re, pr) in rs {
            let pick = |v: &[u64]| -> Vec<(String, u64)> {
                v.iter()
                    .enumerate()
                    .filter(|&(_, &k)| k > 0)
                    .map(|(i, &k)| (NAMES[i].to_string(), k))
                    .collect()
            };
            let r = NamedReaction {
                reactants: pick(&re),
                products: pick(&pr),
            };
            if r.reactants.is_empty() {
                continue;
            }
            let _ = b.add_reaction(&r);
        }
        b.build().ok().filter(|c| !c.reactions().is_empty())
    })
}

fn small() -> Caps {
    Caps {
        max_configs: 1_000,
        max_count: 40,
    }
}

/// Stability by brute force: every node reachable from `v` has its output.
fn naive_stable(g: &ReachGraph, v: usize) -> bool {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![v];
    seen[v] = true;
    while let Some(u) = stack.pop() {
        if g.output(u) != g.output(v) {
            return false;
        }
        for (_, w) in g.successors(u) {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

/// Quilt-affine `c + h1(x1) + h2(x2) + floor((k1 x1 + k2 x2) / p)` where each
/// `hi` has nonnegative periodic differences `di` of period `p`.
fn quilt_from(c: i64, diffs: &[Vec<u64>], k: &[u64], p: u64) -> QuiltAffine {
    let d = diffs.len();
    let g = |x: &[u64]| -> i64 {
        let mut v = c;
        for (i, di) in diffs.iter().enumerate() {
            v += (0..x[i]).map(|t| di[(t % p) as usize] as i64).sum::<i64>();
        }
        let dot: u64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
        v + (dot / p) as i64
    };
    let gradient: Vec<Rational> = (0..d)
        .map(|i| {
            let mut e = vec![0u64; d];
            e[i] = p;
            Rational::new(g(&e) - g(&vec![0; d]), p as i64)
        })
        .collect();
    let grad = gradient.clone();
    QuiltAffine::from_fn(gradient, p, move |a| {
        let dot: Rational = grad
            .iter()
            .zip(a)
            .map(|(r, &v)| *r * Rational::integer(v as i64))
            .sum();
        Rational::integer(g(a)) - dot
    })
    .unwrap()
}

fn quilt_strategy(d: usize) -> impl Strategy<Value = QuiltAffine> {
    (1u64..4).prop_flat_map(move |p| {
        (
            0i64..3,
            prop::collection::vec(prop::collection::vec(0u64..3, p as usize), d),
            prop::collection::vec(0u64..3, d),
        )
            .prop_map(move |(c, diffs, k)| quilt_from(c, &diffs, &k, p))
    })
}

/// 1D function given by a prefix `f(0..n)` and periodic differences past `n`.
fn semilinear_from(prefix: &[u64], deltas: &[u64]) -> (Semilinear1D, impl Fn(u64) -> u64 + Clone) {
    let n = prefix.len() as u64 - 1;
    let p = deltas.len() as u64;
    let (pre, del) = (prefix.to_vec(), deltas.to_vec());
    let f = move |x: u64| -> u64 {
        if x <= n {
            pre[x as usize]
        } else {
            pre[n as usize] + (n..x).map(|t| del[((t - n) % p) as usize]).sum::<u64>()
        }
    };
    let mut pieces: Vec<Piece1D> = (0..n)
        .map(|x| {
            let dom = Domain1D {
                at_least: Some(x),
                below: Some(x + 1),
                ..Domain1D::default()
            };
            Piece1D::new(dom, Rational::zero(), Rational::integer(f(x) as i64))
        })
        .collect();
    let total: u64 = deltas.iter().sum();
    let slope = Rational::new(total as i64, p as i64);
    for r in 0..p {
        let x0 = n + r;
        let dom = Domain1D {
            at_least: Some(n),
            below: None,
            modulus: Some(p),
            residue: x0 % p,
        };
        let intercept = Rational::integer(f(x0) as i64) - slope * Rational::integer(x0 as i64);
        pieces.push(Piece1D::new(dom, slope, intercept));
    }
    (Semilinear1D::new(pieces).unwrap(), f)
}

fn eventual_strategy() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (
        prop::collection::vec(0u64..3, 1..4),
        prop::collection::vec(0u64..3, 1..4),
    )
        .prop_map(|(steps, deltas)| {
            let mut prefix = vec![steps[0]];
            for s in &steps[1..] {
                prefix.push(prefix.last().unwrap() + s);
            }
            (prefix, deltas)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scc_stability_matches_brute_force(crn in random_crn(), x in 0u64..4) {
        let Some(crn) = crn else { return Ok(()) };
        let g = ReachGraph::explore(&crn, &crn.initial_configuration(&[x]).unwrap(), small());
        let Some(a) = g.analyze() else { return Ok(()) };
        prop_assert!(g.len() <= 1_000);
        for v in 0..g.len() {
            prop_assert_eq!(a.is_stable(v), naive_stable(&g, v), "node {} of {}", v, crn);
        }
    }

    #[test]
    fn converged_terminals_are_stable(crn in random_crn(), x in 0u64..6, seed in any::<u64>()) {
        let Some(crn) = crn else { return Ok(()) };
        let t = simulate(&crn, &[x], seed, 500).unwrap();
        if t.converged {
            prop_assert_eq!(is_stable(&crn, &t.terminal, small()), Some(true));
        }
        let replayed = t.steps.iter().try_fold(crn.initial_configuration(&[x]).unwrap(), |c, &(r, y)| {
            let next = oblivious_crn::crn::apply(&c, &crn.reactions()[r]).ok()?;
            (crn.output_count(&next) == y).then_some(next)
        });
        prop_assert_eq!(replayed, Some(t.terminal.clone()));
    }

    #[test]
    fn quilt_construction_verifies(g in prop_oneof![quilt_strategy(1), quilt_strategy(2)]) {
        prop_assert!(g.validate().is_pass());
        let crn = compile_quilt(&g).unwrap();
        let d = g.dimension();
        let p = g.period() as usize;
        prop_assert_eq!(crn.reactions().len(), 1 + d * p.pow(d as u32));
        let window = vec![if d == 1 { 8 } else { 3 }; d];
        let report = verify_window(&crn, &|x| g.eval(x).unwrap() as u64, &window, small()).unwrap();
        prop_assert!(report.all_verified(), "{}", report.summary());
    }

    #[test]
    fn one_dimensional_constructions_verify((prefix, deltas) in eventual_strategy()) {
        let (f, eval) = semilinear_from(&prefix, &deltas);
        for x in 0..20 {
            prop_assert_eq!(f.eval(x), eval(x));
        }
        let window = [prefix.len() as u64 + 2 * deltas.len() as u64 + 1];
        let crn = compile_1d(&f).unwrap();
        let report = verify_window(&crn, &|x| eval(x[0]), &window, Caps::default()).unwrap();
        prop_assert!(report.all_verified(), "{}", report.summary());

        let superadditive = eval(0) == 0 && superadditive_check(&eval, 40).is_none();
        match compile_1d_leaderless(&f, 40) {
            Ok(crn) => {
                prop_assert!(superadditive);
                let report = verify_window(&crn, &|x| eval(x[0]), &[window[0].min(7)], Caps::default()).unwrap();
                prop_assert!(report.all_verified(), "{}", report.summary());
            }
            Err(_) => prop_assert!(!superadditive),
        }
    }

    #[test]
    fn spec_json_round_trips(gs in prop::collection::vec(quilt_strategy(2), 1..4)) {
        let s = ObliviousSpec::eventually_min(gs).unwrap();
        let back = spec_from_json(&spec_to_json(&s)).unwrap();
        prop_assert_eq!(&back, &s);
        for x in s.window_points(3) {
            prop_assert_eq!(back.eval(&x).unwrap(), s.eval(&x).unwrap());
        }
    }

    #[test]
    fn reachability_is_additive_on_configurations(crn in random_crn(), extra in prop::collection::vec(0u64..3, 4), x in 0u64..3) {
        let Some(crn) = crn else { return Ok(()) };
        let c0 = crn.initial_configuration(&[x]).unwrap();
        let mut pad = Configuration::zero(crn.species().len());
        for (s, &k) in extra.iter().enumerate().take(crn.species().len()) {
            pad.set(s, k);
        }
        let small_g = ReachGraph::explore(&crn, &c0, Caps { max_configs: 200, max_count: 30 });
        let big_g = ReachGraph::explore(&crn, &c0.add(&pad), Caps { max_configs: 100_000, max_count: 40 });
        if big_g.is_capped() {
            return Ok(());
        }
        for v in 0..small_g.expanded().min(small_g.len()) {
            prop_assert!(big_g.index_of(&small_g.configuration(v).add(&pad)).is_some());
        }
    }
}
