#![allow(dead_code)]

use oblivious_crn::builtins::{builtin_1d, builtin_function, min1_spec, roof_spec};
use oblivious_crn::compiler::{compile_1d, compile_1d_leaderless, compile_quilt, compile_spec};
use oblivious_crn::crn::{concatenate, parse_crn, Crn};
use oblivious_crn::funcspec::QuiltAffine;
use oblivious_crn::rational::Rational;

pub type Func = Box<dyn Fn(&[u64]) -> u64 + Sync + Send>;

/// A network, the function it should compute, and the window it is
/// checked on.
pub struct Case {
    pub name: &'static str,
    pub crn: Crn,
    pub f: Func,
    pub window: Vec<u64>,
}

pub fn crn(text: &str) -> Crn {
    parse_crn(text).expect("fixture CRN parses")
}

pub fn builtin(name: &str) -> Func {
    let b = builtin_function(name).unwrap();
    Box::new(move |x| b.call(x))
}

pub fn double_crn() -> Crn {
    crn("inputs: X\noutput: Y\nX -> 2 Y\n")
}

pub fn min_crn() -> Crn {
    crn("inputs: X1 X2\noutput: Y\nX1 + X2 -> Y\n")
}

pub fn max_crn() -> Crn {
    crn("inputs: X1 X2\noutput: Y\nX1 -> Z1 + Y\nX2 -> Z2 + Y\nZ1 + Z2 -> K\nK + Y -> 0\n")
}

pub fn naive_max_crn() -> Crn {
    crn("inputs: X1 X2\noutput: Y\nX1 -> Y\nX2 -> Y\n")
}

pub fn min1_leaderless_crn() -> Crn {
    crn("inputs: X\noutput: Y\nX -> Y\n2 Y -> Y\n")
}

pub fn min1_leader_crn() -> Crn {
    crn("inputs: X\noutput: Y\nleader: L\nL + X -> Y\n")
}

/// Uses `Y` as a catalyst: the leader seeds one output, which then
/// converts every remaining input. Computes the identity.
pub fn catalytic_identity_crn() -> Crn {
    crn("inputs: X\noutput: Y\nleader: L\nL + X -> Y\nX + Y -> 2 Y\n")
}

pub fn ceil_half_sum() -> QuiltAffine {
    QuiltAffine::ceil_of_linear(vec![Rational::new(1, 2), Rational::new(1, 2)]).unwrap()
}

pub fn floor_three_halves() -> QuiltAffine {
    QuiltAffine::floor_of_linear(vec![Rational::new(3, 2)]).unwrap()
}

/// Every network the acceptance criteria verify, with its window.
pub fn corpus() -> Vec<Case> {
    let case = |name, crn, f, window: &[u64]| Case {
        name,
        crn,
        f,
        window: window.to_vec(),
    };
    let doubled = crn("inputs: W\noutput: Y\nW -> 2 Y\n");
    let ceil = ceil_half_sum();
    vec![
        case("fig1-2x", double_crn(), builtin("double"), &[8]),
        case("fig1-min", min_crn(), builtin("min"), &[4, 4]),
        case("fig1-max", max_crn(), builtin("max"), &[4, 4]),
        case(
            "min1-leaderless-nonoblivious",
            min1_leaderless_crn(),
            builtin("min1"),
            &[8],
        ),
        case("min1-leader", min1_leader_crn(), builtin("min1"), &[8]),
        case(
            "quilt-floor3x2",
            compile_quilt(&floor_three_halves()).unwrap(),
            builtin("floor3x2"),
            &[12],
        ),
        case(
            "quilt-ceil-half-sum",
            compile_quilt(&ceil).unwrap(),
            Box::new(move |x| ceil.eval(x).unwrap() as u64),
            &[6, 6],
        ),
        case(
            "spec-min1",
            compile_spec(&min1_spec()).unwrap(),
            builtin("min1"),
            &[6],
        ),
        case(
            "spec-roof",
            compile_spec(&roof_spec()).unwrap(),
            builtin("roof"),
            &[4, 4],
        ),
        case(
            "1d-min1",
            compile_1d(&builtin_1d("min1").unwrap()).unwrap(),
            builtin("min1"),
            &[10],
        ),
        case(
            "1d-floor3x2",
            compile_1d(&builtin_1d("floor3x2").unwrap()).unwrap(),
            builtin("floor3x2"),
            &[10],
        ),
        case(
            "1d-leaderless-2x",
            compile_1d_leaderless(&builtin_1d("double").unwrap(), 16).unwrap(),
            builtin("double"),
            &[8],
        ),
        case(
            "1d-leaderless-floor3x2",
            compile_1d_leaderless(&builtin_1d("floor3x2").unwrap(), 16).unwrap(),
            builtin("floor3x2"),
            &[8],
        ),
        case(
            "concat-min-double",
            concatenate(&min_crn(), &doubled).unwrap(),
            Box::new(|x| 2 * x[0].min(x[1])),
            &[3, 3],
        ),
        case(
            "concat-catalytic-double",
            concatenate(
                &catalytic_identity_crn().monotonic_to_oblivious().unwrap(),
                &doubled,
            )
            .unwrap(),
            Box::new(|x| 2 * x[0]),
            &[8],
        ),
    ]
}
