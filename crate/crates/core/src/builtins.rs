//! Named reference functions, specs and 1D forms used by the CLI and tests.

use thiserror::Error;

use crate::funcspec::{Domain1D, ObliviousSpec, Piece1D, QuiltAffine, Restriction, Semilinear1D};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown builtin `{0}` (known: {known})", known = BUILTIN_NAMES.join(", "))]
pub struct UnknownBuiltin(pub String);

pub const BUILTIN_NAMES: &[&str] = &[
    "max",
    "min",
    "depressed-strip",
    "roof",
    "min1",
    "floor3x2",
    "double",
];

#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    /// `None` when the function accepts any dimension.
    pub dimension: Option<usize>,
    pub eval: EvalFn,
}

pub type EvalFn = fn(&[u64]) -> u64;

impl Builtin {
    pub fn call(&self, x: &[u64]) -> u64 {
        (self.eval)(x)
    }
}

fn max(x: &[u64]) -> u64 {
    x.iter().copied().max().unwrap_or(0)
}

fn min(x: &[u64]) -> u64 {
    x.iter().copied().min().unwrap_or(0)
}

fn depressed_strip(x: &[u64]) -> u64 {
    x[0] + x[1] + u64::from(x[0] != x[1])
}

fn roof(x: &[u64]) -> u64 {
    use std::cmp::Ordering::*;
    match x[0].cmp(&x[1]) {
        Less => x[0] + 1,
        Greater => x[1] + 1,
        Equal => x[0],
    }
}

fn min1(x: &[u64]) -> u64 {
    x[0].min(1)
}

fn floor3x2(x: &[u64]) -> u64 {
    3 * x[0] / 2
}

fn double(x: &[u64]) -> u64 {
    2 * x[0]
}

pub fn builtin_function(name: &str) -> Result<Builtin, UnknownBuiltin> {
    let (name, dimension, eval): (&'static str, Option<usize>, EvalFn) = match name {
        "max" => ("max", None, max),
        "min" => ("min", None, min),
        "depressed-strip" => ("depressed-strip", Some(2), depressed_strip),
        "roof" => ("roof", Some(2), roof),
        "min1" => ("min1", Some(1), min1),
        "floor3x2" => ("floor3x2", Some(1), floor3x2),
        "double" => ("double", Some(1), double),
        other => return Err(UnknownBuiltin(other.to_string())),
    };
    Ok(Builtin {
        name,
        dimension,
        eval,
    })
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn affine(gradient: &[i64], c: i64) -> QuiltAffine {
    QuiltAffine::new(
        gradient.iter().map(|&g| Rational::integer(g)).collect(),
        1,
        vec![Rational::integer(c)],
    )
    .expect("affine piece")
}

/// `min(x1 + 1, x2 + 1, ceil((x1 + x2) / 2))`.
pub fn roof_spec() -> ObliviousSpec {
    ObliviousSpec::eventually_min(vec![
        affine(&[1, 0], 1),
        affine(&[0, 1], 1),
        QuiltAffine::ceil_of_linear(vec![r(1, 2), r(1, 2)]).expect("ceil piece"),
    ])
    .expect("roof spec")
}

/// `1` past the floor, `0` on the restriction `x = 0`.
pub fn min1_spec() -> ObliviousSpec {
    let zero = ObliviousSpec::new(1, vec![0], vec![QuiltAffine::constant(1, 0)], vec![]).expect("zero");
    ObliviousSpec::new(
        1,
        vec![1],
        vec![QuiltAffine::constant(1, 1)],
        vec![Restriction {
            axis: 0,
            value: 0,
            spec: zero,
        }],
    )
    .expect("min1 spec")
}

pub fn builtin_spec(name: &str) -> Result<ObliviousSpec, UnknownBuiltin> {
    match name {
        "roof" => Ok(roof_spec()),
        "min1" => Ok(min1_spec()),
        other => Err(UnknownBuiltin(other.to_string())),
    }
}

pub fn builtin_1d(name: &str) -> Result<Semilinear1D, UnknownBuiltin> {
    let pieces = match name {
        "min1" => vec![
            Piece1D::new(Domain1D::below(1), r(0, 1), r(0, 1)),
            Piece1D::new(Domain1D::at_least(1), r(0, 1), r(1, 1)),
        ],
        "floor3x2" => vec![
            Piece1D::new(Domain1D::congruent(0, 2), r(3, 2), r(0, 1)),
            Piece1D::new(Domain1D::congruent(1, 2), r(3, 2), r(-1, 2)),
        ],
        "double" => vec![Piece1D::new(Domain1D::all(), r(2, 1), r(0, 1))],
        other => return Err(UnknownBuiltin(other.to_string())),
    };
    Ok(Semilinear1D::new(pieces).expect("builtin 1D function"))
}
