//! Output-oblivious CRN constructions: the quilt-affine leader walk, the
//! gadget library, recursive spec assembly and the 1D constructions.

mod gadgets;
mod netlist;
mod one_d;

pub use gadgets::{compile_fanout, compile_indicator, compile_min, compile_truncate, Gadget};
pub use netlist::{compile_spec, GadgetInstance, Netlist};
pub use one_d::{compile_1d, compile_1d_leaderless};

use crate::crn::{Crn, CrnBuilder, CrnError, NamedReaction};
use crate::funcspec::{FuncError, QuiltAffine, QuiltReport, SpecViolation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("quilt-affine piece fails validation: {0}")]
    InvalidQuilt(QuiltReport),
    #[error("piece takes negative value {value} at {point:?}")]
    NegativeValue { point: Vec<u64>, value: i64 },
    #[error("spec fails validation: {0}")]
    Validation(SpecViolation),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Crn(#[from] CrnError),
}

/// Name of input `i` (0-based) in a `d`-input gadget: `X` alone, else `X1..Xd`.
pub fn input_name(i: usize, d: usize) -> String {
    if d == 1 {
        "X".to_string()
    } else {
        format!("X{}", i + 1)
    }
}

fn leader_state(class: &[u64]) -> String {
    let mut s = String::from("L");
    for a in class {
        s.push('_');
        s.push_str(&a.to_string());
    }
    s
}

/// Leader walk over congruence classes: `L → g(0)Y + L_0`, then one
/// reaction `L_a + X_i → δ^i_a Y + L_{a+e_i}` per class and axis.
pub fn compile_quilt(g: &QuiltAffine) -> Result<Crn, CompileError> {
    let report = g.validate();
    if !report.is_pass() {
        return Err(CompileError::InvalidQuilt(report));
    }
    for r in g.classes() {
        let v = g.eval(&r)?;
        if v < 0 {
            return Err(CompileError::NegativeValue { point: r, value: v });
        }
    }
    let d = g.dimension();
    let p = g.period();
    let inputs: Vec<String> = (0..d).map(|i| input_name(i, d)).collect();
    let mut b = CrnBuilder::default()
        .inputs(&inputs.iter().map(String::as_str).collect::<Vec<_>>())
        .output("Y")
        .leader("L");
    let start = leader_state(&vec![0; d]);
    let g0 = g.eval(&vec![0; d])? as u64;
    add(&mut b, &[("L", 1)], &[("Y", g0), (&start, 1)])?;
    for class in g.classes() {
        let here = leader_state(&class);
        for (i, x) in inputs.iter().enumerate() {
            let delta = g.delta(&class, i)? as u64;
            let mut next = class.clone();
            next[i] = (next[i] + 1) % p;
            add(
                &mut b,
                &[(&here, 1), (x, 1)],
                &[("Y", delta), (&leader_state(&next), 1)],
            )?;
        }
    }
    Ok(b.build()?)
}

/// Add a reaction, dropping zero-count terms.
pub(crate) fn add(
    b: &mut CrnBuilder,
    reactants: &[(&str, u64)],
    products: &[(&str, u64)],
) -> Result<(), CrnError> {
    b.add_reaction(&reaction(reactants, products))
}

pub(crate) fn reaction(reactants: &[(&str, u64)], products: &[(&str, u64)]) -> NamedReaction {
    fn keep<'a>(t: &[(&'a str, u64)]) -> Vec<(&'a str, u64)> {
        t.iter().copied().filter(|&(_, k)| k > 0).collect()
    }
    NamedReaction::new(&keep(reactants), &keep(products))
}
