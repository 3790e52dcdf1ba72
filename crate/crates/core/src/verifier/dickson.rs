//! Bounded search for a decreasing-difference chain.
//!
//! A function computed by an output-oblivious CRN admits no infinite
//! sequence `a_1 ≤ a_2 ≤ ...` with displacements `Δ_ij` such that
//! `f(a_i + Δ_ij) − f(a_i) > f(a_j + Δ_ij) − f(a_j)` for all `i < j`. A
//! finite search cannot exhibit an infinite sequence, so this looks for
//! the arithmetic families `a_i = base + i·step`, `Δ_j = delta_base +
//! j·delta_step` and requires the inequality on every pair of a chain of
//! length `2·bound + 2`. A hit is evidence, not proof: the family might
//! break beyond the checked chain. Single pairs are far too weak a signal
//! (even `min` has violating pairs), which is why whole chains are checked.

use rayon::prelude::*;
use serde::Serialize;

use super::Evaluator;
use crate::funcspec::Classes;

/// The arithmetic family a witness belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DicksonFamily {
    pub base: Vec<u64>,
    pub step: Vec<u64>,
    pub delta_base: Vec<u64>,
    pub delta_step: Vec<u64>,
    /// Largest chain index checked; pairs `0 ≤ i < j ≤ chain_length`.
    pub chain_length: u64,
}

/// One violating pair of the chain, `f(a+Δ) − f(a) = lhs > rhs = f(b+Δ) − f(b)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DicksonWitness {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub delta: Vec<u64>,
    pub lhs: i64,
    pub rhs: i64,
    pub family: DicksonFamily,
}

const TABLE_LIMIT: usize = 1 << 22;

/// Search all families with `base, step, delta_base, delta_step` in
/// `[0, bound]^d` (step nonzero), the first axis varying fastest. Returns
/// the first family whose whole chain violates difference monotonicity.
pub fn dickson_search(f: Evaluator<'_>, d: usize, bound: u64) -> Option<DicksonWitness> {
    let chain = 2 * bound + 1;
    let reach = 2 * bound * (chain + 1);
    let side = reach as usize + 1;
    let table: Option<Vec<u64>> = side.checked_pow(d as u32).filter(|&n| n <= TABLE_LIMIT).map(|n| {
        (0..n)
            .into_par_iter()
            .map(|idx| f(&unflatten(idx, side, d)))
            .collect()
    });
    let eval = |x: &[u64]| -> i64 {
        match &table {
            Some(t) => t[flatten(x, side)] as i64,
            None => f(x) as i64,
        }
    };

    let points: Vec<Vec<u64>> = colex(d, bound);
    points.par_iter().find_map_first(|base| {
        for step in points.iter().filter(|s| s.iter().any(|&v| v > 0)) {
            for delta_base in &points {
                for delta_step in &points {
                    let family = DicksonFamily {
                        base: base.clone(),
                        step: step.clone(),
                        delta_base: delta_base.clone(),
                        delta_step: delta_step.clone(),
                        chain_length: chain,
                    };
                    if chain_violates(&family, &eval) {
                        let a = point(&family.base, &family.step, 0);
                        let b = point(&family.base, &family.step, 1);
                        let delta = point(&family.delta_base, &family.delta_step, 1);
                        let lhs = eval(&add(&a, &delta)) - eval(&a);
                        let rhs = eval(&add(&b, &delta)) - eval(&b);
                        return Some(DicksonWitness {
                            a,
                            b,
                            delta,
                            lhs,
                            rhs,
                            family,
                        });
                    }
                }
            }
        }
        None
    })
}

fn chain_violates(fam: &DicksonFamily, eval: &dyn Fn(&[u64]) -> i64) -> bool {
    for j in 1..=fam.chain_length {
        let aj = point(&fam.base, &fam.step, j);
        let delta = point(&fam.delta_base, &fam.delta_step, j);
        let rhs = eval(&add(&aj, &delta)) - eval(&aj);
        for i in 0..j {
            let ai = point(&fam.base, &fam.step, i);
            let lhs = eval(&add(&ai, &delta)) - eval(&ai);
            if lhs <= rhs {
                return false;
            }
        }
    }
    true
}

fn point(base: &[u64], step: &[u64], k: u64) -> Vec<u64> {
    base.iter().zip(step).map(|(&b, &s)| b + k * s).collect()
}

fn add(x: &[u64], y: &[u64]) -> Vec<u64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// `[0, bound]^d` with the first coordinate varying fastest.
fn colex(d: usize, bound: u64) -> Vec<Vec<u64>> {
    Classes::new(d, bound + 1)
        .map(|mut p| {
            p.reverse();
            p
        })
        .collect()
}

fn flatten(x: &[u64], side: usize) -> usize {
    x.iter().fold(0, |acc, &v| acc * side + v as usize)
}

fn unflatten(mut idx: usize, side: usize, d: usize) -> Vec<u64> {
    let mut x = vec![0u64; d];
    for slot in x.iter_mut().rev() {
        *slot = (idx % side) as u64;
        idx /= side;
    }
    x
}
