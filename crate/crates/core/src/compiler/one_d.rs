use super::{add, CompileError};
use crate::crn::{Crn, CrnBuilder};
use crate::funcspec::{extract_eventual_1d, superadditive_check, Eventual1DForm, FuncError, Semilinear1D};

fn form_for(f: &Semilinear1D) -> Result<Eventual1DForm, CompileError> {
    Ok(extract_eventual_1d(f)?.minimal_seam().normalized())
}

fn lstate(i: u64) -> String {
    format!("L_{i}")
}

fn pstate(a: u64) -> String {
    format!("P_{a}")
}

/// Leader counts the first `n` inputs through `L_0..L_{n-1}`, then walks
/// the periodic states `P_0..P_{p-1}`, emitting each finite difference.
/// The seam `n` is the smallest one past which differences are periodic,
/// rounded up to a multiple of `p`.
pub fn compile_1d(f: &Semilinear1D) -> Result<Crn, CompileError> {
    let e = form_for(f)?;
    let (n, p) = (e.n, e.p);
    let fv = |x: u64| e.eval(x);
    let mut b = CrnBuilder::default().inputs(&["X"]).output("Y").leader("L");
    if n == 0 {
        add(&mut b, &[("L", 1)], &[("Y", fv(0)), (&pstate(0), 1)])?;
    } else {
        add(&mut b, &[("L", 1)], &[("Y", fv(0)), (&lstate(0), 1)])?;
        for i in 0..n {
            let next = if i + 1 < n { lstate(i + 1) } else { pstate(n % p) };
            add(
                &mut b,
                &[(&lstate(i), 1), ("X", 1)],
                &[("Y", fv(i + 1) - fv(i)), (&next, 1)],
            )?;
        }
    }
    for a in 0..p {
        add(
            &mut b,
            &[(&pstate(a), 1), ("X", 1)],
            &[("Y", e.deltas[a as usize]), (&pstate((a + 1) % p), 1)],
        )?;
    }
    let crn = b.build()?;
    assert!(crn.is_output_oblivious());
    Ok(crn)
}

/// Leaderless construction for superadditive `f` with `f(0) = 0`: every
/// input becomes a state worth one, and states merge pairwise while
/// emitting the corrective difference `f(i+j) − f(i) − f(j)`.
///
/// Superadditivity is checked on `[0, max(check_bound, 2(n+p))]`.
pub fn compile_1d_leaderless(f: &Semilinear1D, check_bound: u64) -> Result<Crn, CompileError> {
    let f0 = f.eval(0);
    if f0 != 0 {
        return Err(FuncError::NonzeroAtOrigin(f0).into());
    }
    let e = form_for(f)?;
    let (n, p) = (e.n, e.p);
    let bound = check_bound.max(2 * (n + p));
    if let Some((x, z)) = superadditive_check(&|x| f.eval(x), bound) {
        return Err(FuncError::NotSuperadditive { x, z }.into());
    }
    let fv = |x: u64| e.eval(x) as i64;
    let state = |c: u64| if c < n { lstate(c) } else { pstate(c % p) };
    let corrective = |d: i64, x: u64, z: u64| -> Result<u64, CompileError> {
        u64::try_from(d).map_err(|_| FuncError::NotSuperadditive { x, z }.into())
    };

    let mut b = CrnBuilder::default().inputs(&["X"]).output("Y");
    add(&mut b, &[("X", 1)], &[("Y", fv(1) as u64), (&state(1), 1)])?;
    for i in 1..n {
        for j in i..n {
            let d = corrective(fv(i + j) - fv(i) - fv(j), i, j)?;
            add(
                &mut b,
                &[(&lstate(i), 1), (&lstate(j), 1)],
                &[("Y", d), (&state(i + j), 1)],
            )?;
        }
        for a in 0..p {
            let d = corrective(fv(i + n + a) - fv(i) - fv(n + a), i, n + a)?;
            add(
                &mut b,
                &[(&lstate(i), 1), (&pstate(a), 1)],
                &[("Y", d), (&pstate((i + a) % p), 1)],
            )?;
        }
    }
    for a in 0..p {
        for c in a..p {
            let d = corrective(fv(2 * n + a + c) - fv(n + a) - fv(n + c), n + a, n + c)?;
            add(
                &mut b,
                &[(&pstate(a), 1), (&pstate(c), 1)],
                &[("Y", d), (&pstate((a + c) % p), 1)],
            )?;
        }
    }
    // sequential steps, not needed for correctness but they shorten runs
    for i in 1..n {
        add(
            &mut b,
            &[(&lstate(i), 1), ("X", 1)],
            &[("Y", (fv(i + 1) - fv(i)) as u64), (&state(i + 1), 1)],
        )?;
    }
    for a in 0..p {
        add(
            &mut b,
            &[(&pstate(a), 1), ("X", 1)],
            &[("Y", e.deltas[a as usize]), (&pstate((a + 1) % p), 1)],
        )?;
    }
    let crn = b.build()?;
    assert!(crn.is_output_oblivious() && crn.leader().is_none());
    Ok(crn)
}
