//! Seeded stochastic execution under a uniform serial scheduler.
//!
//! Each step picks uniformly among the applicable reaction *types* (not
//! propensity-weighted). Results do not depend on kinetics, so any fair
//! scheduler serves; this is the simplest one.

use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::crn::{applicable, apply, Configuration, Crn, CrnError};
use crate::verifier::Evaluator;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub seed: u64,
    /// `(reaction index, output count after firing)` per step.
    pub steps: Vec<(usize, u64)>,
    pub terminal: Configuration,
    /// No reaction was applicable when the run ended.
    pub converged: bool,
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,reaction_index,Y_count\n");
        for (i, (r, y)) in self.steps.iter().enumerate() {
            let _ = writeln!(s, "{},{r},{y}", i + 1);
        }
        s
    }
}

pub fn simulate(crn: &Crn, x: &[u64], seed: u64, max_steps: u64) -> Result<Trace, CrnError> {
    let mut c = crn.initial_configuration(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = Vec::new();
    let mut enabled = Vec::with_capacity(crn.reactions().len());
    let mut converged = false;
    while (steps.len() as u64) < max_steps {
        enabled.clear();
        enabled.extend((0..crn.reactions().len()).filter(|&i| applicable(&c, &crn.reactions()[i])));
        if enabled.is_empty() {
            converged = true;
            break;
        }
        let r = enabled[rng.gen_range(0..enabled.len())];
        c = apply(&c, &crn.reactions()[r])?;
        steps.push((r, crn.output_count(&c)));
    }
    if !converged {
        converged = crn.reactions().iter().all(|r| !applicable(&c, r));
    }
    Ok(Trace {
        seed,
        steps,
        terminal: c,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStats {
    pub runs: usize,
    pub converged: usize,
    /// Converged with output equal to `f(x)`.
    pub correct: usize,
    pub target: u64,
    pub mean_steps: f64,
    pub max_steps: usize,
    /// Terminal outputs of incorrect runs, `(seed, Y)`.
    pub failures: Vec<(u64, u64)>,
}

impl ConvergenceStats {
    pub fn correct_fraction(&self) -> f64 {
        if self.runs == 0 {
            return 1.0;
        }
        self.correct as f64 / self.runs as f64
    }
}

pub fn convergence_stats(
    crn: &Crn,
    x: &[u64],
    f: Evaluator<'_>,
    seeds: &[u64],
    max_steps: u64,
) -> Result<ConvergenceStats, CrnError> {
    let target = f(x);
    let traces: Vec<Trace> = seeds
        .par_iter()
        .map(|&s| simulate(crn, x, s, max_steps))
        .collect::<Result<_, _>>()?;
    let mut stats = ConvergenceStats {
        runs: traces.len(),
        converged: 0,
        correct: 0,
        target,
        mean_steps: 0.0,
        max_steps: 0,
        failures: Vec::new(),
    };
    let mut total = 0usize;
    for t in &traces {
        let y = crn.output_count(&t.terminal);
        total += t.steps.len();
        stats.max_steps = stats.max_steps.max(t.steps.len());
        if t.converged {
            stats.converged += 1;
        }
        if t.converged && y == target {
            stats.correct += 1;
        } else {
            stats.failures.push((t.seed, y));
        }
    }
    if !traces.is_empty() {
        stats.mean_steps = total as f64 / traces.len() as f64;
    }
    Ok(stats)
}

/// Output trajectories as gnuplot data blocks, one indexed block per
/// trace: `plot 'f' index 0 with steps`.
pub fn gnuplot_data(crn: &Crn, x: &[u64], traces: &[Trace]) -> String {
    let mut s = String::new();
    for (k, t) in traces.iter().enumerate() {
        if k > 0 {
            s.push_str("\n\n");
        }
        let y0 = crn
            .initial_configuration(x)
            .map(|c| crn.output_count(&c))
            .unwrap_or(0);
        let _ = writeln!(s, "# seed {}", t.seed);
        let _ = writeln!(s, "0 {y0}");
        for (i, (_, y)) in t.steps.iter().enumerate() {
            let _ = writeln!(s, "{} {y}", i + 1);
        }
    }
    s
}
