//! Exhaustive, capped reachability checks of stable computation.

mod dickson;
mod graph;

pub use dickson::{dickson_search, DicksonFamily, DicksonWitness};
pub use graph::{Analysis, CapHit, Caps, ReachGraph, CAPS_ENV};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::crn::{apply, Configuration, Crn, CrnError};

/// A function to check a network against.
pub type Evaluator<'a> = &'a (dyn Fn(&[u64]) -> u64 + Sync);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Crn(#[from] CrnError),
    #[error("exploration capped after {graph_size} configurations ({hit})")]
    Capped { graph_size: usize, hit: CapHit },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Refuted,
    Capped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub reaction: usize,
    pub configuration: Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Vec<TraceStep>>,
    pub detail: String,
    pub graph_size: usize,
}

impl Verdict {
    /// `fire: <reaction> => <configuration>` per step.
    pub fn witness_lines(&self, crn: &Crn) -> Vec<String> {
        self.witness
            .as_deref()
            .map(|t| trace_lines(crn, t))
            .unwrap_or_default()
    }

    pub fn to_json(&self, crn: &Crn) -> serde_json::Value {
        json!({
            "status": self.status,
            "witness": self.witness.as_ref().map(|_| self.witness_lines(crn)),
            "detail": self.detail,
            "graph_size": self.graph_size,
        })
    }
}

pub fn trace_lines(crn: &Crn, trace: &[TraceStep]) -> Vec<String> {
    trace
        .iter()
        .map(|s| {
            format!(
                "fire: {} => {}",
                crn.format_reaction(&crn.reactions()[s.reaction]),
                crn.format_configuration(&s.configuration)
            )
        })
        .collect()
}

/// Fold `apply` over a trace from the initial configuration of `x`,
/// checking every intermediate configuration.
pub fn replay(crn: &Crn, x: &[u64], trace: &[TraceStep]) -> Result<Configuration, CrnError> {
    let mut c = crn.initial_configuration(x)?;
    for step in trace {
        c = apply(&c, &crn.reactions()[step.reaction])?;
        if c != step.configuration {
            return Err(CrnError::NotApplicable {
                reaction: crn.format_reaction(&crn.reactions()[step.reaction]),
            });
        }
    }
    Ok(c)
}

pub fn reachable(crn: &Crn, c0: &Configuration, caps: Caps) -> ReachGraph {
    ReachGraph::explore(crn, c0, caps)
}

/// Whether every configuration reachable from `c` has the output count of
/// `c`. `None` when exploration was capped before a counterexample.
pub fn is_stable(crn: &Crn, c: &Configuration, caps: Caps) -> Option<bool> {
    let g = reachable(crn, c, caps);
    let y = g.output(0);
    if (0..g.len()).any(|v| g.output(v) != y) {
        return Some(false);
    }
    (!g.is_capped()).then_some(true)
}

/// Per-node stability: the output is constant on everything reachable.
/// `None` for a capped graph.
pub fn stable_nodes(g: &ReachGraph) -> Option<Vec<bool>> {
    let a = g.analyze()?;
    Some((0..g.len()).map(|v| a.is_stable(v)).collect())
}

pub fn stably_computes(crn: &Crn, f: Evaluator<'_>, x: &[u64], caps: Caps) -> Result<Verdict, CrnError> {
    let c0 = crn.initial_configuration(x)?;
    let target = f(x);
    let g = reachable(crn, &c0, caps);
    Ok(judge(crn, &g, target))
}

fn judge(crn: &Crn, g: &ReachGraph, target: u64) -> Verdict {
    let size = g.len();
    if crn.is_output_oblivious() {
        if let Some(v) = (0..size).find(|&v| g.output(v) > target) {
            return Verdict {
                status: Status::Refuted,
                witness: Some(g.trace_to(v)),
                detail: format!(
                    "output reaches {} > {target}; an output-oblivious network cannot retract it",
                    g.output(v)
                ),
                graph_size: size,
            };
        }
    }
    let Some(a) = g.analyze() else {
        let hit = g.cap_hit().expect("capped");
        return Verdict {
            status: Status::Capped,
            witness: None,
            detail: format!("exploration capped after {size} configurations ({hit})"),
            graph_size: size,
        };
    };
    let good = a.reaches_correct_stable(target);
    match (0..size).find(|&v| !good[v]) {
        None => Verdict {
            status: Status::Verified,
            witness: None,
            detail: format!("every reachable configuration can reach a stable one with output {target}"),
            graph_size: size,
        },
        Some(v) => Verdict {
            status: Status::Refuted,
            witness: Some(g.trace_to(v)),
            detail: format!(
                "no stable configuration with output {target} is reachable from the last configuration"
            ),
            graph_size: size,
        },
    }
}

/// Shortest trace (by BFS) to an output above `f(x)`, if any.
pub fn overproduction_witness(
    crn: &Crn,
    f: Evaluator<'_>,
    x: &[u64],
    caps: Caps,
) -> Result<Option<Vec<TraceStep>>, VerifyError> {
    let c0 = crn.initial_configuration(x)?;
    let target = f(x);
    let g = reachable(crn, &c0, caps);
    if let Some(v) = (0..g.len()).find(|&v| g.output(v) > target) {
        return Ok(Some(g.trace_to(v)));
    }
    match g.cap_hit() {
        Some(hit) => Err(VerifyError::Capped {
            graph_size: g.len(),
            hit,
        }),
        None => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowEntry {
    pub input: Vec<u64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowReport {
    pub entries: Vec<WindowEntry>,
}

impl WindowReport {
    fn count(&self, s: Status) -> usize {
        self.entries.iter().filter(|e| e.verdict.status == s).count()
    }

    pub fn verified(&self) -> usize {
        self.count(Status::Verified)
    }

    pub fn refuted(&self) -> usize {
        self.count(Status::Refuted)
    }

    pub fn capped(&self) -> usize {
        self.count(Status::Capped)
    }

    pub fn all_verified(&self) -> bool {
        self.verified() == self.entries.len()
    }

    /// Refuted beats capped beats verified.
    pub fn status(&self) -> Status {
        if self.refuted() > 0 {
            Status::Refuted
        } else if self.capped() > 0 {
            Status::Capped
        } else {
            Status::Verified
        }
    }

    pub fn max_graph_size(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.verdict.graph_size)
            .max()
            .unwrap_or(0)
    }

    pub fn first_failure(&self) -> Option<&WindowEntry> {
        self.entries
            .iter()
            .find(|e| e.verdict.status == Status::Refuted)
            .or_else(|| self.entries.iter().find(|e| e.verdict.status == Status::Capped))
    }

    pub fn summary(&self) -> String {
        let n = self.entries.len();
        if self.all_verified() {
            format!("all {n} inputs verified")
        } else {
            format!(
                "{} of {n} inputs verified, {} refuted, {} capped",
                self.verified(),
                self.refuted(),
                self.capped()
            )
        }
    }

    pub fn to_json(&self, crn: &Crn) -> serde_json::Value {
        json!({
            "status": self.status(),
            "summary": self.summary(),
            "max_graph_size": self.max_graph_size(),
            "inputs": self.entries.iter().map(|e| {
                let mut v = e.verdict.to_json(crn);
                v["input"] = json!(e.input);
                v
            }).collect::<Vec<_>>(),
        })
    }
}

/// All points of the box `[0, window[0]] × ... × [0, window[d-1]]`, first
/// axis most significant.
pub fn window_points(window: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &w in window {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=w).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// `stably_computes` on every point of the window, in parallel; entries are
/// in window order regardless of scheduling.
pub fn verify_window(
    crn: &Crn,
    f: Evaluator<'_>,
    window: &[u64],
    caps: Caps,
) -> Result<WindowReport, CrnError> {
    if window.len() != crn.dimension() {
        return Err(CrnError::DimensionMismatch {
            expected: crn.dimension(),
            actual: window.len(),
        });
    }
    let entries = window_points(window)
        .into_par_iter()
        .map(|x| {
            let verdict = stably_computes(crn, f, &x, caps)?;
            Ok(WindowEntry { input: x, verdict })
        })
        .collect::<Result<Vec<_>, CrnError>>()?;
    Ok(WindowReport { entries })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn min_crn() -> Crn {
        crate::crn::parse_crn("inputs: X1 X2\noutput: Y\nX1 + X2 -> Y\n").unwrap()
    }

    pub(crate) fn max_crn() -> Crn {
        crate::crn::parse_crn(
            "inputs: X1 X2\noutput: Y\nX1 -> Z1 + Y\nX2 -> Z2 + Y\nZ1 + Z2 -> K\nK + Y -> 0\n",
        )
        .unwrap()
    }

    pub(crate) fn naive_max_crn() -> Crn {
        crate::crn::parse_crn("inputs: X1 X2\noutput: Y\nX1 -> Y\nX2 -> Y\n").unwrap()
    }

    fn double_crn() -> Crn {
        crate::crn::parse_crn("inputs: X\noutput: Y\nX -> 2 Y\n").unwrap()
    }

    fn max(x: &[u64]) -> u64 {
        x.iter().copied().max().unwrap_or(0)
    }

    fn min(x: &[u64]) -> u64 {
        x.iter().copied().min().unwrap_or(0)
    }

    #[test]
    fn reach_graphs() {
        let m = min_crn();
        let g = reachable(&m, &m.initial_configuration(&[1, 1]).unwrap(), Caps::default());
        assert_eq!(g.len(), 2);
        let d = double_crn();
        let g = reachable(&d, &d.initial_configuration(&[2]).unwrap(), Caps::default());
        assert_eq!(g.len(), 3);
        assert_eq!((0..3).map(|v| g.output(v)).collect::<Vec<_>>(), vec![0, 2, 4]);
        let mx = max_crn();
        let g = reachable(&mx, &mx.initial_configuration(&[1, 1]).unwrap(), Caps::default());
        assert!((0..g.len()).any(|v| g.output(v) == 2));
    }

    #[test]
    fn stability() {
        let m = min_crn();
        let caps = Caps::default();
        assert_eq!(
            is_stable(&m, &m.configuration(&[("X2", 1), ("Y", 2)]).unwrap(), caps),
            Some(true)
        );
        assert_eq!(
            is_stable(&m, &m.configuration(&[("X1", 1), ("X2", 1)]).unwrap(), caps),
            Some(false)
        );
        let mx = max_crn();
        let c = mx.configuration(&[("Z1", 1), ("Z2", 1), ("Y", 2)]).unwrap();
        assert_eq!(is_stable(&mx, &c, caps), Some(false));
    }

    #[test]
    fn verdicts() {
        let caps = Caps::default();
        let v = stably_computes(&min_crn(), &min, &[2, 3], caps).unwrap();
        assert_eq!(v.status, Status::Verified);
        let v = stably_computes(&max_crn(), &max, &[1, 1], caps).unwrap();
        assert_eq!(v.status, Status::Verified);
        let naive = naive_max_crn();
        let v = stably_computes(&naive, &max, &[1, 1], caps).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let trace = v.witness.clone().unwrap();
        let end = replay(&naive, &[1, 1], &trace).unwrap();
        assert_eq!(naive.output_count(&end), 2);
        let lines = v.witness_lines(&naive);
        assert_eq!(lines[0], "fire: X1 -> Y => X1:0 X2:1 Y:1");
    }

    #[test]
    fn non_oblivious_refutation_uses_stability() {
        // Y can be produced and then destroyed: never stably 1
        let crn = crate::crn::parse_crn("inputs: X\noutput: Y\nX -> Y + K\nK + Y -> 0\n").unwrap();
        let v = stably_computes(&crn, &|x| x[0], &[1], Caps::default()).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let end = replay(&crn, &[1], v.witness.as_ref().unwrap()).unwrap();
        assert_eq!(crn.output_count(&end), 0);
    }

    #[test]
    fn windows() {
        let caps = Caps::default();
        let r = verify_window(&min_crn(), &min, &[4, 4], caps).unwrap();
        assert!(r.all_verified());
        assert_eq!(r.summary(), "all 25 inputs verified");
        let r = verify_window(&naive_max_crn(), &max, &[2, 2], caps).unwrap();
        assert_eq!(r.first_failure().unwrap().input, vec![1, 1]);
        assert_eq!(r.status(), Status::Refuted);
    }

    #[test]
    fn overproduction() {
        let caps = Caps::default();
        let t = overproduction_witness(&naive_max_crn(), &max, &[1, 1], caps)
            .unwrap()
            .unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(
            overproduction_witness(&min_crn(), &min, &[3, 3], caps).unwrap(),
            None
        );
    }

    #[test]
    fn capped_exploration() {
        let caps = Caps {
            max_configs: 3,
            max_count: 10_000,
        };
        let v = stably_computes(&min_crn(), &min, &[5, 5], caps).unwrap();
        assert_eq!(v.status, Status::Capped);
        // an oblivious overshoot is still a refutation on a capped graph
        let v = stably_computes(&naive_max_crn(), &|_| 0, &[4, 4], caps).unwrap();
        assert_eq!(v.status, Status::Refuted);
        let tight = Caps {
            max_configs: 100,
            max_count: 3,
        };
        let v = stably_computes(&double_crn(), &|x| 2 * x[0], &[4], tight).unwrap();
        assert_eq!(v.status, Status::Capped);
    }
}
