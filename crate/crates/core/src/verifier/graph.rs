use std::fmt;
use std::hash::BuildHasherDefault;

use indexmap::IndexSet;
use rustc_hash::FxHasher;
use serde::Serialize;

use super::TraceStep;
use crate::crn::{Configuration, Crn};

pub const CAPS_ENV: &str = "OBLIVIOUS_CRN_CAPS";

/// Exploration limits: distinct configurations, and any single count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub max_configs: usize,
    pub max_count: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_configs: 1_000_000,
            max_count: 10_000,
        }
    }
}

impl Caps {
    /// `"configs,count"`.
    pub fn parse(s: &str) -> Result<Caps, String> {
        let bad = || format!("caps must look like `configs,count`, got `{s}`");
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let max_configs = a.trim().parse().map_err(|_| bad())?;
        let max_count = b.trim().parse().map_err(|_| bad())?;
        Ok(Caps {
            max_configs,
            max_count,
        })
    }

    /// Defaults, overridden by `OBLIVIOUS_CRN_CAPS` when set.
    pub fn from_env() -> Result<Caps, String> {
        match std::env::var(CAPS_ENV) {
            Ok(s) => Caps::parse(&s),
            Err(_) => Ok(Caps::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CapHit {
    Configs { limit: usize },
    Count { species: String, limit: u64 },
}

impl fmt::Display for CapHit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapHit::Configs { limit } => write!(f, "more than {limit} configurations"),
            CapHit::Count { species, limit } => write!(f, "{species} exceeds {limit} copies"),
        }
    }
}

type FxIndexSet<T> = IndexSet<T, BuildHasherDefault<FxHasher>>;

const NO_PARENT: u32 = u32::MAX;

struct Compiled {
    reactants: Vec<(usize, u32)>,
    delta: Vec<(usize, i64)>,
}

/// Breadth-first reachable set with hash-consed configurations. Node 0 is
/// the start; node order is BFS order, so parent pointers give shortest
/// traces.
pub struct ReachGraph {
    nodes: FxIndexSet<Box<[u32]>>,
    offsets: Vec<usize>,
    edges: Vec<(u32, u32)>,
    parent: Vec<(u32, u32)>,
    output: usize,
    cap_hit: Option<CapHit>,
}

impl ReachGraph {
    pub fn explore(crn: &Crn, c0: &Configuration, caps: Caps) -> ReachGraph {
        let compiled: Vec<Compiled> = crn
            .reactions()
            .iter()
            .map(|r| {
                let mut delta: Vec<(usize, i64)> = Vec::new();
                for &(s, _) in r.reactants().iter().chain(r.products()) {
                    if !delta.iter().any(|&(t, _)| t == s) && r.net(s) != 0 {
                        delta.push((s, r.net(s)));
                    }
                }
                Compiled {
                    reactants: r.reactants().iter().map(|&(s, k)| (s, k as u32)).collect(),
                    delta,
                }
            })
            .collect();

        let mut g = ReachGraph {
            nodes: FxIndexSet::default(),
            offsets: vec![0],
            edges: Vec::new(),
            parent: vec![(NO_PARENT, NO_PARENT)],
            output: crn.output(),
            cap_hit: None,
        };
        let start: Box<[u32]> = c0.counts().iter().map(|&k| k as u32).collect();
        g.nodes.insert(start);

        let mut next: Vec<u32> = Vec::new();
        let mut v = 0;
        'bfs: while v < g.nodes.len() {
            let before = g.edges.len();
            for (ri, r) in compiled.iter().enumerate() {
                let cur = &g.nodes[v];
                if r.reactants.iter().any(|&(s, k)| cur[s] < k) {
                    continue;
                }
                next.clear();
                next.extend_from_slice(cur);
                for &(s, d) in &r.delta {
                    let k = next[s] as i64 + d;
                    if k as u64 > caps.max_count {
                        g.cap_hit = Some(CapHit::Count {
                            species: crn.name(s).to_string(),
                            limit: caps.max_count,
                        });
                        g.edges.truncate(before);
                        break 'bfs;
                    }
                    next[s] = k as u32;
                }
                let w = match g.nodes.get_index_of(next.as_slice()) {
                    Some(w) => w,
                    None => {
                        if g.nodes.len() >= caps.max_configs {
                            g.cap_hit = Some(CapHit::Configs {
                                limit: caps.max_configs,
                            });
                            g.edges.truncate(before);
                            break 'bfs;
                        }
                        g.nodes.insert(next.clone().into_boxed_slice());
                        g.parent.push((v as u32, ri as u32));
                        g.nodes.len() - 1
                    }
                };
                g.edges.push((ri as u32, w as u32));
            }
            g.offsets.push(g.edges.len());
            v += 1;
        }
        g
    }

    /// Node id of `c`, if it was reached.
    pub fn index_of(&self, c: &Configuration) -> Option<usize> {
        let key: Vec<u32> = c.counts().iter().map(|&k| k as u32).collect();
        self.nodes.get_index_of(key.as_slice())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_capped(&self) -> bool {
        self.cap_hit.is_some()
    }

    pub fn cap_hit(&self) -> Option<CapHit> {
        self.cap_hit.clone()
    }

    /// Nodes whose successors are fully known.
    pub fn expanded(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn configuration(&self, v: usize) -> Configuration {
        Configuration::from_counts(self.nodes[v].iter().map(|&k| k as u64).collect())
    }

    pub fn output(&self, v: usize) -> u64 {
        self.nodes[v][self.output] as u64
    }

    pub fn count(&self, v: usize, species: usize) -> u64 {
        self.nodes[v][species] as u64
    }

    /// `(reaction, target)` pairs of an expanded node.
    pub fn successors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = if v < self.expanded() {
            self.offsets[v]..self.offsets[v + 1]
        } else {
            0..0
        };
        self.edges[range].iter().map(|&(r, w)| (r as usize, w as usize))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Shortest firing sequence from the start to `v`.
    pub fn trace_to(&self, v: usize) -> Vec<TraceStep> {
        let mut steps = Vec::new();
        let mut cur = v;
        while self.parent[cur].0 != NO_PARENT {
            let (p, r) = self.parent[cur];
            steps.push(TraceStep {
                reaction: r as usize,
                configuration: self.configuration(cur),
            });
            cur = p as usize;
        }
        steps.reverse();
        steps
    }

    /// Strongly connected components and downstream output ranges; `None`
    /// if the graph is capped.
    pub fn analyze(&self) -> Option<Analysis> {
        if self.is_capped() {
            return None;
        }
        let (comp_of, count) = self.tarjan();
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); count];
        for (v, &c) in comp_of.iter().enumerate() {
            members[c as usize].push(v as u32);
        }
        let mut min_y = vec![u64::MAX; count];
        let mut max_y = vec![0u64; count];
        let mut succ: Vec<Vec<u32>> = vec![Vec::new(); count];
        // components come out of Tarjan sinks first
        for c in 0..count {
            let (mut lo, mut hi) = (u64::MAX, 0);
            for &v in &members[c] {
                let y = self.output(v as usize);
                lo = lo.min(y);
                hi = hi.max(y);
                for (_, w) in self.successors(v as usize) {
                    let cw = comp_of[w] as usize;
                    if cw != c {
                        lo = lo.min(min_y[cw]);
                        hi = hi.max(max_y[cw]);
                        succ[c].push(cw as u32);
                    }
                }
            }
            succ[c].sort_unstable();
            succ[c].dedup();
            min_y[c] = lo;
            max_y[c] = hi;
        }
        Some(Analysis {
            comp_of,
            min_y,
            max_y,
            succ,
        })
    }

    fn tarjan(&self) -> (Vec<u32>, usize) {
        const UNSEEN: u32 = u32::MAX;
        let n = self.len();
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0u32; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        let mut comp_of = vec![UNSEEN; n];
        let mut count = 0usize;
        let mut counter = 0u32;
        let mut calls: Vec<(usize, usize)> = Vec::new();

        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root as u32);
            on_stack[root] = true;
            calls.push((root, self.offsets[root]));
            while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
                if *pos < self.offsets[v + 1] {
                    let w = self.edges[*pos].1 as usize;
                    *pos += 1;
                    if index[w] == UNSEEN {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w as u32);
                        on_stack[w] = true;
                        calls.push((w, self.offsets[w]));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                    continue;
                }
                calls.pop();
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("root is on the stack") as usize;
                        on_stack[w] = false;
                        comp_of[w] = count as u32;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
                if let Some(&(u, _)) = calls.last() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
        (comp_of, count)
    }
}

/// Component structure of an uncapped reach graph.
pub struct Analysis {
    comp_of: Vec<u32>,
    min_y: Vec<u64>,
    max_y: Vec<u64>,
    succ: Vec<Vec<u32>>,
}

impl Analysis {
    pub fn component(&self, v: usize) -> usize {
        self.comp_of[v] as usize
    }

    pub fn component_count(&self) -> usize {
        self.min_y.len()
    }

    /// Everything reachable from `v` has the same output count.
    pub fn is_stable(&self, v: usize) -> bool {
        let c = self.component(v);
        self.min_y[c] == self.max_y[c]
    }

    /// Per node: a stable configuration with output `target` is reachable.
    pub fn reaches_correct_stable(&self, target: u64) -> Vec<bool> {
        let count = self.component_count();
        let mut good = vec![false; count];
        for c in 0..count {
            let here = self.min_y[c] == self.max_y[c] && self.min_y[c] == target;
            good[c] = here || self.succ[c].iter().any(|&s| good[s as usize]);
        }
        self.comp_of.iter().map(|&c| good[c as usize]).collect()
    }
}
