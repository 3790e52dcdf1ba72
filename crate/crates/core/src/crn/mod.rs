//! Discrete chemical reaction networks: species, reactions, configurations,
//! one-step semantics and composition by concatenation.
//!
//! A [`Crn`] owns its species table; [`Reaction`]s and [`Configuration`]s
//! are dense over that table and are only meaningful next to the network
//! that produced them.

mod text;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use text::parse_crn;

/// Separator between namespace segments in species names.
pub const NAMESPACE_SEP: &str = "::";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CrnError {
    #[error("expected input of dimension {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("reaction {reaction} is not applicable to the configuration")]
    NotApplicable { reaction: String },
    #[error("reaction {reaction} decreases the output species, CRN is not output-monotonic")]
    NotOutputMonotonic { reaction: String },
    #[error("downstream CRN must have exactly one input species, found {0}")]
    ArityMismatch(usize),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("invalid species name `{0}`")]
    InvalidName(String),
    #[error("species `{0}` declared twice with different roles")]
    ConflictingRole(String),
    #[error("a CRN needs exactly one output species")]
    MissingOutput,
    #[error("null reaction (reactants equal products): {0}")]
    NullReaction(String),
    #[error("interface species `{0}` would collide after composition")]
    InterfaceCollision(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Role of a species in a CRN computing a function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeciesKind {
    /// The `i`-th input species (0-based).
    Input(usize),
    Output,
    Leader,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Species {
    pub name: String,
    pub kind: SpeciesKind,
}

/// A reaction as sparse reactant and product count vectors, sorted by
/// species index with no zero entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reaction {
    reactants: Vec<(usize, u64)>,
    products: Vec<(usize, u64)>,
}

impl Reaction {
    fn new(mut reactants: Vec<(usize, u64)>, mut products: Vec<(usize, u64)>) -> Self {
        normalize_terms(&mut reactants);
        normalize_terms(&mut products);
        Reaction { reactants, products }
    }

    pub fn reactants(&self) -> &[(usize, u64)] {
        &self.reactants
    }

    pub fn products(&self) -> &[(usize, u64)] {
        &self.products
    }

    pub fn reactant_count(&self, species: usize) -> u64 {
        term_count(&self.reactants, species)
    }

    pub fn product_count(&self, species: usize) -> u64 {
        term_count(&self.products, species)
    }

    /// Net change in the count of `species` when this reaction fires.
    pub fn net(&self, species: usize) -> i64 {
        self.product_count(species) as i64 - self.reactant_count(species) as i64
    }
}

fn normalize_terms(terms: &mut Vec<(usize, u64)>) {
    terms.sort_unstable_by_key(|&(s, _)| s);
    let mut merged: Vec<(usize, u64)> = Vec::with_capacity(terms.len());
    for &(s, k) in terms.iter() {
        match merged.last_mut() {
            Some((last, count)) if *last == s => *count += k,
            _ => merged.push((s, k)),
        }
    }
    merged.retain(|&(_, k)| k > 0);
    *terms = merged;
}

fn term_count(terms: &[(usize, u64)], species: usize) -> u64 {
    terms
        .binary_search_by_key(&species, |&(s, _)| s)
        .map(|i| terms[i].1)
        .unwrap_or(0)
}

/// Species counts, dense over the species table of the owning [`Crn`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<u64>);

impl Configuration {
    pub fn zero(species: usize) -> Self {
        Configuration(vec![0; species])
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        Configuration(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, species: usize) -> u64 {
        self.0.get(species).copied().unwrap_or(0)
    }

    pub fn set(&mut self, species: usize, count: u64) {
        self.0[species] = count;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise sum; both sides must be over the same species table.
    pub fn add(&self, other: &Configuration) -> Configuration {
        Configuration(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn le(&self, other: &Configuration) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// True iff the reactants of `r` fit inside `c`.
pub fn applicable(c: &Configuration, r: &Reaction) -> bool {
    r.reactants.iter().all(|&(s, k)| c.get(s) >= k)
}

/// Fire `r` once from `c`.
pub fn apply(c: &Configuration, r: &Reaction) -> Result<Configuration, CrnError> {
    if !applicable(c, r) {
        return Err(CrnError::NotApplicable {
            reaction: format!("{r:?}"),
        });
    }
    let mut next = c.clone();
    for &(s, k) in &r.reactants {
        next.0[s] -= k;
    }
    for &(s, k) in &r.products {
        next.0[s] += k;
    }
    Ok(next)
}

/// A chemical reaction network with designated input, output and
/// (optional) leader species.
#[derive(Debug, Clone)]
pub struct Crn {
    species: Vec<Species>,
    index: HashMap<String, usize>,
    reactions: Vec<Reaction>,
    inputs: Vec<usize>,
    output: usize,
    leader: Option<usize>,
}

impl Crn {
    pub fn builder() -> CrnBuilder {
        CrnBuilder::default()
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Number of input species.
    pub fn dimension(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn leader(&self) -> Option<usize> {
        self.leader
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, species: usize) -> &str {
        &self.species[species].name
    }

    pub fn output_name(&self) -> &str {
        self.name(self.output)
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|&s| self.name(s)).collect()
    }

    pub fn leader_name(&self) -> Option<&str> {
        self.leader.map(|s| self.name(s))
    }

    /// Build a configuration from `(name, count)` pairs; absent species are 0.
    pub fn configuration(&self, counts: &[(&str, u64)]) -> Result<Configuration, CrnError> {
        let mut c = Configuration::zero(self.species.len());
        for &(name, k) in counts {
            let s = self
                .species_index(name)
                .ok_or_else(|| CrnError::UnknownSpecies(name.to_string()))?;
            c.0[s] += k;
        }
        Ok(c)
    }

    /// Count of the named species, 0 when the species is not declared.
    pub fn count(&self, c: &Configuration, name: &str) -> u64 {
        self.species_index(name).map(|s| c.get(s)).unwrap_or(0)
    }

    pub fn output_count(&self, c: &Configuration) -> u64 {
        c.get(self.output)
    }

    /// The configuration encoding input `x`: `x[i]` copies of input `i`,
    /// one leader if declared, nothing else.
    pub fn initial_configuration(&self, x: &[u64]) -> Result<Configuration, CrnError> {
        if x.len() != self.inputs.len() {
            return Err(CrnError::DimensionMismatch {
                expected: self.inputs.len(),
                actual: x.len(),
            });
        }
        let mut c = Configuration::zero(self.species.len());
        for (&s, &k) in self.inputs.iter().zip(x) {
            c.0[s] = k;
        }
        if let Some(l) = self.leader {
            c.0[l] = 1;
        }
        Ok(c)
    }

    /// Output-oblivious: the output species is never a reactant.
    pub fn is_output_oblivious(&self) -> bool {
        self.reactions.iter().all(|r| r.reactant_count(self.output) == 0)
    }

    /// Output-monotonic: no reaction decreases the output count.
    pub fn is_output_monotonic(&self) -> bool {
        self.reactions.iter().all(|r| r.net(self.output) >= 0)
    }

    /// Render one reaction in the text format, e.g. `2 X + B -> 2 X + Y`.
    pub fn format_reaction(&self, r: &Reaction) -> String {
        let side = |terms: &[(usize, u64)]| {
            if terms.is_empty() {
                return "0".to_string();
            }
            terms
                .iter()
                .map(|&(s, k)| {
                    if k == 1 {
                        self.name(s).to_string()
                    } else {
                        format!("{k} {}", self.name(s))
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!("{} -> {}", side(&r.reactants), side(&r.products))
    }

    /// Render a configuration as `S1:3 S2:0 ...` over every species.
    pub fn format_configuration(&self, c: &Configuration) -> String {
        self.species
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}:{}", s.name, c.get(i)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Reactions as name-keyed term lists; the representation used for
    /// equality and for rebuilding under a renaming.
    pub fn named_reactions(&self) -> Vec<NamedReaction> {
        self.reactions
            .iter()
            .map(|r| NamedReaction {
                reactants: r
                    .reactants
                    .iter()
                    .map(|&(s, k)| (self.name(s).to_string(), k))
                    .collect(),
                products: r
                    .products
                    .iter()
                    .map(|&(s, k)| (self.name(s).to_string(), k))
                    .collect(),
            })
            .collect()
    }

    fn canonical(&self) -> CanonicalCrn {
        let mut species: Vec<(String, SpeciesKind)> =
            self.species.iter().map(|s| (s.name.clone(), s.kind)).collect();
        species.sort_by(|a, b| a.0.cmp(&b.0));
        let reactions: BTreeSet<NamedReaction> = self
            .named_reactions()
            .into_iter()
            .map(|mut r| {
                r.reactants.sort();
                r.products.sort();
                r
            })
            .collect();
        (species, reactions)
    }

    /// Rename species through `rename`, keeping roles and reactions.
    pub fn renamed(&self, rename: impl Fn(&Species) -> String) -> Result<Crn, CrnError> {
        let names: Vec<String> = self.species.iter().map(&rename).collect();
        let mut b = CrnBuilder::default();
        for (s, name) in self.species.iter().zip(&names) {
            b.declare(name, s.kind)?;
        }
        for r in &self.reactions {
            let map = |terms: &[(usize, u64)]| -> Vec<(String, u64)> {
                terms.iter().map(|&(s, k)| (names[s].clone(), k)).collect()
            };
            b.add_named(&map(&r.reactants), &map(&r.products))?;
        }
        b.build()
    }

    /// Replace output-as-catalyst by a fresh species `Z` produced alongside
    /// every net unit of output. Already-oblivious networks are returned as is.
    pub fn monotonic_to_oblivious(&self) -> Result<Crn, CrnError> {
        if let Some(r) = self.reactions.iter().find(|r| r.net(self.output) < 0) {
            return Err(CrnError::NotOutputMonotonic {
                reaction: self.format_reaction(r),
            });
        }
        if self.is_output_oblivious() {
            return Ok(self.clone());
        }
        let z = self.fresh_name("Z");
        let y = self.output;
        let mut b = self.skeleton_builder()?;
        for r in &self.reactions {
            let consumed = r.reactant_count(y);
            let produced = r.product_count(y);
            let mut reactants: Vec<(String, u64)> = r
                .reactants
                .iter()
                .filter(|&&(s, _)| s != y)
                .map(|&(s, k)| (self.name(s).to_string(), k))
                .collect();
            let mut products: Vec<(String, u64)> = r
                .products
                .iter()
                .filter(|&&(s, _)| s != y)
                .map(|&(s, k)| (self.name(s).to_string(), k))
                .collect();
            if consumed > 0 {
                reactants.push((z.clone(), consumed));
            }
            // Z tracks Y one-for-one: catalytic copies return, net output is mirrored.
            if produced > consumed {
                products.push((self.name(y).to_string(), produced - consumed));
            }
            if produced > 0 {
                products.push((z.clone(), produced));
            }
            b.add_named(&reactants, &products)?;
        }
        b.build()
    }

    /// A name not yet used in this network, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if !self.index.contains_key(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.index.contains_key(n))
            .expect("unbounded search")
    }

    fn skeleton_builder(&self) -> Result<CrnBuilder, CrnError> {
        let mut b = CrnBuilder::default();
        for s in &self.species {
            if s.kind != SpeciesKind::Auxiliary {
                b.declare(&s.name, s.kind)?;
            }
        }
        Ok(b)
    }
}

type CanonicalCrn = (Vec<(String, SpeciesKind)>, BTreeSet<NamedReaction>);

/// Equality is semantic: same species with the same roles and the same set
/// of reactions, regardless of declaration order.
impl PartialEq for Crn {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for Crn {}

impl fmt::Display for Crn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::print_crn(self))
    }
}

/// A reaction written with species names instead of indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NamedReaction {
    pub reactants: Vec<(String, u64)>,
    pub products: Vec<(String, u64)>,
}

impl NamedReaction {
    pub fn new(reactants: &[(&str, u64)], products: &[(&str, u64)]) -> Self {
        let own = |t: &[(&str, u64)]| t.iter().map(|&(s, k)| (s.to_string(), k)).collect();
        NamedReaction {
            reactants: own(reactants),
            products: own(products),
        }
    }
}

pub(crate) fn valid_species_name(name: &str) -> bool {
    let Some(first) = name.chars().next() else {
        return false;
    };
    !first.is_ascii_digit()
        && !name.contains("->")
        && name
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | ':' | '.' | '\'' | '^' | '[' | ']'))
}

/// Incremental construction of a [`Crn`]. Species referenced by reactions
/// are declared on first use as auxiliary; duplicate reactions are dropped.
#[derive(Debug, Default, Clone)]
pub struct CrnBuilder {
    species: Vec<Species>,
    index: HashMap<String, usize>,
    reactions: Vec<Reaction>,
    seen: HashSet<Reaction>,
    error: Option<CrnError>,
}

impl CrnBuilder {
    /// Declare (or look up) a species with the given role.
    pub fn declare(&mut self, name: &str, kind: SpeciesKind) -> Result<usize, CrnError> {
        if !valid_species_name(name) {
            return Err(CrnError::InvalidName(name.to_string()));
        }
        if let Some(&s) = self.index.get(name) {
            let existing = self.species[s].kind;
            if existing == kind {
                return Ok(s);
            }
            if existing == SpeciesKind::Auxiliary {
                self.species[s].kind = kind;
                return Ok(s);
            }
            if kind == SpeciesKind::Auxiliary {
                return Ok(s);
            }
            return Err(CrnError::ConflictingRole(name.to_string()));
        }
        let s = self.species.len();
        self.species.push(Species {
            name: name.to_string(),
            kind,
        });
        self.index.insert(name.to_string(), s);
        Ok(s)
    }

    pub fn add_named(
        &mut self,
        reactants: &[(String, u64)],
        products: &[(String, u64)],
    ) -> Result<(), CrnError> {
        let mut map = |terms: &[(String, u64)]| -> Result<Vec<(usize, u64)>, CrnError> {
            terms
                .iter()
                .map(|(n, k)| Ok((self.declare(n, SpeciesKind::Auxiliary)?, *k)))
                .collect()
        };
        let r = Reaction::new(map(reactants)?, map(products)?);
        if r.reactants == r.products {
            let show = |t: &[(String, u64)]| format!("{t:?}");
            return Err(CrnError::NullReaction(format!(
                "{} -> {}",
                show(reactants),
                show(products)
            )));
        }
        if self.seen.insert(r.clone()) {
            self.reactions.push(r);
        }
        Ok(())
    }

    pub fn add_reaction(&mut self, r: &NamedReaction) -> Result<(), CrnError> {
        self.add_named(&r.reactants, &r.products)
    }

    /// Chainable: declare the inputs in order (`Input(0)`, `Input(1)`, ...).
    pub fn inputs(mut self, names: &[&str]) -> Self {
        for (i, n) in names.iter().enumerate() {
            self.record(|b| b.declare(n, SpeciesKind::Input(i)).map(|_| ()));
        }
        self
    }

    pub fn output(mut self, name: &str) -> Self {
        self.record(|b| b.declare(name, SpeciesKind::Output).map(|_| ()));
        self
    }

    pub fn leader(mut self, name: &str) -> Self {
        self.record(|b| b.declare(name, SpeciesKind::Leader).map(|_| ()));
        self
    }

    /// Chainable reaction with `(name, count)` terms.
    pub fn reaction(mut self, reactants: &[(&str, u64)], products: &[(&str, u64)]) -> Self {
        let r = NamedReaction::new(reactants, products);
        self.record(|b| b.add_reaction(&r));
        self
    }

    fn record(&mut self, f: impl FnOnce(&mut Self) -> Result<(), CrnError>) {
        if self.error.is_none() {
            if let Err(e) = f(self) {
                self.error = Some(e);
            }
        }
    }

    pub fn build(self) -> Result<Crn, CrnError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let mut inputs: Vec<(usize, usize)> = Vec::new();
        let mut output = None;
        let mut leader = None;
        for (s, sp) in self.species.iter().enumerate() {
            match sp.kind {
                SpeciesKind::Input(i) => inputs.push((i, s)),
                SpeciesKind::Output => {
                    if output.replace(s).is_some() {
                        return Err(CrnError::ConflictingRole(sp.name.clone()));
                    }
                }
                SpeciesKind::Leader => {
                    if leader.replace(s).is_some() {
                        return Err(CrnError::ConflictingRole(sp.name.clone()));
                    }
                }
                SpeciesKind::Auxiliary => {}
            }
        }
        inputs.sort_unstable();
        if inputs.iter().enumerate().any(|(pos, &(i, _))| pos != i) {
            let name = self.species[inputs[0].1].name.clone();
            return Err(CrnError::ConflictingRole(name));
        }
        let output = output.ok_or(CrnError::MissingOutput)?;
        Ok(Crn {
            species: self.species,
            index: self.index,
            reactions: self.reactions,
            inputs: inputs.into_iter().map(|(_, s)| s).collect(),
            output,
            leader,
        })
    }
}

/// Rename every species not in `keep` to `prefix::name`.
pub fn namespace(crn: &Crn, prefix: &str, keep: &[&str]) -> Result<Crn, CrnError> {
    assert!(!prefix.is_empty(), "namespace prefix must be nonempty");
    crn.renamed(|s| {
        if keep.contains(&s.name.as_str()) {
            s.name.clone()
        } else {
            format!("{prefix}{NAMESPACE_SEP}{}", s.name)
        }
    })
}

/// Feed the output of `upstream` into the single input of `downstream`.
///
/// Internal species of both sides move to the `f::` and `g::` namespaces,
/// the shared wire is `f::<upstream output>`. If either side has a leader,
/// a fresh root leader splits into the leaders that exist.
pub fn concatenate(upstream: &Crn, downstream: &Crn) -> Result<Crn, CrnError> {
    if downstream.dimension() != 1 {
        return Err(CrnError::ArityMismatch(downstream.dimension()));
    }
    let out_name = downstream.output_name().to_string();
    if upstream.input_names().contains(&out_name.as_str()) {
        return Err(CrnError::InterfaceCollision(out_name));
    }
    let wire = format!("f{NAMESPACE_SEP}{}", upstream.output_name());
    let up_inputs: Vec<String> = upstream.input_names().iter().map(|s| s.to_string()).collect();

    let mut b = CrnBuilder::default();
    for (i, n) in up_inputs.iter().enumerate() {
        b.declare(n, SpeciesKind::Input(i))?;
    }
    b.declare(&out_name, SpeciesKind::Output)?;

    let up_name = |s: usize| -> String {
        let sp = &upstream.species[s];
        match sp.kind {
            SpeciesKind::Input(_) => sp.name.clone(),
            _ => format!("f{NAMESPACE_SEP}{}", sp.name),
        }
    };
    let down_name = |s: usize| -> String {
        let sp = &downstream.species[s];
        match sp.kind {
            SpeciesKind::Input(_) => wire.clone(),
            SpeciesKind::Output => sp.name.clone(),
            _ => format!("g{NAMESPACE_SEP}{}", sp.name),
        }
    };
    let copy = |b: &mut CrnBuilder, crn: &Crn, name: &dyn Fn(usize) -> String| {
        for r in &crn.reactions {
            let map =
                |t: &[(usize, u64)]| -> Vec<(String, u64)> { t.iter().map(|&(s, k)| (name(s), k)).collect() };
            b.add_named(&map(&r.reactants), &map(&r.products))?;
        }
        Ok::<(), CrnError>(())
    };
    copy(&mut b, upstream, &up_name)?;
    copy(&mut b, downstream, &down_name)?;

    let leaders: Vec<String> = [upstream.leader.map(&up_name), downstream.leader.map(&down_name)]
        .into_iter()
        .flatten()
        .collect();
    if !leaders.is_empty() {
        let taken: HashSet<&str> = up_inputs
            .iter()
            .map(String::as_str)
            .chain([out_name.as_str()])
            .collect();
        let global = std::iter::once("L".to_string())
            .chain((1..).map(|i| format!("L_{i}")))
            .find(|n| !taken.contains(n.as_str()))
            .expect("unbounded search");
        b.declare(&global, SpeciesKind::Leader)?;
        let products: Vec<(String, u64)> = leaders.into_iter().map(|l| (l, 1)).collect();
        b.add_named(&[(global, 1)], &products)?;
    }
    b.build()
}
