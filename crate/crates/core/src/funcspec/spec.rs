use std::fmt;

use serde::Serialize;

use super::quilt::{Classes, QuiltAffine, QuiltReport};
use super::FuncError;
use crate::rational::Rational;

/// A fixed-input restriction: the spec of `f` with `axis` pinned to `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub axis: usize,
    pub value: u64,
    pub spec: ObliviousSpec,
}

/// Recursive description of a function `f: ℕ^d → ℕ`: for `x ≥ floor` on
/// the free axes, `f(x) = min_k pieces[k](x)`; below the floor on some
/// free axis `i`, `f` is given by the restriction pinning `x(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliviousSpec {
    dimension: usize,
    floor: Vec<u64>,
    pieces: Vec<QuiltAffine>,
    restrictions: Vec<Restriction>,
    fixed: Vec<Option<u64>>,
}

/// Reference function used to judge a spec: `None` where undefined.
pub type Reference<'a> = &'a dyn Fn(&[u64]) -> Option<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpecViolation {
    Piece {
        fixed: Vec<(usize, u64)>,
        piece: usize,
        report: QuiltReport,
    },
    Evaluation {
        point: Vec<u64>,
        error: String,
    },
    Decreasing {
        point: Vec<u64>,
        axis: usize,
        value: u64,
        next: u64,
    },
    InconsistentRecursion {
        point: Vec<u64>,
        axis: usize,
        via_axis: u64,
        canonical: u64,
    },
    NotDominating {
        piece: usize,
        point: Vec<u64>,
        piece_value: i64,
        function_value: i64,
    },
    Mismatch {
        point: Vec<u64>,
        spec_value: u64,
        reference_value: i64,
    },
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::Piece { fixed, piece, report } => write!(
                f,
                "piece {piece} (restriction {}) is not quilt-affine: {report}",
                fmt_fixed(fixed)
            ),
            SpecViolation::Evaluation { point, error } => {
                write!(f, "evaluation failed at {point:?}: {error}")
            }
            SpecViolation::Decreasing {
                point,
                axis,
                value,
                next,
            } => write!(
                f,
                "not nondecreasing along axis {} at {point:?}: {value} then {next}",
                axis + 1
            ),
            SpecViolation::InconsistentRecursion {
                point,
                axis,
                via_axis,
                canonical,
            } => write!(
                f,
                "recursion through axis {} gives {via_axis} at {point:?}, canonical order gives {canonical}",
                axis + 1
            ),
            SpecViolation::NotDominating {
                piece,
                point,
                piece_value,
                function_value,
            } => write!(
                f,
                "piece {piece} does not dominate at {point:?}: {piece_value} < {function_value}"
            ),
            SpecViolation::Mismatch {
                point,
                spec_value,
                reference_value,
            } => write!(
                f,
                "spec value {spec_value} differs from reference {reference_value} at {point:?}"
            ),
        }
    }
}

fn fmt_fixed(fixed: &[(usize, u64)]) -> String {
    if fixed.is_empty() {
        return "top level".into();
    }
    fixed
        .iter()
        .map(|(a, v)| format!("x{}={v}", a + 1))
        .collect::<Vec<_>>()
        .join(", ")
}

impl ObliviousSpec {
    /// Build a top-level spec, checking the recursive structure: one
    /// restriction for every free axis `i` and every `j < floor[i]`.
    pub fn new(
        dimension: usize,
        floor: Vec<u64>,
        pieces: Vec<QuiltAffine>,
        restrictions: Vec<Restriction>,
    ) -> Result<Self, FuncError> {
        let mut spec = ObliviousSpec {
            dimension,
            floor,
            pieces,
            restrictions,
            fixed: vec![None; dimension],
        };
        spec.check_structure()?;
        Ok(spec)
    }

    /// A restriction body, checked once the enclosing spec is built with `new`.
    pub fn nested(
        dimension: usize,
        floor: Vec<u64>,
        pieces: Vec<QuiltAffine>,
        restrictions: Vec<Restriction>,
    ) -> Self {
        ObliviousSpec {
            dimension,
            floor,
            pieces,
            restrictions,
            fixed: vec![None; dimension],
        }
    }

    /// A spec with `n = 0` and no restrictions.
    pub fn eventually_min(pieces: Vec<QuiltAffine>) -> Result<Self, FuncError> {
        let d = pieces.first().map(QuiltAffine::dimension).unwrap_or(0);
        ObliviousSpec::new(d, vec![0; d], pieces, Vec::new())
    }

    fn set_fixed(&mut self, fixed: Vec<Option<u64>>) {
        for r in &mut self.restrictions {
            let mut nested = fixed.clone();
            if r.axis < nested.len() {
                nested[r.axis] = Some(r.value);
            }
            r.spec.set_fixed(nested);
        }
        self.fixed = fixed;
    }

    fn check_structure(&mut self) -> Result<(), FuncError> {
        let fixed = self.fixed.clone();
        self.set_fixed(fixed);
        self.check_level()
    }

    fn check_level(&self) -> Result<(), FuncError> {
        let here = fmt_fixed(&self.fixed_axes());
        let bad = |msg: String| FuncError::InvalidSpec(format!("{here}: {msg}"));
        if self.floor.len() != self.dimension {
            return Err(bad(format!(
                "floor has {} entries, dimension is {}",
                self.floor.len(),
                self.dimension
            )));
        }
        if self.pieces.is_empty() {
            return Err(bad("at least one piece is required".into()));
        }
        for (k, p) in self.pieces.iter().enumerate() {
            if p.dimension() != self.dimension {
                return Err(bad(format!(
                    "piece {k} has dimension {}, expected {}",
                    p.dimension(),
                    self.dimension
                )));
            }
        }
        for (i, &n) in self.floor.iter().enumerate() {
            if self.fixed[i].is_some() && n != 0 {
                return Err(bad(format!("floor on fixed axis {} must be 0", i + 1)));
            }
        }
        for r in &self.restrictions {
            if r.axis >= self.dimension || self.fixed[r.axis].is_some() {
                return Err(bad(format!("restriction on non-free axis {}", r.axis + 1)));
            }
            if r.value >= self.floor[r.axis] {
                return Err(bad(format!(
                    "restriction x{}={} is not below the floor {}",
                    r.axis + 1,
                    r.value,
                    self.floor[r.axis]
                )));
            }
            if r.spec.dimension != self.dimension {
                return Err(bad("restriction changes the dimension".into()));
            }
        }
        for i in self.free_axes() {
            for j in 0..self.floor[i] {
                let count = self
                    .restrictions
                    .iter()
                    .filter(|r| r.axis == i && r.value == j)
                    .count();
                if count != 1 {
                    return Err(bad(format!(
                        "expected exactly one restriction for x{}={j}, found {count}",
                        i + 1
                    )));
                }
            }
        }
        for r in &self.restrictions {
            r.spec.check_level()?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn floor(&self) -> &[u64] {
        &self.floor
    }

    pub fn pieces(&self) -> &[QuiltAffine] {
        &self.pieces
    }

    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    /// Pinned axes of this (possibly nested) spec, per axis.
    pub fn fixed(&self) -> &[Option<u64>] {
        &self.fixed
    }

    pub fn fixed_axes(&self) -> Vec<(usize, u64)> {
        self.fixed
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .collect()
    }

    pub fn free_axes(&self) -> Vec<usize> {
        (0..self.dimension).filter(|&i| self.fixed[i].is_none()).collect()
    }

    pub fn restriction(&self, axis: usize, value: u64) -> Option<&ObliviousSpec> {
        self.restrictions
            .iter()
            .find(|r| r.axis == axis && r.value == value)
            .map(|r| &r.spec)
    }

    fn check_point(&self, x: &[u64]) -> Result<(), FuncError> {
        if x.len() != self.dimension {
            return Err(FuncError::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        for (axis, v) in self.fixed_axes() {
            if x[axis] != v {
                return Err(FuncError::FixedAxisViolation {
                    axis,
                    expected: v,
                    actual: x[axis],
                });
            }
        }
        Ok(())
    }

    fn is_at_floor(&self, x: &[u64]) -> bool {
        self.free_axes().iter().all(|&i| x[i] >= self.floor[i])
    }

    /// Minimum of the pieces at `x`, without the floor check.
    pub fn min_of_pieces(&self, x: &[u64]) -> Result<i64, FuncError> {
        let mut best: Option<i64> = None;
        for p in &self.pieces {
            let v = p.eval(x)?;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        Ok(best.expect("pieces are nonempty"))
    }

    /// Evaluate `f(x)`; recursion goes through the smallest free axis below
    /// the floor.
    pub fn eval(&self, x: &[u64]) -> Result<u64, FuncError> {
        self.check_point(x)?;
        match self.free_axes().into_iter().find(|&i| x[i] < self.floor[i]) {
            Some(i) => self.eval_through(x, i),
            None => {
                let v = self.min_of_pieces(x)?;
                u64::try_from(v).map_err(|_| FuncError::NegativeValue {
                    point: x.to_vec(),
                    value: v,
                })
            }
        }
    }

    fn eval_through(&self, x: &[u64], axis: usize) -> Result<u64, FuncError> {
        self.restriction(axis, x[axis])
            .ok_or_else(|| FuncError::InvalidSpec(format!("missing restriction x{}={}", axis + 1, x[axis])))?
            .eval(x)
    }

    /// `x ∨ n` on the free axes.
    pub fn join_floor(&self, x: &[u64]) -> Vec<u64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.fixed[i].is_some() {
                    v
                } else {
                    v.max(self.floor[i])
                }
            })
            .collect()
    }

    /// The right-hand side of the min decomposition
    /// `min[f(x∨n), f_{x(i)→j}(x) + 1{x(i)>j}·f(x∨n)]`, evaluated directly.
    pub fn min_decomposition(&self, x: &[u64]) -> Result<u64, FuncError> {
        self.check_point(x)?;
        let top = self.eval(&self.join_floor(x))?;
        let mut best = top;
        for r in &self.restrictions {
            let mut pinned = x.to_vec();
            pinned[r.axis] = r.value;
            let mut term = r.spec.eval(&pinned)?;
            if x[r.axis] > r.value {
                term += top;
            }
            best = best.min(term);
        }
        Ok(best)
    }

    /// Largest period over every piece in the recursion, combined by lcm.
    pub fn period_lcm(&self) -> u64 {
        let own = self
            .pieces
            .iter()
            .fold(1u64, |acc, p| num_integer::lcm(acc, p.period()));
        self.restrictions
            .iter()
            .fold(own, |acc, r| num_integer::lcm(acc, r.spec.period_lcm()))
    }

    /// `max(n) + 2·lcm(periods)`.
    pub fn default_window(&self) -> u64 {
        self.floor.iter().copied().max().unwrap_or(0) + 2 * self.period_lcm()
    }

    /// Points of `[0, window]^d` that respect the pinned axes.
    pub fn window_points(&self, window: u64) -> impl Iterator<Item = Vec<u64>> + '_ {
        let free = self.free_axes();
        let fixed = self.fixed.clone();
        Classes::new(free.len(), window + 1).map(move |y| {
            let mut x: Vec<u64> = fixed.iter().map(|v| v.unwrap_or(0)).collect();
            for (pos, &i) in free.iter().enumerate() {
                x[i] = y[pos];
            }
            x
        })
    }

    /// Bounded check of the recursive conditions on `[0, window]^d`.
    ///
    /// In order: every piece is quilt-affine; values are defined and
    /// nonnegative; `f` is nondecreasing; all admissible recursion orders
    /// agree; every piece dominates the function on `x ≥ n` (the reference
    /// when given, the spec itself otherwise); and the spec agrees with the
    /// reference. Nested restrictions are checked first.
    pub fn validate(&self, window: u64, reference: Option<Reference<'_>>) -> Result<(), SpecViolation> {
        self.validate_pieces()?;
        self.validate_level(window, reference)
    }

    fn validate_pieces(&self) -> Result<(), SpecViolation> {
        for r in &self.restrictions {
            r.spec.validate_pieces()?;
        }
        for (k, p) in self.pieces.iter().enumerate() {
            let report = p.validate();
            if !report.is_pass() {
                return Err(SpecViolation::Piece {
                    fixed: self.fixed_axes(),
                    piece: k,
                    report,
                });
            }
        }
        Ok(())
    }

    fn validate_level(&self, window: u64, reference: Option<Reference<'_>>) -> Result<(), SpecViolation> {
        for r in &self.restrictions {
            r.spec.validate_level(window, reference)?;
        }
        let eval = |x: &[u64]| {
            self.eval(x).map_err(|e| SpecViolation::Evaluation {
                point: x.to_vec(),
                error: e.to_string(),
            })
        };
        for x in self.window_points(window) {
            eval(&x)?;
        }
        for x in self.window_points(window) {
            let v = eval(&x)?;
            for i in self.free_axes() {
                if x[i] < window {
                    let mut next = x.clone();
                    next[i] += 1;
                    let w = eval(&next)?;
                    if w < v {
                        return Err(SpecViolation::Decreasing {
                            point: x,
                            axis: i,
                            value: v,
                            next: w,
                        });
                    }
                }
            }
        }
        for x in self.window_points(window) {
            let canonical = eval(&x)?;
            for i in self.free_axes() {
                if x[i] < self.floor[i] {
                    let via = self.eval_through(&x, i).map_err(|e| SpecViolation::Evaluation {
                        point: x.clone(),
                        error: e.to_string(),
                    })?;
                    if via != canonical {
                        return Err(SpecViolation::InconsistentRecursion {
                            point: x,
                            axis: i,
                            via_axis: via,
                            canonical,
                        });
                    }
                }
            }
        }
        for x in self.window_points(window) {
            if !self.is_at_floor(&x) {
                continue;
            }
            let target = match reference {
                Some(f) => match f(&x) {
                    Some(v) => v,
                    None => continue,
                },
                None => eval(&x)? as i64,
            };
            for (k, p) in self.pieces.iter().enumerate() {
                let gv = p.eval(&x).map_err(|e| SpecViolation::Evaluation {
                    point: x.clone(),
                    error: e.to_string(),
                })?;
                if gv < target {
                    return Err(SpecViolation::NotDominating {
                        piece: k,
                        point: x,
                        piece_value: gv,
                        function_value: target,
                    });
                }
            }
        }
        if let Some(f) = reference {
            for x in self.window_points(window) {
                let v = eval(&x)?;
                if let Some(want) = f(&x) {
                    if v as i64 != want {
                        return Err(SpecViolation::Mismatch {
                            point: x,
                            spec_value: v,
                            reference_value: want,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Gradients of the top-level pieces; on the open positive orthant the
    /// ∞-scaling of `f` is `z ↦ min_k gradient_k · z`.
    pub fn scaling_limit(&self) -> Vec<Vec<Rational>> {
        self.pieces.iter().map(|p| p.gradient().to_vec()).collect()
    }
}

/// `g(⌊c·z⌋) / c` for a single quilt-affine function.
pub fn scaled_sample(g: &QuiltAffine, z: &[Rational], c: i64) -> Result<Rational, FuncError> {
    let x = scale_floor(z, c)?;
    Ok(Rational::new(g.eval(&x)?, c))
}

/// `f(⌊c·z⌋) / c` for a spec.
pub fn scaled_spec_sample(s: &ObliviousSpec, z: &[Rational], c: i64) -> Result<Rational, FuncError> {
    let x = scale_floor(z, c)?;
    Ok(Rational::new(s.eval(&x)? as i64, c))
}

fn scale_floor(z: &[Rational], c: i64) -> Result<Vec<u64>, FuncError> {
    z.iter()
        .map(|v| {
            let f = (*v * Rational::integer(c)).floor();
            u64::try_from(f).map_err(|_| FuncError::InvalidSpec("negative scaling point".into()))
        })
        .collect()
}
