use serde::{Deserialize, Serialize};

use super::FuncError;
use crate::rational::Rational;

/// `at_least ≤ x < below` and `x ≡ residue (mod modulus)`; absent bounds are
/// unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain1D {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_least: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub below: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(default)]
    pub residue: u64,
}

impl Domain1D {
    pub fn all() -> Self {
        Domain1D::default()
    }

    pub fn at_least(a: u64) -> Self {
        Domain1D {
            at_least: Some(a),
            ..Domain1D::default()
        }
    }

    pub fn below(a: u64) -> Self {
        Domain1D {
            below: Some(a),
            ..Domain1D::default()
        }
    }

    pub fn congruent(residue: u64, modulus: u64) -> Self {
        Domain1D {
            modulus: Some(modulus),
            residue,
            ..Domain1D::default()
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.at_least.is_none_or(|a| x >= a)
            && self.below.is_none_or(|b| x < b)
            && self.modulus.is_none_or(|m| x % m == self.residue % m)
    }

    fn thresholds(&self) -> impl Iterator<Item = u64> {
        self.at_least.into_iter().chain(self.below)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece1D {
    #[serde(default = "Domain1D::all")]
    pub domain: Domain1D,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Piece1D {
    pub fn new(domain: Domain1D, slope: Rational, intercept: Rational) -> Self {
        Piece1D {
            domain,
            slope,
            intercept,
        }
    }

    pub fn value(&self, x: u64) -> Rational {
        self.slope * Rational::integer(x as i64) + self.intercept
    }
}

/// A piecewise-affine `f: ℕ → ℕ` over disjoint threshold/modulus domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Semilinear1D {
    pieces: Vec<Piece1D>,
}

impl<'de> Deserialize<'de> for Semilinear1D {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            pieces: Vec<Piece1D>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Semilinear1D::new(raw.pieces).map_err(serde::de::Error::custom)
    }
}

impl Semilinear1D {
    /// Checks disjointness, coverage, integrality and nonnegativity. Past
    /// the largest threshold every property is periodic, so one period of
    /// `lcm(moduli, slope denominators)` beyond it decides them exactly.
    pub fn new(pieces: Vec<Piece1D>) -> Result<Self, FuncError> {
        if pieces.is_empty() {
            return Err(FuncError::InvalidSemilinear("no pieces".into()));
        }
        for (k, p) in pieces.iter().enumerate() {
            if p.domain.modulus == Some(0) {
                return Err(FuncError::InvalidSemilinear(format!("piece {k}: modulus 0")));
            }
            if p.domain.below.is_none() && p.slope.is_negative() {
                return Err(FuncError::InvalidSemilinear(format!(
                    "piece {k}: negative slope on an unbounded domain"
                )));
            }
        }
        let f = Semilinear1D { pieces };
        let period = f
            .pieces
            .iter()
            .fold(f.period(), |acc, p| num_integer::lcm(acc, p.slope.denom() as u64));
        for x in 0..=f.max_threshold().unwrap_or(0) + period {
            let v = f.eval_exact(x)?;
            match v.to_integer() {
                None => {
                    return Err(FuncError::NonIntegerValue {
                        point: vec![x],
                        value: v.to_string(),
                    })
                }
                Some(n) if n < 0 => {
                    return Err(FuncError::NegativeValue {
                        point: vec![x],
                        value: n,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(f)
    }

    /// A single affine piece on all of ℕ.
    pub fn affine(slope: Rational, intercept: Rational) -> Result<Self, FuncError> {
        Semilinear1D::new(vec![Piece1D::new(Domain1D::all(), slope, intercept)])
    }

    pub fn pieces(&self) -> &[Piece1D] {
        &self.pieces
    }

    fn max_threshold(&self) -> Option<u64> {
        self.pieces.iter().flat_map(|p| p.domain.thresholds()).max()
    }

    /// lcm of the moduli, 1 if there are none.
    pub fn period(&self) -> u64 {
        self.pieces
            .iter()
            .filter_map(|p| p.domain.modulus)
            .fold(1, num_integer::lcm)
    }

    fn eval_exact(&self, x: u64) -> Result<Rational, FuncError> {
        let mut hit: Option<usize> = None;
        for (k, p) in self.pieces.iter().enumerate() {
            if p.domain.contains(x) {
                if let Some(first) = hit {
                    return Err(FuncError::OverlappingPieces { x, first, second: k });
                }
                hit = Some(k);
            }
        }
        let k = hit.ok_or(FuncError::NoPiece(x))?;
        Ok(self.pieces[k].value(x))
    }

    pub fn eval(&self, x: u64) -> u64 {
        // construction guarantees a unique, integral, nonnegative value
        self.eval_exact(x)
            .ok()
            .and_then(|v| v.to_integer())
            .expect("validated at construction") as u64
    }
}

/// `f(x) = prefix[x]` for `x ≤ n`; past `n`, `f(x+1) − f(x) = deltas[x mod p]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Eventual1DForm {
    pub n: u64,
    pub p: u64,
    pub prefix: Vec<u64>,
    pub deltas: Vec<u64>,
}

impl Eventual1DForm {
    pub fn eval(&self, x: u64) -> u64 {
        if x <= self.n {
            return self.prefix[x as usize];
        }
        let mut v = self.prefix[self.n as usize];
        let steps = x - self.n;
        let per_period: u64 = self.deltas.iter().sum();
        v += (steps / self.p) * per_period;
        for y in self.n + (steps / self.p) * self.p..x {
            v += self.deltas[(y % self.p) as usize];
        }
        v
    }

    /// Smallest seam `n' ≤ n` from which the periodic differences hold.
    pub fn minimal_seam(&self) -> Eventual1DForm {
        let mut n = self.n;
        while n > 0 {
            let y = n - 1;
            let diff = self.prefix[n as usize] - self.prefix[y as usize];
            if diff != self.deltas[(y % self.p) as usize] {
                break;
            }
            n = y;
        }
        self.with_seam(n)
    }

    /// Seam raised to the next multiple of `p`.
    pub fn normalized(&self) -> Eventual1DForm {
        self.with_seam(self.n.div_ceil(self.p) * self.p)
    }

    fn with_seam(&self, n: u64) -> Eventual1DForm {
        Eventual1DForm {
            n,
            p: self.p,
            prefix: (0..=n).map(|x| self.eval(x)).collect(),
            deltas: self.deltas.clone(),
        }
    }
}

/// Read off the eventual periodic-difference form of a nondecreasing `f`.
pub fn extract_eventual_1d(f: &Semilinear1D) -> Result<Eventual1DForm, FuncError> {
    let n = f.max_threshold().map_or(0, |t| t + 1);
    let p = f.period();
    for x in 0..n + 2 * p {
        let (v, next) = (f.eval(x), f.eval(x + 1));
        if next < v {
            return Err(FuncError::NotNondecreasing { x, value: v, next });
        }
    }
    let deltas: Vec<u64> = (0..p)
        .map(|a| {
            let x = first_in_class(n, a, p);
            f.eval(x + 1) - f.eval(x)
        })
        .collect();
    for x in n..n + 2 * p {
        let (v, next) = (f.eval(x), f.eval(x + 1));
        if next - v != deltas[(x % p) as usize] {
            return Err(FuncError::InconsistentPeriod { x });
        }
    }
    Ok(Eventual1DForm {
        n,
        p,
        prefix: (0..=n).map(|x| f.eval(x)).collect(),
        deltas,
    })
}

fn first_in_class(n: u64, a: u64, p: u64) -> u64 {
    n + (a + p - n % p) % p
}

/// First `(x, z)` in lexicographic order with `f(x) + f(z) > f(x + z)`.
pub fn superadditive_check(f: &dyn Fn(u64) -> u64, bound: u64) -> Option<(u64, u64)> {
    (0..=bound)
        .flat_map(|x| (0..=bound).map(move |z| (x, z)))
        .find(|&(x, z)| f(x) + f(z) > f(x + z))
}
