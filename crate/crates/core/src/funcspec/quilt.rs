use std::fmt;

use serde::Serialize;

use super::FuncError;
use crate::rational::Rational;

/// `g(x) = gradient · x + B(x mod p)` with `B` a total table over the
/// `p^d` congruence classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiltAffine {
    gradient: Vec<Rational>,
    period: u64,
    offsets: Vec<Rational>,
}

/// Outcome of structural validation of a quilt-affine function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuiltReport {
    Pass,
    NonIntegerValue {
        point: Vec<u64>,
        value: String,
    },
    NonIntegerDelta {
        class: Vec<u64>,
        axis: usize,
        delta: String,
    },
    NegativeDelta {
        class: Vec<u64>,
        axis: usize,
        delta: i64,
    },
}

impl QuiltReport {
    pub fn is_pass(&self) -> bool {
        matches!(self, QuiltReport::Pass)
    }
}

impl fmt::Display for QuiltReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuiltReport::Pass => write!(f, "pass"),
            QuiltReport::NonIntegerValue { point, value } => {
                write!(f, "non-integer value {value} at {point:?}")
            }
            QuiltReport::NonIntegerDelta { class, axis, delta } => write!(
                f,
                "non-integer finite difference {delta} at class {class:?} along axis {}",
                axis + 1
            ),
            QuiltReport::NegativeDelta { class, axis, delta } => write!(
                f,
                "negative finite difference {delta} at class {class:?} along axis {}",
                axis + 1
            ),
        }
    }
}

impl QuiltAffine {
    /// `offsets` is indexed by class in lexicographic order, first axis
    /// most significant.
    pub fn new(gradient: Vec<Rational>, period: u64, offsets: Vec<Rational>) -> Result<Self, FuncError> {
        if period == 0 {
            return Err(FuncError::InvalidQuilt("period must be positive".into()));
        }
        if gradient.iter().any(Rational::is_negative) {
            return Err(FuncError::InvalidQuilt("gradient entries must be >= 0".into()));
        }
        let classes = class_count(period, gradient.len())?;
        if offsets.len() != classes {
            return Err(FuncError::InvalidQuilt(format!(
                "offset table has {} entries, expected {classes}",
                offsets.len()
            )));
        }
        Ok(QuiltAffine {
            gradient,
            period,
            offsets,
        })
    }

    /// Build the offset table from a function of the class.
    pub fn from_fn(
        gradient: Vec<Rational>,
        period: u64,
        offset: impl Fn(&[u64]) -> Rational,
    ) -> Result<Self, FuncError> {
        if period == 0 {
            return Err(FuncError::InvalidQuilt("period must be positive".into()));
        }
        let offsets = Classes::new(gradient.len(), period).map(|c| offset(&c)).collect();
        QuiltAffine::new(gradient, period, offsets)
    }

    pub fn constant(dimension: usize, value: i64) -> Self {
        QuiltAffine::new(
            vec![Rational::zero(); dimension],
            1,
            vec![Rational::integer(value)],
        )
        .expect("constant is well-formed")
    }

    /// `floor(gradient · x)`, period = lcm of the gradient denominators.
    pub fn floor_of_linear(gradient: Vec<Rational>) -> Result<Self, FuncError> {
        let period = gradient
            .iter()
            .fold(1i64, |acc, r| num_integer::lcm(acc, r.denom())) as u64;
        let grad = gradient.clone();
        QuiltAffine::from_fn(gradient, period, move |class| {
            let dot: Rational = grad
                .iter()
                .zip(class)
                .map(|(g, &a)| *g * Rational::integer(a as i64))
                .sum();
            Rational::integer(dot.floor()) - dot
        })
    }

    /// `ceil(gradient · x)`.
    pub fn ceil_of_linear(gradient: Vec<Rational>) -> Result<Self, FuncError> {
        let neg: Vec<Rational> = gradient.iter().map(|r| -*r).collect();
        let period = gradient
            .iter()
            .fold(1i64, |acc, r| num_integer::lcm(acc, r.denom())) as u64;
        QuiltAffine::from_fn(gradient, period, move |class| {
            let neg_dot: Rational = neg
                .iter()
                .zip(class)
                .map(|(g, &a)| *g * Rational::integer(a as i64))
                .sum();
            // ceil(v) - v = -(floor(-v) - (-v))
            -(Rational::integer(neg_dot.floor()) - neg_dot)
        })
    }

    pub fn dimension(&self) -> usize {
        self.gradient.len()
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn gradient(&self) -> &[Rational] {
        &self.gradient
    }

    pub fn classes(&self) -> Classes {
        Classes::new(self.dimension(), self.period)
    }

    fn class_index(&self, x: &[u64]) -> usize {
        x.iter().fold(0usize, |acc, &v| {
            acc * self.period as usize + (v % self.period) as usize
        })
    }

    /// Periodic offset of the class containing `x`.
    pub fn offset(&self, x: &[u64]) -> Rational {
        self.offsets[self.class_index(x)]
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    /// Exact rational value; integral for validated functions.
    pub fn eval_exact(&self, x: &[u64]) -> Result<Rational, FuncError> {
        if x.len() != self.dimension() {
            return Err(FuncError::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        let linear: Rational = self
            .gradient
            .iter()
            .zip(x)
            .map(|(g, &v)| *g * Rational::integer(v as i64))
            .sum();
        Ok(linear + self.offset(x))
    }

    pub fn eval(&self, x: &[u64]) -> Result<i64, FuncError> {
        let v = self.eval_exact(x)?;
        v.to_integer().ok_or_else(|| FuncError::NonIntegerValue {
            point: x.to_vec(),
            value: v.to_string(),
        })
    }

    /// `gradient[axis] + B(class + e_axis) - B(class)`.
    pub fn delta_exact(&self, class: &[u64], axis: usize) -> Rational {
        let mut next = class.to_vec();
        next[axis] += 1;
        self.gradient[axis] + self.offset(&next) - self.offset(class)
    }

    pub fn delta(&self, class: &[u64], axis: usize) -> Result<i64, FuncError> {
        let d = self.delta_exact(class, axis);
        d.to_integer().ok_or_else(|| {
            FuncError::InvalidQuilt(format!(
                "non-integer finite difference {d} at class {class:?}, axis {}",
                axis + 1
            ))
        })
    }

    /// Integer values on `[0, p]^d`, then integral nonnegative finite
    /// differences on every class and axis.
    pub fn validate(&self) -> QuiltReport {
        for point in Classes::new(self.dimension(), self.period + 1) {
            let v = self.eval_exact(&point).expect("dimension matches");
            if !v.is_integer() {
                return QuiltReport::NonIntegerValue {
                    point,
                    value: v.to_string(),
                };
            }
        }
        for class in self.classes() {
            for axis in 0..self.dimension() {
                let d = self.delta_exact(&class, axis);
                match d.to_integer() {
                    None => {
                        return QuiltReport::NonIntegerDelta {
                            class,
                            axis,
                            delta: d.to_string(),
                        }
                    }
                    Some(v) if v < 0 => {
                        return QuiltReport::NegativeDelta {
                            class,
                            axis,
                            delta: v,
                        }
                    }
                    Some(_) => {}
                }
            }
        }
        QuiltReport::Pass
    }

    /// The function of the free axes `y ↦ g(full(y))`, where free axis `k`
    /// reads `y + shift[k]` and fixed axis `k` reads `fixed[k]`.
    pub fn shift_and_restrict(&self, shift: &[u64], fixed: &[Option<u64>]) -> QuiltAffine {
        assert_eq!(shift.len(), self.dimension());
        assert_eq!(fixed.len(), self.dimension());
        let free: Vec<usize> = (0..self.dimension()).filter(|&k| fixed[k].is_none()).collect();
        let full = |y: &[u64]| -> Vec<u64> {
            let mut x: Vec<u64> = fixed.iter().map(|v| v.unwrap_or(0)).collect();
            for (pos, &k) in free.iter().enumerate() {
                x[k] = y[pos] + shift[k];
            }
            x
        };
        let gradient: Vec<Rational> = free.iter().map(|&k| self.gradient[k]).collect();
        QuiltAffine::from_fn(gradient.clone(), self.period, |class| {
            // B'(a) = g(full(a)) - gradient' · a on the class representative
            let v = self.eval_exact(&full(class)).expect("dimension matches");
            let lin: Rational = gradient
                .iter()
                .zip(class)
                .map(|(g, &a)| *g * Rational::integer(a as i64))
                .sum();
            v - lin
        })
        .expect("period is positive")
    }
}

fn class_count(period: u64, dimension: usize) -> Result<usize, FuncError> {
    (period as usize)
        .checked_pow(dimension as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| FuncError::InvalidQuilt("offset table too large".into()))
}

/// All points of `[0, side)^d` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Classes {
    side: u64,
    next: Option<Vec<u64>>,
}

impl Classes {
    pub fn new(dimension: usize, side: u64) -> Self {
        Classes {
            side,
            next: (side > 0).then(|| vec![0; dimension]),
        }
    }
}

impl Iterator for Classes {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carry = true;
        for v in succ.iter_mut().rev() {
            *v += 1;
            if *v < self.side {
                carry = false;
                break;
            }
            *v = 0;
        }
        if !carry {
            self.next = Some(succ);
        }
        Some(current)
    }
}
