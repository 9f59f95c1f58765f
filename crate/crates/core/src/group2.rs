//! Translation-invariant metrics on the elementary abelian 2-group.
//!
//! `H_i = (Z/2)^i` is represented by the integers `0..2^i` under XOR; the new
//! generator at level `i` is the bit `1 << i`. An invariant metric is fixed by
//! `delta(x) = d(0, x)` on non-zero `x`, with `d(x, y) = delta(x ^ y)`.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result, SpecViolation};
use crate::extension::{sample_spec, ValueDomain};
use crate::metric::{validate_matrix, FiniteMetricSpace, Violation};
use crate::rational::{int, Rational};
use crate::rng::SplitMix64;

/// Largest supported level; `H_16` already has 65536 elements.
pub const MAX_LEVEL: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantMetric {
    pub level: usize,
    /// `delta[x - 1] = d(0, x)` for `x` in `1..2^level`.
    pub delta: Vec<Rational>,
}

impl InvariantMetric {
    /// The trivial metric on `H_0 = {0}`.
    pub fn trivial() -> Self {
        Self {
            level: 0,
            delta: Vec::new(),
        }
    }

    pub fn new(level: usize, delta: Vec<Rational>) -> Result<Self> {
        if level > MAX_LEVEL || delta.len() + 1 != 1 << level {
            return Err(Error::Structure(format!(
                "level {level} needs {} values, got {}",
                (1usize << level.min(MAX_LEVEL)) - 1,
                delta.len()
            )));
        }
        Ok(Self { level, delta })
    }

    pub fn order(&self) -> usize {
        1 << self.level
    }

    pub fn d(&self, x: usize, y: usize) -> Rational {
        match x ^ y {
            0 => Rational::zero(),
            z => self.delta[z - 1].clone(),
        }
    }

    /// Points named by `level`-bit strings, most significant bit first.
    pub fn name(&self, x: usize) -> String {
        if self.level == 0 {
            return "0".into();
        }
        format!("{x:0width$b}", width = self.level)
    }

    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.order();
        (0..n).map(|x| (0..n).map(|y| self.d(x, y)).collect()).collect()
    }

    /// The induced space, without validation.
    fn raw_space(&self) -> Option<FiniteMetricSpace> {
        let names = (0..self.order()).map(|x| self.name(x)).collect();
        FiniteMetricSpace::new(names, self.matrix()).ok()
    }

    pub fn to_space(&self) -> Result<FiniteMetricSpace> {
        let names = (0..self.order()).map(|x| self.name(x)).collect();
        FiniteMetricSpace::new(names, self.matrix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantViolation {
    NonPositive { element: usize, value: Rational },
    /// `delta(x ^ y) > delta(x) + delta(y)`.
    Triangle { x: usize, y: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub violations: Vec<InvariantViolation>,
    /// Violations of the full distance matrix.
    pub matrix_violations: Vec<Violation>,
    pub translation_invariant: bool,
}

impl InvariantReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.matrix_violations.is_empty() && self.translation_invariant
    }
}

/// Checks the invariant form and, independently, the full induced matrix.
pub fn validate_invariant(m: &InvariantMetric) -> InvariantReport {
    let mut violations = Vec::new();
    for (i, v) in m.delta.iter().enumerate() {
        if !v.is_positive() {
            violations.push(InvariantViolation::NonPositive {
                element: i + 1,
                value: v.clone(),
            });
        }
    }
    let n = m.order();
    for x in 1..n {
        for y in (x + 1)..n {
            if m.d(0, x ^ y) > m.d(0, x) + m.d(0, y) {
                violations.push(InvariantViolation::Triangle { x, y });
            }
        }
    }
    let matrix = m.matrix();
    let matrix_violations = validate_matrix(&matrix)
        .expect("XOR matrices are square and symmetric")
        .violations;
    InvariantReport {
        violations,
        matrix_violations,
        translation_invariant: translation_invariant(&matrix),
    }
}

/// `d(g ^ x, g ^ y) = d(x, y)` for every `g, x, y` of a matrix indexed by `H_i`.
pub fn translation_invariant(matrix: &[Vec<Rational>]) -> bool {
    let n = matrix.len();
    (0..n).all(|g| {
        (0..n).all(|x| (0..n).all(|y| matrix[g ^ x][g ^ y] == matrix[x][y]))
    })
}

/// Adds the generator `h = 1 << level` with `d(h, x) = new[x]` for `x` in `H_level`.
///
/// The prescription must satisfy the one-point condition against `H_level`;
/// translation then fixes `delta(h ^ x) = new[x]`.
pub fn extend_invariant_metric(m: &InvariantMetric, new: &[Rational]) -> Result<InvariantMetric> {
    let n = m.order();
    if new.len() != n {
        return Err(Error::LengthMismatch(n, new.len()));
    }
    if m.level >= MAX_LEVEL {
        return Err(Error::precondition("level limit reached", json!({ "level": m.level })));
    }
    let mut violations = Vec::new();
    for (x, g) in new.iter().enumerate() {
        if g.is_zero() {
            violations.push(SpecViolation::Zero { point: x });
        } else if g.is_negative() {
            violations.push(SpecViolation::Negative {
                point: x,
                value: g.clone(),
            });
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let d = m.d(x, y);
            if (&new[x] - &new[y]).abs() > d || d > &new[x] + &new[y] {
                violations.push(SpecViolation::Pair {
                    a: x,
                    b: y,
                    distance: d,
                    ga: new[x].clone(),
                    gb: new[y].clone(),
                });
            }
        }
    }
    if !violations.is_empty() {
        return Err(Error::Spec(violations));
    }
    let mut delta = m.delta.clone();
    delta.extend(new.iter().cloned());
    let out = InvariantMetric {
        level: m.level + 1,
        delta,
    };
    debug_assert!(validate_invariant(&out).is_ok());
    Ok(out)
}

/// Samples `levels` consistent extensions from the trivial metric.
pub fn generic_invariant_metric(
    levels: usize,
    domain: ValueDomain,
    seed: u64,
) -> Result<InvariantMetric> {
    if levels == 0 || levels > MAX_LEVEL {
        return Err(Error::precondition(
            "levels must be in 1..=16",
            json!({ "levels": levels }),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let mut m = InvariantMetric::trivial();
    for _ in 0..levels {
        let space = m.raw_space().expect("metric stays valid");
        let spec = sample_spec(&space, domain, &mut rng);
        let new: Vec<Rational> = (0..m.order())
            .map(|x| spec.get(x).cloned().expect("full spec"))
            .collect();
        m = extend_invariant_metric(&m, &new)?;
    }
    Ok(m)
}

/// The top-bit flip `x -> x ^ (1 << (level - 1))` maps `H_{level-1}` isometrically
/// onto its complement in `H_level`.
pub fn coset_isometric(m: &InvariantMetric) -> bool {
    if m.level == 0 {
        return true;
    }
    let h = 1 << (m.level - 1);
    (0..h).all(|x| (0..h).all(|y| m.d(x ^ h, y ^ h) == m.d(x, y)))
}

/// Every translation applied twice is the identity on `H_level`.
pub fn squares_to_identity(m: &InvariantMetric) -> bool {
    let n = m.order();
    (0..n).all(|g| (0..n).all(|x| (x ^ g) ^ g == x))
}

/// Outcome of [`exponent3_witness`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exponent3Report {
    pub alpha: Rational,
    pub eps: Rational,
    /// Lower bound for `d(0, y)`: `3 alpha / 2 - eps`.
    pub long_side: Rational,
    /// Upper bound for `d(0, x - y) = d(y, x)` and `d(y, x - y) = d(-x, y)`: `alpha / 2 + eps`.
    pub short_side: Rational,
    /// `long_side - 2 * short_side = alpha / 2 - 3 eps`.
    pub violation: Rational,
    /// The two translation identities, checked in `(Z/3)^2`.
    pub identities_hold: bool,
    pub contradiction: bool,
}

/// Element of `(Z/3)^2`.
type Z3 = (u8, u8);

fn add3(a: Z3, b: Z3) -> Z3 {
    ((a.0 + b.0) % 3, (a.1 + b.1) % 3)
}

fn neg3(a: Z3) -> Z3 {
    ((3 - a.0) % 3, (3 - a.1) % 3)
}

/// Translations `t` carrying the pair `(p, q)` onto `(r, s)`.
fn translates(p: Z3, q: Z3, r: Z3, s: Z3) -> bool {
    (0..3).any(|a| {
        (0..3).any(|b| {
            let t = (a, b);
            add3(p, t) == r && add3(q, t) == s
        })
    })
}

/// In an invariant metric on `<x, y> = (Z/3)^2` with `d(0, x) = alpha`,
/// `d(x, y)` and `d(-x, y)` within `eps` of `alpha / 2` and `d(0, y)` within
/// `eps` of `3 alpha / 2`, the triangle `0, y, x - y` violates the triangle
/// inequality by at least `alpha / 2 - 3 eps`. A contradiction is forced
/// exactly when `eps < alpha / 6`.
pub fn exponent3_witness(alpha: &Rational, eps: &Rational) -> Result<Exponent3Report> {
    if !alpha.is_positive() || eps.is_negative() {
        return Err(Error::precondition(
            "alpha must be positive and eps non-negative",
            json!({ "alpha": alpha, "eps": eps }),
        ));
    }
    let half = alpha / int(2);
    let long_side = &half * int(3) - eps;
    let short_side = &half + eps;
    let violation = &long_side - &short_side * int(2);
    let (zero, x, y) = ((0, 0), (1, 0), (0, 1));
    let x_minus_y = add3(x, neg3(y));
    // d(0, x-y) = d(y, x) and d(y, x-y) = d(-x, y) by translation
    let identities_hold =
        translates(zero, x_minus_y, y, x) && translates(y, x_minus_y, neg3(x), y);
    Ok(Exponent3Report {
        alpha: alpha.clone(),
        eps: eps.clone(),
        contradiction: violation.is_positive() && identities_hold,
        long_side,
        short_side,
        violation,
        identities_hold,
    })
}
