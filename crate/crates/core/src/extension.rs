//! The one-point extension property and the growing finite stand-in for the
//! rational Urysohn space.
//!
//! A [`GrowingSpace`] only ever changes by [`GrowingSpace::extend_point`], and
//! every step is logged, so the log alone rebuilds the space.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Interval, Result, SpecViolation};
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, Rational};
use crate::rng::SplitMix64;

/// Prescribed distances `g: A -> Q` from a prospective new point.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub targets: BTreeMap<usize, Rational>,
}

impl DistanceSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, point: usize, g: Rational) -> Self {
        self.targets.insert(point, g);
        self
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Self {
        Self {
            targets: pairs.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn get(&self, p: usize) -> Option<&Rational> {
        self.targets.get(&p)
    }

    pub fn min_value(&self) -> Option<&Rational> {
        self.targets.values().min()
    }
}

/// Checks the one-point extension condition for `s` against `m`.
///
/// Every `g(a)` must be strictly positive (a zero would duplicate `a`), and
/// `|g(a) - g(b)| <= d(a,b) <= g(a) + g(b)` must hold for all target pairs.
/// All violations are collected.
pub fn check_extension_spec(m: &FiniteMetricSpace, s: &DistanceSpec) -> Result<()> {
    for &a in s.targets.keys() {
        m.check_point(a)?;
    }
    let mut violations = Vec::new();
    for (&a, g) in &s.targets {
        if g.is_zero() {
            violations.push(SpecViolation::Zero { point: a });
        } else if g.is_negative() {
            violations.push(SpecViolation::Negative {
                point: a,
                value: g.clone(),
            });
        }
    }
    let entries: Vec<_> = s.targets.iter().collect();
    for (i, (&a, ga)) in entries.iter().enumerate() {
        for (&b, gb) in &entries[i + 1..] {
            let d = m.d(a, b);
            if (*ga - *gb).abs() > *d || *d > *ga + *gb {
                violations.push(SpecViolation::Pair {
                    a,
                    b,
                    distance: d.clone(),
                    ga: (*ga).clone(),
                    gb: (*gb).clone(),
                });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Spec(violations))
    }
}

/// Feasible values for `d(z, a)` given already-fixed distances from `z`:
/// `[max_b |g(b) - d(a,b)|, min_b (g(b) + d(a,b))]`, unbounded when nothing is fixed.
pub fn feasible_interval(
    m: &FiniteMetricSpace,
    fixed: &[(usize, Rational)],
    a: usize,
) -> Interval {
    let mut lo = Rational::zero();
    let mut hi: Option<Rational> = None;
    for (b, g) in fixed {
        let d = m.d(a, *b);
        let l = (g - d).abs();
        if l > lo {
            lo = l;
        }
        let h = g + d;
        if hi.as_ref().is_none_or(|x| h < *x) {
            hi = Some(h);
        }
    }
    Interval { lo, hi }
}

/// One step of a [`GrowingSpace`]'s history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub targets: BTreeMap<usize, Rational>,
    pub new: usize,
}

/// A finite metric space grown only by logged one-point extensions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GrowingSpace {
    space: FiniteMetricSpace,
    log: Vec<LogEntry>,
}

impl GrowingSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adopts an existing space, recording it as full-target extensions so
    /// that the log still replays to it.
    pub fn from_space(space: FiniteMetricSpace) -> Self {
        let log = space
            .points()
            .map(|k| LogEntry {
                targets: (0..k).map(|j| (j, space.d(j, k).clone())).collect(),
                new: k,
            })
            .collect();
        Self { space, log }
    }

    /// Rebuilds a space from its log, checking that ids line up.
    pub fn replay(log: &[LogEntry]) -> Result<Self> {
        let mut gs = GrowingSpace::new();
        for entry in log {
            let spec = DistanceSpec {
                targets: entry.targets.clone(),
            };
            let id = gs.extend_point(&spec)?;
            if id != entry.new {
                return Err(Error::precondition(
                    "log entry id out of sequence",
                    json!({ "expected": entry.new, "got": id }),
                ));
            }
        }
        Ok(gs)
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn d(&self, a: usize, b: usize) -> &Rational {
        self.space.d(a, b)
    }

    /// Adds a point `z` with `d(z,a) = g(a)` for every target.
    ///
    /// Distances to points outside the targets are fixed one at a time in
    /// point order, each at the midpoint of its feasible interval given the
    /// distances fixed so far. With no targets at all, the first point gets
    /// distance 1 and the rest follow the same rule.
    pub fn extend_point(&mut self, s: &DistanceSpec) -> Result<usize> {
        check_extension_spec(&self.space, s)?;
        let n = self.space.len();
        let mut row: Vec<Option<Rational>> = vec![None; n];
        let mut fixed: Vec<(usize, Rational)> = Vec::with_capacity(n);
        for (&a, g) in &s.targets {
            row[a] = Some(g.clone());
            fixed.push((a, g.clone()));
        }
        for a in 0..n {
            if row[a].is_some() {
                continue;
            }
            let iv = feasible_interval(&self.space, &fixed, a);
            let v = match &iv.hi {
                None => int(1),
                Some(hi) => Rational::midpoint(&iv.lo, hi),
            };
            debug_assert!(v.is_positive() && iv.contains(&v));
            fixed.push((a, v.clone()));
            row[a] = Some(v);
        }
        let row: Vec<Rational> = row.into_iter().map(|v| v.expect("filled")).collect();
        let id = self.space.push_unchecked(n.to_string(), row);
        self.log.push(LogEntry {
            targets: s.targets.clone(),
            new: id,
        });
        debug_assert!(self.space.validate().is_ok());
        Ok(id)
    }

    /// Adds two points realizing `s` at the largest possible mutual distance,
    /// `2 * min g`.
    pub fn realize_sphere_pair(&mut self, s: &DistanceSpec) -> Result<(usize, usize)> {
        let bound = sphere_diameter_bound(s)?;
        check_extension_spec(&self.space, s)?;
        let z1 = self.extend_point(s)?;
        let z2 = self.extend_point(&s.clone().with(z1, bound))?;
        Ok((z1, z2))
    }
}

/// The diameter of the set of realizations of `s`: twice the smallest prescribed distance.
pub fn sphere_diameter_bound(s: &DistanceSpec) -> Result<Rational> {
    match s.min_value() {
        Some(m) => Ok(int(2) * m),
        None => Err(Error::precondition(
            "sphere diameter is unbounded for an empty target set",
            json!({}),
        )),
    }
}

/// The values a sampled distance may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueDomain {
    /// `k / denominator` for `1 <= k <= max * denominator`.
    Rational { denominator: u32, max: u32 },
    /// `1..=max`.
    Integer { max: u32 },
    /// `{1, 2}`: the path metric of a graph.
    Graph,
}

impl ValueDomain {
    fn step_and_cap(&self) -> (Rational, i64) {
        match *self {
            ValueDomain::Rational { denominator, max } => (
                Rational::new(1, denominator as i64),
                max as i64 * denominator as i64,
            ),
            ValueDomain::Integer { max } => (int(1), max as i64),
            ValueDomain::Graph => (int(1), 2),
        }
    }

    /// Domain members inside `iv`, as `k * step` for `k` in the returned range.
    pub fn members_in(&self, iv: &Interval) -> (Rational, std::ops::RangeInclusive<i64>) {
        let (step, cap) = self.step_and_cap();
        let lo = (&iv.lo / &step).ceil().to_i64().unwrap_or(i64::MAX).max(1);
        let hi = match &iv.hi {
            Some(h) => (h / &step).floor().to_i64().unwrap_or(cap).min(cap),
            None => cap,
        };
        (step, lo..=hi)
    }

    /// All members, smallest first.
    pub fn values(&self) -> Vec<Rational> {
        let (step, cap) = self.step_and_cap();
        (1..=cap).map(|k| int(k) * &step).collect()
    }

    fn sample(&self, iv: &Interval, rng: &mut SplitMix64) -> Option<Rational> {
        let (step, range) = self.members_in(iv);
        if range.is_empty() {
            return None;
        }
        let count = (range.end() - range.start() + 1) as u64;
        let k = range.start() + rng.below(count) as i64;
        Some(int(k) * step)
    }
}

impl fmt::Display for ValueDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDomain::Rational { denominator, max } => write!(f, "rat:{denominator}:{max}"),
            ValueDomain::Integer { max } => write!(f, "int:{max}"),
            ValueDomain::Graph => write!(f, "graph"),
        }
    }
}

impl FromStr for ValueDomain {
    type Err = Error;

    /// `int:D`, `rat:Q:D` or `graph`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("value domain {s:?}: expected int:D, rat:Q:D or graph"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<u32>().ok().filter(|v| *v > 0).ok_or_else(bad);
        match parts.as_slice() {
            ["graph"] | ["pair"] => Ok(ValueDomain::Graph),
            ["int", d] => Ok(ValueDomain::Integer { max: num(d)? }),
            ["rat", q, d] => Ok(ValueDomain::Rational {
                denominator: num(q)?,
                max: num(d)?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Samples a random distance vector for a new point: each coordinate is drawn
/// uniformly from the domain members of its feasible interval, in point order.
pub fn sample_spec(
    m: &FiniteMetricSpace,
    domain: ValueDomain,
    rng: &mut SplitMix64,
) -> DistanceSpec {
    let mut fixed: Vec<(usize, Rational)> = Vec::with_capacity(m.len());
    for a in m.points() {
        let iv = feasible_interval(m, &fixed, a);
        let v = domain
            .sample(&iv, rng)
            .expect("feasible intervals always meet a lattice domain");
        fixed.push((a, v));
    }
    DistanceSpec::from_pairs(fixed)
}

/// An `n`-point space grown by random admissible extensions; deterministic in `seed`.
pub fn generic_space(n: usize, domain: ValueDomain, seed: u64) -> Result<GrowingSpace> {
    if n == 0 {
        return Err(Error::precondition("generic space needs n >= 1", json!({ "n": n })));
    }
    let mut rng = SplitMix64::new(seed);
    let mut gs = GrowingSpace::new();
    for _ in 0..n {
        let spec = sample_spec(gs.space(), domain, &mut rng);
        gs.extend_point(&spec)?;
    }
    Ok(gs)
}

/// How often small admissible specs are already realized inside a space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionStats {
    pub accepted: u64,
    pub realized: u64,
    pub fraction: Rational,
}

/// Enumerates every spec on at most `max_targets` points with values from
/// `domain` and counts those realized by an existing point outside the targets.
pub fn extension_statistics(
    m: &FiniteMetricSpace,
    domain: ValueDomain,
    max_targets: usize,
) -> ExtensionStats {
    let values = domain.values();
    let mut accepted = 0u64;
    let mut realized = 0u64;
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for p in m.points() {
        let more: Vec<Vec<usize>> = subsets
            .iter()
            .filter(|s| s.len() < max_targets)
            .map(|s| {
                let mut t = s.clone();
                t.push(p);
                t
            })
            .collect();
        subsets.extend(more);
    }
    for set in subsets.iter().filter(|s| !s.is_empty()) {
        let mut idx = vec![0usize; set.len()];
        loop {
            let spec =
                DistanceSpec::from_pairs(set.iter().zip(&idx).map(|(&a, &i)| (a, values[i].clone())));
            if check_extension_spec(m, &spec).is_ok() {
                accepted += 1;
                let hit = m.points().any(|z| {
                    !spec.targets.contains_key(&z)
                        && spec.targets.iter().all(|(&a, g)| m.d(z, a) == g)
                });
                if hit {
                    realized += 1;
                }
            }
            // odometer
            let mut pos = 0;
            while pos < idx.len() {
                idx[pos] += 1;
                if idx[pos] < values.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    let fraction = if accepted == 0 {
        Rational::zero()
    } else {
        Rational::new(realized as i64, accepted as i64)
    };
    ExtensionStats {
        accepted,
        realized,
        fraction,
    }
}
