//! Toeplitz distance functions: shift-invariant metrics on the integers.
//!
//! A prefix `(f(1), ..., f(n))` (with `f(0) = 0` implicit) induces the metric
//! `d(i, j) = f(|i - j|)` on `{0, ..., n}`. It is a metric exactly when every
//! `f(i) > 0` and `|f(i) - f(j)| <= f(i + j) <= f(i) + f(j)` for `i + j <= n`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Interval, Result};
use crate::metric::{validate_matrix, FiniteMetricSpace};
use crate::rational::{int, lcm_of_denominators, Rational};

/// A finite initial fragment of a Toeplitz distance function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToeplitzPrefix {
    values: Vec<Rational>,
}

impl ToeplitzPrefix {
    /// Validates `values` as `(f(1), ..., f(n))`.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        let report = is_toeplitz(&values);
        if report.is_ok() {
            Ok(Self { values })
        } else {
            Err(Error::precondition(
                "not a Toeplitz prefix",
                json!({ "violations": report.violations }),
            ))
        }
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f(i)`, with `f(0) = 0`. Panics past the end.
    pub fn f(&self, i: usize) -> Rational {
        if i == 0 {
            Rational::zero()
        } else {
            self.values[i - 1].clone()
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn is_integral(&self) -> bool {
        self.values.iter().all(Rational::is_integer)
    }

    pub fn max(&self) -> Option<&Rational> {
        self.values.iter().max()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToeplitzViolation {
    NonPositive { index: usize, value: Rational },
    /// `|f(i) - f(j)| > f(i + j)`.
    Lower { i: usize, j: usize },
    /// `f(i + j) > f(i) + f(j)`.
    Upper { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToeplitzReport {
    pub violations: Vec<ToeplitzViolation>,
}

impl ToeplitzReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity and the two-sided triangle condition on every `i <= j`, `i + j <= n`.
pub fn is_toeplitz(values: &[Rational]) -> ToeplitzReport {
    let n = values.len();
    let f = |i: usize| &values[i - 1];
    let mut violations = Vec::new();
    for (idx, v) in values.iter().enumerate() {
        if !v.is_positive() {
            violations.push(ToeplitzViolation::NonPositive {
                index: idx + 1,
                value: v.clone(),
            });
        }
    }
    for i in 1..=n {
        for j in i..=(n - i) {
            let s = f(i + j);
            if (f(i) - f(j)).abs() > *s {
                violations.push(ToeplitzViolation::Lower { i, j });
            }
            if *s > f(i) + f(j) {
                violations.push(ToeplitzViolation::Upper { i, j });
            }
        }
    }
    ToeplitzReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibilityViolation {
    NonPositive { index: usize, value: Rational },
    /// `|h(i) - h(i+k)| <= f(k) <= h(i) + h(i+k)` fails.
    Pair { i: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub violations: Vec<AdmissibilityViolation>,
}

impl AdmissibilityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Whether `h` is a realizable distance profile against `f`: for
/// `1 <= i < i + k <= m` and `k <= n`, `|h(i) - h(i+k)| <= f(k) <= h(i) + h(i+k)`.
pub fn is_admissible(f: &ToeplitzPrefix, h: &[Rational]) -> AdmissibilityReport {
    let mut violations = Vec::new();
    for (idx, v) in h.iter().enumerate() {
        if !v.is_positive() {
            violations.push(AdmissibilityViolation::NonPositive {
                index: idx + 1,
                value: v.clone(),
            });
        }
    }
    let m = h.len();
    for i in 1..=m {
        for k in 1..=f.len().min(m - i) {
            let (a, b) = (&h[i - 1], &h[i + k - 1]);
            let fk = f.f(k);
            if (a - b).abs() > fk || fk > a + b {
                violations.push(AdmissibilityViolation::Pair { i, k });
            }
        }
    }
    AdmissibilityReport { violations }
}

/// Bounds on a value appended at index `n + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmalgamationBounds {
    /// `max_k |f(k) - f(n - k + 1)|`
    pub lower: Rational,
    /// `min_k (f(k) + f(n - k + 1))`
    pub upper: Rational,
}

impl AmalgamationBounds {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower.clone(), self.upper.clone())
    }
}

/// The exact range for `f(n+1)` keeping the prefix Toeplitz. `lower <= upper` always holds.
pub fn amalgamation_bounds(f: &ToeplitzPrefix) -> AmalgamationBounds {
    let n = f.len();
    let mut lower = Rational::zero();
    let mut upper: Option<Rational> = None;
    for k in 1..=n {
        let (a, b) = (f.f(k), f.f(n - k + 1));
        let l = (&a - &b).abs();
        if l > lower {
            lower = l;
        }
        let u = a + b;
        if upper.as_ref().is_none_or(|x| u < *x) {
            upper = Some(u);
        }
    }
    AmalgamationBounds {
        lower,
        // An empty prefix accepts any positive value; report [0, 0] only as a
        // formality since callers never extend an empty prefix this way.
        upper: upper.unwrap_or_else(Rational::zero),
    }
}

/// The pair of values produced by one two-sided extension step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionStep {
    /// Appended to the function: `f(n+1)`.
    pub g1: Rational,
    /// Prepended to the admissible vector.
    pub g_n: Rational,
    /// `max_i {f(i), h(i)}`.
    pub d: Rational,
}

fn require_integral(values: &[Rational], what: &str) -> Result<()> {
    if values.iter().all(Rational::is_integer) {
        Ok(())
    } else {
        Err(Error::precondition(
            format!("{what} must be integer-valued"),
            json!({ what: values }),
        ))
    }
}

fn require_admissible(f: &ToeplitzPrefix, h: &[Rational]) -> Result<()> {
    let rep = is_admissible(f, h);
    if rep.is_ok() {
        Ok(())
    } else {
        Err(Error::precondition(
            "vector is not admissible for the prefix",
            json!({ "violations": rep.violations }),
        ))
    }
}

fn floor_mid(lo: &Rational, hi: &Rational) -> Rational {
    Rational::midpoint(lo, hi).floor()
}

/// Extends `f` by one value at the end and `h` by one value at the front.
///
/// Integer mode only; `h` must be `f`-admissible and of the same length. The
/// pair `(g1, g_n)` satisfies
///
/// 1. `g1` within [`amalgamation_bounds`] of `f`,
/// 2. `max_i |f(i) - h(i)| <= g_n <= min_i (f(i) + h(i))`,
/// 3. `|g1 - g_n| <= h(n) <= g1 + g_n`,
/// 4. both inside `[2, d - 1]` intersected with `clamp`.
///
/// `g1` is the floor-midpoint of its feasible range, then `g_n` the
/// floor-midpoint of the range that `g1` leaves.
pub fn extend_one(
    f: &ToeplitzPrefix,
    h: &[Rational],
    clamp: Option<(Rational, Rational)>,
) -> Result<ExtensionStep> {
    require_integral(f.values(), "f")?;
    require_integral(h, "h")?;
    if h.len() != f.len() || f.is_empty() {
        return Err(Error::LengthMismatch(f.len(), h.len()));
    }
    require_admissible(f, h)?;
    let n = f.len();
    let d = f
        .values()
        .iter()
        .chain(h)
        .max()
        .cloned()
        .expect("non-empty");
    let amal = amalgamation_bounds(f).interval();
    let mut i2 = Interval::unbounded(Rational::zero());
    for i in 1..=n {
        let (fi, hi) = (f.f(i), &h[i - 1]);
        i2 = i2.intersect(&Interval::new((&fi - hi).abs(), &fi + hi));
    }
    let mut window = Interval::new(int(2), &d - int(1));
    if let Some((lo, hi)) = clamp {
        window = window.intersect(&Interval::new(lo, hi));
    }
    let j1 = amal.intersect(&window);
    let j2 = i2.intersect(&window);
    let hn = h[n - 1].clone();
    let infeasible = || {
        Error::infeasible(
            "no (g1, gN) satisfies the extension system",
            json!({
                "g1_interval": amal.to_string(),
                "gn_interval": i2.to_string(),
                "clamp": window.to_string(),
            }),
        )
    };
    if j1.is_empty() || j2.is_empty() {
        return Err(infeasible());
    }
    let (j2lo, j2hi) = (j2.lo.clone(), j2.hi.clone().expect("bounded"));
    let g1_range = Interval::new(
        j1.lo.clone().max(&j2lo - &hn).max(&hn - &j2hi),
        j1.hi.clone().expect("bounded").min(&j2hi + &hn),
    );
    if g1_range.is_empty() {
        return Err(infeasible());
    }
    let g1 = floor_mid(&g1_range.lo, g1_range.hi.as_ref().expect("bounded"));
    let gn_range = Interval::new(
        j2lo.max(&g1 - &hn).max(&hn - &g1),
        j2hi.min(&g1 + &hn),
    );
    let g_n = floor_mid(&gn_range.lo, gn_range.hi.as_ref().expect("bounded"));
    debug_assert!(gn_range.contains(&g_n));
    Ok(ExtensionStep { g1, g_n, d })
}

/// How a prolongation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProlongMethod {
    /// Two-sided block sweep with shrinking clamps.
    Blocks,
    /// Smallest-first depth-first search at the shortest feasible gap.
    Search,
    /// Shortest-path completion at the shortest feasible gap.
    Completion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prolongation {
    pub prefix: ToeplitzPrefix,
    /// Number of values inserted between `f` and `h`.
    pub gap: usize,
    pub method: ProlongMethod,
}

impl Prolongation {
    /// Offset `N` with `f(N + i) = h(i)`.
    pub fn window_offset(&self, h_len: usize) -> usize {
        self.prefix.len() - h_len
    }
}

/// Node budget for the depth-first fallback.
pub const SEARCH_BUDGET: u64 = 1_000_000;

/// Finds `G` so that `(f, G, h)` is a Toeplitz prefix (integer mode, equal lengths).
///
/// The block sweep is tried first: `n * d` inserted values in `d` blocks of
/// length `n`, filled pairwise from both ends by [`extend_one`] with clamp
/// `[k+1, d-k]` at depth `k`. For odd `d` the middle block is constant
/// `(d-1)/2`; for even `d` the two middle blocks are constant `d/2`. If any
/// step is infeasible or the result fails validation, the shortest gap
/// admitting a completion is searched instead.
pub fn prolong(f: &ToeplitzPrefix, h: &[Rational]) -> Result<Prolongation> {
    require_integral(f.values(), "f")?;
    require_integral(h, "h")?;
    if h.len() != f.len() || f.is_empty() {
        return Err(Error::LengthMismatch(f.len(), h.len()));
    }
    require_admissible(f, h)?;
    if let Some(p) = block_sweep(f, h) {
        return Ok(p);
    }
    search_prolongation(f, h, 1, true)
}

fn block_sweep(f: &ToeplitzPrefix, h: &[Rational]) -> Option<Prolongation> {
    let n = f.len();
    let d = f.values().iter().chain(h).max()?.to_i64()?;
    if d < 3 {
        return None;
    }
    let du = d as usize;
    let mut front = f.values().to_vec();
    // back-part stored in forward order
    let mut back = h.to_vec();
    let pairs = if du % 2 == 1 { (du - 1) / 2 } else { du / 2 - 1 };
    for k in 1..=pairs {
        let clamp = (int(k as i64 + 1), int(d - k as i64));
        for _ in 0..n {
            let cur = ToeplitzPrefix {
                values: front.clone(),
            };
            let step = extend_one(&cur, &back, Some(clamp.clone())).ok()?;
            front.push(step.g1);
            back.insert(0, step.g_n);
        }
    }
    let middle_blocks = du - 2 * pairs;
    let middle_value = if du % 2 == 1 { int((d - 1) / 2) } else { int(d / 2) };
    let mut values = front;
    values.extend(std::iter::repeat_n(middle_value, middle_blocks * n));
    values.extend(back);
    if is_toeplitz(&values).is_ok() {
        Some(Prolongation {
            prefix: ToeplitzPrefix { values },
            gap: n * du,
            method: ProlongMethod::Blocks,
        })
    } else {
        None
    }
}

/// Shortest-path completion of the shift-invariant metric whose only known
/// steps are `1..=n` (weights `f`) and `offset+1..=offset+k` (weights `h`).
///
/// Returns `f̄(1..=offset+k)` if the completion reproduces every known value;
/// any Toeplitz prolongation with this window offset is bounded above by it.
pub fn completion(f: &ToeplitzPrefix, h: &[Rational], offset: usize) -> Option<Vec<Rational>> {
    let n = f.len();
    let k = h.len();
    let top = offset + k;
    let mut steps: Vec<(usize, Rational)> = (1..=n).map(|s| (s, f.f(s))).collect();
    steps.extend(h.iter().enumerate().map(|(i, w)| (offset + 1 + i, w.clone())));
    // Steps commute, so some ordering of any path stays within [-S, top + S].
    let span = steps.iter().map(|(s, _)| *s).max().unwrap_or(0);
    let lo = -(span as i64);
    let hi = (top + span) as i64;
    let size = (hi - lo + 1) as usize;
    let mut dist: Vec<Option<Rational>> = vec![None; size];
    let mut done = vec![false; size];
    let origin = (-lo) as usize;
    dist[origin] = Some(Rational::zero());
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((Rational::zero(), origin)));
    while let Some(Reverse((du, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for (s, w) in &steps {
            for v in [u as i64 + *s as i64, u as i64 - *s as i64] {
                if v < 0 || v >= size as i64 {
                    continue;
                }
                let v = v as usize;
                let nd = &du + w;
                if dist[v].as_ref().is_none_or(|x| nd < *x) {
                    dist[v] = Some(nd.clone());
                    heap.push(Reverse((nd, v)));
                }
            }
        }
    }
    let at = |p: usize| dist[origin + p].clone();
    for (s, w) in &steps {
        if at(*s).as_ref() != Some(w) {
            return None;
        }
    }
    (1..=top).map(at).collect()
}

fn search_prolongation(
    f: &ToeplitzPrefix,
    h: &[Rational],
    min_gap: usize,
    try_dfs: bool,
) -> Result<Prolongation> {
    let n = f.len();
    let d = f.values().iter().chain(h).max().cloned().unwrap_or_else(Rational::one);
    // A prolongation exists for some gap; the completion detects the first one.
    let cap = gap_cap(f, h);
    for gap in min_gap..=cap {
        let offset = n + gap;
        let Some(upper) = completion(f, h, offset) else {
            continue;
        };
        if try_dfs && d.is_integer() {
            if let Some(values) = dfs_fill(f, h, gap, &d, &upper) {
                return Ok(Prolongation {
                    prefix: ToeplitzPrefix { values },
                    gap,
                    method: ProlongMethod::Search,
                });
            }
        }
        debug_assert!(is_toeplitz(&upper).is_ok());
        return Ok(Prolongation {
            prefix: ToeplitzPrefix { values: upper },
            gap,
            method: ProlongMethod::Completion,
        });
    }
    Err(Error::Budget(cap as u64))
}

/// Upper limit on the gap explored by the completion search.
fn gap_cap(f: &ToeplitzPrefix, h: &[Rational]) -> usize {
    let max = f.values().iter().chain(h).max().cloned().unwrap_or_else(Rational::one);
    let min = f.values().iter().chain(h).min().cloned().unwrap_or_else(Rational::one);
    let ratio = (max / min).ceil().to_i64().unwrap_or(i64::MAX).clamp(1, 1 << 20) as usize;
    4 * (f.len() + h.len() + 1) * (ratio + 1)
}

/// Smallest-first depth-first fill of the gap with integers in
/// `[1, min(d, upper)]`, pruning on every condition whose indices are known.
fn dfs_fill(
    f: &ToeplitzPrefix,
    h: &[Rational],
    gap: usize,
    d: &Rational,
    upper: &[Rational],
) -> Option<Vec<Rational>> {
    let n = f.len();
    let k = h.len();
    let total = n + gap + k;
    let mut vals: Vec<Rational> = Vec::with_capacity(total);
    vals.extend_from_slice(f.values());
    let h_start = n + gap + 1;
    let mut budget = SEARCH_BUDGET;

    fn range_at(vals: &[Rational], h: &[Rational], h_start: usize, p: usize) -> Interval {
        let fv = |i: usize| &vals[i - 1];
        let mut iv = Interval::unbounded(int(1));
        for i in 1..=p / 2 {
            let (a, b) = (fv(i), fv(p - i));
            iv = iv.intersect(&Interval::new((a - b).abs(), a + b));
        }
        // conditions (p, q - p, q) with q inside the fixed tail
        for (t, hq) in h.iter().enumerate() {
            let q = h_start + t;
            let r = q - p;
            if r == 0 || r > p {
                continue;
            }
            let b = if r == p { None } else { Some(fv(r)) };
            match b {
                Some(b) => {
                    // |x - b| <= hq <= x + b
                    iv = iv.intersect(&Interval::new((hq - b).max(b - hq), hq + b));
                }
                None => {
                    // r == p: 0 <= hq <= 2x
                    iv = iv.intersect(&Interval::unbounded((hq / int(2)).ceil()));
                }
            }
        }
        iv
    }

    fn go(
        vals: &mut Vec<Rational>,
        h: &[Rational],
        h_start: usize,
        d: &Rational,
        upper: &[Rational],
        budget: &mut u64,
    ) -> bool {
        let p = vals.len() + 1;
        if p == h_start {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let iv = range_at(vals, h, h_start, p);
        let lo = iv.lo.ceil().max(int(1));
        let mut hi = d.clone().min(upper[p - 1].clone());
        if let Some(h2) = &iv.hi {
            hi = hi.min(h2.floor());
        }
        let mut x = lo;
        while x <= hi {
            vals.push(x.clone());
            if go(vals, h, h_start, d, upper, budget) {
                return true;
            }
            vals.pop();
            x = x + int(1);
        }
        false
    }

    if !go(&mut vals, h, h_start, d, upper, &mut budget) {
        return None;
    }
    vals.extend_from_slice(h);
    is_toeplitz(&vals).is_ok().then_some(vals)
}

/// The shortest prolongation of `f` that ends with the window `h`
/// (`h.len() <= f.len()`, `h` admissible). Works in both modes; a gap of zero
/// places `h` directly after `f`.
pub fn prolong_to_window(f: &ToeplitzPrefix, h: &[Rational]) -> Result<Prolongation> {
    if h.is_empty() || h.len() > f.len() {
        return Err(Error::LengthMismatch(f.len(), h.len()));
    }
    require_admissible(f, h)?;
    search_prolongation(f, h, 0, false)
}

/// Integer rescaling of a rational pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scaled {
    pub f: Vec<Rational>,
    pub h: Vec<Rational>,
    pub factor: Rational,
}

/// Multiplies by the lcm of all denominators, and by 3 more if the resulting
/// maximum is below 3 (so the block sweep has room).
pub fn scale_to_integer(f: &[Rational], h: &[Rational]) -> Scaled {
    let mut factor = Rational::from(lcm_of_denominators(f.iter().chain(h)));
    let max = f.iter().chain(h).max().cloned().unwrap_or_else(Rational::zero);
    if &max * &factor < int(3) {
        factor = factor * int(3);
    }
    let scale = |v: &[Rational]| v.iter().map(|x| x * &factor).collect();
    Scaled {
        f: scale(f),
        h: scale(h),
        factor,
    }
}

/// Rational-mode [`prolong`]: scale to integers, prolong, scale back.
pub fn prolong_rational(f: &ToeplitzPrefix, h: &[Rational]) -> Result<Prolongation> {
    let scaled = scale_to_integer(f.values(), h);
    let fi = ToeplitzPrefix::new(scaled.f)?;
    let p = prolong(&fi, &scaled.h)?;
    let values = p
        .prefix
        .values()
        .iter()
        .map(|v| v / &scaled.factor)
        .collect();
    Ok(Prolongation {
        prefix: ToeplitzPrefix::new(values)?,
        ..p
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `f(N + i) = h(i)`
    Forward,
    /// `f(N - i) = h(i)`
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowMatch {
    pub offset: usize,
    pub orientation: Orientation,
}

/// Smallest forward offset `N` with `f(N + i) = h(i)`, else the smallest
/// reverse offset with `f(N - i) = h(i)`.
pub fn verify_window_realization(f: &ToeplitzPrefix, h: &[Rational]) -> Option<WindowMatch> {
    let (n, k) = (f.len(), h.len());
    if k == 0 || k > n {
        return None;
    }
    let vals = f.values();
    if let Some(off) = (0..=n - k).find(|&off| vals[off..off + k] == *h) {
        return Some(WindowMatch {
            offset: off,
            orientation: Orientation::Forward,
        });
    }
    // f(N - i) for i = 1..k lives at vals[N - i - 1]; need N - k >= 1.
    ((k + 1)..=(n + 1))
        .find(|&big| (1..=k).all(|i| vals[big - i - 1] == h[i - 1]))
        .map(|offset| WindowMatch {
            offset,
            orientation: Orientation::Reverse,
        })
}

/// The `(size + 1) x (size + 1)` matrix `d(i, j) = f(|i - j|)`.
pub fn cyclic_matrix(f: &ToeplitzPrefix, size: usize) -> Result<Vec<Vec<Rational>>> {
    if size > f.len() {
        return Err(Error::precondition(
            "cyclic space larger than the prefix",
            json!({ "size": size, "prefix_len": f.len() }),
        ));
    }
    Ok((0..=size)
        .map(|i| (0..=size).map(|j| f.f(i.abs_diff(j))).collect())
        .collect())
}

/// The cyclic metric on `{0, ..., size}`.
pub fn cyclic_metric(f: &ToeplitzPrefix, size: usize) -> Result<FiniteMetricSpace> {
    FiniteMetricSpace::from_matrix(cyclic_matrix(f, size)?)
}

/// Checks that `i -> i + 1` preserves every distance in a cyclic space and
/// returns its constant displacement `d(i, i + 1)`.
pub fn shift_displacement(m: &FiniteMetricSpace) -> Result<Rational> {
    let n = m.len();
    if n < 2 {
        return Err(Error::precondition("shift needs two points", json!({ "len": n })));
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            if m.d(i, j) != m.d(i + 1, j + 1) {
                return Err(Error::precondition(
                    "shift is not a partial isometry",
                    json!({ "i": i, "j": j }),
                ));
            }
        }
    }
    let disp = m.d(0, 1).clone();
    if (0..n - 1).any(|i| *m.d(i, i + 1) != disp) {
        return Err(Error::precondition("displacement not constant", json!({})));
    }
    Ok(disp)
}

/// Conjugacy evidence from two displacement functions `f_g(n) = d(x, g^n x)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Conjugacy {
    /// The functions differ at `index`, so the isometries are not conjugate.
    NonConjugate {
        index: usize,
        left: Rational,
        right: Rational,
    },
    /// Equal on `1..=up_to`.
    Indistinguishable { up_to: usize },
}

pub fn conjugacy_invariant(a: &ToeplitzPrefix, b: &ToeplitzPrefix) -> Conjugacy {
    let n = a.len().min(b.len());
    match (1..=n).find(|&i| a.f(i) != b.f(i)) {
        Some(index) => Conjugacy::NonConjugate {
            index,
            left: a.f(index),
            right: b.f(index),
        },
        None => Conjugacy::Indistinguishable { up_to: n },
    }
}

/// All positive integer vectors, graded by `max(max entry, length)` and
/// ordered within a grade by (max entry, length, lexicographic).
#[derive(Debug, Clone)]
pub struct VectorEnumeration {
    grade: usize,
    max_entry: usize,
    len: usize,
    current: Option<Vec<i64>>,
}

impl Default for VectorEnumeration {
    fn default() -> Self {
        Self::new()
    }
}

impl VectorEnumeration {
    pub fn new() -> Self {
        Self {
            grade: 1,
            max_entry: 1,
            len: 1,
            current: None,
        }
    }

    fn advance_block(&mut self) {
        loop {
            self.len += 1;
            if self.len > self.grade {
                self.len = 1;
                self.max_entry += 1;
                if self.max_entry > self.grade {
                    self.max_entry = 1;
                    self.grade += 1;
                }
            }
            if self.max_entry.max(self.len) == self.grade {
                return;
            }
        }
    }
}

impl Iterator for VectorEnumeration {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        loop {
            let next = match self.current.take() {
                None => Some(vec![1; self.len]),
                Some(mut v) => {
                    let top = self.max_entry as i64;
                    let mut pos = v.len();
                    loop {
                        if pos == 0 {
                            break None;
                        }
                        pos -= 1;
                        if v[pos] < top {
                            v[pos] += 1;
                            for x in &mut v[pos + 1..] {
                                *x = 1;
                            }
                            break Some(v);
                        }
                    }
                }
            };
            match next {
                Some(v) => {
                    self.current = Some(v.clone());
                    if v.iter().any(|&x| x == self.max_entry as i64) {
                        return Some(v);
                    }
                }
                None => self.advance_block(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Realization {
    pub vector: Vec<Rational>,
    pub offset: usize,
    /// Whether the prefix had to be prolonged to realize the vector.
    pub prolonged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniversalPrefix {
    pub prefix: ToeplitzPrefix,
    pub table: Vec<Realization>,
    /// Vectors seen but not admissible for the prefix.
    pub skipped: Vec<Vec<Rational>>,
}

impl UniversalPrefix {
    /// `vector,offset` lines, vector entries separated by spaces.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("vector,offset\n");
        for r in &self.table {
            let v: Vec<String> = r.vector.iter().map(ToString::to_string).collect();
            out.push_str(&format!("{},{}\n", v.join(" "), r.offset));
        }
        out
    }
}

/// Appends the floor-midpoint (integer prefixes) or midpoint of the
/// amalgamation bounds until the prefix has length `len`.
pub fn grow_prefix(f: &ToeplitzPrefix, len: usize) -> ToeplitzPrefix {
    let mut cur = f.clone();
    while cur.len() < len {
        let b = amalgamation_bounds(&cur);
        let mut v = Rational::midpoint(&b.lower, &b.upper);
        if cur.is_integral() {
            v = v.floor().max(b.lower.clone());
        }
        if !v.is_positive() {
            v = b.upper.clone();
        }
        cur.values.push(v);
    }
    debug_assert!(is_toeplitz(cur.values()).is_ok());
    cur
}

/// Builds a prefix realizing the first `steps` admissible vectors of
/// `vectors` as windows.
///
/// Each vector longer than the prefix first grows the prefix by single
/// amalgamation steps. An admissible vector already present as a forward
/// window is recorded at its existing offset; otherwise the prefix is
/// prolonged by the shortest completion ending in that window.
pub fn universal_prefix(
    vectors: impl IntoIterator<Item = Vec<i64>>,
    steps: usize,
    seed: &ToeplitzPrefix,
) -> Result<UniversalPrefix> {
    let mut prefix = seed.clone();
    let mut table = Vec::new();
    let mut skipped = Vec::new();
    let mut it = vectors.into_iter();
    while table.len() < steps {
        let Some(raw) = it.next() else { break };
        let h: Vec<Rational> = raw.iter().map(|&x| int(x)).collect();
        if h.is_empty() || h.iter().any(|x| !x.is_positive()) {
            skipped.push(h);
            continue;
        }
        if h.len() > prefix.len() {
            prefix = grow_prefix(&prefix, h.len());
        }
        if !is_admissible(&prefix, &h).is_ok() {
            skipped.push(h);
            continue;
        }
        let existing = verify_window_realization(&prefix, &h)
            .filter(|m| m.orientation == Orientation::Forward);
        if let Some(m) = existing {
            table.push(Realization {
                vector: h,
                offset: m.offset,
                prolonged: false,
            });
            continue;
        }
        let p = prolong_to_window(&prefix, &h)?;
        let offset = p.window_offset(h.len());
        prefix = p.prefix;
        table.push(Realization {
            vector: h,
            offset,
            prolonged: true,
        });
    }
    Ok(UniversalPrefix {
        prefix,
        table,
        skipped,
    })
}

/// Checks a realization table against its prefix.
pub fn check_realizations(u: &UniversalPrefix) -> Vec<usize> {
    u.table
        .iter()
        .enumerate()
        .filter(|(_, r)| {
            let end = r.offset + r.vector.len();
            end > u.prefix.len() || u.prefix.values()[r.offset..end] != r.vector[..]
        })
        .map(|(i, _)| i)
        .collect()
}

/// Validates `values` and builds the induced matrix, returning both reports.
/// Used to test that condition failures surface as triangle failures.
pub fn induced_violations(values: &[Rational]) -> (ToeplitzReport, crate::metric::ValidationReport) {
    let report = is_toeplitz(values);
    let raw = ToeplitzPrefix {
        values: values.to_vec(),
    };
    let m = cyclic_matrix(&raw, values.len()).expect("size equals length");
    (report, validate_matrix(&m).expect("square and symmetric"))
}
