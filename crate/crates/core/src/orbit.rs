//! From metric spaces to graphs through an alternating interval partition.
//!
//! The positive rationals are cut at the partial sums `s_n` of a divergent
//! series with terms tending to zero. Interval `n` is `[s_{n-1}, s_n)`; odd
//! intervals form the class E (edges), even ones the class N (non-edges).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::extension::{generic_space, DistanceSpec, GrowingSpace, ValueDomain};
use crate::metric::FiniteMetricSpace;
use crate::rational::{int, Rational};

/// Upper limit on the number of intervals a partition will materialize.
pub const MAX_INTERVALS: usize = 1 << 20;

/// The series `a_n` whose partial sums cut the line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesSpec {
    /// `a_n = 1 / n`.
    Harmonic,
    /// `a_n = 1 / (k + n - 1)`.
    HarmonicFrom { k: u64 },
    /// `a_n = c` for `n <= count`, then `c / (n - count + 1)`.
    ConstantThenHarmonic { c: Rational, count: u64 },
}

impl SeriesSpec {
    pub fn term(&self, n: u64) -> Rational {
        debug_assert!(n >= 1);
        match self {
            SeriesSpec::Harmonic => Rational::new(1, n as i64),
            SeriesSpec::HarmonicFrom { k } => Rational::new(1, (k + n - 1) as i64),
            SeriesSpec::ConstantThenHarmonic { c, count } => {
                if n <= *count {
                    c.clone()
                } else {
                    c / int((n - count + 1) as i64)
                }
            }
        }
    }
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesSpec::Harmonic => write!(f, "harmonic"),
            SeriesSpec::HarmonicFrom { k } => write!(f, "harmonic-from:{k}"),
            SeriesSpec::ConstantThenHarmonic { c, count } => write!(f, "constant:{c}:{count}"),
        }
    }
}

/// `harmonic`, `harmonic-from:K` or `constant:C:COUNT`.
impl FromStr for SeriesSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown series {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["harmonic"] => Ok(SeriesSpec::Harmonic),
            ["harmonic-from", k] => {
                let k: u64 = k.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(SeriesSpec::HarmonicFrom { k })
            }
            ["constant", c, count] => {
                let c: Rational = c.parse().map_err(|_| bad())?;
                let count = count.parse().map_err(|_| bad())?;
                if !c.is_positive() {
                    return Err(bad());
                }
                Ok(SeriesSpec::ConstantThenHarmonic { c, count })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class {
    E,
    N,
}

/// Interval `index` of a partition with its class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub lo: Rational,
    pub hi: Rational,
    pub class: Class,
}

/// The E/N partition cut at partial sums, materialized up to some cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalPartition {
    pub series: SeriesSpec,
    /// `s_0 = 0, s_1, s_2, ...`
    pub breakpoints: Vec<Rational>,
}

impl IntervalPartition {
    /// Breakpoints until one exceeds `cover`.
    pub fn build(series: SeriesSpec, cover: &Rational) -> Result<Self> {
        let mut p = Self {
            series,
            breakpoints: vec![Rational::zero()],
        };
        p.extend_past(cover)?;
        Ok(p)
    }

    fn push_next(&mut self) -> Result<()> {
        let n = self.breakpoints.len();
        if n > MAX_INTERVALS {
            return Err(Error::Budget(MAX_INTERVALS as u64));
        }
        let next = self.breakpoints[n - 1].clone() + self.series.term(n as u64);
        self.breakpoints.push(next);
        Ok(())
    }

    pub fn extend_past(&mut self, cover: &Rational) -> Result<()> {
        while self.covered() <= cover {
            self.push_next()?;
        }
        Ok(())
    }

    /// Every `d` with `0 < d < covered()` is classified.
    pub fn covered(&self) -> &Rational {
        self.breakpoints.last().expect("starts at zero")
    }

    pub fn intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn cell(&self, index: usize) -> Cell {
        Cell {
            index,
            lo: self.breakpoints[index - 1].clone(),
            hi: self.breakpoints[index].clone(),
            class: if index % 2 == 1 { Class::E } else { Class::N },
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (1..=self.intervals()).map(|i| self.cell(i))
    }

    /// The cell containing `d`, which lies in interval `n` iff `s_{n-1} <= d < s_n`.
    pub fn classify(&self, d: &Rational) -> Result<Cell> {
        if !d.is_positive() {
            return Err(Error::precondition("distance must be positive", json!({ "d": d })));
        }
        if d >= self.covered() {
            return Err(Error::Coverage {
                covered: self.covered().clone(),
                required: d.clone(),
            });
        }
        // first breakpoint strictly above d
        let idx = self.breakpoints.partition_point(|s| s <= d);
        Ok(self.cell(idx))
    }

    /// Smallest `n` with `s_{n-1} >= r` and `a_n, a_{n+1} < eps`, growing the
    /// partition as needed. Intervals `n` and `n + 1` then lie beyond `r`,
    /// are consecutive, and carry opposite classes.
    pub fn find_consecutive_pair(&mut self, r: &Rational, eps: &Rational) -> Result<(Cell, Cell)> {
        if !eps.is_positive() {
            return Err(Error::precondition("eps must be positive", json!({ "eps": eps })));
        }
        let mut n = 1;
        loop {
            while self.intervals() < n + 1 {
                self.push_next()?;
            }
            let (a, b) = (self.cell(n), self.cell(n + 1));
            if a.lo >= *r && &a.hi - &a.lo < *eps && &b.hi - &b.lo < *eps {
                return Ok((a, b));
            }
            n += 1;
        }
    }
}

/// A simple undirected graph on `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertices: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize) -> Self {
        Self {
            vertices,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.vertices && b < self.vertices, "bad edge ({a},{b})");
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn to_dot(&self, names: Option<&[String]>) -> String {
        let label = |v: usize| names.map_or_else(|| v.to_string(), |n| n[v].clone());
        let mut out = String::from("graph G {\n");
        for v in 0..self.vertices {
            out.push_str(&format!("  {v} [label=\"{}\"];\n", label(v)));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("  {a} -- {b};\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source,target\n");
        for (a, b) in &self.edges {
            out.push_str(&format!("{a},{b}\n"));
        }
        out
    }
}

/// Joins two points iff their distance falls in an E interval.
pub fn metric_to_graph(m: &FiniteMetricSpace, p: &IntervalPartition) -> Result<Graph> {
    let diam = m.diameter();
    if m.len() > 1 && diam >= *p.covered() {
        return Err(Error::Coverage {
            covered: p.covered().clone(),
            required: diam,
        });
    }
    let mut g = Graph::new(m.len());
    for a in m.points() {
        for b in (a + 1)..m.len() {
            if p.classify(m.d(a, b))?.class == Class::E {
                g.add_edge(a, b);
            }
        }
    }
    Ok(g)
}

/// The smallest vertex outside `u ∪ v` joined to all of `u` and none of `v`.
pub fn check_graph_extension(g: &Graph, u: &[usize], v: &[usize]) -> Result<Option<usize>> {
    if let Some(x) = u.iter().find(|x| v.contains(x)) {
        return Err(Error::precondition("U and V overlap", json!({ "vertex": x })));
    }
    if let Some(&x) = u.iter().chain(v).find(|&&x| x >= g.vertices) {
        return Err(Error::UnknownPoint(x));
    }
    Ok((0..g.vertices).find(|&x| {
        !u.contains(&x)
            && !v.contains(&x)
            && u.iter().all(|&y| g.adjacent(x, y))
            && v.iter().all(|&y| !g.adjacent(x, y))
    }))
}

/// Every disjoint pair `(U, V)` of subsets of `0..n` with `|U| + |V| <= bound`.
pub fn uv_pairs(n: usize, bound: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>, Vec<usize>)> = vec![(0, vec![], vec![])];
    while let Some((next, u, v)) = stack.pop() {
        out.push((u.clone(), v.clone()));
        if u.len() + v.len() == bound {
            continue;
        }
        for x in (next..n).rev() {
            let mut u2 = u.clone();
            u2.push(x);
            stack.push((x + 1, u2, v.clone()));
            let mut v2 = v.clone();
            v2.push(x);
            stack.push((x + 1, u.clone(), v2));
        }
    }
    out.sort();
    out
}

/// Result of [`targeted_extension`].
#[derive(Debug, Clone)]
pub struct TargetedExtension {
    pub space: GrowingSpace,
    pub partition: IntervalPartition,
    pub point: usize,
    pub edge_cell: Cell,
    pub gap_cell: Cell,
    pub witness: Option<usize>,
}

/// Adds a point joined to all of `u` and none of `v`.
///
/// With `m` the least distance and `r` just above half the diameter, two
/// consecutive intervals of length below `m / 2` beyond `r` are located; the
/// new point is placed at the midpoint of the E one from `u` and of the N one
/// from `v`. Those values are consistent: they differ by less than `m` and
/// sum to more than the diameter.
pub fn targeted_extension(
    gs: &GrowingSpace,
    series: &SeriesSpec,
    u: &[usize],
    v: &[usize],
) -> Result<TargetedExtension> {
    let m = gs.space();
    let mut partition = IntervalPartition::build(series.clone(), &m.diameter())?;
    let least = m.min_distance().unwrap_or_else(Rational::one);
    let r = m.diameter() / int(2) + Rational::new(1, 1000).min(&least / int(4));
    let (c1, c2) = partition.find_consecutive_pair(&r, &(&least / int(2)))?;
    let (edge_cell, gap_cell) = if c1.class == Class::E { (c1, c2) } else { (c2, c1) };
    let e = Rational::midpoint(&edge_cell.lo, &edge_cell.hi);
    let n = Rational::midpoint(&gap_cell.lo, &gap_cell.hi);
    let spec = DistanceSpec::from_pairs(
        u.iter()
            .map(|&x| (x, e.clone()))
            .chain(v.iter().map(|&x| (x, n.clone()))),
    );
    let mut space = gs.clone();
    let point = space.extend_point(&spec)?;
    partition.extend_past(&space.space().diameter())?;
    let graph = metric_to_graph(space.space(), &partition)?;
    let witness = check_graph_extension(&graph, u, v)?;
    Ok(TargetedExtension {
        space,
        partition,
        point,
        edge_cell,
        gap_cell,
        witness,
    })
}

/// One row of [`orbit_graph_experiment`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExperimentRow {
    pub size: usize,
    pub pairs: u64,
    pub witnessed: u64,
    pub fraction: Rational,
}

/// For each size, the fraction of `(U, V)` pairs with `|U| + |V| <= uv_bound`
/// having a witness in the graph of the first `size` points of one generic space.
pub fn orbit_graph_experiment(
    sizes: &[usize],
    domain: ValueDomain,
    series: &SeriesSpec,
    uv_bound: usize,
    seed: u64,
) -> Result<Vec<ExperimentRow>> {
    let largest = sizes.iter().copied().max().unwrap_or(0);
    if largest == 0 {
        return Ok(Vec::new());
    }
    let gs = generic_space(largest, domain, seed)?;
    let partition = IntervalPartition::build(series.clone(), &gs.space().diameter())?;
    let mut rows = Vec::new();
    for &size in sizes {
        let pts: Vec<usize> = (0..size).collect();
        let sub = gs.space().subspace(&pts)?;
        let g = metric_to_graph(&sub, &partition)?;
        let mut pairs = 0u64;
        let mut witnessed = 0u64;
        for (u, v) in uv_pairs(size, uv_bound) {
            pairs += 1;
            if check_graph_extension(&g, &u, &v)?.is_some() {
                witnessed += 1;
            }
        }
        let fraction = if pairs == 0 {
            Rational::zero()
        } else {
            Rational::new(witnessed as i64, pairs as i64)
        };
        rows.push(ExperimentRow {
            size,
            pairs,
            witnessed,
            fraction,
        });
    }
    Ok(rows)
}

pub fn experiment_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from("size,pairs,witnessed,fraction\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.size, r.pairs, r.witnessed, r.fraction));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn space(rows: &[&[Rational]]) -> FiniteMetricSpace {
        FiniteMetricSpace::from_matrix(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn harmonic_breakpoints() {
        let p = IntervalPartition::build(SeriesSpec::Harmonic, &int(2)).unwrap();
        assert_eq!(
            p.breakpoints,
            vec![int(0), int(1), rat(3, 2), rat(11, 6), rat(25, 12)]
        );
        assert_eq!(p.classify(&rat(1, 2)).unwrap().class, Class::E);
        let c = p.classify(&int(1)).unwrap();
        assert_eq!((c.index, c.class), (2, Class::N));
        assert!(p.classify(&int(3)).is_err());

        let p = IntervalPartition::build(SeriesSpec::Harmonic, &rat(1, 2)).unwrap();
        assert_eq!(p.intervals(), 1);
    }

    #[test]
    fn cells_tile_the_cover() {
        let p = IntervalPartition::build(SeriesSpec::HarmonicFrom { k: 3 }, &int(2)).unwrap();
        let cells: Vec<Cell> = p.cells().collect();
        assert_eq!(cells[0].lo, int(0));
        for w in cells.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
            assert_ne!(w[0].class, w[1].class);
        }
        assert_eq!(&cells.last().unwrap().hi, p.covered());
    }

    #[test]
    fn series_parsing() {
        assert_eq!("harmonic".parse::<SeriesSpec>().unwrap(), SeriesSpec::Harmonic);
        let s: SeriesSpec = "constant:1/4:8".parse().unwrap();
        assert_eq!(s.term(8), rat(1, 4));
        assert_eq!(s.term(9), rat(1, 8));
        assert_eq!(s.to_string(), "constant:1/4:8");
        assert!("harmonic-from:0".parse::<SeriesSpec>().is_err());
        assert!("zigzag".parse::<SeriesSpec>().is_err());
    }

    #[test]
    fn consecutive_pair_is_beyond_r() {
        let mut p = IntervalPartition::build(SeriesSpec::Harmonic, &int(1)).unwrap();
        let (a, b) = p.find_consecutive_pair(&int(2), &rat(1, 5)).unwrap();
        assert!(a.lo >= int(2));
        assert_eq!(a.hi, b.lo);
        assert!(&b.hi - &b.lo < rat(1, 5));
        // s_4 = 25/12 >= 2 but a_5 = 1/5 is not below 1/5
        assert_eq!(a.index, 6);
    }

    #[test]
    fn graph_examples() {
        let p = IntervalPartition::build(SeriesSpec::Harmonic, &int(2)).unwrap();
        let g = metric_to_graph(&space(&[&[int(0), rat(1, 2)], &[rat(1, 2), int(0)]]), &p).unwrap();
        assert_eq!(g.edges.len(), 1);
        let g = metric_to_graph(&space(&[&[int(0), int(1)], &[int(1), int(0)]]), &p).unwrap();
        assert!(g.edges.is_empty());

        let h = rat(1, 2);
        let z = int(0);
        let k3 = space(&[&[z.clone(), h.clone(), h.clone()], &[h.clone(), z.clone(), h.clone()], &[h.clone(), h, z]]);
        let g = metric_to_graph(&k3, &p).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert_eq!(check_graph_extension(&g, &[], &[]).unwrap(), Some(0));
        assert_eq!(check_graph_extension(&g, &[0, 1], &[]).unwrap(), Some(2));
        assert_eq!(check_graph_extension(&g, &[], &[0]).unwrap(), None);
        assert!(check_graph_extension(&g, &[0], &[0]).is_err());

        let far = space(&[&[int(0), int(5)], &[int(5), int(0)]]);
        assert_eq!(metric_to_graph(&far, &p).unwrap_err().code(), "coverage");
        assert!(g.to_dot(None).contains("0 -- 1;"));
        assert_eq!(g.to_csv().lines().count(), 4);
    }

    #[test]
    fn uv_pair_counts() {
        // sum_k C(n,k) 2^k
        assert_eq!(uv_pairs(4, 2).len(), 1 + 8 + 6 * 4);
        assert_eq!(uv_pairs(1, 1).len(), 3);
        assert!(uv_pairs(5, 3)
            .iter()
            .all(|(u, v)| u.iter().all(|x| !v.contains(x))));
    }

    #[test]
    fn targeted_extension_finds_witness() {
        let gs = generic_space(6, ValueDomain::Integer { max: 4 }, 11).unwrap();
        for (u, v) in uv_pairs(6, 2) {
            let t = targeted_extension(&gs, &SeriesSpec::Harmonic, &u, &v).unwrap();
            assert!(t.witness.is_some(), "no witness for {u:?} {v:?}");
            assert!(t.space.space().validate().is_ok());
        }
    }

    #[test]
    fn experiment_rows() {
        let rows = orbit_graph_experiment(&[1], ValueDomain::Graph, &SeriesSpec::Harmonic, 1, 0)
            .unwrap();
        // (∅,∅) witnessed, ({0},∅) and (∅,{0}) not
        assert_eq!(rows[0].pairs, 3);
        assert_eq!(rows[0].witnessed, 1);
        let a = orbit_graph_experiment(&[4, 8], ValueDomain::Integer { max: 3 }, &SeriesSpec::Harmonic, 2, 5);
        let b = orbit_graph_experiment(&[4, 8], ValueDomain::Integer { max: 3 }, &SeriesSpec::Harmonic, 2, 5);
        assert_eq!(a.unwrap(), b.unwrap());
    }
}
