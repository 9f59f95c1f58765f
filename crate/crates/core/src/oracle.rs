//! Exhaustive brute-force checks over small integer families.
//!
//! The oracles recompute every claim with plain `i64` arithmetic and compare
//! against the library. Each suite returns the number of cases examined and
//! any counterexamples, serialized for inspection.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::extension::{
    check_extension_spec, generic_space, sphere_diameter_bound, DistanceSpec, GrowingSpace,
    ValueDomain,
};
use crate::group2::{extend_invariant_metric, generic_invariant_metric, InvariantMetric};
use crate::isometry::{extend_bounded, PartialIsometry};
use crate::metric::FiniteMetricSpace;
use crate::orbit::{targeted_extension, uv_pairs, SeriesSpec};
use crate::rational::{int, Rational};
use crate::toeplitz::{
    amalgamation_bounds, extend_one, is_admissible, prolong, ToeplitzPrefix,
};

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub suite: String,
    pub cases: u64,
    pub counterexamples: Vec<Value>,
}

impl OracleReport {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            cases: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn fail(&mut self, v: Value) {
        // keep reports readable
        if self.counterexamples.len() < 20 {
            self.counterexamples.push(v);
        }
    }
}

type Matrix = Vec<Vec<i64>>;

/// Whether `m` is a metric: zero diagonal, positive off-diagonal, symmetric, triangle.
pub fn is_metric_i64(m: &Matrix) -> bool {
    let n = m.len();
    for i in 0..n {
        if m[i][i] != 0 {
            return false;
        }
        for j in 0..n {
            if i != j && (m[i][j] <= 0 || m[i][j] != m[j][i]) {
                return false;
            }
            for k in 0..n {
                if m[i][k] > m[i][j] + m[j][k] {
                    return false;
                }
            }
        }
    }
    true
}

/// Every metric on `points` labelled points with distances in `1..=max`.
pub fn int_metrics(points: usize, max: i64) -> Vec<Matrix> {
    let pairs: Vec<(usize, usize)> = (0..points)
        .flat_map(|i| ((i + 1)..points).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut m = vec![vec![0i64; points]; points];
    fn go(m: &mut Matrix, pairs: &[(usize, usize)], idx: usize, max: i64, out: &mut Vec<Matrix>) {
        if idx == pairs.len() {
            if is_metric_i64(m) {
                out.push(m.clone());
            }
            return;
        }
        let (i, j) = pairs[idx];
        for v in 1..=max {
            m[i][j] = v;
            m[j][i] = v;
            go(m, pairs, idx + 1, max, out);
        }
    }
    go(&mut m, &pairs, 0, max, &mut out);
    out
}

fn to_space(m: &Matrix) -> FiniteMetricSpace {
    FiniteMetricSpace::from_matrix(
        m.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect(),
    )
    .expect("enumerated metrics are valid")
}

/// All partial functions from `0..n` into `0..=max` (value `-1` means unlisted).
fn all_specs(n: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-1..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Whether a point at distances `g` (over listed entries) from the points of `m`
/// can exist: the listed subspace plus the new point is a metric.
fn spec_realizable(m: &Matrix, g: &[i64]) -> bool {
    let listed: Vec<usize> = (0..g.len()).filter(|&i| g[i] >= 0).collect();
    let k = listed.len();
    let mut sub = vec![vec![0i64; k + 1]; k + 1];
    for (a, &i) in listed.iter().enumerate() {
        for (b, &j) in listed.iter().enumerate() {
            sub[a][b] = m[i][j];
        }
        sub[a][k] = g[i];
        sub[k][a] = g[i];
    }
    is_metric_i64(&sub)
}

/// Extension soundness and the sphere diameter over all spaces with at most
/// `points` points and distances and prescriptions up to `max`.
pub fn metric_suite(points: usize, max: i64) -> OracleReport {
    let mut rep = OracleReport::new("metric");
    for p in 1..=points {
        for m in int_metrics(p, max) {
            let space = to_space(&m);
            let base = GrowingSpace::from_space(space.clone());
            for g in all_specs(p, max) {
                rep.cases += 1;
                let spec = DistanceSpec::from_pairs(
                    g.iter()
                        .enumerate()
                        .filter(|(_, &v)| v >= 0)
                        .map(|(i, &v)| (i, int(v))),
                );
                let accepted = check_extension_spec(&space, &spec).is_ok();
                let brute = spec_realizable(&m, &g);
                if accepted != brute {
                    rep.fail(json!({ "space": m, "spec": g, "accepted": accepted }));
                    continue;
                }
                if !accepted {
                    continue;
                }
                let mut gs = base.clone();
                let z = gs.extend_point(&spec).expect("accepted spec");
                let exact = spec.targets.iter().all(|(&a, v)| gs.d(z, a) == v);
                if !exact || !gs.space().validate().is_ok() {
                    rep.fail(json!({ "space": m, "spec": g, "extension": "invalid" }));
                }
                if spec.is_empty() {
                    continue;
                }
                // largest realizable d(z1, z2) over half-integers, on the listed points
                let bound = sphere_diameter_bound(&spec).expect("non-empty");
                let best = (1..=4 * max + 2)
                    .rev()
                    .find(|&t2| sphere_pair_realizable(&m, &g, t2))
                    .map(|t2| Rational::new(t2, 2));
                let mut gs = base.clone();
                let (z1, z2) = gs.realize_sphere_pair(&spec).expect("accepted spec");
                if best.as_ref() != Some(&bound) || gs.d(z1, z2) != &bound {
                    rep.fail(json!({ "space": m, "spec": g, "sphere": bound, "brute": best }));
                }
            }
        }
    }
    rep
}

/// Two points at distances `g` from the listed points and `t2 / 2` apart form a
/// metric with them (everything doubled to stay integral).
fn sphere_pair_realizable(m: &Matrix, g: &[i64], t2: i64) -> bool {
    let listed: Vec<usize> = (0..g.len()).filter(|&i| g[i] >= 0).collect();
    let k = listed.len();
    let mut sub = vec![vec![0i64; k + 2]; k + 2];
    for (a, &i) in listed.iter().enumerate() {
        for (b, &j) in listed.iter().enumerate() {
            sub[a][b] = 2 * m[i][j];
        }
        for z in [k, k + 1] {
            sub[a][z] = 2 * g[i];
            sub[z][a] = 2 * g[i];
        }
    }
    sub[k][k + 1] = t2;
    sub[k + 1][k] = t2;
    is_metric_i64(&sub)
}

fn toeplitz_i64(f: &[i64]) -> bool {
    let n = f.len();
    let v = |i: usize| if i == 0 { 0 } else { f[i - 1] };
    f.iter().all(|&x| x > 0)
        && (1..=n).all(|i| {
            (1..=n).all(|j| i + j > n || ((v(i) - v(j)).abs() <= v(i + j) && v(i + j) <= v(i) + v(j)))
        })
}

fn admissible_i64(f: &[i64], h: &[i64]) -> bool {
    let m = h.len();
    h.iter().all(|&x| x > 0)
        && (1..=m).all(|i| {
            (1..=f.len().min(m - i)).all(|k| {
                let (a, b) = (h[i - 1], h[i + k - 1]);
                (a - b).abs() <= f[k - 1] && f[k - 1] <= a + b
            })
        })
}

fn vectors(len: usize, max: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (1..=max).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Amalgamation bounds up to length `n`; extend_one against the box and the
/// prolongation contract up to length `min(n, 3)`.
pub fn toeplitz_suite(n: usize, max: i64) -> OracleReport {
    let mut rep = OracleReport::new("toeplitz");
    for len in 1..=n {
        for f in vectors(len, max).into_iter().filter(|f| toeplitz_i64(f)) {
            rep.cases += 1;
            let b = amalgamation_bounds(&ToeplitzPrefix::from_ints(&f).expect("valid"));
            // the bounds must be exactly the values keeping f Toeplitz
            let ok: Vec<i64> = (1..=2 * max + 1)
                .filter(|&g| {
                    let mut f2 = f.clone();
                    f2.push(g);
                    toeplitz_i64(&f2)
                })
                .collect();
            let lo = ok.first().copied();
            let hi = ok.last().copied();
            let contiguous = ok.windows(2).all(|w| w[1] == w[0] + 1);
            if b.lower > b.upper
                || !contiguous
                || lo.map(|x| int(x.max(1))) != Some(b.lower.clone().max(int(1)))
                || hi.map(int) != Some(b.upper.clone())
            {
                rep.fail(json!({ "f": f, "bounds": [b.lower, b.upper] }));
            }
        }
    }
    for len in 1..=n.min(3) {
        let fs: Vec<Vec<i64>> = vectors(len, max).into_iter().filter(|f| toeplitz_i64(f)).collect();
        for f in &fs {
            let fp = ToeplitzPrefix::from_ints(f).expect("valid");
            for h in vectors(len, max).into_iter().filter(|h| admissible_i64(f, h)) {
                rep.cases += 1;
                if !is_admissible(&fp, &ints(&h)).is_ok() {
                    rep.fail(json!({ "f": f, "h": h, "admissible": false }));
                    continue;
                }
                let d = *f.iter().chain(&h).max().expect("non-empty");
                let box_ok = (2..d).any(|g1| (2..d).any(|gn| step_ok(f, &h, g1, gn)));
                match extend_one(&fp, &ints(&h), None) {
                    Ok(s) => {
                        let (g1, gn) = (s.g1.to_i64().unwrap(), s.g_n.to_i64().unwrap());
                        if !box_ok || !step_ok(f, &h, g1, gn) || g1 < 2 || gn < 2 || g1 > d - 1 || gn > d - 1 {
                            rep.fail(json!({ "f": f, "h": h, "step": [g1, gn] }));
                        }
                    }
                    Err(_) if box_ok => rep.fail(json!({ "f": f, "h": h, "missed": true })),
                    Err(_) => {}
                }
                match prolong(&fp, &ints(&h)) {
                    Ok(p) => {
                        let v: Vec<i64> = p.prefix.values().iter().map(|x| x.to_i64().unwrap()).collect();
                        if !toeplitz_i64(&v) || v[..len] != f[..] || v[v.len() - len..] != h[..] {
                            rep.fail(json!({ "f": f, "h": h, "prolongation": v }));
                        }
                    }
                    Err(e) => rep.fail(json!({ "f": f, "h": h, "error": e.to_json() })),
                }
            }
        }
    }
    rep
}

/// The extension system checked directly.
fn step_ok(f: &[i64], h: &[i64], g1: i64, gn: i64) -> bool {
    let n = f.len();
    let mut f2 = f.to_vec();
    f2.push(g1);
    toeplitz_i64(&f2)
        && (0..n).all(|i| (f[i] - h[i]).abs() <= gn && gn <= f[i] + h[i])
        && (g1 - gn).abs() <= h[n - 1]
        && h[n - 1] <= g1 + gn
}

/// All partial isometries of `m` with non-empty domain.
fn partial_isometries(m: &Matrix) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    fn go(m: &Matrix, a: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let n = m.len();
        if a == n {
            if !cur.is_empty() {
                out.push(cur.clone());
            }
            return;
        }
        go(m, a + 1, cur, out);
        for b in 0..n {
            if cur.iter().any(|&(_, y)| y == b) {
                continue;
            }
            if cur.iter().all(|&(x, y)| m[x][a] == m[y][b]) {
                cur.push((a, b));
                go(m, a + 1, cur, out);
                cur.pop();
            }
        }
    }
    go(m, 0, &mut Vec::new(), &mut out);
    out
}

/// Bounded extension succeeds exactly when every mapped pair is within `k`,
/// and then respects both the isometry and the bound.
pub fn isometry_suite(points: usize, max: i64) -> OracleReport {
    let mut rep = OracleReport::new("isometry");
    for p in 1..=points {
        for m in int_metrics(p, max) {
            let base = GrowingSpace::from_space(to_space(&m));
            for pairs in partial_isometries(&m) {
                for k in 0..=max {
                    for u in (0..p).filter(|u| pairs.iter().all(|&(a, _)| a != *u)) {
                        rep.cases += 1;
                        let hyp = pairs.iter().all(|&(a, b)| m[a][b] <= k);
                        let mut f = PartialIsometry::with_bound(int(k));
                        for &(a, b) in &pairs {
                            f.insert(a, b).expect("injective");
                        }
                        let mut gs = base.clone();
                        match extend_bounded(&mut gs, &mut f, u) {
                            Ok(v) => {
                                let exact = pairs.iter().all(|&(a, b)| gs.d(b, v) == &int(m[a][u]));
                                if !hyp || !exact || gs.d(u, v) > &int(k) || f.check(gs.space()).is_err() {
                                    rep.fail(json!({ "space": m, "map": pairs, "k": k, "u": u }));
                                }
                            }
                            Err(_) if hyp => {
                                rep.fail(json!({ "space": m, "map": pairs, "k": k, "u": u, "missed": true }))
                            }
                            Err(_) => {}
                        }
                    }
                }
            }
        }
    }
    rep
}

/// Prescription acceptance against full-matrix validation for levels below
/// `levels`, and translation invariance of generic metrics up to `levels + 2`.
pub fn group2_suite(levels: usize, max: i64) -> OracleReport {
    let mut rep = OracleReport::new("group2");
    for level in 0..levels {
        let order = 1usize << level;
        for delta in vectors(order - 1, max) {
            let full = xor_matrix(&delta, order);
            if !is_metric_i64(&full) {
                continue;
            }
            let m = InvariantMetric::new(level, ints(&delta)).expect("sized");
            for new in all_specs(order, max).into_iter().filter(|v| v.iter().all(|&x| x >= 0)) {
                rep.cases += 1;
                let mut d2 = delta.clone();
                d2.extend(&new);
                let brute = is_metric_i64(&xor_matrix(&d2, 2 * order));
                let accepted = extend_invariant_metric(&m, &ints(&new)).is_ok();
                if brute != accepted {
                    rep.fail(json!({ "delta": delta, "new": new, "accepted": accepted }));
                }
            }
        }
    }
    for level in 1..=levels + 2 {
        for seed in 0..4 {
            rep.cases += 1;
            let m = generic_invariant_metric(level, ValueDomain::Integer { max: max as u32 }, seed)
                .expect("sampled");
            let n = m.order();
            let ok = (0..n).all(|g| (0..n).all(|x| (0..n).all(|y| m.d(g ^ x, g ^ y) == m.d(x, y))));
            if !ok {
                rep.fail(json!({ "level": level, "seed": seed }));
            }
        }
    }
    rep
}

fn xor_matrix(delta: &[i64], order: usize) -> Matrix {
    (0..order)
        .map(|x| (0..order).map(|y| if x == y { 0 } else { delta[(x ^ y) - 1] }).collect())
        .collect()
}

/// Targeted extensions on `spaces` seeded generic spaces of `points` points.
pub fn orbit_suite(spaces: u64, points: usize, uv_bound: usize, seed: u64) -> Result<OracleReport> {
    let mut rep = OracleReport::new("orbit");
    let domain = ValueDomain::Rational {
        denominator: 2,
        max: 4,
    };
    for s in 0..spaces {
        let gs = generic_space(points, domain, seed.wrapping_add(s))?;
        for (u, v) in uv_pairs(points, uv_bound) {
            rep.cases += 1;
            let t = targeted_extension(&gs, &SeriesSpec::Harmonic, &u, &v)?;
            let ok = t.witness.is_some_and(|w| {
                let m = t.space.space();
                u.iter().all(|&x| t.partition.classify(m.d(w, x)).is_ok_and(|c| c.class == crate::orbit::Class::E))
                    && v.iter().all(|&x| t.partition.classify(m.d(w, x)).is_ok_and(|c| c.class == crate::orbit::Class::N))
            });
            if !ok {
                rep.fail(json!({ "seed": seed.wrapping_add(s), "u": u, "v": v }));
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_counts() {
        assert_eq!(int_metrics(1, 4).len(), 1);
        assert_eq!(int_metrics(2, 4).len(), 4);
        // triangles with sides in 1..=2: all 8 triples are metrics
        assert_eq!(int_metrics(3, 2).len(), 8);
        assert!(!is_metric_i64(&vec![vec![0, 1, 3], vec![1, 0, 1], vec![3, 1, 0]]));
    }

    #[test]
    fn small_suites_pass() {
        let r = metric_suite(3, 2);
        assert!(r.passed(), "{:?}", r.counterexamples);
        let r = toeplitz_suite(3, 3);
        assert!(r.passed(), "{:?}", r.counterexamples);
        let r = isometry_suite(3, 2);
        assert!(r.passed(), "{:?}", r.counterexamples);
        let r = group2_suite(2, 2);
        assert!(r.passed(), "{:?}", r.counterexamples);
        let r = orbit_suite(2, 5, 2, 0).unwrap();
        assert!(r.passed(), "{:?}", r.counterexamples);
        assert!(r.cases > 0);
    }

    #[test]
    fn partial_isometry_enumeration() {
        // two points at distance 1: 2 singletons each way + identity + swap
        let maps = partial_isometries(&vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(maps.len(), 6);
    }
}
