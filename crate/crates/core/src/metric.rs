//! Finite metric spaces with exact rational distances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A single failed metric axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `d(i,i) != 0`.
    Diagonal { i: usize, value: Rational },
    /// `d(i,j) <= 0` for `i != j`.
    NonPositive { i: usize, j: usize, value: Rational },
    /// `d(i,k) > d(i,j) + d(j,k)`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        direct: Rational,
        via: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn triangle_violations(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.violations.iter().filter_map(|v| match v {
            Violation::Triangle { i, j, k, .. } => Some((*i, *j, *k)),
            _ => None,
        })
    }
}

/// Checks a raw matrix against the metric axioms.
///
/// Structural defects (non-square, asymmetric) are an `Err`; axiom failures
/// are listed in the report. Triangle violations are reported as `(i, j, k)`
/// with `i < k` and `j` the intermediate point.
pub fn validate_matrix(dist: &[Vec<Rational>]) -> Result<ValidationReport> {
    let n = dist.len();
    for (i, row) in dist.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Structure(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                return Err(Error::Structure(format!(
                    "asymmetric at ({i},{j}): {} vs {}",
                    dist[i][j], dist[j][i]
                )));
            }
        }
    }
    let mut violations = Vec::new();
    for (i, row) in dist.iter().enumerate() {
        if !row[i].is_zero() {
            violations.push(Violation::Diagonal {
                i,
                value: row[i].clone(),
            });
        }
        for j in (i + 1)..n {
            if !row[j].is_positive() {
                violations.push(Violation::NonPositive {
                    i,
                    j,
                    value: row[j].clone(),
                });
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = &dist[i][j] + &dist[j][k];
                if dist[i][k] > via {
                    violations.push(Violation::Triangle {
                        i,
                        j,
                        k,
                        direct: dist[i][k].clone(),
                        via,
                    });
                }
            }
        }
    }
    Ok(ValidationReport { violations })
}

/// A finite metric space. Points are dense indices `0..len`; names are labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    names: Vec<String>,
    dist: Vec<Vec<Rational>>,
}

impl Default for FiniteMetricSpace {
    fn default() -> Self {
        Self::empty()
    }
}

impl FiniteMetricSpace {
    pub fn empty() -> Self {
        Self {
            names: Vec::new(),
            dist: Vec::new(),
        }
    }

    /// Builds a space, rejecting anything that is not a metric.
    pub fn new(names: Vec<String>, dist: Vec<Vec<Rational>>) -> Result<Self> {
        if names.len() != dist.len() {
            return Err(Error::Structure(format!(
                "{} names for a {}x{} matrix",
                names.len(),
                dist.len(),
                dist.len()
            )));
        }
        let report = validate_matrix(&dist)?;
        if !report.is_ok() {
            return Err(Error::InvalidMetric(report.violations));
        }
        Ok(Self { names, dist })
    }

    /// Builds a space with default names `"0"`, `"1"`, ...
    pub fn from_matrix(dist: Vec<Vec<Rational>>) -> Result<Self> {
        let names = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(names, dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn name(&self, p: usize) -> &str {
        &self.names[p]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn d(&self, a: usize, b: usize) -> &Rational {
        &self.dist[a][b]
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn diameter(&self) -> Rational {
        self.dist
            .iter()
            .flat_map(|r| r.iter())
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Smallest distance between distinct points, if there are two.
    pub fn min_distance(&self) -> Option<Rational> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[i][j].clone())
            .min()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_matrix(&self.dist).expect("space matrices are square and symmetric")
    }

    pub fn check_point(&self, p: usize) -> Result<()> {
        if p < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(p))
        }
    }

    /// Appends a point whose distances to all existing points are `row`.
    /// The caller is responsible for metric consistency.
    pub(crate) fn push_unchecked(&mut self, name: String, row: Vec<Rational>) -> usize {
        debug_assert_eq!(row.len(), self.len());
        let id = self.len();
        for (r, v) in self.dist.iter_mut().zip(row.iter()) {
            r.push(v.clone());
        }
        let mut own = row;
        own.push(Rational::zero());
        self.dist.push(own);
        self.names.push(name);
        id
    }

    /// The subspace on `points`, in that order.
    pub fn subspace(&self, points: &[usize]) -> Result<FiniteMetricSpace> {
        for &p in points {
            self.check_point(p)?;
        }
        let dist = points
            .iter()
            .map(|&a| points.iter().map(|&b| self.dist[a][b].clone()).collect())
            .collect();
        let names = points.iter().map(|&p| self.names[p].clone()).collect();
        Ok(FiniteMetricSpace { names, dist })
    }

    pub fn to_json(&self) -> SpaceDocument {
        SpaceDocument {
            points: self.names.clone(),
            dist: self.dist.clone(),
            log: None,
        }
    }
}

/// `{"points":[...], "dist":[["p/q",...],...]}`, optionally with an extension log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceDocument {
    #[serde(deserialize_with = "names_from_json")]
    pub points: Vec<String>,
    pub dist: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<Vec<crate::extension::LogEntry>>,
}

fn names_from_json<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    let raw: Vec<serde_json::Value> = Deserialize::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|v| match v {
            serde_json::Value::String(s) => s,
            other => other.to_string(),
        })
        .collect())
}

/// True iff `d(t1[i], t1[j]) = d(t2[i], t2[j])` for all `i, j`.
pub fn tuples_isometric(m: &FiniteMetricSpace, t1: &[usize], t2: &[usize]) -> Result<bool> {
    if t1.len() != t2.len() {
        return Err(Error::LengthMismatch(t1.len(), t2.len()));
    }
    for &p in t1.iter().chain(t2) {
        m.check_point(p)?;
    }
    Ok(t1.iter().enumerate().all(|(i, &a)| {
        t1.iter()
            .enumerate()
            .skip(i + 1)
            .all(|(j, &b)| m.d(a, b) == m.d(t2[i], t2[j]))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    #[test]
    fn single_point_is_ok() {
        assert!(validate_matrix(&mat(&[&[0]])).unwrap().is_ok());
    }

    #[test]
    fn equilateral_is_ok() {
        let m = mat(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert!(validate_matrix(&m).unwrap().is_ok());
    }

    #[test]
    fn long_side_reports_the_triple() {
        // a=0, b=1, c=2: d(a,c)=3 > d(a,b)+d(b,c)=2
        let m = mat(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]);
        let r = validate_matrix(&m).unwrap();
        assert_eq!(r.triangle_violations().collect::<Vec<_>>(), vec![(0, 1, 2)]);
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn structural_errors_are_distinct() {
        let ragged = vec![vec![int(0), int(1)], vec![int(1)]];
        assert!(matches!(validate_matrix(&ragged), Err(Error::Structure(_))));
        let asym = mat(&[&[0, 1], &[2, 0]]);
        assert!(matches!(validate_matrix(&asym), Err(Error::Structure(_))));
    }

    #[test]
    fn zero_off_diagonal_is_a_violation() {
        let m = mat(&[&[0, 0], &[0, 0]]);
        let r = validate_matrix(&m).unwrap();
        assert!(matches!(r.violations[0], Violation::NonPositive { i: 0, j: 1, .. }));
    }

    #[test]
    fn isometric_tuples() {
        let m = FiniteMetricSpace::from_matrix(mat(&[&[0, 1, 2], &[1, 0, 2], &[2, 2, 0]])).unwrap();
        assert!(tuples_isometric(&m, &[0, 2], &[0, 2]).unwrap());
        assert!(tuples_isometric(&m, &[0, 1], &[1, 0]).unwrap());
        assert!(!tuples_isometric(&m, &[0, 1], &[0, 2]).unwrap());
        assert!(matches!(
            tuples_isometric(&m, &[0], &[0, 1]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn json_document_accepts_int_names() {
        let doc: SpaceDocument =
            serde_json::from_str(r#"{"points":[0,"b"],"dist":[["0","1/2"],["1/2",0]]}"#).unwrap();
        assert_eq!(doc.points, vec!["0", "b"]);
        let s = FiniteMetricSpace::new(doc.points, doc.dist).unwrap();
        assert_eq!(s.d(0, 1), &crate::rational::rat(1, 2));
    }
}
