use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use urysohn::extension::{DistanceSpec, GrowingSpace};
use urysohn::metric::{FiniteMetricSpace, SpaceDocument};
use urysohn::rational::{parse_list, Rational};
use urysohn::toeplitz::ToeplitzPrefix;

/// Anything that ends the process with a status code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: unreadable input, bad arguments.
    Usage(String),
    /// Exit 2: the library refused the request.
    Domain(Value),
}

impl From<urysohn::Error> for Failure {
    fn from(e: urysohn::Error) -> Self {
        match e {
            urysohn::Error::Parse(msg) => Failure::Usage(msg),
            other => Failure::Domain(other.to_json()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Loads a space document; a log, when present, is replayed instead of
/// trusting the matrix.
pub fn load_space(path: &Path) -> Outcome<GrowingSpace> {
    let doc: SpaceDocument = read_json(path)?;
    match &doc.log {
        Some(log) => Ok(GrowingSpace::replay(log)?),
        None => Ok(GrowingSpace::from_space(FiniteMetricSpace::new(doc.points, doc.dist)?)),
    }
}

pub fn space_document(gs: &GrowingSpace) -> SpaceDocument {
    let mut doc = gs.space().to_json();
    doc.log = Some(gs.log().to_vec());
    doc
}

/// `{"0":"3/2","2":"1"}` inline, or `@file` holding the same object.
pub fn parse_spec(raw: &str) -> Outcome<DistanceSpec> {
    let text = match raw.strip_prefix('@') {
        Some(p) => read_text(Path::new(p))?,
        None => raw.to_string(),
    };
    let map: BTreeMap<String, Rational> =
        serde_json::from_str(&text).map_err(|e| usage(format!("spec: {e}")))?;
    let mut spec = DistanceSpec::new();
    for (k, v) in map {
        let p = k.parse().map_err(|_| usage(format!("spec key {k:?} is not a point id")))?;
        spec = spec.with(p, v);
    }
    Ok(spec)
}

pub fn rationals(raw: &str) -> Outcome<Vec<Rational>> {
    parse_list(raw).map_err(|e| usage(e.to_string()))
}

pub fn rational(raw: &str) -> Outcome<Rational> {
    raw.parse().map_err(|e: urysohn::rational::ParseRationalError| usage(e.to_string()))
}

pub fn indices(raw: &str) -> Outcome<Vec<usize>> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|s| s.trim().parse().map_err(|_| usage(format!("bad point id {s:?}"))))
        .collect()
}

/// `"0:1,2:3"` as pairs.
pub fn pairs(raw: &str) -> Outcome<Vec<(usize, usize)>> {
    if raw.trim().is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| usage(format!("expected a:b, got {item:?}")))?;
            let a = a.trim().parse().map_err(|_| usage(format!("bad point id {a:?}")))?;
            let b = b.trim().parse().map_err(|_| usage(format!("bad point id {b:?}")))?;
            Ok((a, b))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PrefixDocument {
    pub mode: String,
    pub values: Vec<Rational>,
}

impl PrefixDocument {
    pub fn of(values: &[Rational]) -> Self {
        let mode = if values.iter().all(Rational::is_integer) { "int" } else { "rat" };
        Self {
            mode: mode.into(),
            values: values.to_vec(),
        }
    }
}

/// A comma list, or `@file` holding a prefix document.
pub fn values_arg(raw: &str) -> Outcome<Vec<Rational>> {
    match raw.strip_prefix('@') {
        Some(p) => Ok(read_json::<PrefixDocument>(Path::new(p))?.values),
        None => rationals(raw),
    }
}

pub fn prefix_arg(raw: &str) -> Outcome<ToeplitzPrefix> {
    Ok(ToeplitzPrefix::new(values_arg(raw)?)?)
}

/// Where results go: `--out` or stdout.
pub struct Sink {
    pub out: Option<PathBuf>,
}

impl Sink {
    pub fn write(&self, text: &str) -> Outcome<()> {
        let mut text = text.to_string();
        if !text.ends_with('\n') {
            text.push('\n');
        }
        match &self.out {
            Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Outcome<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| usage(e.to_string()))?;
        self.write(&text)
    }

    /// One compact JSON document per line.
    pub fn lines<T: Serialize>(&self, items: &[T]) -> Outcome<()> {
        let mut text = String::new();
        for it in items {
            text.push_str(&serde_json::to_string(it).map_err(|e| usage(e.to_string()))?);
            text.push('\n');
        }
        self.write(&text)
    }
}
