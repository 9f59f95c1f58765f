//! Partial isometries of a growing space, built by back-and-forth.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::extension::{feasible_interval, DistanceSpec, GrowingSpace};
use crate::metric::{tuples_isometric, FiniteMetricSpace};
use crate::rational::{int, Rational};

/// A distance-preserving partial injection between points of one space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialIsometry {
    forward: BTreeMap<usize, usize>,
    backward: BTreeMap<usize, usize>,
    order: Vec<(usize, usize)>,
    bound: Option<Rational>,
}

impl PartialIsometry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_bound(bound: Rational) -> Self {
        Self {
            bound: Some(bound),
            ..Self::default()
        }
    }

    pub fn identity(points: impl IntoIterator<Item = usize>, bound: Option<Rational>) -> Self {
        let mut f = Self {
            bound,
            ..Self::default()
        };
        for p in points {
            f.insert(p, p).expect("identity is injective");
        }
        f
    }

    pub fn bound(&self) -> Option<&Rational> {
        self.bound.as_ref()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn image(&self, a: usize) -> Option<usize> {
        self.forward.get(&a).copied()
    }

    pub fn preimage(&self, b: usize) -> Option<usize> {
        self.backward.get(&b).copied()
    }

    pub fn in_domain(&self, a: usize) -> bool {
        self.forward.contains_key(&a)
    }

    pub fn in_range(&self, b: usize) -> bool {
        self.backward.contains_key(&b)
    }

    pub fn is_identity(&self) -> bool {
        self.order.iter().all(|(a, b)| a == b)
    }

    /// Adds `a -> b`, keeping the map injective. Distances are not checked here.
    pub fn insert(&mut self, a: usize, b: usize) -> Result<()> {
        if self.forward.contains_key(&a) || self.backward.contains_key(&b) {
            return Err(Error::precondition(
                "pair conflicts with the existing map",
                json!({ "source": a, "image": b }),
            ));
        }
        self.forward.insert(a, b);
        self.backward.insert(b, a);
        self.order.push((a, b));
        Ok(())
    }

    pub fn inverse(&self) -> PartialIsometry {
        PartialIsometry {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
            order: self.order.iter().map(|&(a, b)| (b, a)).collect(),
            bound: self.bound.clone(),
        }
    }

    /// Largest `d(a, f(a))` over the map.
    pub fn max_displacement(&self, m: &FiniteMetricSpace) -> Rational {
        self.order
            .iter()
            .map(|&(a, b)| m.d(a, b).clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Exact distance preservation on all pairs, and the displacement bound if set.
    pub fn check(&self, m: &FiniteMetricSpace) -> Result<()> {
        let (dom, img): (Vec<usize>, Vec<usize>) = self.order.iter().copied().unzip();
        if !tuples_isometric(m, &dom, &img)? {
            return Err(Error::precondition("map does not preserve distances", json!({})));
        }
        if let Some(k) = &self.bound {
            if let Some(&(a, b)) = self.order.iter().find(|&&(a, b)| m.d(a, b) > k) {
                return Err(Error::precondition(
                    "displacement bound exceeded",
                    json!({ "point": a, "image": b, "bound": k }),
                ));
            }
        }
        Ok(())
    }

    /// The spec a new image of `u` must satisfy: `d(f(a), v) = d(a, u)`.
    fn image_spec(&self, m: &FiniteMetricSpace, u: usize) -> DistanceSpec {
        DistanceSpec::from_pairs(self.order.iter().map(|&(a, b)| (b, m.d(a, u).clone())))
    }

    /// The spec a new preimage of `y` must satisfy: `d(a, x) = d(f(a), y)`.
    fn preimage_spec(&self, m: &FiniteMetricSpace, y: usize) -> DistanceSpec {
        DistanceSpec::from_pairs(self.order.iter().map(|&(a, b)| (a, m.d(b, y).clone())))
    }
}

/// What a certificate witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `d(point, f(point)) >= required` for an isometry under construction.
    Unbounded,
    /// A word moves its base point to a strictly later point by at least `required`.
    Word,
    /// A word moves a point further than the summed corrector bounds along it.
    Freeness,
    /// A composite maps a tuple exactly onto its target.
    Homogeneity,
}

/// A checkable displacement claim, emitted as one JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub stage: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    pub point: usize,
    pub image: usize,
    pub displacement: Rational,
    /// The lower bound being certified (strict for freeness).
    pub required: Rational,
}

impl Certificate {
    /// Re-checks the displacement against the space.
    pub fn holds(&self, m: &FiniteMetricSpace) -> bool {
        let d = m.d(self.point, self.image);
        *d == self.displacement
            && match self.kind {
                CertificateKind::Freeness => *d > self.required,
                _ => *d >= self.required,
            }
    }
}

/// Result of [`approximate_isometry`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Approximation {
    pub point: usize,
    /// `d(v_n', v_n'')`.
    pub distance: Rational,
}

/// Given isometric tuples `base -> images` and a point `vn`, finds `vn'` with
/// `d(images[i], vn') = d(base[i], vn)` and `d(vn', target) < eps`.
///
/// Requires `|d(images[i], target) - d(base[i], vn)| < eps` for every `i`.
/// If `vn` is `base[i]` the answer is `images[i]`; otherwise a new point is
/// placed at distance `(lo + min(hi, eps)) / 2` from `target`, where
/// `[lo, hi]` is the feasible interval left by the tuple constraints.
pub fn approximate_isometry(
    gs: &mut GrowingSpace,
    base: &[usize],
    images: &[usize],
    vn: usize,
    target: usize,
    eps: &Rational,
) -> Result<Approximation> {
    let m = gs.space();
    if !eps.is_positive() {
        return Err(Error::precondition("eps must be positive", json!({ "eps": eps })));
    }
    m.check_point(vn)?;
    m.check_point(target)?;
    if !tuples_isometric(m, base, images)? {
        return Err(Error::precondition("base and images are not isometric", json!({})));
    }
    for (i, (&v, &w)) in base.iter().zip(images).enumerate() {
        if (m.d(w, target) - m.d(v, vn)).abs() >= *eps {
            return Err(Error::precondition(
                "approximation hypothesis fails",
                json!({ "i": i, "eps": eps }),
            ));
        }
    }
    if let Some(i) = base.iter().position(|&v| v == vn) {
        let point = images[i];
        return Ok(Approximation {
            point,
            distance: m.d(point, target).clone(),
        });
    }
    let mut fixed: Vec<(usize, Rational)> = Vec::new();
    for (&v, &w) in base.iter().zip(images) {
        if !fixed.iter().any(|(p, _)| *p == w) {
            fixed.push((w, m.d(v, vn).clone()));
        }
    }
    let mut spec = DistanceSpec::from_pairs(fixed.iter().cloned());
    let distance = match spec.get(target) {
        Some(g) => g.clone(),
        None => {
            let iv = feasible_interval(m, &fixed, target);
            let top = iv.hi.map_or_else(|| eps.clone(), |h| h.min(eps.clone()));
            let x = Rational::midpoint(&iv.lo, &top);
            spec = spec.with(target, x.clone());
            x
        }
    };
    let point = gs.extend_point(&spec)?;
    Ok(Approximation { point, distance })
}

/// Extends a bounded partial isometry to `u`, keeping `d(x, f(x)) <= k`.
///
/// The identity extends by `u -> u`. Otherwise the image is a new point whose
/// distance to `u` is the midpoint of its feasible interval capped at `k`
/// (or forced, when `u` is already in the range).
pub fn extend_bounded(gs: &mut GrowingSpace, f: &mut PartialIsometry, u: usize) -> Result<usize> {
    let m = gs.space();
    m.check_point(u)?;
    let Some(k) = f.bound().cloned() else {
        return Err(Error::precondition("map has no displacement bound", json!({})));
    };
    if f.in_domain(u) {
        return Err(Error::precondition("point already in the domain", json!({ "point": u })));
    }
    if let Some(&(a, b)) = f.pairs().iter().find(|&&(a, b)| m.d(a, b) > &k) {
        return Err(Error::precondition(
            "map exceeds its displacement bound",
            json!({ "point": a, "image": b, "bound": k }),
        ));
    }
    if f.is_identity() && !f.in_range(u) {
        f.insert(u, u)?;
        return Ok(u);
    }
    let mut spec = f.image_spec(m, u);
    if spec.get(u).is_none() {
        let fixed: Vec<(usize, Rational)> =
            spec.targets.iter().map(|(&p, g)| (p, g.clone())).collect();
        let iv = feasible_interval(m, &fixed, u);
        let top = iv.hi.map_or_else(|| k.clone(), |h| h.min(k.clone()));
        let x = Rational::midpoint(&iv.lo, &top);
        if !x.is_positive() {
            return Err(Error::infeasible(
                "no positive displacement within the bound",
                json!({ "point": u, "bound": k }),
            ));
        }
        spec = spec.with(u, x);
    }
    let v = gs.extend_point(&spec)?;
    f.insert(u, v)?;
    debug_assert!(f.check(gs.space()).is_ok());
    Ok(v)
}

/// Extends `f` to a preimage of `y` with the same bound.
pub fn extend_bounded_inverse(
    gs: &mut GrowingSpace,
    f: &mut PartialIsometry,
    y: usize,
) -> Result<usize> {
    let mut inv = f.inverse();
    let x = extend_bounded(gs, &mut inv, y)?;
    *f = inv.inverse();
    Ok(x)
}

/// Alternates domain and range steps over the insertion order, `rounds` times each.
pub fn back_and_forth_bounded(
    gs: &mut GrowingSpace,
    f: &mut PartialIsometry,
    rounds: usize,
) -> Result<()> {
    for _ in 0..rounds {
        if let Some(u) = gs.space().points().find(|&p| !f.in_domain(p)) {
            extend_bounded(gs, f, u)?;
        }
        if let Some(y) = gs.space().points().find(|&p| !f.in_range(p)) {
            extend_bounded_inverse(gs, f, y)?;
        }
        f.check(gs.space())?;
    }
    Ok(())
}

/// Extends an unbounded map to the first point outside its domain.
fn domain_step(gs: &mut GrowingSpace, f: &mut PartialIsometry) -> Result<()> {
    if let Some(u) = gs.space().points().find(|&p| !f.in_domain(p)) {
        let spec = f.image_spec(gs.space(), u);
        let v = gs.extend_point(&spec)?;
        f.insert(u, v)?;
    }
    Ok(())
}

/// Extends an unbounded map to the first point outside its range.
fn range_step(gs: &mut GrowingSpace, f: &mut PartialIsometry) -> Result<()> {
    if let Some(y) = gs.space().points().find(|&p| !f.in_range(p)) {
        let spec = f.preimage_spec(gs.space(), y);
        let x = gs.extend_point(&spec)?;
        f.insert(x, y)?;
    }
    Ok(())
}

/// The stage at which [`build_unbounded`] certifies displacement `n`.
pub fn unbounded_stage(n: usize) -> usize {
    4 * n - 2
}

/// Builds a partial isometry stage by stage.
///
/// Odd stages add a preimage for the first point outside the range, stages
/// divisible by 4 add an image for the first point outside the domain, and
/// stage `4n - 2` adds a point `z` at least distance exactly `n` from the
/// domain together with an image at the largest feasible distance from `z`
/// (at least `n`), emitting a certificate.
pub fn build_unbounded(
    gs: &mut GrowingSpace,
    stages: usize,
) -> Result<(PartialIsometry, Vec<Certificate>)> {
    if stages == 0 {
        return Err(Error::precondition("stages must be >= 1", json!({})));
    }
    if gs.is_empty() {
        gs.extend_point(&DistanceSpec::new())?;
    }
    let mut f = PartialIsometry::new();
    let mut certs = Vec::new();
    for stage in 1..=stages {
        if stage % 2 == 1 {
            range_step(gs, &mut f)?;
        } else if stage % 4 == 0 {
            domain_step(gs, &mut f)?;
        } else {
            let n = int(((stage + 2) / 4) as i64);
            let a0 = f.pairs()[0].0;
            let m = gs.space();
            // g(a) = n + d(a, a0) is consistent and has minimum n at a0.
            let spec = DistanceSpec::from_pairs(
                f.pairs().iter().map(|&(a, _)| (a, &n + m.d(a, a0))),
            );
            let z = gs.extend_point(&spec)?;
            let m = gs.space();
            let fixed: Vec<(usize, Rational)> =
                f.pairs().iter().map(|&(a, b)| (b, m.d(a, z).clone())).collect();
            let iv = feasible_interval(m, &fixed, z);
            let t = iv.hi.expect("domain is non-empty");
            let w = gs.extend_point(&DistanceSpec::from_pairs(fixed).with(z, t.clone()))?;
            f.insert(z, w)?;
            let cert = Certificate {
                kind: CertificateKind::Unbounded,
                stage,
                word: None,
                point: z,
                image: w,
                displacement: t,
                required: n,
            };
            if !cert.holds(gs.space()) {
                return Err(Error::infeasible(
                    "displacement target missed",
                    json!({ "stage": stage }),
                ));
            }
            certs.push(cert);
        }
    }
    f.check(gs.space())?;
    Ok((f, certs))
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn inv(self) -> Letter {
        Letter {
            inverse: !self.inverse,
            ..self
        }
    }
}

/// A reduced word in free generators, written `a`, `b`, ... with inverses `A`, `B`, ...
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    /// Rejects empty and non-reduced words.
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::precondition("empty word", json!({})));
        }
        if letters.windows(2).any(|w| w[0] == w[1].inv()) {
            return Err(Error::precondition("word is not reduced", json!({})));
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let (first, last) = (self.letters[0], self.letters[self.letters.len() - 1]);
        self.letters.len() == 1 || first != last.inv()
    }

    pub fn generators(&self) -> usize {
        self.letters.iter().map(|l| l.generator + 1).max().unwrap_or(0)
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            let c = (b'a' + l.generator as u8) as char;
            let c = if l.inverse { c.to_ascii_uppercase() } else { c };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| {
                if c.is_ascii_lowercase() {
                    Ok(Letter {
                        generator: (c as u8 - b'a') as usize,
                        inverse: false,
                    })
                } else if c.is_ascii_uppercase() {
                    Ok(Letter {
                        generator: (c as u8 - b'A') as usize,
                        inverse: true,
                    })
                } else {
                    Err(Error::Parse(format!("bad letter {c:?} in word {s:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        FreeWord::new(letters)
    }
}

/// The first `count` cyclically reduced words over `generators` letters, in shortlex order.
pub fn reduced_words(generators: usize, count: usize) -> Vec<FreeWord> {
    let alphabet: Vec<Letter> = (0..generators)
        .flat_map(|g| {
            [false, true].map(|inverse| Letter {
                generator: g,
                inverse,
            })
        })
        .collect();
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Letter>> = vec![vec![]];
    while out.len() < count && !alphabet.is_empty() {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &alphabet {
                if w.last().is_some_and(|&p| p == l.inv()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        for v in &next {
            let w = FreeWord { letters: v.clone() };
            if w.is_cyclically_reduced() && out.len() < count {
                out.push(w);
            }
        }
        layer = next;
    }
    out
}

/// Applies `word` (rightmost letter first) to `x`, returning every point visited.
pub fn evaluate(maps: &[PartialIsometry], word: &FreeWord, x: usize) -> Option<Vec<usize>> {
    let mut trace = vec![x];
    let mut cur = x;
    for l in word.letters().iter().rev() {
        let f = maps.get(l.generator)?;
        cur = if l.inverse {
            f.preimage(cur)?
        } else {
            f.image(cur)?
        };
        trace.push(cur);
    }
    Some(trace)
}

/// A certified word evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordRun {
    pub certificate: Certificate,
    pub trace: Vec<usize>,
}

/// Realizes `word` on a fresh far base point so that it moves the base by at
/// least `required` (strictly more when `strict`).
///
/// Each letter maps the current point to a new point whose distance from the
/// base is the largest the isometry constraints allow.
fn word_work(
    gs: &mut GrowingSpace,
    maps: &mut [PartialIsometry],
    word: &FreeWord,
    required: &Rational,
    strict: bool,
    stage: usize,
) -> Result<WordRun> {
    if word.generators() > maps.len() {
        return Err(Error::precondition(
            "word uses an unknown generator",
            json!({ "word": word.to_string() }),
        ));
    }
    if gs.is_empty() {
        gs.extend_point(&DistanceSpec::new())?;
    }
    let m = gs.space();
    let far = required + m.diameter() + int(1);
    let p0 = gs.extend_point(&DistanceSpec::from_pairs(
        m.points().map(|a| (a, &far + m.d(a, 0))),
    ))?;
    let mut trace = vec![p0];
    let mut cur = p0;
    for l in word.letters().iter().rev() {
        let m = gs.space();
        let f = &maps[l.generator];
        let spec = if l.inverse {
            f.preimage_spec(m, cur)
        } else {
            f.image_spec(m, cur)
        };
        let spec = if spec.get(p0).is_some() {
            spec
        } else {
            let fixed: Vec<(usize, Rational)> =
                spec.targets.iter().map(|(&p, g)| (p, g.clone())).collect();
            let iv = feasible_interval(m, &fixed, p0);
            let stretch = iv.hi.unwrap_or_else(|| &far + &far + m.d(cur, p0));
            spec.with(p0, stretch)
        };
        let q = gs.extend_point(&spec)?;
        let f = &mut maps[l.generator];
        if l.inverse {
            f.insert(q, cur)?;
        } else {
            f.insert(cur, q)?;
        }
        trace.push(q);
        cur = q;
    }
    let certificate = Certificate {
        kind: if strict {
            CertificateKind::Freeness
        } else {
            CertificateKind::Word
        },
        stage,
        word: Some(word.to_string()),
        point: p0,
        image: cur,
        displacement: gs.d(p0, cur).clone(),
        required: required.clone(),
    };
    if !certificate.holds(gs.space()) || cur <= p0 {
        return Err(Error::infeasible(
            "word displacement target missed",
            json!({ "word": word.to_string(), "required": required }),
        ));
    }
    Ok(WordRun { certificate, trace })
}

/// Output of [`build_free_pair`].
#[derive(Debug, Clone)]
pub struct FreePair {
    pub a: PartialIsometry,
    pub b: PartialIsometry,
    pub runs: Vec<WordRun>,
}

/// Builds two partial isometries on which every listed word is unbounded.
///
/// Even stages extend `a` and `b` towards totality, rotating through
/// a-domain, a-range, b-domain, b-range. Odd stages take the words
/// round-robin; the `r`-th visit of a word realizes it on fresh points with
/// displacement at least `r`.
pub fn build_free_pair(
    gs: &mut GrowingSpace,
    words: &[FreeWord],
    revisits: usize,
) -> Result<FreePair> {
    for w in words {
        if !w.is_cyclically_reduced() || w.generators() > 2 {
            return Err(Error::precondition(
                "words must be cyclically reduced in a and b",
                json!({ "word": w.to_string() }),
            ));
        }
    }
    if gs.is_empty() {
        gs.extend_point(&DistanceSpec::new())?;
    }
    let mut maps = vec![PartialIsometry::new(), PartialIsometry::new()];
    let mut runs = Vec::new();
    let jobs = words.len() * revisits;
    for stage in 1..=2 * jobs {
        if stage % 2 == 1 {
            let j = (stage - 1) / 2;
            let word = &words[j % words.len()];
            let r = int((j / words.len() + 1) as i64);
            runs.push(word_work(gs, &mut maps, word, &r, false, stage)?);
        } else {
            let task = (stage / 2 - 1) % 4;
            let f = &mut maps[task / 2];
            if task % 2 == 0 {
                domain_step(gs, f)?;
            } else {
                range_step(gs, f)?;
            }
        }
    }
    for f in &maps {
        f.check(gs.space())?;
    }
    let b = maps.pop().expect("two maps");
    let a = maps.pop().expect("two maps");
    Ok(FreePair { a, b, runs })
}

/// An isometric pair of tuples to be matched by a composite generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TuplePair {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
}

/// Output of [`compose_dense_free`].
#[derive(Debug, Clone)]
pub struct DenseFree {
    /// The unbounded parts `h_i`.
    pub generators: Vec<PartialIsometry>,
    /// The bounded correctors `n_i`, each with its bound `k_i`.
    pub correctors: Vec<PartialIsometry>,
    /// One per tuple point: `n_i(h_i(alpha_ij)) = beta_ij`.
    pub homogeneity: Vec<Certificate>,
    pub freeness: Vec<WordRun>,
}

impl DenseFree {
    /// Applies the composite `n_i h_i`.
    pub fn composite(&self, i: usize, x: usize) -> Option<usize> {
        self.correctors[i].image(self.generators[i].image(x)?)
    }

    /// Sum of corrector bounds along the letters of `word`.
    pub fn corrector_sum(&self, word: &FreeWord) -> Rational {
        word.letters()
            .iter()
            .map(|l| self.correctors[l.generator].bound().cloned().unwrap_or_else(Rational::zero))
            .sum()
    }
}

/// Builds generators `n_i h_i` mapping each `alpha_i` onto `beta_i`, and
/// freeness certificates for `words`.
///
/// `h_i` sends `alpha_i` to fresh points `gamma_i` (or fixes it when
/// `alpha_i = beta_i`); the corrector `n_i: gamma_i -> beta_i` carries the bound
/// `k_i = max d(gamma_ij, beta_ij)`. Each word is then realized on the `h_i`
/// with displacement strictly above the sum of the `k_i` along its letters.
pub fn compose_dense_free(
    gs: &mut GrowingSpace,
    pairs: &[TuplePair],
    words: &[FreeWord],
) -> Result<DenseFree> {
    for (i, p) in pairs.iter().enumerate() {
        if !tuples_isometric(gs.space(), &p.alpha, &p.beta)? {
            return Err(Error::precondition(
                "tuple pair is not isometric",
                json!({ "pair": i }),
            ));
        }
        let mut seen = p.alpha.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != p.alpha.len() {
            return Err(Error::precondition("tuple has repeated points", json!({ "pair": i })));
        }
    }
    let mut generators = Vec::new();
    let mut correctors = Vec::new();
    let mut homogeneity = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let mut h = PartialIsometry::new();
        let mut n;
        if p.alpha == p.beta {
            for &a in &p.alpha {
                h.insert(a, a)?;
            }
            n = PartialIsometry::identity(p.alpha.iter().copied(), Some(Rational::zero()));
        } else {
            for &a in &p.alpha {
                let spec = h.image_spec(gs.space(), a);
                let g = gs.extend_point(&spec)?;
                h.insert(a, g)?;
            }
            let m = gs.space();
            let k = p
                .alpha
                .iter()
                .zip(&p.beta)
                .map(|(&a, &b)| m.d(h.image(a).expect("mapped"), b).clone())
                .max()
                .unwrap_or_else(Rational::zero);
            n = PartialIsometry::with_bound(k);
            for (&a, &b) in p.alpha.iter().zip(&p.beta) {
                n.insert(h.image(a).expect("mapped"), b)?;
            }
        }
        n.check(gs.space())?;
        for (&a, &b) in p.alpha.iter().zip(&p.beta) {
            let g = h.image(a).expect("mapped");
            homogeneity.push(Certificate {
                kind: CertificateKind::Homogeneity,
                stage: i,
                word: None,
                point: g,
                image: b,
                displacement: gs.d(g, b).clone(),
                required: Rational::zero(),
            });
        }
        generators.push(h);
        correctors.push(n);
    }
    let mut out = DenseFree {
        generators,
        correctors,
        homogeneity,
        freeness: Vec::new(),
    };
    for (stage, w) in words.iter().enumerate() {
        let required = out.corrector_sum(w);
        let run = word_work(gs, &mut out.generators, w, &required, true, stage)?;
        out.freeness.push(run);
    }
    for h in &out.generators {
        h.check(gs.space())?;
    }
    Ok(out)
}

/// Creates, for each of `count` random tuples, an isometric copy on fresh points.
pub fn realize_isometric_copy(gs: &mut GrowingSpace, alpha: &[usize]) -> Result<Vec<usize>> {
    let mut f = PartialIsometry::new();
    for &a in alpha {
        let spec = f.image_spec(gs.space(), a);
        let b = gs.extend_point(&spec)?;
        f.insert(a, b)?;
    }
    Ok(alpha.iter().map(|&a| f.image(a).expect("mapped")).collect())
}
