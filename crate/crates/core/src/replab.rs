//! Fuchsian punctured-torus pairs, their Hitchin and maximal lifts, linked sextuples and
//! collar residuals.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::crossratio::period_with;
use crate::error::{Error, Result};
use crate::flags::{act, eigenflag, Flag};
use crate::lie::{principal_embedding, GroupSpec, WeightForm};
use crate::numlin::{self, Mat};
use crate::positivity::{tuple_positive, CircleKind, PositiveCircle};

const MAX_ATTEMPTS: usize = 10_000;

/// Two hyperbolic elements of `SL(2, R)` generating a punctured-torus group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicPair {
    pub a: Mat<f64>,
    pub b: Mat<f64>,
    /// `(tr A, tr B, tr AB)`.
    pub traces: [f64; 3],
}

impl HyperbolicPair {
    /// Fricke normal form for traces `x, y, z > 2` with `x^2 + y^2 + z^2 = xyz`.
    pub fn fricke(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x > 2.0 && y > 2.0 && z > 2.0) {
            return Err(Error::Domain(format!("traces ({x}, {y}, {z}) are not all > 2")));
        }
        let markov = x * x + y * y + z * z - x * y * z;
        if markov.abs() > 1e-9 * (x * y * z) {
            return Err(Error::Domain(format!("commutator trace {} is not -2", markov - 2.0)));
        }
        let s = (-z + (z * z - 4.0).sqrt()) / 2.0;
        let a = Mat::from_rows(vec![vec![x, 1.0], vec![-1.0, 0.0]])?;
        let b = Mat::from_rows(vec![vec![0.0, s], vec![-1.0 / s, y]])?;
        let mut pair = HyperbolicPair { a, b, traces: [x, y, z] };
        pair.orient()?;
        Ok(pair)
    }

    /// Replaces `B` by its inverse when needed so that `(a+, b-, a-, b+)` is cyclically ordered.
    fn orient(&mut self) -> Result<()> {
        let (ap, am) = fixed_points(&self.a)?;
        let (bp, bm) = fixed_points(&self.b)?;
        if cyclically_ordered(&[ap, bm, am, bp]) {
            return Ok(());
        }
        if cyclically_ordered(&[ap, bp, am, bm]) {
            self.b = inverse2(&self.b);
            self.traces[2] = self.a.matmul(&self.b)?.trace();
            return Ok(());
        }
        Err(Error::Domain("axes are not linked".into()))
    }

    /// Conjugate with `A` diagonal and the fixed points of `B` at `t > 0` and `-1/t` in the
    /// chart `t -> (t, 1)`.
    pub fn balanced(&self) -> Result<Self> {
        let (ap, am) = fixed_points(&self.a)?;
        let sign = if ap[0] * am[1] - ap[1] * am[0] > 0.0 { 1.0 } else { -1.0 };
        let m = Mat::from_rows(vec![vec![ap[0], sign * am[0]], vec![ap[1], sign * am[1]]])?;
        let h = inverse2(&m);
        let h = h.scale(&(1.0 / numlin::det(&h)?.sqrt()));
        let (bp, bm) = fixed_points(&self.b)?;
        let (u, w) = (h.mul_vec(&bm)?, h.mul_vec(&bp)?);
        let (t1, t2) = (u[0] / u[1], w[0] / w[1]);
        if !(t1 > 0.0 && t2 < 0.0) {
            return Err(Error::Domain("pair is not oriented".into()));
        }
        let d = (t1 * -t2).powf(-0.25);
        self.conjugate(&(&Mat::diag(&[d, 1.0 / d]) * &h))
    }

    pub fn conjugate(&self, h: &Mat<f64>) -> Result<Self> {
        if numlin::det(h)? <= 0.0 {
            return Err(Error::Domain("conjugator must preserve orientation".into()));
        }
        let hi = numlin::inverse(h)?;
        Ok(HyperbolicPair { a: &(h * &self.a) * &hi, b: &(h * &self.b) * &hi, traces: self.traces })
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("pair serializes")
    }
}

/// Angle in `[0, pi)` of a point of `P^1`; increasing angle is the positive orientation.
pub fn p1_angle(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI)
}

/// Attracting and repelling eigenvectors of a hyperbolic `2x2` matrix.
pub fn fixed_points(g: &Mat<f64>) -> Result<([f64; 2], [f64; 2])> {
    if g.rows() != 2 || g.cols() != 2 {
        return Err(Error::Dimension("fixed points of a non 2x2 matrix".into()));
    }
    let (a, b, c, d) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr - 4.0 * det;
    if !(disc > 0.0) || det <= 0.0 || tr.abs() <= 2.0 * det.sqrt() {
        return Err(Error::Domain(format!("not hyperbolic (trace {tr}, det {det})")));
    }
    let r = disc.sqrt();
    // larger modulus first
    let (l1, l2) = if tr > 0.0 { ((tr + r) / 2.0, (tr - r) / 2.0) } else { ((tr - r) / 2.0, (tr + r) / 2.0) };
    let vec_for = |l: f64| -> [f64; 2] {
        let u = [b, l - a];
        let w = [l - d, c];
        if u[0].hypot(u[1]) >= w[0].hypot(w[1]) {
            u
        } else {
            w
        }
    };
    Ok((vec_for(l1), vec_for(l2)))
}

/// Strict cyclic order of points of `P^1` in the positive direction.
pub fn cyclically_ordered(points: &[[f64; 2]]) -> bool {
    let Some(first) = points.first() else { return true };
    let base = p1_angle(*first);
    let pi = std::f64::consts::PI;
    let rel: Vec<f64> = points.iter().map(|p| (p1_angle(*p) - base).rem_euclid(pi)).collect();
    rel.windows(2).all(|w| w[1] > w[0] + 1e-12) && rel.iter().skip(1).all(|&r| r > 1e-12 && r < pi - 1e-12)
}

/// Whether the fixed point pairs of two hyperbolic elements interleave on `P^1`.
pub fn linked(a: &Mat<f64>, b: &Mat<f64>) -> Result<bool> {
    let (ap, am) = fixed_points(a)?;
    let (bp, bm) = fixed_points(b)?;
    Ok(cyclically_ordered(&[ap, bm, am, bp]) || cyclically_ordered(&[ap, bp, am, bm]))
}

fn inverse2(g: &Mat<f64>) -> Mat<f64> {
    let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    Mat::from_rows(vec![vec![g[(1, 1)] / det, -g[(0, 1)] / det], vec![-g[(1, 0)] / det, g[(0, 0)] / det]]).expect("2x2")
}

/// Random Fricke pair with `tr A, tr B` uniform in `traces`, balanced and then rotated by
/// a random angle.
pub fn sample_hyperbolic_pair<R: Rng + ?Sized>(rng: &mut R, traces: (f64, f64)) -> Result<HyperbolicPair> {
    let (lo, hi) = traces;
    if !(lo > 2.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("trace range ({lo}, {hi}) is not inside (2, inf)")));
    }
    for _ in 0..MAX_ATTEMPTS {
        let x = rng.random_range(lo..hi);
        let y = rng.random_range(lo..hi);
        let disc = x * x * y * y - 4.0 * (x * x + y * y);
        if disc < 0.0 {
            continue;
        }
        let r = disc.sqrt();
        let z = if rng.random_bool(0.5) { (x * y + r) / 2.0 } else { (x * y - r) / 2.0 };
        if z <= 2.0 + 1e-9 {
            continue;
        }
        let pair = HyperbolicPair::fricke(x, y, z)?;
        let (sn, cs) = rng.random_range(0.0..std::f64::consts::PI).sin_cos();
        let rot = Mat::from_rows(vec![vec![cs, -sn], vec![sn, cs]])?;
        return pair.balanced()?.conjugate(&rot);
    }
    Err(Error::Exhausted(MAX_ATTEMPTS))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    /// `(tr A, tr B, tr AB)` of the Fuchsian pair.
    pub traces: Vec<f64>,
    pub embedding: String,
}

/// Representation of a free group given on named generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rep {
    pub spec: GroupSpec,
    pub generators: BTreeMap<String, Mat<f64>>,
    pub source: Source,
}

impl Rep {
    pub fn new(spec: GroupSpec, generators: BTreeMap<String, Mat<f64>>, source: Source) -> Result<Self> {
        for (name, g) in &generators {
            if name.chars().count() != 1 || !name.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(Error::Parse(format!("generator name {name:?} is not a lowercase letter")));
            }
            spec.check_element(g, 1e-8)?;
        }
        Ok(Rep { spec, generators, source })
    }

    /// Image of a word; lowercase letters are generators, uppercase their inverses.
    pub fn word(&self, w: &str) -> Result<Mat<f64>> {
        if w.is_empty() {
            return Err(Error::Parse("empty word".into()));
        }
        let mut out = Mat::identity(self.spec.dim());
        for c in w.chars() {
            let key = c.to_ascii_lowercase().to_string();
            let g = self.generators.get(&key).ok_or_else(|| Error::Parse(format!("unknown generator {c:?} in {w:?}")))?;
            let g = if c.is_ascii_uppercase() { numlin::inverse(g)? } else { g.clone() };
            out = &out * &g;
        }
        Ok(out)
    }

    pub fn conjugate(&self, h: &Mat<f64>) -> Result<Self> {
        let hi = numlin::inverse(h)?;
        let generators = self.generators.iter().map(|(k, g)| (k.clone(), &(h * g) * &hi)).collect();
        Rep::new(self.spec.clone(), generators, self.source.clone())
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("rep serializes")
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let r: Rep = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Rep::new(r.spec, r.generators, r.source)
    }
}

fn from_pair(pair: &HyperbolicPair, spec: GroupSpec, embedding: &str, f: impl Fn(&Mat<f64>) -> Result<Mat<f64>>) -> Result<Rep> {
    let mut gens = BTreeMap::new();
    gens.insert("a".to_string(), f(&pair.a)?);
    gens.insert("b".to_string(), f(&pair.b)?);
    Rep::new(spec, gens, Source { traces: pair.traces.to_vec(), embedding: embedding.into() })
}

/// Composition with the irreducible representation `SL(2) -> SL(n)`.
pub fn hitchin_rep(pair: &HyperbolicPair, n: usize) -> Result<Rep> {
    let iota = principal_embedding(n)?;
    from_pair(pair, GroupSpec::sl(n)?, "principal", |g| iota.apply(g))
}

/// Composition with the diagonal embedding into `Sp(2n)`, one copy of `SL(2)` per
/// symplectic plane.
pub fn maximal_rep(pair: &HyperbolicPair, n: usize) -> Result<Rep> {
    let circ = PositiveCircle::<f64>::new(&GroupSpec::sp(n)?, CircleKind::Diagonal)?;
    from_pair(pair, circ.spec().clone(), "diagonal", |g| circ.element(g))
}

/// Composition with the principal positive circle of `spec` (any family).
pub fn principal_rep(pair: &HyperbolicPair, spec: &GroupSpec) -> Result<Rep> {
    let circ = PositiveCircle::<f64>::new(spec, CircleKind::Principal)?;
    from_pair(pair, spec.clone(), "principal", |g| circ.element(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Positive,
    NotPositive,
    /// No checker for the family; positive because the flags lie on a positive circle.
    AssertedByConstruction,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self != Verdict::NotPositive
    }
}

#[derive(Clone, Debug)]
pub struct Sextuple {
    /// `(a+, b-, a-, b+, B a+, A b+)`.
    pub flags: Vec<Flag<f64>>,
    pub verdict: Verdict,
}

pub fn sextuple(rep: &Rep, a: &str, b: &str, tol: f64) -> Result<Sextuple> {
    let ga = rep.word(a)?;
    let gb = rep.word(b)?;
    let (ap, am) = eigenflag(&rep.spec, &ga, tol)?;
    let (bp, bm) = eigenflag(&rep.spec, &gb, tol)?;
    let bap = act(&gb, &ap)?;
    let abp = act(&ga, &bp)?;
    let flags = vec![ap, bm, am, bp, bap, abp];
    let verdict = match tuple_positive(&flags, tol) {
        Ok(true) => Verdict::Positive,
        Ok(false) => Verdict::NotPositive,
        Err(Error::NotTransverse(_)) => Verdict::NotPositive,
        Err(e) if e.is_capability() && rep.source.embedding == "principal" => Verdict::AssertedByConstruction,
        Err(e) => return Err(e),
    };
    Ok(Sextuple { flags, verdict })
}

/// Both terms of the collar inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollarTerms {
    /// `(1 / p^eta(B))^(1 / <h_theta | eta>)`.
    pub period_term: f64,
    /// `1 / chi_theta(A)`.
    pub character_term: f64,
}

impl CollarTerms {
    pub fn residual(&self) -> f64 {
        self.period_term + self.character_term
    }
}

pub fn collar_terms(rep: &Rep, a: &str, b: &str, theta: usize, eta: &WeightForm, tol: f64) -> Result<CollarTerms> {
    let spec = &rep.spec;
    spec.check_theta(theta)?;
    eta.check(spec)?;
    let c = eta.pairing_h(theta);
    if !(c > 0.0) {
        return Err(Error::Domain(format!("<h_{theta} | eta> = {c} is not positive")));
    }
    let sx = sextuple(rep, a, b, tol)?;
    if !sx.verdict.holds() {
        return Err(Error::Domain("sextuple is not positive".into()));
    }
    let ga = rep.word(a)?;
    let gb = rep.word(b)?;
    let (bp, bm) = (&sx.flags[3], &sx.flags[1]);
    let p = period_with(eta, &gb, bp, bm, &sx.flags[0])?;
    if !(p > 0.0) {
        return Err(Error::numeric("non-positive period", p));
    }
    let chi = spec.root_character(theta, &ga, tol)?;
    Ok(CollarTerms { period_term: (1.0 / p).powf(1.0 / c), character_term: 1.0 / chi })
}

/// `(1/p^eta(B))^(1/<h_theta|eta>) + 1/chi_theta(A)`.
pub fn collar_residual(rep: &Rep, a: &str, b: &str, theta: usize, eta: &WeightForm, tol: f64) -> Result<f64> {
    Ok(collar_terms(rep, a, b, theta, eta, tol)?.residual())
}

/// Translation length `2 arccosh(|tr g| / 2)` in the hyperbolic plane.
pub fn translation_length(g: &Mat<f64>) -> Result<f64> {
    fixed_points(g)?;
    Ok(2.0 * (g.trace().abs() / 2.0).acosh())
}

/// `sinh(l(A)/2) sinh(l(B)/2)`.
pub fn hyperbolic_baseline(pair: &HyperbolicPair) -> Result<f64> {
    let la = translation_length(&pair.a)?;
    let lb = translation_length(&pair.b)?;
    Ok((la / 2.0).sinh() * (lb / 2.0).sinh())
}
