//! Total positivity, positive tuples, semi-positivity, cones and positive circles.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flags::{self, act, standard_pair, standardize, Flag};
use crate::lie::{principal_embedding, sl2_triple, Group, GroupSpec, WeightForm};
use crate::numlin::{self, Mat};
use crate::scalar::{binomial, sign_i, Rational, Scalar};

/// Largest `n` for which SL minors are enumerated.
pub const MAX_TP_DIM: usize = 5;

/// Audit record of a positivity verdict.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Certificate {
    pub accepted: bool,
    pub method: String,
    pub sign_class: Option<Vec<i8>>,
    /// Smallest signed quantity tested in the accepting (or best) configuration.
    pub min_value: f64,
    pub checked: usize,
}

/// Reduced word of the longest Weyl element with one positive parameter per letter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TPParams {
    pub word: Vec<usize>,
    pub params: Vec<f64>,
}

/// `(1, 2, 1, 3, 2, 1, ...)`, a reduced word for the longest element of `S_n`.
pub fn longest_word(n: usize) -> Vec<usize> {
    (1..n).flat_map(|k| (1..=k).rev()).collect()
}

/// Product of `exp(t E_{a,a+1})` along the word.
pub fn tp_unipotent<T: Scalar>(n: usize, word: &[usize], params: &[T]) -> Result<Mat<T>> {
    if word.len() != params.len() {
        return Err(Error::Dimension("word and parameters differ in length".into()));
    }
    let mut u = Mat::identity(n);
    for (&a, t) in word.iter().zip(params) {
        if a == 0 || a >= n {
            return Err(Error::Index(format!("letter {a} for n = {n}")));
        }
        if !t.is_positive() {
            return Err(Error::Domain("parameters must be positive".into()));
        }
        let mut e = Mat::identity(n);
        e[(a - 1, a)] = t.clone();
        u = &u * &e;
    }
    Ok(u)
}

pub fn sample_tp_unipotent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (TPParams, Mat<f64>) {
    let word = longest_word(n);
    let params: Vec<f64> = word.iter().map(|_| (0.6 * rng.sample::<f64, _>(StandardNormal)).exp()).collect();
    let u = tp_unipotent(n, &word, &params).expect("valid word");
    (TPParams { word, params }, u)
}

/// Pascal reference matrix `r_ij = C(j, i)` (zero-based).
pub fn pascal(n: usize) -> Mat<Rational> {
    Mat::from_fn(n, n, |i, j| <Rational as Scalar>::from_i64(binomial(j, i)))
}

type Pattern = Vec<(Vec<usize>, Vec<usize>)>;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Row/column index sets whose minor is nonzero on the Pascal matrix.
pub fn minor_pattern(n: usize) -> Result<&'static Pattern> {
    static CACHE: OnceLock<Vec<Pattern>> = OnceLock::new();
    if !(2..=MAX_TP_DIM).contains(&n) {
        return Err(Error::Capability(format!("minor enumeration supports 2 <= n <= {MAX_TP_DIM}, got {n}")));
    }
    let all = CACHE.get_or_init(|| {
        (0..=MAX_TP_DIM)
            .map(|m| {
                if m < 2 {
                    return Vec::new();
                }
                let p = pascal(m);
                let mut pat = Vec::new();
                for k in 1..=m {
                    for rows in subsets(m, k) {
                        for cols in subsets(m, k) {
                            if !numlin::minor(&p, &rows, &cols).expect("in range").is_zero() {
                                pat.push((rows.clone(), cols));
                            }
                        }
                    }
                }
                pat
            })
            .collect()
    });
    Ok(&all[n])
}

fn check_unitriangular<T: Scalar>(u: &Mat<T>) -> Result<()> {
    let n = u.rows();
    if !u.is_square() {
        return Err(Error::Dimension("total positivity needs a square matrix".into()));
    }
    let scale = u.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..=i {
            let want = if i == j { T::one() } else { T::zero() };
            let d = u[(i, j)].clone() - want;
            if !(if T::EXACT { d.is_zero() } else { d.abs_f64() <= 1e-9 * scale }) {
                return Err(Error::Domain("matrix is not upper unitriangular".into()));
            }
        }
    }
    Ok(())
}

/// Pattern minors of `u`, in [`minor_pattern`] order.
pub fn pattern_minors<T: Scalar>(u: &Mat<T>) -> Result<Vec<T>> {
    let pat = minor_pattern(u.rows())?;
    pat.iter().map(|(r, c)| numlin::minor(u, r, c)).collect()
}

pub fn is_totally_positive<T: Scalar>(u: &Mat<T>, tol: f64) -> Result<bool> {
    check_unitriangular(u)?;
    Ok(pattern_minors(u)?.iter().all(|m| m.is_pos(tol)))
}

fn sign_classes(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << (n - 1))
        .map(|mask| (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

fn class_sign(s: &[i8], rows: &[usize], cols: &[usize]) -> f64 {
    rows.iter().chain(cols).map(|&i| s[i] as f64).product()
}

/// Decides strict (or relaxed) positivity of the minors of each matrix after a common
/// sign-class conjugation.
fn sign_class_search<T: Scalar>(mats: &[&Mat<T>], tol: f64, relaxed: bool) -> Result<Certificate> {
    let n = mats[0].rows();
    let pat = minor_pattern(n)?;
    let minors: Vec<Vec<T>> = mats.iter().map(|m| pattern_minors(m)).collect::<Result<_>>()?;
    let mut best: Option<(f64, Vec<i8>)> = None;
    for s in sign_classes(n) {
        let mut min_v = f64::INFINITY;
        let mut ok = true;
        for ms in &minors {
            for ((rows, cols), m) in pat.iter().zip(ms) {
                let sg = class_sign(&s, rows, cols);
                let v = if sg > 0.0 { m.clone() } else { -m.clone() };
                let pass = if relaxed {
                    if T::EXACT { !v.is_negative() } else { v.to_f64() >= -tol }
                } else {
                    v.is_pos(tol)
                };
                min_v = min_v.min(v.to_f64());
                if !pass {
                    ok = false;
                }
            }
        }
        if ok {
            return Ok(Certificate {
                accepted: true,
                method: "sign-class minors".into(),
                sign_class: Some(s),
                min_value: min_v,
                checked: pat.len() * mats.len(),
            });
        }
        if best.as_ref().map_or(true, |(b, _)| min_v > *b) {
            best = Some((min_v, s));
        }
    }
    let (min_value, s) = best.expect("at least one sign class");
    Ok(Certificate { accepted: false, method: "sign-class minors".into(), sign_class: Some(s), min_value, checked: pat.len() * mats.len() })
}

/// Upper unitriangular `u` with `z = u E-`, for `z` transverse to `E+`.
fn unipotent_for<T: Scalar>(z: &Flag<T>) -> Result<Mat<T>> {
    let n = z.spec().dim();
    let mut u = Mat::identity(n);
    for j in 1..n {
        // column j spans z_{n-j} modulo the later columns
        let k = n - j;
        let zb = z.of_dim(k).ok_or_else(|| Error::Domain("missing flag member".into()))?;
        let low = zb.rows_range(j, n);
        let mut e = Mat::zeros(k, 1);
        e[(0, 0)] = T::one();
        let c = numlin::solve(&low, &e).map_err(|_| Error::NotTransverse("flag not transverse to E+".into()))?;
        let col = zb * &c;
        for i in 0..j {
            u[(i, j)] = col[(i, 0)].clone();
        }
    }
    Ok(u)
}

/// Positive diagonal conjugation normalizing the nonzero superdiagonal of `u` to unit size.
fn normalizer<T: Scalar>(u: &Mat<T>) -> Vec<T> {
    let n = u.rows();
    let mut d = vec![T::one(); n];
    for i in 0..n - 1 {
        let s = u[(i, i + 1)].abs();
        d[i + 1] = if s.is_zero() { d[i].clone() } else { d[i].clone() * s };
    }
    d
}

fn conj_diag<T: Scalar>(u: &Mat<T>, d: &[T]) -> Mat<T> {
    Mat::from_fn(u.rows(), u.cols(), |i, j| u[(i, j)].clone() * d[i].clone() / d[j].clone())
}

fn require_checker(spec: &GroupSpec) -> Result<()> {
    match spec.group() {
        Group::SO { .. } => Err(Error::Capability("tuple positivity checking is not implemented for SO; sample positive circles instead".into())),
        Group::SL { n } if n > MAX_TP_DIM => Err(Error::Capability(format!("SL({n}) exceeds the minor enumeration limit n <= {MAX_TP_DIM}"))),
        _ => Ok(()),
    }
}

fn check_transverse<T: Scalar>(pairs: &[(&Flag<T>, &Flag<T>)], tol: f64) -> Result<()> {
    for (a, b) in pairs {
        if !flags::transverse(a, b, tol)? {
            return Err(Error::NotTransverse("positivity check on a non-transverse pair".into()));
        }
    }
    Ok(())
}

/// `u` for `z` and `v` for `w` after standardizing `(x, y)` to `(E+, E-)`, with a common
/// normalizing diagonal conjugation.
fn sl_data<T: Scalar>(x: &Flag<T>, y: &Flag<T>, zs: &[&Flag<T>], tol: f64) -> Result<Vec<Mat<T>>> {
    let g = standardize(x, y, tol)?;
    let us: Vec<Mat<T>> = zs.iter().map(|z| unipotent_for(&act_exact(&g, z)?)).collect::<Result<_>>()?;
    let d = normalizer(&us[0]);
    Ok(us.iter().map(|u| conj_diag(u, &d)).collect())
}

/// Action without re-validating group membership (the standardizing matrix of an SL pair
/// is only defined up to the Levi factor).
fn act_exact<T: Scalar>(g: &Mat<T>, x: &Flag<T>) -> Result<Flag<T>> {
    let subs = x.subspaces().iter().map(|m| g.matmul(m)).collect::<Result<Vec<_>>>()?;
    Ok(Flag::new_unchecked(x.spec().clone(), subs))
}

/// Symmetric form of the Lagrangian triple `(L1, L2, L3)`; `(E+, [S; I], E-)` gives `S`.
pub fn maslov_form<T: Scalar>(l1: &Flag<T>, l2: &Flag<T>, l3: &Flag<T>) -> Result<Mat<T>> {
    let spec = l1.spec();
    let Group::Sp { n } = spec.group() else {
        return Err(Error::Domain("Maslov form needs Sp flags".into()));
    };
    let (a, b, c) = (l1.subspace(n)?, l2.subspace(n)?, l3.subspace(n)?);
    let j = spec.form::<T>().expect("symplectic form");
    let coeff = numlin::solve(&Mat::hcat(&[a, c])?, b).map_err(|_| Error::NotTransverse("L1 and L3 are not transverse".into()))?;
    let alpha = coeff.rows_range(0, n);
    let gamma = coeff.rows_range(n, 2 * n);
    let q = &(&(a * &alpha).transpose() * &j) * &(c * &gamma);
    let half = T::one() / T::from_i64(2);
    Ok((&q + &q.transpose()).scale(&half))
}

/// All principal minors nonnegative (or nonpositive with alternating sign when `sign < 0`).
fn semidefinite<T: Scalar>(q: &Mat<T>, sign: i32, tol: f64) -> (bool, f64) {
    let n = q.rows();
    let m = if sign > 0 { q.clone() } else { -q };
    let mut min_v = f64::INFINITY;
    for k in 1..=n {
        for s in subsets(n, k) {
            let v = numlin::minor(&m, &s, &s).expect("in range");
            min_v = min_v.min(v.to_f64());
            let ok = if T::EXACT { !v.is_negative() } else { v.to_f64() >= -tol };
            if !ok {
                return (false, min_v);
            }
        }
    }
    (true, min_v)
}

fn definite_value<T: Scalar>(q: &Mat<T>) -> f64 {
    let n = q.rows();
    (1..=n)
        .map(|k| numlin::minor(q, &(0..k).collect::<Vec<_>>(), &(0..k).collect::<Vec<_>>()).expect("in range").abs_f64())
        .fold(f64::INFINITY, f64::min)
}

pub fn triple_certificate<T: Scalar>(x: &Flag<T>, z: &Flag<T>, y: &Flag<T>, tol: f64) -> Result<Certificate> {
    let spec = x.spec();
    require_checker(spec)?;
    check_transverse(&[(x, y), (x, z), (z, y)], tol)?;
    match spec.group() {
        Group::Sp { .. } => {
            let q = maslov_form(x, z, y)?;
            let s = numlin::definite_sign(&q, tol);
            Ok(Certificate {
                accepted: s.is_some(),
                method: "Maslov form".into(),
                sign_class: s.map(|v| vec![v as i8]),
                min_value: definite_value(&q),
                checked: q.rows(),
            })
        }
        _ => {
            let c1 = sign_class_search(&[&sl_data(x, y, &[z], tol)?[0]], tol, false)?;
            if c1.accepted {
                return Ok(c1);
            }
            let c2 = sign_class_search(&[&sl_data(y, x, &[z], tol)?[0]], tol, false)?;
            Ok(if c2.accepted || c2.min_value > c1.min_value { c2 } else { c1 })
        }
    }
}

pub fn triple_positive<T: Scalar>(x: &Flag<T>, z: &Flag<T>, y: &Flag<T>, tol: f64) -> Result<bool> {
    Ok(triple_certificate(x, z, y, tol)?.accepted)
}

pub fn quadruple_certificate<T: Scalar>(x: &Flag<T>, z: &Flag<T>, y: &Flag<T>, w: &Flag<T>, tol: f64) -> Result<Certificate> {
    let spec = x.spec();
    require_checker(spec)?;
    check_transverse(&[(x, y), (x, z), (z, y), (x, w), (w, y)], tol)?;
    match spec.group() {
        Group::Sp { .. } => {
            let q1 = maslov_form(x, z, y)?;
            let q2 = maslov_form(x, w, y)?;
            let s1 = numlin::definite_sign(&q1, tol);
            let s2 = numlin::definite_sign(&q2, tol);
            let accepted = matches!((s1, s2), (Some(a), Some(b)) if a == -b);
            Ok(Certificate {
                accepted,
                method: "Maslov forms".into(),
                sign_class: s1.map(|v| vec![v as i8]),
                min_value: definite_value(&q1).min(definite_value(&q2)),
                checked: 2 * q1.rows(),
            })
        }
        _ => {
            let us = sl_data(x, y, &[z, w], tol)?;
            let vinv = numlin::inverse(&us[1])?;
            // positive diagonal conjugation scales minors by positive factors and commutes with
            // the sign classes, so each matrix gets its own normalization
            let vinv = conj_diag(&vinv, &normalizer(&vinv));
            sign_class_search(&[&us[0], &vinv], tol, false)
        }
    }
}

/// Positivity of the cyclically ordered quadruple `(x, z, y, w)`.
pub fn quadruple_positive<T: Scalar>(x: &Flag<T>, z: &Flag<T>, y: &Flag<T>, w: &Flag<T>, tol: f64) -> Result<bool> {
    Ok(quadruple_certificate(x, z, y, w, tol)?.accepted)
}

/// Every ordered 4-subtuple positive (triples use the triple test).
pub fn tuple_positive<T: Scalar>(flags: &[Flag<T>], tol: f64) -> Result<bool> {
    let k = flags.len();
    if k < 3 {
        return Err(Error::Domain(format!("positivity of a {k}-tuple is undefined")));
    }
    require_checker(flags[0].spec())?;
    if k == 3 {
        return triple_positive(&flags[0], &flags[1], &flags[2], tol);
    }
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                for m in l + 1..k {
                    if !quadruple_positive(&flags[i], &flags[j], &flags[l], &flags[m], tol)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Closure test for `(X, Y, x, y)`: the positivity certificate of the rotation `(x, y, X, Y)`
/// with strict inequalities relaxed.
pub fn semi_positive<T: Scalar>(cx: &Flag<T>, cy: &Flag<T>, x: &Flag<T>, y: &Flag<T>, tol: f64) -> Result<bool> {
    let spec = x.spec();
    require_checker(spec)?;
    check_transverse(&[(cx, x), (cx, y), (cy, x), (cy, y)], tol)?;
    match spec.group() {
        Group::Sp { .. } => {
            let q1 = maslov_form(x, y, cx)?;
            let q2 = maslov_form(x, cy, cx)?;
            Ok([1, -1].iter().any(|&s| semidefinite(&q1, s, tol).0 && semidefinite(&q2, -s, tol).0))
        }
        _ => {
            if !flags::transverse(x, y, tol)? {
                return Err(Error::NotTransverse("semi-positivity check needs x transverse to y".into()));
            }
            let us = sl_data(x, cx, &[y, cy], tol)?;
            let vinv = numlin::inverse(&us[1])?;
            let vinv = conj_diag(&vinv, &normalizer(&vinv));
            Ok(sign_class_search(&[&us[0], &vinv], tol, true)?.accepted)
        }
    }
}

/// Element of a root space cone `c_theta` (or `c_{-theta}` when `negative`).
///
/// Coordinates: SL and SO roots below the last one use a single coefficient of `x_{±theta}`;
/// Sp uses the upper triangle of a symmetric `n x n` matrix; the last SO root uses the
/// coordinates of a vector in the Lorentzian block `(e_p, middle, e_{N-1-p})`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeVector<T: Scalar> {
    pub theta: usize,
    pub negative: bool,
    pub coords: Vec<T>,
}

fn cone_dim(spec: &GroupSpec, theta: usize) -> usize {
    match spec.group() {
        Group::Sp { n } => n * (n + 1) / 2,
        Group::SO { p, q } if theta == p - 1 => q - p + 2,
        _ => 1,
    }
}

impl<T: Scalar> ConeVector<T> {
    pub fn new(spec: &GroupSpec, theta: usize, negative: bool, coords: Vec<T>) -> Result<Self> {
        spec.check_theta(theta)?;
        let d = cone_dim(spec, theta);
        if coords.len() != d {
            return Err(Error::Dimension(format!("{} cone coordinates, expected {d}", coords.len())));
        }
        Ok(ConeVector { theta, negative, coords })
    }

    /// Matrix in the root space `u_{±theta}`.
    pub fn matrix(&self, spec: &GroupSpec) -> Result<Mat<T>> {
        let n = spec.dim();
        match spec.group() {
            Group::Sp { n: h } => {
                let mut s = Mat::zeros(h, h);
                let mut k = 0;
                for i in 0..h {
                    for j in i..h {
                        s[(i, j)] = self.coords[k].clone();
                        s[(j, i)] = self.coords[k].clone();
                        k += 1;
                    }
                }
                let mut m = Mat::zeros(n, n);
                for i in 0..h {
                    for j in 0..h {
                        if self.negative {
                            m[(h + i, j)] = s[(i, j)].clone();
                        } else {
                            m[(i, h + j)] = s[(i, j)].clone();
                        }
                    }
                }
                Ok(m)
            }
            Group::SO { p, .. } if self.theta == p - 1 => {
                let m = p - 1;
                let q = spec.form::<T>().expect("form");
                let idx = lorentz_indices(spec);
                let mut v = vec![T::zero(); n];
                for (c, &i) in self.coords.iter().zip(&idx) {
                    v[i] = c.clone();
                }
                // X_v(w) = B(v, w) e - B(e, w) v, with e = e_{m-1} or its partner
                let e_idx = if self.negative { n - m } else { m - 1 };
                let mut e = vec![T::zero(); n];
                e[e_idx] = T::one();
                let qv = q.mul_vec(&v)?;
                let qe = q.mul_vec(&e)?;
                let mut out = Mat::from_fn(n, n, |i, j| e[i].clone() * qv[j].clone() - v[i].clone() * qe[j].clone());
                if self.negative {
                    out = -&out;
                }
                Ok(out)
            }
            _ => {
                let tr = sl2_triple::<T>(spec, self.theta)?;
                let x = if self.negative { tr.x_minus } else { tr.x_plus };
                Ok(x.scale(&self.coords[0]))
            }
        }
    }
}

fn lorentz_indices(spec: &GroupSpec) -> Vec<usize> {
    let Group::SO { p, q } = spec.group() else { unreachable!() };
    let n = p + q;
    let m = p - 1;
    (m..=n - 1 - m).collect()
}

/// Open cone membership.
pub fn cone_contains<T: Scalar>(spec: &GroupSpec, v: &ConeVector<T>) -> Result<bool> {
    spec.check_theta(v.theta)?;
    if v.coords.len() != cone_dim(spec, v.theta) {
        return Err(Error::Dimension("cone coordinates of the wrong size".into()));
    }
    match spec.group() {
        Group::Sp { .. } => {
            let m = v.matrix(spec)?;
            let Group::Sp { n } = spec.group() else { unreachable!() };
            let s = if v.negative { m.select(&(n..2 * n).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>()) } else { m.select(&(0..n).collect::<Vec<_>>(), &(n..2 * n).collect::<Vec<_>>()) };
            Ok(numlin::definite_sign(&s, 0.0) == Some(1))
        }
        Group::SO { p, .. } if v.theta == p - 1 => {
            let c = &v.coords;
            let k = c.len();
            // B restricted to the block: 2 c_0 c_last - 2 sum(mid^2)
            let mut b = c[0].clone() * c[k - 1].clone();
            for m in &c[1..k - 1] {
                b = b - m.clone() * m.clone();
            }
            let lead = if v.negative { &c[0] } else { &c[k - 1] };
            Ok(b.is_positive() && lead.is_positive())
        }
        _ => Ok(v.coords[0].is_positive()),
    }
}

/// `<proj_b([u, v]) | eta>`; off-diagonal entries are trace-orthogonal to the Cartan part.
pub fn bracket_pairing<T: Scalar>(spec: &GroupSpec, u: &ConeVector<T>, v: &ConeVector<T>, eta: &WeightForm) -> Result<T> {
    if u.negative || !v.negative {
        return Err(Error::Domain("bracket pairing takes u in c_theta and v in c_-theta".into()));
    }
    if !cone_contains(spec, u)? || !cone_contains(spec, v)? {
        return Err(Error::Domain("bracket pairing arguments must lie in the open cones".into()));
    }
    eta.check(spec)?;
    let br = u.matrix(spec)?.commutator(&v.matrix(spec)?)?;
    let n = spec.dim();
    let d: Vec<T> = (0..n).map(|i| br[(i, i)].clone()).collect();
    let proj = project_b_exact(spec, &d)?;
    let a: Vec<T> = proj[..spec.cartan_dim()].to_vec();
    let mut out = T::zero();
    for (&t, &c) in &eta.coeffs {
        let w = a[..spec.subspace_dim(t)].iter().fold(T::zero(), |s, x| s + x.clone());
        out = out + w * T::from_f64(c).ok_or_else(|| Error::Domain("non-finite weight".into()))?;
    }
    Ok(out)
}

/// Projection onto `b_Theta` in closed form per family, exact over any scalar.
fn project_b_exact<T: Scalar>(spec: &GroupSpec, d: &[T]) -> Result<Vec<T>> {
    let n = d.len();
    match spec.group() {
        Group::SL { .. } => {
            let mean = d.iter().fold(T::zero(), |s, x| s + x.clone()) / T::from_i64(n as i64);
            Ok(d.iter().map(|x| x.clone() - mean.clone()).collect())
        }
        Group::Sp { n: h } => {
            // Cartan part a_i = (d_i - d_{i+h}) / 2, then average over i
            let two = T::from_i64(2);
            let avg = (0..h).fold(T::zero(), |s, i| s + (d[i].clone() - d[i + h].clone()) / two.clone()) / T::from_i64(h as i64);
            Ok((0..n).map(|i| if i < h { avg.clone() } else { -avg.clone() }).collect())
        }
        Group::SO { p, .. } => {
            let two = T::from_i64(2);
            let mut out = vec![T::zero(); n];
            for i in 0..p - 1 {
                let a = (d[i].clone() - d[n - 1 - i].clone()) / two.clone();
                out[i] = a.clone();
                out[n - 1 - i] = -a;
            }
            Ok(out)
        }
    }
}

/// Random interior cone element.
pub fn sample_cone<R: Rng + ?Sized>(spec: &GroupSpec, theta: usize, negative: bool, rng: &mut R) -> Result<ConeVector<f64>> {
    let d = cone_dim(spec, theta);
    let coords = match spec.group() {
        Group::Sp { n } => {
            let a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let s = &(&a * &a.transpose()) + &Mat::identity(n).scale(&0.1);
            let mut c = Vec::new();
            for i in 0..n {
                for j in i..n {
                    c.push(s[(i, j)]);
                }
            }
            c
        }
        Group::SO { p, .. } if theta == p - 1 => {
            let mids: Vec<f64> = (0..d - 2).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let msq: f64 = mids.iter().map(|x| x * x).sum();
            let lead = (0.7 * rng.sample::<f64, _>(StandardNormal)).exp();
            let other = (msq + (0.7 * rng.sample::<f64, _>(StandardNormal)).exp()) / lead;
            let (first, last) = if negative { (lead, other) } else { (other, lead) };
            let mut c = vec![first];
            c.extend(mids);
            c.push(last);
            c
        }
        _ => vec![(0.7 * rng.sample::<f64, _>(StandardNormal)).exp()],
    };
    ConeVector::new(spec, theta, negative, coords)
}

/// Which model circle a positive circle uses for `Sp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CircleKind {
    /// Irreducible symmetric power (`SL`, `Sp`, and `SO` via `Sym^{2p}`).
    Principal,
    /// Block-diagonal `SL(2)` acting on each `(e_i, f_i)` plane (`Sp` only).
    Diagonal,
}

/// An `SL(2)`-equivariant positive circle `P^1 -> F_Theta`.
#[derive(Clone, Debug)]
pub struct PositiveCircle<T: Scalar> {
    spec: GroupSpec,
    kind: CircleKind,
    /// Columns: images of the symmetric power basis.
    embed: Mat<T>,
    /// `[embed | complement]`, invertible.
    full: Mat<T>,
    full_inv: Mat<T>,
    sym_dim: usize,
}

impl<T: Scalar> PositiveCircle<T> {
    pub fn new(spec: &GroupSpec, kind: CircleKind) -> Result<Self> {
        let n = spec.dim();
        let (embed, sym_dim) = match (spec.group(), kind) {
            (Group::SL { n }, CircleKind::Principal) => (Mat::identity(n), n),
            (Group::Sp { n: h }, CircleKind::Diagonal) => (Mat::identity(2 * h), 2),
            (Group::Sp { n: h }, CircleKind::Principal) => {
                let d = 2 * h - 1;
                let mut m = Mat::zeros(n, n);
                for i in 0..h {
                    m[(i, i)] = T::one();
                    m[(h + i, d - i)] = T::from_i64(sign_i(i) * binomial(d, i));
                }
                (m, n)
            }
            (Group::SO { p, q }, CircleKind::Principal) => {
                let pp = p - 1;
                let dim = 2 * pp + 1;
                let sigma = sign_i(pp);
                let mut m = Mat::zeros(n, dim);
                for i in 0..pp {
                    m[(i, i)] = T::one();
                    m[(n - 1 - i, dim - 1 - i)] = T::from_i64(sigma * sign_i(i) * binomial(dim - 1, i));
                }
                let mid = sigma * sign_i(pp) * binomial(dim - 1, pp);
                m[(pp, pp)] = T::one();
                m[(n - 1 - pp, pp)] = T::from_i64(mid) / T::from_i64(2);
                let _ = q;
                (m, dim)
            }
            _ => return Err(Error::Capability(format!("{kind:?} circle is not available for {spec}"))),
        };
        let full = if embed.cols() == n {
            embed.clone()
        } else {
            let q = spec.form::<T>().expect("form");
            let comp = numlin::null_space(&(&embed.transpose() * &q), if T::EXACT { 0.0 } else { 1e-12 });
            Mat::hcat(&[&embed, &comp])?
        };
        let full_inv = numlin::inverse(&full)?;
        Ok(PositiveCircle { spec: spec.clone(), kind, embed, full, full_inv, sym_dim })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn kind(&self) -> CircleKind {
        self.kind
    }

    /// Image of an `SL(2)` element.
    pub fn element(&self, g2: &Mat<T>) -> Result<Mat<T>> {
        let n = self.spec.dim();
        if self.kind == CircleKind::Diagonal {
            let Group::Sp { n: h } = self.spec.group() else { unreachable!() };
            let mut m = Mat::zeros(n, n);
            for i in 0..h {
                m[(i, i)] = g2[(0, 0)].clone();
                m[(i, h + i)] = g2[(0, 1)].clone();
                m[(h + i, i)] = g2[(1, 0)].clone();
                m[(h + i, h + i)] = g2[(1, 1)].clone();
            }
            return Ok(m);
        }
        let s = principal_embedding(self.sym_dim)?.apply(g2)?;
        let mut block = Mat::identity(n);
        for i in 0..self.sym_dim {
            for j in 0..self.sym_dim {
                block[(i, j)] = s[(i, j)].clone();
            }
        }
        Ok(&(&self.full * &block) * &self.full_inv)
    }

    /// Flag at the point `(a, b)` of `P^1`.
    pub fn flag(&self, point: [T; 2]) -> Result<Flag<T>> {
        let [a, b] = point;
        if a.is_zero() && b.is_zero() {
            return Err(Error::Domain("zero vector is not a point of P^1".into()));
        }
        let h = if a.is_zero() {
            Mat::from_rows(vec![vec![a, T::one()], vec![b, T::zero()]])?
        } else {
            Mat::from_rows(vec![vec![a, T::zero()], vec![b, T::one()]])?
        };
        let g = self.element(&h)?;
        let base = self.base_flag()?;
        let subs = base.subspaces().iter().map(|m| g.matmul(m)).collect::<Result<Vec<_>>>()?;
        Flag::new(self.spec.clone(), subs)
    }

    /// Flag at `(1, 0)`.
    pub fn base_flag(&self) -> Result<Flag<T>> {
        match self.kind {
            CircleKind::Diagonal => Ok(standard_pair::<T>(&self.spec).0),
            CircleKind::Principal => {
                let subs = self.spec.subspace_dims().iter().map(|&d| self.embed.cols_range(0, d)).collect();
                Flag::new(self.spec.clone(), subs)
            }
        }
    }

    /// Flags at affine parameters (`None` is infinity).
    pub fn flags_at(&self, ts: &[Option<T>]) -> Result<Vec<Flag<T>>> {
        ts.iter().map(|t| self.flag(flags::p1_point(t.clone()))).collect()
    }
}

/// `k` cyclically ordered parameters on `P^1` (as points `(cos, sin)` of sorted angles).
pub fn ordered_circle_points<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<[f64; 2]> {
    use std::f64::consts::PI;
    // cyclic gaps of at least pi / (8k): on symmetric power circles pairings decay like a
    // power of the gap and would fall under the transversality guard
    let min_gap = PI / (8.0 * k as f64);
    let mut ang: Vec<f64> = loop {
        let mut a: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..PI)).collect();
        a.sort_by(f64::total_cmp);
        let wrap = a[0] + PI - a[k - 1];
        if a.windows(2).all(|w| w[1] - w[0] >= min_gap) && (k < 2 || wrap >= min_gap) {
            break a;
        }
    };
    // descending angle runs in the positive direction of the affine chart t = cot
    ang.reverse();
    ang.into_iter().map(|a| [a.cos(), a.sin()]).collect()
}

/// A positive `k`-tuple: products of totally positive unipotents (SL), Loewner chains (Sp)
/// or a positive circle (SO), moved by a random group element and rotated cyclically.
pub fn sample_positive_tuple<R: Rng + ?Sized>(spec: &GroupSpec, k: usize, rng: &mut R) -> Result<Vec<Flag<f64>>> {
    if k < 3 {
        return Err(Error::Domain("positive tuples have at least 3 points".into()));
    }
    let (ep, em) = standard_pair::<f64>(spec);
    let inner = k - 2;
    let on_z = rng.random_range(1..=inner);
    let on_w = inner - on_z;
    let mut tuple: Vec<Flag<f64>> = Vec::with_capacity(k);
    match spec.group() {
        Group::SL { n } => {
            let mut zs = Vec::new();
            let mut acc = Mat::identity(n);
            for _ in 0..on_z {
                acc = &acc * &sample_tp_unipotent(n, rng).1;
                zs.push(act(&acc, &em)?);
            }
            let mut ws = Vec::new();
            let mut acc = Mat::identity(n);
            for _ in 0..on_w {
                acc = &sample_tp_unipotent(n, rng).1 * &acc;
                ws.push(act(&numlin::inverse(&acc)?, &em)?);
            }
            tuple.push(ep);
            tuple.extend(zs.into_iter().rev());
            tuple.push(em);
            tuple.extend(ws);
        }
        Group::Sp { n } => {
            let graph = |s: &Mat<f64>| -> Result<Flag<f64>> {
                let m = Mat::vcat(&[s, &Mat::identity(n)])?;
                Flag::new(spec.clone(), vec![m])
            };
            let pd = |rng: &mut R| {
                let a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                &(&a * &a.transpose()) + &Mat::identity(n).scale(&0.05)
            };
            let mut zs = Vec::new();
            let mut acc = Mat::zeros(n, n);
            for _ in 0..on_z {
                acc = &acc + &pd(rng);
                zs.push(graph(&acc)?);
            }
            let mut ws = Vec::new();
            let mut acc = Mat::zeros(n, n);
            for _ in 0..on_w {
                acc = &acc + &pd(rng);
                ws.push(graph(&(-&acc))?);
            }
            tuple.push(ep);
            tuple.extend(zs.into_iter().rev());
            tuple.push(em);
            tuple.extend(ws);
        }
        Group::SO { .. } => {
            let c = PositiveCircle::<f64>::new(spec, CircleKind::Principal)?;
            for pt in ordered_circle_points(k, rng) {
                tuple.push(c.flag(pt)?);
            }
        }
    }
    let g = spec.random_element(rng, 0.5);
    let mut out = tuple.iter().map(|f| act(&g, f)).collect::<Result<Vec<_>>>()?;
    let r = rng.random_range(0..k);
    out.rotate_left(r);
    Ok(out)
}

/// A loxodromic `g` and a flag `x` with `(g+, g-, x, g x)` positive.
#[derive(Clone, Debug)]
pub struct LoxodromicInstance {
    pub g: Mat<f64>,
    /// Cartan coordinates of `g`, known by construction.
    pub cartan: Vec<f64>,
    pub x: Flag<f64>,
}

/// Conjugated dominant torus element with `x` in a diamond of its fixed flags (SL, Sp), or
/// the image of a hyperbolic `SL(2)` element on the principal circle (SO).
pub fn sample_loxodromic_instance<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> Result<LoxodromicInstance> {
    let (_, em) = standard_pair::<f64>(spec);
    for _ in 0..100 {
        let (t, x0, a) = match spec.group() {
            Group::SO { .. } => {
                let c = PositiveCircle::<f64>::new(spec, CircleKind::Principal)?;
                let l: f64 = rng.random_range(1.2..3.0);
                let t = c.element(&Mat::diag(&[l, 1.0 / l]))?;
                let a = spec.loxodromic_coords(&t, 1e-10)?;
                (t, c.flag([-rng.random_range(0.2..5.0), 1.0])?, a)
            }
            group => {
                let x0 = match group {
                    Group::SL { n } => {
                        let u = sample_tp_unipotent(n, rng).1;
                        let u = if rng.random_bool(0.5) { u } else { numlin::inverse(&u)? };
                        act(&u, &em)?
                    }
                    Group::Sp { n } => {
                        let m = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                        let s = &(&m * &m.transpose()) + &Mat::identity(n).scale(&0.05);
                        let s = if rng.random_bool(0.5) { s } else { -&s };
                        Flag::new(spec.clone(), vec![Mat::vcat(&[&s, &Mat::identity(n)])?])?
                    }
                    Group::SO { .. } => unreachable!(),
                };
                // stronger contraction pushes g x deeper into the diamond
                let base = spec.random_dominant(rng);
                let mut found = None;
                for k in [1.0, 1.5, 2.0, 3.0] {
                    let a: Vec<f64> = base.iter().map(|v| v * k).collect();
                    let t = spec.torus_element(&a)?;
                    let (plus, minus) = standard_pair::<f64>(spec);
                    let Ok(tx) = act(&t, &x0) else { break };
                    match quadruple_positive(&plus, &minus, &x0, &tx, 1e-10) {
                        Ok(true) => {
                            found = Some((t, a));
                            break;
                        }
                        Ok(false) => {}
                        // contracted too far to certify
                        Err(Error::NotTransverse(_) | Error::InvalidFlag(_)) => break,
                        Err(e) => return Err(e),
                    }
                }
                let Some((t, a)) = found else { continue };
                (t, x0, a)
            }
        };
        let h = spec.random_element(rng, 0.5);
        let g = &(&h * &t) * &numlin::inverse(&h)?;
        return Ok(LoxodromicInstance { g, cartan: a, x: act(&h, &x0)? });
    }
    Err(Error::Exhausted(100))
}

/// Random non-identity permutation of a positive quadruple that breaks the cyclic order
/// (a transposition of two neighbours).
pub fn swap_middle<T: Scalar>(q: &[Flag<T>; 4]) -> [Flag<T>; 4] {
    [q[0].clone(), q[2].clone(), q[1].clone(), q[3].clone()]
}

/// Shuffles a tuple (helper for negative controls).
pub fn shuffled<T: Scalar, R: Rng + ?Sized>(flags: &[Flag<T>], rng: &mut R) -> Vec<Flag<T>> {
    let mut v = flags.to_vec();
    v.shuffle(rng);
    v
}

/// Exact positive quadruple from rational totally positive data (SL) or rational
/// Loewner chains (Sp), used for exact/float parity.
pub fn rational_quadruple<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> Result<[Flag<Rational>; 4]> {
    let (ep, em) = standard_pair::<Rational>(spec);
    let small = |rng: &mut R| <Rational as Scalar>::from_ratio(rng.random_range(1..=6), rng.random_range(1..=4));
    let (z, w, g) = match spec.group() {
        Group::SL { n } => {
            let word = longest_word(n);
            let p1: Vec<Rational> = word.iter().map(|_| small(rng)).collect();
            let p2: Vec<Rational> = word.iter().map(|_| small(rng)).collect();
            let u = tp_unipotent(n, &word, &p1)?;
            let v = numlin::inverse(&tp_unipotent(n, &word, &p2)?)?;
            (act(&u, &em)?, act(&v, &em)?, random_rational_element(spec, rng)?)
        }
        Group::Sp { n } => {
            let graph = |s: Mat<Rational>| -> Result<Flag<Rational>> { Flag::new(spec.clone(), vec![Mat::vcat(&[&s, &Mat::identity(n)])?]) };
            let pd = |rng: &mut R| -> Mat<Rational> {
                let a = Mat::from_fn(n, n, |_, _| <Rational as Scalar>::from_i64(rng.random_range(-3..=3)));
                &(&a * &a.transpose()) + &Mat::identity(n)
            };
            (graph(pd(rng))?, graph(-&pd(rng))?, random_rational_element(spec, rng)?)
        }
        Group::SO { .. } => return Err(Error::Capability("no exact SO checker".into())),
    };
    Ok([act(&g, &ep)?, act(&g, &z)?, act(&g, &em)?, act(&g, &w)?])
}

/// Product of a few rational root-group elements: an exact group element.
pub fn random_rational_element<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> Result<Mat<Rational>> {
    let n = spec.dim();
    let mut g = Mat::<Rational>::identity(n);
    let gens: Vec<Mat<Rational>> = match spec.group() {
        Group::SL { .. } => (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| Mat::unit(n, i, j)))
            .collect(),
        Group::Sp { n: h } => {
            let mut v = Vec::new();
            for i in 0..h {
                for j in 0..h {
                    // symmetric upper and lower blocks
                    let mut a = Mat::zeros(n, n);
                    a[(i, h + j)] = Rational::one();
                    a[(j, h + i)] = Rational::one();
                    v.push(a.clone());
                    v.push(a.transpose());
                }
            }
            v
        }
        Group::SO { .. } => return Err(Error::Capability("no exact SO sampler".into())),
    };
    for _ in 0..2 * n {
        let x = &gens[rng.random_range(0..gens.len())];
        let t = <Rational as Scalar>::from_ratio(rng.random_range(-3..=3), rng.random_range(1..=3));
        let e = numlin::unipotent_exp(&x.scale(&t))?;
        g = &g * &e;
    }
    spec.check_element(&g, 0.0)?;
    Ok(g)
}

/// Pattern minors of `u` as JSON-friendly records (for certificates).
pub fn minor_table<T: Scalar>(u: &Mat<T>) -> Result<BTreeMap<String, f64>> {
    let pat = minor_pattern(u.rows())?;
    let ms = pattern_minors(u)?;
    Ok(pat.iter().zip(ms).map(|((r, c), m)| (format!("{r:?}x{c:?}"), m.to_f64())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{p1_point, veronese_flag};
    use crate::scalar::rat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ver(n: usize, t: Option<i64>) -> Flag<Rational> {
        veronese_flag(n, p1_point(t.map(|v| rat(v, 1)))).unwrap()
    }

    #[test]
    fn tp_examples() {
        let u: Mat<Rational> = tp_unipotent(2, &[1], &[rat(1, 1)]).unwrap();
        assert_eq!(u, Mat::from_i64(&[&[1, 1], &[0, 1]]));
        let u3: Mat<Rational> = tp_unipotent(3, &longest_word(3), &[rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap();
        assert!(is_totally_positive(&u3, 0.0).unwrap());
        assert!(!is_totally_positive(&numlin::inverse(&u3).unwrap(), 0.0).unwrap());
        assert!(is_totally_positive(&pascal(4), 0.0).unwrap());
        assert!(!is_totally_positive(&Mat::<Rational>::identity(3), 0.0).unwrap());
        let e12: Mat<Rational> = numlin::unipotent_exp(&Mat::unit(3, 0, 1)).unwrap();
        assert!(!is_totally_positive(&e12, 0.0).unwrap());
        assert!(is_totally_positive(&Mat::<f64>::identity(6), 0.0).is_err());
        assert!(is_totally_positive(&Mat::<Rational>::from_i64(&[&[1, 0], &[1, 1]]), 0.0).is_err());
    }

    #[test]
    fn pattern_sizes() {
        // independent count: index pairs with rows <= cols componentwise
        for n in 2..=5 {
            let mut count = 0;
            for k in 1..=n {
                for r in subsets(n, k) {
                    for c in subsets(n, k) {
                        if r.iter().zip(&c).all(|(a, b)| a <= b) {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(minor_pattern(n).unwrap().len(), count);
        }
        assert_eq!(minor_pattern(3).unwrap().len(), 13);
    }

    #[test]
    fn veronese_triples_and_quadruples() {
        for n in [3, 4] {
            assert!(triple_positive(&ver(n, None), &ver(n, Some(1)), &ver(n, Some(0)), 0.0).unwrap());
            assert!(triple_positive(&ver(n, None), &ver(n, Some(0)), &ver(n, Some(1)), 0.0).unwrap());
            let q = [ver(n, None), ver(n, Some(1)), ver(n, Some(0)), ver(n, Some(-1))];
            assert!(quadruple_positive(&q[0], &q[1], &q[2], &q[3], 0.0).unwrap());
            let s = swap_middle(&q);
            assert!(!quadruple_positive(&s[0], &s[1], &s[2], &s[3], 0.0).unwrap());
            // rotation and double transposition
            assert!(quadruple_positive(&q[1], &q[2], &q[3], &q[0], 0.0).unwrap());
            assert!(quadruple_positive(&q[1], &q[0], &q[3], &q[2], 0.0).unwrap());
        }
    }

    #[test]
    fn golden_orientation() {
        // (inf, 1, 0, -1): u is the principal image of [[1,1],[0,1]], normalized to exp(E12 + E23)
        let q = [ver(3, None), ver(3, Some(1)), ver(3, Some(0)), ver(3, Some(-1))];
        let us = sl_data(&q[0], &q[2], &[&q[1], &q[3]], 0.0).unwrap();
        let e = Mat::from_rows(vec![vec![rat(1, 1), rat(1, 1), rat(1, 2)], vec![rat(0, 1), rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(0, 1), rat(1, 1)]]).unwrap();
        assert_eq!(us[0], e);
        assert_eq!(us[1], numlin::inverse(&e).unwrap());
        let c = quadruple_certificate(&q[0], &q[1], &q[2], &q[3], 0.0).unwrap();
        assert_eq!(c.sign_class, Some(vec![1, 1, 1]));
    }

    #[test]
    fn non_transverse_errors() {
        let x = ver(3, None);
        assert!(matches!(triple_positive(&x, &x, &ver(3, Some(0)), 0.0), Err(Error::NotTransverse(_))));
    }

    #[test]
    fn sp_circles_are_positive() {
        for (h, kind) in [(2, CircleKind::Diagonal), (3, CircleKind::Diagonal), (2, CircleKind::Principal), (3, CircleKind::Principal), (4, CircleKind::Principal)] {
            let spec = GroupSpec::sp(h).unwrap();
            let c = PositiveCircle::<Rational>::new(&spec, kind).unwrap();
            let g2: Mat<Rational> = Mat::from_i64(&[&[2, 1], &[1, 1]]);
            spec.check_element(&c.element(&g2).unwrap(), 0.0).unwrap();
            let fl = c.flags_at(&[None, Some(rat(1, 1)), Some(rat(0, 1)), Some(rat(-1, 1))]).unwrap();
            assert!(tuple_positive(&fl, 0.0).unwrap(), "{kind:?}");
            let s = [fl[0].clone(), fl[2].clone(), fl[1].clone(), fl[3].clone()];
            assert!(!tuple_positive(&s, 0.0).unwrap());
        }
    }

    #[test]
    fn so_circle_in_group() {
        for (p, q) in [(3, 4), (3, 5), (4, 5), (2, 4)] {
            let spec = GroupSpec::so(p, q).unwrap();
            let c = PositiveCircle::<Rational>::new(&spec, CircleKind::Principal).unwrap();
            let g2: Mat<Rational> = Mat::from_i64(&[&[2, 1], &[1, 1]]);
            spec.check_element(&c.element(&g2).unwrap(), 0.0).unwrap();
            let f = c.flag([rat(1, 1), rat(2, 1)]).unwrap();
            let f2 = c.flag([rat(-1, 1), rat(3, 1)]).unwrap();
            assert!(flags::transverse(&f, &f2, 0.0).unwrap());
        }
    }

    #[test]
    fn so_checker_is_capability_error() {
        let spec = GroupSpec::so(3, 4).unwrap();
        let (p, m) = standard_pair::<f64>(&spec);
        assert!(matches!(triple_positive(&p, &m, &p, 1e-10), Err(Error::Capability(_))));
    }

    #[test]
    fn sampler_checker_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for spec in [GroupSpec::sl(3).unwrap(), GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap()] {
            for k in [3, 4, 6] {
                for _ in 0..10 {
                    let t = sample_positive_tuple(&spec, k, &mut rng).unwrap();
                    assert!(tuple_positive(&t, 1e-10).unwrap(), "{spec} {k}");
                }
            }
        }
    }

    #[test]
    fn cones_and_brackets() {
        let spec = GroupSpec::sl(3).unwrap();
        let eta = WeightForm::new([(1, 2.0), (2, 1.0)]).unwrap();
        let u = ConeVector::new(&spec, 1, false, vec![rat(3, 1)]).unwrap();
        let v = ConeVector::new(&spec, 1, true, vec![rat(5, 2)]).unwrap();
        let eta_r = eta.clone();
        assert_eq!(bracket_pairing(&spec, &u, &v, &eta_r).unwrap(), rat(15, 1));
        let w1 = WeightForm::fundamental(1);
        assert_eq!(bracket_pairing(&spec, &u, &v, &w1).unwrap(), rat(15, 2));
        let bad = ConeVector::new(&spec, 1, false, vec![rat(-1, 1)]).unwrap();
        assert!(bracket_pairing(&spec, &bad, &v, &w1).is_err());

        let so = GroupSpec::so(3, 4).unwrap();
        let tr = sl2_triple::<f64>(&so, 2).unwrap();
        let xp = ConeVector::new(&so, 2, false, vec![0.0, 0.0, 1.0]).unwrap();
        assert!(xp.matrix(&so).unwrap().approx_eq(&tr.x_plus, 0.0));
        let xm = ConeVector::new(&so, 2, true, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(xm.matrix(&so).unwrap().approx_eq(&tr.x_minus, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = sample_cone(&so, 2, false, &mut rng).unwrap();
            let v = sample_cone(&so, 2, true, &mut rng).unwrap();
            so.check_algebra(&u.matrix(&so).unwrap(), 1e-12).unwrap();
            assert!(bracket_pairing(&so, &u, &v, &WeightForm::fundamental(2)).unwrap() > 0.0);
        }
    }

    #[test]
    fn semi_positive_examples() {
        let q = [ver(3, None), ver(3, Some(1)), ver(3, Some(0)), ver(3, Some(-1))];
        // (X, Y, x, y) = positive quadruple read cyclically
        assert!(semi_positive(&q[0], &q[1], &q[2], &q[3], 0.0).unwrap());
        let s = swap_middle(&q);
        assert!(!semi_positive(&s[0], &s[1], &s[2], &s[3], 0.0).unwrap());
    }

    #[test]
    fn loxodromic_instances_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for spec in [GroupSpec::sl(3).unwrap(), GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap(), GroupSpec::so(3, 4).unwrap()] {
            for _ in 0..10 {
                let inst = sample_loxodromic_instance(&spec, &mut rng).unwrap_or_else(|e| panic!("{spec} {e}"));
                let a = spec.loxodromic_coords(&inst.g, 1e-10).unwrap();
                for (x, y) in a.iter().zip(&inst.cartan) {
                    assert!((x - y).abs() < 1e-9, "{spec} {a:?} {:?}", inst.cartan);
                }
                if spec.family() != crate::lie::Family::SO {
                    let (p, m) = flags::eigenflag(&spec, &inst.g, 1e-10).unwrap();
                    let gx = act(&inst.g, &inst.x).unwrap();
                    assert!(quadruple_positive(&p, &m, &inst.x, &gx, 1e-10).unwrap());
                }
            }
        }
    }
}
