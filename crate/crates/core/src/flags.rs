//! Flags in the defining representation: transversality, action, standardization,
//! eigenflags and Veronese flags.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lie::{principal_embedding, Group, GroupSpec};
use crate::numlin::{self, Mat};
use crate::scalar::Scalar;

/// Tolerance used to validate float flags (nesting, isotropy, rank).
pub const FLAG_TOL: f64 = 1e-8;
/// Tolerance used to check group membership of float matrices.
pub const FORM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Flag<T: Scalar> {
    spec: GroupSpec,
    subspaces: Vec<Mat<T>>,
}

impl<T: Scalar> Flag<T> {
    pub fn new(spec: GroupSpec, subspaces: Vec<Mat<T>>) -> Result<Self> {
        let f = Flag { spec, subspaces };
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn new_unchecked(spec: GroupSpec, subspaces: Vec<Mat<T>>) -> Self {
        Flag { spec, subspaces }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn subspaces(&self) -> &[Mat<T>] {
        &self.subspaces
    }

    /// Basis of the subspace indexed by simple root `theta`.
    pub fn subspace(&self, theta: usize) -> Result<&Mat<T>> {
        Ok(&self.subspaces[self.spec.flag_slot(theta)?])
    }

    /// Basis of the `d`-dimensional member, if present.
    pub fn of_dim(&self, d: usize) -> Option<&Mat<T>> {
        self.subspaces.iter().find(|m| m.cols() == d)
    }

    pub fn to_f64(&self) -> Flag<f64> {
        Flag { spec: self.spec.clone(), subspaces: self.subspaces.iter().map(|m| m.to_f64()).collect() }
    }

    fn validate(&self) -> Result<()> {
        let dims = self.spec.subspace_dims();
        let n = self.spec.dim();
        if self.subspaces.len() != dims.len() {
            return Err(Error::InvalidFlag(format!("{} subspaces, expected {}", self.subspaces.len(), dims.len())));
        }
        for (m, &d) in self.subspaces.iter().zip(&dims) {
            if m.rows() != n || m.cols() != d {
                return Err(Error::InvalidFlag(format!("basis {}x{}, expected {n}x{d}", m.rows(), m.cols())));
            }
            if numlin::rank(m, FLAG_TOL) != d {
                return Err(Error::InvalidFlag(format!("{d}-dimensional basis is rank deficient")));
            }
        }
        for w in self.subspaces.windows(2) {
            let joint = Mat::hcat(&[&w[1], &w[0]])?;
            if span_rank(&joint) != w[1].cols() {
                return Err(Error::InvalidFlag("subspaces are not nested".into()));
            }
        }
        if let Some(f) = self.spec.form::<T>() {
            for m in &self.subspaces {
                let bad = if T::EXACT {
                    !(&(&m.transpose() * &f) * m).is_zero_within(0.0)
                } else {
                    let q = numlin::orthonormalize(&m.to_f64(), 1e-12);
                    (&(&q.transpose() * &f.to_f64()) * &q).max_abs() > FLAG_TOL
                };
                if bad {
                    return Err(Error::InvalidFlag("subspace is not isotropic".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spec": serde_json::to_value(&self.spec).expect("spec serializes"),
            "subspaces": self.subspaces.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let spec: GroupSpec = serde_json::from_value(v.get("spec").cloned().ok_or_else(|| Error::Parse("flag without spec".into()))?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        let subs = v
            .get("subspaces")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("flag without subspaces".into()))?
            .iter()
            .map(Mat::from_json)
            .collect::<Result<Vec<_>>>()?;
        Flag::new(spec, subs)
    }
}

fn span_rank<T: Scalar>(m: &Mat<T>) -> usize {
    if T::EXACT {
        numlin::rank(m, 0.0)
    } else {
        // columns normalized so the threshold is scale free
        let f = m.to_f64();
        let cols: Vec<Vec<f64>> = (0..f.cols())
            .map(|j| {
                let c = f.col(j);
                let n = numlin::norm(&c).max(f64::MIN_POSITIVE);
                c.into_iter().map(|x| x / n).collect()
            })
            .collect();
        numlin::orthonormalize(&Mat::from_cols(&cols).expect("columns"), FLAG_TOL).cols()
    }
}

/// Coordinate flags `E+` (spans of leading basis vectors) and `E-` (trailing ones).
pub fn standard_pair<T: Scalar>(spec: &GroupSpec) -> (Flag<T>, Flag<T>) {
    let n = spec.dim();
    let dims = spec.subspace_dims();
    let plus = dims.iter().map(|&d| Mat::from_fn(n, d, |i, j| if i == j { T::one() } else { T::zero() })).collect();
    let minus = match spec.group() {
        Group::Sp { n: h } => dims.iter().map(|&d| Mat::from_fn(n, d, |i, j| if i == j + h { T::one() } else { T::zero() })).collect(),
        _ => dims.iter().map(|&d| Mat::from_fn(n, d, |i, j| if i == n - 1 - j { T::one() } else { T::zero() })).collect(),
    };
    (Flag::new_unchecked(spec.clone(), plus), Flag::new_unchecked(spec.clone(), minus))
}

fn same_spec<T: Scalar>(x: &Flag<T>, y: &Flag<T>) -> Result<()> {
    if x.spec != y.spec {
        return Err(Error::Domain(format!("flags of {} and {}", x.spec, y.spec)));
    }
    Ok(())
}

/// Determinant pairing `D_theta(x, X)` between the theta-members of two flags.
/// SL: `det(x_k | X_{n-k})`; Sp: `det(L_1 | L_2)`; SO: `det(x_k^T Q X_k)`.
pub fn pairing<T: Scalar>(theta: usize, x: &Flag<T>, xx: &Flag<T>) -> Result<T> {
    same_spec(x, xx)?;
    let spec = &x.spec;
    match spec.group() {
        Group::SL { n } => numlin::concat_det(x.subspace(theta)?, xx.subspace(n - theta)?),
        Group::Sp { .. } => numlin::concat_det(x.subspace(theta)?, xx.subspace(theta)?),
        Group::SO { .. } => {
            let q = spec.form::<T>().expect("SO form");
            let a = x.subspace(theta)?;
            numlin::det(&(&(&a.transpose() * &q) * xx.subspace(theta)?))
        }
    }
}

/// Pairing evaluated on orthonormalized bases: a scale-free transversality margin.
pub fn normalized_pairing(theta: usize, x: &Flag<f64>, xx: &Flag<f64>) -> Result<f64> {
    let orth = |f: &Flag<f64>| Flag {
        spec: f.spec.clone(),
        subspaces: f.subspaces.iter().map(|m| numlin::orthonormalize(m, 0.0)).collect(),
    };
    pairing(theta, &orth(x), &orth(xx))
}

/// Smallest normalized pairing over theta.
pub fn transversality_margin<T: Scalar>(x: &Flag<T>, y: &Flag<T>) -> Result<f64> {
    same_spec(x, y)?;
    let (xf, yf) = (x.to_f64(), y.to_f64());
    let mut m = f64::INFINITY;
    for &t in x.spec.theta() {
        m = m.min(normalized_pairing(t, &xf, &yf)?.abs());
    }
    Ok(m)
}

/// Transversality; exact scalars use exact zero tests, floats the normalized margin.
pub fn transverse<T: Scalar>(x: &Flag<T>, y: &Flag<T>, tol: f64) -> Result<bool> {
    same_spec(x, y)?;
    if T::EXACT {
        for &t in x.spec.theta() {
            if pairing(t, x, y)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    } else {
        Ok(transversality_margin(x, y)? > tol)
    }
}

pub fn act<T: Scalar>(g: &Mat<T>, x: &Flag<T>) -> Result<Flag<T>> {
    x.spec.check_element(g, FORM_TOL)?;
    let subs = x.subspaces.iter().map(|m| g.matmul(m)).collect::<Result<Vec<_>>>()?;
    Flag::new(x.spec.clone(), subs)
}

/// Equality of flags as nested subspaces.
pub fn same_flag<T: Scalar>(x: &Flag<T>, y: &Flag<T>, tol: f64) -> bool {
    if x.spec != y.spec {
        return false;
    }
    x.subspaces.iter().zip(&y.subspaces).all(|(a, b)| subspace_distance(a, b) <= tol)
}

/// Distance between column spans (zero in exact mode iff equal).
pub fn subspace_distance<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    if a.cols() != b.cols() {
        return f64::INFINITY;
    }
    if T::EXACT {
        let r = numlin::rank(&Mat::hcat(&[a, b]).expect("same rows"), 0.0);
        return if r == a.cols() { 0.0 } else { 1.0 };
    }
    let qa = numlin::orthonormalize(&a.to_f64(), 0.0);
    let qb = numlin::orthonormalize(&b.to_f64(), 0.0);
    let proj = &qb * &(&qb.transpose() * &qa);
    (&qa - &proj).frobenius()
}

/// Group element `g` with `act(g, x) = E+` and `act(g, y) = E-`.
pub fn standardize<T: Scalar>(x: &Flag<T>, y: &Flag<T>, tol: f64) -> Result<Mat<T>> {
    same_spec(x, y)?;
    if !transverse(x, y, tol)? {
        return Err(Error::NotTransverse("cannot standardize a non-transverse pair".into()));
    }
    let m = match x.spec.group() {
        Group::SL { n } => standardize_sl(x, y, n)?,
        Group::Sp { n } => {
            let a = x.subspace(n)?;
            let b = y.subspace(n)?;
            let j = x.spec.form::<T>().expect("symplectic form");
            let pairing = &(&a.transpose() * &j) * b;
            let b2 = b * &numlin::inverse(&pairing)?;
            Mat::hcat(&[a, &b2])?
        }
        Group::SO { p, .. } => standardize_so(x, y, p)?,
    };
    numlin::inverse(&m)
}

fn basis<T: Scalar>(f: &Flag<T>, d: usize, n: usize) -> Mat<T> {
    if d == n {
        Mat::identity(n)
    } else {
        let m = f.of_dim(d).expect("flag member").clone();
        if T::EXACT {
            m
        } else {
            // orthonormal bases keep the null space computation well scaled
            numlin::orthonormalize(&m.to_f64(), 0.0).map(|v| T::from_f64(*v).expect("finite"))
        }
    }
}

fn standardize_sl<T: Scalar>(x: &Flag<T>, y: &Flag<T>, n: usize) -> Result<Mat<T>> {
    let tol = if T::EXACT { 0.0 } else { 1e-9 };
    let mut cols = Vec::with_capacity(n);
    for i in 1..=n {
        let a = basis(x, i, n);
        let b = basis(y, n + 1 - i, n);
        let k = numlin::null_space(&Mat::hcat(&[&a, &(-&b)])?, tol);
        if k.cols() != 1 {
            return Err(Error::NotTransverse(format!("intersection of dimension {} at step {i}", k.cols())));
        }
        let c: Vec<T> = k.col(0)[..i].to_vec();
        cols.push(a.mul_vec(&c)?);
    }
    let mut m = Mat::from_cols(&cols)?;
    let d = numlin::det(&m)?;
    let first: Vec<T> = m.col(0).into_iter().map(|v| v / d.clone()).collect();
    m.set_col(0, &first);
    Ok(m)
}

fn standardize_so<T: Scalar>(x: &Flag<T>, y: &Flag<T>, p: usize) -> Result<Mat<T>> {
    let spec = &x.spec;
    let n = spec.dim();
    let m = p - 1;
    let q = spec.form::<T>().expect("orthogonal form");
    let a = x.of_dim(m).expect("top member").clone();
    let b = y.of_dim(m).expect("top member").clone();
    let g = &(&a.transpose() * &q) * &b;
    let (l, u) = lu_nopivot(&g)?;
    let a2 = &a * &numlin::inverse(&l.transpose())?;
    let b2 = &b * &numlin::inverse(&u)?;
    let ab = Mat::hcat(&[&a2, &b2])?;
    let w = numlin::null_space(&(&ab.transpose() * &q), if T::EXACT { 0.0 } else { 1e-10 });
    let (c0, c1, mids) = split_complement(&w, &q)?;
    let two = T::from_i64(2);
    let u_plus = &c0 + &c1;
    let u_minus = (&c0 - &c1).scale(&(T::one() / two));
    let mut cols: Vec<Vec<T>> = vec![Vec::new(); n];
    for i in 0..m {
        cols[i] = a2.col(i);
        cols[n - 1 - i] = b2.col(i);
    }
    cols[m] = u_plus.col(0);
    cols[n - 1 - m] = u_minus.col(0);
    for (k, v) in mids.into_iter().enumerate() {
        cols[m + 1 + k] = v;
    }
    Mat::from_cols(&cols)
}

/// `g = L U` with `L` unit lower triangular.
fn lu_nopivot<T: Scalar>(g: &Mat<T>) -> Result<(Mat<T>, Mat<T>)> {
    let n = g.rows();
    let mut l = Mat::identity(n);
    let mut u = g.clone();
    for k in 0..n {
        if u[(k, k)].is_zero() {
            return Err(Error::NotTransverse("degenerate Gram minor".into()));
        }
        for i in k + 1..n {
            let f = u[(i, k)].clone() / u[(k, k)].clone();
            l[(i, k)] = f.clone();
            for j in k..n {
                let v = u[(i, j)].clone() - f.clone() * u[(k, j)].clone();
                u[(i, j)] = v;
            }
        }
    }
    Ok((l, u))
}

/// Splits the form on the complement `w` into a unit positive vector, a unit negative
/// vector orthogonal to it, and the remaining vectors scaled to square `-2`.
fn split_complement<T: Scalar>(w: &Mat<T>, q: &Mat<T>) -> Result<(Mat<T>, Mat<T>, Vec<Vec<T>>)> {
    let form = |u: &[T], v: &[T]| -> T {
        let qv = q.mul_vec(v).expect("dims");
        u.iter().zip(&qv).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    };
    let mut rest: Vec<Vec<T>> = (0..w.cols()).map(|j| w.col(j)).collect();
    let mut done: Vec<(Vec<T>, T)> = Vec::new();
    while !rest.is_empty() {
        let pick = rest
            .iter()
            .enumerate()
            .map(|(i, v)| (i, form(v, v).abs_f64()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pick.1 <= 1e-12 && !T::EXACT || (T::EXACT && pick.1 == 0.0) {
            // all remaining vectors isotropic: combine two with nonzero pairing
            if rest.len() < 2 {
                return Err(Error::Domain("degenerate complement".into()));
            }
            let v: Vec<T> = rest[0].iter().zip(&rest[1]).map(|(a, b)| a.clone() + b.clone()).collect();
            rest[0] = v;
            continue;
        }
        let v = rest.swap_remove(pick.0);
        let s = form(&v, &v);
        for r in rest.iter_mut() {
            let c = form(r, &v) / s.clone();
            for (ri, vi) in r.iter_mut().zip(&v) {
                *ri = ri.clone() - c.clone() * vi.clone();
            }
        }
        done.push((v, s));
    }
    let pos = done.iter().position(|(_, s)| s.is_positive()).ok_or_else(|| Error::Domain("complement has no positive vector".into()))?;
    let (p, ps) = done.remove(pos);
    let neg = done.iter().position(|(_, s)| s.is_negative()).ok_or_else(|| Error::Domain("complement has no negative vector".into()))?;
    let (nv, ns) = done.remove(neg);
    let scaled = |v: Vec<T>, s: T, target: T| -> Result<Vec<T>> {
        let f = (target / s).sqrt_opt().ok_or_else(|| {
            Error::Capability("standardizing this SO pair needs square roots outside the exact field".into())
        })?;
        Ok(v.into_iter().map(|x| x * f.clone()).collect())
    };
    let c0 = scaled(p, ps, T::one())?;
    let c1 = scaled(nv, ns, -T::one())?;
    let mids = done.into_iter().map(|(v, s)| scaled(v, s, T::from_i64(-2))).collect::<Result<Vec<_>>>()?;
    Ok((Mat::from_cols(&[c0])?, Mat::from_cols(&[c1])?, mids))
}

/// Attracting and repelling flags of a theta-loxodromic element.
pub fn eigenflag(spec: &GroupSpec, g: &Mat<f64>, tol: f64) -> Result<(Flag<f64>, Flag<f64>)> {
    spec.loxodromic_coords(g, tol)?;
    let plus = attracting(spec, g)?;
    let gi = numlin::inverse(g)?;
    let minus = attracting(spec, &gi)?;
    Ok((plus, minus))
}

fn attracting(spec: &GroupSpec, g: &Mat<f64>) -> Result<Flag<f64>> {
    let n = spec.dim();
    let mut ev = numlin::eigenvalues(g)?;
    ev.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)));
    let scale = g.max_abs().max(1.0);
    let gs = g.scale(&(1.0 / scale));
    let mut subs: Vec<Mat<f64>> = Vec::new();
    for d in spec.subspace_dims() {
        // annihilate the n - d smallest eigenvalues
        let mut p = Mat::identity(n);
        let mut k = d;
        while k < n {
            let (re, im) = (ev[k].0 / scale, ev[k].1 / scale);
            if im != 0.0 && k + 1 < n && (ev[k + 1].1 + ev[k].1).abs() <= 1e-9 * ev[k].1.abs() {
                let q = &(&(&gs * &gs) - &gs.scale(&(2.0 * re))) + &Mat::identity(n).scale(&(re * re + im * im));
                p = &p * &q;
                k += 2;
            } else {
                p = &p * &(&gs - &Mat::identity(n).scale(&re));
                k += 1;
            }
            let m = p.max_abs();
            if m > 0.0 {
                p = p.scale(&(1.0 / m));
            }
        }
        let mut range = numlin::pivoted_range(&p, d);
        if range.cols() != d {
            return Err(Error::numeric("invariant subspace lost rank", d as f64));
        }
        for _ in 0..4 {
            range = numlin::orthonormalize(&(&gs * &range), 0.0);
        }
        let basis = match subs.last() {
            None => range,
            Some(prev) => {
                let resid = &range - &(prev * &(&prev.transpose() * &range));
                let extra = numlin::pivoted_range(&resid, d - prev.cols());
                Mat::hcat(&[prev, &extra])?
            }
        };
        subs.push(basis);
    }
    let flag = Flag::new(spec.clone(), subs)?;
    let moved = act(g, &flag)?;
    let defect = flag.subspaces.iter().zip(&moved.subspaces).map(|(a, b)| subspace_distance(a, b)).fold(0.0, f64::max);
    if defect > 1e-6 {
        return Err(Error::numeric("eigenflag is not fixed", defect));
    }
    Ok(flag)
}

/// Osculating flag of the Veronese curve at the point `(a, b)` of `P^1`.
pub fn veronese_flag<T: Scalar>(n: usize, point: [T; 2]) -> Result<Flag<T>> {
    let spec = GroupSpec::sl(n)?;
    let [a, b] = point;
    if a.is_zero() && b.is_zero() {
        return Err(Error::Domain("zero vector is not a point of P^1".into()));
    }
    let h = if a.is_zero() {
        Mat::from_rows(vec![vec![a, T::one()], vec![b, T::zero()]])?
    } else {
        Mat::from_rows(vec![vec![a, T::zero()], vec![b, T::one()]])?
    };
    let iota = principal_embedding(n)?.apply(&h)?;
    let (plus, _) = standard_pair::<T>(&spec);
    act(&iota, &plus)
}

/// Point `t` of the affine chart `t -> (t, 1)`; `None` is the point at infinity `(1, 0)`.
pub fn p1_point<T: Scalar>(t: Option<T>) -> [T; 2] {
    match t {
        Some(t) => [t, T::one()],
        None => [T::one(), T::zero()],
    }
}
