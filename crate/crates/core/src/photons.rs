//! Photons, photon projection, photon cross-ratio and the invariant photon of a loxodromic element.

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::crossratio::{form_cr, Quadruple};
use crate::error::{Error, Result};
use crate::flags::{self, act, eigenflag, normalized_pairing, standard_pair, standardize, Flag};
use crate::lie::{sl2_triple, Group, GroupSpec, Sl2Triple, WeightForm};
use crate::numlin::{self, Mat};

/// Margin below which a photon point counts as non-transverse to a flag.
pub const PROJECTION_TOL: f64 = 1e-7;

/// Orbit of an embedded `SL(2)` through a flag; parameters `t` mean `exp(t x_minus) base`,
/// `None` the point at infinity.
#[derive(Clone, Debug)]
pub struct Photon {
    spec: GroupSpec,
    theta: usize,
    triple: Sl2Triple<f64>,
    model: Sl2Triple<f64>,
    conj: Mat<f64>,
    conj_inv: Mat<f64>,
    base: Flag<f64>,
}

impl Photon {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    pub fn triple(&self) -> &Sl2Triple<f64> {
        &self.triple
    }

    pub fn base(&self) -> &Flag<f64> {
        &self.base
    }

    pub fn to_json(&self) -> Value {
        json!({
            "spec": self.spec,
            "theta": self.theta,
            "triple": self.triple,
            "base": self.base.to_json(),
        })
    }

    /// `exp(t x_minus)`, computed in the model and conjugated.
    pub fn lower(&self, t: f64) -> Mat<f64> {
        &(&self.conj * &self.model.lower(&t)) * &self.conj_inv
    }

    /// Model element for parameter `t`: maps `0` to `t`; large parameters go through the
    /// Weyl chart (`W` acts as `t -> -1/t`).
    fn model_chart(&self, t: Option<f64>) -> Mat<f64> {
        let w = self.model.weyl_rep();
        match t {
            Some(t) if t.abs() <= 1.0 => self.model.lower(&t),
            Some(t) => &w * &self.model.lower(&(-1.0 / t)),
            None => w,
        }
    }

    /// Acts on `y` by the element of `H_Phi` moving parameter `s` to `t`.
    pub fn move_flag(&self, s: Option<f64>, t: Option<f64>, y: &Flag<f64>) -> Result<Flag<f64>> {
        let m = &self.model_chart(t) * &numlin::inverse(&self.model_chart(s))?;
        act(&self.conj, &act(&m, &act(&self.conj_inv, y)?)?)
    }

    fn point(&self, t: Option<f64>) -> Result<Flag<f64>> {
        let (ep, _) = standard_pair::<f64>(&self.spec);
        act(&self.conj, &act(&self.model_chart(t), &ep)?)
    }
}

/// Model photon through `E+` for `theta`, conjugated by `g`.
pub fn photon_through(spec: &GroupSpec, theta: usize, g: &Mat<f64>) -> Result<Photon> {
    spec.check_theta(theta)?;
    spec.check_element(g, flags::FORM_TOL)?;
    let gi = numlin::inverse(g)?;
    let model = sl2_triple::<f64>(spec, theta)?;
    let triple = model.conjugate(g, &gi);
    let base = act(g, &standard_pair::<f64>(spec).0)?;
    Ok(Photon { spec: spec.clone(), theta, triple, model, conj: g.clone(), conj_inv: gi, base })
}

pub fn photon_points(phi: &Photon, t: Option<f64>) -> Result<Flag<f64>> {
    phi.point(t)
}

/// Random element of the parabolic stabilizing `E+`.
pub fn random_parabolic<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R, scale: f64) -> Result<Mat<f64>> {
    let n = spec.dim();
    let mut dims = spec.subspace_dims();
    if spec.form::<f64>().is_some() {
        let extra: Vec<usize> = dims.iter().map(|d| n - d).collect();
        dims.extend(extra);
    }
    let block = |i: usize| dims.iter().filter(|&&d| d <= i).count();
    let x = spec.random_algebra(rng, scale);
    let x = Mat::from_fn(n, n, |i, j| if block(i) > block(j) { 0.0 } else { x[(i, j)] });
    numlin::expm(&x)
}

/// A theta-photon through `x`, chosen at random among those through `x` (unique in the
/// split SL case).
pub fn random_photon_through<R: Rng + ?Sized>(x: &Flag<f64>, theta: usize, rng: &mut R) -> Result<Photon> {
    let spec = x.spec();
    let (_, em) = standard_pair::<f64>(spec);
    // any flag transverse to x gives a conjugator
    let mut opp = None;
    for _ in 0..20 {
        let cand = act(&spec.random_element(rng, 1.0), &em)?;
        if flags::transverse(x, &cand, 1e-3)? {
            opp = Some(cand);
            break;
        }
    }
    let opp = opp.ok_or(Error::Exhausted(20))?;
    let h = numlin::inverse(&standardize(x, &opp, flags::FLAG_TOL)?)?;
    let p = random_parabolic(spec, rng, 1.0)?;
    photon_through(spec, theta, &(&h * &p))
}

/// Transversality product `prod_theta D_theta(Phi(t), y)` at a finite parameter.
fn transversality_product(phi: &Photon, y: &Flag<f64>, t: f64) -> Result<(f64, f64)> {
    // polynomial basis conj exp(t x_minus) E+, without the chart switch
    let u = &phi.conj * &phi.model.lower(&t);
    let (ep, _) = standard_pair::<f64>(&phi.spec);
    let z = Flag::new_unchecked(phi.spec.clone(), ep.subspaces().iter().map(|m| &u * m).collect());
    let mut val = 1.0;
    let mut bound = 1.0;
    for &th in phi.spec.theta() {
        val *= flags::pairing(th, &z, y)?;
        bound *= normalizing_bound(phi.spec(), th, &z, y)?;
    }
    Ok((val, bound))
}

fn col_norms(m: &Mat<f64>) -> f64 {
    (0..m.cols()).map(|j| numlin::norm(&m.col(j))).product()
}

/// Hadamard-type bound for the pairing determinant.
fn normalizing_bound(spec: &GroupSpec, th: usize, z: &Flag<f64>, y: &Flag<f64>) -> Result<f64> {
    Ok(match spec.group() {
        Group::SL { n } => col_norms(z.subspace(th)?) * col_norms(y.subspace(n - th)?),
        _ => {
            let q = spec.form::<f64>().expect("form");
            let s = if matches!(spec.group(), Group::SO { .. }) { 2.0f64 } else { 1.0 };
            col_norms(z.subspace(th)?) * col_norms(y.subspace(th)?) * s.powi(z.subspace(th)?.cols() as i32) * q.max_abs()
        }
    })
}

fn nilpotency(x: &Mat<f64>) -> usize {
    let mut p = x.clone();
    let mut k = 1;
    while !p.is_zero_within(0.0) && k <= x.rows() {
        p = &p * x;
        k += 1;
    }
    k - 1
}

/// Point of a photon and its parameter.
#[derive(Clone, Debug)]
pub struct Projection {
    pub param: Option<f64>,
    pub flag: Flag<f64>,
}

/// Chordal distance on `P^1` between parameters.
pub fn p1_distance(a: Option<f64>, b: Option<f64>) -> f64 {
    let v = |t: Option<f64>| match t {
        Some(t) => {
            let r = (1.0 + t * t).sqrt();
            (1.0 / r, t / r)
        }
        None => (0.0, 1.0),
    };
    let (a, b) = (v(a), v(b));
    (a.0 * b.1 - a.1 * b.0).abs()
}

/// `[a, b, c, d] = det(a,c) det(b,d) / (det(b,c) det(a,d))` for parameters as points `(1, t)`.
pub fn p1_cross_ratio(a: Option<f64>, b: Option<f64>, c: Option<f64>, d: Option<f64>) -> Result<f64> {
    let v = |t: Option<f64>| match t {
        Some(t) => (1.0, t),
        None => (0.0, 1.0),
    };
    let det = |u: (f64, f64), w: (f64, f64)| u.0 * w.1 - u.1 * w.0;
    let (a, b, c, d) = (v(a), v(b), v(c), v(d));
    let den = det(b, c) * det(a, d);
    if den == 0.0 {
        return Err(Error::NotTransverse("coincident points in P^1 cross-ratio".into()));
    }
    Ok(det(a, c) * det(b, d) / den)
}

/// The unique photon point not transverse to `y`, located as the root of the interpolated
/// transversality polynomial (or at infinity).
pub fn photon_projection(phi: &Photon, y: &Flag<f64>) -> Result<Projection> {
    if y.spec() != phi.spec() {
        return Err(Error::Domain("flag and photon of different groups".into()));
    }
    let yo = Flag::new(y.spec().clone(), y.subspaces().iter().map(|m| numlin::orthonormalize(m, 0.0)).collect())?;
    let e = nilpotency(&phi.model.x_minus).max(1);
    let deg: usize = phi.spec.theta().iter().map(|&t| phi.spec.subspace_dim(t) * e).sum();
    let nodes: Vec<f64> = (0..=deg).map(|i| 2.0 * (std::f64::consts::PI * (2 * i + 1) as f64 / (2 * (deg + 1)) as f64).cos()).collect();
    let mut vals = Vec::with_capacity(nodes.len());
    let mut rel: f64 = 0.0;
    for &t in &nodes {
        let (v, b) = transversality_product(phi, &yo, t)?;
        rel = rel.max(v.abs() / b.max(f64::MIN_POSITIVE));
        vals.push(v);
    }
    if rel <= 1e-12 {
        return Err(Error::Domain("flag is not transverse to any photon point".into()));
    }
    let vand = Mat::from_fn(deg + 1, deg + 1, |i, j| nodes[i].powi(j as i32));
    let rhs = Mat::from_fn(deg + 1, 1, |i, _| vals[i]);
    let coeffs = numlin::solve(&vand, &rhs)?.col(0);
    let mut cands: Vec<Option<f64>> = Vec::new();
    let margin = |t: Option<f64>| -> Result<f64> {
        let z = photon_points(phi, t)?;
        let mut m = f64::INFINITY;
        for &th in phi.spec.theta() {
            m = m.min(normalized_pairing(th, &z, &yo)?.abs());
        }
        Ok(m)
    };
    if coeffs.iter().any(|c| c.abs() > 0.0) {
        for r in numlin::real_roots(&coeffs, 1e-7)? {
            let r = polish_root(phi, &yo, r)?;
            if margin(Some(r))? <= PROJECTION_TOL {
                cands.push(Some(r));
            }
        }
    }
    if margin(None)? <= PROJECTION_TOL {
        cands.push(None);
    }
    let mut clusters: Vec<Option<f64>> = Vec::new();
    for c in cands {
        if !clusters.iter().any(|k| p1_distance(*k, c) <= 1e-8) {
            clusters.push(c);
        }
    }
    match clusters.len() {
        0 => Err(Error::Domain("no photon point fails transversality".into())),
        1 => {
            let param = clusters[0];
            Ok(Projection { param, flag: photon_points(phi, param)? })
        }
        k => Err(Error::Domain(format!("{k} distinct photon points fail transversality"))),
    }
}

/// Secant refinement of a root of the transversality product, evaluated directly.
fn polish_root(phi: &Photon, y: &Flag<f64>, r: f64) -> Result<f64> {
    let f = |t: f64| transversality_product(phi, y, t).map(|v| v.0);
    let mut a = r;
    let mut fa = f(a)?;
    let mut b = r + 1e-6 * (1.0 + r.abs());
    let mut fb = f(b)?;
    for _ in 0..8 {
        if fb == fa || fb == 0.0 {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        if !c.is_finite() {
            break;
        }
        a = b;
        fa = fb;
        b = c;
        fb = f(b)?;
        if (b - a).abs() <= 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    Ok(if fb.abs() <= fa.abs() { b } else { a })
}

fn intersect(a: &Mat<f64>, b: &Mat<f64>, tol: f64) -> Result<Mat<f64>> {
    let qa = numlin::orthonormalize(a, 0.0);
    let qb = numlin::orthonormalize(b, 0.0);
    let k = numlin::null_space(&Mat::hcat(&[&qa, &(-&qb)])?, tol);
    let top = k.rows_range(0, qa.cols());
    Ok(numlin::orthonormalize(&(&qa * &top), tol))
}

fn span_sum(a: &Mat<f64>, b: &Mat<f64>, tol: f64) -> Result<Mat<f64>> {
    Ok(numlin::orthonormalize(&Mat::hcat(&[a, b])?, tol))
}

/// Projection by the closed forms: SL `high ∩ (low + y_{n-k})`; Sp `low ⊕ (high ∩ L)`;
/// SO `low ⊕ (high ∩ y_k^⊥)`, where `low`, `high` are the intersection and span of the
/// varying members of the photon.
pub fn projection_closed(phi: &Photon, y: &Flag<f64>) -> Result<Flag<f64>> {
    let spec = phi.spec();
    let th = phi.theta;
    let k = spec.subspace_dim(th);
    let tol = 1e-9;
    let z0 = photon_points(phi, Some(0.0))?;
    let zi = photon_points(phi, None)?;
    let (a, b) = (z0.subspace(th)?, zi.subspace(th)?);
    let low = intersect(a, b, tol)?;
    let high = span_sum(a, b, tol)?;
    if low.cols() + 1 != k || high.cols() != k + 1 {
        return Err(Error::numeric("photon members do not span a pencil", low.cols() as f64));
    }
    let member = match spec.group() {
        Group::SL { n } => intersect(&high, &span_sum(&low, y.subspace(n - th)?, tol)?, tol)?,
        Group::Sp { .. } => span_sum(&low, &intersect(&high, y.subspace(th)?, tol)?, tol)?,
        Group::SO { .. } => {
            let q = spec.form::<f64>().expect("form");
            let perp = numlin::null_space(&(&y.subspace(th)?.transpose() * &q), tol);
            span_sum(&low, &intersect(&high, &perp, tol)?, tol)?
        }
    };
    if member.cols() != k {
        return Err(Error::Domain("flag is not in the domain of the photon projection".into()));
    }
    let slot = spec.flag_slot(th)?;
    let mut subs = z0.subspaces().to_vec();
    subs[slot] = member;
    Flag::new(spec.clone(), subs)
}

/// A random flag whose projection to `phi` is the point `t`.
pub fn lift<R: Rng + ?Sized>(phi: &Photon, t: Option<f64>, rng: &mut R) -> Result<Flag<f64>> {
    let spec = phi.spec();
    let (_, em) = standard_pair::<f64>(spec);
    for _ in 0..50 {
        let y = act(&spec.random_element(rng, 1.0), &em)?;
        let Ok(p) = photon_projection(phi, &y) else { continue };
        return phi.move_flag(p.param, t, &y);
    }
    Err(Error::Exhausted(50))
}

/// `b^eta(Phi(a), Phi(b), c0, d0)` for lifts `c0`, `d0` of the remaining two points.
pub fn photon_cr(phi: &Photon, eta: &WeightForm, a: Option<f64>, b: Option<f64>, c0: &Flag<f64>, d0: &Flag<f64>) -> Result<f64> {
    let q = Quadruple::new(photon_points(phi, a)?, photon_points(phi, b)?, c0.clone(), d0.clone())?;
    form_cr(eta, &q)
}

/// Photon through the repelling flag of `g`, invariant under `g`, tangent to the root
/// direction of weight exactly `theta`.
pub fn invariant_photon(spec: &GroupSpec, g: &Mat<f64>, theta: usize, tol: f64) -> Result<Photon> {
    spec.check_theta(theta)?;
    let (plus, minus) = eigenflag(spec, g, tol)?;
    let h = standardize(&plus, &minus, flags::FLAG_TOL)?;
    let hi = numlin::inverse(&h)?;
    let d = &(&h * g) * &hi;
    // diagonalize the Levi part by real eigenvectors with descending moduli
    let n = spec.dim();
    let c = match spec.group() {
        Group::SL { .. } => {
            let mut c = Mat::zeros(n, n);
            let mut cuts = vec![0];
            cuts.extend(spec.subspace_dims());
            cuts.push(n);
            for w in cuts.windows(2) {
                let idx: Vec<usize> = (w[0]..w[1]).collect();
                let p = real_eigenbasis(&d.select(&idx, &idx))?;
                for (a, &i) in idx.iter().enumerate() {
                    for (b, &j) in idx.iter().enumerate() {
                        c[(i, j)] = p[(a, b)];
                    }
                }
            }
            c
        }
        Group::Sp { n: m } => {
            let a = d.select(&(0..m).collect::<Vec<_>>(), &(0..m).collect::<Vec<_>>());
            let p = real_eigenbasis(&a)?;
            let pit = numlin::inverse(&p)?.transpose();
            let mut c = Mat::zeros(n, n);
            for i in 0..m {
                for j in 0..m {
                    c[(i, j)] = p[(i, j)];
                    c[(m + i, m + j)] = pit[(i, j)];
                }
            }
            c
        }
        Group::SO { p, .. } => {
            let idx: Vec<usize> = (p - 1..=n - p).collect();
            let qm = spec.form::<f64>().expect("form").select(&idx, &idx);
            let cm = boost_basis(&d.select(&idx, &idx), &qm)?;
            let mut c = Mat::identity(n);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    c[(i, j)] = cm[(a, b)];
                }
            }
            c
        }
    };
    let cd = &(&numlin::inverse(&c)? * &d) * &c;
    check_diagonal_on_theta(spec, &cd)?;
    // w0 moves E+ to E-; the photon through E- is w0 applied to the model photon
    let w0 = longest_weyl(spec);
    let conj = &(&hi * &c) * &w0;
    let phi = photon_through(spec, theta, &conj)?;
    if !flags::same_flag(&phi.base, &minus, 1e-6) {
        return Err(Error::numeric("invariant photon misses the repelling flag", flags::subspace_distance(&phi.base.subspaces()[0], &minus.subspaces()[0])));
    }
    Ok(phi)
}

/// Basis `(v-, middle, v+)` of the Lorentzian block adapted to a hyperbolic element `m`:
/// `v-` the contracting isotropic eigenvector (the photon direction at the repelling flag),
/// `Q(v-, v+) = 1`, the middle `Q`-orthonormal with `Q = -2`.
fn boost_basis(m: &Mat<f64>, q: &Mat<f64>) -> Result<Mat<f64>> {
    let k = m.rows();
    let scale = m.max_abs().max(1.0);
    let ev = numlin::eigenvalues(m)?;
    let &(lam, im) = ev.iter().max_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1))).expect("nonempty");
    if im.abs() > 1e-9 * scale || lam.abs() <= 1.0 + 1e-9 {
        // trivial block: every isotropic direction is invariant, keep the standard one
        if (m - &Mat::identity(k)).max_abs() <= 1e-8 * scale {
            return Ok(Mat::identity(k));
        }
        return Err(Error::Domain("Lorentzian part is not hyperbolic".into()));
    }
    let eig = |l: f64| -> Result<Vec<f64>> {
        let ns = numlin::null_space(&(m - &Mat::identity(k).scale(&l)), 1e-8 * scale);
        if ns.cols() != 1 {
            return Err(Error::numeric("boost eigenvector not isolated", ns.cols() as f64));
        }
        Ok(ns.col(0))
    };
    let vp = eig(lam)?;
    let mut vm = eig(1.0 / lam)?;
    let b = |x: &[f64], y: &[f64]| numlin::dot(x, &q.mul_vec(y).expect("size"));
    let s = b(&vp, &vm);
    vm.iter_mut().for_each(|x| *x /= s);
    let pair = Mat::from_cols(&[vp.clone(), vm.clone()])?;
    let comp = numlin::null_space(&(&pair.transpose() * q), 1e-10);
    let mut mids: Vec<Vec<f64>> = Vec::new();
    for j in 0..comp.cols() {
        let mut v = comp.col(j);
        for u in &mids {
            let c = b(&v, u) / -2.0;
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
        let nrm = b(&v, &v) / -2.0;
        if nrm <= 0.0 {
            return Err(Error::numeric("complement is not negative definite", nrm));
        }
        v.iter_mut().for_each(|x| *x /= nrm.sqrt());
        mids.push(v);
    }
    let mut cols = vec![vm];
    cols.extend(mids);
    cols.push(vp);
    Mat::from_cols(&cols)
}

fn check_diagonal_on_theta(spec: &GroupSpec, d: &Mat<f64>) -> Result<()> {
    let n = spec.dim();
    let scale = d.max_abs().max(1.0);
    let mut off: f64 = 0.0;
    let mid = match spec.group() {
        Group::SO { p, .. } => (p, n - p - 1),
        _ => (n, 0),
    };
    for i in 0..n {
        for j in 0..n {
            let in_mid = i >= mid.0 && i <= mid.1 && j >= mid.0 && j <= mid.1;
            if i != j && !in_mid {
                off = off.max(d[(i, j)].abs());
            }
        }
    }
    if off > 1e-6 * scale {
        return Err(Error::Domain(format!("element is not diagonalizable over the reals with simple spectrum (residual {off:e})")));
    }
    Ok(())
}

/// Real eigenvector basis with columns ordered by descending modulus.
fn real_eigenbasis(a: &Mat<f64>) -> Result<Mat<f64>> {
    let m = a.rows();
    let mut ev = numlin::eigenvalues(a)?;
    ev.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()));
    let scale = a.max_abs().max(1.0);
    for (i, &(re, im)) in ev.iter().enumerate() {
        if im.abs() > 1e-9 * scale {
            return Err(Error::Domain("complex eigenvalue in the Levi factor".into()));
        }
        if i > 0 && (ev[i - 1].0.abs() - re.abs()).abs() <= 1e-9 * scale {
            return Err(Error::Domain("repeated eigenvalue modulus".into()));
        }
    }
    let mut cols = Vec::with_capacity(m);
    for (i, &(re, _)) in ev.iter().enumerate() {
        // product of (a - mu) over the other eigenvalues, then one inverse-iteration step
        let mut p = Mat::identity(m);
        for (j, &(mu, _)) in ev.iter().enumerate() {
            if j != i {
                p = &p * &(a - &Mat::identity(m).scale(&mu));
                let s = p.max_abs();
                p = p.scale(&(1.0 / s));
            }
        }
        let mut v = numlin::pivoted_range(&p, 1);
        let shift = a - &Mat::identity(m).scale(&(re * (1.0 + 1e-10)));
        if let Ok(w) = numlin::solve(&shift, &v) {
            v = numlin::orthonormalize(&w, 0.0);
        }
        if v.cols() != 1 {
            return Err(Error::numeric("eigenvector not isolated", v.cols() as f64));
        }
        cols.push(v.col(0));
    }
    Mat::from_cols(&cols)
}

/// Element of the group sending `E+` to `E-`.
pub fn longest_weyl(spec: &GroupSpec) -> Mat<f64> {
    let n = spec.dim();
    match spec.group() {
        Group::SL { .. } => {
            let mut w = Mat::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 });
            if numlin::det(&w).unwrap() < 0.0 {
                w[(0, n - 1)] = -1.0;
            }
            w
        }
        Group::Sp { n: m } => Mat::from_fn(n, n, |i, j| {
            if i >= m && j == i - m {
                1.0
            } else if i < m && j == i + m {
                -1.0
            } else {
                0.0
            }
        }),
        Group::SO { p, .. } => {
            // swap e_i and e_{N-1-i} for i < p - 1, fix the middle block
            Mat::from_fn(n, n, |i, j| {
                let outer = i < p - 1 || i > n - p;
                if outer && i + j == n - 1 || !outer && i == j {
                    1.0
                } else {
                    0.0
                }
            })
        }
    }
}

/// Outcome of the sup-min comparison.
#[derive(Clone, Debug, Serialize)]
pub struct SupMinReport {
    /// `chi(g)^{<h_theta|eta>}` for the root whose photon through `g-` is used.
    pub character: f64,
    pub invariant_value: f64,
    /// Values on additional photons through `g-`.
    pub other_values: Vec<f64>,
    /// `character - min(values)`.
    pub margin: f64,
    /// `|invariant_value / character - 1|`.
    pub equality_residual: f64,
}

/// Root whose character the photon cross-ratio at the repelling flag recovers: the
/// theta-photon varies the theta-member, and the period of that member is the character of
/// the opposite root.
pub fn photon_character_root(spec: &GroupSpec, theta: usize) -> usize {
    spec.opposite_root(theta)
}

/// Compares `chi(g)^{<h_theta|eta>}` with `b^eta(p_Phi(g+), g-, x, g x)` on the invariant photon
/// and on up to `extra` random photons through `g-` onto which `g+` projects.
pub fn supmin_check<R: Rng + ?Sized>(spec: &GroupSpec, eta: &WeightForm, g: &Mat<f64>, x: &Flag<f64>, theta: usize, extra: usize, tol: f64, rng: &mut R) -> Result<SupMinReport> {
    eta.check(spec)?;
    let c = eta.pairing_h(theta);
    if c <= 0.0 {
        return Err(Error::Domain(format!("eta must pair positively with root {theta}")));
    }
    let (plus, minus) = eigenflag(spec, g, tol)?;
    let gx = act(g, x)?;
    let chi = spec.root_character(photon_character_root(spec, theta), g, tol)?.powf(c);
    let value = |phi: &Photon| -> Result<f64> {
        let p = photon_projection(phi, &plus)?;
        form_cr(eta, &Quadruple::new(p.flag, minus.clone(), x.clone(), gx.clone())?)
    };
    let inv = invariant_photon(spec, g, theta, tol)?;
    let invariant_value = value(&inv)?;
    let mut other_values = Vec::with_capacity(extra);
    // photons on which g+ has no projection are outside the minimum
    for _ in 0..10 * extra {
        if other_values.len() == extra {
            break;
        }
        let phi = random_photon_through(&minus, theta, rng)?;
        match value(&phi) {
            Ok(v) => other_values.push(v),
            Err(Error::Domain(_) | Error::NotTransverse(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let min = other_values.iter().copied().fold(invariant_value, f64::min);
    Ok(SupMinReport { character: chi, invariant_value, other_values, margin: chi - min, equality_residual: (invariant_value / chi - 1.0).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::positivity::{CircleKind, PositiveCircle};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn specs() -> Vec<GroupSpec> {
        vec![GroupSpec::sl(3).unwrap(), GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap(), GroupSpec::sp(3).unwrap(), GroupSpec::so(3, 4).unwrap()]
    }

    #[test]
    fn sl3_model_photon_is_pencil() {
        let spec = GroupSpec::sl(3).unwrap();
        let phi = photon_through(&spec, 1, &Mat::identity(3)).unwrap();
        for t in [Some(-2.0), Some(0.5), None] {
            let z = photon_points(&phi, t).unwrap();
            assert!(flags::subspace_distance(&z.subspaces()[1], &phi.base().subspaces()[1]) < 1e-14);
        }
        assert!(flags::same_flag(&photon_points(&phi, Some(0.0)).unwrap(), phi.base(), 0.0));
    }

    #[test]
    fn sp4_photon_matches_lagrangian_pencil() {
        // conjugate so the photon is the Lagrangians containing f2 inside <e1, f1, f2>
        let spec = GroupSpec::sp(2).unwrap();
        let mut g = Mat::zeros(4, 4);
        g[(3, 0)] = 1.0; // e1 -> f2
        g[(0, 1)] = 1.0; // e2 -> e1
        g[(2, 3)] = 1.0; // f2 -> f1
        g[(1, 2)] = -1.0; // f1 -> -e2
        let phi = photon_through(&spec, 2, &g).unwrap();
        let f2 = Mat::from_cols(&[vec![0.0, 0.0, 0.0, 1.0]]).unwrap();
        let w = Mat::from_cols(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]).unwrap();
        for t in [Some(-1.5), Some(0.0), Some(3.0), None] {
            let l = photon_points(&phi, t).unwrap().subspaces()[0].clone();
            assert_eq!(numlin::rank(&Mat::hcat(&[&l, &f2]).unwrap(), 1e-12), 2);
            assert_eq!(numlin::rank(&Mat::hcat(&[&w, &l]).unwrap(), 1e-12), 3);
        }
    }

    #[test]
    fn so34_photon_varies_second_member() {
        let spec = GroupSpec::so(3, 4).unwrap();
        let phi = photon_through(&spec, 2, &Mat::identity(7)).unwrap();
        let x3 = Mat::from_fn(7, 3, |i, j| if i == j { 1.0 } else { 0.0 });
        for t in [Some(2.0), None] {
            let z = photon_points(&phi, t).unwrap();
            assert!(flags::subspace_distance(&z.subspaces()[0], &phi.base().subspaces()[0]) < 1e-14);
            assert_eq!(numlin::rank(&Mat::hcat(&[&x3, &z.subspaces()[1]]).unwrap(), 1e-12), 3);
        }
    }

    #[test]
    fn points_distinct_and_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in specs() {
            for &th in spec.theta() {
                let phi = photon_through(&spec, th, &spec.random_element(&mut rng, 0.5)).unwrap();
                let ts: Vec<Option<f64>> = (0..50).map(|i| Some(-5.0 + 0.2 * i as f64)).chain([None]).collect();
                let pts: Vec<Flag<f64>> = ts.iter().map(|&t| photon_points(&phi, t).unwrap()).collect();
                for i in 0..pts.len() {
                    for j in 0..i {
                        assert!(!flags::same_flag(&pts[i], &pts[j], 1e-9));
                    }
                }
                let s = 0.7;
                let moved = act(&phi.lower(s), &pts[3]).unwrap();
                assert!(flags::same_flag(&moved, &photon_points(&phi, Some(ts[3].unwrap() + s)).unwrap(), 1e-9));
            }
        }
    }

    #[test]
    fn projection_generic_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for spec in specs() {
            for &th in spec.theta() {
                for _ in 0..10 {
                    let phi = photon_through(&spec, th, &spec.random_element(&mut rng, 0.5)).unwrap();
                    let y = act(&spec.random_element(&mut rng, 1.0), &standard_pair::<f64>(&spec).1).unwrap();
                    let p = photon_projection(&phi, &y).unwrap();
                    let c = projection_closed(&phi, &y).unwrap();
                    assert!(flags::same_flag(&p.flag, &c, 1e-9), "{spec} {th}");
                    assert!(!flags::transverse(&p.flag, &y, 1e-7).unwrap());
                }
            }
        }
    }

    #[test]
    fn projection_fixes_photon_points() {
        let spec = GroupSpec::sp(2).unwrap();
        let phi = photon_through(&spec, 2, &Mat::identity(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // a flag on the photon is not in O_Phi itself; perturb along its fibre instead
        for t in [Some(0.3), Some(-2.0), None] {
            let l = lift(&phi, t, &mut rng).unwrap();
            let p = photon_projection(&phi, &l).unwrap();
            assert!(p1_distance(p.param, t) < 1e-8);
            assert!(flags::same_flag(&projection_closed(&phi, &l).unwrap(), &photon_points(&phi, t).unwrap(), 1e-8));
        }
        let z = photon_points(&phi, Some(0.3)).unwrap();
        assert!(photon_projection(&phi, &z).is_err());
    }

    #[test]
    fn power_law_and_fibres() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for spec in specs() {
            for &th in spec.theta() {
                let others: Vec<usize> = spec.theta().iter().copied().filter(|&s| s != th).collect();
                let mut etas = vec![WeightForm::fundamental(th), WeightForm::new([(th, 2.0)]).unwrap()];
                if let Some(&s) = others.first() {
                    etas.push(WeightForm::new([(th, 1.0), (s, 1.0)]).unwrap());
                }
                for _ in 0..5 {
                    let phi = photon_through(&spec, th, &spec.random_element(&mut rng, 0.5)).unwrap();
                    let (a, b, c, d) = (Some(rng.random_range(-3.0..3.0)), None, Some(rng.random_range(-3.0..3.0)), Some(rng.random_range(-3.0..3.0)));
                    let c0 = lift(&phi, c, &mut rng).unwrap();
                    let d0 = lift(&phi, d, &mut rng).unwrap();
                    let pr = p1_cross_ratio(a, b, c, d).unwrap();
                    for eta in &etas {
                        let v = photon_cr(&phi, eta, a, b, &c0, &d0).unwrap();
                        let want = pr.powf(eta.pairing_h(th));
                        assert!((v / want - 1.0).abs() < 1e-9, "{spec} {th} {v} {want}");
                    }
                    let d1 = lift(&phi, d, &mut rng).unwrap();
                    for eta in &etas {
                        let q = Quadruple::new(photon_points(&phi, a).unwrap(), photon_points(&phi, c).unwrap(), d0.clone(), d1.clone()).unwrap();
                        assert!((form_cr(eta, &q).unwrap() - 1.0).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn invariant_photon_diag() {
        let spec = GroupSpec::sl(3).unwrap();
        let g = Mat::diag(&[4.0, 2.0, 1.0]);
        let phi = invariant_photon(&spec, &g, 1, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for eta in [WeightForm::fundamental(1), WeightForm::new([(1, 2.0), (2, 1.0)]).unwrap()] {
            let want = 2f64.powf(eta.pairing_h(1));
            let (plus, minus) = eigenflag(&spec, &g, 1e-10).unwrap();
            let p = photon_projection(&phi, &plus).unwrap();
            for _ in 0..3 {
                let y = act(&spec.random_element(&mut rng, 1.0), &standard_pair::<f64>(&spec).1).unwrap();
                let q = Quadruple::new(p.flag.clone(), minus.clone(), y.clone(), act(&g, &y).unwrap()).unwrap();
                assert!((form_cr(&eta, &q).unwrap() / want - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn invariant_photon_equality_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for spec in specs() {
            for _ in 0..3 {
                let a: Vec<f64> = {
                    let mut v: Vec<f64> = (0..spec.cartan_dim()).map(|_| rng.random_range(0.2..2.0)).collect();
                    v.sort_by(|x, y| y.total_cmp(x));
                    // strictly dominant
                    for i in 1..v.len() {
                        if v[i] > v[i - 1] - 0.1 {
                            v[i] = v[i - 1] - 0.1 - rng.random_range(0.0..0.3);
                        }
                    }
                    v
                };
                let t = spec.torus_element(&spec_cartan_to_logs(&spec, &a)).unwrap();
                let c = spec.random_element(&mut rng, 0.5);
                let g = &(&c * &t) * &numlin::inverse(&c).unwrap();
                let x = act(&spec.random_element(&mut rng, 1.0), &standard_pair::<f64>(&spec).1).unwrap();
                for &th in spec.theta() {
                    let eta = WeightForm::fundamental(th);
                    let r = supmin_check(&spec, &eta, &g, &x, th, 3, 1e-10, &mut rng).unwrap_or_else(|e| panic!("{spec} {th} {a:?} {e:?}"));
                    assert!(r.equality_residual < 1e-8, "{spec} {th} {r:?}");
                }
            }
        }
    }

    fn spec_cartan_to_logs(spec: &GroupSpec, a: &[f64]) -> Vec<f64> {
        match spec.group() {
            Group::SL { n } => {
                let mut v = a.to_vec();
                v.truncate(n);
                v
            }
            _ => a.to_vec(),
        }
    }

    #[test]
    fn sp4_principal_loxodromic_equality() {
        let spec = GroupSpec::sp(2).unwrap();
        let circ = PositiveCircle::<f64>::new(&spec, CircleKind::Principal).unwrap();
        let g2 = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let g = circ.element(&g2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = act(&spec.random_element(&mut rng, 1.0), &standard_pair::<f64>(&spec).1).unwrap();
        let r = supmin_check(&spec, &WeightForm::fundamental(2), &g, &x, 2, 5, 1e-10, &mut rng).unwrap();
        assert!(r.equality_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn supmin_on_positive_inputs() {
        use crate::positivity::quadruple_positive;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for spec in [GroupSpec::sl(3).unwrap(), GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap()] {
            let circ = PositiveCircle::<f64>::new(&spec, CircleKind::Principal).unwrap();
            for _ in 0..5 {
                let l: f64 = rng.random_range(1.2..3.0);
                let g2 = Mat::diag(&[l, 1.0 / l]);
                let h = spec.random_element(&mut rng, 0.4);
                let hi = numlin::inverse(&h).unwrap();
                let g = &(&h * &circ.element(&g2).unwrap()) * &hi;
                let x = act(&h, &circ.flag([-rng.random_range(0.2..5.0), 1.0]).unwrap()).unwrap();
                let (plus, minus) = eigenflag(&spec, &g, 1e-10).unwrap();
                assert!(quadruple_positive(&plus, &minus, &x, &act(&g, &x).unwrap(), 1e-10).unwrap());
                for &th in spec.theta() {
                    let r = supmin_check(&spec, &WeightForm::fundamental(th), &g, &x, th, 4, 1e-10, &mut rng).unwrap();
                    assert!(r.margin >= -1e-8 * r.character, "{spec} {r:?}");
                    assert!(r.invariant_value > 1.0);
                    assert!(r.other_values.iter().all(|v| *v > 1.0), "{spec} {r:?}");
                }
            }
        }
    }
}
