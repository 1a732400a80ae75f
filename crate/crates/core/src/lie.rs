//! Root data, sl2-triples, weights, Jordan projections and characters for
//! `SL(n)`, `Sp(2n)` and `SO(p, q)` in their defining representations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numlin::{self, Mat};
use crate::scalar::{binomial, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    SL,
    Sp,
    SO,
}

/// Concrete group model.
///
/// * `SL { n }` acts on `R^n`.
/// * `Sp { n }` is `Sp(2n)` on `R^{2n}` with basis `(e_1..e_n, f_1..f_n)` and form
///   `J = [[0, I], [-I, 0]]`.
/// * `SO { p, q }` preserves a form of signature `(p, q)`, `q > p >= 2`, in coordinates
///   where `e_i` pairs with `e_{N+1-i}` for `i <= p` and the middle block is negative definite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    SL { n: usize },
    Sp { n: usize },
    SO { p: usize, q: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    group: Group,
    theta: Vec<usize>,
}

impl GroupSpec {
    pub fn new(group: Group, theta: Vec<usize>) -> Result<Self> {
        match group {
            Group::SL { n } if n < 2 => return Err(Error::Domain(format!("SL({n}) needs n >= 2"))),
            Group::Sp { n } if n < 1 => return Err(Error::Domain("Sp(0)".into())),
            Group::SO { p, q } if p < 2 || q <= p => {
                return Err(Error::Domain(format!("SO({p},{q}) needs q > p >= 2")))
            }
            _ => {}
        }
        let legal = Self::legal_theta(group);
        let mut theta = theta;
        theta.sort_unstable();
        theta.dedup();
        if theta.is_empty() {
            return Err(Error::Domain("empty theta".into()));
        }
        if let Some(t) = theta.iter().find(|t| !legal.contains(t)) {
            return Err(Error::Domain(format!("root {t} is not in the positive structure of {group}")));
        }
        if group_is_so(group) && theta != legal {
            return Err(Error::Domain(format!("{group} requires theta = {legal:?}")));
        }
        Ok(GroupSpec { group, theta })
    }

    pub fn sl(n: usize) -> Result<Self> {
        Self::with_default(Group::SL { n })
    }

    /// `Sp(2n)`.
    pub fn sp(n: usize) -> Result<Self> {
        Self::with_default(Group::Sp { n })
    }

    pub fn so(p: usize, q: usize) -> Result<Self> {
        Self::with_default(Group::SO { p, q })
    }

    fn with_default(group: Group) -> Result<Self> {
        if let Group::SO { p, .. } = group {
            if p < 2 {
                return Err(Error::Domain(format!("SO({p},_) needs p >= 2")));
            }
        }
        if let Group::SL { n } = group {
            if n < 2 {
                return Err(Error::Domain(format!("SL({n}) needs n >= 2")));
            }
        }
        Self::new(group, Self::legal_theta(group))
    }

    fn legal_theta(group: Group) -> Vec<usize> {
        match group {
            Group::SL { n } => (1..n).collect(),
            Group::Sp { n } => vec![n],
            Group::SO { p, .. } => (1..p).collect(),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn family(&self) -> Family {
        match self.group {
            Group::SL { .. } => Family::SL,
            Group::Sp { .. } => Family::Sp,
            Group::SO { .. } => Family::SO,
        }
    }

    pub fn theta(&self) -> &[usize] {
        &self.theta
    }

    /// Dimension of the defining representation.
    pub fn dim(&self) -> usize {
        match self.group {
            Group::SL { n } => n,
            Group::Sp { n } => 2 * n,
            Group::SO { p, q } => p + q,
        }
    }

    /// Number of simple restricted roots.
    pub fn rank(&self) -> usize {
        match self.group {
            Group::SL { n } => n - 1,
            Group::Sp { n } => n,
            Group::SO { p, .. } => p,
        }
    }

    pub fn check_theta(&self, theta: usize) -> Result<()> {
        if self.theta.contains(&theta) {
            Ok(())
        } else {
            Err(Error::Index(format!("root {theta} not in theta {:?} of {}", self.theta, self.group)))
        }
    }

    /// Dimension of the subspace indexed by `theta` in a flag.
    pub fn subspace_dim(&self, theta: usize) -> usize {
        match self.group {
            Group::Sp { n } => n,
            _ => theta,
        }
    }

    /// Position of `theta` in the flag's subspace list.
    pub fn flag_slot(&self, theta: usize) -> Result<usize> {
        self.theta
            .iter()
            .position(|&t| t == theta)
            .ok_or_else(|| Error::Index(format!("root {theta} not in theta {:?}", self.theta)))
    }

    pub fn subspace_dims(&self) -> Vec<usize> {
        self.theta.iter().map(|&t| self.subspace_dim(t)).collect()
    }

    /// Opposition involution on simple roots.
    pub fn opposite_root(&self, theta: usize) -> usize {
        match self.group {
            Group::SL { n } => n - theta,
            _ => theta,
        }
    }

    /// Invariant bilinear form, if any.
    pub fn form<T: Scalar>(&self) -> Option<Mat<T>> {
        match self.group {
            Group::SL { .. } => None,
            Group::Sp { n } => Some(Mat::from_fn(2 * n, 2 * n, |i, j| {
                if j == i + n {
                    T::one()
                } else if i == j + n {
                    -T::one()
                } else {
                    T::zero()
                }
            })),
            Group::SO { p, q } => {
                let nn = p + q;
                Some(Mat::from_fn(nn, nn, |i, j| {
                    if i + j == nn - 1 && (i < p || j < p) {
                        T::one()
                    } else if i == j && i >= p && i < q {
                        T::from_i64(-2)
                    } else {
                        T::zero()
                    }
                }))
            }
        }
    }

    /// Checks that `g` lies in the group: invertible for SL (characters are normalized),
    /// form-preserving for Sp and SO.
    pub fn check_element<T: Scalar>(&self, g: &Mat<T>, tol: f64) -> Result<()> {
        let n = self.dim();
        if g.rows() != n || g.cols() != n {
            return Err(Error::Dimension(format!("{}x{} element for {}", g.rows(), g.cols(), self.group)));
        }
        match self.form::<T>() {
            None => {
                let d = numlin::det(g)?;
                // Hadamard ratio; only numerical singularity is rejected
                let _ = tol;
                let scale: f64 = (0..n)
                    .map(|j| (0..n).map(|i| g[(i, j)].to_f64().powi(2)).sum::<f64>().sqrt())
                    .product();
                if d.is_zero() || (!T::EXACT && d.abs_f64() <= f64::EPSILON * n as f64 * scale) {
                    return Err(Error::NotInGroup("singular matrix".into()));
                }
                Ok(())
            }
            Some(f) => {
                let r = &(&g.transpose() * &f) * g;
                let diff = &r - &f;
                let scale = g.max_abs().powi(2).max(1.0);
                let bad = if T::EXACT { !diff.is_zero_within(0.0) } else { diff.max_abs() > tol * scale };
                if bad {
                    return Err(Error::NotInGroup(format!(
                        "form not preserved (defect {:e})",
                        diff.max_abs()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Checks that `x` lies in the Lie algebra.
    pub fn check_algebra<T: Scalar>(&self, x: &Mat<T>, tol: f64) -> Result<()> {
        let defect = match self.form::<T>() {
            None => x.trace().abs_f64(),
            Some(f) => (&(&x.transpose() * &f) + &(&f * x)).max_abs(),
        };
        if defect > tol * x.max_abs().max(1.0) {
            return Err(Error::Domain(format!("not in the Lie algebra (defect {defect:e})")));
        }
        Ok(())
    }

    /// Random Lie algebra element with Gaussian coordinates of standard deviation `scale`.
    pub fn random_algebra<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Mat<f64> {
        let n = self.dim();
        let mut gauss = || rng.sample::<f64, _>(StandardNormal) * scale;
        match self.group {
            Group::SL { .. } => {
                let mut x = Mat::from_fn(n, n, |_, _| gauss());
                let t = x.trace() / n as f64;
                for i in 0..n {
                    x[(i, i)] -= t;
                }
                x
            }
            Group::Sp { .. } => {
                let a = Mat::from_fn(n, n, |_, _| gauss());
                let s = (&a + &a.transpose()).scale(&0.5);
                &self.form::<f64>().unwrap() * &s
            }
            Group::SO { .. } => {
                let a = Mat::from_fn(n, n, |_, _| gauss());
                let k = (&a - &a.transpose()).scale(&0.5);
                let qi = numlin::inverse(&self.form::<f64>().unwrap()).expect("form is invertible");
                &qi * &k
            }
        }
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Mat<f64> {
        numlin::expm(&self.random_algebra(rng, scale)).expect("bounded algebra element")
    }

    /// Diagonal loxodromic element with Cartan coordinates `a` (length = Cartan dimension).
    pub fn torus_element(&self, a: &[f64]) -> Result<Mat<f64>> {
        let n = self.dim();
        let r = self.cartan_dim();
        if a.len() != r {
            return Err(Error::Dimension(format!("{} Cartan coordinates, expected {r}", a.len())));
        }
        let d: Vec<f64> = match self.group {
            Group::SL { .. } => {
                let m = a.iter().sum::<f64>() / n as f64;
                a.iter().map(|x| (x - m).exp()).collect()
            }
            _ => {
                let mut d = vec![1.0; n];
                for (i, x) in a.iter().enumerate() {
                    d[i] = x.exp();
                    d[self.partner(i)] = (-x).exp();
                }
                d
            }
        };
        Ok(Mat::diag(&d))
    }

    /// Random Cartan coordinates with every simple root value at least `0.15`.
    pub fn random_dominant<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let r = self.cartan_dim();
        let mut a = vec![0.0; r];
        let floor = match self.group {
            Group::SL { .. } => 0.0,
            _ => rng.random_range(0.15..1.2),
        };
        a[r - 1] = floor;
        for i in (0..r - 1).rev() {
            a[i] = a[i + 1] + rng.random_range(0.15..1.2);
        }
        if let Group::SL { .. } = self.group {
            let m = a.iter().sum::<f64>() / r as f64;
            a.iter_mut().for_each(|x| *x -= m);
        }
        a
    }

    /// `h t h^-1` for a random dominant torus element `t`, with its Cartan coordinates.
    pub fn random_loxodromic<R: Rng + ?Sized>(&self, rng: &mut R, conj_scale: f64) -> Result<(Mat<f64>, Vec<f64>)> {
        let a = self.random_dominant(rng);
        let t = self.torus_element(&a)?;
        let h = self.random_element(rng, conj_scale);
        Ok((&(&h * &t) * &numlin::inverse(&h)?, a))
    }

    /// Cartan coordinates of `g^-1` from those of `g`.
    pub fn inverse_cartan(&self, a: &[f64]) -> Vec<f64> {
        match self.group {
            Group::SL { .. } => a.iter().rev().map(|x| -x).collect(),
            _ => a.to_vec(),
        }
    }

    /// `chi_eta` evaluated on Cartan coordinates.
    pub fn character_at(&self, eta: &WeightForm, a: &[f64]) -> f64 {
        eta.coeffs.iter().map(|(&t, &c)| c * self.weight_value(t, a)).sum::<f64>().exp()
    }

    /// Coordinate paired with `i` by the form (Sp, SO).
    pub fn partner(&self, i: usize) -> usize {
        match self.group {
            Group::Sp { n } => (i + n) % (2 * n),
            _ => self.dim() - 1 - i,
        }
    }

    /// Number of Cartan coordinates `a_i`.
    pub fn cartan_dim(&self) -> usize {
        match self.group {
            Group::SL { n } => n,
            Group::Sp { n } => n,
            Group::SO { p, .. } => p,
        }
    }

    /// Cartan coordinates from a full descending log-moduli vector.
    pub fn cartan_coords(&self, logs: &[f64]) -> Vec<f64> {
        let n = logs.len();
        match self.group {
            Group::SL { .. } => {
                let m = logs.iter().sum::<f64>() / n as f64;
                logs.iter().map(|x| x - m).collect()
            }
            _ => (0..self.cartan_dim()).map(|i| 0.5 * (logs[i] - logs[n - 1 - i])).collect(),
        }
    }

    /// Simple root `alpha` (1-based, `1..=rank`) evaluated on Cartan coordinates.
    pub fn root_value(&self, alpha: usize, a: &[f64]) -> f64 {
        let r = self.rank();
        assert!(alpha >= 1 && alpha <= r, "simple root {alpha} out of range");
        let i = alpha - 1;
        match self.group {
            Group::Sp { n } if alpha == n => 2.0 * a[n - 1],
            Group::SO { p, .. } if alpha == p => a[p - 1],
            _ => a[i] - a[i + 1],
        }
    }

    /// Fundamental weight of `theta` evaluated on Cartan coordinates.
    pub fn weight_value(&self, theta: usize, a: &[f64]) -> f64 {
        a[..self.subspace_dim(theta)].iter().sum()
    }

    /// Simple root as a linear functional on diagonal entries of an `N x N` Cartan element.
    pub fn root_functional(&self, alpha: usize) -> Vec<f64> {
        let n = self.dim();
        let mut f = vec![0.0; n];
        let i = alpha - 1;
        match self.group {
            Group::SL { .. } => {
                f[i] = 1.0;
                f[i + 1] = -1.0;
            }
            Group::Sp { n: h } if alpha == h => f[h - 1] = 2.0,
            Group::SO { p, .. } if alpha == p => f[p - 1] = 1.0,
            _ => {
                f[i] = 1.0;
                f[i + 1] = -1.0;
            }
        }
        f
    }

    /// Jordan projection: descending log-moduli, mean-free for SL, symmetrized for Sp/SO.
    pub fn jordan_projection(&self, g: &Mat<f64>, tol: f64) -> Result<Vec<f64>> {
        self.check_element(g, tol.max(1e-8))?;
        let mods = numlin::eigen_moduli(g)?;
        if mods.iter().any(|&m| m <= 0.0) {
            return Err(Error::Domain("zero eigenvalue".into()));
        }
        let logs: Vec<f64> = mods.iter().map(|m| m.ln()).collect();
        let n = logs.len();
        Ok(match self.group {
            Group::SL { .. } => {
                let m = logs.iter().sum::<f64>() / n as f64;
                logs.iter().map(|x| x - m).collect()
            }
            _ => (0..n).map(|i| 0.5 * (logs[i] - logs[n - 1 - i])).collect(),
        })
    }

    /// Cartan coordinates of `g`, checking loxodromy at every root of `theta`.
    pub fn loxodromic_coords(&self, g: &Mat<f64>, tol: f64) -> Result<Vec<f64>> {
        let a = self.cartan_coords(&self.jordan_projection(g, tol)?);
        for &t in &self.theta {
            let gap = self.root_value(t, &a).exp();
            if !(gap >= 1.0 + 10.0 * tol) {
                return Err(Error::Domain(format!("not loxodromic at root {t} (gap {gap})")));
            }
        }
        Ok(a)
    }

    pub fn character(&self, eta: &WeightForm, g: &Mat<f64>, tol: f64) -> Result<f64> {
        eta.check(self)?;
        let a = self.loxodromic_coords(g, tol)?;
        Ok(eta.coeffs.iter().map(|(&t, &c)| c * self.weight_value(t, &a)).sum::<f64>().exp())
    }

    pub fn root_character(&self, theta: usize, g: &Mat<f64>, tol: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let a = self.loxodromic_coords(g, tol)?;
        Ok(self.root_value(theta, &a).exp())
    }

    /// Orthogonal projection (trace form) of a Cartan element onto the common kernel of the
    /// simple roots outside theta.
    pub fn project_b_theta(&self, x: &Mat<f64>, tol: f64) -> Result<Mat<f64>> {
        let n = self.dim();
        if x.rows() != n || x.cols() != n {
            return Err(Error::Dimension(format!("{}x{} Cartan element", x.rows(), x.cols())));
        }
        let scale = x.max_abs().max(1.0);
        for i in 0..n {
            for j in 0..n {
                if i != j && x[(i, j)].abs() > tol * scale {
                    return Err(Error::Domain("element is not Cartan-diagonal".into()));
                }
            }
        }
        let d: Vec<f64> = (0..n).map(|i| x[(i, i)]).collect();
        let proj = self.project_diag(&d);
        if self.group_is_cartan_mismatch(&d, &proj, tol * scale) {
            return Err(Error::Domain("diagonal element outside the Cartan subalgebra".into()));
        }
        let mut constraints: Vec<Vec<f64>> = (1..=self.rank())
            .filter(|a| !self.theta.contains(a))
            .map(|a| self.root_functional(a))
            .collect();
        let out = project_onto_kernel(&proj, &mut constraints, &self.cartan_basis());
        Ok(Mat::diag(&out))
    }

    fn group_is_cartan_mismatch(&self, d: &[f64], proj: &[f64], tol: f64) -> bool {
        d.iter().zip(proj).any(|(a, b)| (a - b).abs() > tol)
    }

    /// Orthonormal basis (trace form) of the diagonal Cartan subalgebra.
    fn cartan_basis(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let raw: Vec<Vec<f64>> = match self.group {
            Group::SL { .. } => (0..n - 1)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v[i + 1] = -1.0;
                    v
                })
                .collect(),
            _ => (0..self.cartan_dim())
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    v[self.partner(i)] = -1.0;
                    v
                })
                .collect(),
        };
        let m = Mat::from_cols(&raw).expect("basis");
        let q = numlin::orthonormalize(&m, 1e-12);
        (0..q.cols()).map(|j| q.col(j)).collect()
    }

    fn project_diag(&self, d: &[f64]) -> Vec<f64> {
        let basis = self.cartan_basis();
        let mut out = vec![0.0; d.len()];
        for b in &basis {
            let c = numlin::dot(b, d);
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }
}

fn group_is_so(g: Group) -> bool {
    matches!(g, Group::SO { .. })
}

/// Projects `v` (inside span of `basis`) onto the subspace of that span annihilated by the
/// functionals in `constraints`, orthogonally for the Euclidean structure on diagonals.
fn project_onto_kernel(v: &[f64], constraints: &mut [Vec<f64>], basis: &[Vec<f64>]) -> Vec<f64> {
    if constraints.is_empty() {
        return v.to_vec();
    }
    // coordinates in the orthonormal basis; functionals pulled back to those coordinates
    let coords: Vec<f64> = basis.iter().map(|b| numlin::dot(b, v)).collect();
    let rows: Vec<Vec<f64>> = constraints.iter().map(|f| basis.iter().map(|b| numlin::dot(f, b)).collect()).collect();
    let fm = Mat::from_rows(rows).expect("constraint matrix");
    let q = numlin::orthonormalize(&fm.transpose(), 1e-12);
    let mut c = coords.clone();
    for j in 0..q.cols() {
        let u = q.col(j);
        let d = numlin::dot(&u, &c);
        for (ci, ui) in c.iter_mut().zip(&u) {
            *ci -= d * ui;
        }
    }
    let mut out = vec![0.0; v.len()];
    for (ci, b) in c.iter().zip(basis) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += ci * bi;
        }
    }
    out
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::SL { n } => write!(f, "SL({n})"),
            Group::Sp { n } => write!(f, "Sp({})", 2 * n),
            Group::SO { p, q } => write!(f, "SO({p},{q})"),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.group)
    }
}

/// Parses `SL3`, `Sp4`, `SO3,4`, `SO(3,4)` or `SO3_4`.
impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')').collect();
        let bad = || Error::Parse(format!("unknown group {s:?}; expected SL<n>, Sp<2n> or SO<p>,<q>"));
        let num = |x: &str| x.parse::<usize>().map_err(|_| bad());
        if let Some(r) = t.strip_prefix("SL") {
            GroupSpec::sl(num(r)?)
        } else if let Some(r) = t.strip_prefix("Sp") {
            let d = num(r)?;
            if d % 2 != 0 {
                return Err(Error::Parse(format!("Sp({d}) needs even dimension")));
            }
            GroupSpec::sp(d / 2)
        } else if let Some(r) = t.strip_prefix("SO") {
            let (p, q) = r.split_once([',', '_']).ok_or_else(bad)?;
            GroupSpec::so(num(p)?, num(q)?)
        } else {
            Err(bad())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    family: Family,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    q: Option<usize>,
    #[serde(default)]
    theta: Option<Vec<usize>>,
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (n, p, q) = match self.group {
            Group::SL { n } | Group::Sp { n } => (Some(n), None, None),
            Group::SO { p, q } => (None, Some(p), Some(q)),
        };
        SpecJson { family: self.family(), n, p, q, theta: Some(self.theta.clone()) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SpecJson::deserialize(d)?;
        let group = match (j.family, j.n, j.p, j.q) {
            (Family::SL, Some(n), None, None) => Group::SL { n },
            (Family::Sp, Some(n), None, None) => Group::Sp { n },
            (Family::SO, None, Some(p), Some(q)) => Group::SO { p, q },
            _ => return Err(D::Error::custom("group needs n (SL, Sp) or p and q (SO)")),
        };
        let theta = j.theta.unwrap_or_else(|| GroupSpec::legal_theta(group));
        GroupSpec::new(group, theta).map_err(D::Error::custom)
    }
}

/// Nonnegative combination `sum c_theta * omega_theta` of fundamental weights.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightForm {
    pub coeffs: BTreeMap<usize, f64>,
}

impl WeightForm {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (t, c) in coeffs {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::Domain(format!("weight coefficient {c} for root {t} must be >= 0")));
            }
            if c != 0.0 {
                *m.entry(t).or_insert(0.0) += c;
            }
        }
        Ok(WeightForm { coeffs: m })
    }

    pub fn fundamental(theta: usize) -> Self {
        WeightForm { coeffs: BTreeMap::from([(theta, 1.0)]) }
    }

    pub fn zero() -> Self {
        WeightForm::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `<h_theta | eta> = c_theta`.
    pub fn pairing_h(&self, theta: usize) -> f64 {
        self.coeffs.get(&theta).copied().unwrap_or(0.0)
    }

    pub fn check(&self, spec: &GroupSpec) -> Result<()> {
        for (&t, &c) in &self.coeffs {
            spec.check_theta(t)?;
            if c < 0.0 {
                return Err(Error::Domain(format!("negative coefficient at root {t}")));
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &WeightForm) -> WeightForm {
        let mut m = self.coeffs.clone();
        for (&t, &c) in &other.coeffs {
            *m.entry(t).or_insert(0.0) += c;
        }
        WeightForm { coeffs: m }
    }

    /// Parses `"1:2,2:0.5"` or a fundamental weight index `"2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (t, c) = match part.split_once(':') {
                Some((t, c)) => (t.trim(), c.trim()),
                None => (part, "1"),
            };
            let t: usize = t.parse().map_err(|_| Error::Parse(format!("bad root index {t:?}")))?;
            let c: f64 = c.parse().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?;
            out.push((t, c));
        }
        WeightForm::new(out)
    }
}

/// `(x_plus, x_minus, h)` with `[h, x±] = ±2 x±` and `[x_plus, x_minus] = h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Sl2Triple<T: Scalar> {
    pub x_plus: Mat<T>,
    pub x_minus: Mat<T>,
    pub h: Mat<T>,
}

impl<T: Scalar> Sl2Triple<T> {
    /// Largest defect in the three bracket relations.
    pub fn defect(&self) -> f64 {
        let two = T::from_i64(2);
        let a = &self.h.commutator(&self.x_plus).unwrap() - &self.x_plus.scale(&two);
        let b = &self.h.commutator(&self.x_minus).unwrap() + &self.x_minus.scale(&two);
        let c = &self.x_plus.commutator(&self.x_minus).unwrap() - &self.h;
        a.max_abs().max(b.max_abs()).max(c.max_abs())
    }

    /// Weyl representative `exp(pi/2 (x_plus - x_minus))`; exact because the generator
    /// rotates disjoint coordinate planes.
    pub fn weyl_rep(&self) -> Mat<T> {
        let r = &self.x_plus - &self.x_minus;
        let r2 = &r * &r;
        &(&Mat::identity(r.rows()) + &r) + &r2
    }

    /// `exp(t x_minus)`.
    pub fn lower(&self, t: &T) -> Mat<T> {
        numlin::unipotent_exp(&self.x_minus.scale(t)).expect("root vector is nilpotent")
    }

    /// `exp(t x_plus)`.
    pub fn upper(&self, t: &T) -> Mat<T> {
        numlin::unipotent_exp(&self.x_plus.scale(t)).expect("root vector is nilpotent")
    }

    pub fn conjugate(&self, c: &Mat<T>, c_inv: &Mat<T>) -> Sl2Triple<T> {
        let f = |m: &Mat<T>| &(c * m) * c_inv;
        Sl2Triple { x_plus: f(&self.x_plus), x_minus: f(&self.x_minus), h: f(&self.h) }
    }

    pub fn to_f64(&self) -> Sl2Triple<f64> {
        Sl2Triple { x_plus: self.x_plus.to_f64(), x_minus: self.x_minus.to_f64(), h: self.h.to_f64() }
    }
}

pub fn sl2_triple<T: Scalar>(spec: &GroupSpec, theta: usize) -> Result<Sl2Triple<T>> {
    spec.check_theta(theta)?;
    let n = spec.dim();
    let e = |i: usize, j: usize| Mat::<T>::unit(n, i, j);
    let (xp, h) = match spec.group() {
        Group::SL { .. } => {
            let k = theta - 1;
            (e(k, k + 1), &e(k, k) - &e(k + 1, k + 1))
        }
        Group::Sp { n: h } => (e(h - 1, 2 * h - 1), &e(h - 1, h - 1) - &e(2 * h - 1, 2 * h - 1)),
        Group::SO { .. } => {
            let (a, b) = (theta - 1, theta);
            let (ra, rb) = (n - 1 - a, n - 1 - b);
            let xp = &e(a, b) - &e(rb, ra);
            let h = &(&(&e(a, a) - &e(b, b)) + &e(rb, rb)) - &e(ra, ra);
            (xp, h)
        }
    };
    let xm = xp.transpose();
    Ok(Sl2Triple { x_plus: xp, x_minus: xm, h })
}

/// Symmetric-power representation `SL(2) -> SL(n)` in the binomially scaled monomial basis
/// `b_i = C(n-1, i) x^{n-1-i} y^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrincipalEmbedding {
    pub n: usize,
}

pub fn principal_embedding(n: usize) -> Result<PrincipalEmbedding> {
    if n < 2 {
        return Err(Error::Domain(format!("principal embedding needs n >= 2, got {n}")));
    }
    Ok(PrincipalEmbedding { n })
}

impl PrincipalEmbedding {
    pub fn apply<T: Scalar>(&self, g: &Mat<T>) -> Result<Mat<T>> {
        if g.rows() != 2 || g.cols() != 2 {
            return Err(Error::Dimension("principal embedding takes 2x2 matrices".into()));
        }
        let d = self.n - 1;
        let (a, b, c, dd) = (g[(0, 0)].clone(), g[(0, 1)].clone(), g[(1, 0)].clone(), g[(1, 1)].clone());
        let mut out = Mat::zeros(self.n, self.n);
        for j in 0..=d {
            // (a x + c y)^{d-j} (b x + dd y)^j, coefficients indexed by power of y
            let p1 = binom_power(&a, &c, d - j);
            let p2 = binom_power(&b, &dd, j);
            let mut prod = vec![T::zero(); d + 1];
            for (i1, u) in p1.iter().enumerate() {
                for (i2, v) in p2.iter().enumerate() {
                    prod[i1 + i2] = prod[i1 + i2].clone() + u.clone() * v.clone();
                }
            }
            let cj = T::from_i64(binomial(d, j));
            for (i, v) in prod.into_iter().enumerate() {
                out[(i, j)] = v * cj.clone() / T::from_i64(binomial(d, i));
            }
        }
        Ok(out)
    }

    /// Image of a Lie algebra element (the derivative of `apply`).
    pub fn apply_algebra<T: Scalar>(&self, x: &Mat<T>) -> Result<Mat<T>> {
        let d = self.n - 1;
        if x.rows() != 2 || x.cols() != 2 {
            return Err(Error::Dimension("principal embedding takes 2x2 matrices".into()));
        }
        let (a, b, c, dd) = (x[(0, 0)].clone(), x[(0, 1)].clone(), x[(1, 0)].clone(), x[(1, 1)].clone());
        let mut out = Mat::zeros(self.n, self.n);
        for i in 0..=d {
            out[(i, i)] = a.clone() * T::from_i64((d - i) as i64) + dd.clone() * T::from_i64(i as i64);
            if i < d {
                out[(i, i + 1)] = b.clone() * T::from_i64((d - i) as i64);
                out[(i + 1, i)] = c.clone() * T::from_i64((i + 1) as i64);
            }
        }
        Ok(out)
    }
}

fn binom_power<T: Scalar>(u: &T, v: &T, k: usize) -> Vec<T> {
    // (u x + v y)^k coefficients by power of y
    (0..=k)
        .map(|i| {
            let mut t = T::from_i64(binomial(k, i));
            for _ in 0..k - i {
                t = t * u.clone();
            }
            for _ in 0..i {
                t = t * v.clone();
            }
            t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triples_satisfy_brackets() {
        for spec in [GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap(), GroupSpec::so(3, 4).unwrap(), GroupSpec::so(3, 6).unwrap()] {
            for &t in spec.theta() {
                let tr = sl2_triple::<Rational>(&spec, t).unwrap();
                assert_eq!(tr.defect(), 0.0, "{spec} {t}");
                spec.check_algebra(&tr.x_plus, 0.0).unwrap();
                spec.check_algebra(&tr.h, 0.0).unwrap();
                spec.check_element(&tr.weyl_rep(), 0.0).unwrap();
            }
        }
    }

    #[test]
    fn sl2_is_defining() {
        let tr = sl2_triple::<Rational>(&GroupSpec::sl(2).unwrap(), 1).unwrap();
        assert_eq!(tr.x_plus, Mat::from_i64(&[&[0, 1], &[0, 0]]));
        assert_eq!(tr.h, Mat::from_i64(&[&[1, 0], &[0, -1]]));
    }

    #[test]
    fn sp4_long_root_plane() {
        let tr = sl2_triple::<Rational>(&GroupSpec::sp(2).unwrap(), 2).unwrap();
        // support on e2 (index 1) and f2 (index 3)
        for i in 0..4 {
            for j in 0..4 {
                if ![1, 3].contains(&i) || ![1, 3].contains(&j) {
                    assert_eq!(tr.h[(i, j)], rat(0, 1));
                    assert_eq!(tr.x_plus[(i, j)], rat(0, 1));
                }
            }
        }
    }

    #[test]
    fn theta_outside_is_rejected() {
        let spec = GroupSpec::sp(2).unwrap();
        assert!(sl2_triple::<f64>(&spec, 1).is_err());
        assert!(GroupSpec::new(Group::SO { p: 3, q: 4 }, vec![3]).is_err());
    }

    #[test]
    fn pairing_h_reads_coefficients() {
        let eta = WeightForm::new([(1, 3.0), (2, 2.0)]).unwrap();
        assert_eq!(eta.pairing_h(2), 2.0);
        assert_eq!(WeightForm::fundamental(1).pairing_h(1), 1.0);
        assert_eq!(WeightForm::zero().pairing_h(1), 0.0);
        assert!(WeightForm::new([(1, -1.0)]).is_err());
    }

    #[test]
    fn spec_json() {
        let s = GroupSpec::so(3, 4).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"family":"SO","p":3,"q":4,"theta":[1,2]}"#);
        let back: GroupSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!("Sp4".parse::<GroupSpec>().unwrap(), GroupSpec::sp(2).unwrap());
        assert_eq!("SO(3,4)".parse::<GroupSpec>().unwrap(), s);
        assert!("SU3".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn forms_have_signature() {
        let q = GroupSpec::so(3, 4).unwrap().form::<f64>().unwrap();
        // hyperbolic pairs (0,6),(1,5),(2,4) and one negative middle coordinate
        assert_eq!(q[(0, 6)], 1.0);
        assert_eq!(q[(2, 4)], 1.0);
        assert_eq!(q[(3, 3)], -2.0);
        assert_eq!(numlin::det(&q).unwrap(), 2.0);
    }

    #[test]
    fn principal_small_cases() {
        let e = principal_embedding(3).unwrap();
        let u: Mat<Rational> = Mat::from_i64(&[&[1, 1], &[0, 1]]);
        assert_eq!(e.apply(&u).unwrap(), Mat::from_i64(&[&[1, 2, 1], &[0, 1, 1], &[0, 0, 1]]));
        let t = rat(3, 1);
        let d = Mat::diag(&[t.clone(), rat(1, 3)]);
        assert_eq!(e.apply(&d).unwrap(), Mat::diag(&[rat(9, 1), rat(1, 1), rat(1, 9)]));
        let e2 = principal_embedding(2).unwrap();
        let g: Mat<Rational> = Mat::from_i64(&[&[2, 3], &[1, 2]]);
        assert_eq!(e2.apply(&g).unwrap(), g);
    }

    #[test]
    fn principal_algebra_is_derivative() {
        let e = principal_embedding(4).unwrap();
        let x: Mat<Rational> = Mat::from_i64(&[&[0, 1], &[0, 0]]);
        assert_eq!(numlin::unipotent_exp(&e.apply_algebra(&x).unwrap()).unwrap(), e.apply(&numlin::unipotent_exp(&x).unwrap()).unwrap());
        let y = x.transpose();
        assert_eq!(numlin::unipotent_exp(&e.apply_algebra(&y).unwrap()).unwrap(), e.apply(&numlin::unipotent_exp(&y).unwrap()).unwrap());
    }

    #[test]
    fn characters_of_diagonal() {
        let spec = GroupSpec::sl(3).unwrap();
        let g = Mat::diag(&[4.0, 2.0, 1.0]);
        let a = spec.jordan_projection(&g, 1e-10).unwrap();
        let m = (8f64).ln() / 3.0;
        assert!((a[0] - (4f64.ln() - m)).abs() < 1e-14);
        assert!((spec.root_character(1, &g, 1e-10).unwrap() - 2.0).abs() < 1e-14);
        let w1 = WeightForm::fundamental(1);
        let chi = spec.character(&w1, &g, 1e-10).unwrap();
        assert!((chi - 2.0).abs() < 1e-13);
        let gi = numlin::inverse(&g).unwrap();
        let period = chi * spec.character(&w1, &gi, 1e-10).unwrap();
        assert!((period - 4.0).abs() < 1e-13);
    }

    #[test]
    fn non_loxodromic_names_root() {
        let spec = GroupSpec::sl(3).unwrap();
        let g = Mat::diag(&[2.0, 2.0, 0.25]);
        match spec.root_character(2, &g, 1e-10) {
            Err(Error::Domain(m)) => assert!(m.contains("root 1"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn principal_jordan_projection() {
        let spec = GroupSpec::sl(3).unwrap();
        let g = principal_embedding(3).unwrap().apply(&Mat::diag(&[2.0, 0.5])).unwrap();
        let a = spec.jordan_projection(&g, 1e-10).unwrap();
        assert!((a[0] - 4f64.ln()).abs() < 1e-14 && a[1].abs() < 1e-14);
    }

    #[test]
    fn random_elements_in_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [GroupSpec::sl(3).unwrap(), GroupSpec::sp(3).unwrap(), GroupSpec::so(3, 5).unwrap()] {
            let g = spec.random_element(&mut rng, 0.5);
            spec.check_element(&g, 1e-10).unwrap();
            let a = [1.5, 0.7, 0.2];
            let t = spec.torus_element(&a[..spec.cartan_dim()]).unwrap();
            spec.check_element(&t, 1e-12).unwrap();
        }
    }

    #[test]
    fn project_b_theta_kills_complement() {
        let spec = GroupSpec::so(3, 4).unwrap();
        let h3 = Mat::diag(&[0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0]);
        let p = spec.project_b_theta(&h3, 1e-12).unwrap();
        assert!(p.max_abs() < 1e-14);
        let x = Mat::diag(&[1.0, 0.5, 0.25, 0.0, -0.25, -0.5, -1.0]);
        let p = spec.project_b_theta(&x, 1e-12).unwrap();
        assert!(p[(2, 2)].abs() < 1e-14);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
        let pp = spec.project_b_theta(&p, 1e-12).unwrap();
        assert!(pp.approx_eq(&p, 1e-14));

        let sp = GroupSpec::sp(2).unwrap();
        let p = sp.project_b_theta(&Mat::diag(&[1.0, 0.0, -1.0, 0.0]), 1e-12).unwrap();
        assert!(p.approx_eq(&Mat::diag(&[0.5, 0.5, -0.5, -0.5]), 1e-14));

        let sl = GroupSpec::sl(3).unwrap();
        let d = Mat::diag(&[1.0, -0.25, -0.75]);
        assert!(sl.project_b_theta(&d, 1e-12).unwrap().approx_eq(&d, 1e-14));
        assert!(sl.project_b_theta(&Mat::diag(&[1.0, 0.0, 0.0]), 1e-12).is_err());
    }
}
