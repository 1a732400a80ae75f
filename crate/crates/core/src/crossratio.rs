//! Projective and weight cross-ratios, form cross-ratios and periods.

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::flags::{act, eigenflag, normalized_pairing, pairing, Flag};
use crate::lie::{GroupSpec, WeightForm};
use crate::numlin::Mat;
use crate::scalar::Scalar;

/// `(x, y, X, Y)`; `opp_x`, `opp_y` are the opposite-side arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadruple<T: Scalar> {
    pub x: Flag<T>,
    pub y: Flag<T>,
    pub opp_x: Flag<T>,
    pub opp_y: Flag<T>,
}

impl<T: Scalar> Quadruple<T> {
    pub fn new(x: Flag<T>, y: Flag<T>, opp_x: Flag<T>, opp_y: Flag<T>) -> Result<Self> {
        let spec = x.spec();
        if [&y, &opp_x, &opp_y].iter().any(|f| f.spec() != spec) {
            return Err(Error::Domain("quadruple mixes group specs".into()));
        }
        Ok(Quadruple { x, y, opp_x, opp_y })
    }

    pub fn spec(&self) -> &GroupSpec {
        self.x.spec()
    }

    pub fn act(&self, g: &Mat<T>) -> Result<Self> {
        Ok(Quadruple { x: act(g, &self.x)?, y: act(g, &self.y)?, opp_x: act(g, &self.opp_x)?, opp_y: act(g, &self.opp_y)? })
    }

    pub fn to_f64(&self) -> Quadruple<f64> {
        Quadruple { x: self.x.to_f64(), y: self.y.to_f64(), opp_x: self.opp_x.to_f64(), opp_y: self.opp_y.to_f64() }
    }

    pub fn to_json(&self) -> Value {
        json!({"x": self.x.to_json(), "y": self.y.to_json(), "X": self.opp_x.to_json(), "Y": self.opp_y.to_json()})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| -> Result<Flag<T>> {
            Flag::from_json(v.get(k).ok_or_else(|| Error::Parse(format!("quadruple without {k:?}")))?)
        };
        Quadruple::new(get("x")?, get("y")?, get("X")?, get("Y")?)
    }
}

/// Projective cross-ratio of lines `x, y` and hyperplanes (covectors) `X, Y`.
pub fn proj_cr<T: Scalar>(x: &[T], y: &[T], cx: &[T], cy: &[T]) -> Result<T> {
    let n = x.len();
    if [y.len(), cx.len(), cy.len()].iter().any(|&l| l != n) {
        return Err(Error::Dimension("cross-ratio arguments of different lengths".into()));
    }
    let ev = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (u, v)| s + u.clone() * v.clone());
    let den = ev(y, cx) * ev(x, cy);
    if den.is_zero() {
        return Err(Error::NotTransverse("vanishing pairing in cross-ratio".into()));
    }
    Ok(ev(x, cx) * ev(y, cy) / den)
}

/// Cross-ratio of the fundamental weight of `theta`.
pub fn weight_cr<T: Scalar>(theta: usize, q: &Quadruple<T>) -> Result<T> {
    q.spec().check_theta(theta)?;
    let d1 = pairing(theta, &q.y, &q.opp_x)?;
    let d2 = pairing(theta, &q.x, &q.opp_y)?;
    if d1.is_zero() || d2.is_zero() {
        return Err(Error::NotTransverse(format!("denominator vanishes at root {theta}")));
    }
    if !T::EXACT {
        let (y, cx, x, cy) = (q.y.to_f64(), q.opp_x.to_f64(), q.x.to_f64(), q.opp_y.to_f64());
        let m = normalized_pairing(theta, &y, &cx)?.abs().min(normalized_pairing(theta, &x, &cy)?.abs());
        if m <= 1e-13 {
            return Err(Error::NotTransverse(format!("denominator vanishes at root {theta} (margin {m:e})")));
        }
    }
    let n1 = pairing(theta, &q.x, &q.opp_x)?;
    let n2 = pairing(theta, &q.y, &q.opp_y)?;
    Ok(n1 * n2 / (d1 * d2))
}

/// `b^eta = prod weight_cr(theta)^{c_theta}`.
pub fn form_cr<T: Scalar>(eta: &WeightForm, q: &Quadruple<T>) -> Result<f64> {
    eta.check(q.spec())?;
    let mut out = 1.0;
    for (&t, &c) in &eta.coeffs {
        out *= real_power(weight_cr(t, q)?.to_f64(), c)?;
    }
    Ok(out)
}

/// `b^c`, with integer exponents allowed on negative bases.
pub fn real_power(b: f64, c: f64) -> Result<f64> {
    if c == c.round() && c.abs() < 1e6 {
        Ok(b.powi(c as i32))
    } else if b > 0.0 {
        Ok(b.powf(c))
    } else {
        Err(Error::Domain(format!("non-integral power {c} of non-positive cross-ratio {b}")))
    }
}

/// `b^eta(g+, g-, aux, g aux)`.
pub fn period(spec: &GroupSpec, eta: &WeightForm, g: &Mat<f64>, aux: &Flag<f64>, tol: f64) -> Result<f64> {
    let (plus, minus) = eigenflag(spec, g, tol)?;
    period_with(eta, g, &plus, &minus, aux)
}

/// Period with precomputed fixed flags.
pub fn period_with(eta: &WeightForm, g: &Mat<f64>, plus: &Flag<f64>, minus: &Flag<f64>, aux: &Flag<f64>) -> Result<f64> {
    let q = Quadruple::new(plus.clone(), minus.clone(), aux.clone(), act(g, aux)?)?;
    form_cr(eta, &q)
}

/// `max |b(x,w,X,Y) b(w,y,X,Y) / b(x,y,X,Y) - 1|` and the same for the second identity,
/// over the fundamental weights of `theta`.
pub fn cocycle_residual(x: &Flag<f64>, w: &Flag<f64>, y: &Flag<f64>, cx: &Flag<f64>, cw: &Flag<f64>, cy: &Flag<f64>) -> Result<(f64, f64)> {
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for &t in x.spec().theta() {
        let b = |a: &Flag<f64>, b: &Flag<f64>, c: &Flag<f64>, d: &Flag<f64>| {
            weight_cr(t, &Quadruple::new(a.clone(), b.clone(), c.clone(), d.clone())?)
        };
        let full = b(x, y, cx, cy)?;
        r1 = r1.max((b(x, w, cx, cy)? * b(w, y, cx, cy)? / full - 1.0).abs());
        r2 = r2.max((b(x, y, cx, cw)? * b(x, y, cw, cy)? / full - 1.0).abs());
    }
    Ok((r1, r2))
}

/// Vectors and covectors `(x, y, X, Y)` in one factor of a tensor product.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub cx: Vec<f64>,
    pub cy: Vec<f64>,
}

impl ProjSample {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let mut v = || (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>();
        ProjSample { x: v(), y: v(), cx: v(), cy: v() }
    }

    pub fn cr(&self) -> Result<f64> {
        proj_cr(&self.x, &self.y, &self.cx, &self.cy)
    }
}

fn kron(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|u| b.iter().map(move |v| u * v)).collect()
}

/// `|b^{E1 (x) E2} - b^{E1} b^{E2}|` on Kronecker products.
pub fn tensor_cr_check(e1: &ProjSample, e2: &ProjSample) -> Result<f64> {
    let t = proj_cr(&kron(&e1.x, &e2.x), &kron(&e1.y, &e2.y), &kron(&e1.cx, &e2.cx), &kron(&e1.cy, &e2.cy))?;
    Ok((t - e1.cr()? * e2.cr()?).abs())
}

/// Recombines each basis of a flag by a random invertible upper triangular matrix
/// (the span of every member is preserved).
pub fn rebase<R: Rng + ?Sized>(x: &Flag<f64>, rng: &mut R) -> Result<Flag<f64>> {
    let top = x.subspaces().last().expect("nonempty flag");
    let d = top.cols();
    let u = Mat::from_fn(d, d, |i, j| {
        if i == j {
            (0.5 + rng.random::<f64>()) * if rng.random::<bool>() { 1.0 } else { -1.0 }
        } else if i < j {
            rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    });
    let nt = top * &u;
    let subs: Vec<Mat<f64>> = x.subspaces().iter().map(|m| nt.cols_range(0, m.cols())).collect();
    Flag::new(x.spec().clone(), subs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flags::{p1_point, standard_pair, veronese_flag};
    use crate::lie::principal_embedding;
    use crate::scalar::{rat, Rational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(t: Option<f64>) -> Vec<f64> {
        match t {
            Some(t) => vec![t, 1.0],
            None => vec![1.0, 0.0],
        }
    }
    fn hyper(t: Option<f64>) -> Vec<f64> {
        match t {
            Some(t) => vec![1.0, -t],
            None => vec![0.0, 1.0],
        }
    }

    #[test]
    fn p1_normalization() {
        for z in [2.0, -0.5, 7.0] {
            let v = proj_cr(&line(None), &line(Some(0.0)), &hyper(Some(1.0)), &hyper(Some(z))).unwrap();
            assert!((v - z).abs() < 1e-14);
        }
        let v = proj_cr(&line(Some(3.0)), &line(Some(3.0)), &hyper(Some(1.0)), &hyper(Some(5.0))).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn affine_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let [x, y, cx, cy]: [f64; 4] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
            let v = proj_cr(&line(Some(x)), &line(Some(y)), &hyper(Some(cx)), &hyper(Some(cy))).unwrap();
            let want = (cx - x) * (cy - y) / ((cx - y) * (cy - x));
            assert!((v - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn scaling_invariance() {
        let v = proj_cr(&[1.0, 2.0], &[3.0, -1.0], &[1.0, 1.0], &[2.0, 5.0]).unwrap();
        let w = proj_cr(&[-2.0, -4.0], &[3.0, -1.0], &[7.0, 7.0], &[2.0, 5.0]).unwrap();
        assert!((v - w).abs() < 1e-14);
        assert!(proj_cr(&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    fn veronese(n: usize, t: Option<i64>) -> Flag<Rational> {
        veronese_flag(n, p1_point(t.map(|v| rat(v, 1)))).unwrap()
    }

    #[test]
    fn sl2_matches_projective() {
        let q = Quadruple::new(veronese(2, None), veronese(2, Some(0)), veronese(2, Some(1)), veronese(2, Some(5))).unwrap();
        assert_eq!(weight_cr(1, &q).unwrap(), rat(5, 1));
    }

    #[test]
    fn veronese_sl3_through_sym2() {
        // oracle: the first fundamental weight of SL(3) restricted to the principal SL(2)
        // is the second power of the projective cross-ratio; the line x^2 and the plane
        // annihilated by its dual are built directly in Sym^2 coordinates.
        let pts = [None, Some(1), Some(0), Some(-1)];
        let q = Quadruple::new(veronese(3, pts[0]), veronese(3, pts[1]), veronese(3, pts[2]), veronese(3, pts[3])).unwrap();
        let sq = |t: Option<i64>| -> Vec<f64> {
            let (a, b) = match t {
                Some(t) => (t as f64, 1.0),
                None => (1.0, 0.0),
            };
            vec![a * a, a * b, b * b]
        };
        // the hyperplane osculating at (a,b): covector dual to coordinates (b^2, -2ab... ) via
        // evaluation pairing <v, X> = det-like form; use the polarization of (a y - b x)^2
        let hyp = |t: Option<i64>| -> Vec<f64> {
            let (a, b) = match t {
                Some(t) => (t as f64, 1.0),
                None => (1.0, 0.0),
            };
            // (b x - a y)^2 paired with b_i-coordinates (c0 x^2 + 2 c1 xy + c2 y^2)
            vec![b * b, -2.0 * a * b, a * a]
        };
        let direct = proj_cr(&sq(pts[0]), &sq(pts[1]), &hyp(pts[2]), &hyp(pts[3])).unwrap();
        let p1 = proj_cr(&line(None), &line(Some(1.0)), &hyper(Some(0.0)), &hyper(Some(-1.0))).unwrap();
        assert!((direct - p1 * p1).abs() < 1e-14);
        let b1 = weight_cr(1, &q).unwrap();
        let b2 = weight_cr(2, &q).unwrap();
        assert_eq!(b1, rat(4, 1));
        assert_eq!(b2, rat(4, 1));
        assert!((b1.to_f64() - direct).abs() < 1e-14);
    }

    #[test]
    fn degenerate_is_one() {
        let q = Quadruple::new(veronese(3, Some(2)), veronese(3, Some(2)), veronese(3, Some(0)), veronese(3, Some(-3))).unwrap();
        assert_eq!(weight_cr(2, &q).unwrap(), rat(1, 1));
    }

    #[test]
    fn form_products() {
        let q = Quadruple::new(veronese(3, None), veronese(3, Some(2)), veronese(3, Some(0)), veronese(3, Some(-3))).unwrap();
        let b1 = weight_cr(1, &q).unwrap().to_f64();
        let b2 = weight_cr(2, &q).unwrap().to_f64();
        let eta = WeightForm::new([(1, 1.0), (2, 1.0)]).unwrap();
        assert!((form_cr(&eta, &q).unwrap() - b1 * b2).abs() < 1e-12);
        let two = WeightForm::new([(1, 2.0)]).unwrap();
        assert!((form_cr(&two, &q).unwrap() - b1 * b1).abs() < 1e-12);
    }

    #[test]
    fn period_examples() {
        let spec = GroupSpec::sl(2).unwrap();
        let g = Mat::diag(&[3.0, 1.0 / 3.0]);
        let aux = veronese_flag(2, [1.0, 1.0]).unwrap();
        let p = period(&spec, &WeightForm::fundamental(1), &g, &aux, 1e-10).unwrap();
        assert!((p - 9.0).abs() < 1e-12);

        let spec = GroupSpec::sl(3).unwrap();
        let g = Mat::diag(&[4.0, 2.0, 1.0]);
        let aux = veronese_flag(3, [1.0, 1.0]).unwrap();
        let p = period(&spec, &WeightForm::fundamental(1), &g, &aux, 1e-10).unwrap();
        assert!((p - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = ProjSample::random(&mut rng, 2);
        let b = ProjSample::random(&mut rng, 2);
        assert!(tensor_cr_check(&a, &b).unwrap() < 1e-12 * (a.cr().unwrap() * b.cr().unwrap()).abs().max(1.0));
        let mut d = a.clone();
        d.y = d.x.clone();
        assert_eq!(d.cr().unwrap(), 1.0);
        assert!(tensor_cr_check(&d, &b).unwrap() < 1e-12 * b.cr().unwrap().abs().max(1.0));
    }

    #[test]
    fn invariance_and_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for spec in [GroupSpec::sl(4).unwrap(), GroupSpec::sp(2).unwrap(), GroupSpec::so(3, 4).unwrap()] {
            let (p, _) = standard_pair::<f64>(&spec);
            let f: Vec<Flag<f64>> = (0..6).map(|_| act(&spec.random_element(&mut rng, 0.7), &p).unwrap()).collect();
            let (r1, r2) = cocycle_residual(&f[0], &f[1], &f[2], &f[3], &f[4], &f[5]).unwrap();
            assert!(r1 < 1e-10 && r2 < 1e-10, "{spec} {r1} {r2}");
            let q = Quadruple::new(f[0].clone(), f[1].clone(), f[2].clone(), f[3].clone()).unwrap();
            let g = spec.random_element(&mut rng, 0.7);
            let eta = WeightForm::fundamental(spec.theta()[0]);
            let a = form_cr(&eta, &q).unwrap();
            let b = form_cr(&eta, &q.act(&g).unwrap()).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10);
            let q2 = Quadruple::new(rebase(&f[0], &mut rng).unwrap(), f[1].clone(), rebase(&f[2], &mut rng).unwrap(), f[3].clone()).unwrap();
            assert!((form_cr(&eta, &q2).unwrap() / a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn principal_period_is_power() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let g = principal_embedding(4).unwrap().apply(&a).unwrap();
        let spec = GroupSpec::sl(4).unwrap();
        let l2 = ((3.0 + 5f64.sqrt()) / 2.0f64).powi(2);
        let aux = veronese_flag(4, [0.3, 1.0]).unwrap();
        // omega_1 period = lambda_1 / lambda_4 = l^3 / l^-3 in terms of the 2x2 eigenvalue l
        let p = period(&spec, &WeightForm::fundamental(1), &g, &aux, 1e-10).unwrap();
        assert!((p / l2.powi(3) - 1.0).abs() < 1e-10);
    }
}
