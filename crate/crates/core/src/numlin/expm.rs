use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `exp(x)` for nilpotent `x` as the finite sum `sum x^k / k!`.
pub fn unipotent_exp<T: Scalar>(x: &Mat<T>) -> Result<Mat<T>> {
    if !x.is_square() {
        return Err(Error::Dimension(format!("exp of {}x{}", x.rows(), x.cols())));
    }
    let n = x.rows();
    let mut out = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=n {
        term = term.matmul(x)?.scale(&(T::one() / T::from_i64(k as i64)));
        if term.data().iter().all(|v| v.is_zero()) {
            return Ok(out);
        }
        out = &out + &term;
    }
    if T::EXACT || term.max_abs() > 1e-12 * out.max_abs().max(1.0) {
        return Err(Error::Domain("matrix is not nilpotent".into()));
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring a Taylor polynomial.
pub fn expm(a: &Mat<f64>) -> Result<Mat<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("exp of {}x{}", a.rows(), a.cols())));
    }
    if !a.is_finite() {
        return Err(Error::numeric("non-finite input to expm", f64::NAN));
    }
    let n = a.rows();
    let norm = a.norm1();
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(&(0.5f64).powi(s));
    let mut out = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=20 {
        term = (&term * &scaled).scale(&(1.0 / k as f64));
        out = &out + &term;
        if term.max_abs() < 1e-18 * out.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        out = &out * &out;
    }
    if !out.is_finite() {
        return Err(Error::numeric("expm overflow", norm));
    }
    Ok(out)
}

/// Orthonormal basis of the column span (modified Gram-Schmidt with reorthogonalization).
/// Columns whose residual falls under `tol` relative to their norm are dropped.
pub fn orthonormalize(m: &Mat<f64>, tol: f64) -> Mat<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.col(j);
        let n0 = norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv <= tol * n0 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / nv).collect());
    }
    if basis.is_empty() {
        return Mat::zeros(m.rows(), 0);
    }
    Mat::from_cols(&basis).expect("equal lengths")
}

/// Householder QR with column pivoting; returns `Q` restricted to the first `k` columns
/// of the pivoted factorization.
pub fn pivoted_range(m: &Mat<f64>, k: usize) -> Mat<f64> {
    let (r, c) = (m.rows(), m.cols());
    let mut cols: Vec<Vec<f64>> = (0..c).map(|j| m.col(j)).collect();
    let mut q: Vec<Vec<f64>> = Vec::new();
    for _ in 0..k.min(c) {
        let (best, _) = cols
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let v = cols.swap_remove(best);
        let nv = norm(&v);
        if nv == 0.0 {
            break;
        }
        let u: Vec<f64> = v.iter().map(|x| x / nv).collect();
        for w in cols.iter_mut() {
            let d = dot(&u, w);
            for (wi, ui) in w.iter_mut().zip(&u) {
                *wi -= d * ui;
            }
        }
        q.push(u);
    }
    if q.is_empty() {
        return Mat::zeros(r, 0);
    }
    orthonormalize(&Mat::from_cols(&q).expect("equal lengths"), 1e-14)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}
