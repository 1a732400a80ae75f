use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Determinant: fraction-free elimination for exact scalars, pivoted LU for floats.
pub fn det<T: Scalar>(m: &Mat<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("det of {}x{}", m.rows(), m.cols())));
    }
    if T::EXACT {
        det_bareiss(m)
    } else {
        det_lu(m)
    }
}

/// Bareiss fraction-free elimination. Every intermediate is a minor of `m`.
pub fn det_bareiss<T: Scalar>(m: &Mat<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("det of {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(T::one());
    }
    let mut a = m.clone();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                return Ok(T::zero());
            };
            for j in 0..n {
                let t = a[(k, j)].clone();
                a[(k, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                a[(i, j)] = v / prev.clone();
            }
        }
        prev = a[(k, k)].clone();
    }
    Ok(sign * a[(n - 1, n - 1)].clone())
}

/// LU with partial pivoting.
pub fn det_lu<T: Scalar>(m: &Mat<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("det of {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut d = T::one();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs_f64().total_cmp(&a[(j, k)].abs_f64()))
            .unwrap_or(k);
        if a[(p, k)].is_zero() {
            return Ok(T::zero());
        }
        if p != k {
            for j in 0..n {
                let t = a[(k, j)].clone();
                a[(k, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
            }
            d = -d;
        }
        let piv = a[(k, k)].clone();
        d = d * piv.clone();
        for i in k + 1..n {
            let f = a[(i, k)].clone() / piv.clone();
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                a[(i, j)] = v;
            }
        }
    }
    Ok(d)
}

/// Minor on row set `rows` and column set `cols` (zero-based, any order).
pub fn minor<T: Scalar>(m: &Mat<T>, rows: &[usize], cols: &[usize]) -> Result<T> {
    if rows.len() != cols.len() {
        return Err(Error::Dimension(format!("minor with {} rows, {} cols", rows.len(), cols.len())));
    }
    if let Some(&i) = rows.iter().find(|&&i| i >= m.rows()) {
        return Err(Error::Index(format!("row {i} of {}", m.rows())));
    }
    if let Some(&j) = cols.iter().find(|&&j| j >= m.cols()) {
        return Err(Error::Index(format!("column {j} of {}", m.cols())));
    }
    det(&m.select(rows, cols))
}

/// Determinant of the column concatenation `[a | b]`.
pub fn concat_det<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<T> {
    if a.rows() != b.rows() || a.cols() + b.cols() != a.rows() {
        return Err(Error::Dimension(format!(
            "concat of {}x{} and {}x{} is not square",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    det(&Mat::hcat(&[a, b])?)
}

/// Reduced row echelon form and pivot columns. Entries with `|x| <= tol` count as zero.
pub fn rref<T: Scalar>(m: &Mat<T>, tol: f64) -> (Mat<T>, Vec<usize>) {
    let mut a = m.clone();
    let (r, c) = (a.rows(), a.cols());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..c {
        if row == r {
            break;
        }
        let p = (row..r)
            .max_by(|&i, &j| a[(i, col)].abs_f64().total_cmp(&a[(j, col)].abs_f64()))
            .unwrap();
        if a[(p, col)].is_negligible(tol) {
            for i in row..r {
                a[(i, col)] = T::zero();
            }
            continue;
        }
        if p != row {
            for j in 0..c {
                let t = a[(row, j)].clone();
                a[(row, j)] = a[(p, j)].clone();
                a[(p, j)] = t;
            }
        }
        let piv = a[(row, col)].clone();
        for j in 0..c {
            a[(row, j)] = a[(row, j)].clone() / piv.clone();
        }
        for i in 0..r {
            if i == row || a[(i, col)].is_zero() {
                continue;
            }
            let f = a[(i, col)].clone();
            for j in 0..c {
                let v = a[(i, j)].clone() - f.clone() * a[(row, j)].clone();
                a[(i, j)] = v;
            }
            a[(i, col)] = T::zero();
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub fn rank<T: Scalar>(m: &Mat<T>, tol: f64) -> usize {
    if T::EXACT {
        return rref(m, 0.0).1.len();
    }
    let f = m.to_f64();
    let scale = f.max_abs().max(f64::MIN_POSITIVE);
    rref(&f.scale(&(1.0 / scale)), tol).1.len()
}

/// Basis of the right null space as columns.
pub fn null_space<T: Scalar>(m: &Mat<T>, tol: f64) -> Mat<T> {
    let (a, pivots) = rref(m, tol);
    let c = m.cols();
    let free: Vec<usize> = (0..c).filter(|j| !pivots.contains(j)).collect();
    let mut out = Mat::zeros(c, free.len());
    for (k, &f) in free.iter().enumerate() {
        out[(f, k)] = T::one();
        for (r, &p) in pivots.iter().enumerate() {
            out[(p, k)] = -a[(r, f)].clone();
        }
    }
    out
}

/// Solves `a x = b` for square invertible `a`.
pub fn solve<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let n = a.rows();
    let aug = Mat::hcat(&[a, b])?;
    let (r, pivots) = rref(&aug, if T::EXACT { 0.0 } else { 1e-300 });
    if pivots.len() < n || pivots[n - 1] >= n {
        return Err(Error::Domain("singular system".into()));
    }
    Ok(r.cols_range(n, n + b.cols()))
}

pub fn inverse<T: Scalar>(a: &Mat<T>) -> Result<Mat<T>> {
    solve(a, &Mat::identity(a.rows()))
}

/// Column space basis of `m` as a subset of its columns.
pub fn column_basis<T: Scalar>(m: &Mat<T>, tol: f64) -> Mat<T> {
    let (_, pivots) = rref(m, tol);
    m.select(&(0..m.rows()).collect::<Vec<_>>(), &pivots)
}

/// Sylvester check via LDL^T: `Some(1)` positive definite, `Some(-1)` negative definite, `None` otherwise.
pub fn definite_sign<T: Scalar>(q: &Mat<T>, tol: f64) -> Option<i32> {
    let n = q.rows();
    for sign in [1i32, -1] {
        let a = if sign == 1 { q.clone() } else { -q };
        let mut d: Vec<T> = Vec::with_capacity(n);
        let mut l = Mat::<T>::identity(n);
        let mut ok = true;
        for j in 0..n {
            let mut dj = a[(j, j)].clone();
            for k in 0..j {
                dj = dj - l[(j, k)].clone() * l[(j, k)].clone() * d[k].clone();
            }
            if !dj.is_pos(tol) {
                ok = false;
                break;
            }
            for i in j + 1..n {
                let mut v = a[(i, j)].clone();
                for k in 0..j {
                    v = v - l[(i, k)].clone() * l[(j, k)].clone() * d[k].clone();
                }
                l[(i, j)] = v / dj.clone();
            }
            d.push(dj);
        }
        if ok {
            return Some(sign);
        }
    }
    None
}
