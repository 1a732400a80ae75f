//! Dense linear algebra over [`Scalar`](crate::scalar::Scalar) types.

mod det;
mod eigen;
mod expm;
mod mat;

pub use det::{column_basis, concat_det, definite_sign, det, det_bareiss, det_lu, inverse, minor, null_space, rank, rref, solve};
pub use eigen::{eigen_moduli, eigenvalues};
pub use expm::{dot, expm, is_zero_vec, norm, orthonormalize, pivoted_range, unipotent_exp};
pub use mat::Mat;

/// Real roots of a polynomial given by ascending coefficients, via the companion matrix.
pub fn real_roots(coeffs: &[f64], tol: f64) -> crate::Result<Vec<f64>> {
    let mut c = coeffs.to_vec();
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(crate::Error::Domain("zero polynomial".into()));
    }
    while c.len() > 1 && c.last().unwrap().abs() <= 1e-13 * scale {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(vec![]);
    }
    let lead = c[deg];
    let m = Mat::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -c[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut out: Vec<f64> = eigenvalues(&m)?
        .into_iter()
        .filter(|(re, im)| im.abs() <= tol * (1.0 + re.abs()))
        .map(|(re, _)| polish(&c, re))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn polish(c: &[f64], mut x: f64) -> f64 {
    for _ in 0..3 {
        let (mut p, mut dp) = (0.0, 0.0);
        for &a in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        if dp == 0.0 {
            break;
        }
        let nx = x - p / dp;
        if !nx.is_finite() {
            break;
        }
        x = nx;
    }
    x
}
