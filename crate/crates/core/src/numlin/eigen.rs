use super::Mat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalue moduli sorted descending.
pub fn eigen_moduli(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut mods: Vec<f64> = eigenvalues(m)?.into_iter().map(|(re, im)| re.hypot(im)).collect();
    mods.sort_by(|a, b| b.total_cmp(a));
    Ok(mods)
}

/// Eigenvalues as `(re, im)` pairs, unordered.
pub fn eigenvalues(m: &Mat<f64>) -> Result<Vec<(f64, f64)>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eigenvalues of {}x{}", m.rows(), m.cols())));
    }
    if !m.is_finite() {
        return Err(Error::numeric("non-finite matrix entries", f64::NAN));
    }
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

fn balance(a: &mut [Vec<f64>]) {
    let n = a.len();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut r, mut c) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= radix;
                    c *= sqrdx;
                }
                g = r * radix;
                while c > g {
                    f /= radix;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    g = 1.0 / f;
                    for j in 0..n {
                        a[i][j] *= g;
                    }
                    for row in a.iter_mut() {
                        row[i] *= f;
                    }
                }
            }
        }
    }
}

fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vn;
        }
        // A <- H A
        for j in 0..n {
            let s: f64 = (0..v.len()).map(|t| v[t] * a[k + 1 + t][j]).sum();
            for t in 0..v.len() {
                a[k + 1 + t][j] -= 2.0 * v[t] * s;
            }
        }
        // A <- A H
        for row in a.iter_mut() {
            let s: f64 = (0..v.len()).map(|t| v[t] * row[k + 1 + t]).sum();
            for t in 0..v.len() {
                row[k + 1 + t] -= 2.0 * v[t] * s;
            }
        }
        for i in k + 2..n {
            a[i][k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 { a.abs() } else { -a.abs() }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let n = a.len() as isize;
    let mut wr = vec![0.0; n as usize];
    let mut wi = vec![0.0; n as usize];
    let mut anorm = 0.0;
    for i in 0..n as usize {
        for j in i.saturating_sub(1)..n as usize {
            anorm += a[i][j].abs();
        }
    }
    let at = |a: &[Vec<f64>], i: isize, j: isize| a[i as usize][j as usize];
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 1 {
                let mut s = at(a, l - 1, l - 1).abs() + at(a, l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if at(a, l, l - 1).abs() <= f64::EPSILON * s {
                    a[l as usize][(l - 1) as usize] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at(a, nn, nn);
            if l == nn {
                wr[nn as usize] = x + t;
                wi[nn as usize] = 0.0;
                nn -= 1;
            } else {
                let mut y = at(a, nn - 1, nn - 1);
                let mut w = at(a, nn, nn - 1) * at(a, nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    let (i0, i1) = ((nn - 1) as usize, nn as usize);
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[i0] = x + z;
                        wr[i1] = x + z;
                        if z != 0.0 {
                            wr[i1] = x - w / z;
                        }
                        wi[i0] = 0.0;
                        wi[i1] = 0.0;
                    } else {
                        wr[i0] = x + p;
                        wr[i1] = x + p;
                        wi[i0] = -z;
                        wi[i1] = z;
                    }
                    nn -= 2;
                } else {
                    if its >= MAX_SWEEPS {
                        return Err(Error::numeric(
                            "QR iteration did not converge",
                            at(a, nn, nn - 1).abs(),
                        ));
                    }
                    if its == 10 || its == 20 || its == 40 {
                        t += x;
                        for i in 0..=nn as usize {
                            a[i][i] -= x;
                        }
                        let s = at(a, nn, nn - 1).abs() + at(a, nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r, mut z);
                    let mut m = nn - 2;
                    loop {
                        z = at(a, m, m);
                        r = x - z;
                        let s = y - z;
                        p = (r * s - w) / at(a, m + 1, m) + at(a, m, m + 1);
                        q = at(a, m + 1, m + 1) - z - r - s;
                        r = at(a, m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = at(a, m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs() * (at(a, m - 1, m - 1).abs() + z.abs() + at(a, m + 1, m + 1).abs());
                        if u <= f64::EPSILON * v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i as usize][(i - 2) as usize] = 0.0;
                        if i != m + 2 {
                            a[i as usize][(i - 3) as usize] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k <= nn - 1 {
                        if k != m {
                            p = at(a, k, k - 1);
                            q = at(a, k + 1, k - 1);
                            r = 0.0;
                            if k != nn - 1 {
                                r = at(a, k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = sign((p * p + q * q + r * r).sqrt(), p);
                        if s != 0.0 {
                            let (ku, k1) = (k as usize, (k + 1) as usize);
                            if k == m {
                                if l != m {
                                    a[ku][ku - 1] = -a[ku][ku - 1];
                                }
                            } else {
                                a[ku][ku - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let ju = j as usize;
                                p = a[ku][ju] + q * a[k1][ju];
                                if k != nn - 1 {
                                    p += r * a[ku + 2][ju];
                                    a[ku + 2][ju] -= p * z;
                                }
                                a[k1][ju] -= p * y;
                                a[ku][ju] -= p * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let iu = i as usize;
                                p = x * a[iu][ku] + y * a[iu][k1];
                                if k != nn - 1 {
                                    p += z * a[iu][ku + 2];
                                    a[iu][ku + 2] -= p * r;
                                }
                                a[iu][k1] -= p * q;
                                a[iu][ku] -= p;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let m = Mat::diag(&[1.0, 4.0, 2.0]);
        let e = eigen_moduli(&m).unwrap();
        assert_eq!(e, vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn rotation_pair() {
        let m = Mat::from_rows(vec![vec![0.0, -2.0], vec![2.0, 0.0]]).unwrap();
        let e = eigen_moduli(&m).unwrap();
        assert!((e[0] - 2.0).abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn companion_of_known_roots() {
        // (x-1)(x-2)(x-3)(x+5)(x-0.5)
        let roots = [1.0, 2.0, 3.0, -5.0, 0.5];
        let mut c = vec![1.0];
        for r in roots {
            let mut nc = vec![0.0; c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                nc[i] += v;
                nc[i + 1] -= r * v;
            }
            c = nc;
        }
        let n = roots.len();
        let m = Mat::from_fn(n, n, |i, j| if i == 0 { -c[j + 1] } else if i == j + 1 { 1.0 } else { 0.0 });
        let e = eigen_moduli(&m).unwrap();
        let want = [5.0, 3.0, 2.0, 1.0, 0.5];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{e:?}");
        }
    }

    #[test]
    fn rejects_nan() {
        let m = Mat::from_rows(vec![vec![f64::NAN, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(eigen_moduli(&m), Err(Error::Numeric { .. })));
    }
}
