//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by implicit-shift QL.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues (ascending) and, on request, eigenvectors stored row-major with
/// eigenvector `k` in column `k`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

struct Reflector {
    start: usize,
    v: Vec<f64>,
    beta: f64,
}

/// Reduces the lower triangle of `a` in place; returns (diagonal, off-diagonal).
fn tridiagonalize(a: &mut [f64], n: usize, mut reflectors: Option<&mut Vec<Reflector>>) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return (diag, off);
    }
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        diag[k] = a[k * n + k];
        let m = n - k - 1;
        let s = k + 1;
        for t in 0..m {
            v[t] = a[(s + t) * n + k];
        }
        let x0 = v[0];
        let sigma: f64 = v[1..m].iter().map(|x| x * x).sum();
        if sigma == 0.0 {
            off[k] = x0;
            continue;
        }
        let norm = libm::sqrt(x0 * x0 + sigma);
        let alpha = if x0 > 0.0 { -norm } else { norm };
        v[0] = x0 - alpha;
        let beta = 2.0 / (v[0] * v[0] + sigma);
        off[k] = alpha;

        let v = &v[..m];
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for r in 0..m {
            let row = &a[(s + r) * n + s..(s + r) * n + s + r + 1];
            let vr = v[r];
            let mut acc = row[r] * vr;
            for ((pc, &arc), &vc) in p[..r].iter_mut().zip(&row[..r]).zip(&v[..r]) {
                acc += arc * vc;
                *pc += arc * vr;
            }
            p[r] += acc;
        }
        let mut pv = 0.0;
        for (pc, &vc) in p.iter_mut().zip(v) {
            *pc *= beta;
            pv += *pc * vc;
        }
        let half = 0.5 * beta * pv;
        for (pc, &vc) in p.iter_mut().zip(v) {
            *pc -= half * vc;
        }
        let w = &*p;
        for r in 0..m {
            let (vr, wr) = (v[r], w[r]);
            let row = &mut a[(s + r) * n + s..(s + r) * n + s + r + 1];
            for ((x, &vc), &wc) in row.iter_mut().zip(v).zip(w) {
                *x -= vr * wc + wr * vc;
            }
        }
        if let Some(store) = reflectors.as_deref_mut() {
            store.push(Reflector { start: s, v: v.to_vec(), beta });
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    diag[n - 1] = a[(n - 1) * n + n - 1];
    (diag, off)
}

/// Implicit QL on a symmetric tridiagonal matrix. `z`, if given, is an
/// `n x n` row-major matrix whose columns are rotated along.
fn tridiagonal_ql(d: &mut [f64], off: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigen-decomposition of the symmetric row-major `n x n` matrix `a`.
/// Only the lower triangle is read.
pub fn symmetric_eigen(a: &[f64], n: usize, want_vectors: bool) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        return Err(Error::Argument(alloc::format!("expected {} entries, got {}", n * n, a.len())));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let mut work = a.to_vec();
    let mut reflectors = Vec::new();
    let (mut d, off) = tridiagonalize(&mut work, n, want_vectors.then_some(&mut reflectors));
    drop(work);
    let mut z = None;
    if want_vectors {
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        // Q = H_0 H_1 ... ; apply each reflector on the right.
        let mut qv = vec![0.0; n];
        for h in &reflectors {
            let m = h.v.len();
            for (row, out) in q.chunks_exact(n).zip(qv.iter_mut()) {
                *out = row[h.start..h.start + m].iter().zip(&h.v).map(|(x, y)| x * y).sum();
            }
            for (row, &t) in q.chunks_exact_mut(n).zip(&qv) {
                for (x, &vc) in row[h.start..h.start + m].iter_mut().zip(&h.v) {
                    *x -= h.beta * t * vc;
                }
            }
        }
        z = Some(q);
    }
    tridiagonal_ql(&mut d, &off, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut sorted = vec![0.0; n * n];
        for (new, &old) in order.iter().enumerate() {
            for r in 0..n {
                sorted[r * n + new] = z[r * n + old];
            }
        }
        sorted
    });
    Ok(SymmetricEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, e: &SymmetricEigen) -> f64 {
        let q = e.vectors.as_ref().unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n).map(|k| q[i * n + k] * e.values[k] * q[j * n + k]).sum();
                worst = worst.max((rec - a[i * n + j]).abs());
            }
        }
        worst
    }

    #[test]
    fn small_analytic_cases() {
        let e = symmetric_eigen(&[0.0, 1.0, 1.0, 0.0], 2, false).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let e = symmetric_eigen(&[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0], 3, false).unwrap();
        assert_eq!(e.values, [-1.0, 0.0, 2.0]);
        let e = symmetric_eigen(&[5.0], 1, true).unwrap();
        assert_eq!(e.values, [5.0]);
        assert!(symmetric_eigen(&[f64::NAN], 1, false).is_err());
    }

    #[test]
    fn reconstruction_of_a_dense_matrix() {
        let n = 9;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 13) % 11) as f64 - 5.0 + 0.25 * (i as f64);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        let e = symmetric_eigen(&a, n, true).unwrap();
        assert!(residual(&a, n, &e) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
