//! Dense decompositions on `ndarray` matrices, backed by faer.

use faer::{Mat, MatRef, Side};
use ndarray::Array2;
use num_complex::Complex64 as C64;

fn to_faer<T: Copy>(m: &Array2<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

fn from_faer<T: Copy>(m: MatRef<'_, T>) -> Array2<T> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub(crate) fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|c| c.conj())
}

/// Thin SVD `m = u · diag(s) · vt` with `s` sorted descending. Equal
/// singular values keep their original relative order.
pub fn svd(m: &Array2<C64>) -> (Array2<C64>, Vec<f64>, Array2<C64>) {
    let (r, c) = m.dim();
    let k = r.min(c);
    if k == 0 {
        return (Array2::zeros((r, 0)), Vec::new(), Array2::zeros((0, c)));
    }
    let dec = to_faer(m).thin_svd().expect("svd converges");
    let (u, v, sd) = (dec.U(), dec.V(), dec.S());
    let s: Vec<f64> = (0..k).map(|i| sd[i].re).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let u_out = Array2::from_shape_fn((r, k), |(i, j)| u[(i, order[j])]);
    let vt_out = Array2::from_shape_fn((k, c), |(i, j)| v[(j, order[i])].conj());
    let s_out = order.iter().map(|&i| s[i]).collect();
    (u_out, s_out, vt_out)
}

pub fn singular_values(m: &Array2<C64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s = to_faer(m).singular_values().expect("svd converges");
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Thin QR: `q` has orthonormal columns even when `m` is rank deficient.
pub fn qr(m: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let dec = to_faer(m).qr();
    (from_faer(dec.compute_thin_Q().as_ref()), from_faer(dec.thin_R()))
}

/// Thin LQ: `m = l · q` with orthonormal rows in `q`.
pub fn lq(m: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let (q, r) = qr(&adjoint(m));
    (adjoint(&r), adjoint(&q))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let dec = to_faer(m).self_adjoint_eigen(Side::Lower).expect("eigensolver converges");
    let n = m.nrows();
    let vals = (0..n).map(|i| dec.S()[i].re).collect();
    (vals, from_faer(dec.U()))
}

/// Real symmetric eigen-decomposition, eigenvalues ascending.
pub fn eigh_real(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let dec = to_faer(m).self_adjoint_eigen(Side::Lower).expect("eigensolver converges");
    let n = m.nrows();
    let vals = (0..n).map(|i| dec.S()[i]).collect();
    (vals, from_faer(dec.U()))
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
