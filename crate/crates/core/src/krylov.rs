//! Lanczos approximation of `exp(-iτH) v` for Hermitian `H`.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KrylovOptions {
    pub tol: f64,
    pub max_dim: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { tol: 1e-12, max_dim: 30 }
    }
}

fn dot(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &Array1<C64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// First column of `exp(-iτT)` for the tridiagonal `T` given by `alpha`
/// and `beta` (length `alpha.len() - 1`).
fn tridiag_exp(alpha: &[f64], beta: &[f64], tau: C64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = ndarray::Array2::<f64>::zeros((m, m));
    for i in 0..m {
        t[[i, i]] = alpha[i];
        if i + 1 < m {
            t[[i, i + 1]] = beta[i];
            t[[i + 1, i]] = beta[i];
        }
    }
    let (vals, vecs) = linalg::eigh_real(&t);
    let phase: Vec<C64> = vals.iter().map(|&l| (-C64::i() * tau * l).exp()).collect();
    (0..m)
        .map(|i| (0..m).map(|k| vecs[[i, k]] * phase[k] * vecs[[0, k]]).sum())
        .collect()
}

/// `exp(-iτH) v`, where `apply_h` is a Hermitian action. `τ` may be complex.
///
/// Stops when `β_m |[exp(-iτT)]_{m,1}|` drops below `tol · ‖v‖` or the
/// Krylov space becomes invariant.
pub fn krylov_expmv<F>(apply_h: F, v: &Array1<C64>, tau: C64, opts: &KrylovOptions) -> Result<Array1<C64>>
where
    F: Fn(&Array1<C64>) -> Array1<C64>,
{
    let vnorm = norm(v);
    if vnorm == 0.0 || tau == C64::new(0.0, 0.0) {
        return Ok(v.clone());
    }
    let dim = v.len();
    let max_dim = opts.max_dim.max(1).min(dim);
    let mut basis: Vec<Array1<C64>> = vec![v / C64::new(vnorm, 0.0)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut residual = f64::INFINITY;
    loop {
        let j = basis.len() - 1;
        let mut w = apply_h(&basis[j]);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.scaled_add(-c, q);
            }
        }
        let b = norm(&w);
        let scale = alpha.iter().map(|x| x.abs()).chain(beta.iter().copied()).fold(0.0, f64::max).max(1e-300);
        let coeffs = tridiag_exp(&alpha, &beta, tau);
        let breakdown = b <= 1e-13 * scale;
        if !breakdown {
            residual = b * coeffs[j].norm();
        }
        if breakdown || residual <= opts.tol || basis.len() == max_dim {
            if !breakdown && residual > opts.tol && basis.len() < dim {
                return Err(Error::KrylovNotConverged { residual, dim: basis.len() });
            }
            let mut out = Array1::<C64>::zeros(dim);
            for (q, c) in basis.iter().zip(&coeffs) {
                out.scaled_add(*c * vnorm, q);
            }
            return Ok(out);
        }
        beta.push(b);
        basis.push(w / C64::new(b, 0.0));
    }
}
