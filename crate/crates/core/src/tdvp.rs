//! Second-order 1-site TDVP.

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::krylov::{krylov_expmv, KrylovOptions};
use crate::linalg;
use crate::mps::env::{apply_bond, apply_site, left_env_update, right_env_update, trivial};
use crate::mps::{full_bond_dim, left_matrix, right_matrix, tensor_from_left, tensor_from_right, Mpo, Mps};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TdvpConfig {
    pub dt: f64,
    pub krylov_tol: f64,
    pub krylov_max_dim: usize,
    /// Fixed bond dimension; `usize::MAX` means the full Hilbert space.
    pub chi: usize,
}

impl TdvpConfig {
    pub fn new(dt: f64, chi: usize) -> Self {
        TdvpConfig { dt, krylov_tol: 1e-12, krylov_max_dim: 30, chi }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.krylov_tol.is_nan() || self.krylov_tol <= 0.0 || self.krylov_max_dim == 0 || self.chi == 0 {
            return Err(Error::InvalidArgument("krylov_tol, krylov_max_dim and chi must be positive".into()));
        }
        Ok(())
    }

    fn krylov(&self) -> KrylovOptions {
        KrylovOptions { tol: self.krylov_tol, max_dim: self.krylov_max_dim }
    }
}

/// Left and right environments of an MPS/MPO pair. `left[k]` covers sites
/// `0..k`, `right[k]` covers sites `k+1..n`.
#[derive(Clone, Debug)]
pub struct Environments {
    pub left: Vec<Array3<C64>>,
    pub right: Vec<Array3<C64>>,
}

impl Environments {
    /// Right environments of a state with its center on site 0; the left
    /// list only holds the trivial boundary.
    pub fn build_right(m: &Mps, h: &Mpo) -> Self {
        let n = m.n();
        let mut right = vec![trivial(); n];
        for k in (1..n).rev() {
            right[k - 1] = right_env_update(&right[k], m.tensor(k), h.tensor(k));
        }
        Environments { left: vec![trivial()], right }
    }

    /// Largest entrywise difference between the right environments.
    pub fn max_right_deviation(&self, other: &Environments) -> f64 {
        self.right
            .iter()
            .zip(&other.right)
            .map(|(a, b)| {
                if a.dim() != b.dim() {
                    f64::INFINITY
                } else {
                    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
                }
            })
            .fold(0.0, f64::max)
    }
}

fn expm_site(
    l: &Array3<C64>,
    w: &ndarray::Array4<C64>,
    r: &Array3<C64>,
    a: &Array3<C64>,
    tau: C64,
    opts: &KrylovOptions,
) -> Result<Array3<C64>> {
    let shape = a.dim();
    let v = Array1::from_iter(a.iter().copied());
    let action = |x: &Array1<C64>| {
        let t = Array3::from_shape_vec(shape, x.to_vec()).unwrap();
        Array1::from_iter(apply_site(l, w, r, &t))
    };
    let out = krylov_expmv(action, &v, tau, opts)?;
    Ok(Array3::from_shape_vec(shape, out.to_vec()).unwrap())
}

fn expm_bond(l: &Array3<C64>, r: &Array3<C64>, c: &Array2<C64>, tau: C64, opts: &KrylovOptions) -> Result<Array2<C64>> {
    let shape = c.dim();
    let v = Array1::from_iter(c.iter().copied());
    let action = |x: &Array1<C64>| {
        let t = Array2::from_shape_vec(shape, x.to_vec()).unwrap();
        Array1::from_iter(apply_bond(l, r, &t))
    };
    let out = krylov_expmv(action, &v, tau, opts)?;
    Ok(Array2::from_shape_vec(shape, out.to_vec()).unwrap())
}

fn needs_padding(m: &Mps, chi: usize) -> bool {
    let n = m.n();
    m.bond_dims()[1..n].iter().enumerate().any(|(b, &d)| d < full_bond_dim(n, b).min(chi))
}

/// One symmetric step: a left-to-right half step of `dt/2` followed by a
/// right-to-left half step of `dt/2`. Bonds below `min(chi, full)` are
/// zero-padded first. The result is normalized with its center on site 0.
pub fn tdvp_step(m: &mut Mps, h: &Mpo, cfg: &TdvpConfig) -> Result<Environments> {
    cfg.validate()?;
    sweep_pair(m, h, cfg.dt, cfg)
}

pub(crate) fn sweep_pair(m: &mut Mps, h: &Mpo, dt: f64, cfg: &TdvpConfig) -> Result<Environments> {
    let n = m.n();
    if h.n() != n {
        return Err(Error::LengthMismatch { expected: n, found: h.n() });
    }
    m.set_chi_max(cfg.chi);
    if needs_padding(m, cfg.chi) {
        m.expand_bonds(cfg.chi);
    } else {
        m.canonicalize(0)?;
    }
    let opts = cfg.krylov();
    let tau = C64::new(dt / 2.0, 0.0);
    let Environments { mut right, .. } = Environments::build_right(m, h);
    let mut left = vec![trivial(); n];

    for k in 0..n {
        let a = expm_site(&left[k], h.tensor(k), &right[k], m.tensor(k), tau, &opts)?;
        if k + 1 < n {
            let dl = a.dim().0;
            let (q, c) = linalg::qr(&left_matrix(&a));
            let q = tensor_from_left(q, dl);
            left[k + 1] = left_env_update(&left[k], &q, h.tensor(k));
            let c = expm_bond(&left[k + 1], &right[k], &c, -tau, &opts)?;
            let next = m.tensor(k + 1);
            let dr = next.dim().2;
            let next = tensor_from_right(c.dot(&right_matrix(next)), dr);
            let ts = m.tensors_mut();
            ts[k] = q;
            ts[k + 1] = next;
        } else {
            m.tensors_mut()[k] = a;
        }
    }
    for k in (0..n).rev() {
        let a = expm_site(&left[k], h.tensor(k), &right[k], m.tensor(k), tau, &opts)?;
        if k > 0 {
            let dr = a.dim().2;
            let (l, q) = linalg::lq(&right_matrix(&a));
            let q = tensor_from_right(q, dr);
            right[k - 1] = right_env_update(&right[k], &q, h.tensor(k));
            let l = expm_bond(&left[k], &right[k - 1], &l, -tau, &opts)?;
            let prev = m.tensor(k - 1);
            let dl = prev.dim().0;
            let prev = tensor_from_left(left_matrix(prev).dot(&l), dl);
            let ts = m.tensors_mut();
            ts[k] = q;
            ts[k - 1] = prev;
        } else {
            m.tensors_mut()[k] = a;
        }
    }
    m.set_center(Some(0));
    m.normalize();
    Ok(Environments { left: vec![trivial()], right })
}
