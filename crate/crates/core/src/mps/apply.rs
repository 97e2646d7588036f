use ndarray::{s, Array2, Array3, Axis};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

use super::{left_matrix, right_matrix, tensor_from_left, tensor_from_right, Mpo, Mps, SvdTruncation};

/// Contracts one MPO tensor into one MPS tensor, fusing bonds as
/// `(a, w)` on the left and `(b, v)` on the right.
fn contract_site(a: &Array3<C64>, w: &ndarray::Array4<C64>) -> Array3<C64> {
    let (dl, d, dr) = a.dim();
    let (wl, _, _, wr) = w.dim();
    // (s, a, b) · (w, s', s, v) -> (a, b, w, s', v)
    let ap = a.view().permuted_axes([1, 0, 2]);
    let ap = ap.as_standard_layout();
    let wp = w.view().permuted_axes([2, 0, 1, 3]);
    let wp = wp.as_standard_layout();
    let t = ap.to_shape((d, dl * dr)).unwrap().t().dot(&wp.to_shape((d, wl * d * wr)).unwrap());
    let t = t.into_shape_with_order((dl, dr, wl, d, wr)).unwrap();
    t.permuted_axes([0, 2, 3, 1, 4])
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((dl * wl, d, dr * wr))
        .unwrap()
}

/// `O|φ⟩` with canonical SVD truncation. The result is not renormalized.
/// Returns the new state and the total discarded weight.
///
/// Sites outside every bond-carrying segment of the (deparallelized) MPO are
/// acted on directly; each segment with bond > 1 is contracted exactly,
/// orthonormalized left to right and then truncated right to left.
pub fn apply_mpo(m: &Mps, o: &Mpo, tr: &SvdTruncation) -> Result<(Mps, f64)> {
    let n = m.n();
    if o.n() != n {
        return Err(Error::LengthMismatch { expected: n, found: o.n() });
    }
    let mut op = o.clone();
    op.deparallelize();
    let bonds = op.bond_dims();
    let mut out = m.clone();
    if out.center().is_none() {
        out.canonicalize(0)?;
    }
    let mut discarded = 0.0;
    let mut k = 0;
    while k < n {
        if k + 1 < n && bonds[k] > 1 {
            let lo = k;
            let mut hi = k + 1;
            while hi < n - 1 && bonds[hi] > 1 {
                hi += 1;
            }
            discarded += apply_segment(&mut out, &op, lo, hi, tr);
            k = hi + 1;
        } else {
            let w = op.tensor(k);
            let local = w.slice(s![0, .., .., 0]).to_owned();
            if !is_identity(&local) {
                out.canonicalize(k)?;
                apply_local(&mut out, &local, k);
            }
            k += 1;
        }
    }
    Ok((out, discarded))
}

fn is_identity(a: &Array2<C64>) -> bool {
    linalg::max_abs_diff(a, &Array2::eye(2)) == 0.0
}

fn apply_local(m: &mut Mps, op: &Array2<C64>, k: usize) {
    let t = &m.tensors()[k];
    let new = Array3::from_shape_fn(t.dim(), |(a, s, b)| op[[s, 0]] * t[[a, 0, b]] + op[[s, 1]] * t[[a, 1, b]]);
    m.tensors_mut()[k] = new;
}

fn apply_segment(m: &mut Mps, op: &Mpo, lo: usize, hi: usize, tr: &SvdTruncation) -> f64 {
    m.canonicalize(lo).expect("segment start in range");
    for k in lo..=hi {
        let t = contract_site(&m.tensors()[k], op.tensor(k));
        m.tensors_mut()[k] = t;
    }
    for k in lo..hi {
        m.move_right(k);
    }
    let mut discarded = 0.0;
    for k in (lo + 1..=hi).rev() {
        let dr = m.tensors()[k].dim().2;
        let (u, sv, vt) = linalg::svd(&right_matrix(&m.tensors()[k]));
        let (keep, d) = tr.retain(&sv);
        discarded += d;
        let mut us = u.slice(s![.., ..keep]).to_owned();
        for (i, mut col) in us.axis_iter_mut(Axis(1)).enumerate() {
            col *= C64::new(sv[i], 0.0);
        }
        m.tensors_mut()[k] = tensor_from_right(vt.slice(s![..keep, ..]).to_owned(), dr);
        let dl = m.tensors()[k - 1].dim().0;
        let prev = left_matrix(&m.tensors()[k - 1]).dot(&us);
        m.tensors_mut()[k - 1] = tensor_from_left(prev, dl);
    }
    m.set_center(Some(lo));
    discarded
}
