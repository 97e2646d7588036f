//! Environment contractions for MPS/MPO networks.
//!
//! Environments are `(bra bond, mpo bond, ket bond)` arrays. Every kernel is
//! written as three matrix products with axis permutations in between.

use ndarray::{Array2, Array3, Array4};
use num_complex::Complex64 as C64;

fn owned4(a: ndarray::ArrayView4<C64>) -> Array4<C64> {
    a.as_standard_layout().into_owned()
}

/// `W[w,s',s,v]` as a `(w·s, s'·v)` matrix.
fn w_in_first(w: &Array4<C64>) -> Array2<C64> {
    let (wd, d, _, v) = w.dim();
    owned4(w.view().permuted_axes([0, 2, 1, 3])).into_shape_with_order((wd * d, d * v)).unwrap()
}

/// `L'[b', v, a'] = Σ conj(A[b,s',b']) W[w,s',s,v] A[a,s,a'] L[b,w,a]`.
pub(crate) fn left_env_update(l: &Array3<C64>, a: &Array3<C64>, w: &Array4<C64>) -> Array3<C64> {
    let (b, wd, ad) = l.dim();
    let (_, d, a2) = a.dim();
    let (_, _, _, v) = w.dim();
    let t1 = l.to_shape((b * wd, ad)).unwrap().dot(&a.to_shape((ad, d * a2)).unwrap());
    // (b, w, s, a') -> (b, a', w, s)
    let t1 = t1.into_shape_with_order((b, wd, d, a2)).unwrap();
    let t1 = owned4(t1.view().permuted_axes([0, 3, 1, 2]));
    let t2 = t1.into_shape_with_order((b * a2, wd * d)).unwrap().dot(&w_in_first(w));
    // (b, a', s', v) -> (b, s', a', v)
    let t2 = t2.into_shape_with_order((b, a2, d, v)).unwrap();
    let t2 = owned4(t2.view().permuted_axes([0, 2, 1, 3]));
    let ac = a.mapv(|x| x.conj());
    let b2 = ac.dim().2;
    let t3 = ac
        .to_shape((b * d, b2))
        .unwrap()
        .t()
        .dot(&t2.into_shape_with_order((b * d, a2 * v)).unwrap());
    // (b', a', v) -> (b', v, a')
    let t3 = t3.into_shape_with_order((b2, a2, v)).unwrap();
    t3.permuted_axes([0, 2, 1]).as_standard_layout().into_owned()
}

/// `R'[b, w, a] = Σ conj(A[b,s',b']) W[w,s',s,v] A[a,s,a'] R[b',v,a']`.
pub(crate) fn right_env_update(r: &Array3<C64>, a: &Array3<C64>, w: &Array4<C64>) -> Array3<C64> {
    let (b2, v, a2) = r.dim();
    let (ad, d, _) = a.dim();
    let (wd, _, _, _) = w.dim();
    // A (a, s, a') · R^T over a' -> (a, s, b', v)
    let rt = r.view().permuted_axes([2, 0, 1]);
    let rt = rt.as_standard_layout();
    let t1 = a.to_shape((ad * d, a2)).unwrap().dot(&rt.to_shape((a2, b2 * v)).unwrap());
    // (a, s, b', v) -> (a, b', s, v) ; W as (w, s', s, v) -> (s, v, w, s')
    let t1 = t1.into_shape_with_order((ad, d, b2, v)).unwrap();
    let t1 = owned4(t1.view().permuted_axes([0, 2, 1, 3]));
    let wp = owned4(w.view().permuted_axes([2, 3, 0, 1]));
    let t2 = t1.into_shape_with_order((ad * b2, d * v)).unwrap().dot(&wp.into_shape_with_order((d * v, wd * d)).unwrap());
    // (a, b', w, s') -> (s', b', a, w)
    let t2 = t2.into_shape_with_order((ad, b2, wd, d)).unwrap();
    let t2 = owned4(t2.view().permuted_axes([3, 1, 0, 2]));
    let ac = a.mapv(|x| x.conj());
    let b = ac.dim().0;
    let t3 = ac.to_shape((b, d * b2)).unwrap().dot(&t2.into_shape_with_order((d * b2, ad * wd)).unwrap());
    // (b, a, w) -> (b, w, a)
    let t3 = t3.into_shape_with_order((b, ad, wd)).unwrap();
    t3.permuted_axes([0, 2, 1]).as_standard_layout().into_owned()
}

/// One-site effective Hamiltonian acting on a `(a, s, a')` site tensor.
pub(crate) fn apply_site(l: &Array3<C64>, w: &Array4<C64>, r: &Array3<C64>, x: &Array3<C64>) -> Array3<C64> {
    let (b, wd, ad) = l.dim();
    let (_, d, a2) = x.dim();
    let (_, _, _, v) = w.dim();
    let (b2, _, _) = r.dim();
    let t1 = l.to_shape((b * wd, ad)).unwrap().dot(&x.to_shape((ad, d * a2)).unwrap());
    let t1 = t1.into_shape_with_order((b, wd, d, a2)).unwrap();
    let t1 = owned4(t1.view().permuted_axes([0, 3, 1, 2]));
    let t2 = t1.into_shape_with_order((b * a2, wd * d)).unwrap().dot(&w_in_first(w));
    let t2 = t2.into_shape_with_order((b, a2, d, v)).unwrap();
    let t2 = owned4(t2.view().permuted_axes([0, 2, 1, 3]));
    let rp = r.view().permuted_axes([2, 1, 0]);
    let rp = rp.as_standard_layout();
    let t3 = t2.into_shape_with_order((b * d, a2 * v)).unwrap().dot(&rp.to_shape((a2 * v, b2)).unwrap());
    mat3_back(t3, b, d, b2)
}

fn mat3_back(m: Array2<C64>, a: usize, b: usize, c: usize) -> Array3<C64> {
    m.as_standard_layout().into_owned().into_shape_with_order((a, b, c)).unwrap()
}

/// Zero-site (bond) effective Hamiltonian acting on a `(a, a')` bond matrix,
/// where `l` already includes the site to the left of the bond.
pub(crate) fn apply_bond(l: &Array3<C64>, r: &Array3<C64>, c: &Array2<C64>) -> Array2<C64> {
    let (b, wd, ad) = l.dim();
    let a2 = c.ncols();
    let (b2, _, _) = r.dim();
    let t1 = l.to_shape((b * wd, ad)).unwrap().dot(c);
    let t1 = t1.into_shape_with_order((b, wd * a2)).unwrap();
    let rp = r.view().permuted_axes([1, 2, 0]);
    let rp = rp.as_standard_layout();
    t1.dot(&rp.to_shape((wd * a2, b2)).unwrap())
}

pub(crate) fn trivial() -> Array3<C64> {
    Array3::from_elem((1, 1, 1), C64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::{Mpo, Mps};
    use crate::pauli::{PauliString, PauliSum};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand3(shape: (usize, usize, usize), rng: &mut ChaCha8Rng) -> Array3<C64> {
        Array3::from_shape_fn(shape, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn rand4(shape: (usize, usize, usize, usize), rng: &mut ChaCha8Rng) -> Array4<C64> {
        Array4::from_shape_fn(shape, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn kernels_match_index_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (chi_b, chi_a, w1, w2, chi_b2, chi_a2) = (3, 3, 2, 4, 5, 5);
        let l = rand3((chi_b, w1, chi_a), &mut rng);
        let r = rand3((chi_b2, w2, chi_a2), &mut rng);
        let a = rand3((chi_a, 2, chi_a2), &mut rng);
        let w = rand4((w1, 2, 2, w2), &mut rng);

        let mut want_l = Array3::<C64>::zeros((chi_a2, w2, chi_a2));
        let mut want_r = Array3::<C64>::zeros((chi_a, w1, chi_a));
        let mut want_h = Array3::<C64>::zeros((chi_b, 2, chi_b2));
        for b in 0..chi_b {
            for wi in 0..w1 {
                for ai in 0..chi_a {
                    for sp in 0..2 {
                        for s in 0..2 {
                            for vi in 0..w2 {
                                for a2 in 0..chi_a2 {
                                    for bp in 0..chi_b2 {
                                        let x = l[[b, wi, ai]] * w[[wi, sp, s, vi]] * a[[ai, s, a2]] * r[[bp, vi, a2]];
                                        want_h[[b, sp, bp]] += x;
                                    }
                                    if b < chi_a {
                                        for bp in 0..chi_a2 {
                                            want_l[[bp, vi, a2]] +=
                                                a[[b, sp, bp]].conj() * w[[wi, sp, s, vi]] * a[[ai, s, a2]] * l[[b, wi, ai]];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        for b in 0..chi_a {
            for wi in 0..w1 {
                for ai in 0..chi_a {
                    for sp in 0..2 {
                        for s in 0..2 {
                            for vi in 0..w2 {
                                for bp in 0..chi_a2 {
                                    for a2 in 0..chi_a2 {
                                        want_r[[b, wi, ai]] +=
                                            a[[b, sp, bp]].conj() * w[[wi, sp, s, vi]] * a[[ai, s, a2]] * r[[bp, vi, a2]];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let l_sq = l.slice(ndarray::s![..chi_a, .., ..]).to_owned();
        let got_l = left_env_update(&l_sq, &a, &w);
        let got_r = right_env_update(&r, &a, &w);
        let got_h = apply_site(&l, &w, &r, &a);
        let diff = |x: &Array3<C64>, y: &Array3<C64>| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(diff(&got_l, &want_l) < 1e-11);
        assert!(diff(&got_r, &want_r) < 1e-11);
        assert!(diff(&got_h, &want_h) < 1e-11);

        let c = Array2::from_shape_fn((chi_a, chi_a2), |_| C64::new(rng.random_range(-1.0..1.0), 0.3));
        let l2 = rand3((chi_b, w2, chi_a), &mut rng);
        let got_b = apply_bond(&l2, &r, &c);
        let mut want_b = Array2::<C64>::zeros((chi_b, chi_b2));
        for b in 0..chi_b {
            for wi in 0..w2 {
                for ai in 0..chi_a {
                    for a2 in 0..chi_a2 {
                        for bp in 0..chi_b2 {
                            want_b[[b, bp]] += l2[[b, wi, ai]] * c[[ai, a2]] * r[[bp, wi, a2]];
                        }
                    }
                }
            }
        }
        assert!(crate::linalg::max_abs_diff(&got_b, &want_b) < 1e-11);
    }

    #[test]
    fn full_contraction_is_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let phi = Mps::random(5, 4, &mut rng);
        let mut h = PauliSum::new(5);
        h.add_term(0.4, &PauliString::parse("XZIYI").unwrap()).unwrap();
        h.add_term(-1.1, &PauliString::parse("IIZZX").unwrap()).unwrap();
        let m = Mpo::from_pauli_sum(&h, 16, 1e-12).unwrap();
        let mut le = trivial();
        for (a, w) in phi.tensors().iter().zip(m.tensors()) {
            le = left_env_update(&le, a, w);
        }
        let mut re = trivial();
        for (a, w) in phi.tensors().iter().zip(m.tensors()).rev() {
            re = right_env_update(&re, a, w);
        }
        assert!((le[[0, 0, 0]] - re[[0, 0, 0]]).norm() < 1e-12);
    }
}
