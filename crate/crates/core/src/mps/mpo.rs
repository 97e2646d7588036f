use ndarray::{s, Array2, Array4, Axis};
use num_complex::Complex64 as C64;

use crate::clifford::single_pauli;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{PauliString, PauliSum};

use super::env::left_env_update;
use super::Mps;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Matrix product operator with `(left bond, out, in, right bond)` tensors.
#[derive(Clone, Debug)]
pub struct Mpo {
    tensors: Vec<Array4<C64>>,
}

fn pauli_matrix(p: &PauliString, j: usize) -> Array2<C64> {
    single_pauli(p.x_bit(j), p.z_bit(j))
}

/// `(wl * 4, wr)` view of an MPO tensor.
fn left_mat(w: &Array4<C64>) -> Array2<C64> {
    let (wl, d1, d2, wr) = w.dim();
    w.to_shape((wl * d1 * d2, wr)).unwrap().to_owned()
}

/// `(wl, 4 * wr)` view of an MPO tensor.
fn right_mat(w: &Array4<C64>) -> Array2<C64> {
    let (wl, d1, d2, wr) = w.dim();
    w.to_shape((wl, d1 * d2 * wr)).unwrap().to_owned()
}

fn from_left(m: Array2<C64>, wl: usize) -> Array4<C64> {
    let wr = m.ncols();
    m.as_standard_layout().into_owned().into_shape_with_order((wl, 2, 2, wr)).unwrap()
}

fn from_right(m: Array2<C64>, wr: usize) -> Array4<C64> {
    let wl = m.nrows();
    m.as_standard_layout().into_owned().into_shape_with_order((wl, 2, 2, wr)).unwrap()
}

/// If `b = α a` for some scalar, returns `α`. Zero vectors are parallel to
/// anything with `α = 0`.
fn parallel_factor(a: &[C64], b: &[C64], tol: f64) -> Option<C64> {
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if nb <= tol * na.max(1e-300) || nb == 0.0 {
        return Some(ZERO);
    }
    if na == 0.0 {
        return None;
    }
    let dot: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let alpha = dot / (na * na);
    let resid: f64 = a.iter().zip(b).map(|(x, y)| (y - alpha * x).norm_sqr()).sum::<f64>().sqrt();
    (resid <= tol * nb).then_some(alpha)
}

impl Mpo {
    pub fn from_tensors(tensors: Vec<Array4<C64>>) -> Result<Self> {
        let n = tensors.len();
        if n == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        for (k, t) in tensors.iter().enumerate() {
            let (wl, a, b, wr) = t.dim();
            if a != 2 || b != 2 {
                return Err(Error::InvalidArgument(format!("site {k} is not a qubit operator")));
            }
            if (k == 0 && wl != 1) || (k == n - 1 && wr != 1) {
                return Err(Error::InvalidArgument("boundary bonds must have dimension 1".into()));
            }
            if k + 1 < n && tensors[k + 1].dim().0 != wr {
                return Err(Error::InvalidArgument(format!("bond mismatch after site {k}")));
            }
        }
        Ok(Mpo { tensors: tensors.into_iter().map(|t| t.as_standard_layout().into_owned()).collect() })
    }

    pub fn identity(n: usize) -> Self {
        let t = Array4::from_shape_fn((1, 2, 2, 1), |(_, a, b, _)| if a == b { ONE } else { ZERO });
        Mpo { tensors: vec![t; n] }
    }

    /// Exact MPO of a Pauli sum, compressed by deparallelization and a
    /// canonical SVD sweep that drops singular values below `cutoff` times the
    /// largest one at each bond.
    pub fn from_pauli_sum(h: &PauliSum, bond_cap: usize, cutoff: f64) -> Result<Self> {
        let n = h.n();
        if n == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        let terms: Vec<(f64, &PauliString)> = h.iter().collect();
        if terms.is_empty() {
            let mut m = Mpo::identity(n);
            m.tensors[0].fill(ZERO);
            return Ok(m);
        }
        let k = terms.len();
        let mut tensors = Vec::with_capacity(n);
        for j in 0..n {
            let wl = if j == 0 { 1 } else { k };
            let wr = if j == n - 1 { 1 } else { k };
            let mut w = Array4::zeros((wl, 2, 2, wr));
            for (t, &(c, p)) in terms.iter().enumerate() {
                let mut op = pauli_matrix(p, j);
                if j == 0 {
                    op *= C64::new(c, 0.0);
                }
                let a = if j == 0 { 0 } else { t };
                let b = if j == n - 1 { 0 } else { t };
                w.slice_mut(s![a, .., .., b]).assign(&op);
            }
            tensors.push(w);
        }
        let mut m = Mpo { tensors };
        m.deparallelize();
        m.compress(cutoff);
        if let Some((bond, attained)) =
            m.bond_dims().iter().enumerate().map(|(b, &d)| (b, d)).find(|&(_, d)| d > bond_cap)
        {
            return Err(Error::MpoBondOverflow { bond, attained, cap: bond_cap });
        }
        Ok(m)
    }

    /// Bond-2 MPO of `(I + g)/2` for a Hermitian Pauli string `g = θ σ^γ`.
    pub fn projector(g: &PauliString) -> Result<Self> {
        let theta = g.sign().ok_or(Error::NonHermitian)? as f64;
        let n = g.n();
        if n == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        let v = [C64::new(0.5f64.sqrt(), 0.0), C64::new(theta / 2.0, 0.0).sqrt()];
        if n == 1 {
            let op = (Array2::<C64>::eye(2) + pauli_matrix(g, 0) * C64::new(theta, 0.0)) * C64::new(0.5, 0.0);
            return Ok(Mpo { tensors: vec![op.into_shape_with_order((1, 2, 2, 1)).unwrap()] });
        }
        let eye = Array2::<C64>::eye(2);
        let mut tensors = Vec::with_capacity(n);
        for j in 0..n {
            let sigma = pauli_matrix(g, j);
            let t = if j == 0 {
                let mut t = Array4::zeros((1, 2, 2, 2));
                t.slice_mut(s![0, .., .., 0]).assign(&(&eye * v[0]));
                t.slice_mut(s![0, .., .., 1]).assign(&(&sigma * v[1]));
                t
            } else if j == n - 1 {
                let mut t = Array4::zeros((2, 2, 2, 1));
                t.slice_mut(s![0, .., .., 0]).assign(&(&eye * v[0]));
                t.slice_mut(s![1, .., .., 0]).assign(&(&sigma * v[1]));
                t
            } else {
                let mut t = Array4::zeros((2, 2, 2, 2));
                t.slice_mut(s![0, .., .., 0]).assign(&eye);
                t.slice_mut(s![1, .., .., 1]).assign(&sigma);
                t
            };
            tensors.push(t);
        }
        Ok(Mpo { tensors })
    }

    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensors(&self) -> &[Array4<C64>] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> &Array4<C64> {
        &self.tensors[k]
    }

    /// Internal bond dimensions (`n - 1` entries).
    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors[..self.n() - 1].iter().map(|t| t.dim().3).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Removes zero and parallel columns sweeping right, then zero and
    /// parallel rows sweeping left. The operator is unchanged.
    pub fn deparallelize(&mut self) {
        let n = self.n();
        for j in 0..n.saturating_sub(1) {
            let wl = self.tensors[j].dim().0;
            let a = left_mat(&self.tensors[j]);
            let b = right_mat(&self.tensors[j + 1]);
            let (a, b) = merge_parallel(a, b, |m, i| m.column(i).to_vec(), false);
            self.tensors[j] = from_left(a, wl);
            let wr = self.tensors[j + 1].dim().3;
            self.tensors[j + 1] = from_right(b, wr);
        }
        for j in (1..n).rev() {
            let wr = self.tensors[j].dim().3;
            let b = right_mat(&self.tensors[j]);
            let a = left_mat(&self.tensors[j - 1]);
            let (b, a) = merge_parallel(b, a, |m, i| m.row(i).to_vec(), true);
            self.tensors[j] = from_right(b, wr);
            let wl = self.tensors[j - 1].dim().0;
            self.tensors[j - 1] = from_left(a, wl);
        }
    }

    /// QR sweep to the right, then SVD truncation sweeping left.
    fn compress(&mut self, cutoff: f64) {
        let n = self.n();
        for j in 0..n.saturating_sub(1) {
            let wl = self.tensors[j].dim().0;
            let (q, r) = linalg::qr(&left_mat(&self.tensors[j]));
            self.tensors[j] = from_left(q, wl);
            let wr = self.tensors[j + 1].dim().3;
            self.tensors[j + 1] = from_right(r.dot(&right_mat(&self.tensors[j + 1])), wr);
        }
        for j in (1..n).rev() {
            let wr = self.tensors[j].dim().3;
            let (u, sv, vt) = linalg::svd(&right_mat(&self.tensors[j]));
            let smax = sv.first().copied().unwrap_or(0.0);
            let keep = sv.iter().filter(|&&x| x > cutoff * smax).count().max(1);
            let mut us = u.slice(s![.., ..keep]).to_owned();
            for (i, mut col) in us.axis_iter_mut(Axis(1)).enumerate() {
                col *= C64::new(sv[i], 0.0);
            }
            self.tensors[j] = from_right(vt.slice(s![..keep, ..]).to_owned(), wr);
            let wl = self.tensors[j - 1].dim().0;
            self.tensors[j - 1] = from_left(left_mat(&self.tensors[j - 1]).dot(&us), wl);
        }
    }

    /// `⟨φ|O|φ⟩ / ⟨φ|φ⟩`.
    pub fn expectation(&self, m: &Mps) -> Result<C64> {
        if m.n() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), found: m.n() });
        }
        let mut env = ndarray::Array3::from_elem((1, 1, 1), ONE);
        for (a, w) in m.tensors().iter().zip(&self.tensors) {
            env = left_env_update(&env, a, w);
        }
        Ok(env[[0, 0, 0]] / m.overlap(m))
    }
}

/// Drops zero or parallel vectors of `a` (columns when `rows == false`, rows
/// otherwise) and folds their weight into the matching rows (columns) of `b`.
fn merge_parallel<F>(a: Array2<C64>, b: Array2<C64>, get: F, rows: bool) -> (Array2<C64>, Array2<C64>)
where
    F: Fn(&Array2<C64>, usize) -> Vec<C64>,
{
    let count = if rows { a.nrows() } else { a.ncols() };
    let vecs: Vec<Vec<C64>> = (0..count).map(|i| get(&a, i)).collect();
    let mut kept: Vec<usize> = Vec::new();
    // (index into kept, factor) for every original vector
    let mut map: Vec<(usize, C64)> = Vec::with_capacity(count);
    let mut zero: Vec<bool> = vec![false; count];
    for i in 0..count {
        let nrm: f64 = vecs[i].iter().map(|x| x.norm_sqr()).sum::<f64>();
        if nrm == 0.0 {
            zero[i] = true;
            map.push((0, ZERO));
            continue;
        }
        let hit = kept.iter().enumerate().find_map(|(slot, &k)| {
            parallel_factor(&vecs[k], &vecs[i], 1e-13).map(|alpha| (slot, alpha))
        });
        match hit {
            Some(h) => map.push(h),
            None => {
                map.push((kept.len(), ONE));
                kept.push(i);
            }
        }
    }
    if kept.is_empty() {
        kept.push(0);
        map[0] = (0, ZERO);
    }
    let r = kept.len();
    if rows {
        let mut na = Array2::zeros((r, a.ncols()));
        for (slot, &k) in kept.iter().enumerate() {
            na.row_mut(slot).assign(&a.row(k));
        }
        let mut nb = Array2::zeros((b.nrows(), r));
        for (i, &(slot, f)) in map.iter().enumerate() {
            if !zero[i] {
                let col = b.column(i).mapv(|x| x * f);
                let mut dst = nb.column_mut(slot);
                dst += &col;
            }
        }
        (na, nb)
    } else {
        let mut na = Array2::zeros((a.nrows(), r));
        for (slot, &k) in kept.iter().enumerate() {
            na.column_mut(slot).assign(&a.column(k));
        }
        let mut nb = Array2::zeros((r, b.ncols()));
        for (i, &(slot, f)) in map.iter().enumerate() {
            if !zero[i] {
                let row = b.row(i).mapv(|x| x * f);
                let mut dst = nb.row_mut(slot);
                dst += &row;
            }
        }
        (na, nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{candidate_gate_set, Sites};
    use crate::dense::{mpo_matrix, pauli_sum_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tfim(n: usize, h: f64) -> PauliSum {
        let mut s = PauliSum::new(n);
        for j in 0..n - 1 {
            let mut ax = vec![0u8; n];
            ax[j] = 1;
            ax[j + 1] = 1;
            s.add_term(1.0, &PauliString::from_axes(&ax).unwrap()).unwrap();
        }
        for j in 0..n {
            s.add_term(-h, &PauliString::single(n, j, 3).unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn single_term_is_bond_one() {
        let mut h = PauliSum::new(4);
        h.add_term(0.7, &PauliString::single(4, 0, 3).unwrap()).unwrap();
        let m = Mpo::from_pauli_sum(&h, 64, 1e-12).unwrap();
        assert_eq!(m.bond_dims(), vec![1, 1, 1]);
        assert!(linalg::max_abs_diff(&mpo_matrix(&m).unwrap(), &pauli_sum_matrix(&h).unwrap()) < 1e-12);
    }

    #[test]
    fn tfim_compresses_to_three() {
        let h = tfim(6, 1.0);
        let m = Mpo::from_pauli_sum(&h, 64, 1e-12).unwrap();
        assert_eq!(m.max_bond(), 3);
        assert!(linalg::max_abs_diff(&mpo_matrix(&m).unwrap(), &pauli_sum_matrix(&h).unwrap()) < 1e-10);
        assert!(matches!(
            Mpo::from_pauli_sum(&h, 2, 1e-12),
            Err(Error::MpoBondOverflow { attained: 3, cap: 2, .. })
        ));
    }

    #[test]
    fn dressed_tfim_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let set = candidate_gate_set();
        let mut h = tfim(6, 0.8);
        for _ in 0..12 {
            let g = &set[rng.random_range(0..set.len())];
            let j = rng.random_range(0..5);
            h = h.conjugate_by_gate(g, &Sites::Two(j, j + 1)).unwrap();
        }
        let m = Mpo::from_pauli_sum(&h, 256, 1e-12).unwrap();
        assert!(linalg::max_abs_diff(&mpo_matrix(&m).unwrap(), &pauli_sum_matrix(&h).unwrap()) < 1e-10);
    }

    #[test]
    fn empty_sum_is_zero_operator() {
        let m = Mpo::from_pauli_sum(&PauliSum::new(3), 4, 1e-12).unwrap();
        assert!(mpo_matrix(&m).unwrap().iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn projector_matrices() {
        let z = Mpo::projector(&PauliString::parse("Z").unwrap()).unwrap();
        let pz = mpo_matrix(&z).unwrap();
        assert!((pz[[0, 0]] - ONE).norm() < 1e-15 && pz[[1, 1]].norm() < 1e-15);
        let zm = Mpo::projector(&PauliString::parse("-Z").unwrap()).unwrap();
        let pzm = mpo_matrix(&zm).unwrap();
        assert!(pzm[[0, 0]].norm() < 1e-15 && (pzm[[1, 1]] - ONE).norm() < 1e-15);
        for word in ["XX", "-XYZ", "ZIIY", "-IXI"] {
            let g = PauliString::parse(word).unwrap();
            let p = mpo_matrix(&Mpo::projector(&g).unwrap()).unwrap();
            let dim = p.nrows();
            let mut gs = PauliSum::new(g.n());
            gs.add_term(0.5, &g).unwrap();
            let want = pauli_sum_matrix(&gs).unwrap() + Array2::<C64>::eye(dim) * C64::new(0.5, 0.0);
            assert!(linalg::max_abs_diff(&p, &want) < 1e-14, "{word}");
            assert!(linalg::max_abs_diff(&p.dot(&p), &p) < 1e-14);
            assert!(linalg::max_abs_diff(&linalg::adjoint(&p), &p) < 1e-14);
        }
        assert!(matches!(
            Mpo::projector(&PauliString::parse("iXZ").unwrap()),
            Err(Error::NonHermitian)
        ));
    }

    #[test]
    fn deparallelize_trims_projector_support() {
        let g = PauliString::parse("IIXZIYII").unwrap();
        let mut p = Mpo::projector(&g).unwrap();
        let before = mpo_matrix(&p).unwrap();
        p.deparallelize();
        assert_eq!(p.bond_dims(), vec![1, 1, 2, 2, 2, 1, 1]);
        assert!(linalg::max_abs_diff(&mpo_matrix(&p).unwrap(), &before) < 1e-14);
    }

    #[test]
    fn expectation_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = Mps::random(5, 4, &mut rng);
        let h = tfim(5, 0.6);
        let m = Mpo::from_pauli_sum(&h, 16, 1e-12).unwrap();
        let d = crate::dense::DenseState::from_mps(&phi).unwrap();
        let want = d.expectation(&h).unwrap();
        assert!((m.expectation(&phi).unwrap().re - want).abs() < 1e-12);
    }
}
