//! Matrix product states and operators.
//!
//! Site tensors are `(left bond, physical, right bond)` arrays in standard
//! layout; physical index `b` is the `σ³` eigenstate with eigenvalue
//! `(-1)^b`. MPO tensors are `(left bond, out, in, right bond)`.

mod apply;
pub mod checkpoint;
pub(crate) mod env;
mod mpo;
mod truncation;

pub use apply::apply_mpo;
pub use mpo::Mpo;
pub use truncation::SvdTruncation;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::stabilizer::Bitstring;

/// Direction in which the orthogonality center travels.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sweep {
    Right,
    Left,
}

#[derive(Clone, Debug)]
pub struct Mps {
    tensors: Vec<Array3<C64>>,
    center: Option<usize>,
    chi_max: usize,
}

pub(crate) fn left_matrix(a: &Array3<C64>) -> Array2<C64> {
    let (dl, d, dr) = a.dim();
    a.to_shape((dl * d, dr)).unwrap().to_owned()
}

pub(crate) fn right_matrix(a: &Array3<C64>) -> Array2<C64> {
    let (dl, d, dr) = a.dim();
    a.to_shape((dl, d * dr)).unwrap().to_owned()
}

pub(crate) fn tensor_from_left(m: Array2<C64>, dl: usize) -> Array3<C64> {
    let dr = m.ncols();
    m.as_standard_layout().into_owned().into_shape_with_order((dl, 2, dr)).unwrap()
}

pub(crate) fn tensor_from_right(m: Array2<C64>, dr: usize) -> Array3<C64> {
    let dl = m.nrows();
    m.as_standard_layout().into_owned().into_shape_with_order((dl, 2, dr)).unwrap()
}

/// Largest bond dimension that can carry information across bond `b`
/// (between sites `b` and `b+1`) of an `n`-site chain.
pub fn full_bond_dim(n: usize, b: usize) -> usize {
    let l = (b + 1).min(62) as u32;
    let r = (n - b - 1).min(62) as u32;
    1usize << l.min(r)
}

pub(crate) fn entropy_of(s: &[f64]) -> f64 {
    let total: f64 = s.iter().map(|x| x * x).sum();
    if total <= 0.0 {
        return 0.0;
    }
    s.iter()
        .map(|x| x * x / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

impl Mps {
    /// Validates shapes and wraps the tensors. No orthogonality center is
    /// assumed.
    pub fn from_tensors(tensors: Vec<Array3<C64>>) -> Result<Self> {
        let n = tensors.len();
        if n == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        for (k, t) in tensors.iter().enumerate() {
            let (dl, d, dr) = t.dim();
            if d != 2 {
                return Err(Error::InvalidArgument(format!("site {k} has physical dimension {d}")));
            }
            if k == 0 && dl != 1 || k == n - 1 && dr != 1 {
                return Err(Error::InvalidArgument("boundary bonds must have dimension 1".into()));
            }
            if k + 1 < n && tensors[k + 1].dim().0 != dr {
                return Err(Error::InvalidArgument(format!("bond mismatch after site {k}")));
            }
        }
        let tensors = tensors.into_iter().map(|t| t.as_standard_layout().into_owned()).collect();
        Ok(Mps { tensors, center: None, chi_max: usize::MAX })
    }

    pub fn product_state(x: &Bitstring) -> Self {
        let tensors = (0..x.len())
            .map(|j| {
                let mut t = Array3::zeros((1, 2, 1));
                t[[0, x.get(j) as usize, 0]] = C64::new(1.0, 0.0);
                t
            })
            .collect();
        Mps { tensors, center: Some(0), chi_max: usize::MAX }
    }

    pub fn zero_state(n: usize) -> Self {
        Self::product_state(&Bitstring::zeros(n))
    }

    /// Product state with arbitrary normalized single-site vectors.
    pub fn product_of(states: &[[C64; 2]]) -> Self {
        let tensors = states
            .iter()
            .map(|v| {
                let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                Array3::from_shape_fn((1, 2, 1), |(_, s, _)| v[s] / nrm)
            })
            .collect();
        Mps { tensors, center: Some(0), chi_max: usize::MAX }
    }

    /// Exact MPS of a dense state vector (qubit 0 most significant) by
    /// successive SVDs; the center ends on the last site.
    pub fn from_dense(psi: &[C64], n: usize) -> Result<Self> {
        if n == 0 || psi.len() != 1 << n {
            return Err(Error::LengthMismatch { expected: 1 << n, found: psi.len() });
        }
        let mut tensors = Vec::with_capacity(n);
        let mut rest = Array2::from_shape_vec((1, psi.len()), psi.to_vec()).unwrap();
        for _ in 0..n - 1 {
            let dl = rest.nrows();
            let cols = rest.ncols() / 2;
            let m = rest.into_shape_with_order((dl * 2, cols)).unwrap();
            let (u, s, vt) = linalg::svd(&m);
            let (keep, _) = SvdTruncation::new(usize::MAX, 1e-30).retain(&s);
            let u = u.slice(ndarray::s![.., ..keep]).to_owned();
            let mut sv = vt.slice(ndarray::s![..keep, ..]).to_owned();
            for (i, mut row) in sv.axis_iter_mut(Axis(0)).enumerate() {
                row *= C64::new(s[i], 0.0);
            }
            tensors.push(tensor_from_left(u, dl));
            rest = sv;
        }
        let dl = rest.nrows();
        tensors.push(rest.into_shape_with_order((dl, 2, 1)).unwrap());
        Ok(Mps { tensors, center: Some(n - 1), chi_max: usize::MAX })
    }

    /// Random normalized state with bond dimensions `min(chi, full)`,
    /// canonical at site 0.
    pub fn random<R: Rng + ?Sized>(n: usize, chi: usize, rng: &mut R) -> Self {
        let dims: Vec<usize> = (0..=n)
            .map(|b| if b == 0 || b == n { 1 } else { full_bond_dim(n, b - 1).min(chi) })
            .collect();
        let tensors = (0..n)
            .map(|k| {
                Array3::from_shape_fn((dims[k], 2, dims[k + 1]), |_| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let mut m = Mps { tensors, center: None, chi_max: chi };
        m.canonicalize(0).unwrap();
        m.normalize();
        m
    }

    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    pub fn center(&self) -> Option<usize> {
        self.center
    }

    pub fn chi_max(&self) -> usize {
        self.chi_max
    }

    pub fn set_chi_max(&mut self, chi: usize) {
        self.chi_max = chi.max(1);
    }

    pub fn tensors(&self) -> &[Array3<C64>] {
        &self.tensors
    }

    pub fn tensor(&self, k: usize) -> &Array3<C64> {
        &self.tensors[k]
    }

    /// Replaces one tensor, dropping the orthogonality center.
    pub fn set_tensor(&mut self, k: usize, t: Array3<C64>) {
        self.tensors[k] = t.as_standard_layout().into_owned();
        self.center = None;
    }

    pub(crate) fn tensors_mut(&mut self) -> &mut Vec<Array3<C64>> {
        &mut self.tensors
    }

    pub(crate) fn set_center(&mut self, c: Option<usize>) {
        self.center = c;
    }

    /// Bond dimensions including the two trivial boundary bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.tensors.iter().map(|t| t.dim().0).collect();
        d.push(1);
        d
    }

    pub fn max_bond(&self) -> usize {
        self.tensors.iter().map(|t| t.dim().2).max().unwrap_or(1)
    }

    fn check_site(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            Err(Error::SiteOutOfRange { site: k, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Left-orthonormalizes site `k` and pushes the remainder into `k+1`.
    pub(crate) fn move_right(&mut self, k: usize) {
        let dl = self.tensors[k].dim().0;
        let (q, r) = linalg::qr(&left_matrix(&self.tensors[k]));
        self.tensors[k] = tensor_from_left(q, dl);
        let dr2 = self.tensors[k + 1].dim().2;
        let next = r.dot(&right_matrix(&self.tensors[k + 1]));
        self.tensors[k + 1] = tensor_from_right(next, dr2);
    }

    /// Right-orthonormalizes site `k` and pushes the remainder into `k-1`.
    pub(crate) fn move_left(&mut self, k: usize) {
        let dr = self.tensors[k].dim().2;
        let (l, q) = linalg::lq(&right_matrix(&self.tensors[k]));
        self.tensors[k] = tensor_from_right(q, dr);
        let dl0 = self.tensors[k - 1].dim().0;
        let prev = left_matrix(&self.tensors[k - 1]).dot(&l);
        self.tensors[k - 1] = tensor_from_left(prev, dl0);
    }

    /// Brings the orthogonality center to `center`.
    pub fn canonicalize(&mut self, center: usize) -> Result<()> {
        self.check_site(center)?;
        match self.center {
            Some(c) if c <= center => {
                for k in c..center {
                    self.move_right(k);
                }
            }
            Some(c) => {
                for k in (center + 1..=c).rev() {
                    self.move_left(k);
                }
            }
            None => {
                for k in 0..center {
                    self.move_right(k);
                }
                for k in (center + 1..self.n()).rev() {
                    self.move_left(k);
                }
            }
        }
        self.center = Some(center);
        Ok(())
    }

    pub fn canonicalized(&self, center: usize) -> Result<Mps> {
        let mut m = self.clone();
        m.canonicalize(center)?;
        Ok(m)
    }

    /// Full left and right re-orthonormalization regardless of the recorded
    /// center.
    pub fn recanonicalize(&mut self, center: usize) -> Result<()> {
        self.center = None;
        self.canonicalize(center)
    }

    pub fn norm(&self) -> f64 {
        match self.center {
            Some(c) => self.tensors[c].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(),
            None => self.overlap(self).re.max(0.0).sqrt(),
        }
    }

    /// Rescales to unit norm and returns the previous norm.
    pub fn normalize(&mut self) -> f64 {
        let nrm = self.norm();
        if nrm > 0.0 {
            let k = self.center.unwrap_or(0);
            self.tensors[k].mapv_inplace(|x| x / nrm);
        }
        nrm
    }

    /// Multiplies the state by a scalar.
    pub fn scale(&mut self, c: C64) {
        let k = self.center.unwrap_or(0);
        self.tensors[k].mapv_inplace(|x| x * c);
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Mps) -> C64 {
        let mut e = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for (a, b) in self.tensors.iter().zip(&other.tensors) {
            let mut next = Array2::<C64>::zeros((a.dim().2, b.dim().2));
            for s in 0..2 {
                let asl = a.index_axis(Axis(1), s);
                let bsl = b.index_axis(Axis(1), s);
                next = next + asl.t().mapv(|c| c.conj()).dot(&e.dot(&bsl));
            }
            e = next;
        }
        e[[0, 0]]
    }

    /// `⟨x|φ⟩` in `O(Nχ²)`.
    pub fn amplitude(&self, x: &Bitstring) -> Result<C64> {
        if x.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), found: x.len() });
        }
        let mut v = vec![C64::new(1.0, 0.0)];
        let mut next = Vec::new();
        for (k, a) in self.tensors.iter().enumerate() {
            let (dl, _, dr) = a.dim();
            let data = a.as_slice().expect("standard layout");
            let s = x.get(k) as usize;
            next.clear();
            next.resize(dr, C64::new(0.0, 0.0));
            for (i, &vi) in v.iter().enumerate().take(dl) {
                if vi == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &data[(i * 2 + s) * dr..(i * 2 + s + 1) * dr];
                for (o, &r) in next.iter_mut().zip(row) {
                    *o += vi * r;
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        Ok(v[0])
    }

    /// Applies a 2×2 operator to site `k` in place.
    pub fn apply_single_site(&mut self, op: &Array2<C64>, k: usize) -> Result<()> {
        self.check_site(k)?;
        let t = &self.tensors[k];
        let new = Array3::from_shape_fn(t.dim(), |(a, s, b)| op[[s, 0]] * t[[a, 0, b]] + op[[s, 1]] * t[[a, 1, b]]);
        self.tensors[k] = new;
        if self.center != Some(k) {
            self.center = None;
        }
        Ok(())
    }

    /// Applies a 4×4 gate to sites `(j, j+1)` (site `j` is the more
    /// significant index of the gate), truncating the new bond. The center
    /// ends on `j+1` for [`Sweep::Right`] and on `j` for [`Sweep::Left`].
    /// Returns the discarded weight.
    pub fn apply_two_site_gate(
        &mut self,
        gate: &Array2<C64>,
        sites: (usize, usize),
        tr: &SvdTruncation,
        dir: Sweep,
    ) -> Result<f64> {
        let (j, j1) = sites;
        if j1 != j + 1 {
            return Err(Error::NonAdjacentSites(j, j1));
        }
        self.check_site(j1)?;
        if gate.dim() != (4, 4) {
            return Err(Error::InvalidArgument("two-site gate must be 4x4".into()));
        }
        let dev = linalg::max_abs_diff(&linalg::adjoint(gate).dot(gate), &Array2::eye(4));
        if dev > 1e-12 {
            return Err(Error::NotUnitary(dev));
        }
        if !matches!(self.center, Some(c) if c == j || c == j1) {
            self.canonicalize(j)?;
        }
        let theta = self.two_site_theta(j);
        let theta = apply_gate_to_theta(&theta, gate);
        self.split_theta(j, theta, tr, dir)
    }

    /// Two-site tensor of `(j, j+1)` as a `(dl, 4, dr)` array.
    pub(crate) fn two_site_theta(&self, j: usize) -> Array3<C64> {
        let dl = self.tensors[j].dim().0;
        let dr = self.tensors[j + 1].dim().2;
        let m = left_matrix(&self.tensors[j]).dot(&right_matrix(&self.tensors[j + 1]));
        m.into_shape_with_order((dl, 4, dr)).unwrap()
    }

    /// SVD-splits a `(dl, 4, dr)` two-site tensor back into sites `j, j+1`.
    pub(crate) fn split_theta(&mut self, j: usize, theta: Array3<C64>, tr: &SvdTruncation, dir: Sweep) -> Result<f64> {
        let (dl, _, dr) = theta.dim();
        let m = theta.into_shape_with_order((dl * 2, 2 * dr)).unwrap();
        let (u, s, vt) = linalg::svd(&m);
        let cap = SvdTruncation { chi_max: tr.chi_max.min(self.chi_max), cutoff: tr.cutoff };
        let (keep, discarded) = cap.retain(&s);
        let mut u = u.slice(ndarray::s![.., ..keep]).to_owned();
        let mut vt = vt.slice(ndarray::s![..keep, ..]).to_owned();
        match dir {
            Sweep::Right => {
                for (i, mut row) in vt.axis_iter_mut(Axis(0)).enumerate() {
                    row *= C64::new(s[i], 0.0);
                }
                self.center = Some(j + 1);
            }
            Sweep::Left => {
                for (i, mut col) in u.axis_iter_mut(Axis(1)).enumerate() {
                    col *= C64::new(s[i], 0.0);
                }
                self.center = Some(j);
            }
        }
        self.tensors[j] = tensor_from_left(u, dl);
        self.tensors[j + 1] = tensor_from_right(vt, dr);
        Ok(discarded)
    }

    /// Schmidt values across bond `b` (between sites `b` and `b+1`).
    pub fn schmidt_values(&mut self, bond: usize) -> Result<Vec<f64>> {
        if bond + 1 >= self.n() {
            return Err(Error::InvalidArgument(format!("no bond {bond} in a {}-site chain", self.n())));
        }
        self.canonicalize(bond)?;
        Ok(linalg::singular_values(&left_matrix(&self.tensors[bond])))
    }

    /// Von Neumann entropy (nats) across bond `b`.
    pub fn entanglement_entropy(&mut self, bond: usize) -> Result<f64> {
        Ok(entropy_of(&self.schmidt_values(bond)?))
    }

    /// Entropies of every bond, computed on a copy in one sweep.
    pub fn bond_entropies(&self) -> Vec<f64> {
        let mut m = self.clone();
        m.canonicalize(0).unwrap();
        let n = m.n();
        let mut out = Vec::with_capacity(n.saturating_sub(1));
        for b in 0..n.saturating_sub(1) {
            let dl = m.tensors[b].dim().0;
            let (u, s, vt) = linalg::svd(&left_matrix(&m.tensors[b]));
            out.push(entropy_of(&s));
            m.tensors[b] = tensor_from_left(u, dl);
            let mut sv = vt;
            for (i, mut row) in sv.axis_iter_mut(Axis(0)).enumerate() {
                row *= C64::new(s[i], 0.0);
            }
            let dr2 = m.tensors[b + 1].dim().2;
            m.tensors[b + 1] = tensor_from_right(sv.dot(&right_matrix(&m.tensors[b + 1])), dr2);
        }
        out
    }

    /// Zero-pads every bond up to `min(chi, full_bond_dim)` and re-orthonormalizes
    /// with the center on site 0. The state is unchanged.
    pub fn expand_bonds(&mut self, chi: usize) {
        let n = self.n();
        for b in 0..n.saturating_sub(1) {
            let target = full_bond_dim(n, b).min(chi);
            let cur = self.tensors[b].dim().2;
            if cur >= target {
                continue;
            }
            let a = &self.tensors[b];
            let (dl, _, _) = a.dim();
            let mut na = Array3::zeros((dl, 2, target));
            na.slice_mut(ndarray::s![.., .., ..cur]).assign(a);
            self.tensors[b] = na;
            let c = &self.tensors[b + 1];
            let (_, _, dr) = c.dim();
            let mut nc = Array3::zeros((target, 2, dr));
            nc.slice_mut(ndarray::s![..cur, .., ..]).assign(c);
            self.tensors[b + 1] = nc;
        }
        self.recanonicalize(0).unwrap();
    }
}

/// `θ'[a, s', b] = Σ_s G[s', s] θ[a, s, b]` for a `(dl, 4, dr)` tensor.
pub(crate) fn apply_gate_to_theta(theta: &Array3<C64>, gate: &Array2<C64>) -> Array3<C64> {
    let (dl, _, dr) = theta.dim();
    let front = theta.view().permuted_axes([1, 0, 2]);
    let front = front.as_standard_layout();
    let m = front.to_shape((4, dl * dr)).unwrap();
    let out = gate.dot(&m);
    let out = out.into_shape_with_order((4, dl, dr)).unwrap();
    out.permuted_axes([1, 0, 2]).as_standard_layout().into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::CliffordGate;
    use crate::dense::DenseState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense(m: &Mps) -> DenseState {
        DenseState::from_mps(m).unwrap()
    }

    fn identity_gram(t: &Array3<C64>, left: bool) -> f64 {
        let m = if left { left_matrix(t) } else { right_matrix(t) };
        let g = if left { linalg::adjoint(&m).dot(&m) } else { m.dot(&linalg::adjoint(&m)) };
        linalg::max_abs_diff(&g, &Array2::eye(g.nrows()))
    }

    #[test]
    fn canonical_form_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Mps::random(6, 4, &mut rng);
        let before = dense(&m);
        for c in 0..6 {
            let mc = m.canonicalized(c).unwrap();
            for k in 0..c {
                assert!(identity_gram(&mc.tensors[k], true) < 1e-10);
            }
            for k in c + 1..6 {
                assert!(identity_gram(&mc.tensors[k], false) < 1e-10);
            }
            assert!(dense(&mc).fidelity(&before) > 1.0 - 1e-12);
        }
        assert!(m.canonicalized(6).is_err());
    }

    #[test]
    fn product_amplitudes() {
        let m = Mps::zero_state(4);
        assert_eq!(m.amplitude(&Bitstring::zeros(4)).unwrap(), C64::new(1.0, 0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = Mps::product_of(&[[C64::new(r, 0.0), C64::new(r, 0.0)]; 3]);
        let a = plus.amplitude(&Bitstring::parse("101").unwrap()).unwrap();
        assert!((a - C64::new(2f64.powf(-1.5), 0.0)).norm() < 1e-15);
        assert!(m.amplitude(&Bitstring::zeros(3)).is_err());
        let mut p = Mps::zero_state(3);
        for b in 0..2 {
            assert_eq!(p.entanglement_entropy(b).unwrap(), 0.0);
        }
        assert!(p.entanglement_entropy(2).is_err());
    }

    #[test]
    fn gates_and_entropy() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = Mps::product_of(&[[C64::new(r, 0.0), C64::new(r, 0.0)], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]);
        let cx = CliffordGate::cx();
        let d = m.apply_two_site_gate(cx.unitary(), (0, 1), &SvdTruncation::default(), Sweep::Right).unwrap();
        assert_eq!(d, 0.0);
        assert!((m.entanglement_entropy(0).unwrap() - 2f64.ln()).abs() < 1e-12);
        let eye = Array2::<C64>::eye(4);
        let before = dense(&m);
        let d = m.apply_two_site_gate(&eye, (0, 1), &SvdTruncation::default(), Sweep::Left).unwrap();
        assert_eq!(d, 0.0);
        assert!(dense(&m).fidelity(&before) > 1.0 - 1e-14);
        assert!(matches!(
            m.apply_two_site_gate(&eye, (0, 2), &SvdTruncation::default(), Sweep::Left),
            Err(Error::NonAdjacentSites(0, 2))
        ));
        let mut bad = eye.clone();
        bad[[0, 0]] = C64::new(2.0, 0.0);
        assert!(matches!(
            m.apply_two_site_gate(&bad, (0, 1), &SvdTruncation::default(), Sweep::Left),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn expand_bonds_keeps_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut m = Mps::random(7, 2, &mut rng);
        let before = dense(&m);
        m.expand_bonds(6);
        assert_eq!(m.bond_dims(), vec![1, 2, 4, 6, 6, 4, 2, 1]);
        assert_eq!(m.center(), Some(0));
        assert!(dense(&m).fidelity(&before) > 1.0 - 1e-12);
        for k in 1..7 {
            assert!(identity_gram(&m.tensors[k], false) < 1e-10);
        }
    }

    #[test]
    fn from_dense_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = DenseState::random(5, &mut rng);
        let m = Mps::from_dense(psi.amplitudes(), 5).unwrap();
        assert!(dense(&m).max_diff(&psi) < 1e-12);
        assert!((m.norm() - 1.0).abs() < 1e-12);
    }
}
