//! Dense statevector oracle for small systems.
//!
//! Index convention: qubit 0 is the most significant bit of the basis index.
//! Every constructor refuses systems above [`qubit_cap`] qubits.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::clifford::{CliffordCircuit, CliffordGate, Sites};
use crate::error::{Error, Result};
use crate::krylov::{krylov_expmv, KrylovOptions};
use crate::linalg;
use crate::mps::{Mpo, Mps};
use crate::pauli::{PauliString, PauliSum};
use crate::stabilizer::{Bitstring, StabilizerTableau};

pub const DEFAULT_QUBIT_CAP: usize = 14;

static QUBIT_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_QUBIT_CAP);

pub fn qubit_cap() -> usize {
    QUBIT_CAP.load(Ordering::Relaxed)
}

/// Raises or lowers the size limit for every dense routine.
pub fn set_qubit_cap(cap: usize) {
    QUBIT_CAP.store(cap.min(30), Ordering::Relaxed);
}

fn check_cap(n: usize) -> Result<()> {
    let cap = qubit_cap();
    if n == 0 {
        Err(Error::InvalidQubitCount(0))
    } else if n > cap {
        Err(Error::OracleTooLarge { n, cap })
    } else {
        Ok(())
    }
}

/// `(x mask, z mask, i-exponent)` of a Pauli string in dense index order.
fn masks(p: &PauliString) -> (usize, usize, u32) {
    let n = p.n();
    let (mut xm, mut zm) = (0usize, 0usize);
    for j in 0..n {
        let bit = 1usize << (n - 1 - j);
        if p.x_bit(j) {
            xm |= bit;
        }
        if p.z_bit(j) {
            zm |= bit;
        }
    }
    (xm, zm, (p.phase() as u32 + p.y_count()) % 4)
}

fn ipow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        check_cap(n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn basis(x: &Bitstring) -> Result<Self> {
        let mut s = Self::zero(x.len())?;
        s.amps[0] = C64::new(0.0, 0.0);
        s.amps[x.index()] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        check_cap(n)?;
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch { expected: 1 << n, found: amps.len() });
        }
        Ok(DenseState { n, amps })
    }

    /// Normalized state with independent uniform real and imaginary parts.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..1usize << n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut s = DenseState { n, amps };
        s.normalize();
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, x: &Bitstring) -> C64 {
        self.amps[x.index()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> f64 {
        let nrm = self.norm();
        if nrm > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= nrm);
        }
        nrm
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &DenseState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        let o = self.overlap(other).norm_sqr();
        o / (self.norm().powi(2) * other.norm().powi(2))
    }

    pub fn max_diff(&self, other: &DenseState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference after rotating `other` onto the global
    /// phase of `self` (fixed at the largest entry of `self`).
    pub fn max_diff_up_to_phase(&self, other: &DenseState) -> f64 {
        let (k, _) = self
            .amps
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, a)| if a.norm() > acc.1 { (i, a.norm()) } else { acc });
        if other.amps[k].norm() == 0.0 {
            return f64::INFINITY;
        }
        let rot = self.amps[k] / other.amps[k];
        let rot = rot / rot.norm();
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - rot * b).norm()).fold(0.0, f64::max)
    }

    /// Contracts every site tensor.
    pub fn from_mps(m: &Mps) -> Result<Self> {
        check_cap(m.n())?;
        let mut cur = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for t in m.tensors() {
            let (dl, d, dr) = t.dim();
            let prefix = cur.nrows();
            let next = cur.dot(&t.to_shape((dl, d * dr)).unwrap());
            cur = next.into_shape_with_order((prefix * d, dr)).unwrap();
        }
        Ok(DenseState { n: m.n(), amps: cur.into_iter().collect() })
    }

    /// `|s⟩` as the normalized image of the first basis state that survives
    /// the product of projectors `(I + g_j)/2`. The global phase is arbitrary.
    pub fn from_tableau(t: &StabilizerTableau) -> Result<Self> {
        let n = t.n();
        check_cap(n)?;
        let floor = 0.25 / (1u64 << n) as f64;
        for x in 0..1usize << n {
            let mut v = Self::basis(&Bitstring::from_index(n, x))?;
            for g in t.stabilizers() {
                let gv = v.apply_pauli(g);
                v.amps.iter_mut().zip(&gv.amps).for_each(|(a, b)| *a = (*a + b) * 0.5);
            }
            if v.norm().powi(2) > floor {
                v.normalize();
                return Ok(v);
            }
        }
        Err(Error::InvalidArgument("tableau projects every basis state to zero".into()))
    }

    /// Applies an arbitrary `2^N × 2^N` matrix.
    pub fn apply_matrix(&self, m: &Array2<C64>) -> DenseState {
        let v = Array1::from(self.amps.clone());
        DenseState { n: self.n, amps: m.dot(&v).to_vec() }
    }

    /// Applies a `2^k × 2^k` operator to the listed sites; `sites[0]` is the
    /// most significant local qubit.
    pub fn apply_local(&self, op: &Array2<C64>, sites: &[usize]) -> Result<DenseState> {
        let k = sites.len();
        if op.dim() != (1 << k, 1 << k) {
            return Err(Error::InvalidArgument("operator size does not match site count".into()));
        }
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.n {
                return Err(Error::SiteOutOfRange { site: s, n: self.n });
            }
            if sites[..i].contains(&s) {
                return Err(Error::RepeatedSite);
            }
        }
        let bits: Vec<usize> = sites.iter().map(|&s| 1usize << (self.n - 1 - s)).collect();
        let mask: usize = bits.iter().sum();
        let offset = |l: usize| -> usize {
            (0..k).filter(|&q| (l >> (k - 1 - q)) & 1 == 1).map(|q| bits[q]).sum()
        };
        let offsets: Vec<usize> = (0..1 << k).map(offset).collect();
        let mut out = self.amps.clone();
        let mut local = vec![C64::new(0.0, 0.0); 1 << k];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, &o) in offsets.iter().enumerate() {
                local[l] = self.amps[base | o];
            }
            for (r, &o) in offsets.iter().enumerate() {
                out[base | o] = (0..1 << k).map(|c| op[[r, c]] * local[c]).sum();
            }
        }
        Ok(DenseState { n: self.n, amps: out })
    }

    pub fn apply_gate(&self, gate: &CliffordGate, sites: &Sites) -> Result<DenseState> {
        sites.validate(self.n, gate.arity())?;
        match *sites {
            Sites::One(a) => self.apply_local(gate.unitary(), &[a]),
            Sites::Two(a, b) => self.apply_local(gate.unitary(), &[a, b]),
        }
    }

    pub fn apply_circuit(&self, c: &CliffordCircuit) -> Result<DenseState> {
        let mut s = self.clone();
        for g in c.gates() {
            s = s.apply_gate(&g.gate, &g.sites)?;
        }
        Ok(s)
    }

    pub fn apply_pauli(&self, p: &PauliString) -> DenseState {
        let (xm, zm, k) = masks(p);
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        let ph = ipow(k);
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ xm] = ph * sign * a;
        }
        DenseState { n: self.n, amps: out }
    }

    pub fn apply_pauli_sum(&self, h: &PauliSum) -> DenseState {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (c, p) in h.iter() {
            let (xm, zm, k) = masks(p);
            let ph = ipow(k) * c;
            for (b, a) in self.amps.iter().enumerate() {
                let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[b ^ xm] += ph * sign * a;
            }
        }
        DenseState { n: self.n, amps: out }
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn expectation(&self, h: &PauliSum) -> Result<f64> {
        if h.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: h.n() });
        }
        Ok(self.overlap(&self.apply_pauli_sum(h)).re / self.norm().powi(2))
    }

    /// Von Neumann entropy across the cut after qubit `bond`, from the
    /// eigenvalues of the left reduced density matrix.
    pub fn entanglement_entropy(&self, bond: usize) -> Result<f64> {
        if bond + 1 >= self.n {
            return Err(Error::InvalidArgument(format!("no bond {bond}")));
        }
        let rows = 1usize << (bond + 1);
        let cols = self.amps.len() / rows;
        let m = Array2::from_shape_vec((rows, cols), self.amps.clone()).unwrap();
        let rho = m.dot(&linalg::adjoint(&m));
        let tr: f64 = rho.diag().iter().map(|x| x.re).sum();
        let (vals, _) = linalg::eigh(&rho);
        Ok(vals.iter().map(|&l| l / tr).filter(|&p| p > 1e-300).map(|p| -p * p.ln()).sum())
    }

    /// `exp(-iHt)|ψ⟩` by diagonalizing `H`.
    pub fn evolve(&self, h: &PauliSum, t: f64) -> Result<DenseState> {
        Ok(DensePropagator::new(h)?.apply(self, t))
    }

    /// `exp(-iHt)|ψ⟩` by Krylov steps with `‖H‖·τ ≲ 1` per step.
    pub fn evolve_krylov(&self, h: &PauliSum, t: f64) -> Result<DenseState> {
        check_cap(self.n)?;
        if t == 0.0 {
            return Ok(self.clone());
        }
        let bound: f64 = h.iter().map(|(c, _)| c.abs()).sum::<f64>().max(1e-12);
        let steps = (t.abs() * bound).ceil().max(1.0) as usize;
        let tau = t / steps as f64;
        let mut v = Array1::from(self.amps.clone());
        let n = self.n;
        let action = |x: &Array1<C64>| {
            let s = DenseState { n, amps: x.to_vec() };
            Array1::from(s.apply_pauli_sum(h).amps)
        };
        let opts = KrylovOptions { tol: 1e-13, max_dim: 40 };
        for _ in 0..steps {
            v = krylov_expmv(action, &v, C64::new(tau, 0.0), &opts)?;
        }
        Ok(DenseState { n, amps: v.to_vec() })
    }
}

/// Eigendecomposition of a Pauli-sum Hamiltonian for repeated `exp(-iHt)`.
pub struct DensePropagator {
    vals: Vec<f64>,
    vecs: Array2<C64>,
}

impl DensePropagator {
    pub fn new(h: &PauliSum) -> Result<Self> {
        let m = pauli_sum_matrix(h)?;
        let real = m.iter().all(|x| x.im == 0.0);
        let (vals, vecs) = if real {
            let dim = m.nrows();
            let rm = m.mapv(|x| x.re);
            let (vals, v) = linalg::eigh_real(&rm);
            (vals, Array2::from_shape_fn((dim, dim), |(i, j)| C64::new(v[[i, j]], 0.0)))
        } else {
            linalg::eigh(&m)
        };
        Ok(DensePropagator { vals, vecs })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.vals
    }

    pub fn apply(&self, psi: &DenseState, t: f64) -> DenseState {
        let v = Array1::from(psi.amps.clone());
        let mut c = linalg::adjoint(&self.vecs).dot(&v);
        for (ci, &l) in c.iter_mut().zip(&self.vals) {
            *ci *= (-C64::i() * l * t).exp();
        }
        DenseState { n: psi.n, amps: self.vecs.dot(&c).to_vec() }
    }
}

pub fn pauli_string_matrix(p: &PauliString) -> Result<Array2<C64>> {
    check_cap(p.n())?;
    let dim = 1usize << p.n();
    let (xm, zm, k) = masks(p);
    let ph = ipow(k);
    let mut m = Array2::zeros((dim, dim));
    for b in 0..dim {
        let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        m[[b ^ xm, b]] = ph * sign;
    }
    Ok(m)
}

pub fn pauli_sum_matrix(h: &PauliSum) -> Result<Array2<C64>> {
    check_cap(h.n())?;
    let dim = 1usize << h.n();
    let mut m = Array2::zeros((dim, dim));
    for (c, p) in h.iter() {
        let (xm, zm, k) = masks(p);
        let ph = ipow(k) * c;
        for b in 0..dim {
            let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            m[[b ^ xm, b]] += ph * sign;
        }
    }
    Ok(m)
}

/// Re-expands a Hermitian matrix as `Σ_μ O_μ Σ^μ` with
/// `O_μ = 2^{-N} Tr(O Σ^μ)`.
pub fn pauli_expand(m: &Array2<C64>, n: usize) -> Result<PauliSum> {
    check_cap(n)?;
    let dim = 1usize << n;
    if m.dim() != (dim, dim) {
        return Err(Error::LengthMismatch { expected: dim, found: m.nrows() });
    }
    let mut out = PauliSum::new(n);
    let mut axes = vec![0u8; n];
    for code in 0..1usize << (2 * n) {
        for (j, a) in axes.iter_mut().enumerate() {
            *a = ((code >> (2 * j)) & 3) as u8;
        }
        let p = PauliString::from_axes(&axes)?;
        let (xm, zm, k) = masks(&p);
        let ph = ipow(k);
        // Tr(O P) = Σ_b O[b, b^x] · P[b^x, b]
        let tr: C64 = (0..dim)
            .map(|b| {
                let sign = if (zm & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                m[[b, b ^ xm]] * ph * sign
            })
            .sum();
        let c = tr / dim as f64;
        if c.im.abs() > 1e-10 {
            return Err(Error::NonHermitian);
        }
        if c.re.abs() > crate::pauli::PRUNE_TOL {
            out.add_term(c.re, &p)?;
        }
    }
    Ok(out)
}

/// Dense unitary of a circuit: column `x` is the circuit applied to `|x⟩`.
pub fn circuit_matrix(c: &CliffordCircuit, n: usize) -> Result<Array2<C64>> {
    check_cap(n)?;
    let dim = 1usize << n;
    let mut m = Array2::zeros((dim, dim));
    for x in 0..dim {
        let s = DenseState::basis(&Bitstring::from_index(n, x))?.apply_circuit(c)?;
        for (r, a) in s.amps.iter().enumerate() {
            m[[r, x]] = *a;
        }
    }
    Ok(m)
}

pub fn mpo_matrix(o: &Mpo) -> Result<Array2<C64>> {
    check_cap(o.n())?;
    // (out prefix, in prefix, bond)
    let mut cur = ndarray::Array3::from_elem((1, 1, 1), C64::new(1.0, 0.0));
    for w in o.tensors() {
        let (p, q, b) = cur.dim();
        let (wl, d1, d2, wr) = w.dim();
        debug_assert_eq!(b, wl);
        let t = cur.to_shape((p * q, b)).unwrap().dot(&w.to_shape((wl, d1 * d2 * wr)).unwrap());
        let t = t.into_shape_with_order((p, q, d1, d2, wr)).unwrap();
        cur = t
            .permuted_axes([0, 2, 1, 3, 4])
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((p * d1, q * d2, wr))
            .unwrap();
    }
    let (p, q, _) = cur.dim();
    Ok(cur.into_shape_with_order((p, q)).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
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
    fn cap_is_enforced() {
        assert!(matches!(DenseState::zero(15), Err(Error::OracleTooLarge { n: 15, cap: 14 })));
        assert!(DenseState::zero(0).is_err());
    }

    #[test]
    fn t_zero_and_spin_rotation() {
        let mut h = PauliSum::new(1);
        h.add_term(1.0, &PauliString::parse("X").unwrap()).unwrap();
        let psi = DenseState::zero(1).unwrap();
        assert!(psi.evolve(&h, 0.0).unwrap().max_diff(&psi) < 1e-14);
        let out = psi.evolve(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(out.amps[0].norm() < 1e-14);
        assert!((out.amps[1] - C64::new(0.0, -1.0)).norm() < 1e-14);
        let k = psi.evolve_krylov(&h, std::f64::consts::FRAC_PI_2).unwrap();
        assert!(k.max_diff(&out) < 1e-12);
    }

    #[test]
    fn two_evolution_paths_agree() {
        let n = 10;
        let h = tfim(n, 1.0);
        let psi = DenseState::zero(n).unwrap();
        let prop = DensePropagator::new(&h).unwrap();
        for t in [0.5, 1.0, 2.0] {
            let a = prop.apply(&psi, t);
            let b = psi.evolve_krylov(&h, t).unwrap();
            let la = psi.overlap(&a).norm_sqr();
            let lb = psi.overlap(&b).norm_sqr();
            assert!((la - lb).abs() < 1e-10, "t={t}: {la} vs {lb}");
            assert!((a.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_orthogonality() {
        for n in 1..=3 {
            let dim = 1usize << n;
            let all: Vec<PauliString> = (0..1usize << (2 * n))
                .map(|code| {
                    let axes: Vec<u8> = (0..n).map(|j| ((code >> (2 * j)) & 3) as u8).collect();
                    PauliString::from_axes(&axes).unwrap()
                })
                .collect();
            let mats: Vec<Array2<C64>> = all.iter().map(|p| pauli_string_matrix(p).unwrap()).collect();
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    let tr: C64 = a.dot(b).diag().sum();
                    let want = if i == j { dim as f64 } else { 0.0 };
                    assert!((tr - C64::new(want, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn expand_round_trip() {
        let h = tfim(4, 0.7);
        let back = pauli_expand(&pauli_sum_matrix(&h).unwrap(), 4).unwrap();
        assert_eq!(back.len(), h.len());
        for (c, p) in h.iter() {
            assert!((back.coefficient(p) - c).abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_of_bell_pair() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DenseState::from_amplitudes(2, vec![C64::new(r, 0.0), 0.0.into(), 0.0.into(), C64::new(r, 0.0)]).unwrap();
        assert!((bell.entanglement_entropy(0).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn mps_round_trip_and_bell_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi = DenseState::random(6, &mut rng);
        let m = Mps::from_dense(psi.amplitudes(), 6).unwrap();
        assert!(DenseState::from_mps(&m).unwrap().max_diff(&psi) < 1e-12);
        let z = DenseState::from_mps(&Mps::zero_state(3)).unwrap();
        assert_eq!(z.amps[0], C64::new(1.0, 0.0));

        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        t.apply_gate(&CliffordGate::hadamard(), &Sites::One(0)).unwrap();
        t.apply_gate(&CliffordGate::cx(), &Sites::Two(0, 1)).unwrap();
        let d = DenseState::from_tableau(&t).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = DenseState::from_amplitudes(2, vec![C64::new(r, 0.0), 0.0.into(), 0.0.into(), C64::new(r, 0.0)]).unwrap();
        assert!(want.max_diff_up_to_phase(&d) < 1e-14);
    }
}
