//! Stabilizer states as destabilizer/stabilizer tableaux.
//!
//! Amplitudes and Born-rule samples come from the canonical form of the
//! stabilizer group: the generators are row-reduced so that the first `k`
//! rows have an X-part in reduced row-echelon form and the remaining `n - k`
//! rows are pure Z-type. The state is then supported on the affine space
//! `y0 ⊕ span{x_r}` with uniform magnitude `2^{-k/2}`, where `y0` is the unique
//! support element that is zero on every X-pivot column. The amplitude at
//! `y0` is taken real and positive, which fixes the global phase as a
//! function of the state alone.

use std::fmt;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::clifford::{CliffordCircuit, CliffordGate, Sites};
use crate::error::{Error, Result};
use crate::pauli::{words_for, PauliString};

/// Computational basis configuration, bit `j` for qubit `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    n: usize,
    words: Vec<u64>,
}

impl Bitstring {
    pub fn zeros(n: usize) -> Self {
        Bitstring { n, words: vec![0; words_for(n)] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (j, &v) in bits.iter().enumerate() {
            b.set(j, v != 0);
        }
        b
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidArgument(format!("bad bit {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self::from_bits(&bits))
    }

    /// Configuration of dense basis index `idx` (qubit 0 most significant).
    pub fn from_index(n: usize, idx: usize) -> Self {
        let mut b = Self::zeros(n);
        for j in 0..n {
            b.set(j, (idx >> (n - 1 - j)) & 1 == 1);
        }
        b
    }

    pub fn index(&self) -> usize {
        (0..self.n).fold(0, |acc, j| (acc << 1) | self.get(j) as usize)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, v: bool) {
        let m = 1u64 << (j % 64);
        if v {
            self.words[j / 64] |= m;
        } else {
            self.words[j / 64] &= !m;
        }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n).map(|j| self.get(j) as u8).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn xor_words(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a ^= b;
        }
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    /// Rows `0..n` are destabilizers, rows `n..2n` stabilizers.
    rows: Vec<PauliString>,
}

impl StabilizerTableau {
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQubitCount(0));
        }
        let mut rows = Vec::with_capacity(2 * n);
        for j in 0..n {
            rows.push(PauliString::single(n, j, 1)?);
        }
        for j in 0..n {
            rows.push(PauliString::single(n, j, 3)?);
        }
        Ok(StabilizerTableau { n, rows })
    }

    /// Computational basis state `|x⟩`.
    pub fn basis_state(x: &Bitstring) -> Result<Self> {
        let mut t = Self::new_zero_state(x.len())?;
        for j in 0..x.len() {
            if x.get(j) {
                let s = &mut t.rows[x.len() + j];
                *s = s.clone().with_phase(2);
            }
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    pub fn apply_gate(&mut self, gate: &CliffordGate, sites: &Sites) -> Result<()> {
        sites.validate(self.n, gate.arity())?;
        for r in &mut self.rows {
            r.conjugate_in_place(gate, sites);
        }
        Ok(())
    }

    pub fn with_gate(&self, gate: &CliffordGate, sites: &Sites) -> Result<Self> {
        let mut t = self.clone();
        t.apply_gate(gate, sites)?;
        Ok(t)
    }

    /// Applies the circuit's gates in order. All placements are validated
    /// before the tableau is touched.
    pub fn compose_in_place(&mut self, circuit: &CliffordCircuit) -> Result<()> {
        for g in circuit.gates() {
            g.sites.validate(self.n, g.gate.arity())?;
        }
        for g in circuit.gates() {
            for r in &mut self.rows {
                r.conjugate_in_place(&g.gate, &g.sites);
            }
        }
        Ok(())
    }

    pub fn compose(&self, circuit: &CliffordCircuit) -> Result<Self> {
        let mut t = self.clone();
        t.compose_in_place(circuit)?;
        Ok(t)
    }

    pub fn canonical_form(&self) -> StabilizerForm {
        StabilizerForm::new(self)
    }

    /// Canonical generators `g_j = θ_j Σ^{γ_j}`: X-type rows in reduced
    /// row-echelon order, then Z-type rows.
    pub fn generators(&self) -> Vec<PauliString> {
        self.canonical_form().generators()
    }

    pub fn amplitude(&self, x: &Bitstring) -> Result<C64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.canonical_form().amplitude(x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Bitstring, C64) {
        self.canonical_form().sample(rng)
    }

    /// Checks the tableau invariants: Hermitian commuting stabilizers,
    /// symplectic pairing with destabilizers, and full rank.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.n;
        for (i, r) in self.rows.iter().enumerate() {
            if !r.is_hermitian() {
                return Err(format!("row {i} is not Hermitian"));
            }
        }
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let should_commute = !(j == i + n);
                if self.rows[i].commutes_with(&self.rows[j]) != should_commute {
                    return Err(format!("rows {i} and {j} have the wrong commutation"));
                }
            }
        }
        let rank = gf2_rank(
            self.rows
                .iter()
                .map(|r| r.x_words().iter().chain(r.z_words()).copied().collect())
                .collect(),
        );
        if rank != 2 * n {
            return Err(format!("symplectic rank {rank} < {}", 2 * n));
        }
        Ok(())
    }

    /// Text rows with a sign column, destabilizers first.
    pub fn debug_text(&self) -> String {
        let mut out = String::from("# destabilizers\n");
        for (i, r) in self.rows.iter().enumerate() {
            if i == self.n {
                out.push_str("# stabilizers\n");
            }
            let s = if r.phase() == 2 { '-' } else { '+' };
            out.push_str(&format!("{s} {}\n", r.word()));
        }
        out
    }
}

fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for col in 0..ncols {
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (rank..rows.len()).find(|&i| (rows[i][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && (r[w] >> b) & 1 == 1 {
                for (a, c) in r.iter_mut().zip(&pivot) {
                    *a ^= c;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Row-reduced stabilizer group with a precomputed reference configuration.
#[derive(Clone, Debug)]
pub struct StabilizerForm {
    n: usize,
    x_rows: Vec<PauliString>,
    pivots: Vec<usize>,
    z_rows: Vec<PauliString>,
    reference: Bitstring,
    magnitude: f64,
}

impl StabilizerForm {
    fn new(t: &StabilizerTableau) -> Self {
        let n = t.n;
        let mut rows: Vec<PauliString> = t.stabilizers().to_vec();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(p) = (r..n).find(|&i| rows[i].x_bit(col)) else { continue };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && row.x_bit(col) {
                    row.mul_assign_right(&pivot);
                }
            }
            pivots.push(col);
            r += 1;
        }
        let k = r;
        for col in 0..n {
            let Some(p) = (r..n).find(|&i| rows[i].z_bit(col)) else { continue };
            rows.swap(r, p);
            let pivot = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate().skip(k) {
                if i != r && row.z_bit(col) {
                    row.mul_assign_right(&pivot);
                }
            }
            r += 1;
        }
        debug_assert_eq!(r, n);
        let z_rows = rows.split_off(k);
        let reference = solve_reference(n, &pivots, &z_rows);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let magnitude = 0.5f64.powi((k / 2) as i32) * if k % 2 == 1 { half } else { 1.0 };
        StabilizerForm { n, x_rows: rows, pivots, z_rows, reference, magnitude }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The support has `2^k` configurations.
    pub fn support_rank(&self) -> usize {
        self.x_rows.len()
    }

    pub fn reference(&self) -> &Bitstring {
        &self.reference
    }

    pub fn generators(&self) -> Vec<PauliString> {
        self.x_rows.iter().chain(&self.z_rows).cloned().collect()
    }

    /// Exact `⟨x|s⟩`; zero outside the support.
    pub fn amplitude(&self, x: &Bitstring) -> C64 {
        let mut d = x.clone();
        d.xor_words(self.reference.words());
        let mut acc = PauliString::identity(self.n);
        for (row, &p) in self.x_rows.iter().zip(&self.pivots) {
            if d.get(p) {
                acc.mul_assign_right(row);
                d.xor_words(row.x_words());
            }
        }
        if d.words().iter().any(|&w| w != 0) {
            return C64::new(0.0, 0.0);
        }
        let mut exp = acc.phase() as u32 + acc.y_count();
        let zy: u32 = acc
            .z_words()
            .iter()
            .zip(self.reference.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        exp += 2 * (zy & 1);
        let m = self.magnitude;
        match exp % 4 {
            0 => C64::new(m, 0.0),
            1 => C64::new(0.0, m),
            2 => C64::new(-m, 0.0),
            _ => C64::new(0.0, -m),
        }
    }

    /// Born-rule sample with its exact amplitude. Qubits are resolved left to
    /// right; only X-pivot columns carry a fresh random bit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Bitstring, C64) {
        let mut x = self.reference.clone();
        for row in &self.x_rows {
            if rng.random::<bool>() {
                x.xor_words(row.x_words());
            }
        }
        let a = self.amplitude(&x);
        (x, a)
    }
}

/// Unique `y` with `y_p = 0` on X-pivot columns satisfying every Z-type
/// constraint `(-1)^{z·y} = θ`.
fn solve_reference(n: usize, pivots: &[usize], z_rows: &[PauliString]) -> Bitstring {
    let mut mask = vec![!0u64; words_for(n)];
    for &p in pivots {
        mask[p / 64] &= !(1u64 << (p % 64));
    }
    let mut eqs: Vec<(Vec<u64>, bool)> = z_rows
        .iter()
        .map(|r| {
            let z = r.z_words().iter().zip(&mask).map(|(a, m)| a & m).collect();
            (z, r.phase() == 2)
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (rank..eqs.len()).find(|&i| (eqs[i].0[w] >> b) & 1 == 1) else { continue };
        eqs.swap(rank, p);
        let (pz, pb) = eqs[rank].clone();
        for (i, (z, rhs)) in eqs.iter_mut().enumerate() {
            if i != rank && (z[w] >> b) & 1 == 1 {
                for (a, c) in z.iter_mut().zip(&pz) {
                    *a ^= c;
                }
                *rhs ^= pb;
            }
        }
        pivot_cols.push(col);
        rank += 1;
    }
    let mut y = Bitstring::zeros(n);
    for (i, &col) in pivot_cols.iter().enumerate() {
        y.set(col, eqs[i].1);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> StabilizerTableau {
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        t.apply_gate(&CliffordGate::hadamard(), &Sites::One(0)).unwrap();
        t.apply_gate(&CliffordGate::cx(), &Sites::Two(0, 1)).unwrap();
        t
    }

    #[test]
    fn zero_state() {
        assert!(matches!(StabilizerTableau::new_zero_state(0), Err(Error::InvalidQubitCount(0))));
        let t = StabilizerTableau::new_zero_state(1).unwrap();
        assert_eq!(t.generators()[0].to_string(), "+Z");
        let t3 = StabilizerTableau::new_zero_state(3).unwrap();
        assert_eq!(t3.amplitude(&Bitstring::parse("000").unwrap()).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(t3.amplitude(&Bitstring::parse("001").unwrap()).unwrap(), C64::new(0.0, 0.0));
        let g: Vec<String> = StabilizerTableau::new_zero_state(2)
            .unwrap()
            .generators()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(g, ["+ZI", "+IZ"]);
        let one = StabilizerTableau::basis_state(&Bitstring::parse("1").unwrap()).unwrap();
        assert_eq!(one.generators()[0].to_string(), "-Z");
    }

    #[test]
    fn hadamard_and_bell() {
        let mut t = StabilizerTableau::new_zero_state(1).unwrap();
        t.apply_gate(&CliffordGate::hadamard(), &Sites::One(0)).unwrap();
        assert_eq!(t.stabilizers()[0].to_string(), "+X");
        let b = bell();
        let stabs: Vec<String> = b.stabilizers().iter().map(|p| p.to_string()).collect();
        assert_eq!(stabs, ["+XX", "+ZZ"]);
        assert!(b.validate().is_ok());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.amplitude(&Bitstring::parse("11").unwrap()).unwrap() - r).norm() < 1e-15);
        assert_eq!(b.amplitude(&Bitstring::parse("01").unwrap()).unwrap().norm(), 0.0);
    }

    #[test]
    fn plus_plus_amplitude() {
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        let h = CliffordGate::hadamard();
        t.apply_gate(&h, &Sites::One(0)).unwrap();
        t.apply_gate(&h, &Sites::One(1)).unwrap();
        assert_eq!(t.amplitude(&Bitstring::parse("11").unwrap()).unwrap(), C64::new(0.5, 0.0));
    }

    #[test]
    fn sample_is_consistent_with_amplitude() {
        let mut t = StabilizerTableau::new_zero_state(5).unwrap();
        let h = CliffordGate::hadamard();
        let s = CliffordGate::phase_s();
        let cx = CliffordGate::cx();
        t.apply_gate(&h, &Sites::One(0)).unwrap();
        t.apply_gate(&cx, &Sites::Two(0, 3)).unwrap();
        t.apply_gate(&s, &Sites::One(3)).unwrap();
        t.apply_gate(&h, &Sites::One(4)).unwrap();
        t.apply_gate(&cx, &Sites::Two(4, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let form = t.canonical_form();
        for _ in 0..200 {
            let (x, a) = form.sample(&mut rng);
            assert_eq!(a, t.amplitude(&x).unwrap());
            assert!((a.norm() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn bad_sites() {
        let mut t = StabilizerTableau::new_zero_state(2).unwrap();
        assert!(t.apply_gate(&CliffordGate::cx(), &Sites::Two(0, 2)).is_err());
        assert!(t.apply_gate(&CliffordGate::cx(), &Sites::Two(1, 1)).is_err());
        assert!(t.amplitude(&Bitstring::zeros(3)).is_err());
    }

    #[test]
    fn debug_dump() {
        let text = bell().debug_text();
        assert!(text.contains("# stabilizers\n+ XX\n+ ZZ\n"));
    }
}
