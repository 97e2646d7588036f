//! Exact algebra of N-qubit Pauli strings and real Pauli sums.
//!
//! A [`PauliString`] stores `i^k · σ(x_0,z_0) ⊗ … ⊗ σ(x_{N-1},z_{N-1})` as two
//! packed bit vectors plus the exponent `k mod 4`, with `σ(1,0) = X`,
//! `σ(0,1) = Z` and `σ(1,1) = Y`. Axis symbols follow the usual
//! `0 = I, 1 = X, 2 = Y, 3 = Z` numbering.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use crate::clifford::{CliffordCircuit, CliffordGate, Sites};
use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped from a [`PauliSum`].
pub const PRUNE_TOL: f64 = 1e-14;

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

/// Exponent of `i` picked up by the sitewise product `σ(x1,z1)·σ(x2,z2)`,
/// summed over all bit positions of one machine word.
#[inline]
pub(crate) fn product_phase(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    let y1 = x1 & z1;
    let xo = x1 & !z1;
    let zo = !x1 & z1;
    let plus = (y1 & z2 & !x2) | (xo & x2 & z2) | (zo & x2 & !z2);
    let minus = (y1 & x2 & !z2) | (xo & !x2 & z2) | (zo & x2 & z2);
    plus.count_ones() as i32 - minus.count_ones() as i32
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Builds a Hermitian string from axis symbols `0..=3`.
    pub fn from_axes(axes: &[u8]) -> Result<Self> {
        let mut p = Self::identity(axes.len());
        for (j, &a) in axes.iter().enumerate() {
            let (x, z) = match a {
                0 => (false, false),
                1 => (true, false),
                2 => (true, true),
                3 => (false, true),
                _ => return Err(Error::InvalidArgument(format!("axis symbol {a}"))),
            };
            p.set_bits(j, x, z);
        }
        Ok(p)
    }

    /// Single-site Pauli `axis` at `site` on `n` qubits.
    pub fn single(n: usize, site: usize, axis: u8) -> Result<Self> {
        if site >= n {
            return Err(Error::SiteOutOfRange { site, n });
        }
        let mut axes = vec![0u8; n];
        axes[site] = axis;
        Self::from_axes(&axes)
    }

    /// Parses a word over `{I,X,Y,Z}` with an optional `+`, `-`, `+i`, `-i`
    /// or `i` prefix.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, word) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        if word.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli word".into()));
        }
        let axes = word
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(0),
                'X' => Ok(1),
                'Y' => Ok(2),
                'Z' => Ok(3),
                _ => Err(Error::InvalidArgument(format!("bad Pauli symbol {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        let mut p = Self::from_axes(&axes)?;
        p.phase = phase;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the overall factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// `+1` or `-1` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    #[inline]
    pub fn x_bit(&self, j: usize) -> bool {
        (self.x[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, j: usize) -> bool {
        (self.z[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set_bits(&mut self, j: usize, x: bool, z: bool) {
        let (w, b) = (j / 64, j % 64);
        let m = 1u64 << b;
        self.x[w] = (self.x[w] & !m) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !m) | ((z as u64) << b);
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn axis(&self, j: usize) -> u8 {
        match (self.x_bit(j), self.z_bit(j)) {
            (false, false) => 0,
            (true, false) => 1,
            (true, true) => 2,
            (false, true) => 3,
        }
    }

    pub fn axes(&self) -> Vec<u8> {
        (0..self.n).map(|j| self.axis(j)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn has_x_part(&self) -> bool {
        self.x.iter().any(|&w| w != 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Sites carrying a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.x_bit(j) || self.z_bit(j)).collect()
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// The same word with phase `+1`.
    pub fn unsigned(&self) -> Self {
        PauliString { phase: 0, ..self.clone() }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc += ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        acc.is_multiple_of(2)
    }

    /// Operator product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, found: other.n });
        }
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`; lengths must already match.
    pub(crate) fn mul_assign_right(&mut self, other: &PauliString) {
        let mut ph = self.phase as i32 + other.phase as i32;
        for w in 0..self.x.len() {
            ph += product_phase(self.x[w], self.z[w], other.x[w], other.z[w]);
            self.x[w] ^= other.x[w];
            self.z[w] ^= other.z[w];
        }
        self.phase = ph.rem_euclid(4) as u8;
    }

    /// `C · self · C†` for a Clifford gate placed on `sites`.
    pub fn conjugate_by_gate(&self, gate: &CliffordGate, sites: &Sites) -> Result<PauliString> {
        sites.validate(self.n, gate.arity())?;
        let mut out = self.clone();
        out.conjugate_in_place(gate, sites);
        Ok(out)
    }

    /// In-place conjugation; `sites` must already be validated.
    pub(crate) fn conjugate_in_place(&mut self, gate: &CliffordGate, sites: &Sites) {
        match *sites {
            Sites::One(a) => {
                let idx = self.x_bit(a) as usize | (self.z_bit(a) as usize) << 1;
                let img = gate.local_image(idx);
                self.set_bits(a, img.x & 1 == 1, img.z & 1 == 1);
                self.phase = (self.phase + img.phase) & 3;
            }
            Sites::Two(a, b) => {
                let idx = self.x_bit(a) as usize
                    | (self.z_bit(a) as usize) << 1
                    | (self.x_bit(b) as usize) << 2
                    | (self.z_bit(b) as usize) << 3;
                let img = gate.local_image(idx);
                self.set_bits(a, img.x & 1 == 1, img.z & 1 == 1);
                self.set_bits(b, img.x & 2 == 2, img.z & 2 == 2);
                self.phase = (self.phase + img.phase) & 3;
            }
        }
    }

    /// Word over `{I,X,Y,Z}` without the phase.
    pub fn word(&self) -> String {
        (0..self.n).map(|j| ['I', 'X', 'Y', 'Z'][self.axis(j) as usize]).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{p}{}", self.word())
    }
}

/// Real linear combination of Pauli strings, i.e. a Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl PauliSum {
    pub fn new(n: usize) -> Self {
        PauliSum { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · p`. The sign of a Hermitian `p` is folded into the
    /// coefficient; non-Hermitian strings are rejected.
    pub fn add_term(&mut self, coeff: f64, p: &PauliString) -> Result<()> {
        if p.n != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: p.n });
        }
        let sign = match p.sign() {
            Some(s) => s as f64,
            None => return Err(Error::NonHermitian),
        };
        self.add_unchecked(coeff * sign, p.unsigned());
        Ok(())
    }

    fn add_unchecked(&mut self, coeff: f64, key: PauliString) {
        match self.terms.entry(key) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().abs() < PRUNE_TOL {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if coeff.abs() >= PRUNE_TOL {
                    e.insert(coeff);
                }
            }
        }
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        let s = p.sign().unwrap_or(1) as f64;
        self.terms.get(&p.unsigned()).map_or(0.0, |c| c * s)
    }

    /// Terms as `(coefficient, unsigned string)` in a fixed order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &PauliString)> {
        self.terms.iter().map(|(p, &c)| (c, p))
    }

    pub fn conjugate_by_gate(&self, gate: &CliffordGate, sites: &Sites) -> Result<PauliSum> {
        sites.validate(self.n, gate.arity())?;
        let mut out = PauliSum::new(self.n);
        for (c, p) in self.iter() {
            let mut q = p.clone();
            q.conjugate_in_place(gate, sites);
            let s = q.sign().expect("Clifford conjugation keeps Hermiticity") as f64;
            out.add_unchecked(c * s, q.unsigned());
        }
        Ok(out)
    }

    /// `U H U†` where `U` applies the circuit's gates in order.
    pub fn conjugate_sum(&self, circuit: &CliffordCircuit) -> Result<PauliSum> {
        for g in circuit.gates() {
            g.sites.validate(self.n, g.gate.arity())?;
        }
        let mut out = PauliSum::new(self.n);
        for (c, p) in self.iter() {
            let mut q = p.clone();
            for g in circuit.gates() {
                q.conjugate_in_place(&g.gate, &g.sites);
            }
            let s = q.sign().expect("Clifford conjugation keeps Hermiticity") as f64;
            out.add_unchecked(c * s, q.unsigned());
        }
        Ok(out)
    }

    /// Parses one `<coeff> <word>` term per line. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<PauliSum> {
        let mut sum: Option<PauliSum> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
            let mut parts = line.split_whitespace();
            let coeff: f64 = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| perr(format!("coefficient: {e}")))?;
            let word = parts.next().ok_or_else(|| perr("missing Pauli word".into()))?;
            if parts.next().is_some() {
                return Err(perr("trailing tokens".into()));
            }
            let p = PauliString::parse(word).map_err(|e| perr(e.to_string()))?;
            let s = sum.get_or_insert_with(|| PauliSum::new(p.n()));
            s.add_term(coeff, &p).map_err(|e| perr(e.to_string()))?;
        }
        sum.ok_or_else(|| Error::Parse { line: 0, msg: "no terms".into() })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in self.iter() {
            out.push_str(&format!("{c:?} {}\n", p.word()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn single_site_table() {
        assert_eq!(ps("X").multiply(&ps("Z")).unwrap(), ps("-iY"));
        assert_eq!(ps("Z").multiply(&ps("X")).unwrap(), ps("+iY"));
        assert_eq!(ps("Y").multiply(&ps("Z")).unwrap(), ps("+iX"));
        assert_eq!(ps("X").multiply(&ps("Y")).unwrap(), ps("+iZ"));
        assert_eq!(ps("Y").multiply(&ps("Y")).unwrap(), ps("I"));
    }

    #[test]
    fn identity_and_involution() {
        let p = ps("-XYZIZ");
        assert_eq!(PauliString::identity(5).multiply(&p).unwrap(), p);
        assert_eq!(ps("XX").multiply(&ps("XX")).unwrap(), ps("II"));
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            ps("XX").multiply(&ps("X")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn words_past_64_sites() {
        let mut axes = vec![0u8; 130];
        axes[0] = 1;
        axes[129] = 3;
        axes[64] = 2;
        let p = PauliString::from_axes(&axes).unwrap();
        assert_eq!(p.support(), vec![0, 64, 129]);
        assert_eq!(p.multiply(&p).unwrap(), PauliString::identity(130));
    }

    #[test]
    fn sum_merges_and_prunes() {
        let mut s = PauliSum::new(2);
        s.add_term(1.0, &ps("XX")).unwrap();
        s.add_term(0.5, &ps("ZI")).unwrap();
        s.add_term(1.0, &ps("-XX")).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&ps("ZI")), 0.5);
        assert!(matches!(s.add_term(1.0, &ps("iXX")), Err(Error::NonHermitian)));
    }

    #[test]
    fn text_format() {
        let s = PauliSum::parse("1.0 XXI\n-0.5 IZI # field\n\n2 ZZZ\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.coefficient(&ps("IZI")), -0.5);
        assert_eq!(PauliSum::parse(&s.to_text()).unwrap(), s);
        assert!(PauliSum::parse("1.0 XQ").is_err());
        assert!(PauliSum::parse("abc XX").is_err());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        (prop::collection::vec(0u8..4, n), 0u8..4)
            .prop_map(|(a, ph)| PauliString::from_axes(&a).unwrap().with_phase(ph))
    }

    proptest! {
        #[test]
        fn multiplication_is_associative(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            let l = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let r = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn commutation_matches_products(a in arb_pauli(9), b in arb_pauli(9)) {
            let ab = a.multiply(&b).unwrap();
            let ba = b.multiply(&a).unwrap();
            prop_assert_eq!(ab.unsigned(), ba.unsigned());
            let same = ab.phase() == ba.phase();
            prop_assert_eq!(same, a.commutes_with(&b));
        }

        #[test]
        fn hermitian_squares_to_identity(a in arb_pauli(11)) {
            let h = a.unsigned();
            prop_assert_eq!(h.multiply(&h).unwrap(), PauliString::identity(11));
        }
    }
}
