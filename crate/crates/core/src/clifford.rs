//! One- and two-qubit Clifford gates, placed circuits, and the disentangler's
//! candidate set.
//!
//! A gate carries both its conjugation table on the local Pauli group and a
//! dense unitary. The two are built independently (tables from the known
//! images of `X` and `Z`, unitaries from matrix products) and the tests check
//! them against each other.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli::product_phase;

/// Pauli operator on at most two local qubits: bit `k` of `x`/`z` refers to
/// local qubit `k`, with the overall factor `i^phase`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalPauli {
    pub x: u8,
    pub z: u8,
    pub phase: u8,
}

impl LocalPauli {
    pub const IDENTITY: LocalPauli = LocalPauli { x: 0, z: 0, phase: 0 };

    /// Hermitian basis element number `idx = x0 | z0<<1 | x1<<2 | z1<<3`.
    pub fn from_index(idx: usize) -> Self {
        LocalPauli {
            x: ((idx & 1) | ((idx >> 1) & 2)) as u8,
            z: (((idx >> 1) & 1) | ((idx >> 2) & 2)) as u8,
            phase: 0,
        }
    }

    pub fn index(self) -> usize {
        (self.x & 1) as usize
            | ((self.z & 1) as usize) << 1
            | ((self.x >> 1) as usize) << 2
            | ((self.z >> 1) as usize) << 3
    }

    pub fn times(self, o: LocalPauli) -> LocalPauli {
        let ph = self.phase as i32
            + o.phase as i32
            + product_phase(self.x as u64, self.z as u64, o.x as u64, o.z as u64);
        LocalPauli { x: self.x ^ o.x, z: self.z ^ o.z, phase: ph.rem_euclid(4) as u8 }
    }

    pub fn commutes_with(self, o: LocalPauli) -> bool {
        ((self.x & o.z) ^ (self.z & o.x)).count_ones().is_multiple_of(2)
    }

    pub fn unsigned(self) -> LocalPauli {
        LocalPauli { phase: 0, ..self }
    }

    /// Dense matrix on `arity` qubits, local qubit 0 most significant.
    pub fn matrix(self, arity: usize) -> Array2<C64> {
        let mut m = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for q in 0..arity {
            let s = single_pauli((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1);
            m = kron(&m, &s);
        }
        m * C64::i().powu(self.phase as u32)
    }
}

pub(crate) fn single_pauli(x: bool, z: bool) -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match (x, z) {
        (false, false) => array![[l, o], [o, l]],
        (true, false) => array![[o, l], [l, o]],
        (true, true) => array![[o, -i], [i, o]],
        (false, true) => array![[l, o], [o, -l]],
    }
}

pub(crate) fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| a[[i / br, j / bc]] * b[[i % br, j % bc]])
}

/// Where a gate acts. For two-qubit gates the first index is local qubit 0.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sites {
    One(usize),
    Two(usize, usize),
}

impl Sites {
    pub fn arity(&self) -> usize {
        match self {
            Sites::One(_) => 1,
            Sites::Two(..) => 2,
        }
    }

    pub fn validate(&self, n: usize, arity: usize) -> Result<()> {
        if self.arity() != arity {
            return Err(Error::InvalidArgument(format!(
                "gate of arity {arity} placed on {} sites",
                self.arity()
            )));
        }
        match *self {
            Sites::One(a) if a >= n => Err(Error::SiteOutOfRange { site: a, n }),
            Sites::Two(a, b) => {
                if a >= n || b >= n {
                    Err(Error::SiteOutOfRange { site: a.max(b), n })
                } else if a == b {
                    Err(Error::RepeatedSite)
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateLabel {
    Named(&'static str),
    /// Index into [`candidate_gate_set`].
    Candidate(usize),
    Composite,
}

impl fmt::Display for GateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateLabel::Named(s) => f.write_str(s),
            GateLabel::Candidate(k) => write!(f, "{k}"),
            GateLabel::Composite => f.write_str("composite"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliffordGate {
    label: GateLabel,
    arity: usize,
    /// Images of `X_0, Z_0[, X_1, Z_1]` under conjugation.
    images: Vec<LocalPauli>,
    table: [LocalPauli; 16],
    unitary: Array2<C64>,
}

impl CliffordGate {
    /// Builds a gate from the images of the local generators and a dense
    /// realization. The two are not cross-checked here.
    pub fn from_parts(label: GateLabel, images: Vec<LocalPauli>, unitary: Array2<C64>) -> Result<Self> {
        let arity = images.len() / 2;
        if !(1..=2).contains(&arity) || images.len() != 2 * arity {
            return Err(Error::InvalidArgument("gate needs 2 or 4 generator images".into()));
        }
        if unitary.dim() != (1 << arity, 1 << arity) {
            return Err(Error::InvalidArgument("unitary has the wrong dimension".into()));
        }
        let mut table = [LocalPauli::IDENTITY; 16];
        for (idx, slot) in table.iter_mut().enumerate().take(1 << (2 * arity)) {
            let p = LocalPauli::from_index(idx);
            let ny = (p.x & p.z).count_ones() as u8;
            let mut acc = LocalPauli { phase: ny & 3, ..LocalPauli::IDENTITY };
            for q in 0..arity {
                if (p.x >> q) & 1 == 1 {
                    acc = acc.times(images[2 * q]);
                }
                if (p.z >> q) & 1 == 1 {
                    acc = acc.times(images[2 * q + 1]);
                }
            }
            *slot = acc;
        }
        Ok(CliffordGate { label, arity, images, table, unitary })
    }

    pub fn label(&self) -> &GateLabel {
        &self.label
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn images(&self) -> &[LocalPauli] {
        &self.images
    }

    pub fn unitary(&self) -> &Array2<C64> {
        &self.unitary
    }

    /// Image of the Hermitian basis element number `idx`.
    #[inline]
    pub(crate) fn local_image(&self, idx: usize) -> LocalPauli {
        self.table[idx]
    }

    pub fn conjugate_local(&self, p: LocalPauli) -> LocalPauli {
        let img = self.table[p.unsigned().index()];
        LocalPauli { phase: (img.phase + p.phase) & 3, ..img }
    }

    /// Gate applying `self` first, then `next`.
    pub fn then(&self, next: &CliffordGate) -> Result<CliffordGate> {
        if self.arity != next.arity {
            return Err(Error::InvalidArgument("arity mismatch in composition".into()));
        }
        let images = self.images.iter().map(|&p| next.conjugate_local(p)).collect();
        let unitary = next.unitary.dot(&self.unitary);
        CliffordGate::from_parts(GateLabel::Composite, images, unitary)
    }

    pub fn inverse(&self) -> CliffordGate {
        let dim = 1usize << (2 * self.arity);
        let mut images = Vec::with_capacity(2 * self.arity);
        for q in 0..self.arity {
            for target in [LocalPauli { x: 1 << q, z: 0, phase: 0 }, LocalPauli { x: 0, z: 1 << q, phase: 0 }] {
                let idx = (0..dim)
                    .find(|&i| self.table[i].unsigned() == target)
                    .expect("conjugation table is a bijection");
                let mut pre = LocalPauli::from_index(idx);
                pre.phase = (4 - self.table[idx].phase) & 3;
                images.push(pre);
            }
        }
        let unitary = self.unitary.t().mapv(|c| c.conj());
        CliffordGate::from_parts(self.label.clone(), images, unitary).expect("well-formed inverse")
    }

    pub fn is_identity_action(&self) -> bool {
        (0..self.arity).all(|q| {
            self.images[2 * q] == LocalPauli { x: 1 << q, z: 0, phase: 0 }
                && self.images[2 * q + 1] == LocalPauli { x: 0, z: 1 << q, phase: 0 }
        })
    }

    pub fn hadamard() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u = array![[C64::new(r, 0.0), C64::new(r, 0.0)], [C64::new(r, 0.0), C64::new(-r, 0.0)]];
        let img = vec![LocalPauli { x: 0, z: 1, phase: 0 }, LocalPauli { x: 1, z: 0, phase: 0 }];
        Self::from_parts(GateLabel::Named("H"), img, u).unwrap()
    }

    pub fn phase_s() -> Self {
        let u = array![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, 1.0)]];
        let img = vec![LocalPauli { x: 1, z: 1, phase: 0 }, LocalPauli { x: 0, z: 1, phase: 0 }];
        Self::from_parts(GateLabel::Named("S"), img, u).unwrap()
    }

    pub fn phase_sdg() -> Self {
        let u = array![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(0.0, -1.0)]];
        let img = vec![LocalPauli { x: 1, z: 1, phase: 2 }, LocalPauli { x: 0, z: 1, phase: 0 }];
        Self::from_parts(GateLabel::Named("SDG"), img, u).unwrap()
    }

    pub fn pauli_x() -> Self {
        let img = vec![LocalPauli { x: 1, z: 0, phase: 0 }, LocalPauli { x: 0, z: 1, phase: 2 }];
        Self::from_parts(GateLabel::Named("X"), img, single_pauli(true, false)).unwrap()
    }

    pub fn pauli_z() -> Self {
        let img = vec![LocalPauli { x: 1, z: 0, phase: 2 }, LocalPauli { x: 0, z: 1, phase: 0 }];
        Self::from_parts(GateLabel::Named("Z"), img, single_pauli(false, true)).unwrap()
    }

    /// Controlled-X with local qubit 0 as control.
    pub fn cx() -> Self {
        let mut u = Array2::zeros((4, 4));
        for (i, j) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            u[[i, j]] = C64::new(1.0, 0.0);
        }
        let img = vec![
            LocalPauli { x: 0b11, z: 0, phase: 0 },
            LocalPauli { x: 0, z: 0b01, phase: 0 },
            LocalPauli { x: 0b10, z: 0, phase: 0 },
            LocalPauli { x: 0, z: 0b11, phase: 0 },
        ];
        Self::from_parts(GateLabel::Named("CX"), img, u).unwrap()
    }

    pub fn cz() -> Self {
        let mut u = Array2::<C64>::eye(4);
        u[[3, 3]] = C64::new(-1.0, 0.0);
        let img = vec![
            LocalPauli { x: 0b01, z: 0b10, phase: 0 },
            LocalPauli { x: 0, z: 0b01, phase: 0 },
            LocalPauli { x: 0b10, z: 0b01, phase: 0 },
            LocalPauli { x: 0, z: 0b10, phase: 0 },
        ];
        Self::from_parts(GateLabel::Named("CZ"), img, u).unwrap()
    }

    pub fn swap() -> Self {
        let mut u = Array2::zeros((4, 4));
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            u[[i, j]] = C64::new(1.0, 0.0);
        }
        let img = vec![
            LocalPauli { x: 0b10, z: 0, phase: 0 },
            LocalPauli { x: 0, z: 0b10, phase: 0 },
            LocalPauli { x: 0b01, z: 0, phase: 0 },
            LocalPauli { x: 0, z: 0b01, phase: 0 },
        ];
        Self::from_parts(GateLabel::Named("SWAP"), img, u).unwrap()
    }

    pub fn identity2() -> Self {
        let img = (0..2)
            .flat_map(|q| [LocalPauli { x: 1 << q, z: 0, phase: 0 }, LocalPauli { x: 0, z: 1 << q, phase: 0 }])
            .collect();
        Self::from_parts(GateLabel::Named("I"), img, Array2::eye(4)).unwrap()
    }

    /// Single-qubit gate acting on local qubit `q` of a two-qubit register.
    pub fn lift(&self, q: usize) -> Result<CliffordGate> {
        if self.arity != 1 || q > 1 {
            return Err(Error::InvalidArgument("lift needs a one-qubit gate and q < 2".into()));
        }
        let shift = |p: LocalPauli| LocalPauli { x: p.x << q, z: p.z << q, phase: p.phase };
        let mut images = Vec::with_capacity(4);
        for k in 0..2 {
            if k == q {
                images.push(shift(self.images[0]));
                images.push(shift(self.images[1]));
            } else {
                images.push(LocalPauli { x: 1 << k, z: 0, phase: 0 });
                images.push(LocalPauli { x: 0, z: 1 << k, phase: 0 });
            }
        }
        let eye = Array2::<C64>::eye(2);
        let unitary = if q == 0 { kron(&self.unitary, &eye) } else { kron(&eye, &self.unitary) };
        CliffordGate::from_parts(self.label.clone(), images, unitary)
    }

    /// Looks up a gate by export id: a primitive name or a candidate index.
    pub fn by_id(id: &str) -> Result<Arc<CliffordGate>> {
        let g = match id {
            "H" => Self::hadamard(),
            "S" => Self::phase_s(),
            "SDG" => Self::phase_sdg(),
            "X" => Self::pauli_x(),
            "Z" => Self::pauli_z(),
            "CX" => Self::cx(),
            "CZ" => Self::cz(),
            "SWAP" => Self::swap(),
            "I" => Self::identity2(),
            _ => {
                let k: usize = id
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("unknown gate id {id:?}")))?;
                return candidate_gate_set()
                    .get(k)
                    .cloned()
                    .ok_or_else(|| Error::InvalidArgument(format!("candidate index {k} out of range")));
            }
        };
        Ok(Arc::new(g))
    }
}

/// Number of two-qubit Clifford classes modulo Pauli left-multiplication and
/// global phase.
pub const CANDIDATE_COUNT: usize = 720;

/// Fixed enumeration of two-qubit Cliffords used by the disentangler.
///
/// The two-qubit Clifford group (11520 elements up to phase) is explored
/// breadth-first from the identity with generators `H⊗I, I⊗H, S⊗I, I⊗S, CX`
/// in that order. Each symplectic class (the group modulo Paulis applied
/// after the gate) contributes its first-discovered element, multiplied on
/// the left by the unique Pauli that makes all four generator images
/// positive. Left Paulis do not change the entanglement of the output, so
/// the 720 members cover every disentangling action. Index 0 is the
/// identity; `CX` is index 5 and `SWAP` is among the members.
pub fn candidate_gate_set() -> &'static [Arc<CliffordGate>] {
    static SET: OnceLock<Vec<Arc<CliffordGate>>> = OnceLock::new();
    SET.get_or_init(enumerate_candidates)
}

fn enumerate_candidates() -> Vec<Arc<CliffordGate>> {
    let gens: Vec<CliffordGate> = vec![
        CliffordGate::hadamard().lift(0).unwrap(),
        CliffordGate::hadamard().lift(1).unwrap(),
        CliffordGate::phase_s().lift(0).unwrap(),
        CliffordGate::phase_s().lift(1).unwrap(),
        CliffordGate::cx(),
    ];
    let start = CliffordGate::identity2();
    let mut seen: HashMap<Vec<LocalPauli>, ()> = HashMap::new();
    let mut classes: HashMap<Vec<LocalPauli>, ()> = HashMap::new();
    let mut reps = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.images.clone(), ());
    queue.push_back(start);
    while let Some(g) = queue.pop_front() {
        let class: Vec<LocalPauli> = g.images.iter().map(|p| p.unsigned()).collect();
        if classes.insert(class, ()).is_none() {
            reps.push(sign_normalize(&g, reps.len()));
        }
        for gen in &gens {
            let next = g.then(gen).unwrap();
            if !seen.contains_key(&next.images) {
                seen.insert(next.images.clone(), ());
                queue.push_back(next);
            }
        }
    }
    debug_assert_eq!(seen.len(), 11520);
    debug_assert_eq!(reps.len(), CANDIDATE_COUNT);
    reps.into_iter().map(Arc::new).collect()
}

fn sign_normalize(g: &CliffordGate, index: usize) -> CliffordGate {
    let fix = (0..16)
        .map(LocalPauli::from_index)
        .find(|p| {
            g.images
                .iter()
                .all(|img| p.commutes_with(*img) == (img.phase == 0))
        })
        .expect("Pauli signs of independent images can always be flipped");
    let images = g.images.iter().map(|p| p.unsigned()).collect();
    let unitary = fix.matrix(2).dot(&g.unitary);
    CliffordGate::from_parts(GateLabel::Candidate(index), images, unitary).unwrap()
}

/// A gate placed on sites, tagged with the time step that generated it.
#[derive(Clone, Debug)]
pub struct PlacedGate {
    pub gate: Arc<CliffordGate>,
    pub sites: Sites,
    pub step: usize,
}

/// Ordered list of placed gates; the first gate acts first.
#[derive(Clone, Debug, Default)]
pub struct CliffordCircuit {
    gates: Vec<PlacedGate>,
}

impl CliffordCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, gate: Arc<CliffordGate>, sites: Sites, step: usize) -> Result<()> {
        if sites.arity() != gate.arity() {
            return Err(Error::InvalidArgument("gate arity does not match sites".into()));
        }
        self.gates.push(PlacedGate { gate, sites, step });
        Ok(())
    }

    pub fn extend(&mut self, other: &CliffordCircuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn gates(&self) -> &[PlacedGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates from index `from` onward.
    pub fn tail(&self, from: usize) -> CliffordCircuit {
        CliffordCircuit { gates: self.gates[from.min(self.gates.len())..].to_vec() }
    }

    /// Text export, one `step site gate-id` line per gate. Two-qubit gates on
    /// `(j, j+1)` are written with site `j`; other pairs as `a:b`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let site = match g.sites {
                Sites::One(a) => a.to_string(),
                Sites::Two(a, b) if b == a + 1 => a.to_string(),
                Sites::Two(a, b) => format!("{a}:{b}"),
            };
            out.push_str(&format!("{} {} {}\n", g.step, site, g.gate.label()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<CliffordCircuit> {
        let mut c = CliffordCircuit::new();
        let mut cache: HashMap<String, Arc<CliffordGate>> = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: lineno + 1, msg };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(perr("expected `step site gate-id`".into()));
            }
            let step: usize = f[0].parse().map_err(|_| perr("bad step".into()))?;
            let gate = match cache.get(f[2]) {
                Some(g) => g.clone(),
                None => {
                    let g = CliffordGate::by_id(f[2]).map_err(|e| perr(e.to_string()))?;
                    cache.insert(f[2].to_string(), g.clone());
                    g
                }
            };
            let sites = if let Some((a, b)) = f[1].split_once(':') {
                let a = a.parse().map_err(|_| perr("bad site".into()))?;
                let b = b.parse().map_err(|_| perr("bad site".into()))?;
                Sites::Two(a, b)
            } else {
                let a: usize = f[1].parse().map_err(|_| perr("bad site".into()))?;
                if gate.arity() == 2 {
                    Sites::Two(a, a + 1)
                } else {
                    Sites::One(a)
                }
            };
            c.push(gate, sites, step).map_err(|e| perr(e.to_string()))?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn dense_conj_matches(g: &CliffordGate) {
        let u = g.unitary();
        let ud = u.t().mapv(|c| c.conj());
        let dim = 1 << (2 * g.arity());
        for idx in 1..dim {
            let p = LocalPauli::from_index(idx);
            let lhs = u.dot(&p.matrix(g.arity())).dot(&ud);
            let rhs = g.conjugate_local(p).matrix(g.arity());
            let err = (&lhs - &rhs).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "gate {:?} pauli {idx}: {err}", g.label());
        }
    }

    #[test]
    fn primitives_match_dense() {
        for g in [
            CliffordGate::hadamard(),
            CliffordGate::phase_s(),
            CliffordGate::phase_sdg(),
            CliffordGate::pauli_x(),
            CliffordGate::pauli_z(),
            CliffordGate::cx(),
            CliffordGate::cz(),
            CliffordGate::swap(),
            CliffordGate::identity2(),
            CliffordGate::hadamard().lift(1).unwrap(),
        ] {
            dense_conj_matches(&g);
        }
    }

    #[test]
    fn textbook_conjugations() {
        let x = PauliString::parse("X").unwrap();
        let h = CliffordGate::hadamard();
        assert_eq!(x.conjugate_by_gate(&h, &Sites::One(0)).unwrap().to_string(), "+Z");
        let s = CliffordGate::phase_s();
        assert_eq!(x.conjugate_by_gate(&s, &Sites::One(0)).unwrap().to_string(), "+Y");
        let xi = PauliString::parse("XI").unwrap();
        let cx = CliffordGate::cx();
        assert_eq!(xi.conjugate_by_gate(&cx, &Sites::Two(0, 1)).unwrap().to_string(), "+XX");
        // reversed orientation: control on site 1
        let ix = PauliString::parse("IX").unwrap();
        assert_eq!(ix.conjugate_by_gate(&cx, &Sites::Two(1, 0)).unwrap().to_string(), "+XX");
        assert!(matches!(
            x.conjugate_by_gate(&h, &Sites::One(3)),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn candidate_set_shape() {
        let set = candidate_gate_set();
        assert_eq!(set.len(), CANDIDATE_COUNT);
        assert!(set[0].is_identity_action());
        let cx = CliffordGate::cx();
        let swap = CliffordGate::swap();
        assert!(set.iter().any(|g| g.images() == cx.images()));
        assert!(set.iter().any(|g| g.images() == swap.images()));
        assert_eq!(set[5].images(), cx.images());
        let mut classes: Vec<_> = set.iter().map(|g| g.images().to_vec()).collect();
        classes.sort_by_key(|v| v.iter().map(|p| (p.x, p.z)).collect::<Vec<_>>());
        classes.dedup();
        assert_eq!(classes.len(), CANDIDATE_COUNT);
    }

    #[test]
    fn candidates_match_dense() {
        for g in candidate_gate_set() {
            dense_conj_matches(g);
            let u = g.unitary();
            let eye = u.t().mapv(|c| c.conj()).dot(u);
            let err = (&eye - &Array2::<C64>::eye(4)).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes() {
        for g in candidate_gate_set().iter().take(100) {
            let inv = g.inverse();
            dense_conj_matches(&inv);
            for idx in 0..16 {
                let p = LocalPauli::from_index(idx);
                assert_eq!(inv.conjugate_local(g.conjugate_local(p)), p);
            }
        }
    }

    #[test]
    fn circuit_text_round_trip() {
        let mut c = CliffordCircuit::new();
        c.push(candidate_gate_set()[17].clone(), Sites::Two(3, 4), 2).unwrap();
        c.push(Arc::new(CliffordGate::hadamard()), Sites::One(1), 2).unwrap();
        c.push(Arc::new(CliffordGate::cx()), Sites::Two(4, 1), 3).unwrap();
        let text = c.to_text();
        assert_eq!(text, "2 3 17\n2 1 H\n3 4:1 CX\n");
        let back = CliffordCircuit::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert!(CliffordCircuit::parse("1 2").is_err());
        assert!(CliffordCircuit::parse("1 2 9999").is_err());
    }
}
