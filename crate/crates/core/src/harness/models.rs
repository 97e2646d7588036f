use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Tfim1d,
    NnnIsing,
    Ising2d,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfim1d" => Ok(ModelKind::Tfim1d),
            "nnn_ising" => Ok(ModelKind::NnnIsing),
            "ising2d" => Ok(ModelKind::Ising2d),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Tfim1d => "tfim1d",
            ModelKind::NnnIsing => "nnn_ising",
            ModelKind::Ising2d => "ising2d",
        })
    }
}

/// Open-boundary spin model. For `ising2d`, `size` is the side `L` of an
/// `L × L` lattice; otherwise it is the chain length.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub size: usize,
    pub field: f64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, size: usize, field: f64) -> Result<Self> {
        let spec = ModelSpec { kind, size, field };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 2 {
            return Err(Error::InvalidArgument(format!("model size must be at least 2, got {}", self.size)));
        }
        if self.kind == ModelKind::Ising2d && self.size > 7 {
            return Err(Error::InvalidArgument("ising2d side is limited to 7".into()));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidArgument("field must be finite".into()));
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        match self.kind {
            ModelKind::Ising2d => self.size * self.size,
            _ => self.size,
        }
    }
}

/// Chain position of every `(row, col)` site of an `l × l` lattice, ordered
/// by anti-diagonal `r + c` and by row within a diagonal.
pub fn diagonal_order(l: usize) -> Vec<Vec<usize>> {
    let mut sites: Vec<(usize, usize)> = (0..l).flat_map(|r| (0..l).map(move |c| (r, c))).collect();
    sites.sort_by_key(|&(r, c)| (r + c, r));
    let mut pos = vec![vec![0; l]; l];
    for (k, (r, c)) in sites.into_iter().enumerate() {
        pos[r][c] = k;
    }
    pos
}

fn two_body(n: usize, a: usize, b: usize) -> PauliString {
    let mut axes = vec![0u8; n];
    axes[a] = 1;
    axes[b] = 1;
    PauliString::from_axes(&axes).expect("valid axes")
}

/// `Σ X_i X_j` over the model's couplings minus `h Σ Z_i`.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<PauliSum> {
    spec.validate()?;
    let n = spec.qubits();
    let mut h = PauliSum::new(n);
    match spec.kind {
        ModelKind::Tfim1d | ModelKind::NnnIsing => {
            for i in 0..n - 1 {
                h.add_term(1.0, &two_body(n, i, i + 1))?;
            }
            if spec.kind == ModelKind::NnnIsing {
                for i in 0..n.saturating_sub(2) {
                    h.add_term(1.0, &two_body(n, i, i + 2))?;
                }
            }
        }
        ModelKind::Ising2d => {
            let l = spec.size;
            let pos = diagonal_order(l);
            for r in 0..l {
                for c in 0..l {
                    if c + 1 < l {
                        h.add_term(1.0, &two_body(n, pos[r][c], pos[r][c + 1]))?;
                    }
                    if r + 1 < l {
                        h.add_term(1.0, &two_body(n, pos[r][c], pos[r + 1][c]))?;
                    }
                }
            }
        }
    }
    for i in 0..n {
        h.add_term(-spec.field, &PauliString::single(n, i, 3)?)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_two_sites() {
        let h = build_hamiltonian(&ModelSpec::new(ModelKind::Tfim1d, 2, 1.0).unwrap()).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.coefficient(&PauliString::parse("XX").unwrap()), 1.0);
        assert_eq!(h.coefficient(&PauliString::parse("ZI").unwrap()), -1.0);
        assert_eq!(h.coefficient(&PauliString::parse("IZ").unwrap()), -1.0);
    }

    #[test]
    fn nnn_has_long_bond() {
        let h = build_hamiltonian(&ModelSpec::new(ModelKind::NnnIsing, 3, 1.0).unwrap()).unwrap();
        assert_eq!(h.coefficient(&PauliString::parse("XIX").unwrap()), 1.0);
        assert_eq!(h.len(), 6);
    }

    #[test]
    fn square_lattice_counts() {
        for l in 2..=5 {
            let h = build_hamiltonian(&ModelSpec::new(ModelKind::Ising2d, l, 3.044).unwrap()).unwrap();
            let bonds = h.iter().filter(|(_, p)| p.weight() == 2).count();
            let fields = h.iter().filter(|(_, p)| p.weight() == 1).count();
            assert_eq!(bonds, 2 * l * (l - 1));
            assert_eq!(fields, l * l);
        }
    }

    #[test]
    fn diagonal_unfolding() {
        let pos = diagonal_order(3);
        assert_eq!(pos, vec![vec![0, 1, 3], vec![2, 4, 6], vec![5, 7, 8]]);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(ModelSpec::new(ModelKind::Tfim1d, 1, 1.0).is_err());
        assert!("chain".parse::<ModelKind>().is_err());
    }
}
