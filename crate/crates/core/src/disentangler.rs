//! Greedy Clifford disentangling sweep.
//!
//! At each bond `(j, j+1)`, left to right, every candidate two-qubit Clifford
//! is applied to the two-site tensor and scored by the second Rényi entropy
//! of the resulting bipartition. The lowest cost wins, ties going to the
//! lower candidate index; a non-identity gate is only taken when it beats
//! the identity by at least the acceptance threshold.

use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex64 as C64;

use crate::clifford::{candidate_gate_set, CliffordCircuit, CliffordGate, Sites};
use crate::error::Result;
use crate::exec::Execution;
use crate::mps::{apply_gate_to_theta, Mps, SvdTruncation, Sweep};
use crate::pauli::PauliSum;

/// Per-bond record of one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct BondChoice {
    pub bond: usize,
    pub identity_cost: f64,
    pub selected_cost: f64,
    /// Candidate index of the applied gate, `None` when nothing was applied.
    pub gate: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepReport {
    pub choices: Vec<BondChoice>,
    pub discarded_weight: f64,
    pub gates_applied: usize,
}

#[derive(Copy, Clone, Debug)]
pub struct Disentangler {
    /// Minimal cost reduction for a non-identity gate to be applied.
    pub threshold: f64,
    pub execution: Execution,
}

impl Default for Disentangler {
    fn default() -> Self {
        Disentangler { threshold: 1e-10, execution: Execution::default() }
    }
}

/// `-ln Tr ρ²` of the cut between the first and second site of a normalized
/// or unnormalized `(dl, 4, dr)` two-site tensor.
pub fn renyi2(theta: &Array3<C64>) -> f64 {
    let (dl, _, dr) = theta.dim();
    let m = theta.to_shape((dl * 2, 2 * dr)).unwrap();
    let g: Array2<C64> = if dl <= dr {
        m.dot(&m.t().mapv(|x| x.conj()))
    } else {
        m.t().mapv(|x| x.conj()).dot(&m)
    };
    let tr: f64 = g.diag().iter().map(|x| x.re).sum();
    if tr <= 0.0 {
        return 0.0;
    }
    let purity = g.iter().map(|x| x.norm_sqr()).sum::<f64>() / (tr * tr);
    -purity.min(1.0).ln()
}

impl Disentangler {
    /// Costs of all candidates on a two-site tensor, in candidate order.
    pub fn candidate_costs(&self, theta: &Array3<C64>) -> Vec<f64> {
        let set = candidate_gate_set();
        self.execution.map_indexed(set.len(), |k| {
            if k == 0 {
                renyi2(theta)
            } else {
                renyi2(&apply_gate_to_theta(theta, set[k].unitary()))
            }
        })
    }

    /// Index and cost of the best candidate.
    fn select(&self, costs: &[f64]) -> (usize, f64) {
        let identity = costs[0];
        let mut best = (0, identity);
        for (k, &c) in costs.iter().enumerate().skip(1) {
            if c < best.1 {
                best = (k, c);
            }
        }
        if best.0 != 0 && identity - best.1 < self.threshold {
            (0, identity)
        } else {
            best
        }
    }

    /// One left-to-right sweep. Chosen gates are applied to `m`, appended to
    /// `circuit` with the given step tag, and conjugated into `h`. Bonds are
    /// zero-padded back to `min(tr.chi_max, full)` afterwards so the state
    /// stays on a fixed-χ manifold; the center ends on site 0.
    pub fn sweep(
        &self,
        m: &mut Mps,
        h: &mut PauliSum,
        circuit: &mut CliffordCircuit,
        tr: &SvdTruncation,
        step: usize,
    ) -> Result<SweepReport> {
        let n = m.n();
        let set = candidate_gate_set();
        let mut report = SweepReport::default();
        m.canonicalize(0)?;
        for j in 0..n.saturating_sub(1) {
            let theta = m.two_site_theta(j);
            let costs = self.candidate_costs(&theta);
            let (k, cost) = self.select(&costs);
            report.choices.push(BondChoice {
                bond: j,
                identity_cost: costs[0],
                selected_cost: cost,
                gate: (k != 0).then_some(k),
            });
            if k == 0 {
                m.move_right(j);
                m.set_center(Some(j + 1));
                continue;
            }
            let gate: &Arc<CliffordGate> = &set[k];
            let moved = apply_gate_to_theta(&theta, gate.unitary());
            report.discarded_weight += m.split_theta(j, moved, tr, Sweep::Right)?;
            let sites = Sites::Two(j, j + 1);
            *h = h.conjugate_by_gate(gate, &sites)?;
            circuit.push(gate.clone(), sites, step)?;
            report.gates_applied += 1;
        }
        m.expand_bonds(tr.chi_max);
        Ok(report)
    }
}
