use std::io::Write;

use crate::clifford::CliffordCircuit;
use crate::disentangler::{Disentangler, SweepReport};
use crate::error::{Error, Result};
use crate::mps::{Mpo, Mps, SvdTruncation};
use crate::overlap::{overlap_projection, overlap_sampling};
use crate::pauli::PauliSum;
use crate::stabilizer::StabilizerTableau;
use crate::tdvp::{tdvp_step, TdvpConfig};

use super::config::{OverlapMethod, RunConfig};
use super::models::build_hamiltonian;

pub const CSV_HEADER: &str = "t,L,per_site,rate,variance_or_discarded,max_chi,max_entropy,n_clifford_gates";

/// Cutoff used when compressing the dressed Hamiltonian into an MPO.
const MPO_CUTOFF: f64 = 1e-12;

/// `(L^{1/N}, -ln(L)/N)`; `(0, +inf)` when `L <= 0`.
pub fn rescale_echo(l: f64, n: usize) -> (f64, f64) {
    if l <= 0.0 {
        return (0.0, f64::INFINITY);
    }
    let n = n as f64;
    (l.powf(1.0 / n), -l.ln() / n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EchoRow {
    pub t: f64,
    pub echo: f64,
    pub per_site: f64,
    pub rate: f64,
    /// Empirical variance of the estimator (sampling) or total discarded
    /// weight of the projection.
    pub variance_or_discarded: f64,
    pub max_chi: usize,
    pub max_entropy: f64,
    pub n_clifford_gates: usize,
}

impl EchoRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{},{:.15e},{}",
            self.t,
            self.echo,
            self.per_site,
            self.rate,
            self.variance_or_discarded,
            self.max_chi,
            self.max_entropy,
            self.n_clifford_gates
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[EchoRow]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    w.flush()
}

/// What a single step produced, handed to the observer as it happens.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    /// Projection row for `projection`/`both`, sampling row for `sampling`.
    pub row: EchoRow,
    /// Extra sampling row when the method is `both`.
    pub sampling: Option<EchoRow>,
    /// Disentangling sweep of this step; `None` at step 0 or when disabled.
    pub sweep: Option<SweepReport>,
    /// Pauli term count of the dressed Hamiltonian after this step.
    pub h_terms: usize,
}

#[derive(Clone, Debug)]
pub struct EchoTrace {
    pub rows: Vec<EchoRow>,
    /// Filled only for method `both`.
    pub sampling_rows: Vec<EchoRow>,
    pub sweeps: Vec<SweepReport>,
    /// Term count of the dressed Hamiltonian, starting with the bare one.
    pub h_terms: Vec<usize>,
    /// Reason the run stopped early.
    pub failure: Option<String>,
    pub state: Mps,
    pub circuit: CliffordCircuit,
    pub hamiltonian: PauliSum,
}

fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn round_time(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

struct Loop<'a> {
    cfg: &'a RunConfig,
    n: usize,
    phi: Mps,
    tableau: StabilizerTableau,
    circuit: CliffordCircuit,
    dressed: PauliSum,
    mpo: Mpo,
}

impl Loop<'_> {
    fn row(&self, t: f64, echo: f64, extra: f64) -> EchoRow {
        let (per_site, rate) = rescale_echo(echo, self.n);
        EchoRow {
            t,
            echo,
            per_site,
            rate,
            variance_or_discarded: extra,
            max_chi: self.phi.max_bond(),
            max_entropy: self.phi.bond_entropies().into_iter().fold(0.0, f64::max),
            n_clifford_gates: self.circuit.len(),
        }
    }

    fn measure(&self, step: usize) -> Result<(EchoRow, Option<EchoRow>)> {
        let t = round_time(step as f64 * self.cfg.dt);
        let seed = step_seed(self.cfg.seed, step);
        let sampled = |this: &Self| -> Result<EchoRow> {
            let o = overlap_sampling(&this.tableau, &this.phi, this.cfg.n_samples, seed, this.cfg.execution)?;
            Ok(this.row(t, o.mean.norm_sqr(), o.empirical_variance))
        };
        let projected = |this: &Self| -> Result<EchoRow> {
            let o = overlap_projection(&this.tableau, &this.phi, this.cfg.chi_p, seed)?;
            Ok(this.row(t, o.value.norm_sqr(), o.total_discarded_weight))
        };
        Ok(match self.cfg.method {
            OverlapMethod::Sampling => (sampled(self)?, None),
            OverlapMethod::Projection => (projected(self)?, None),
            OverlapMethod::Both => (projected(self)?, Some(sampled(self)?)),
        })
    }

    fn advance(&mut self, step: usize) -> Result<Option<SweepReport>> {
        tdvp_step(&mut self.phi, &self.mpo, &TdvpConfig::new(self.cfg.dt, self.cfg.chi))?;
        if !self.cfg.disentangle {
            return Ok(None);
        }
        let start = self.circuit.len();
        let d = Disentangler { execution: self.cfg.execution, ..Disentangler::default() };
        let report = d.sweep(
            &mut self.phi,
            &mut self.dressed,
            &mut self.circuit,
            &SvdTruncation::new(self.cfg.chi, 0.0),
            step,
        )?;
        if report.gates_applied > 0 {
            self.tableau.compose_in_place(&self.circuit.tail(start))?;
            self.mpo = Mpo::from_pauli_sum(&self.dressed, self.cfg.mpo_cap, MPO_CUTOFF)?;
        }
        Ok(Some(report))
    }
}

fn load_hamiltonian(cfg: &RunConfig) -> Result<PauliSum> {
    let n = cfg.model.qubits();
    let h = match &cfg.hamiltonian {
        Some(path) => PauliSum::parse(&std::fs::read_to_string(path)?)?,
        None => build_hamiltonian(&cfg.model)?,
    };
    if h.n() != n {
        return Err(Error::LengthMismatch { expected: n, found: h.n() });
    }
    Ok(h)
}

pub fn run_echo(cfg: &RunConfig) -> Result<EchoTrace> {
    run_echo_with(cfg, |_| {})
}

/// Runs the echo loop, calling `observe` after every recorded step. Errors
/// in setup are returned; errors during stepping end the trace early with
/// the reason stored in [`EchoTrace::failure`].
pub fn run_echo_with<F: FnMut(&StepRecord)>(cfg: &RunConfig, mut observe: F) -> Result<EchoTrace> {
    cfg.validate()?;
    let n = cfg.model.qubits();
    let hamiltonian = load_hamiltonian(cfg)?;
    let mpo = Mpo::from_pauli_sum(&hamiltonian, cfg.mpo_cap, MPO_CUTOFF)?;
    let mut lp = Loop {
        cfg,
        n,
        phi: Mps::zero_state(n),
        tableau: StabilizerTableau::new_zero_state(n)?,
        circuit: CliffordCircuit::new(),
        dressed: hamiltonian,
        mpo,
    };
    let mut trace = EchoTrace {
        rows: Vec::new(),
        sampling_rows: Vec::new(),
        sweeps: Vec::new(),
        h_terms: vec![lp.dressed.len()],
        failure: None,
        state: lp.phi.clone(),
        circuit: CliffordCircuit::new(),
        hamiltonian: PauliSum::new(n),
    };
    for step in 0..=cfg.steps() {
        let outcome = (|| -> Result<StepRecord> {
            let sweep = if step > 0 { lp.advance(step)? } else { None };
            let (row, sampling) = lp.measure(step)?;
            Ok(StepRecord { step, row, sampling, sweep, h_terms: lp.dressed.len() })
        })();
        match outcome {
            Ok(rec) => {
                observe(&rec);
                trace.rows.push(rec.row);
                trace.sampling_rows.extend(rec.sampling);
                if step > 0 {
                    trace.h_terms.push(rec.h_terms);
                }
                trace.sweeps.extend(rec.sweep);
            }
            Err(e) => {
                trace.failure = Some(format!("step {step}: {e}"));
                break;
            }
        }
    }
    trace.state = lp.phi;
    trace.circuit = lp.circuit;
    trace.hamiltonian = lp.dressed;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::models::{ModelKind, ModelSpec};

    fn cfg(n: usize) -> RunConfig {
        RunConfig::new(ModelSpec::new(ModelKind::Tfim1d, n, 1.0).unwrap())
    }

    #[test]
    fn rescaling() {
        assert_eq!(rescale_echo(1.0, 7), (1.0, 0.0));
        let (_, r) = rescale_echo((-5.0f64).exp(), 5);
        assert!((r - 1.0).abs() < 1e-15);
        let (p, r) = rescale_echo(0.25, 2);
        assert!((p - 0.5).abs() < 1e-15 && (r - 2f64.ln()).abs() < 1e-15);
        assert_eq!(rescale_echo(0.0, 3), (0.0, f64::INFINITY));
        assert_eq!(rescale_echo(-1e-3, 3), (0.0, f64::INFINITY));
    }

    #[test]
    fn zero_time_gives_one_row() {
        let mut c = cfg(4);
        c.t_max = 0.0;
        let tr = run_echo(&c).unwrap();
        assert_eq!(tr.rows.len(), 1);
        assert!((tr.rows[0].echo - 1.0).abs() < 1e-10);
        assert!(tr.failure.is_none());
    }

    #[test]
    fn rows_are_ordered_and_bounded() {
        let mut c = cfg(6);
        c.t_max = 0.5;
        c.chi = 4;
        c.method = OverlapMethod::Both;
        c.n_samples = 2000;
        let tr = run_echo(&c).unwrap();
        assert_eq!(tr.rows.len(), 6);
        assert_eq!(tr.sampling_rows.len(), 6);
        assert_eq!(tr.sweeps.len(), 5);
        assert_eq!(tr.h_terms.len(), 6);
        for w in tr.rows.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        for r in &tr.rows {
            assert!(r.echo <= 1.0 + 1e-10 && r.max_chi <= 4);
        }
    }

    #[test]
    fn failure_keeps_prior_rows() {
        let mut c = cfg(6);
        c.t_max = 1.0;
        c.chi = 8;
        c.mpo_cap = 3;
        // the bare TFIM MPO fits in bond 3; the first dressing that grows it fails
        let tr = run_echo(&c).unwrap();
        if let Some(reason) = &tr.failure {
            assert!(reason.contains("exceeds cap"));
            assert!(!tr.rows.is_empty());
        }
    }

    #[test]
    fn csv_is_stable() {
        let mut c = cfg(4);
        c.t_max = 0.3;
        c.method = OverlapMethod::Sampling;
        c.n_samples = 3000;
        c.seed = 11;
        let a = run_echo(&c).unwrap();
        let b = run_echo(&c).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&mut x, &a.rows).unwrap();
        write_csv(&mut y, &b.rows).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(text.lines().count(), 5);
    }
}
