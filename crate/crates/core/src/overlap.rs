//! Stabilizer/MPS overlaps `⟨s|φ⟩`.
//!
//! Sampling draws `x ~ |⟨x|s⟩|²` and averages `S = ⟨x|φ⟩ / ⟨x|s⟩`.
//! Samples are split into fixed chunks of [`CHUNK`]; chunk `c` uses a
//! `ChaCha8Rng` seeded with the caller's seed on stream `c`, and chunk
//! statistics are merged in chunk order. The result is therefore identical
//! in sequential and parallel execution.
//!
//! Projection applies `(I + g_j)/2` for every canonical generator `g_j`, in
//! the order returned by [`StabilizerTableau::generators`], and reads off
//! `⟨x|s⟩⟨s|φ⟩` at one sampled configuration.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mps::{apply_mpo, Mpo, Mps, SvdTruncation};
use crate::pauli::PauliString;
use crate::stabilizer::StabilizerTableau;

pub const CHUNK: usize = 1024;

/// Relative discarded-weight cutoff for unbounded projections. Squared
/// amplitudes at round-off level sit far below it.
pub const UNBOUNDED_CUTOFF: f64 = 1e-24;

#[derive(Clone, Debug, PartialEq)]
pub struct StochasticOverlap {
    pub mean: C64,
    pub n_samples: usize,
    /// Unbiased sample variance of `S`.
    pub empirical_variance: f64,
    /// `1 - |mean|²`.
    pub predicted_variance: f64,
}

impl StochasticOverlap {
    pub fn std_error(&self) -> f64 {
        (self.empirical_variance / self.n_samples as f64).sqrt()
    }
}

/// Count, mean and sum of squared deviations of a chunk.
#[derive(Copy, Clone, Debug)]
struct Moments {
    n: f64,
    mean: C64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * (o.n / n),
            m2: self.m2 + o.m2 + delta.norm_sqr() * self.n * o.n / n,
        }
    }
}

pub fn overlap_sampling(
    s: &StabilizerTableau,
    phi: &Mps,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<StochasticOverlap> {
    if s.n() != phi.n() {
        return Err(Error::LengthMismatch { expected: s.n(), found: phi.n() });
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let form = s.canonical_form();
    let chunks = n_samples.div_ceil(CHUNK);
    let parts: Vec<Result<Moments>> = exec.map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(n_samples - c * CHUNK);
        let mut acc = Moments { n: 0.0, mean: C64::new(0.0, 0.0), m2: 0.0 };
        for _ in 0..count {
            let (x, amp_s) = form.sample(&mut rng);
            let v = phi.amplitude(&x)? / amp_s;
            // Welford update
            acc.n += 1.0;
            let delta = v - acc.mean;
            acc.mean += delta / acc.n;
            acc.m2 += (delta.conj() * (v - acc.mean)).re;
        }
        Ok(acc)
    });
    let mut total = Moments { n: 0.0, mean: C64::new(0.0, 0.0), m2: 0.0 };
    for p in parts {
        total = total.merge(p?);
    }
    let empirical_variance = if n_samples > 1 { (total.m2 / (total.n - 1.0)).max(0.0) } else { 0.0 };
    Ok(StochasticOverlap {
        mean: total.mean,
        n_samples,
        empirical_variance,
        predicted_variance: 1.0 - total.mean.norm_sqr(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOverlap {
    pub value: C64,
    /// Bond cap used while projecting (`usize::MAX` when unbounded).
    pub chi_p: usize,
    pub total_discarded_weight: f64,
    /// Set when the projected state's norm fell below `1e-14`.
    pub negligible: bool,
    /// Largest bond dimension reached during projection.
    pub max_bond: usize,
}

/// Applies the projectors of `generators` to `phi` in order with bond cap
/// `chi_p`. A bounded cap uses the default cutoff; an unbounded one only
/// drops weight below [`UNBOUNDED_CUTOFF`]. Returns the projected state, total discarded
/// weight and largest bond seen.
pub fn project(phi: &Mps, generators: &[PauliString], chi_p: usize) -> Result<(Mps, f64, usize)> {
    let cutoff = if chi_p == usize::MAX { UNBOUNDED_CUTOFF } else { SvdTruncation::default().cutoff };
    let tr = SvdTruncation { chi_max: chi_p.max(1), cutoff };
    let mut cur = phi.clone();
    cur.set_chi_max(usize::MAX);
    let mut discarded = 0.0;
    let mut max_bond = cur.max_bond();
    for g in generators {
        let p = Mpo::projector(g)?;
        let (next, d) = apply_mpo(&cur, &p, &tr)?;
        discarded += d;
        max_bond = max_bond.max(next.max_bond());
        cur = next;
    }
    Ok((cur, discarded, max_bond))
}

pub fn overlap_projection(s: &StabilizerTableau, phi: &Mps, chi_p: usize, seed: u64) -> Result<ProjectionOverlap> {
    overlap_projection_ordered(s, phi, chi_p, seed, &s.generators())
}

/// Projection with an explicit generator list (any generating set of the
/// stabilizer group of `s`).
pub fn overlap_projection_ordered(
    s: &StabilizerTableau,
    phi: &Mps,
    chi_p: usize,
    seed: u64,
    generators: &[PauliString],
) -> Result<ProjectionOverlap> {
    if s.n() != phi.n() {
        return Err(Error::LengthMismatch { expected: s.n(), found: phi.n() });
    }
    let (psi, discarded, max_bond) = project(phi, generators, chi_p)?;
    let mut out = ProjectionOverlap {
        value: C64::new(0.0, 0.0),
        chi_p,
        total_discarded_weight: discarded,
        negligible: false,
        max_bond,
    };
    let norm = psi.norm();
    if norm < 1e-14 {
        out.negligible = true;
        return Ok(out);
    }
    let form = s.canonical_form();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut amp_s) = form.sample(&mut rng);
    let mut a = psi.amplitude(&x)?;
    if a.norm() < 1e-12 * norm {
        (x, amp_s) = form.sample(&mut rng);
        a = psi.amplitude(&x)?;
    }
    out.value = a / amp_s;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{CliffordGate, Sites};
    use crate::dense::DenseState;
    use crate::stabilizer::Bitstring;
    use rand::Rng;

    fn bell_pairs(n: usize) -> StabilizerTableau {
        let mut t = StabilizerTableau::new_zero_state(n).unwrap();
        for j in (0..n - 1).step_by(2) {
            t.apply_gate(&CliffordGate::hadamard(), &Sites::One(j)).unwrap();
            t.apply_gate(&CliffordGate::cx(), &Sites::Two(j, j + 1)).unwrap();
        }
        t
    }

    fn bell_pairs_mps(n: usize) -> Mps {
        let mut m = Mps::zero_state(n);
        let h = CliffordGate::hadamard();
        for j in (0..n - 1).step_by(2) {
            m.apply_single_site(h.unitary(), j).unwrap();
            m.apply_two_site_gate(CliffordGate::cx().unitary(), (j, j + 1), &SvdTruncation::default(), crate::mps::Sweep::Right)
                .unwrap();
        }
        m
    }

    #[test]
    fn identical_product_states() {
        let s = StabilizerTableau::new_zero_state(5).unwrap();
        let phi = Mps::zero_state(5);
        let o = overlap_sampling(&s, &phi, 500, 1, Execution::Sequential).unwrap();
        assert_eq!(o.mean, C64::new(1.0, 0.0));
        assert_eq!(o.empirical_variance, 0.0);
        assert_eq!(o.predicted_variance, 0.0);
        let p = overlap_projection(&s, &phi, 8, 1).unwrap();
        assert!((p.value - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(p.total_discarded_weight, 0.0);
    }

    #[test]
    fn orthogonal_basis_states() {
        let s = StabilizerTableau::new_zero_state(1).unwrap();
        let phi = Mps::product_state(&Bitstring::parse("1").unwrap());
        let o = overlap_sampling(&s, &phi, 100, 3, Execution::Parallel).unwrap();
        assert_eq!(o.mean, C64::new(0.0, 0.0));
        assert_eq!(o.predicted_variance, 1.0);
        let p = overlap_projection(&s, &phi, 8, 3).unwrap();
        assert!(p.negligible);
        assert_eq!(p.value, C64::new(0.0, 0.0));
    }

    #[test]
    fn bell_pairs_project_exactly() {
        let s = bell_pairs(4);
        let phi = bell_pairs_mps(4);
        let p = overlap_projection(&s, &phi, usize::MAX, 5).unwrap();
        assert!((p.value.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampling_is_mode_independent() {
        let s = bell_pairs(6);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = Mps::random(6, 4, &mut rng);
        let a = overlap_sampling(&s, &phi, 5000, 77, Execution::Sequential).unwrap();
        let b = overlap_sampling(&s, &phi, 5000, 77, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projection_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        let mut s = StabilizerTableau::new_zero_state(n).unwrap();
        let set = crate::clifford::candidate_gate_set();
        for _ in 0..30 {
            let j = rng.random_range(0..n - 1);
            s.apply_gate(&set[rng.random_range(0..set.len())], &Sites::Two(j, j + 1)).unwrap();
        }
        let phi = Mps::random(n, 8, &mut rng);
        let p = overlap_projection(&s, &phi, usize::MAX, 2).unwrap();
        let ds = DenseState::from_tableau(&s).unwrap();
        let dphi = DenseState::from_mps(&phi).unwrap();
        // fix the arbitrary dense phase with the tableau convention at one entry
        let k = (0..1 << n).find(|&x| ds.amplitudes()[x].norm() > 1e-8).unwrap();
        let conv = s.amplitude(&Bitstring::from_index(n, k)).unwrap();
        let rot = conv / ds.amplitudes()[k];
        let want = ds.overlap(&dphi) * rot.conj();
        assert!((p.value - want).norm() < 1e-8, "{} vs {}", p.value, want);
    }
}
