/// Rules for cutting a singular-value spectrum.
///
/// At most `chi_max` values are kept, then trailing values are dropped while
/// their squared sum stays within `cutoff` times the total squared weight.
/// At least one value is always kept. Values are assumed sorted descending
/// with ties already ordered by index, so the cut is deterministic.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SvdTruncation {
    pub chi_max: usize,
    pub cutoff: f64,
}

impl Default for SvdTruncation {
    fn default() -> Self {
        SvdTruncation { chi_max: usize::MAX, cutoff: 1e-12 }
    }
}

impl SvdTruncation {
    pub fn new(chi_max: usize, cutoff: f64) -> Self {
        SvdTruncation { chi_max: chi_max.max(1), cutoff: cutoff.max(0.0) }
    }

    /// Keeps every singular value.
    pub fn exact() -> Self {
        SvdTruncation { chi_max: usize::MAX, cutoff: 0.0 }
    }

    pub fn with_chi(chi_max: usize) -> Self {
        Self::new(chi_max, 1e-12)
    }

    /// Number of retained values and the discarded weight `Σ_dropped s²`.
    pub fn retain(&self, s: &[f64]) -> (usize, f64) {
        if s.is_empty() {
            return (0, 0.0);
        }
        let total: f64 = s.iter().map(|x| x * x).sum();
        let mut keep = s.len().min(self.chi_max).max(1);
        let mut discarded: f64 = s[keep..].iter().map(|x| x * x).sum();
        while keep > 1 {
            let w = s[keep - 1] * s[keep - 1];
            if discarded + w <= self.cutoff * total && self.cutoff > 0.0 {
                discarded += w;
                keep -= 1;
            } else {
                break;
            }
        }
        (keep, discarded)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_and_cutoff() {
        let s = [1.0, 0.5, 1e-7, 1e-9];
        assert_eq!(SvdTruncation::exact().retain(&s).0, 4);
        let (k, d) = SvdTruncation::with_chi(2).retain(&s);
        assert_eq!(k, 2);
        assert!((d - (1e-14 + 1e-18)).abs() < 1e-20);
        assert_eq!(SvdTruncation::new(10, 1e-12).retain(&s).0, 2);
        assert_eq!(SvdTruncation::new(10, 1e-20).retain(&s).0, 4);
        assert_eq!(SvdTruncation::new(10, 1.0).retain(&s).0, 1);
        assert_eq!(SvdTruncation::with_chi(3).retain(&[0.0, 0.0]).0, 1);
        assert_eq!(SvdTruncation::exact().retain(&[1.0, 0.0]).0, 2);
    }
}
