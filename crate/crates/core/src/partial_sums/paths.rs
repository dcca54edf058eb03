//! Path simulation.
//!
//! With `eta[k] = η_{k−λ}` for `k = 0 ..= m_max + λ` and `rev = (P[λ], …, P[0])`:
//!
//! ```text
//! S(m) = P[λ]·Σ_{k≤m} eta[k] + Σ_{q<λ} eta[m+1+q]·rev[1+q] − Σ_{k≤λ} eta[k]·rev[k]
//! ```
//!
//! so one innovation array serves the whole time grid and each point costs
//! one window dot product of length `λ`.

use rand::Rng;
use rayon::prelude::*;

use super::profile::{floor_nt, MAX_PROFILE_LEN};
use super::{normalizer, NormalizerMode, RegimeSpec};
use crate::error::{domain, Error, Result};
use crate::filters::TaperedFilter;
use crate::innovations::InnovationLaw;
use crate::rng::stream;
use crate::special::{dot, KahanSum};

/// Precomputed state for simulating `S_n` on a fixed time grid.
#[derive(Debug, Clone)]
pub struct PathEngine {
    filter: TaperedFilter,
    rev: Vec<f64>,
    law: InnovationLaw,
    ms: Vec<usize>,
    len: usize,
}

impl PathEngine {
    pub fn new(regime: &RegimeSpec, n: u64, t_grid: &[f64]) -> Result<Self> {
        if t_grid.is_empty() {
            return domain("empty time grid");
        }
        if t_grid.windows(2).any(|w| !(w[0] <= w[1])) || !(t_grid[0] >= 0.0) {
            return domain("time grid must be non-negative and ascending");
        }
        let filter = regime.tapered(n)?;
        let law = regime.innovation.at(n)?;
        let ms: Vec<usize> = t_grid.iter().map(|&t| floor_nt(n, t) as usize).collect();
        let len = *ms.last().expect("non-empty") as u64 + filter.lambda() + 1;
        if len > MAX_PROFILE_LEN {
            return Err(Error::Size(format!("innovation array of {len} entries exceeds {MAX_PROFILE_LEN}")));
        }
        let mut rev = filter.prefix_sums();
        rev.reverse();
        Ok(Self { filter, rev, law, ms, len: len as usize })
    }

    pub fn filter(&self) -> &TaperedFilter {
        &self.filter
    }

    pub fn law(&self) -> &InnovationLaw {
        &self.law
    }

    /// Length of the innovation array `η_{−λ}, …, η_{m_max}`.
    pub fn innovation_len(&self) -> usize {
        self.len
    }

    /// `S_n(t_k)` for given innovations `eta[k] = η_{k−λ}`.
    pub fn path_from(&self, eta: &[f64]) -> Vec<f64> {
        assert_eq!(eta.len(), self.len, "innovation array has the wrong length");
        let lam = self.filter.lambda() as usize;
        let p_lam = self.rev[0];
        let base = dot(&eta[..=lam], &self.rev);
        let mut cum = KahanSum::new();
        let mut next = 0usize;
        self.ms
            .iter()
            .map(|&m| {
                while next <= m {
                    cum.add(eta[next]);
                    next += 1;
                }
                let window = dot(&eta[m + 1..m + 1 + lam], &self.rev[1..]);
                p_lam * cum.value() + window - base
            })
            .collect()
    }

    /// One path, drawing `innovation_len()` innovations from `rng` into `buf`.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) -> Vec<f64> {
        buf.clear();
        buf.extend((0..self.len).map(|_| self.law.sample(rng)));
        self.path_from(buf)
    }
}

/// One realization of `(S_n(t_1), …, S_n(t_m))` from replica stream
/// `(master_seed, replica)`.
pub fn simulate_partial_sum_path(
    regime: &RegimeSpec,
    n: u64,
    t_grid: &[f64],
    master_seed: u64,
    replica: u64,
) -> Result<Vec<f64>> {
    let engine = PathEngine::new(regime, n, t_grid)?;
    let mut rng = stream(master_seed, replica);
    Ok(engine.sample_path(&mut rng, &mut Vec::new()))
}

/// `replicas` paths of `S_n / A_n`, replica `r` on stream `(master_seed, r)`.
pub fn simulate_normalized_replicas(
    regime: &RegimeSpec,
    n: u64,
    t_grid: &[f64],
    replicas: usize,
    master_seed: u64,
    mode: NormalizerMode,
) -> Result<Vec<Vec<f64>>> {
    let engine = PathEngine::new(regime, n, t_grid)?;
    let a = normalizer(regime, n, mode)?.value;
    Ok((0..replicas as u64)
        .into_par_iter()
        .map_init(Vec::new, |buf, r| {
            let mut rng = stream(master_seed, r);
            let mut p = engine.sample_path(&mut rng, buf);
            p.iter_mut().for_each(|x| *x /= a);
            p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::FilterSpec;
    use crate::innovations::InnovationSpec;
    use crate::partial_sums::{coefficient_profile, CaseIndex};

    #[test]
    fn iid_reduces_to_cumulative_sum() {
        let r = RegimeSpec::new(CaseIndex::new(2).unwrap(), FilterSpec::iid(), 0.5, 1.0, InnovationSpec::gaussian())
            .unwrap();
        let grid = [0.25, 0.5, 1.0];
        let e = PathEngine::new(&r, 64, &grid).unwrap();
        let lam = e.filter().lambda() as usize;
        let mut rng = stream(4, 0);
        let mut buf = Vec::new();
        let path = e.sample_path(&mut rng, &mut buf);
        for (k, &t) in grid.iter().enumerate() {
            let m = (64.0 * t) as usize;
            let direct: f64 = buf[lam + 1..=lam + m].iter().sum();
            assert!((path[k] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_innovations_give_coefficient_sums() {
        for j in 1..=12 {
            let r = RegimeSpec::defaults(j).unwrap();
            let n = 300;
            let grid = [0.3, 1.0, 1.7];
            let e = PathEngine::new(&r, n, &grid).unwrap();
            let path = e.path_from(&vec![1.0; e.innovation_len()]);
            for (k, &t) in grid.iter().enumerate() {
                let s = coefficient_profile(&r, n, t).unwrap().sum();
                assert!((path[k] - s).abs() <= 1e-9 * s.abs().max(1.0), "j={j} t={t}: {} vs {s}", path[k]);
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let r = RegimeSpec::defaults(4).unwrap();
        let a = simulate_partial_sum_path(&r, 128, &[0.5, 1.0], 9, 3).unwrap();
        let b = simulate_partial_sum_path(&r, 128, &[0.5, 1.0], 9, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsorted_grid_rejected() {
        let r = RegimeSpec::defaults(2).unwrap();
        assert!(PathEngine::new(&r, 10, &[1.0, 0.5]).is_err());
    }
}
