//! Simple random sampling of grid cells without replacement.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geofield::Population;
use crate::seed;

/// One simple random sample drawn from a [`Population`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Row-major cell ids, in draw order.
    pub cell_indices: Vec<usize>,
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub x_uncorr: Vec<f64>,
}

impl Sample {
    pub fn n(&self) -> usize {
        self.cell_indices.len()
    }
}

/// Draws `n` distinct indices from `0..population` uniformly at random.
///
/// Partial Fisher-Yates: the first `n` swaps of a virtual identity
/// permutation. Dense storage is used when `n` is a sizable fraction of the
/// population, otherwise only displaced slots are tracked in a map.
pub fn draw_indices<R: Rng + ?Sized>(population: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n == 0 || n > population {
        return Err(Error::InvalidArgument(format!("sample size must be in 1..={population}, got {n}")));
    }
    let mut out = Vec::with_capacity(n);
    if n.saturating_mul(8) >= population {
        let mut perm: Vec<usize> = (0..population).collect();
        for i in 0..n {
            let j = rng.random_range(i..population);
            perm.swap(i, j);
            out.push(perm[i]);
        }
    } else {
        let mut displaced: HashMap<usize, usize> = HashMap::with_capacity(2 * n);
        for i in 0..n {
            let j = rng.random_range(i..population);
            let at_j = *displaced.get(&j).unwrap_or(&j);
            let at_i = *displaced.get(&i).unwrap_or(&i);
            displaced.insert(j, at_i);
            out.push(at_j);
        }
    }
    Ok(out)
}

/// SRS of `n` cells, deterministic in `seed`.
pub fn srs_sample(pop: &Population, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = seed::rng(seed);
    srs_sample_with(pop, n, &mut rng)
}

pub fn srs_sample_with<R: Rng + ?Sized>(pop: &Population, n: usize, rng: &mut R) -> Result<Sample> {
    let cell_indices = draw_indices(pop.len(), n, rng)?;
    let pick = |values: &[f64]| cell_indices.iter().map(|&k| values[k]).collect::<Vec<_>>();
    Ok(Sample { z: pick(&pop.z), x: pick(&pop.x), x_uncorr: pick(&pop.x_uncorr), cell_indices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geofield::{build_population, PopulationSpec};
    use crate::stats;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn toy() -> Population {
        build_population(&PopulationSpec::new(16, 16, 100.0, 0.3, 1.0, 5.0, 3.0, 3).unwrap()).unwrap()
    }

    #[test]
    fn census_recovers_population_mean() {
        let pop = toy();
        let s = srs_sample(&pop, pop.len(), 8).unwrap();
        let mut ids = s.cell_indices.clone();
        ids.sort_unstable();
        assert_eq!(ids, (0..pop.len()).collect::<Vec<_>>());
        assert!((stats::mean(&s.z) - pop.mu).abs() < 1e-12);
    }

    #[test]
    fn single_cell_sample_is_allowed_but_estimators_reject_it() {
        let pop = toy();
        let s = srs_sample(&pop, 1, 2).unwrap();
        assert_eq!(s.n(), 1);
        assert!(crate::estimators::hte(&s.z).is_err());
    }

    #[test]
    fn size_bounds() {
        let pop = toy();
        assert!(srs_sample(&pop, 0, 1).is_err());
        assert!(srs_sample(&pop, pop.len() + 1, 1).is_err());
    }

    #[test]
    fn values_are_copied_from_population() {
        let pop = toy();
        let s = srs_sample(&pop, 20, 5).unwrap();
        for (i, &k) in s.cell_indices.iter().enumerate() {
            assert_eq!(s.z[i], pop.z[k]);
            assert_eq!(s.x[i], pop.x[k]);
            assert_eq!(s.x_uncorr[i], pop.x_uncorr[k]);
        }
        assert_eq!(s, srs_sample(&pop, 20, 5).unwrap());
    }

    fn inclusion_frequencies(population: usize, n: usize, draws: usize) -> Vec<f64> {
        let mut hits = vec![0usize; population];
        let mut rng = seed::rng(2024);
        for _ in 0..draws {
            for k in draw_indices(population, n, &mut rng).unwrap() {
                hits[k] += 1;
            }
        }
        hits.into_iter().map(|h| h as f64 / draws as f64).collect()
    }

    #[test]
    fn uniform_inclusion_dense_path() {
        // n = 2 of 20 cells: pi_k = 0.1, SE = sqrt(0.09 / 1e5) ~ 0.00095
        let freq = inclusion_frequencies(20, 2, 100_000);
        let se = (0.1 * 0.9 / 100_000.0_f64).sqrt();
        for f in freq {
            assert!((f - 0.1).abs() < 0.005);
            assert!((f - 0.1).abs() < 3.0 * se, "freq {f}");
        }
    }

    #[test]
    fn uniform_inclusion_sparse_path() {
        let (population, n, draws) = (200, 5, 100_000);
        let p = n as f64 / population as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let freq = inclusion_frequencies(population, n, draws);
        let worst = freq.iter().map(|f| (f - p).abs() / se).fold(0.0, f64::max);
        // Max of 200 |z| scores; 4.5 SE leaves room for the multiplicity.
        assert!(worst < 4.5, "worst z {worst}");
    }

    proptest! {
        #[test]
        fn indices_distinct_and_in_bounds(population in 1usize..5000, frac in 0.0..1.0_f64, seed in any::<u64>()) {
            let n = ((population as f64 * frac) as usize).max(1);
            let mut rng = seed::rng(seed);
            let idx = draw_indices(population, n, &mut rng).unwrap();
            prop_assert_eq!(idx.len(), n);
            prop_assert!(idx.iter().all(|&k| k < population));
            let set: HashSet<_> = idx.iter().collect();
            prop_assert_eq!(set.len(), n);
        }
    }
}
