//! Concentration metrics checked against brute-force definitions.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tiger_core::metrics::{gini, nakamoto, MetricError, WeightVector};

/// Minimum subset size by trying every subset.
fn nakamoto_exhaustive(units: &[u64], ppb: u128, strict: bool) -> Option<usize> {
    let total: u128 = units.iter().map(|&u| u as u128).sum();
    let n = units.len();
    (0u32..1 << n)
        .filter(|mask| {
            let part: u128 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| units[i] as u128).sum();
            let (lhs, rhs) = (part * 1_000_000_000, total * ppb);
            if strict { lhs > rhs } else { lhs >= rhs }
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn gini_double_sum(units: &[u64]) -> f64 {
    let n = units.len() as f64;
    let total: f64 = units.iter().map(|&u| u as f64).sum();
    let diff: f64 = units
        .iter()
        .flat_map(|&a| units.iter().map(move |&b| (a as f64 - b as f64).abs()))
        .sum();
    diff / (2.0 * n * total)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn nakamoto_matches_subset_search(
        units in prop::collection::vec(0u64..=8, 1..=12),
        t in prop::sample::select(vec![(0.33, 330_000_000u128), (0.5, 500_000_000), (0.67, 670_000_000)]),
        strict in any::<bool>(),
    ) {
        let w = WeightVector::from_units(&units);
        match nakamoto_exhaustive(&units, t.1, strict) {
            _ if units.iter().all(|&u| u == 0) => {
                prop_assert_eq!(nakamoto(&w, t.0, strict), Err(MetricError::ZeroTotal));
            }
            Some(k) => prop_assert_eq!(nakamoto(&w, t.0, strict), Ok(k)),
            None => prop_assert_eq!(nakamoto(&w, t.0, strict), Err(MetricError::ThresholdUnreachable)),
        }
    }
}

#[test]
fn gini_matches_double_sum() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..1000 {
        let n = rng.random_range(1..=60);
        let mut units: Vec<u64> = (0..n).map(|_| rng.random_range(0..=1_000_000)).collect();
        if units.iter().all(|&u| u == 0) {
            units[0] = 1;
        }
        let g = gini(&WeightVector::from_units(&units)).unwrap();
        let oracle = gini_double_sum(&units);
        assert!((g - oracle).abs() <= 1e-12, "{units:?}: {g} vs {oracle}");
    }
}

#[test]
fn gini_extremes() {
    assert_eq!(gini(&WeightVector::from_units(&[5, 5, 5, 5])).unwrap(), 0.0);
    let g = gini(&WeightVector::from_units(&[0, 0, 0, 10])).unwrap();
    assert!((g - 0.75).abs() < 1e-15);
    assert_eq!(gini(&WeightVector::from_units(&[])), Err(MetricError::EmptyWeights));
}

/// Largest sum reachable with exactly k elements, for every k, found by
/// enumerating every sub-multiset of a multiset given as value counts.
fn best_sums(counts: &[usize; 9]) -> Vec<u64> {
    let n: usize = counts.iter().sum();
    let mut best = vec![0u64; n + 1];
    fn walk(v: usize, counts: &[usize; 9], size: usize, sum: u64, best: &mut [u64]) {
        if v == counts.len() {
            best[size] = best[size].max(sum);
            return;
        }
        for m in 0..=counts[v] {
            walk(v + 1, counts, size + m, sum + (m * v) as u64, best);
        }
    }
    walk(0, counts, 0, 0, &mut best);
    best
}

fn for_each_multiset(v: usize, left: usize, counts: &mut [usize; 9], f: &mut impl FnMut(&[usize; 9])) {
    if v == counts.len() {
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[v] = c;
        for_each_multiset(v + 1, left - c, counts, f);
    }
    counts[v] = 0;
}

#[test]
fn nakamoto_exhaustive_over_all_small_multisets() {
    let thresholds = [(0.33, 330_000_000u128), (0.5, 500_000_000), (0.67, 670_000_000)];
    let mut checked = 0usize;
    for_each_multiset(0, 12, &mut [0; 9], &mut |counts| {
        let n: usize = counts.iter().sum();
        let total: u64 = counts.iter().enumerate().map(|(v, &c)| (v * c) as u64).sum();
        if n == 0 || total == 0 {
            return;
        }
        let units: Vec<u64> = counts.iter().enumerate().flat_map(|(v, &c)| std::iter::repeat_n(v as u64, c)).collect();
        let w = WeightVector::from_units(&units);
        let best = best_sums(counts);
        for (t, ppb) in thresholds {
            for strict in [true, false] {
                let expected = (1..=n).find(|&k| {
                    let (lhs, rhs) = (best[k] as u128 * 1_000_000_000, total as u128 * ppb);
                    if strict { lhs > rhs } else { lhs >= rhs }
                });
                let got = nakamoto(&w, t, strict);
                match expected {
                    Some(k) => assert_eq!(got, Ok(k), "{units:?} t={t} strict={strict}"),
                    None => assert_eq!(got, Err(MetricError::ThresholdUnreachable)),
                }
                checked += 1;
            }
        }
    });
    // multisets of size 1..=12 over 9 values, minus the all-zero ones
    assert_eq!(checked, (293_929 - 12) * 6);
}
