//! Gini and Nakamoto coefficients over owner-weighted vectors.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::model::{ratio, TokenAmount};

/// Owner-labelled non-negative weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    entries: Vec<(String, TokenAmount)>,
    total: TokenAmount,
}

impl WeightVector {
    pub fn new(entries: Vec<(String, TokenAmount)>) -> Result<Self, MetricError> {
        let total = TokenAmount::checked_sum(entries.iter().map(|(_, w)| *w))?;
        Ok(WeightVector { entries, total })
    }

    /// Whole-unit weights with owners `w0`, `w1`, ...
    pub fn from_units(units: &[u64]) -> Self {
        let entries = units
            .iter()
            .enumerate()
            .map(|(i, &u)| (format!("w{i}"), TokenAmount::from_units(u)))
            .collect();
        WeightVector::new(entries).expect("u64 unit weights cannot overflow")
    }

    pub fn entries(&self) -> &[(String, TokenAmount)] {
        &self.entries
    }

    pub fn total(&self) -> TokenAmount {
        self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: u128) -> Result<Self, MetricError> {
        let entries = self
            .entries
            .iter()
            .map(|(o, w)| Ok((o.clone(), w.checked_mul_int(factor)?)))
            .collect::<Result<Vec<_>, MetricError>>()?;
        WeightVector::new(entries)
    }

    /// Entries sorted by weight descending, ties by owner id ascending.
    pub fn ranked(&self) -> Vec<(&str, TokenAmount)> {
        let mut v: Vec<_> = self.entries.iter().map(|(o, w)| (o.as_str(), *w)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    fn require_positive(&self) -> Result<(), MetricError> {
        if self.entries.is_empty() {
            return Err(MetricError::EmptyWeights);
        }
        if self.total.is_zero() {
            return Err(MetricError::ZeroTotal);
        }
        Ok(())
    }
}

/// Population Gini coefficient: `Σᵢ Σⱼ |xᵢ − xⱼ| / (2 n Σ x)`.
///
/// Evaluated through the sorted form `(2 Σ i·x₍ᵢ₎ − (n+1) Σ x) / (n Σ x)` in
/// exact integer arithmetic, so the only rounding is the final division.
pub fn gini(weights: &WeightVector) -> Result<f64, MetricError> {
    weights.require_positive()?;
    let mut xs: Vec<u128> = weights.entries.iter().map(|(_, w)| w.atoms()).collect();
    xs.sort_unstable();
    let n = xs.len() as u128;
    let total = weights.total.atoms();

    let exact = || -> Option<f64> {
        let mut weighted: u128 = 0;
        for (i, &x) in xs.iter().enumerate() {
            weighted = weighted.checked_add((i as u128 + 1).checked_mul(x)?)?;
        }
        let num = weighted.checked_mul(2)?.checked_sub((n + 1).checked_mul(total)?)?;
        let den = n.checked_mul(total)?;
        Some(ratio(num, den))
    };
    if let Some(g) = exact() {
        return Ok(g);
    }

    // Overflow fallback: same formula on weights normalized by the total.
    let t = total as f64;
    let weighted: f64 = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (i as f64 + 1.0) * (x as f64 / t))
        .sum();
    let n = n as f64;
    Ok(((2.0 * weighted - (n + 1.0)) / n).max(0.0))
}

/// Control threshold as an exact fraction of the total, in parts per billion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    ppb: u128,
}

const PPB: u128 = 1_000_000_000;

impl Threshold {
    pub fn new(fraction: f64) -> Result<Self, MetricError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(MetricError::InvalidThreshold(fraction));
        }
        let ppb = (fraction * PPB as f64).round() as u128;
        if ppb == 0 {
            return Err(MetricError::InvalidThreshold(fraction));
        }
        Ok(Threshold { ppb })
    }

    pub fn fraction(self) -> f64 {
        self.ppb as f64 / PPB as f64
    }

    /// Does `part` cross this threshold of `total`? Exact for every u128
    /// input: `total * ppb` is written as `a * PPB + rem` with `rem < PPB`.
    fn crossed(self, part: u128, total: u128, strict: bool) -> bool {
        let (q, r) = (total / PPB, total % PPB);
        let a = q * self.ppb + r * self.ppb / PPB;
        let rem = r * self.ppb % PPB;
        match part.cmp(&a) {
            Ordering::Greater => true,
            Ordering::Equal => rem == 0 && !strict,
            Ordering::Less => false,
        }
    }
}

/// Smallest number of owners whose combined weight is above (`strict`) or
/// at least (`!strict`) `threshold` of the total.
pub fn nakamoto(weights: &WeightVector, threshold: f64, strict: bool) -> Result<usize, MetricError> {
    weights.require_positive()?;
    let threshold = Threshold::new(threshold)?;
    let total = weights.total.atoms();
    let mut cum: u128 = 0;
    for (k, (_, w)) in weights.ranked().into_iter().enumerate() {
        cum += w.atoms();
        if threshold.crossed(cum, total, strict) {
            return Ok(k + 1);
        }
    }
    Err(MetricError::ThresholdUnreachable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "amount", rename_all = "snake_case")]
pub enum Opposition {
    None,
    Fixed(TokenAmount),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "count", rename_all = "snake_case")]
pub enum GovernanceNakamoto {
    Reachable(usize),
    /// All VIAs together cannot carry a proposal.
    Unreachable,
}

impl GovernanceNakamoto {
    pub fn count(self) -> Option<usize> {
        match self {
            GovernanceNakamoto::Reachable(k) => Some(k),
            GovernanceNakamoto::Unreachable => None,
        }
    }
}

/// Smallest number of VIAs whose combined effective voting power meets the
/// quorum and strictly exceeds the assumed opposition.
pub fn governance_nakamoto(
    via_powers: &WeightVector,
    quorum: TokenAmount,
    opposition: Opposition,
) -> GovernanceNakamoto {
    let opposition = match opposition {
        Opposition::None => None,
        Opposition::Fixed(a) => Some(a),
    };
    let carries = |cum: TokenAmount| cum >= quorum && opposition.is_none_or(|o| cum > o);
    let mut cum = TokenAmount::ZERO;
    if carries(cum) {
        return GovernanceNakamoto::Reachable(0);
    }
    for (k, (_, w)) in via_powers.ranked().into_iter().enumerate() {
        // The total of a WeightVector is known not to overflow.
        cum = cum.checked_add(w).expect("bounded by vector total");
        if carries(cum) {
            return GovernanceNakamoto::Reachable(k + 1);
        }
    }
    GovernanceNakamoto::Unreachable
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct O(n²) definition.
    fn gini_double_sum(units: &[u64]) -> f64 {
        let n = units.len() as f64;
        let total: f64 = units.iter().map(|&u| u as f64).sum();
        let mut diff = 0.0;
        for &a in units {
            for &b in units {
                diff += (a as f64 - b as f64).abs();
            }
        }
        diff / (2.0 * n * total)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&WeightVector::from_units(&[10, 10, 10, 10])).unwrap(), 0.0);
        assert_eq!(gini_double_sum(&[1, 0, 0, 0]), 0.75);
        assert_eq!(gini(&WeightVector::from_units(&[1, 0, 0, 0])).unwrap(), 0.75);
        assert_eq!(gini_double_sum(&[3, 1]), 0.25);
        assert_eq!(gini(&WeightVector::from_units(&[3, 1])).unwrap(), 0.25);
        assert_eq!(gini(&WeightVector::from_units(&[7])).unwrap(), 0.0);
    }

    #[test]
    fn gini_errors() {
        assert_eq!(gini(&WeightVector::from_units(&[])), Err(MetricError::EmptyWeights));
        assert_eq!(gini(&WeightVector::from_units(&[0, 0])), Err(MetricError::ZeroTotal));
    }

    #[test]
    fn gini_zero_holder_follows_definition() {
        let before = gini(&WeightVector::from_units(&[5, 3, 2])).unwrap();
        let after = gini(&WeightVector::from_units(&[5, 3, 2, 0])).unwrap();
        assert!((before - gini_double_sum(&[5, 3, 2])).abs() < 1e-15);
        assert!((after - gini_double_sum(&[5, 3, 2, 0])).abs() < 1e-15);
        assert!(after > before);
    }

    #[test]
    fn nakamoto_examples() {
        let n = |w: &[u64], t| nakamoto(&WeightVector::from_units(w), t, true).unwrap();
        assert_eq!(n(&[60, 40], 0.5), 1);
        assert_eq!(n(&[25, 25, 25, 25], 0.5), 3);
        assert_eq!(n(&[40, 30, 20, 10], 0.5), 2);
        assert_eq!(n(&[9], 0.5), 1);
        assert_eq!(nakamoto(&WeightVector::from_units(&[25, 25, 25, 25]), 0.5, false).unwrap(), 2);
    }

    #[test]
    fn nakamoto_errors() {
        let w = WeightVector::from_units(&[1, 1]);
        assert_eq!(nakamoto(&w, 0.0, true), Err(MetricError::InvalidThreshold(0.0)));
        assert_eq!(nakamoto(&w, 1.5, true), Err(MetricError::InvalidThreshold(1.5)));
        assert_eq!(nakamoto(&w, 1.0, true), Err(MetricError::ThresholdUnreachable));
        assert_eq!(nakamoto(&w, 1.0, false), Ok(2));
        assert_eq!(nakamoto(&WeightVector::from_units(&[]), 0.5, true), Err(MetricError::EmptyWeights));
    }

    #[test]
    fn threshold_exact_near_u128_limit() {
        let t = Threshold::new(0.5).unwrap();
        let total = u128::MAX - 1;
        assert!(!t.crossed(total / 2, total, true));
        assert!(t.crossed(total / 2, total, false));
        assert!(t.crossed(total / 2 + 1, total, true));
        let big = WeightVector::new(vec![
            ("a".into(), TokenAmount::from_atoms(u128::MAX / 4)),
            ("b".into(), TokenAmount::from_atoms(u128::MAX / 4)),
        ])
        .unwrap();
        assert_eq!(nakamoto(&big, 0.5, true), Ok(2));
        assert_eq!(nakamoto(&big, 0.5, false), Ok(1));
    }

    #[test]
    fn nakamoto_ignores_zero_holders() {
        let a = nakamoto(&WeightVector::from_units(&[40, 30, 20, 10]), 0.5, true).unwrap();
        let b = nakamoto(&WeightVector::from_units(&[40, 30, 20, 10, 0, 0]), 0.5, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn governance_nakamoto_examples() {
        let q = TokenAmount::from_units(400_000);
        let w = WeightVector::from_units(&[300_000, 150_000, 50_000]);
        assert_eq!(governance_nakamoto(&w, q, Opposition::None), GovernanceNakamoto::Reachable(2));
        let single = WeightVector::from_units(&[400_000]);
        assert_eq!(governance_nakamoto(&single, q, Opposition::None), GovernanceNakamoto::Reachable(1));
        let short = WeightVector::from_units(&[100_000, 200_000]);
        assert_eq!(governance_nakamoto(&short, q, Opposition::None), GovernanceNakamoto::Unreachable);
        // Opposition of 450k needs strictly more than 450k in favour.
        let opp = Opposition::Fixed(TokenAmount::from_units(450_000));
        assert_eq!(governance_nakamoto(&w, q, opp), GovernanceNakamoto::Reachable(3));
        let opp = Opposition::Fixed(TokenAmount::from_units(500_000));
        assert_eq!(governance_nakamoto(&w, q, opp), GovernanceNakamoto::Unreachable);
    }

    fn rank(g: GovernanceNakamoto) -> usize {
        g.count().unwrap_or(usize::MAX)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn scale_invariance(units in prop::collection::vec(0u64..1_000_000, 1..60), c in 1u128..10_000, t in 1u32..=100, strict in any::<bool>()) {
            prop_assume!(units.iter().any(|&u| u > 0));
            let w = WeightVector::from_units(&units);
            let s = w.scaled(c).unwrap();
            let g0 = gini(&w).unwrap();
            let g1 = gini(&s).unwrap();
            prop_assert!((g0 - g1).abs() < 1e-12);
            let t = t as f64 / 100.0;
            prop_assert_eq!(nakamoto(&w, t, strict), nakamoto(&s, t, strict));
        }

        #[test]
        fn governance_nakamoto_monotone_in_power(units in prop::collection::vec(0u64..500, 1..20), idx in any::<prop::sample::Index>(), bump in 1u64..500, quorum in 1u64..3000) {
            let w = WeightVector::from_units(&units);
            let mut raised = units.clone();
            let i = idx.index(raised.len());
            raised[i] += bump;
            let q = TokenAmount::from_units(quorum);
            let before = governance_nakamoto(&w, q, Opposition::None);
            let after = governance_nakamoto(&WeightVector::from_units(&raised), q, Opposition::None);
            prop_assert!(rank(after) <= rank(before));
        }
    }
}
