use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// Number of fractional decimal digits carried by every [`TokenAmount`].
pub const DECIMALS: u32 = 18;

const SCALE: u128 = 1_000_000_000_000_000_000;

/// Non-negative fixed-point quantity of governance-token units.
///
/// Stored as an integer count of 10^-18 units. All arithmetic is checked;
/// nothing here rounds implicitly. The textual form is canonical: no sign, no
/// exponent, no trailing fractional zeros, and no decimal point for whole
/// amounts, so `parse(render(x)) == x` and `render(parse(s)) == s` for any
/// canonical `s`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenAmount(u128);

impl TokenAmount {
    pub const ZERO: TokenAmount = TokenAmount(0);

    pub const fn from_atoms(atoms: u128) -> Self {
        TokenAmount(atoms)
    }

    pub const fn atoms(self) -> u128 {
        self.0
    }

    pub fn from_units(units: u64) -> Self {
        // u64::MAX * 10^18 < u128::MAX, so this never overflows.
        TokenAmount(units as u128 * SCALE)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self, ModelError> {
        self.0
            .checked_add(rhs.0)
            .map(TokenAmount)
            .ok_or(ModelError::AmountOverflow)
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self, ModelError> {
        self.0
            .checked_sub(rhs.0)
            .map(TokenAmount)
            .ok_or(ModelError::AmountUnderflow)
    }

    pub fn checked_mul_int(self, factor: u128) -> Result<Self, ModelError> {
        self.0
            .checked_mul(factor)
            .map(TokenAmount)
            .ok_or(ModelError::AmountOverflow)
    }

    /// Splits into `parts` shares that sum exactly to `self`.
    ///
    /// Every share is `floor(self / parts)`; the leftover atoms (fewer than
    /// `parts`) go to the first share.
    pub fn split_exact(self, parts: u32) -> Result<Vec<Self>, ModelError> {
        if parts == 0 {
            return Err(ModelError::ZeroDivisor);
        }
        let parts = parts as u128;
        let share = self.0 / parts;
        let rem = self.0 % parts;
        let mut out = vec![TokenAmount(share); parts as usize];
        out[0] = TokenAmount(share + rem);
        Ok(out)
    }

    /// Integer division truncated at atom resolution (10^-18 units).
    pub fn div_floor(self, divisor: u64) -> Result<Self, ModelError> {
        if divisor == 0 {
            return Err(ModelError::ZeroDivisor);
        }
        Ok(TokenAmount(self.0 / divisor as u128))
    }

    pub fn checked_sum<I: IntoIterator<Item = TokenAmount>>(iter: I) -> Result<Self, ModelError> {
        iter.into_iter()
            .try_fold(TokenAmount::ZERO, |acc, x| acc.checked_add(x))
    }

    /// Lossy conversion used only for ratios and reporting.
    pub fn to_f64(self) -> f64 {
        let whole = (self.0 / SCALE) as f64;
        let frac = (self.0 % SCALE) as f64 / SCALE as f64;
        whole + frac
    }

    /// `self / denom * 100`, or `None` when `denom` is zero.
    pub fn percent_of(self, denom: TokenAmount) -> Option<f64> {
        if denom.is_zero() {
            return None;
        }
        Some(ratio(self.0, denom.0) * 100.0)
    }
}

/// `num / den` for two u128 values with a single rounding step where possible.
pub(crate) fn ratio(num: u128, den: u128) -> f64 {
    let q = num / den;
    let r = num % den;
    q as f64 + r as f64 / den as f64
}

impl Sum for TokenAmount {
    /// Panics on overflow; use [`TokenAmount::checked_sum`] on untrusted input.
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        TokenAmount::checked_sum(iter).expect("token amount sum overflow")
    }
}

impl fmt::Display for TokenAmount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let whole = self.0 / SCALE;
        let frac = self.0 % SCALE;
        if frac == 0 {
            write!(f, "{whole}")
        } else {
            let digits = format!("{frac:018}");
            write!(f, "{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl FromStr for TokenAmount {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidAmount(s.to_string());
        if s.starts_with('-') {
            return Err(ModelError::NegativeAmount(s.to_string()));
        }
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, Some(f)),
            None => (s, None),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: u128 = whole.parse().map_err(|_| ModelError::AmountOverflow)?;
        let mut atoms = whole.checked_mul(SCALE).ok_or(ModelError::AmountOverflow)?;
        if let Some(frac) = frac {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            if frac.len() > DECIMALS as usize {
                return Err(ModelError::PrecisionLoss(s.to_string()));
            }
            let padded = format!("{frac:0<18}");
            let frac: u128 = padded.parse().map_err(|_| bad())?;
            atoms = atoms.checked_add(frac).ok_or(ModelError::AmountOverflow)?;
        }
        Ok(TokenAmount(atoms))
    }
}

impl Serialize for TokenAmount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TokenAmount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_renders_canonically() {
        let a: TokenAmount = "2396307".parse().unwrap();
        assert_eq!(a, TokenAmount::from_units(2_396_307));
        assert_eq!(a.to_string(), "2396307");
        let b: TokenAmount = "0.000000000000000001".parse().unwrap();
        assert_eq!(b.atoms(), 1);
        assert_eq!(b.to_string(), "0.000000000000000001");
        assert_eq!("12.50".parse::<TokenAmount>().unwrap().to_string(), "12.5");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            "-5".parse::<TokenAmount>(),
            Err(ModelError::NegativeAmount(_))
        ));
        assert!(matches!(
            "1.0000000000000000001".parse::<TokenAmount>(),
            Err(ModelError::PrecisionLoss(_))
        ));
        for s in ["", ".", "1.", ".5", "1e5", "+1", "1,5", " 1", "0x10"] {
            assert!(s.parse::<TokenAmount>().is_err(), "{s:?} should fail");
        }
        assert!(matches!(
            "999999999999999999999999".parse::<TokenAmount>(),
            Err(ModelError::AmountOverflow)
        ));
    }

    #[test]
    fn checked_arithmetic() {
        let max = TokenAmount::from_atoms(u128::MAX);
        assert!(max.checked_add(TokenAmount::from_atoms(1)).is_err());
        assert!(TokenAmount::ZERO.checked_sub(TokenAmount::from_atoms(1)).is_err());
        let parts = TokenAmount::from_atoms(10).split_exact(3).unwrap();
        assert_eq!(parts, vec![4, 3, 3].into_iter().map(TokenAmount::from_atoms).collect::<Vec<_>>());
    }

    #[test]
    fn percent_of_exact_quotient() {
        let active = TokenAmount::from_units(600_000);
        let circ = TokenAmount::from_units(7_150_000);
        let pct = active.percent_of(circ).unwrap();
        assert!((pct - 8.391608391608392).abs() < 1e-12);
        assert_eq!(active.percent_of(TokenAmount::ZERO), None);
    }

    proptest! {
        #[test]
        fn render_parse_roundtrip(atoms in any::<u128>()) {
            let a = TokenAmount::from_atoms(atoms);
            let s = a.to_string();
            prop_assert_eq!(s.parse::<TokenAmount>().unwrap(), a);
        }

        #[test]
        fn split_sums_back(atoms in 0u128..u128::MAX / 2, parts in 1u32..50) {
            let a = TokenAmount::from_atoms(atoms);
            let shares = a.split_exact(parts).unwrap();
            prop_assert_eq!(shares.len(), parts as usize);
            prop_assert_eq!(TokenAmount::checked_sum(shares).unwrap(), a);
        }
    }
}
