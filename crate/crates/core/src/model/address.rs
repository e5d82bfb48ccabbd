use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::ModelError;

/// A 20-byte account identifier, normalized to `0x` + 40 lowercase hex digits.
///
/// Parsing accepts any letter case, so two spellings of the same account
/// compare equal after construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(String);

impl Address {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Derives a stable synthetic address from a label. Used for addresses
    /// created by scenarios and for generated fixtures.
    pub fn derived(label: &str) -> Self {
        let digest = Sha256::digest(label.as_bytes());
        Address(format!("0x{}", hex::encode(&digest[..20])))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Address {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("0x")
            .or_else(|| s.strip_prefix("0X"))
            .ok_or_else(|| ModelError::InvalidAddress(s.to_string()))?;
        if body.len() != 40 || !body.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(ModelError::InvalidAddress(s.to_string()));
        }
        Ok(Address(format!("0x{}", body.to_ascii_lowercase())))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case() {
        let a: Address = "0xABCDEF0123456789abcdef0123456789ABCDEF01".parse().unwrap();
        let b: Address = "0Xabcdef0123456789ABCDEF0123456789abcdef01".parse().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_str(), "0xabcdef0123456789abcdef0123456789abcdef01");
        assert_eq!(a.as_str().len(), 42);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "",
            "abcdef0123456789abcdef0123456789abcdef01",
            "0xabc",
            "0xabcdef0123456789abcdef0123456789abcdef0g",
            "0xabcdef0123456789abcdef0123456789abcdef0123",
        ] {
            assert!(s.parse::<Address>().is_err(), "{s:?}");
        }
    }

    #[test]
    fn derived_is_stable_and_valid() {
        let a = Address::derived("holder-1");
        assert_eq!(a, Address::derived("holder-1"));
        assert_ne!(a, Address::derived("holder-2"));
        assert_eq!(a.as_str().parse::<Address>().unwrap(), a);
    }
}
