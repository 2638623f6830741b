use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The six logical-indicator categories.
///
/// Integer codes are part of the output record format and never change:
/// PMI=0, CLI=1, NTI=2, ATI=3, CNI=4, LUI=5. The first five are backed by
/// lexicon phrases; LUI marks a randomly chosen logic-unrelated token and is
/// only ever produced by the masker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum IndicatorCategory {
    /// Premise indicator.
    Pmi = 0,
    /// Conclusion indicator.
    Cli = 1,
    /// Negative indicator.
    Nti = 2,
    /// Adversative indicator.
    Ati = 3,
    /// Coordinating indicator.
    Cni = 4,
    /// Logic-unrelated token.
    Lui = 5,
}

impl IndicatorCategory {
    pub const ALL: [IndicatorCategory; 6] = [
        IndicatorCategory::Pmi,
        IndicatorCategory::Cli,
        IndicatorCategory::Nti,
        IndicatorCategory::Ati,
        IndicatorCategory::Cni,
        IndicatorCategory::Lui,
    ];

    /// Categories that have phrase libraries.
    pub const LEXICAL: [IndicatorCategory; 5] = [
        IndicatorCategory::Pmi,
        IndicatorCategory::Cli,
        IndicatorCategory::Nti,
        IndicatorCategory::Ati,
        IndicatorCategory::Cni,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(usize::from(code)).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            IndicatorCategory::Pmi => "PMI",
            IndicatorCategory::Cli => "CLI",
            IndicatorCategory::Nti => "NTI",
            IndicatorCategory::Ati => "ATI",
            IndicatorCategory::Cni => "CNI",
            IndicatorCategory::Lui => "LUI",
        }
    }

    pub fn is_lexical(self) -> bool {
        self != IndicatorCategory::Lui
    }
}

impl fmt::Display for IndicatorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown indicator category `{0}` (expected one of PMI, CLI, NTI, ATI, CNI, LUI)")]
pub struct UnknownCategory(pub String);

impl FromStr for IndicatorCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

impl From<IndicatorCategory> for u8 {
    fn from(c: IndicatorCategory) -> u8 {
        c.code()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("category code {0} is outside 0..=5")]
pub struct InvalidCode(pub u8);

impl TryFrom<u8> for IndicatorCategory {
    type Error = InvalidCode;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        Self::from_code(code).ok_or(InvalidCode(code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_fixed() {
        let codes: Vec<u8> = IndicatorCategory::ALL.iter().map(|c| c.code()).collect();
        assert_eq!(codes, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(IndicatorCategory::Lui.code(), 5);
        assert_eq!(IndicatorCategory::from_code(6), None);
    }

    #[test]
    fn names_round_trip() {
        for c in IndicatorCategory::ALL {
            assert_eq!(c.name().parse::<IndicatorCategory>().unwrap(), c);
            assert_eq!(c.name().to_lowercase().parse::<IndicatorCategory>().unwrap(), c);
        }
        assert!("XYZ".parse::<IndicatorCategory>().is_err());
    }
}
