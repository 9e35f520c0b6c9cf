//! Phoneme universe: symbols, ids, phonological features and the lexicon.
//!
//! Phonemes are stress-free ARPAbet symbols. Every inventory reserves one extra
//! index, `N`, for the CTC blank so that probability rows have a fixed width
//! of `N + 1`.

mod features;
mod lexicon;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use features::{
    ConsonantType, FeatureTable, LipRounding, PhonemeFeatures, Place, VowelFrontness,
    VowelHeight, VowelLength, Voicing, DEFAULT_FEATURE_TABLE, FEATURE_NAMES,
};
pub use lexicon::{parse_lexicon, strip_stress, Lexicon};

/// Index of a phoneme in a [`PhonemeInventory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhonemeId(pub u16);

impl PhonemeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PhonemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Ordered, closed set of phoneme symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhonemeInventory {
    symbols: Vec<String>,
    index: HashMap<String, PhonemeId>,
}

impl PhonemeInventory {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for sym in symbols {
            let sym: String = sym.into();
            if !is_valid_symbol(&sym) {
                return Err(Error::InvalidArgument(format!(
                    "phoneme symbol `{sym}` must be nonempty uppercase alphanumeric"
                )));
            }
            if out.len() >= u16::MAX as usize {
                return Err(Error::InvalidArgument("inventory too large".into()));
            }
            let id = PhonemeId(out.len() as u16);
            if index.insert(sym.clone(), id).is_some() {
                return Err(Error::DuplicatePhoneme(sym));
            }
            out.push(sym);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("inventory is empty".into()));
        }
        Ok(Self { symbols: out, index })
    }

    /// The built-in 39-phoneme ARPAbet inventory.
    pub fn arpabet() -> Self {
        FeatureTable::default_table().inventory().clone()
    }

    /// Number of real phonemes, `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Column index of the CTC blank. Always equal to [`len`](Self::len).
    #[inline]
    pub fn blank_id(&self) -> usize {
        self.symbols.len()
    }

    /// Probability row width including the blank.
    #[inline]
    pub fn width(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn id(&self, symbol: &str) -> Option<PhonemeId> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: PhonemeId) -> &str {
        &self.symbols[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = PhonemeId> + '_ {
        (0..self.symbols.len()).map(|i| PhonemeId(i as u16))
    }

    /// Looks up a sequence of symbols. Stress digits are not stripped here.
    pub fn parse_seq<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Vec<PhonemeId>> {
        symbols
            .iter()
            .map(|s| {
                let s = s.as_ref();
                self.id(s).ok_or_else(|| Error::UnknownPhoneme(s.to_string()))
            })
            .collect()
    }

    /// Parses a whitespace separated symbol string such as `"TH IH NG K"`.
    pub fn parse_str(&self, text: &str) -> Result<Vec<PhonemeId>> {
        let toks: Vec<&str> = text.split_whitespace().collect();
        self.parse_seq(&toks)
    }

    pub fn render(&self, seq: &[PhonemeId]) -> Vec<String> {
        seq.iter().map(|&p| self.symbol(p).to_string()).collect()
    }
}

fn is_valid_symbol(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
}

/// Loads the inventory and its feature table, either from a TSV file's
/// contents or from the built-in default.
pub fn load_inventory(source: Option<&str>) -> Result<(PhonemeInventory, FeatureTable)> {
    let table = match source {
        Some(text) => FeatureTable::parse_tsv(text)?,
        None => FeatureTable::default_table().clone(),
    };
    Ok((table.inventory().clone(), table))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_inventory_has_39_phonemes() {
        let (inv, table) = load_inventory(None).unwrap();
        assert_eq!(inv.len(), 39);
        assert_eq!(inv.blank_id(), 39);
        assert_eq!(inv.width(), 40);
        assert!(table.features(inv.id("AA").unwrap()).is_vowel);
        assert!(!table.features(inv.id("TH").unwrap()).is_vowel);
    }

    #[test]
    fn default_inventory_matches_standard_arpabet() {
        // 15 vowels + 24 consonants of the stress-free CMU set.
        let expected = [
            "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH",
            "UW", "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N", "NG", "P", "R",
            "S", "SH", "T", "TH", "V", "W", "Y", "Z", "ZH",
        ];
        let inv = PhonemeInventory::arpabet();
        let mut got: Vec<&str> = inv.symbols().iter().map(String::as_str).collect();
        let mut want = expected.to_vec();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn rejects_bad_symbols() {
        assert!(matches!(
            PhonemeInventory::new(["AA", "AA"]),
            Err(Error::DuplicatePhoneme(s)) if s == "AA"
        ));
        assert!(PhonemeInventory::new(["aa"]).is_err());
        assert!(PhonemeInventory::new([""]).is_err());
        assert!(PhonemeInventory::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn parse_and_render() {
        let inv = PhonemeInventory::arpabet();
        let seq = inv.parse_str("TH IH NG K").unwrap();
        assert_eq!(inv.render(&seq), ["TH", "IH", "NG", "K"]);
        assert!(matches!(inv.parse_str("TH XX"), Err(Error::UnknownPhoneme(s)) if s == "XX"));
    }
}
