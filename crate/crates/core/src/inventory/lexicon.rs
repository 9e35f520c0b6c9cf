//! CMU Pronouncing Dictionary reader.

use std::collections::BTreeMap;
use std::io::BufRead;

use super::{PhonemeId, PhonemeInventory};
use crate::{Error, Result};

/// Word to pronunciation variants, in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: BTreeMap<String, Vec<Vec<PhonemeId>>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, pron: Vec<PhonemeId>) -> Result<()> {
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::InvalidArgument("blank word".into()));
        }
        if pron.is_empty() {
            return Err(Error::EmptyPronunciation);
        }
        self.entries.entry(word).or_default().push(pron);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[Vec<PhonemeId>]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// First listed pronunciation.
    pub fn primary(&self, word: &str) -> Option<&[PhonemeId]> {
        self.get(word).and_then(|v| v.first()).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<PhonemeId>])> {
        self.entries.iter().map(|(w, p)| (w.as_str(), p.as_slice()))
    }

    /// Writes the lexicon back in CMUdict layout, variants numbered from `(1)`.
    pub fn to_cmudict(&self, inventory: &PhonemeInventory) -> String {
        let mut out = String::new();
        for (word, prons) in &self.entries {
            for (k, pron) in prons.iter().enumerate() {
                out.push_str(&word.to_uppercase());
                if k > 0 {
                    out.push_str(&format!("({k})"));
                }
                out.push(' ');
                for p in pron {
                    out.push(' ');
                    out.push_str(inventory.symbol(*p));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Removes a trailing lexical-stress digit (`0`, `1` or `2`).
pub fn strip_stress(symbol: &str) -> &str {
    match symbol.as_bytes().last() {
        Some(b'0'..=b'2') if symbol.len() > 1 => &symbol[..symbol.len() - 1],
        _ => symbol,
    }
}

fn strip_variant(word: &str) -> &str {
    if let Some(open) = word.rfind('(') {
        let inner = &word[open + 1..];
        if inner.len() > 1 && inner.ends_with(')') && inner[..inner.len() - 1].bytes().all(|b| b.is_ascii_digit()) {
            return &word[..open];
        }
    }
    word
}

/// Parses a CMUdict stream: `WORD  PH PH PH` lines, optional `(k)` variant
/// suffixes, `;;;` comments. Stress digits are stripped before lookup.
pub fn parse_lexicon<R: BufRead>(reader: R, inventory: &PhonemeInventory) -> Result<Lexicon> {
    let mut lex = Lexicon::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let content = line.split(" #").next().unwrap_or("").trim();
        if content.is_empty() || content.starts_with(";;;") {
            continue;
        }
        let mut toks = content.split_whitespace();
        let raw_word = toks.next().unwrap_or_default();
        let word = strip_variant(raw_word);
        if word.is_empty() {
            return Err(Error::Parse { line: lineno, msg: "blank word".into() });
        }
        let pron = toks
            .map(|t| {
                let sym = strip_stress(t);
                inventory.id(sym).ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: format!("unknown phoneme `{sym}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if pron.is_empty() {
            return Err(Error::Parse { line: lineno, msg: format!("`{word}` has no phonemes") });
        }
        lex.insert(word, pron)?;
    }
    Ok(lex)
}
