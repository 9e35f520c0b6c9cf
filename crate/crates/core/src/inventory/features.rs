//! Phonological feature table.
//!
//! Each phoneme carries eight features: vowel/consonant class, vowel length,
//! vowel height, vowel frontness, lip rounding, consonant type, place of
//! articulation and voicing. Vowel-only features (the first four after the
//! class, lip rounding included) are `n/a` for consonants and vice versa.
//!
//! The default table ships as `data/features.tsv`. Choices worth knowing when
//! auditing it:
//!
//! - vowel length: `short` for lax monophthongs (AE AH EH IH UH), `long` for
//!   tense monophthongs and ER (AA AO ER IY UW), `diphthong` for AW AY EY OW OY.
//!   Lexical stress plays no part.
//! - diphthongs take height, frontness and rounding from their onset.
//! - ER is a rounded mid central vowel.
//! - W is a bilabial glide and R an alveolar liquid.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use super::{PhonemeId, PhonemeInventory};
use crate::{Error, Result};

pub const DEFAULT_FEATURE_TABLE: &str = include_str!("../../data/features.tsv");

/// Column names of the feature table file, in order.
pub const FEATURE_NAMES: [&str; 8] = [
    "is_vowel",
    "vowel_length",
    "vowel_height",
    "vowel_frontness",
    "lip_rounding",
    "consonant_type",
    "place",
    "voicing",
];

const NA: &str = "n/a";

macro_rules! feature_enum {
    ($name:ident, $feature:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $(Self::$variant => $text),+
                }
            }

            fn code(self) -> u8 {
                self as u8
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(Error::FeatureValue { feature: $feature, value: s.to_string() }),
                }
            }
        }
    };
}

feature_enum!(VowelLength, "vowel_length", {
    Short => "short",
    Long => "long",
    Diphthong => "diphthong",
});

feature_enum!(VowelHeight, "vowel_height", {
    High => "high",
    Mid => "mid",
    Low => "low",
});

feature_enum!(VowelFrontness, "vowel_frontness", {
    Front => "front",
    Central => "central",
    Back => "back",
});

feature_enum!(LipRounding, "lip_rounding", {
    Rounded => "rounded",
    Unrounded => "unrounded",
});

feature_enum!(ConsonantType, "consonant_type", {
    Stop => "stop",
    Fricative => "fricative",
    Affricate => "affricate",
    Nasal => "nasal",
    Liquid => "liquid",
    Glide => "glide",
});

feature_enum!(Place, "place", {
    Bilabial => "bilabial",
    Labiodental => "labiodental",
    Dental => "dental",
    Alveolar => "alveolar",
    Postalveolar => "postalveolar",
    Palatal => "palatal",
    Velar => "velar",
    Glottal => "glottal",
});

feature_enum!(Voicing, "voicing", {
    Voiced => "voiced",
    Voiceless => "voiceless",
});

/// The eight phonological features of one phoneme. `None` is `n/a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PhonemeFeatures {
    pub is_vowel: bool,
    pub vowel_length: Option<VowelLength>,
    pub vowel_height: Option<VowelHeight>,
    pub vowel_frontness: Option<VowelFrontness>,
    pub lip_rounding: Option<LipRounding>,
    pub consonant_type: Option<ConsonantType>,
    pub place: Option<Place>,
    pub voicing: Option<Voicing>,
}

impl PhonemeFeatures {
    /// Feature values in [`FEATURE_NAMES`] order as comparable codes.
    pub fn codes(&self) -> [Option<u8>; 8] {
        [
            Some(self.is_vowel as u8),
            self.vowel_length.map(VowelLength::code),
            self.vowel_height.map(VowelHeight::code),
            self.vowel_frontness.map(VowelFrontness::code),
            self.lip_rounding.map(LipRounding::code),
            self.consonant_type.map(ConsonantType::code),
            self.place.map(Place::code),
            self.voicing.map(Voicing::code),
        ]
    }

    fn validate(&self, phoneme: &str) -> Result<()> {
        let vowel_side = [
            self.vowel_length.is_some(),
            self.vowel_height.is_some(),
            self.vowel_frontness.is_some(),
            self.lip_rounding.is_some(),
        ];
        let consonant_side = [
            self.consonant_type.is_some(),
            self.place.is_some(),
            self.voicing.is_some(),
        ];
        let ok = if self.is_vowel {
            vowel_side.iter().all(|&b| b) && consonant_side.iter().all(|&b| !b)
        } else {
            vowel_side.iter().all(|&b| !b) && consonant_side.iter().all(|&b| b)
        };
        if ok {
            Ok(())
        } else {
            let class = if self.is_vowel { "vowel" } else { "consonant" };
            Err(Error::InconsistentFeatures {
                phoneme: phoneme.to_string(),
                msg: format!("a {class} must set exactly the {class} features"),
            })
        }
    }

    fn tsv_fields(&self) -> [String; 8] {
        fn opt<T: fmt::Display>(v: Option<T>) -> String {
            v.map_or_else(|| NA.to_string(), |v| v.to_string())
        }
        [
            self.is_vowel.to_string(),
            opt(self.vowel_length),
            opt(self.vowel_height),
            opt(self.vowel_frontness),
            opt(self.lip_rounding),
            opt(self.consonant_type),
            opt(self.place),
            opt(self.voicing),
        ]
    }
}

fn parse_opt<T: FromStr<Err = Error>>(s: &str) -> Result<Option<T>> {
    if s == NA {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::FeatureValue { feature: "is_vowel", value: s.to_string() }),
    }
}

/// Features for every phoneme of an inventory, indexed by [`PhonemeId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureTable {
    inventory: PhonemeInventory,
    entries: Vec<PhonemeFeatures>,
}

impl FeatureTable {
    pub fn new(entries: Vec<(String, PhonemeFeatures)>) -> Result<Self> {
        for (sym, f) in &entries {
            f.validate(sym)?;
        }
        let inventory = PhonemeInventory::new(entries.iter().map(|(s, _)| s.clone()))?;
        Ok(Self { inventory, entries: entries.into_iter().map(|(_, f)| f).collect() })
    }

    pub fn default_table() -> &'static FeatureTable {
        static TABLE: OnceLock<FeatureTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            FeatureTable::parse_tsv(DEFAULT_FEATURE_TABLE).expect("built-in feature table is valid")
        })
    }

    pub fn inventory(&self) -> &PhonemeInventory {
        &self.inventory
    }

    pub fn features(&self, id: PhonemeId) -> &PhonemeFeatures {
        &self.entries[id.index()]
    }

    pub fn get(&self, symbol: &str) -> Option<&PhonemeFeatures> {
        self.inventory.id(symbol).map(|id| self.features(id))
    }

    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));

        let (hline, header) = lines
            .next()
            .ok_or(Error::Parse { line: 1, msg: "missing header row".into() })?;
        let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
        let expected: Vec<&str> = std::iter::once("phoneme").chain(FEATURE_NAMES).collect();
        if cols != expected {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header must be `{}`", expected.join("\\t")),
            });
        }

        let mut entries: Vec<(String, PhonemeFeatures)> = Vec::new();
        for (line, row) in lines {
            let f: Vec<&str> = row.split('\t').map(str::trim).collect();
            if f.len() != 9 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 9 columns, found {}", f.len()),
                });
            }
            let sym = f[0].to_string();
            if entries.iter().any(|(s, _)| *s == sym) {
                return Err(Error::DuplicatePhoneme(sym));
            }
            let feats = PhonemeFeatures {
                is_vowel: parse_bool(f[1])?,
                vowel_length: parse_opt(f[2])?,
                vowel_height: parse_opt(f[3])?,
                vowel_frontness: parse_opt(f[4])?,
                lip_rounding: parse_opt(f[5])?,
                consonant_type: parse_opt(f[6])?,
                place: parse_opt(f[7])?,
                voicing: parse_opt(f[8])?,
            };
            entries.push((sym, feats));
        }
        Self::new(entries)
    }

    /// Parses a table that must cover exactly the phonemes of `inventory`,
    /// reordered to the inventory's ids.
    pub fn parse_tsv_for(text: &str, inventory: &PhonemeInventory) -> Result<Self> {
        let parsed = Self::parse_tsv(text)?;
        if let Some(extra) = parsed.inventory.symbols().iter().find(|s| inventory.id(s).is_none()) {
            return Err(Error::UnknownPhoneme(extra.clone()));
        }
        let mut entries = Vec::with_capacity(inventory.len());
        for sym in inventory.symbols() {
            let f = parsed.get(sym).ok_or_else(|| Error::MissingPhoneme(sym.clone()))?;
            entries.push((sym.clone(), *f));
        }
        Self::new(entries)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("phoneme");
        for name in FEATURE_NAMES {
            out.push('\t');
            out.push_str(name);
        }
        out.push('\n');
        for (sym, f) in self.inventory.symbols().iter().zip(&self.entries) {
            out.push_str(sym);
            for v in f.tsv_fields() {
                out.push('\t');
                out.push_str(&v);
            }
            out.push('\n');
        }
        out
    }
}
