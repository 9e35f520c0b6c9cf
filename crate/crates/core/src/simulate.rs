//! Text-level mispronunciation simulation.
//!
//! Words are looked up in a lexicon and common phoneme substitutions are
//! injected into their pronunciations, producing (reference, modified) pairs
//! with an exact edit list. Substitution pairs are bidirectional.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::inventory::{FeatureTable, Lexicon, PhonemeId, PhonemeInventory};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairClass {
    Vowel,
    Consonant,
}

impl PairClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::Vowel => "vowel",
            PairClass::Consonant => "consonant",
        }
    }
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vowel" => Ok(PairClass::Vowel),
            "consonant" => Ok(PairClass::Consonant),
            _ => Err(Error::InvalidArgument(format!("unknown pair class `{s}`"))),
        }
    }
}

/// Common CMU substitution pairs: 9 vowel pairs and 12 consonant pairs.
pub const COMMON_PAIRS: [(&str, &str, PairClass); 21] = [
    ("AA", "IY", PairClass::Vowel),
    ("AE", "UW", PairClass::Vowel),
    ("AA", "IH", PairClass::Vowel),
    ("OW", "EH", PairClass::Vowel),
    ("AO", "EH", PairClass::Vowel),
    ("UH", "ER", PairClass::Vowel),
    ("AH", "IY", PairClass::Vowel),
    ("ER", "OW", PairClass::Vowel),
    ("AH", "AE", PairClass::Vowel),
    ("P", "G", PairClass::Consonant),
    ("T", "ZH", PairClass::Consonant),
    ("K", "B", PairClass::Consonant),
    ("M", "S", PairClass::Consonant),
    ("N", "SH", PairClass::Consonant),
    ("NG", "F", PairClass::Consonant),
    ("L", "T", PairClass::Consonant),
    ("R", "D", PairClass::Consonant),
    ("W", "K", PairClass::Consonant),
    ("TH", "V", PairClass::Consonant),
    ("DH", "Z", PairClass::Consonant),
    ("SH", "HH", PairClass::Consonant),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubstitutionPair {
    pub a: PhonemeId,
    pub b: PhonemeId,
    pub class: PairClass,
}

impl SubstitutionPair {
    pub fn new(a: &str, b: &str, class: PairClass, table: &FeatureTable) -> Result<Self> {
        let inv = table.inventory();
        let lookup = |s: &str| inv.id(s).ok_or_else(|| Error::UnknownPhoneme(s.to_string()));
        let (ia, ib) = (lookup(a)?, lookup(b)?);
        if ia == ib {
            return Err(Error::InvalidArgument(format!("pair ({a}, {b}) substitutes a phoneme for itself")));
        }
        let want_vowel = class == PairClass::Vowel;
        if table.features(ia).is_vowel != want_vowel || table.features(ib).is_vowel != want_vowel {
            return Err(Error::InvalidArgument(format!("pair ({a}, {b}) is not a {class} pair")));
        }
        Ok(Self { a: ia, b: ib, class })
    }

    /// True if `{from, to}` is this pair in either order.
    pub fn covers(&self, from: PhonemeId, to: PhonemeId) -> bool {
        (self.a == from && self.b == to) || (self.a == to && self.b == from)
    }
}

pub fn default_pairs(table: &FeatureTable) -> Result<Vec<SubstitutionPair>> {
    COMMON_PAIRS.iter().map(|&(a, b, c)| SubstitutionPair::new(a, b, c, table)).collect()
}

/// Reads a pair set: TSV with header `a\tb\tclass`.
pub fn parse_pairs_tsv(text: &str, table: &FeatureTable) -> Result<Vec<SubstitutionPair>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h.split('\t').map(str::trim).eq(["a", "b", "class"]) => {}
        Some((line, _)) => return Err(Error::Parse { line, msg: "header must be `a\\tb\\tclass`".into() }),
        None => return Err(Error::InvalidArgument("pair file is empty".into())),
    }
    let mut pairs: Vec<SubstitutionPair> = Vec::new();
    for (line, row) in lines {
        let f: Vec<&str> = row.split('\t').map(str::trim).collect();
        if f.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 columns, found {}", f.len()) });
        }
        let pair = SubstitutionPair::new(f[0], f[1], f[2].parse()?, table)?;
        if pairs.iter().any(|p| p.covers(pair.a, pair.b)) {
            return Err(Error::Parse { line, msg: format!("pair ({}, {}) listed twice", f[0], f[1]) });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn pairs_to_tsv(pairs: &[SubstitutionPair], inv: &PhonemeInventory) -> String {
    let mut out = String::from("a\tb\tclass\n");
    for p in pairs {
        out.push_str(&format!("{}\t{}\t{}\n", inv.symbol(p.a), inv.symbol(p.b), p.class));
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    Vowel,
    Consonant,
    #[default]
    All,
}

impl Mode {
    fn admits(self, class: PairClass) -> bool {
        match self {
            Mode::All => true,
            Mode::Vowel => class == PairClass::Vowel,
            Mode::Consonant => class == PairClass::Consonant,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vowel" => Ok(Mode::Vowel),
            "consonant" => Ok(Mode::Consonant),
            "all" => Ok(Mode::All),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Policy {
    pub mode: Mode,
    /// `None` means no limit.
    pub max_subs: Option<usize>,
    /// Per-position substitution probability.
    pub rate: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Self { mode: Mode::All, max_subs: Some(1), rate: 1.0 }
    }
}

impl Policy {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rate) {
            return Err(Error::InvalidArgument(format!("rate {} is not a probability", self.rate)));
        }
        if self.max_subs == Some(0) {
            return Err(Error::InvalidArgument("max_subs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edit {
    pub position: usize,
    pub from: PhonemeId,
    pub to: PhonemeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimRecord {
    pub word: String,
    pub reference: Vec<PhonemeId>,
    pub modified: Vec<PhonemeId>,
    pub edits: Vec<Edit>,
    pub seed: u64,
}

/// Applies `edits` to `seq`; `None` if an edit's `from` does not match.
pub fn apply_edits(seq: &[PhonemeId], edits: &[Edit]) -> Option<Vec<PhonemeId>> {
    let mut out = seq.to_vec();
    for e in edits {
        let slot = out.get_mut(e.position)?;
        if *slot != e.from {
            return None;
        }
        *slot = e.to;
    }
    Some(out)
}

/// Undoes `edits` on a modified sequence.
pub fn revert_edits(seq: &[PhonemeId], edits: &[Edit]) -> Option<Vec<PhonemeId>> {
    let inverse: Vec<Edit> = edits.iter().map(|e| Edit { position: e.position, from: e.to, to: e.from }).collect();
    apply_edits(seq, &inverse)
}

/// Substitutes phonemes of one pronunciation. Every position with a partner
/// under `policy.mode` is drawn independently with probability `rate`; if more
/// than `max_subs` are drawn a seeded shuffle picks which survive. The
/// replacement is uniform among the phoneme's partners.
pub fn inject(
    word: &str,
    pron: &[PhonemeId],
    pairs: &[SubstitutionPair],
    policy: &Policy,
    seed: u64,
) -> Result<SimRecord> {
    if pron.is_empty() {
        return Err(Error::EmptyPronunciation);
    }
    policy.validate()?;
    let partners = partner_map(pairs, policy.mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen: Vec<usize> = Vec::new();
    for (pos, p) in pron.iter().enumerate() {
        if partners.contains_key(p) && rng.random_bool(policy.rate) {
            chosen.push(pos);
        }
    }
    if let Some(max) = policy.max_subs {
        if chosen.len() > max {
            chosen.shuffle(&mut rng);
            chosen.truncate(max);
            chosen.sort_unstable();
        }
    }

    let mut modified = pron.to_vec();
    let mut edits = Vec::with_capacity(chosen.len());
    for pos in chosen {
        let from = pron[pos];
        let options = &partners[&from];
        let to = options[rng.random_range(0..options.len())];
        modified[pos] = to;
        edits.push(Edit { position: pos, from, to });
    }
    Ok(SimRecord { word: word.to_string(), reference: pron.to_vec(), modified, edits, seed })
}

fn partner_map(pairs: &[SubstitutionPair], mode: Mode) -> HashMap<PhonemeId, Vec<PhonemeId>> {
    let mut map: HashMap<PhonemeId, Vec<PhonemeId>> = HashMap::new();
    for p in pairs.iter().filter(|p| mode.admits(p.class)) {
        map.entry(p.a).or_default().push(p.b);
        map.entry(p.b).or_default().push(p.a);
    }
    map
}

/// Per-record seed from the corpus seed and the word occurrence index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub records: usize,
    /// Words missing from the lexicon.
    pub skipped: usize,
    pub edits: usize,
    /// Edit counts aligned with the configured pair list.
    pub pair_counts: Vec<usize>,
}

impl CorpusStats {
    pub fn to_tsv(&self, pairs: &[SubstitutionPair], inv: &PhonemeInventory) -> String {
        let mut out = String::from("pair\tcount\n");
        for (p, c) in pairs.iter().zip(&self.pair_counts) {
            out.push_str(&format!("{}-{}\t{c}\n", inv.symbol(p.a), inv.symbol(p.b)));
        }
        out
    }
}

/// Streams records for successive word occurrences, keeping running stats.
pub struct CorpusSimulator<'a> {
    lexicon: &'a Lexicon,
    pairs: &'a [SubstitutionPair],
    policy: Policy,
    seed: u64,
    index: u64,
    stats: CorpusStats,
}

impl<'a> CorpusSimulator<'a> {
    pub fn new(lexicon: &'a Lexicon, pairs: &'a [SubstitutionPair], policy: Policy, seed: u64) -> Result<Self> {
        policy.validate()?;
        let stats = CorpusStats { pair_counts: vec![0; pairs.len()], ..Default::default() };
        Ok(Self { lexicon, pairs, policy, seed, index: 0, stats })
    }

    /// Simulates the next occurrence of `word`; `None` if it is not in the
    /// lexicon.
    pub fn next_word(&mut self, word: &str) -> Result<Option<SimRecord>> {
        let index = self.index;
        self.index += 1;
        let Some(pron) = self.lexicon.primary(word) else {
            self.stats.skipped += 1;
            return Ok(None);
        };
        let rec = inject(&word.to_lowercase(), pron, self.pairs, &self.policy, derive_seed(self.seed, index))?;
        self.stats.records += 1;
        self.stats.edits += rec.edits.len();
        for e in &rec.edits {
            if let Some(k) = self.pairs.iter().position(|p| p.covers(e.from, e.to)) {
                self.stats.pair_counts[k] += 1;
            }
        }
        Ok(Some(rec))
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn into_stats(self) -> CorpusStats {
        self.stats
    }
}

/// One record per resolvable word occurrence in `words`.
pub fn generate_corpus<S: AsRef<str>>(
    words: impl IntoIterator<Item = S>,
    lexicon: &Lexicon,
    pairs: &[SubstitutionPair],
    policy: Policy,
    seed: u64,
) -> Result<(Vec<SimRecord>, CorpusStats)> {
    let mut sim = CorpusSimulator::new(lexicon, pairs, policy, seed)?;
    let mut records = Vec::new();
    let mut seen = false;
    for w in words {
        seen = true;
        if let Some(r) = sim.next_word(w.as_ref())? {
            records.push(r);
        }
    }
    if !seen {
        return Err(Error::InvalidArgument("no input words".into()));
    }
    Ok((records, sim.into_stats()))
}
