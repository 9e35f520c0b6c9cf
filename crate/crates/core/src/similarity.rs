//! Phoneme similarity matrices.
//!
//! Two builders produce an `N x N` matrix `S` with unit diagonal, exact
//! symmetry and entries in `[0, 1]`:
//!
//! - [`heuristic_similarity`] compares phonological features. Each pair's
//!   score is the weight of matching features divided by the weight of the
//!   features that apply to the pair (non-`n/a` for at least one side).
//! - [`embedding_similarity`] min-max normalizes L2 distances between
//!   per-phoneme reference vectors, e.g. articulatory positions or
//!   self-supervised speech features.
//!
//! [`normalize`] divides each row by its sum to give the soft labels used by
//! the training losses.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::inventory::{FeatureTable, PhonemeId, PhonemeInventory};
use crate::{Error, Result};

/// How a [`SimilarityMatrix`] was produced. Stored in the corner cell of the
/// CSV form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Heuristic,
    Embedding,
    Identity,
    /// Loaded from a file written by another tool.
    Custom,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::Embedding => "embedding",
            Method::Identity => "identity",
            Method::Custom => "custom",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heuristic" => Ok(Method::Heuristic),
            "embedding" => Ok(Method::Embedding),
            "identity" => Ok(Method::Identity),
            "custom" | "phoneme" | "" => Ok(Method::Custom),
            _ => Err(Error::InvalidArgument(format!("unknown similarity method `{s}`"))),
        }
    }
}

/// Per-feature weights in [`FEATURE_NAMES`](crate::inventory::FEATURE_NAMES)
/// order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureWeights([f64; 8]);

impl FeatureWeights {
    pub const DEFAULT: FeatureWeights = FeatureWeights([0.2, 0.1, 0.15, 0.15, 0.1, 0.2, 0.2, 0.1]);

    pub fn new(weights: &[f64]) -> Result<Self> {
        let arr: [f64; 8] = weights.try_into().map_err(|_| {
            Error::Weights(format!("expected 8 weights, got {}", weights.len()))
        })?;
        if let Some(w) = arr.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Weights(format!("weight {w} is not a nonnegative number")));
        }
        Ok(Self(arr))
    }

    pub fn as_slice(&self) -> &[f64; 8] {
        &self.0
    }
}

impl Default for FeatureWeights {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Symmetric phoneme similarity matrix over an inventory (blank excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    inventory: PhonemeInventory,
    values: Vec<f64>,
    method: Method,
}

impl SimilarityMatrix {
    /// Validates and wraps row-major `values`.
    pub fn new(inventory: PhonemeInventory, values: Vec<f64>, method: Method) -> Result<Self> {
        let n = inventory.len();
        if values.len() != n * n {
            return Err(Error::Dimension { expected: n * n, got: values.len() });
        }
        for i in 0..n {
            if values[i * n + i] != 1.0 {
                return Err(Error::Matrix(format!(
                    "diagonal entry {} is {}, expected 1",
                    inventory.symbols()[i],
                    values[i * n + i]
                )));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Matrix(format!(
                        "entry ({}, {}) = {v} is outside [0, 1]",
                        inventory.symbols()[i],
                        inventory.symbols()[j]
                    )));
                }
                if v != values[j * n + i] {
                    return Err(Error::Matrix(format!(
                        "asymmetric at ({}, {})",
                        inventory.symbols()[i],
                        inventory.symbols()[j]
                    )));
                }
            }
        }
        Ok(Self { inventory, values, method })
    }

    pub fn identity(inventory: &PhonemeInventory) -> Self {
        let n = inventory.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Self { inventory: inventory.clone(), values, method: Method::Identity }
    }

    pub fn n(&self) -> usize {
        self.inventory.len()
    }

    pub fn inventory(&self) -> &PhonemeInventory {
        &self.inventory
    }

    pub fn method(&self) -> Method {
        self.method
    }

    #[inline]
    pub fn get(&self, a: PhonemeId, b: PhonemeId) -> f64 {
        self.values[a.index() * self.n() + b.index()]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(self.method.as_str());
        for s in self.inventory.symbols() {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (i, s) in self.inventory.symbols().iter().enumerate() {
            out.push_str(s);
            for v in self.row(i) {
                // 17 significant digits round-trip every f64
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form; the header must list `inventory` in order.
    /// Asymmetry up to 1e-12 is averaged away, anything larger is an error.
    pub fn from_csv(text: &str, inventory: &PhonemeInventory) -> Result<Self> {
        let n = inventory.len();
        let mut lines = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Matrix("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let method: Method = cols[0].parse()?;
        if cols.len() != n + 1 || cols[1..].iter().zip(inventory.symbols()).any(|(a, b)| a != b) {
            return Err(Error::Matrix("header does not match the phoneme inventory".into()));
        }
        let mut values = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (idx, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if rows >= n || cells[0] != inventory.symbols()[rows] {
                return Err(Error::Matrix(format!(
                    "line {}: row label `{}` does not match the phoneme inventory",
                    idx + 1,
                    cells[0]
                )));
            }
            if cells.len() != n + 1 {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} cells, found {}", n + 1, cells.len()),
                });
            }
            for c in &cells[1..] {
                let v: f64 = c.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("`{c}` is not a number"),
                })?;
                values.push(v);
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Matrix(format!("expected {n} rows, found {rows}")));
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::Matrix(format!(
                        "asymmetric at ({}, {}): {a} vs {b}",
                        inventory.symbols()[i],
                        inventory.symbols()[j]
                    )));
                }
                let m = if a == b { a } else { 0.5 * (a + b) };
                values[i * n + j] = m;
                values[j * n + i] = m;
            }
        }
        Self::new(inventory.clone(), values, method)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, inventory: &PhonemeInventory) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?, inventory)
    }
}

/// Feature-matching similarity over a [`FeatureTable`].
pub fn heuristic_similarity(table: &FeatureTable, weights: &FeatureWeights) -> Result<SimilarityMatrix> {
    let inv = table.inventory();
    let n = inv.len();
    let codes: Vec<[Option<u8>; 8]> = inv.ids().map(|id| table.features(id).codes()).collect();
    let w = weights.as_slice();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let (mut matched, mut applicable) = (0.0, 0.0);
            for f in 0..8 {
                match (codes[i][f], codes[j][f]) {
                    (None, None) => {}
                    (a, b) => {
                        applicable += w[f];
                        if a == b {
                            matched += w[f];
                        }
                    }
                }
            }
            if applicable <= 0.0 {
                return Err(Error::Weights(format!(
                    "no applicable weight between {} and {}",
                    inv.symbols()[i],
                    inv.symbols()[j]
                )));
            }
            let s = (matched / applicable).clamp(0.0, 1.0);
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityMatrix::new(inv.clone(), values, Method::Heuristic)
}

/// Reference vector per phoneme, all of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    inventory: PhonemeInventory,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    /// `vectors[i]` belongs to the inventory's `i`-th phoneme.
    pub fn new(inventory: PhonemeInventory, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != inventory.len() {
            return Err(Error::Dimension { expected: inventory.len(), got: vectors.len() });
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension { expected: dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite component in vector for {}",
                    inventory.symbols()[i]
                )));
            }
            data.extend_from_slice(v);
        }
        Ok(Self { inventory, dim, data })
    }

    /// Builds a table from `(symbol, vector)` pairs in any order.
    pub fn from_pairs(
        inventory: &PhonemeInventory,
        pairs: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let mut slots: Vec<Option<Vec<f64>>> = vec![None; inventory.len()];
        for (sym, v) in pairs {
            let id = inventory.id(&sym).ok_or_else(|| Error::UnknownPhoneme(sym.clone()))?;
            if slots[id.index()].replace(v).is_some() {
                return Err(Error::DuplicatePhoneme(sym));
            }
        }
        let vectors = slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::MissingPhoneme(inventory.symbols()[i].clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(inventory.clone(), vectors)
    }

    /// Parses `SYMBOL\tx1\tx2...` lines; blank lines and `#` comments skipped.
    pub fn parse_tsv(text: &str, inventory: &PhonemeInventory) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t').map(str::trim);
            let sym = fields.next().unwrap_or_default().to_string();
            let v = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("`{f}` is not a number"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            pairs.push((sym, v));
        }
        Self::from_pairs(inventory, pairs)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for id in self.inventory.ids() {
            out.push_str(self.inventory.symbol(id));
            for x in self.vector(id) {
                out.push_str(&format!("\t{x}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn inventory(&self) -> &PhonemeInventory {
        &self.inventory
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, id: PhonemeId) -> &[f64] {
        &self.data[id.index() * self.dim..(id.index() + 1) * self.dim]
    }

    /// Largest L2 distance between any two phonemes.
    pub fn max_pairwise_distance(&self) -> f64 {
        let ids: Vec<_> = self.inventory.ids().collect();
        let mut max = 0.0f64;
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                max = max.max(l2(self.vector(a), self.vector(b)));
            }
        }
        max
    }
}

pub(crate) fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Min-max normalized L2 similarity. The range is taken over off-diagonal
/// pairs, so two phonemes with identical vectors score 1.
pub fn embedding_similarity(emb: &EmbeddingTable) -> Result<SimilarityMatrix> {
    let n = emb.inventory.len();
    if n < 2 {
        return Err(Error::DegenerateEmbedding("need at least two phonemes".into()));
    }
    let ids: Vec<_> = emb.inventory.ids().collect();
    let mut dist = vec![0.0; n * n];
    let (mut dmin, mut dmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let d = l2(emb.vector(ids[i]), emb.vector(ids[j]));
            dist[i * n + j] = d;
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
    }
    let range = dmax - dmin;
    if range.is_nan() || range <= 0.0 {
        return Err(Error::DegenerateEmbedding(
            "all phoneme pairs are equidistant; min-max normalization is undefined".into(),
        ));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let s = (1.0 - (dist[i * n + j] - dmin) / range).clamp(0.0, 1.0);
            values[i * n + j] = s;
            values[j * n + i] = s;
        }
    }
    SimilarityMatrix::new(emb.inventory.clone(), values, Method::Embedding)
}

/// Row-stochastic similarity used as soft labels.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSimilarity {
    n: usize,
    values: Vec<f64>,
}

impl NormalizedSimilarity {
    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Self { n, values }
    }

    /// Wraps arbitrary nonnegative rows that each sum to one (within 1e-9).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Dimension { expected: n, got: r.len() });
            }
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Matrix(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Matrix(format!("row {i} sums to {sum}")));
            }
            values.extend_from_slice(r);
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    /// `(N+1) x (N+1)` copy with a one-hot blank row and column appended.
    pub fn with_blank(&self) -> Vec<f64> {
        let n = self.n;
        let w = n + 1;
        let mut out = vec![0.0; w * w];
        for i in 0..n {
            out[i * w..i * w + n].copy_from_slice(self.row(i));
        }
        out[n * w + n] = 1.0;
        out
    }
}

pub fn normalize(s: &SimilarityMatrix) -> NormalizedSimilarity {
    let n = s.n();
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = s.row(i);
        // diagonal is 1, so the sum is at least 1
        let sum: f64 = row.iter().sum();
        values.extend(row.iter().map(|v| v / sum));
    }
    NormalizedSimilarity { n, values }
}
