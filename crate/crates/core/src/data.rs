//! LIBSVM-format ingestion, unit-ball normalization and seeded shuffling.
//!
//! A line reads `<label> <index>:<value> <index>:<value> ...`, optionally
//! followed by `# comment`. Indices are 1-based and need not be sorted, but may
//! not repeat. Labels `+1`/`1` and `-1` are understood directly; anything else
//! (`0`, `2`, `4`, ...) needs an explicit [`LabelMap`] entry.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BoostError, Result};
use crate::sparse::{Example, Label, SparseVector};

/// Extra label spellings, e.g. `0:-1,1:+1`. Entries override the defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    entries: Vec<(f64, Label)>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, raw: f64, label: Label) -> Self {
        self.entries.retain(|&(r, _)| r != raw);
        self.entries.push((raw, label));
        self
    }

    pub fn resolve(&self, raw: f64) -> Option<Label> {
        if let Some(&(_, l)) = self.entries.iter().find(|&&(r, _)| r == raw) {
            return Some(l);
        }
        if raw == 1.0 {
            Some(Label::Positive)
        } else if raw == -1.0 {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

impl FromStr for LabelMap {
    type Err = BoostError;

    fn from_str(spec: &str) -> Result<Self> {
        let mut map = LabelMap::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || BoostError::BadLabelMap(spec.to_string());
            let (raw, target) = part.split_once(':').ok_or_else(bad)?;
            let raw: f64 = raw.trim().parse().map_err(|_| bad())?;
            let target: f64 = target.trim().parse().map_err(|_| bad())?;
            let label = Label::from_sign(target as i32)
                .filter(|_| target.fract() == 0.0)
                .ok_or_else(bad)?;
            map = map.with(raw, label);
        }
        Ok(map)
    }
}

/// Parses one line. Blank and comment-only lines give `Ok(None)`. The result
/// is not normalized.
pub fn parse_libsvm_line(line: &str, line_no: usize, labels: &LabelMap) -> Result<Option<Example>> {
    let body = line.split('#').next().unwrap_or("");
    let mut tokens = body.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    if label_tok.contains(':') {
        return Err(BoostError::MissingLabel { line: line_no });
    }
    let raw: f64 = label_tok.parse().map_err(|_| BoostError::MalformedToken {
        line: line_no,
        position: 1,
        token: label_tok.to_string(),
    })?;
    let label = labels.resolve(raw).ok_or_else(|| BoostError::UnmappedLabel {
        line: line_no,
        label: label_tok.to_string(),
    })?;

    let mut pairs = Vec::new();
    for (k, tok) in tokens.enumerate() {
        let malformed = || BoostError::MalformedToken {
            line: line_no,
            position: k + 2,
            token: tok.to_string(),
        };
        let (idx, val) = tok.split_once(':').ok_or_else(malformed)?;
        let idx: u32 = idx.parse().map_err(|_| malformed())?;
        let val: f64 = val.parse().map_err(|_| malformed())?;
        if idx == 0 || !val.is_finite() {
            return Err(malformed());
        }
        pairs.push((idx, val));
    }
    let features = SparseVector::from_pairs(pairs).map_err(|e| match e {
        BoostError::DuplicateIndex(index) => BoostError::DuplicateFeature { line: line_no, index },
        other => other,
    })?;
    Ok(Some(Example::new(features, label)))
}

/// Inverse of [`parse_libsvm_line`] for canonical labels.
pub fn format_libsvm_line(example: &Example) -> String {
    let mut line = example.label.to_string();
    for (i, v) in example.features.iter() {
        line.push_str(&format!(" {i}:{v}"));
    }
    line
}

/// Rescales onto the unit sphere when the norm exceeds 1; shorter vectors are
/// returned unchanged.
pub fn normalize_unit_ball(x: &SparseVector) -> SparseVector {
    let norm = x.norm();
    if norm > 1.0 {
        x.scaled(1.0 / norm)
    } else {
        x.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub examples: Vec<Example>,
    /// Largest feature index seen.
    pub dimension: u32,
}

impl Dataset {
    /// Normalizes every example into the unit ball.
    pub fn new(name: impl Into<String>, examples: Vec<Example>) -> Self {
        let examples: Vec<Example> = examples
            .into_iter()
            .map(|e| Example::new(normalize_unit_ball(&e.features), e.label))
            .collect();
        let dimension = examples.iter().map(|e| e.features.max_index()).max().unwrap_or(0);
        Self {
            name: name.into(),
            examples,
            dimension,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Reads LIBSVM text line by line.
    pub fn from_reader<R: BufRead>(name: impl Into<String>, reader: R, labels: &LabelMap) -> Result<Self> {
        let mut examples = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            if let Some(e) = parse_libsvm_line(&line?, i + 1, labels)? {
                examples.push(e);
            }
        }
        Ok(Self::new(name, examples))
    }

    pub fn load(path: impl AsRef<Path>, labels: &LabelMap) -> Result<Self> {
        let path = path.as_ref();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let ds = Self::from_reader(name, BufReader::new(File::open(path)?), labels)?;
        if ds.is_empty() {
            return Err(BoostError::EmptyDataset(ds.name));
        }
        Ok(ds)
    }

    pub fn write_libsvm<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.examples {
            writeln!(out, "{}", format_libsvm_line(e))?;
        }
        Ok(())
    }

    /// Same examples in the order given by [`shuffled_order`].
    pub fn shuffle(&self, seed: u64) -> Dataset {
        let examples = shuffled_order(self.len(), seed)
            .into_iter()
            .map(|i| self.examples[i].clone())
            .collect();
        Dataset {
            name: self.name.clone(),
            examples,
            dimension: self.dimension,
        }
    }
}

/// Fisher-Yates permutation of `0..len` driven by ChaCha8 seeded with
/// `seed_from_u64(seed)`. The swap partner for position `i` is
/// `(next_u64() * (i + 1)) >> 64`, so only the raw generator stream matters
/// and orders are identical on every platform.
pub fn shuffled_order(len: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..len).rev() {
        let j = ((rng.next_u64() as u128 * (i as u128 + 1)) >> 64) as usize;
        order.swap(i, j);
    }
    order
}
