//! Assembling the specialty approximation: every in-window publication
//! covered by key values in at least `min_fields` of the four fields.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{AuthorKey, Corpus, Publication};
use crate::keys::{compute_all_keys, AuthorScope, FieldKind, KeyValueSets, KeysConfig, KeysError, PerField};
use crate::seed::{build_seed_record, SeedOptions, SeedRecord};

pub const DEFAULT_MIN_FIELDS: u8 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("empty year window {start}-{end}")]
    EmptyWindow { start: i32, end: i32 },
    #[error("min_fields must be between 1 and 4, got {0}")]
    InvalidMinFields(u8),
    #[error("seed record is empty")]
    EmptySeed,
    #[error("approximation has no members")]
    EmptyApproximation,
    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid year window {0:?}")]
    BadWindow(String),
    #[error(transparent)]
    Keys(#[from] KeysError),
}

/// Inclusive publication-year range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self, ApproxError> {
        if start > end {
            return Err(ApproxError::EmptyWindow { start, end });
        }
        Ok(YearWindow { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }

    pub fn is_within(&self, other: &YearWindow) -> bool {
        other.start <= self.start && self.end <= other.end
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl FromStr for YearWindow {
    type Err = ApproxError;

    /// `2010-2012` or a single year `2012`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ApproxError::BadWindow(s.to_string());
        let s = s.trim();
        let (a, b) = match s.split_once(['-', ':']) {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        YearWindow::new(start, end)
    }
}

/// Bit set over the four fields, see [`FieldKind::bit`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldFlags(u8);

impl FieldFlags {
    pub fn from_bits(bits: u8) -> Self {
        FieldFlags(bits & 0b1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn has(self, field: FieldKind) -> bool {
        self.0 & field.bit() != 0
    }

    pub fn count(self) -> u8 {
        self.0.count_ones() as u8
    }

    /// `CTAR` with `-` for uncovered fields, e.g. `CT-R`.
    pub fn label(self) -> String {
        FieldKind::ALL
            .iter()
            .zip(['C', 'T', 'A', 'R'])
            .map(|(&f, c)| if self.has(f) { c } else { '-' })
            .collect()
    }
}

impl Serialize for FieldFlags {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageProfile {
    pub pub_id: String,
    pub flags: FieldFlags,
    pub count: u8,
}

impl CoverageProfile {
    fn new(pub_id: &str, flags: FieldFlags) -> Self {
        CoverageProfile {
            pub_id: pub_id.to_string(),
            flags,
            count: flags.count(),
        }
    }
}

pub fn coverage_profile(publication: &Publication, keys: &KeyValueSets) -> CoverageProfile {
    CoverageProfile::new(
        &publication.pub_id,
        FieldFlags::from_bits(keys.coverage_bits(publication)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialtyApproximation {
    pub member_ids: BTreeSet<String>,
    pub window: YearWindow,
    pub min_fields: u8,
    pub profiles: BTreeMap<String, CoverageProfile>,
    /// In-window publications by number of covered fields (0..=4).
    pub histogram: [usize; 5],
    /// In-window publications by exact flag combination, indexed by bits.
    pub subset_sizes: [usize; 16],
    pub in_window: usize,
    /// In-window publications matched by each key author.
    pub author_match_counts: BTreeMap<String, usize>,
}

impl SpecialtyApproximation {
    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }

    pub fn contains(&self, pub_id: &str) -> bool {
        self.member_ids.contains(pub_id)
    }

    /// Member count reassembled from the flag-combination subsets.
    pub fn members_from_subsets(&self) -> usize {
        (0u8..16)
            .filter(|b| b.count_ones() as u8 >= self.min_fields)
            .map(|b| self.subset_sizes[b as usize])
            .sum()
    }

    pub fn subset_labels(&self) -> BTreeMap<String, usize> {
        (0u8..16)
            .map(|b| (FieldFlags::from_bits(b).label(), self.subset_sizes[b as usize]))
            .collect()
    }
}

fn mark(flags: &mut [bool], positions: &[u32]) {
    for &i in positions {
        flags[i as usize] = true;
    }
}

/// Per-field covered positions computed from the corpus indexes.
fn field_coverage(corpus: &Corpus, keys: &KeyValueSets, field: FieldKind) -> Vec<bool> {
    let n = corpus.len();
    let mut covered = vec![false; n];
    let set = keys.get(field);
    let config = &keys.config;
    match field {
        FieldKind::Cell => {
            for v in set.values() {
                mark(&mut covered, corpus.pubs_with_cell(v));
            }
        }
        FieldKind::Reference => {
            for v in set.values() {
                mark(&mut covered, corpus.pubs_with_reference(v));
            }
        }
        FieldKind::TitleWord => {
            let mut hits = vec![0u16; n];
            for w in set.values() {
                if w.chars().count() < config.min_word_len {
                    continue;
                }
                for &i in corpus.pubs_with_title_word(w) {
                    hits[i as usize] = hits[i as usize].saturating_add(1);
                }
            }
            for (c, h) in covered.iter_mut().zip(hits) {
                *c = h as usize >= config.required_title_words;
            }
        }
        FieldKind::Author => {
            for (key, positions) in matched_authors(corpus, keys) {
                for &i in positions {
                    if config.author_scope == AuthorScope::ReprintOnly {
                        let reprint = corpus.publication(i).reprint_author();
                        if reprint.is_none_or(|a| a.key() != *key) {
                            continue;
                        }
                    }
                    covered[i as usize] = true;
                }
            }
        }
    }
    covered
}

/// Corpus author keys whose rendered form is a selected key author.
fn matched_authors<'c>(
    corpus: &'c Corpus,
    keys: &KeyValueSets,
) -> Vec<(&'c AuthorKey, &'c [u32])> {
    if keys.authors.is_empty() {
        return Vec::new();
    }
    corpus
        .author_keys()
        .filter(|(k, _)| keys.authors.contains(&k.to_string()))
        .collect()
}

fn author_match_counts(
    corpus: &Corpus,
    keys: &KeyValueSets,
    window: YearWindow,
) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> =
        keys.authors.values().map(|v| (v.to_string(), 0)).collect();
    for (key, positions) in matched_authors(corpus, keys) {
        let n = positions
            .iter()
            .filter(|&&i| window.contains(corpus.publication(i).year))
            .count();
        counts.insert(key.to_string(), n);
    }
    counts
}

#[derive(Default)]
struct ScanTotals {
    histogram: [usize; 5],
    subsets: [usize; 16],
    members: Vec<u32>,
}

impl ScanTotals {
    fn merge(mut self, other: ScanTotals) -> ScanTotals {
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        for (a, b) in self.subsets.iter_mut().zip(other.subsets) {
            *a += b;
        }
        self.members.extend(other.members);
        self
    }
}

pub fn build_approximation(
    corpus: &Corpus,
    keys: &KeyValueSets,
    window: YearWindow,
    min_fields: u8,
) -> Result<SpecialtyApproximation, ApproxError> {
    if window.start > window.end {
        return Err(ApproxError::EmptyWindow {
            start: window.start,
            end: window.end,
        });
    }
    if !(1..=4).contains(&min_fields) {
        return Err(ApproxError::InvalidMinFields(min_fields));
    }

    let per_field: Vec<Vec<bool>> = FieldKind::ALL
        .par_iter()
        .map(|&f| field_coverage(corpus, keys, f))
        .collect();
    let bits_of = |i: u32| -> u8 {
        FieldKind::ALL
            .iter()
            .zip(&per_field)
            .filter(|(_, cov)| cov[i as usize])
            .fold(0, |acc, (f, _)| acc | f.bit())
    };

    let in_window = corpus.pubs_in_years(window.start, window.end);
    let totals = in_window
        .par_chunks(4096)
        .map(|chunk| {
            let mut t = ScanTotals::default();
            for &i in chunk {
                let bits = bits_of(i);
                let count = bits.count_ones() as u8;
                t.histogram[count as usize] += 1;
                t.subsets[bits as usize] += 1;
                if count >= min_fields {
                    t.members.push(i);
                }
            }
            t
        })
        .reduce(ScanTotals::default, ScanTotals::merge);

    let mut profiles = BTreeMap::new();
    let mut member_ids = BTreeSet::new();
    for &i in &totals.members {
        let id = &corpus.publication(i).pub_id;
        profiles.insert(
            id.clone(),
            CoverageProfile::new(id, FieldFlags::from_bits(bits_of(i))),
        );
        member_ids.insert(id.clone());
    }

    Ok(SpecialtyApproximation {
        member_ids,
        window,
        min_fields,
        profiles,
        histogram: totals.histogram,
        subset_sizes: totals.subsets,
        in_window: in_window.len(),
        author_match_counts: author_match_counts(corpus, keys, window),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageHistogram {
    pub counts: [usize; 5],
    pub fractions: [f64; 5],
    pub total: usize,
}

impl CoverageHistogram {
    pub fn from_counts(counts: [usize; 5]) -> Self {
        let total: usize = counts.iter().sum();
        let fractions = counts.map(|c| if total == 0 { 0.0 } else { c as f64 / total as f64 });
        CoverageHistogram {
            counts,
            fractions,
            total,
        }
    }

    /// Share of publications covered in at least `k` fields.
    pub fn at_least(&self, k: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts[k.min(4)..].iter().sum::<usize>() as f64 / self.total as f64
    }
}

/// Distribution of seed publications over coverage counts 0..=4.
pub fn seed_coverage_histogram(
    corpus: &Corpus,
    seed: &SeedRecord,
    keys: &KeyValueSets,
) -> Result<CoverageHistogram, ApproxError> {
    if seed.is_empty() {
        return Err(ApproxError::EmptySeed);
    }
    let mut counts = [0usize; 5];
    for &i in seed.positions() {
        counts[keys.coverage_bits(corpus.publication(i)).count_ones() as usize] += 1;
    }
    Ok(CoverageHistogram::from_counts(counts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RederivedKeys {
    pub keys: KeyValueSets,
    pub seed: SeedRecord,
    pub key_ratios: PerField<f64>,
}

/// Key values recomputed with the approximation members as a new, unextended seed.
pub fn rederive_key_values(
    corpus: &Corpus,
    approximation: &SpecialtyApproximation,
    config: &KeysConfig,
) -> Result<RederivedKeys, ApproxError> {
    if approximation.is_empty() {
        return Err(ApproxError::EmptyApproximation);
    }
    let seed = build_seed_record(corpus, &approximation.member_ids, &SeedOptions::default())
        .map_err(|_| ApproxError::EmptyApproximation)?;
    let keys = compute_all_keys(corpus, &seed, config)?;
    let key_ratios = keys.key_ratios();
    Ok(RederivedKeys {
        keys,
        seed,
        key_ratios,
    })
}

/// Probability of coverage in at least three of four independent fields,
/// each covered with probability `t`.
pub fn expected_inclusion_probability(t: f64) -> Result<f64, ApproxError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ApproxError::OutOfRange(t));
    }
    // 4t^3(1-t) + t^4 factored as t^3(4-3t); the factored form is exact in
    // binary floating point at t = 0.8.
    Ok(t * t * t * (4.0 - 3.0 * t))
}

/// Probability of at least `min_fields` covered fields when the fields are
/// independent with the given per-field coverage probabilities.
pub fn independent_inclusion_probability(p: PerField<f64>, min_fields: u8) -> f64 {
    (0u8..16)
        .filter(|bits| bits.count_ones() as u8 >= min_fields)
        .map(|bits| {
            FieldKind::ALL
                .iter()
                .map(|&f| if bits & f.bit() != 0 { p[f] } else { 1.0 - p[f] })
                .product::<f64>()
        })
        .sum()
}
