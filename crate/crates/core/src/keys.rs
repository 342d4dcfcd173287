//! Key-value selection over a seed record.
//!
//! For each of the four data fields the distinct values occurring in the seed
//! are ranked by the number of seed publications carrying them. Values are
//! admitted one frequency level at a time (all values tied at the current
//! highest remaining frequency enter together, in ascending value order)
//! until the share of seed publications covered by the selection reaches the
//! field's threshold.
//!
//! A publication is covered for a field when it carries at least one selected
//! value, except for title words where `required_title_words` distinct
//! selected words must appear in the title.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::{Index, IndexMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{is_doi, tokenize_title, AuthorKey, Corpus, Publication, DEFAULT_MIN_WORD_LEN};
use crate::seed::SeedRecord;

pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_REQUIRED_TITLE_WORDS: usize = 2;
/// Minimum share of seed publications with a reprint author for `Auto` to pick `ReprintOnly`.
pub const REPRINT_AVAILABILITY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Cell,
    TitleWord,
    Author,
    Reference,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [
        FieldKind::Cell,
        FieldKind::TitleWord,
        FieldKind::Author,
        FieldKind::Reference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::Cell => "cell",
            FieldKind::TitleWord => "title",
            FieldKind::Author => "author",
            FieldKind::Reference => "reference",
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            FieldKind::Cell => 0b0001,
            FieldKind::TitleWord => 0b0010,
            FieldKind::Author => 0b0100,
            FieldKind::Reference => 0b1000,
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One value per data field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerField<T> {
    pub cell: T,
    pub title: T,
    pub author: T,
    pub reference: T,
}

impl<T> PerField<T> {
    pub fn from_fn(mut f: impl FnMut(FieldKind) -> T) -> Self {
        PerField {
            cell: f(FieldKind::Cell),
            title: f(FieldKind::TitleWord),
            author: f(FieldKind::Author),
            reference: f(FieldKind::Reference),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(FieldKind, &T) -> U) -> PerField<U> {
        PerField::from_fn(|k| f(k, &self[k]))
    }
}

impl<T: Clone> PerField<T> {
    pub fn splat(v: T) -> Self {
        PerField {
            cell: v.clone(),
            title: v.clone(),
            author: v.clone(),
            reference: v,
        }
    }
}

impl<T> Index<FieldKind> for PerField<T> {
    type Output = T;
    fn index(&self, field: FieldKind) -> &T {
        match field {
            FieldKind::Cell => &self.cell,
            FieldKind::TitleWord => &self.title,
            FieldKind::Author => &self.author,
            FieldKind::Reference => &self.reference,
        }
    }
}

impl<T> IndexMut<FieldKind> for PerField<T> {
    fn index_mut(&mut self, field: FieldKind) -> &mut T {
        match field {
            FieldKind::Cell => &mut self.cell,
            FieldKind::TitleWord => &mut self.title,
            FieldKind::Author => &mut self.author,
            FieldKind::Reference => &mut self.reference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorScope {
    /// `ReprintOnly` when reprint authors are known for enough of the seed.
    Auto,
    AllAuthors,
    ReprintOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnUnsatisfiable {
    Error,
    /// Keep every value and flag the set as exhausted.
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeysConfig {
    pub thresholds: PerField<f64>,
    pub min_word_len: usize,
    pub required_title_words: usize,
    pub author_scope: AuthorScope,
    pub doi_only: bool,
    pub on_unsatisfiable: OnUnsatisfiable,
}

impl Default for KeysConfig {
    fn default() -> Self {
        KeysConfig {
            thresholds: PerField::splat(DEFAULT_THRESHOLD),
            min_word_len: DEFAULT_MIN_WORD_LEN,
            required_title_words: DEFAULT_REQUIRED_TITLE_WORDS,
            author_scope: AuthorScope::Auto,
            doi_only: false,
            on_unsatisfiable: OnUnsatisfiable::Error,
        }
    }
}

impl KeysConfig {
    pub fn validate(&self) -> Result<(), KeysError> {
        for field in FieldKind::ALL {
            let t = self.thresholds[field];
            if !(t > 0.0 && t <= 1.0) {
                return Err(KeysError::InvalidConfig(format!(
                    "{field} threshold {t} outside (0, 1]"
                )));
            }
        }
        if self.min_word_len == 0 {
            return Err(KeysError::InvalidConfig("min_word_len must be >= 1".into()));
        }
        if self.required_title_words == 0 {
            return Err(KeysError::InvalidConfig(
                "required_title_words must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Copy of the config with `Auto` replaced by the concrete scope for this seed.
    pub fn resolved_for(&self, corpus: &Corpus, seed: &SeedRecord) -> KeysConfig {
        let mut out = self.clone();
        if out.author_scope == AuthorScope::Auto {
            let n = seed.positions().len();
            let with_reprint = seed
                .positions()
                .iter()
                .filter(|&&i| corpus.publication(i).reprint_author().is_some())
                .count();
            out.author_scope = if n > 0 && with_reprint as f64 / n as f64 >= REPRINT_AVAILABILITY
            {
                AuthorScope::ReprintOnly
            } else {
                AuthorScope::AllAuthors
            };
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeysError {
    #[error("seed record is empty")]
    EmptySeed,
    #[error("{field}: coverage {achieved:.4} stays below threshold {threshold} with every value selected")]
    Unsatisfiable {
        field: FieldKind,
        achieved: f64,
        threshold: f64,
    },
    #[error("invalid key configuration: {0}")]
    InvalidConfig(String),
}

/// Author keys of a publication within the given scope. `Auto` is read as all authors.
pub fn authors_in_scope(publication: &Publication, scope: AuthorScope) -> Vec<AuthorKey> {
    let mut keys: Vec<AuthorKey> = match scope {
        AuthorScope::ReprintOnly => publication.reprint_author().map(|a| a.key()).into_iter().collect(),
        AuthorScope::AllAuthors | AuthorScope::Auto => publication.author_keys().collect(),
    };
    keys.sort();
    keys.dedup();
    keys
}

/// Surnames carried by more than one distinct first initial among all authors
/// of the given publications.
pub fn homonym_surnames<'a>(pubs: impl IntoIterator<Item = &'a Publication>) -> BTreeSet<String> {
    let mut initials: HashMap<&str, BTreeSet<char>> = HashMap::new();
    for p in pubs {
        for a in &p.authors {
            initials.entry(&a.surname).or_default().insert(a.first_initial);
        }
    }
    initials
        .into_iter()
        .filter(|(_, set)| set.len() > 1)
        .map(|(s, _)| s.to_string())
        .collect()
}

/// Distinct candidate values a seed publication contributes to `field`.
fn candidate_values(
    corpus: &Corpus,
    idx: u32,
    field: FieldKind,
    config: &KeysConfig,
    homonyms: &BTreeSet<String>,
) -> Vec<String> {
    let p = corpus.publication(idx);
    match field {
        FieldKind::Cell => vec![corpus.cell_of(idx).as_str().to_string()],
        FieldKind::TitleWord => corpus
            .title_tokens_of(idx)
            .iter()
            .filter(|t| t.chars().count() >= config.min_word_len)
            .cloned()
            .collect(),
        FieldKind::Author => authors_in_scope(p, config.author_scope)
            .into_iter()
            .filter(|k| !homonyms.contains(k.surname()))
            .map(|k| k.to_string())
            .collect(),
        FieldKind::Reference => p
            .references
            .iter()
            .filter(|r| !config.doi_only || is_doi(r))
            .cloned()
            .collect(),
    }
}

/// Value -> seed positions (local, 0-based into `seed.positions()`).
fn value_postings(
    corpus: &Corpus,
    seed: &SeedRecord,
    field: FieldKind,
    config: &KeysConfig,
) -> HashMap<String, Vec<u32>> {
    let homonyms = if field == FieldKind::Author {
        homonym_surnames(seed.positions().iter().map(|&i| corpus.publication(i)))
    } else {
        BTreeSet::new()
    };
    let mut postings: HashMap<String, Vec<u32>> = HashMap::new();
    for (local, &idx) in seed.positions().iter().enumerate() {
        for v in candidate_values(corpus, idx, field, config, &homonyms) {
            postings.entry(v).or_default().push(local as u32);
        }
    }
    postings
}

/// Number of distinct seed publications carrying each value of `field`.
pub fn field_frequencies(
    corpus: &Corpus,
    seed: &SeedRecord,
    field: FieldKind,
    config: &KeysConfig,
) -> Result<BTreeMap<String, usize>, KeysError> {
    if seed.is_empty() {
        return Err(KeysError::EmptySeed);
    }
    let config = config.resolved_for(corpus, seed);
    Ok(value_postings(corpus, seed, field, &config)
        .into_iter()
        .map(|(v, p)| (v, p.len()))
        .collect())
}

/// Whether `publication` is covered for `field` by the `selected` values.
pub fn publication_covered(
    publication: &Publication,
    field: FieldKind,
    selected: &HashSet<String>,
    config: &KeysConfig,
) -> bool {
    if selected.is_empty() {
        return false;
    }
    match field {
        FieldKind::Cell => selected.contains(publication.cell().as_str()),
        FieldKind::TitleWord => {
            tokenize_title(&publication.title, config.min_word_len)
                .iter()
                .filter(|t| selected.contains(*t))
                .count()
                >= config.required_title_words
        }
        FieldKind::Author => authors_in_scope(publication, config.author_scope)
            .iter()
            .any(|k| selected.contains(&k.to_string())),
        FieldKind::Reference => publication.references.iter().any(|r| selected.contains(r)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub value: String,
    pub frequency: usize,
    /// Seed coverage once this value and every value before it are selected.
    pub cumulative_coverage: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "KeyValueSetRepr")]
pub struct KeyValueSet {
    pub field: FieldKind,
    pub threshold: f64,
    /// Selected values in selection order.
    pub entries: Vec<KeyEntry>,
    pub achieved_coverage: f64,
    /// Distinct candidate values occurring in the seed.
    pub unique_values: usize,
    pub seed_size: usize,
    pub descended_to_frequency_one: bool,
    /// Every candidate was selected without reaching the threshold.
    pub exhausted: bool,
    #[serde(skip)]
    selected: HashSet<String>,
}

#[derive(Deserialize)]
struct KeyValueSetRepr {
    field: FieldKind,
    threshold: f64,
    entries: Vec<KeyEntry>,
    achieved_coverage: f64,
    unique_values: usize,
    seed_size: usize,
    descended_to_frequency_one: bool,
    exhausted: bool,
}

impl From<KeyValueSetRepr> for KeyValueSet {
    fn from(r: KeyValueSetRepr) -> Self {
        let selected = r.entries.iter().map(|e| e.value.clone()).collect();
        KeyValueSet {
            field: r.field,
            threshold: r.threshold,
            entries: r.entries,
            achieved_coverage: r.achieved_coverage,
            unique_values: r.unique_values,
            seed_size: r.seed_size,
            descended_to_frequency_one: r.descended_to_frequency_one,
            exhausted: r.exhausted,
            selected,
        }
    }
}

impl PartialEq for KeyValueSet {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.threshold == other.threshold
            && self.entries == other.entries
            && self.achieved_coverage == other.achieved_coverage
            && self.unique_values == other.unique_values
            && self.seed_size == other.seed_size
            && self.descended_to_frequency_one == other.descended_to_frequency_one
            && self.exhausted == other.exhausted
    }
}

impl KeyValueSet {
    /// A set with no values; covers nothing.
    pub fn empty(field: FieldKind, threshold: f64) -> Self {
        KeyValueSet {
            field,
            threshold,
            entries: Vec::new(),
            achieved_coverage: 0.0,
            unique_values: 0,
            seed_size: 0,
            descended_to_frequency_one: false,
            exhausted: false,
            selected: HashSet::new(),
        }
    }

    /// A hand-picked set (frequencies and coverage unknown, recorded as 0).
    pub fn with_values<I, S>(field: FieldKind, threshold: f64, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = KeyValueSet::empty(field, threshold);
        for v in values {
            let value = v.into();
            if set.selected.insert(value.clone()) {
                set.entries.push(KeyEntry {
                    value,
                    frequency: 0,
                    cumulative_coverage: 0.0,
                });
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.value.as_str())
    }

    pub fn contains(&self, value: &str) -> bool {
        self.selected.contains(value)
    }

    pub fn selected(&self) -> &HashSet<String> {
        &self.selected
    }

    /// Selected values over distinct occurring values.
    pub fn key_ratio(&self) -> f64 {
        if self.unique_values == 0 {
            0.0
        } else {
            self.entries.len() as f64 / self.unique_values as f64
        }
    }

    /// Number of trailing entries sharing the lowest selected frequency.
    pub fn final_batch_len(&self) -> usize {
        let Some(last) = self.entries.last() else {
            return 0;
        };
        self.entries
            .iter()
            .rev()
            .take_while(|e| e.frequency == last.frequency)
            .count()
    }

    pub fn meets_threshold(&self) -> bool {
        self.achieved_coverage >= self.threshold
    }
}

/// Frequency-greedy selection for one field.
pub fn select_key_values(
    corpus: &Corpus,
    seed: &SeedRecord,
    field: FieldKind,
    config: &KeysConfig,
) -> Result<KeyValueSet, KeysError> {
    config.validate()?;
    if seed.is_empty() {
        return Err(KeysError::EmptySeed);
    }
    let config = config.resolved_for(corpus, seed);
    let n = seed.len();
    let threshold = config.thresholds[field];

    let mut ranked: Vec<(String, Vec<u32>)> =
        value_postings(corpus, seed, field, &config).into_iter().collect();
    ranked.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
    let unique_values = ranked.len();

    let required = match field {
        FieldKind::TitleWord => config.required_title_words as u32,
        _ => 1,
    };
    let mut hits = vec![0u32; n];
    let mut covered = 0usize;
    let mut entries = Vec::new();
    let mut satisfied = false;

    let mut start = 0;
    while start < ranked.len() {
        let freq = ranked[start].1.len();
        let end = start + ranked[start..].iter().take_while(|(_, p)| p.len() == freq).count();
        for (value, posting) in &ranked[start..end] {
            for &local in posting {
                let h = &mut hits[local as usize];
                *h += 1;
                if *h == required {
                    covered += 1;
                }
            }
            entries.push(KeyEntry {
                value: value.clone(),
                frequency: freq,
                cumulative_coverage: covered as f64 / n as f64,
            });
        }
        start = end;
        if covered as f64 / n as f64 >= threshold {
            satisfied = true;
            break;
        }
    }

    let achieved_coverage = covered as f64 / n as f64;
    if !satisfied && config.on_unsatisfiable == OnUnsatisfiable::Error {
        return Err(KeysError::Unsatisfiable {
            field,
            achieved: achieved_coverage,
            threshold,
        });
    }
    let selected = entries.iter().map(|e| e.value.clone()).collect();
    Ok(KeyValueSet {
        field,
        threshold,
        descended_to_frequency_one: entries.iter().any(|e| e.frequency == 1),
        entries,
        achieved_coverage,
        unique_values,
        seed_size: n,
        exhausted: !satisfied,
        selected,
    })
}

/// The four key-value sets plus the (resolved) configuration they were built with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyValueSets {
    pub cells: KeyValueSet,
    pub title_words: KeyValueSet,
    pub authors: KeyValueSet,
    pub references: KeyValueSet,
    pub config: KeysConfig,
}

impl KeyValueSets {
    /// All four sets empty.
    pub fn empty(config: KeysConfig) -> Self {
        let t = config.thresholds;
        KeyValueSets {
            cells: KeyValueSet::empty(FieldKind::Cell, t.cell),
            title_words: KeyValueSet::empty(FieldKind::TitleWord, t.title),
            authors: KeyValueSet::empty(FieldKind::Author, t.author),
            references: KeyValueSet::empty(FieldKind::Reference, t.reference),
            config,
        }
    }

    pub fn get(&self, field: FieldKind) -> &KeyValueSet {
        match field {
            FieldKind::Cell => &self.cells,
            FieldKind::TitleWord => &self.title_words,
            FieldKind::Author => &self.authors,
            FieldKind::Reference => &self.references,
        }
    }

    pub fn covers(&self, publication: &Publication, field: FieldKind) -> bool {
        publication_covered(publication, field, self.get(field).selected(), &self.config)
    }

    /// Bit set of covered fields (see [`FieldKind::bit`]).
    pub fn coverage_bits(&self, publication: &Publication) -> u8 {
        FieldKind::ALL
            .iter()
            .filter(|&&f| self.covers(publication, f))
            .fold(0, |acc, f| acc | f.bit())
    }

    pub fn key_ratios(&self) -> PerField<f64> {
        PerField::from_fn(|f| self.get(f).key_ratio())
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in FieldKind::ALL {
            let set = self.get(f);
            if set.exhausted {
                out.push(format!(
                    "{f}: all {} values selected, coverage {:.4} below threshold {}",
                    set.len(),
                    set.achieved_coverage,
                    set.threshold
                ));
            }
            if set.descended_to_frequency_one {
                out.push(format!(
                    "{f}: selection descended to values occurring once; seed or threshold may need reconsidering"
                ));
            }
        }
        out
    }
}

/// Run the selection for all four fields.
pub fn compute_all_keys(
    corpus: &Corpus,
    seed: &SeedRecord,
    config: &KeysConfig,
) -> Result<KeyValueSets, KeysError> {
    config.validate()?;
    if seed.is_empty() {
        return Err(KeysError::EmptySeed);
    }
    let resolved = config.resolved_for(corpus, seed);
    let mut sets: Vec<KeyValueSet> = FieldKind::ALL
        .par_iter()
        .map(|&f| select_key_values(corpus, seed, f, &resolved))
        .collect::<Result<_, _>>()?;
    let references = sets.pop().expect("four fields");
    let authors = sets.pop().expect("four fields");
    let title_words = sets.pop().expect("four fields");
    let cells = sets.pop().expect("four fields");
    Ok(KeyValueSets {
        cells,
        title_words,
        authors,
        references,
        config: resolved,
    })
}
