//! Prominent-author rankings with co-publication conflicts removed, and
//! mutual coverage between a specialty approximation and other records.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::approx::{SpecialtyApproximation, YearWindow};
use crate::corpus::{AuthorKey, Corpus};
use crate::keys::{
    compute_all_keys, FieldKind, KeyValueSet, KeyValueSets, KeysConfig, OnUnsatisfiable, PerField,
};
use crate::seed::{build_seed_record, SeedOptions};

/// Years before and including the reference year that count for conflicts.
pub const DEFAULT_CONFLICT_YEARS: i32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("publication record is empty")]
    EmptyRecord,
    #[error("record contains unknown publication id {0:?}")]
    UnknownPubId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingSource {
    FromKeyAuthors,
    FromApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    Focal,
    CoAuthorConflict,
    Homonym,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedAuthor {
    pub author: String,
    pub publications: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExcludedAuthor {
    pub author: String,
    pub reason: ExclusionReason,
    pub publications: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuthorRanking {
    pub source: RankingSource,
    pub focal: String,
    pub conflict_window: YearWindow,
    pub entries: Vec<RankedAuthor>,
    pub excluded: Vec<ExcludedAuthor>,
    pub warnings: Vec<String>,
}

impl AuthorRanking {
    pub fn top(&self, n: usize) -> &[RankedAuthor] {
        &self.entries[..n.min(self.entries.len())]
    }

    pub fn total_publications(&self) -> usize {
        self.entries.iter().map(|e| e.publications).sum::<usize>()
            + self.excluded.iter().map(|e| e.publications).sum::<usize>()
    }

    pub fn excluded_as(&self, reason: ExclusionReason) -> impl Iterator<Item = &str> {
        self.excluded
            .iter()
            .filter(move |e| e.reason == reason)
            .map(|e| e.author.as_str())
    }
}

pub enum RankingInput<'a> {
    /// Key authors with their seed frequencies.
    KeyAuthors(&'a KeyValueSet),
    /// All authors of the approximation members.
    Approximation(&'a SpecialtyApproximation),
}

/// Surname part of a rendered `SURNAME I` key.
fn surname_of(key: &str) -> &str {
    key.rsplit_once(' ').map_or(key, |(s, _)| s)
}

/// Authors sharing at least one publication with `author` in `window`.
pub fn co_authors(corpus: &Corpus, author: &AuthorKey, window: YearWindow) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for &i in corpus.pubs_with_author(author) {
        let p = corpus.publication(i);
        if !window.contains(p.year) {
            continue;
        }
        for k in p.author_keys() {
            if k != *author {
                out.insert(k.to_string());
            }
        }
    }
    out
}

/// Whether `a` and `b` co-published within `window`.
pub fn conflicts(corpus: &Corpus, a: &AuthorKey, b: &AuthorKey, window: YearWindow) -> bool {
    a != b && co_authors(corpus, a, window).contains(&b.to_string())
}

pub fn rank_authors(
    input: RankingInput<'_>,
    corpus: &Corpus,
    focal: &AuthorKey,
    conflict_window: YearWindow,
) -> AuthorRanking {
    let (source, counts): (RankingSource, BTreeMap<String, usize>) = match input {
        RankingInput::KeyAuthors(set) => (
            RankingSource::FromKeyAuthors,
            set.entries
                .iter()
                .map(|e| (e.value.clone(), e.frequency))
                .collect(),
        ),
        RankingInput::Approximation(approx) => {
            let mut counts = BTreeMap::new();
            for id in &approx.member_ids {
                let Some(p) = corpus.get(id) else { continue };
                let keys: BTreeSet<String> = p.author_keys().map(|k| k.to_string()).collect();
                for k in keys {
                    *counts.entry(k).or_insert(0) += 1;
                }
            }
            (RankingSource::FromApproximation, counts)
        }
    };

    let mut initials: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for k in counts.keys() {
        let s = surname_of(k);
        initials
            .entry(s.to_string())
            .or_default()
            .insert(k[s.len()..].to_string());
    }
    let homonyms: BTreeSet<String> = initials
        .into_iter()
        .filter(|(_, i)| i.len() > 1)
        .map(|(s, _)| s)
        .collect();

    let mut warnings = Vec::new();
    if corpus.pubs_with_author(focal).is_empty() {
        warnings.push(format!(
            "focal author {focal} not found in corpus; no co-publication conflicts applied"
        ));
    }
    let focal_str = focal.to_string();
    let conflicted = co_authors(corpus, focal, conflict_window);

    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for (author, n) in counts {
        let reason = if author == focal_str {
            Some(ExclusionReason::Focal)
        } else if conflicted.contains(&author) {
            Some(ExclusionReason::CoAuthorConflict)
        } else if homonyms.contains(surname_of(&author)) {
            Some(ExclusionReason::Homonym)
        } else {
            None
        };
        match reason {
            Some(reason) => excluded.push(ExcludedAuthor {
                author,
                reason,
                publications: n,
            }),
            None => entries.push(RankedAuthor {
                author,
                publications: n,
            }),
        }
    }
    entries.sort_by(|a, b| {
        b.publications
            .cmp(&a.publications)
            .then_with(|| a.author.cmp(&b.author))
    });

    AuthorRanking {
        source,
        focal: focal_str,
        conflict_window,
        entries,
        excluded,
        warnings,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualCoverage {
    pub subject_id: String,
    pub record_size: usize,
    /// Share of the subject's record inside the approximation.
    pub share_in_approximation: f64,
    /// Per field, share of approximation members covered by the subject's key values.
    pub key_coverage_of_approximation: PerField<f64>,
    /// Share of approximation members covered in at least `min_fields` fields
    /// by the subject's key values.
    pub combined_coverage_of_approximation: f64,
}

fn check_record(corpus: &Corpus, record: &BTreeSet<String>) -> Result<(), AnalyticsError> {
    if record.is_empty() {
        return Err(AnalyticsError::EmptyRecord);
    }
    if let Some(id) = record.iter().find(|id| !corpus.contains(id)) {
        return Err(AnalyticsError::UnknownPubId(id.clone()));
    }
    Ok(())
}

pub fn mutual_coverage(
    corpus: &Corpus,
    subject_id: &str,
    subject_record: &BTreeSet<String>,
    subject_keys: &KeyValueSets,
    approximation: &SpecialtyApproximation,
) -> Result<MutualCoverage, AnalyticsError> {
    check_record(corpus, subject_record)?;
    let inside = subject_record
        .iter()
        .filter(|id| approximation.contains(id))
        .count();
    let members: Vec<_> = approximation
        .member_ids
        .iter()
        .filter_map(|id| corpus.get(id))
        .collect();
    let frac = |hits: usize| {
        if members.is_empty() {
            0.0
        } else {
            hits as f64 / members.len() as f64
        }
    };
    let bits: Vec<u8> = members
        .iter()
        .map(|p| subject_keys.coverage_bits(p))
        .collect();
    let key_coverage_of_approximation = PerField::from_fn(|f: FieldKind| {
        frac(bits.iter().filter(|&&b| b & f.bit() != 0).count())
    });
    let combined = frac(
        bits.iter()
            .filter(|b| b.count_ones() as u8 >= approximation.min_fields)
            .count(),
    );
    Ok(MutualCoverage {
        subject_id: subject_id.to_string(),
        record_size: subject_record.len(),
        share_in_approximation: inside as f64 / subject_record.len() as f64,
        key_coverage_of_approximation,
        combined_coverage_of_approximation: combined,
    })
}

/// Share of the record covered by `keys` in at least `min_fields` fields,
/// without building an approximation.
pub fn coverage_of_record_by_keys(
    corpus: &Corpus,
    record: &BTreeSet<String>,
    keys: &KeyValueSets,
    min_fields: u8,
) -> Result<f64, AnalyticsError> {
    check_record(corpus, record)?;
    let covered = record
        .iter()
        .filter_map(|id| corpus.get(id))
        .filter(|p| keys.coverage_bits(p).count_ones() as u8 >= min_fields)
        .count();
    Ok(covered as f64 / record.len() as f64)
}

/// All corpus publications listing `author`.
pub fn publications_of(corpus: &Corpus, author: &AuthorKey) -> BTreeSet<String> {
    corpus
        .pubs_with_author(author)
        .iter()
        .map(|&i| corpus.publication(i).pub_id.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateCoverage {
    pub author: String,
    pub sources: Vec<RankingSource>,
    pub coverage: MutualCoverage,
    pub key_warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReviewerReport {
    pub focal: String,
    pub conflict_window: YearWindow,
    pub top: usize,
    pub from_key_authors: AuthorRanking,
    pub from_approximation: AuthorRanking,
    pub candidates: Vec<CandidateCoverage>,
    pub warnings: Vec<String>,
}

pub struct ReviewerRequest<'a> {
    pub focal: &'a AuthorKey,
    pub conflict_window: YearWindow,
    pub top: usize,
    /// How each candidate's own seed record is built.
    pub seed_options: &'a SeedOptions,
    pub keys_config: &'a KeysConfig,
}

/// Both rankings truncated to `top`, plus mutual coverage for every listed candidate.
pub fn reviewer_report(
    corpus: &Corpus,
    keys: &KeyValueSets,
    approximation: &SpecialtyApproximation,
    request: &ReviewerRequest<'_>,
) -> ReviewerReport {
    let truncate = |mut r: AuthorRanking| {
        r.entries.truncate(request.top);
        r
    };
    let from_keys = truncate(rank_authors(
        RankingInput::KeyAuthors(&keys.authors),
        corpus,
        request.focal,
        request.conflict_window,
    ));
    let from_approx = truncate(rank_authors(
        RankingInput::Approximation(approximation),
        corpus,
        request.focal,
        request.conflict_window,
    ));

    let mut candidates: BTreeMap<String, Vec<RankingSource>> = BTreeMap::new();
    for r in [&from_keys, &from_approx] {
        for e in &r.entries {
            candidates.entry(e.author.clone()).or_default().push(r.source);
        }
    }

    let mut warnings: Vec<String> = from_keys.warnings.clone();
    let mut config = request.keys_config.clone();
    config.on_unsatisfiable = OnUnsatisfiable::Warn;
    let mut out = Vec::new();
    for (author, sources) in candidates {
        let Ok(key) = author.parse::<AuthorKey>() else {
            warnings.push(format!("cannot parse author key {author:?}"));
            continue;
        };
        let record = publications_of(corpus, &key);
        let (subject_keys, key_warnings) =
            match build_seed_record(corpus, &record, request.seed_options)
                .map_err(|e| e.to_string())
                .and_then(|seed| {
                    compute_all_keys(corpus, &seed, &config).map_err(|e| e.to_string())
                }) {
                Ok(k) => {
                    let w = k.warnings();
                    (k, w)
                }
                Err(e) => (KeyValueSets::empty(config.clone()), vec![e]),
            };
        match mutual_coverage(corpus, &author, &record, &subject_keys, approximation) {
            Ok(coverage) => out.push(CandidateCoverage {
                author,
                sources,
                coverage,
                key_warnings,
            }),
            Err(e) => warnings.push(format!("{author}: {e}")),
        }
    }

    ReviewerReport {
        focal: request.focal.to_string(),
        conflict_window: request.conflict_window,
        top: request.top,
        from_key_authors: from_keys,
        from_approximation: from_approx,
        candidates: out,
        warnings,
    }
}
