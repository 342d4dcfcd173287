//! Random fixtures and brute-force reference implementations shared by the
//! integration tests. Coverage and selection are recomputed here from their
//! definitions, without the library's indexes or incremental counters.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::Rng;
use specialty::corpus::is_doi;
use specialty::keys::{KeyValueSet, OnUnsatisfiable};
use specialty::{
    AuthorName, AuthorScope, Corpus, DocType, FieldKind, KeyValueSets, KeysConfig, Publication,
    YearWindow,
};

const CATEGORIES: [&str; 6] = ["ECOLOGY", "ZOOLOGY", "GENETICS", "BOTANY", "OCEANOGRAPHY", "OPTICS"];
const WORDS: [&str; 14] = [
    "lizard", "island", "thermal", "gecko", "genome", "of", "the", "niche", "Ecology", "plant",
    "body-size", "a", "evolution", "reef",
];
const SURNAMES: [&str; 8] = ["Smith", "Lee", "García", "Muller", "Kim", "Rossi", "Novak", "Sato"];
const INITIALS: [&str; 3] = ["J", "A", "KM"];

/// Corpus of `n` publications drawn from small pools so that values repeat
/// and homonyms, ties and missing fields occur.
pub fn random_corpus(rng: &mut impl Rng, n: usize) -> Corpus {
    let ids: Vec<String> = (0..n).map(|i| format!("P{i:03}")).collect();
    let external = ["10.1000/a", "10.1000/b", "10.2000/c", "ISI:0001", "ISI:0002", "10.3000/d"];
    let pubs = ids
        .iter()
        .map(|id| {
            let n_cats = rng.random_range(1..=2);
            let subject_categories: BTreeSet<String> = CATEGORIES[..rng.random_range(2..=6)]
                .choose_multiple(rng, n_cats)
                .map(|s| s.to_string())
                .collect();
            let n_words = rng.random_range(0..=6);
            let title = (0..n_words)
                .map(|_| *WORDS.choose(rng).unwrap())
                .collect::<Vec<_>>()
                .join(" ");
            let n_auth = rng.random_range(0..=3);
            let authors: Vec<AuthorName> = (0..n_auth)
                .map(|_| {
                    let s = SURNAMES[..rng.random_range(3..=8)].choose(rng).unwrap();
                    let i = if rng.random_bool(0.85) { INITIALS[0] } else { INITIALS.choose(rng).unwrap() };
                    AuthorName::new(s, i).unwrap()
                })
                .collect();
            let reprint_author_index = if !authors.is_empty() && rng.random_bool(0.8) {
                Some(rng.random_range(0..authors.len()))
            } else {
                None
            };
            let n_refs = rng.random_range(0..=4);
            let references = (0..n_refs)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        ids.choose(rng).unwrap().clone()
                    } else {
                        external.choose(rng).unwrap().to_string()
                    }
                })
                .filter(|r| r != id)
                .collect();
            Publication {
                pub_id: id.clone(),
                year: rng.random_range(2008..=2013),
                doc_type: DocType::Article,
                source_id: "J".into(),
                subject_categories,
                title,
                authors,
                reprint_author_index,
                references,
            }
        })
        .collect();
    Corpus::from_publications(pubs).unwrap()
}

pub fn random_config(rng: &mut impl Rng, threshold: f64) -> KeysConfig {
    KeysConfig {
        thresholds: specialty::PerField::splat(threshold),
        min_word_len: *[3usize, 5].choose(rng).unwrap(),
        required_title_words: rng.random_range(1..=2),
        author_scope: *[AuthorScope::Auto, AuthorScope::AllAuthors, AuthorScope::ReprintOnly]
            .choose(rng)
            .unwrap(),
        doi_only: rng.random_bool(0.3),
        on_unsatisfiable: OnUnsatisfiable::Error,
    }
}

pub fn title_tokens(title: &str, min_len: usize) -> BTreeSet<String> {
    title
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| w.chars().count() >= min_len)
        .map(String::from)
        .collect()
}

pub fn cell_of(p: &Publication) -> String {
    let cats: BTreeSet<&str> = p.subject_categories.iter().map(|s| s.trim()).collect();
    cats.into_iter().collect::<Vec<_>>().join(";")
}

/// Auto scope resolved against the seed the same way the definition states:
/// reprint authors only when at least 90% of the seed records one.
pub fn resolve_scope(seed: &[&Publication], scope: AuthorScope) -> AuthorScope {
    match scope {
        AuthorScope::Auto => {
            let with = seed.iter().filter(|p| p.reprint_author_index.is_some()).count();
            if !seed.is_empty() && with as f64 / seed.len() as f64 >= 0.9 {
                AuthorScope::ReprintOnly
            } else {
                AuthorScope::AllAuthors
            }
        }
        s => s,
    }
}

fn scoped_authors(p: &Publication, scope: AuthorScope) -> BTreeSet<String> {
    match scope {
        AuthorScope::ReprintOnly => p
            .reprint_author_index
            .map(|i| p.authors[i].key().to_string())
            .into_iter()
            .collect(),
        _ => p.authors.iter().map(|a| a.key().to_string()).collect(),
    }
}

/// Field values of one publication as used for coverage.
pub fn values_of(p: &Publication, field: FieldKind, config: &KeysConfig, scope: AuthorScope) -> BTreeSet<String> {
    match field {
        FieldKind::Cell => BTreeSet::from([cell_of(p)]),
        FieldKind::TitleWord => title_tokens(&p.title, config.min_word_len),
        FieldKind::Author => scoped_authors(p, scope),
        FieldKind::Reference => p
            .references
            .iter()
            .filter(|r| !config.doi_only || is_doi(r))
            .cloned()
            .collect(),
    }
}

pub fn covered_by(
    p: &Publication,
    field: FieldKind,
    keys: &BTreeSet<String>,
    config: &KeysConfig,
    scope: AuthorScope,
) -> bool {
    let hits = values_of(p, field, config, scope)
        .iter()
        .filter(|v| keys.contains(*v))
        .count();
    let needed = if field == FieldKind::TitleWord {
        config.required_title_words
    } else {
        1
    };
    hits >= needed
}

/// Result of the reference greedy: ranked (value, frequency) pairs and coverage.
#[derive(Debug, PartialEq)]
pub struct OracleKeys {
    pub ranked: Vec<(String, usize)>,
    pub coverage: f64,
}

/// Frequency-greedy selection recomputed by brute force: for each distinct
/// frequency level from the top, take every value at or above it and rescan
/// the seed; the first level meeting the threshold wins.
pub fn brute_greedy(
    seed: &[&Publication],
    field: FieldKind,
    config: &KeysConfig,
) -> Option<OracleKeys> {
    let scope = resolve_scope(seed, config.author_scope);
    let threshold = config.thresholds[field];
    let mut freq: BTreeMap<String, usize> = BTreeMap::new();
    for p in seed {
        for v in values_of(p, field, config, scope) {
            *freq.entry(v).or_insert(0) += 1;
        }
    }
    if field == FieldKind::Author {
        let mut initials: BTreeMap<String, BTreeSet<char>> = BTreeMap::new();
        for p in seed {
            for a in &p.authors {
                initials.entry(a.surname.clone()).or_default().insert(a.first_initial);
            }
        }
        freq.retain(|k, _| {
            let surname = k.rsplit_once(' ').unwrap().0;
            initials.get(surname).is_none_or(|s| s.len() <= 1)
        });
    }
    let mut levels: Vec<usize> = freq.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
    levels.reverse();
    let n = seed.len();
    for level in levels {
        let chosen: BTreeSet<String> = freq
            .iter()
            .filter(|(_, &f)| f >= level)
            .map(|(v, _)| v.clone())
            .collect();
        let covered = seed
            .iter()
            .filter(|p| covered_by(p, field, &chosen, config, scope))
            .count();
        if covered as f64 / n as f64 >= threshold {
            let mut ranked: Vec<(String, usize)> = chosen.into_iter().map(|v| {
                let f = freq[&v];
                (v, f)
            }).collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            return Some(OracleKeys {
                ranked,
                coverage: covered as f64 / n as f64,
            });
        }
    }
    None
}

pub fn key_set(set: &KeyValueSet) -> BTreeSet<String> {
    set.values().map(String::from).collect()
}

/// Coverage bits of one publication from the key-value definitions alone.
pub fn oracle_bits(p: &Publication, keys: &KeyValueSets) -> u8 {
    let scope = keys.config.author_scope;
    FieldKind::ALL
        .iter()
        .filter(|&&f| covered_by(p, f, &key_set(keys.get(f)), &keys.config, scope))
        .fold(0, |acc, f| acc | f.bit())
}

#[derive(Debug, PartialEq)]
pub struct OracleApprox {
    pub members: BTreeSet<String>,
    pub histogram: [usize; 5],
    pub subsets: [usize; 16],
}

/// Exhaustive per-publication evaluation of the combination rule.
pub fn oracle_approximation(
    corpus: &Corpus,
    keys: &KeyValueSets,
    window: YearWindow,
    min_fields: u8,
) -> OracleApprox {
    let mut out = OracleApprox {
        members: BTreeSet::new(),
        histogram: [0; 5],
        subsets: [0; 16],
    };
    for p in corpus.publications() {
        if p.year < window.start || p.year > window.end {
            continue;
        }
        let bits = oracle_bits(p, keys);
        out.histogram[bits.count_ones() as usize] += 1;
        out.subsets[bits as usize] += 1;
        if bits.count_ones() as u8 >= min_fields {
            out.members.insert(p.pub_id.clone());
        }
    }
    out
}

/// Random key-value sets drawn from the values present in the corpus. Under
/// the DOI-only flag only DOI references are eligible, as in selection.
pub fn random_keys(rng: &mut impl Rng, corpus: &Corpus, config: KeysConfig) -> KeyValueSets {
    let mut pick = |all: Vec<String>, field: FieldKind| {
        let chosen: Vec<String> = all.into_iter().filter(|_| rng.random_bool(0.5)).collect();
        KeyValueSet::with_values(field, 0.8, chosen)
    };
    let cells = corpus.cells().map(|(c, _)| c.to_string()).collect();
    let words = corpus.title_words().map(|(w, _)| w.to_string()).collect();
    let authors = corpus.author_keys().map(|(a, _)| a.to_string()).collect();
    let refs = corpus
        .references()
        .map(|(r, _)| r.to_string())
        .filter(|r| !config.doi_only || is_doi(r))
        .collect();
    KeyValueSets {
        cells: pick(cells, FieldKind::Cell),
        title_words: pick(words, FieldKind::TitleWord),
        authors: pick(authors, FieldKind::Author),
        references: pick(refs, FieldKind::Reference),
        config,
    }
}
