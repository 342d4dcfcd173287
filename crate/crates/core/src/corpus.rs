//! Bibliographic data model, JSON-lines ingestion and per-field inverted indexes.
//!
//! A [`Corpus`] is built once and never mutated afterwards. Every publication
//! is addressed internally by its position (`u32`) and every index maps a
//! field value to the ascending list of positions carrying that value.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Default minimum title-word length (in characters).
pub const DEFAULT_MIN_WORD_LEN: usize = 5;

const CELL_SEPARATOR: char = ';';

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    SchemaError { line: usize, reason: String },
    #[error("duplicate publication id {id:?} (lines {first_line} and {line})")]
    DuplicatePubId {
        id: String,
        first_line: usize,
        line: usize,
    },
    #[error("empty subject category set")]
    EmptyCategorySet,
    #[error("invalid author name: {0}")]
    InvalidAuthor(String),
}

/// Uppercase, strip diacritics and collapse internal whitespace.
pub fn normalize_surname(raw: &str) -> String {
    let folded: String = raw
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_uppercase)
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fold_initials(raw: &str) -> Vec<char> {
    raw.nfd()
        .filter(|c| c.is_alphabetic())
        .filter_map(|c| c.to_uppercase().next())
        .collect()
}

/// An author as printed in a byline: normalized surname plus initials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuthorName {
    pub surname: String,
    pub first_initial: char,
    pub extra_initials: Option<String>,
}

impl AuthorName {
    pub fn new(surname: &str, initials: &str) -> Result<Self, CorpusError> {
        let surname_norm = normalize_surname(surname);
        if surname_norm.is_empty() {
            return Err(CorpusError::InvalidAuthor(format!(
                "empty surname (initials {initials:?})"
            )));
        }
        let letters = fold_initials(initials);
        let Some((&first_initial, rest)) = letters.split_first() else {
            return Err(CorpusError::InvalidAuthor(format!(
                "{surname_norm}: no alphabetic first initial in {initials:?}"
            )));
        };
        let extra_initials = if rest.is_empty() {
            None
        } else {
            Some(rest.iter().collect())
        };
        Ok(Self {
            surname: surname_norm,
            first_initial,
            extra_initials,
        })
    }

    /// Surname + first initial, the identity used for author matching.
    pub fn key(&self) -> AuthorKey {
        AuthorKey {
            surname: self.surname.clone(),
            initial: self.first_initial,
        }
    }

    pub fn initials(&self) -> String {
        let mut s = String::new();
        s.push(self.first_initial);
        if let Some(extra) = &self.extra_initials {
            s.push_str(extra);
        }
        s
    }
}

/// Author identity: normalized surname and first initial, rendered `SURNAME I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuthorKey {
    surname: String,
    initial: char,
}

impl AuthorKey {
    pub fn new(surname: &str, initial: char) -> Result<Self, CorpusError> {
        let name = AuthorName::new(surname, &initial.to_string())?;
        Ok(name.key())
    }

    pub fn surname(&self) -> &str {
        &self.surname
    }

    pub fn initial(&self) -> char {
        self.initial
    }
}

impl fmt::Display for AuthorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.surname, self.initial)
    }
}

impl FromStr for AuthorKey {
    type Err = CorpusError;

    /// Accepts `SMITH J`, `Smith, J.` and `van der Berg J.P.`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || CorpusError::InvalidAuthor(format!("{s:?}: expected SURNAME I"));
        // The canonical `SURNAME I` form wins over a comma split so that
        // surnames containing commas round-trip through Display.
        let canonical = s
            .rsplit_once(char::is_whitespace)
            .filter(|(_, last)| last.trim_end_matches('.').chars().count() == 1);
        let (surname, initials) = match (canonical, s.rsplit_once(',')) {
            (Some(split), _) => split,
            (None, Some(split)) => split,
            (None, None) => s.rsplit_once(char::is_whitespace).ok_or_else(bad)?,
        };
        Ok(AuthorName::new(surname.trim_end().trim_end_matches(','), initials)?.key())
    }
}

impl Serialize for AuthorKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AuthorKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DocType {
    Article,
    Review,
    Letter,
    MeetingAbstract,
    EditorialMaterial,
    ProceedingsPaper,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 7] = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::MeetingAbstract,
        DocType::EditorialMaterial,
        DocType::ProceedingsPaper,
        DocType::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "Article",
            DocType::Review => "Review",
            DocType::Letter => "Letter",
            DocType::MeetingAbstract => "MeetingAbstract",
            DocType::EditorialMaterial => "EditorialMaterial",
            DocType::ProceedingsPaper => "ProceedingsPaper",
            DocType::Other => "Other",
        }
    }

    /// Case- and separator-insensitive; unrecognized labels map to `Other`.
    pub fn parse_lenient(label: &str) -> DocType {
        let squashed: String = label
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match squashed.as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "letter" => DocType::Letter,
            "meetingabstract" => DocType::MeetingAbstract,
            "editorialmaterial" => DocType::EditorialMaterial,
            "proceedingspaper" => DocType::ProceedingsPaper,
            _ => DocType::Other,
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for DocType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for DocType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(DocType::parse_lenient(&s))
    }
}

/// A partition cell: the exact combination of subject categories of a source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(String);

impl CellId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.0.split(CELL_SEPARATOR)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical cell of a category set. Order and repetition of the input do not
/// matter; blank codes are ignored.
pub fn derive_cell<I, S>(categories: I) -> Result<CellId, CorpusError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let set: BTreeSet<String> = categories
        .into_iter()
        .map(|c| c.as_ref().trim().to_string())
        .filter(|c| !c.is_empty())
        .collect();
    if set.is_empty() {
        return Err(CorpusError::EmptyCategorySet);
    }
    let mut joined = String::new();
    for (i, code) in set.iter().enumerate() {
        if i > 0 {
            joined.push(CELL_SEPARATOR);
        }
        joined.push_str(code);
    }
    Ok(CellId(joined))
}

/// Lowercase the title, split on every non-alphanumeric character and keep
/// the distinct tokens of at least `min_len` characters.
pub fn tokenize_title(title: &str, min_len: usize) -> BTreeSet<String> {
    title
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && t.chars().count() >= min_len)
        .map(str::to_string)
        .collect()
}

/// DOI-form reference identifier: `10.<registrant>/<suffix>`, optionally
/// prefixed with `doi:` or a doi.org URL.
pub fn is_doi(reference: &str) -> bool {
    let r = reference.trim();
    let lower = r.to_ascii_lowercase();
    let body = ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "doi:"]
        .iter()
        .find_map(|p| lower.strip_prefix(p).map(|_| &r[p.len()..]))
        .unwrap_or(r);
    let Some(rest) = body.strip_prefix("10.") else {
        return false;
    };
    let Some((registrant, suffix)) = rest.split_once('/') else {
        return false;
    };
    !registrant.is_empty()
        && registrant.starts_with(|c: char| c.is_ascii_digit())
        && registrant.chars().all(|c| c.is_ascii_digit() || c == '.')
        && !suffix.is_empty()
        && !suffix.chars().any(char::is_whitespace)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Publication {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub source_id: String,
    pub subject_categories: BTreeSet<String>,
    pub title: String,
    pub authors: Vec<AuthorName>,
    pub reprint_author_index: Option<usize>,
    pub references: BTreeSet<String>,
}

impl Publication {
    pub fn cell(&self) -> CellId {
        derive_cell(&self.subject_categories).expect("subject categories validated non-empty")
    }

    pub fn author_keys(&self) -> impl Iterator<Item = AuthorKey> + '_ {
        self.authors.iter().map(AuthorName::key)
    }

    pub fn reprint_author(&self) -> Option<&AuthorName> {
        self.reprint_author_index.and_then(|i| self.authors.get(i))
    }

    /// True when the record lists references and every one is DOI-form.
    pub fn has_doi_refs_only(&self) -> bool {
        !self.references.is_empty() && self.references.iter().all(|r| is_doi(r))
    }

    pub fn to_record(&self) -> PublicationRecord {
        PublicationRecord {
            id: self.pub_id.clone(),
            year: self.year,
            doc_type: self.doc_type.as_str().to_string(),
            source_id: self.source_id.clone(),
            subject_categories: self.subject_categories.iter().cloned().collect(),
            title: self.title.clone(),
            authors: self
                .authors
                .iter()
                .map(|a| AuthorRecord {
                    surname: a.surname.clone(),
                    initials: a.initials(),
                })
                .collect(),
            reprint_author: self.reprint_author_index,
            references: self.references.iter().cloned().collect(),
        }
    }
}

/// One line of the on-disk corpus format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub id: String,
    pub year: i32,
    pub doc_type: String,
    pub source_id: String,
    pub subject_categories: Vec<String>,
    pub title: String,
    pub authors: Vec<AuthorRecord>,
    pub reprint_author: Option<usize>,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRecord {
    pub surname: String,
    pub initials: String,
}

impl TryFrom<PublicationRecord> for Publication {
    type Error = String;

    fn try_from(rec: PublicationRecord) -> Result<Self, Self::Error> {
        let pub_id = rec.id.trim().to_string();
        if pub_id.is_empty() {
            return Err("empty id".into());
        }
        let subject_categories: BTreeSet<String> = rec
            .subject_categories
            .iter()
            .map(|c| c.trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if subject_categories.is_empty() {
            return Err("subject_categories must be non-empty".into());
        }
        let authors = rec
            .authors
            .iter()
            .enumerate()
            .map(|(i, a)| {
                AuthorName::new(&a.surname, &a.initials).map_err(|e| format!("author {i}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(idx) = rec.reprint_author {
            if idx >= authors.len() {
                return Err(format!(
                    "reprint_author {idx} out of range for {} authors",
                    authors.len()
                ));
            }
        }
        let mut references = BTreeSet::new();
        for r in &rec.references {
            let r = r.trim();
            if r.is_empty() {
                return Err("empty reference identifier".into());
            }
            if r == pub_id {
                return Err("publication references itself".into());
            }
            references.insert(r.to_string());
        }
        Ok(Publication {
            pub_id,
            year: rec.year,
            doc_type: DocType::parse_lenient(&rec.doc_type),
            source_id: rec.source_id,
            subject_categories,
            title: rec.title,
            authors,
            reprint_author_index: rec.reprint_author,
            references,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Abort on the first malformed line instead of collecting rejections.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug)]
pub struct IngestReport {
    pub corpus: Corpus,
    pub rejected: Vec<Rejection>,
    pub lines_read: usize,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.rejected.is_empty()
    }
}

pub fn ingest(path: &Path, options: IngestOptions) -> Result<IngestReport, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(BufReader::new(file), options).map_err(|e| match e {
        CorpusError::FileUnreadable { source, .. } => CorpusError::FileUnreadable {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

/// Parse JSON-lines from any reader. Blank lines are skipped; line numbers
/// are 1-based.
pub fn ingest_reader<R: BufRead>(
    reader: R,
    options: IngestOptions,
) -> Result<IngestReport, CorpusError> {
    let mut builder = CorpusBuilder::default();
    let mut rejected = Vec::new();
    let mut lines_read = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| CorpusError::FileUnreadable {
            path: String::new(),
            source,
        })?;
        lines_read = line_no;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<PublicationRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(Publication::try_from);
        match parsed {
            Ok(publication) => builder.push(publication, line_no)?,
            Err(reason) if options.strict => {
                return Err(CorpusError::SchemaError {
                    line: line_no,
                    reason,
                })
            }
            Err(reason) => rejected.push(Rejection {
                line: line_no,
                reason,
            }),
        }
    }
    Ok(IngestReport {
        corpus: builder.build(),
        rejected,
        lines_read,
    })
}

#[derive(Default)]
struct CorpusBuilder {
    pubs: Vec<Publication>,
    first_line: HashMap<String, usize>,
}

impl CorpusBuilder {
    fn push(&mut self, publication: Publication, line: usize) -> Result<(), CorpusError> {
        if let Some(&first_line) = self.first_line.get(&publication.pub_id) {
            return Err(CorpusError::DuplicatePubId {
                id: publication.pub_id,
                first_line,
                line,
            });
        }
        self.first_line.insert(publication.pub_id.clone(), line);
        self.pubs.push(publication);
        Ok(())
    }

    fn build(self) -> Corpus {
        Corpus::index(self.pubs)
    }
}

/// Immutable, indexed collection of publications.
#[derive(Debug)]
pub struct Corpus {
    pubs: Vec<Publication>,
    ids: HashMap<String, u32>,
    cells: Vec<CellId>,
    title_tokens: Vec<Vec<String>>,
    by_cell: HashMap<CellId, Vec<u32>>,
    by_title_word: HashMap<String, Vec<u32>>,
    by_author_key: HashMap<AuthorKey, Vec<u32>>,
    by_reference: HashMap<String, Vec<u32>>,
    by_year: BTreeMap<i32, Vec<u32>>,
}

impl Corpus {
    /// Index already-validated publications. Positions follow input order.
    pub fn from_publications(pubs: Vec<Publication>) -> Result<Self, CorpusError> {
        let mut builder = CorpusBuilder::default();
        for (i, p) in pubs.into_iter().enumerate() {
            if p.subject_categories.is_empty() {
                return Err(CorpusError::EmptyCategorySet);
            }
            builder.push(p, i + 1)?;
        }
        Ok(builder.build())
    }

    fn index(pubs: Vec<Publication>) -> Self {
        let mut ids = HashMap::with_capacity(pubs.len());
        let mut cells = Vec::with_capacity(pubs.len());
        let mut title_tokens = Vec::with_capacity(pubs.len());
        let mut by_cell: HashMap<CellId, Vec<u32>> = HashMap::new();
        let mut by_title_word: HashMap<String, Vec<u32>> = HashMap::new();
        let mut by_author_key: HashMap<AuthorKey, Vec<u32>> = HashMap::new();
        let mut by_reference: HashMap<String, Vec<u32>> = HashMap::new();
        let mut by_year: BTreeMap<i32, Vec<u32>> = BTreeMap::new();

        for (i, p) in pubs.iter().enumerate() {
            let idx = i as u32;
            ids.insert(p.pub_id.clone(), idx);
            let cell = p.cell();
            by_cell.entry(cell.clone()).or_default().push(idx);
            cells.push(cell);
            let tokens: Vec<String> = tokenize_title(&p.title, 1).into_iter().collect();
            for t in &tokens {
                by_title_word.entry(t.clone()).or_default().push(idx);
            }
            title_tokens.push(tokens);
            let keys: BTreeSet<AuthorKey> = p.author_keys().collect();
            for k in keys {
                by_author_key.entry(k).or_default().push(idx);
            }
            for r in &p.references {
                by_reference.entry(r.clone()).or_default().push(idx);
            }
            by_year.entry(p.year).or_default().push(idx);
        }

        Corpus {
            pubs,
            ids,
            cells,
            title_tokens,
            by_cell,
            by_title_word,
            by_author_key,
            by_reference,
            by_year,
        }
    }

    pub fn len(&self) -> usize {
        self.pubs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pubs.is_empty()
    }

    pub fn publications(&self) -> &[Publication] {
        &self.pubs
    }

    pub fn publication(&self, idx: u32) -> &Publication {
        &self.pubs[idx as usize]
    }

    pub fn get(&self, pub_id: &str) -> Option<&Publication> {
        self.position(pub_id).map(|i| self.publication(i))
    }

    pub fn position(&self, pub_id: &str) -> Option<u32> {
        self.ids.get(pub_id).copied()
    }

    pub fn contains(&self, pub_id: &str) -> bool {
        self.ids.contains_key(pub_id)
    }

    /// Cached cell of the publication at `idx`.
    pub fn cell_of(&self, idx: u32) -> &CellId {
        &self.cells[idx as usize]
    }

    /// Cached distinct title tokens (minimum length 1), sorted.
    pub fn title_tokens_of(&self, idx: u32) -> &[String] {
        &self.title_tokens[idx as usize]
    }

    pub fn pubs_with_cell(&self, cell: &str) -> &[u32] {
        self.by_cell
            .get(&CellId(cell.to_string()))
            .map_or(&[], Vec::as_slice)
    }

    pub fn pubs_with_title_word(&self, word: &str) -> &[u32] {
        self.by_title_word.get(word).map_or(&[], Vec::as_slice)
    }

    pub fn pubs_with_author(&self, key: &AuthorKey) -> &[u32] {
        self.by_author_key.get(key).map_or(&[], Vec::as_slice)
    }

    pub fn pubs_with_reference(&self, reference: &str) -> &[u32] {
        self.by_reference.get(reference).map_or(&[], Vec::as_slice)
    }

    pub fn pubs_in_year(&self, year: i32) -> &[u32] {
        self.by_year.get(&year).map_or(&[], Vec::as_slice)
    }

    /// Positions of publications with `start <= year <= end`, ascending.
    pub fn pubs_in_years(&self, start: i32, end: i32) -> Vec<u32> {
        if start > end {
            return Vec::new();
        }
        let mut out: Vec<u32> = self
            .by_year
            .range(start..=end)
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn year_span(&self) -> Option<(i32, i32)> {
        let first = *self.by_year.keys().next()?;
        let last = *self.by_year.keys().next_back()?;
        Some((first, last))
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellId, &[u32])> {
        self.by_cell.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn title_words(&self) -> impl Iterator<Item = (&str, &[u32])> {
        self.by_title_word
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn author_keys(&self) -> impl Iterator<Item = (&AuthorKey, &[u32])> {
        self.by_author_key.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn references(&self) -> impl Iterator<Item = (&str, &[u32])> {
        self.by_reference
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(id: &str, refs: &[&str]) -> String {
        serde_json::json!({
            "id": id,
            "year": 2011,
            "doc_type": "Article",
            "source_id": "J1",
            "subject_categories": ["BIOL", "ECOL"],
            "title": "Population genetics of island lizards",
            "authors": [{"surname": "Müller", "initials": "K.-H."}, {"surname": "Smith", "initials": "J"}],
            "reprint_author": 0,
            "references": refs,
        })
        .to_string()
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let report = ingest_reader("".as_bytes(), IngestOptions::default()).unwrap();
        assert!(report.corpus.is_empty());
        assert!(report.is_clean());
    }

    #[test]
    fn singleton_populates_every_index() {
        let text = line("P1", &["10.1000/x"]);
        let report = ingest_reader(text.as_bytes(), IngestOptions::default()).unwrap();
        let c = &report.corpus;
        assert_eq!(c.len(), 1);
        assert_eq!(c.pubs_with_cell("BIOL;ECOL"), &[0]);
        assert_eq!(c.pubs_with_title_word("lizards"), &[0]);
        assert_eq!(c.pubs_with_author(&"MULLER K".parse().unwrap()), &[0]);
        assert_eq!(c.pubs_with_reference("10.1000/x"), &[0]);
        assert_eq!(c.pubs_in_year(2011), &[0]);
    }

    #[test]
    fn duplicate_id_is_reported_with_lines() {
        let mut lines: Vec<String> = (1..=8).map(|i| line(&format!("P{i}"), &[])).collect();
        lines[6] = line("P3", &[]);
        let text = lines.join("\n");
        let err = ingest_reader(text.as_bytes(), IngestOptions::default()).unwrap_err();
        match err {
            CorpusError::DuplicatePubId {
                id,
                first_line,
                line,
            } => {
                assert_eq!(id, "P3");
                assert_eq!((first_line, line), (3, 7));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_are_collected_or_fatal() {
        let text = [
            line("P1", &[]),
            "{not json".to_string(),
            line("P2", &["P2"]),
            r#"{"id":"P3","year":2010,"doc_type":"Article","source_id":"J","subject_categories":[],"title":"t","authors":[],"reprint_author":null,"references":[]}"#.to_string(),
            r#"{"id":"P4","year":2010,"doc_type":"Article","source_id":"J","subject_categories":["A"],"title":"t","authors":[],"reprint_author":2,"references":[]}"#.to_string(),
        ]
        .join("\n");
        let report = ingest_reader(text.as_bytes(), IngestOptions::default()).unwrap();
        assert_eq!(report.corpus.len(), 1);
        let lines: Vec<usize> = report.rejected.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5]);

        let err = ingest_reader(text.as_bytes(), IngestOptions { strict: true }).unwrap_err();
        assert!(matches!(err, CorpusError::SchemaError { line: 2, .. }));
    }

    #[test]
    fn unknown_keys_ignored_and_doc_type_lenient() {
        let text = r#"{"id":"X","year":1999,"doc_type":"Meeting Abstract","source_id":"S","subject_categories":["Z"],"title":"","authors":[],"reprint_author":null,"references":[],"extra":{"a":1}}"#;
        let report = ingest_reader(text.as_bytes(), IngestOptions { strict: true }).unwrap();
        assert_eq!(report.corpus.publication(0).doc_type, DocType::MeetingAbstract);
    }

    #[test]
    fn cells_are_set_identities() {
        assert_eq!(derive_cell(["PHYS"]).unwrap().as_str(), "PHYS");
        assert_eq!(
            derive_cell(["BIOL", "ECOL"]).unwrap(),
            derive_cell(["ECOL", "BIOL"]).unwrap()
        );
        assert_ne!(
            derive_cell(["BIOL", "ECOL", "ZOOL"]).unwrap(),
            derive_cell(["BIOL", "ECOL"]).unwrap()
        );
        assert!(matches!(
            derive_cell(Vec::<String>::new()),
            Err(CorpusError::EmptyCategorySet)
        ));
    }

    #[test]
    fn title_tokenization_rules() {
        let got = tokenize_title("Bibliometric Approximation of a Scientific Specialty", 5);
        let want: BTreeSet<String> = ["bibliometric", "approximation", "scientific", "specialty"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(got, want);
        assert!(tokenize_title("A b c", 5).is_empty());
        let got = tokenize_title("second-order PDE model", 5);
        let want: BTreeSet<String> = ["second", "order", "model"]
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(got, want);
        assert!(tokenize_title("", 5).is_empty());
    }

    #[test]
    fn author_names_fold_case_and_diacritics() {
        let a = AuthorName::new("  Müller ", "k.-h.").unwrap();
        assert_eq!(a.surname, "MULLER");
        assert_eq!(a.first_initial, 'K');
        assert_eq!(a.extra_initials.as_deref(), Some("H"));
        assert_eq!(a.key(), AuthorName::new("MULLER", "Karl").unwrap().key());
        assert!(AuthorName::new("", "J").is_err());
        assert!(AuthorName::new("Smith", "-.").is_err());
        let k: AuthorKey = "van der Berg, J.P.".parse().unwrap();
        assert_eq!(k.to_string(), "VAN DER BERG J");
        assert_eq!("VAN DER BERG J".parse::<AuthorKey>().unwrap(), k);
        assert_eq!("Smith, J.".parse::<AuthorKey>().unwrap().to_string(), "SMITH J");
        let odd = AuthorName::new("Smith, Jr", "Q").unwrap().key();
        assert_eq!(odd.to_string().parse::<AuthorKey>().unwrap(), odd);
    }

    #[test]
    fn doi_detection() {
        assert!(is_doi("10.1016/j.joi.2017.12.003"));
        assert!(is_doi("doi:10.1000/182"));
        assert!(is_doi("https://doi.org/10.1000/182"));
        assert!(!is_doi("ISI:000123456"));
        assert!(!is_doi("10.abc/x"));
        assert!(!is_doi("10.1000/"));
    }

    #[test]
    fn record_round_trip() {
        let text = line("P1", &["10.1/a", "10.1/b"]);
        let report = ingest_reader(text.as_bytes(), IngestOptions { strict: true }).unwrap();
        let p = report.corpus.publication(0).clone();
        let back = Publication::try_from(p.to_record()).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn derive_cell_is_permutation_invariant(
            cats in proptest::collection::vec("[A-Z]{2,5}", 1..8),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let expected = derive_cell(&cats).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = cats.clone();
            for _ in 0..50 {
                shuffled.shuffle(&mut rng);
                prop_assert_eq!(&derive_cell(&shuffled).unwrap(), &expected);
            }
        }

        #[test]
        fn tokenize_is_idempotent(title in "\\PC{0,60}", min_len in 1usize..8) {
            let once = tokenize_title(&title, min_len);
            let joined = once.iter().cloned().collect::<Vec<_>>().join(" ");
            prop_assert_eq!(tokenize_title(&joined, min_len), once);
        }
    }
}
