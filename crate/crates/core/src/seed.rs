//! Seed record construction: the initial publication record plus, optionally,
//! the corpus publications it directly references.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, DocType};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeedError {
    #[error("initial record contains unknown publication id {0:?}")]
    UnknownPubId(String),
    #[error("initial record is empty")]
    EmptyInitialSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Provenance {
    Initial,
    AddedViaReference,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Initial => "initial",
            Provenance::AddedViaReference => "reference",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeedOptions {
    /// Add publications referenced by the initial record (one hop).
    pub extend: bool,
    /// Keep only these document types; `None` keeps everything.
    pub doc_types: Option<BTreeSet<DocType>>,
}

impl SeedOptions {
    pub fn extended() -> Self {
        SeedOptions {
            extend: true,
            doc_types: None,
        }
    }

    fn admits(&self, doc_type: DocType) -> bool {
        self.doc_types
            .as_ref()
            .is_none_or(|allowed| allowed.contains(&doc_type))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedRecord {
    pub initial_ids: BTreeSet<String>,
    pub extended_ids: BTreeSet<String>,
    pub all_ids: BTreeSet<String>,
    pub provenance: BTreeMap<String, Provenance>,
    /// Distinct references of the initial record that are not corpus ids.
    pub unresolved_references: BTreeSet<String>,
    /// Publications dropped by the document-type allowlist.
    pub filtered_out: usize,
    #[serde(skip)]
    positions: Vec<u32>,
}

impl SeedRecord {
    pub fn len(&self) -> usize {
        self.all_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all_ids.is_empty()
    }

    /// Corpus positions of all seed publications, in pub_id order.
    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    /// Share of the initial record's distinct references that resolve in the corpus.
    pub fn resolved_reference_share(&self, corpus: &Corpus) -> f64 {
        let resolved: BTreeSet<&str> = self
            .initial_ids
            .iter()
            .filter_map(|id| corpus.get(id))
            .flat_map(|p| p.references.iter().map(String::as_str))
            .filter(|r| corpus.contains(r))
            .collect();
        let total = resolved.len() + self.unresolved_references.len();
        if total == 0 {
            0.0
        } else {
            resolved.len() as f64 / total as f64
        }
    }
}

pub fn build_seed_record<I, S>(
    corpus: &Corpus,
    initial_ids: I,
    options: &SeedOptions,
) -> Result<SeedRecord, SeedError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut requested = BTreeSet::new();
    for id in initial_ids {
        let id = id.as_ref().trim();
        if id.is_empty() {
            continue;
        }
        if !corpus.contains(id) {
            return Err(SeedError::UnknownPubId(id.to_string()));
        }
        requested.insert(id.to_string());
    }
    if requested.is_empty() {
        return Err(SeedError::EmptyInitialSet);
    }

    let mut filtered_out = 0;
    let mut initial_ids = BTreeSet::new();
    for id in requested {
        let p = corpus.get(&id).expect("checked above");
        if options.admits(p.doc_type) {
            initial_ids.insert(id);
        } else {
            filtered_out += 1;
        }
    }
    if initial_ids.is_empty() {
        return Err(SeedError::EmptyInitialSet);
    }

    let mut extended_ids = BTreeSet::new();
    let mut unresolved_references = BTreeSet::new();
    let mut filtered_refs = BTreeSet::new();
    if options.extend {
        for id in &initial_ids {
            let p = corpus.get(id).expect("initial ids resolved");
            for r in &p.references {
                match corpus.get(r) {
                    Some(_) if initial_ids.contains(r) => {}
                    Some(target) => {
                        if options.admits(target.doc_type) {
                            extended_ids.insert(r.clone());
                        } else {
                            filtered_refs.insert(r.as_str());
                        }
                    }
                    None => {
                        unresolved_references.insert(r.clone());
                    }
                }
            }
        }
    }

    filtered_out += filtered_refs.len();

    let mut provenance = BTreeMap::new();
    for id in &initial_ids {
        provenance.insert(id.clone(), Provenance::Initial);
    }
    for id in &extended_ids {
        provenance.insert(id.clone(), Provenance::AddedViaReference);
    }
    let all_ids: BTreeSet<String> = initial_ids.union(&extended_ids).cloned().collect();
    let positions = all_ids
        .iter()
        .map(|id| corpus.position(id).expect("seed ids resolve"))
        .collect();

    Ok(SeedRecord {
        initial_ids,
        extended_ids,
        all_ids,
        provenance,
        unresolved_references,
        filtered_out,
        positions,
    })
}
