//! CSV and JSON renderings of pipeline results, and atomic file writes.
//!
//! All renderings are deterministic: rows follow sorted ids or explicit ranks.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytics::{AuthorRanking, CandidateCoverage};
use crate::approx::{CoverageHistogram, SpecialtyApproximation, YearWindow};
use crate::corpus::Corpus;
use crate::keys::{FieldKind, KeyValueSets, KeysConfig, PerField};
use crate::seed::SeedRecord;

/// Write via a sibling temporary file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

/// `field,rank,value,frequency,cumulative_coverage`
pub fn keys_csv(keys: &KeyValueSets) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "rank", "value", "frequency", "cumulative_coverage"])
        .expect("in-memory");
    for field in FieldKind::ALL {
        for (rank, e) in keys.get(field).entries.iter().enumerate() {
            w.write_record([
                field.as_str(),
                &(rank + 1).to_string(),
                &e.value,
                &e.frequency.to_string(),
                &format!("{:.6}", e.cumulative_coverage),
            ])
            .expect("in-memory");
        }
    }
    finish(w)
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// `pub_id,year,cell,title,author,reference,count`, members only, sorted by id.
pub fn approximation_csv(corpus: &Corpus, approx: &SpecialtyApproximation) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pub_id", "year", "cell", "title", "author", "reference", "count"])
        .expect("in-memory");
    for id in &approx.member_ids {
        let year = corpus.get(id).map(|p| p.year.to_string()).unwrap_or_default();
        let profile = &approx.profiles[id];
        let f = profile.flags;
        w.write_record([
            id.as_str(),
            &year,
            flag(f.has(FieldKind::Cell)),
            flag(f.has(FieldKind::TitleWord)),
            flag(f.has(FieldKind::Author)),
            flag(f.has(FieldKind::Reference)),
            &profile.count.to_string(),
        ])
        .expect("in-memory");
    }
    finish(w)
}

/// Member ids listed in an approximation CSV.
pub fn read_approximation_ids(csv_text: &str) -> Result<BTreeSet<String>, String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    let col = headers
        .iter()
        .position(|h| h == "pub_id")
        .ok_or("missing pub_id column")?;
    let mut ids = BTreeSet::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ids.insert(rec.get(col).unwrap_or_default().to_string());
    }
    Ok(ids)
}

/// `pub_id,provenance`
pub fn seed_csv(seed: &SeedRecord) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pub_id", "provenance"]).expect("in-memory");
    for (id, p) in &seed.provenance {
        w.write_record([id.as_str(), p.as_str()]).expect("in-memory");
    }
    finish(w)
}

/// `source,rank,author,publications,status`; ranked rows first, then exclusions.
pub fn ranking_csv(rankings: &[&AuthorRanking]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "rank", "author", "publications", "status"])
        .expect("in-memory");
    for r in rankings {
        let source = serde_json::to_value(r.source).expect("serializable");
        let source = source.as_str().unwrap_or_default();
        for (i, e) in r.entries.iter().enumerate() {
            w.write_record([
                source,
                &(i + 1).to_string(),
                &e.author,
                &e.publications.to_string(),
                "ranked",
            ])
            .expect("in-memory");
        }
        for e in &r.excluded {
            let reason = serde_json::to_value(e.reason).expect("serializable");
            w.write_record([
                source,
                "",
                &e.author,
                &e.publications.to_string(),
                reason.as_str().unwrap_or_default(),
            ])
            .expect("in-memory");
        }
    }
    finish(w)
}

/// One row per candidate with both directions of coverage.
pub fn mutual_coverage_csv(candidates: &[CandidateCoverage]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "author",
        "record_size",
        "share_in_approximation",
        "cell",
        "title",
        "author_field",
        "reference",
        "combined",
    ])
    .expect("in-memory");
    for c in candidates {
        let m = &c.coverage;
        let k = &m.key_coverage_of_approximation;
        w.write_record([
            c.author.clone(),
            m.record_size.to_string(),
            format!("{:.6}", m.share_in_approximation),
            format!("{:.6}", k.cell),
            format!("{:.6}", k.title),
            format!("{:.6}", k.author),
            format!("{:.6}", k.reference),
            format!("{:.6}", m.combined_coverage_of_approximation),
        ])
        .expect("in-memory");
    }
    finish(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub initial: usize,
    pub extended: usize,
    pub total: usize,
    pub unresolved_references: usize,
    pub filtered_out: usize,
}

impl SeedSummary {
    pub fn of(seed: &SeedRecord) -> Self {
        SeedSummary {
            initial: seed.initial_ids.len(),
            extended: seed.extended_ids.len(),
            total: seed.len(),
            unresolved_references: seed.unresolved_references.len(),
            filtered_out: seed.filtered_out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSummary {
    pub window: YearWindow,
    pub min_fields: u8,
    pub members: usize,
    pub in_window: usize,
    pub histogram: CoverageHistogram,
    pub subset_sizes: BTreeMap<String, usize>,
    pub keys_config: KeysConfig,
    pub key_counts: PerField<usize>,
    pub achieved_coverage: PerField<f64>,
    pub key_ratios: PerField<f64>,
    pub seed: SeedSummary,
    pub seed_histogram: CoverageHistogram,
    pub author_match_counts: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rederived_key_ratios: Option<PerField<f64>>,
}

impl ApproximationSummary {
    pub fn new(
        approx: &SpecialtyApproximation,
        keys: &KeyValueSets,
        seed: &SeedRecord,
        seed_histogram: CoverageHistogram,
    ) -> Self {
        ApproximationSummary {
            window: approx.window,
            min_fields: approx.min_fields,
            members: approx.len(),
            in_window: approx.in_window,
            histogram: CoverageHistogram::from_counts(approx.histogram),
            subset_sizes: approx.subset_labels(),
            keys_config: keys.config.clone(),
            key_counts: PerField::from_fn(|f| keys.get(f).len()),
            achieved_coverage: PerField::from_fn(|f| keys.get(f).achieved_coverage),
            key_ratios: keys.key_ratios(),
            seed: SeedSummary::of(seed),
            seed_histogram,
            author_match_counts: approx.author_match_counts.clone(),
            rederived_key_ratios: None,
        }
    }
}
