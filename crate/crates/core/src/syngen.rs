//! Synthetic corpora with planted specialties and ground-truth labels.
//!
//! Each specialty owns its pools of cells, title words, authors and
//! reference targets. Cells follow a geometric decay, title words and
//! reference targets a discrete power law, author productivities Lotka's
//! inverse-power law. A publication may draw individual fields from another
//! specialty's pools (cross contamination).

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::SpecialtyApproximation;
use crate::corpus::{AuthorName, Corpus, DocType, Publication};

#[derive(Debug, Error)]
pub enum SyngenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SyngenError + '_ {
    move |source| SyngenError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        CountRange { min, max }
    }

    fn sample(self, rng: &mut impl Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprintAuthorRule {
    First,
    Last,
    /// The co-author with the largest assigned productivity.
    #[default]
    MostProductive,
    /// No reprint author recorded.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpecialtyParams {
    pub name: String,
    pub n_publications: usize,
    pub n_core_cells: usize,
    /// Share of publications in the first cell; each next cell keeps the same
    /// share of what remains.
    pub cell_concentration: f64,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub lotka_exponent: f64,
    /// Largest productivity an author can be assigned.
    pub max_productivity: usize,
    pub n_reference_targets: usize,
    pub reference_skew_exponent: f64,
    pub title_length: CountRange,
    pub refs_per_pub: CountRange,
    pub authors_per_pub: CountRange,
    pub reprint_author_rule: ReprintAuthorRule,
}

impl Default for SpecialtyParams {
    fn default() -> Self {
        SpecialtyParams {
            name: "S0".into(),
            n_publications: 2000,
            n_core_cells: 20,
            cell_concentration: 0.5,
            vocab_size: 1000,
            zipf_exponent: 1.0,
            lotka_exponent: 2.0,
            max_productivity: 300,
            n_reference_targets: 2000,
            reference_skew_exponent: 1.0,
            title_length: CountRange::new(8, 14),
            refs_per_pub: CountRange::new(10, 30),
            authors_per_pub: CountRange::new(1, 6),
            reprint_author_rule: ReprintAuthorRule::MostProductive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub rng_seed: u64,
    pub specialties: Vec<SpecialtyParams>,
    /// Per-field probability that a publication draws that field from another
    /// specialty's pools.
    pub cross_contamination: f64,
    /// Probability that a publication's contamination is confined to at most
    /// one field. Marginal per-field rates are unchanged; requires
    /// `4 * cross_contamination <= 1` when positive.
    pub field_coupling: f64,
    pub first_year: i32,
    pub last_year: i32,
    /// Probability that a reference cites an earlier publication of the corpus.
    pub internal_reference_prob: f64,
    /// Share of external reference targets identified without a DOI.
    pub non_doi_reference_share: f64,
    /// Probability that a title word comes from the shared vocabulary.
    pub general_word_prob: f64,
    pub general_vocab_size: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            rng_seed: 1,
            specialties: vec![SpecialtyParams::default()],
            cross_contamination: 0.0,
            field_coupling: 0.0,
            first_year: 2008,
            last_year: 2012,
            internal_reference_prob: 0.1,
            non_doi_reference_share: 0.1,
            general_word_prob: 0.1,
            general_vocab_size: 500,
        }
    }
}

impl GeneratorConfig {
    /// `n` default specialties named S0..S{n-1}, each with `n_publications`.
    pub fn with_specialties(rng_seed: u64, n: usize, n_publications: usize) -> Self {
        GeneratorConfig {
            rng_seed,
            specialties: (0..n)
                .map(|i| SpecialtyParams {
                    name: format!("S{i}"),
                    n_publications,
                    ..SpecialtyParams::default()
                })
                .collect(),
            ..GeneratorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SyngenError> {
        let bad = |m: String| Err(SyngenError::InvalidConfig(m));
        if self.specialties.is_empty() {
            return bad("at least one specialty is required".into());
        }
        let probs = [
            ("cross_contamination", self.cross_contamination),
            ("field_coupling", self.field_coupling),
            ("internal_reference_prob", self.internal_reference_prob),
            ("non_doi_reference_share", self.non_doi_reference_share),
            ("general_word_prob", self.general_word_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.cross_contamination > 0.0 && self.specialties.len() < 2 {
            return bad("cross_contamination needs at least two specialties".into());
        }
        if self.field_coupling > 0.0 && 4.0 * self.cross_contamination > 1.0 {
            return bad("field_coupling requires cross_contamination <= 0.25".into());
        }
        if self.first_year > self.last_year {
            return bad(format!(
                "first_year {} after last_year {}",
                self.first_year, self.last_year
            ));
        }
        if self.general_word_prob > 0.0 && self.general_vocab_size == 0 {
            return bad("general_vocab_size must be positive".into());
        }
        let mut names = BTreeSet::new();
        for s in &self.specialties {
            if s.name.trim().is_empty() || !names.insert(s.name.as_str()) {
                return bad(format!("specialty names must be unique and non-empty: {:?}", s.name));
            }
            let counts = [
                ("n_publications", s.n_publications),
                ("n_core_cells", s.n_core_cells),
                ("vocab_size", s.vocab_size),
                ("max_productivity", s.max_productivity),
                ("n_reference_targets", s.n_reference_targets),
            ];
            for (name, n) in counts {
                if n == 0 {
                    return bad(format!("{}: {name} must be positive", s.name));
                }
            }
            let exps = [
                ("zipf_exponent", s.zipf_exponent),
                ("lotka_exponent", s.lotka_exponent),
                ("reference_skew_exponent", s.reference_skew_exponent),
            ];
            for (name, e) in exps {
                if !(e > 0.0 && e.is_finite()) {
                    return bad(format!("{}: {name} must be positive", s.name));
                }
            }
            if !(s.cell_concentration > 0.0 && s.cell_concentration < 1.0) {
                return bad(format!("{}: cell_concentration must be in (0, 1)", s.name));
            }
            let ranges = [
                ("title_length", s.title_length),
                ("refs_per_pub", s.refs_per_pub),
                ("authors_per_pub", s.authors_per_pub),
            ];
            for (name, r) in ranges {
                if r.min > r.max || r.max == 0 {
                    return bad(format!("{}: {name} range {}..{} is empty", s.name, r.min, r.max));
                }
            }
            if s.authors_per_pub.min == 0 {
                return bad(format!("{}: authors_per_pub.min must be positive", s.name));
            }
        }
        Ok(())
    }
}

/// Rank sampler with weights `(rank + 1)^-exponent`, ranks starting at 0.
#[derive(Debug, Clone)]
pub struct PowerLaw {
    index: WeightedIndex<f64>,
}

impl PowerLaw {
    pub fn new(n: usize, exponent: f64) -> Self {
        let weights = (1..=n).map(|r| (r as f64).powf(-exponent));
        PowerLaw {
            index: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        self.index.sample(rng)
    }
}

/// Rank sampler with weights `(1 - concentration)^rank`.
fn geometric(n: usize, concentration: f64) -> WeightedIndex<f64> {
    let q = 1.0 - concentration;
    WeightedIndex::new((0..n).map(|k| q.powi(k as i32))).expect("positive weights")
}

/// Lotka productivity sampler over `1..=max`: P(n) proportional to n^-exponent.
#[derive(Debug, Clone)]
pub struct Lotka {
    law: PowerLaw,
}

impl Lotka {
    pub fn new(max_productivity: usize, exponent: f64) -> Self {
        Lotka {
            law: PowerLaw::new(max_productivity, exponent),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        self.law.sample(rng) + 1
    }
}

const SYLLABLES: [&str; 20] = [
    "ba", "ce", "di", "fo", "gu", "ka", "le", "mi", "no", "pu", "ra", "se", "ti", "vo", "zu", "ha",
    "je", "ni", "lo", "mu",
];

/// Pronounceable word for `n`, at least `min_syllables` long; distinct `n`
/// give distinct words.
fn syllable_word(mut n: usize, min_syllables: usize) -> String {
    let mut parts = Vec::new();
    loop {
        parts.push(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
        if n == 0 && parts.len() >= min_syllables {
            break;
        }
    }
    parts.concat()
}

fn capitalize(word: &str) -> String {
    let mut c = word.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

const FILLERS: [&str; 6] = ["of", "and", "in", "the", "on", "for"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Field {
    Cell,
    Title,
    Author,
    Reference,
}

#[derive(Debug, Clone)]
struct Author {
    name: AuthorName,
    productivity: usize,
}

/// Authors of one specialty, created on demand. Each author contributes
/// `productivity` slots to the deck; slots are dealt in random order.
struct AuthorPool {
    specialty: usize,
    lotka: Lotka,
    authors: Vec<Author>,
    deck: Vec<usize>,
    used: Vec<bool>,
}

impl AuthorPool {
    fn new(specialty: usize, params: &SpecialtyParams) -> Self {
        AuthorPool {
            specialty,
            lotka: Lotka::new(params.max_productivity, params.lotka_exponent),
            authors: Vec::new(),
            deck: Vec::new(),
            used: Vec::new(),
        }
    }

    fn add_author(&mut self, rng: &mut ChaCha8Rng, n_specialties: usize) {
        let id = self.authors.len();
        let surname = capitalize(&syllable_word(id * n_specialties + self.specialty, 3));
        let initial = (b'A' + rng.random_range(0..26u8)) as char;
        let productivity = self.lotka.sample(rng);
        let name = AuthorName::new(&surname, &initial.to_string()).expect("generated name");
        self.deck.extend(std::iter::repeat_n(id, productivity));
        self.authors.push(Author { name, productivity });
        self.used.push(false);
    }

    /// `n` distinct authors for one publication.
    fn deal(&mut self, n: usize, rng: &mut ChaCha8Rng, n_specialties: usize) -> Vec<usize> {
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        let mut rejected = Vec::new();
        while chosen.len() < n {
            if self.deck.is_empty() {
                self.add_author(rng, n_specialties);
            }
            let i = rng.random_range(0..self.deck.len());
            let a = self.deck.swap_remove(i);
            if chosen.contains(&a) {
                rejected.push(a);
            } else {
                chosen.push(a);
            }
        }
        self.deck.extend(rejected);
        for &a in &chosen {
            self.used[a] = true;
        }
        chosen
    }
}

struct SpecialtyState {
    params: SpecialtyParams,
    cells: Vec<BTreeSet<String>>,
    cell_sampler: WeightedIndex<f64>,
    words: Vec<String>,
    word_sampler: PowerLaw,
    targets: Vec<String>,
    target_sampler: PowerLaw,
    authors: AuthorPool,
    /// Ids of this specialty's publications generated so far.
    published: Vec<String>,
}

impl SpecialtyState {
    fn new(
        index: usize,
        params: &SpecialtyParams,
        n_specialties: usize,
        non_doi_share: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let tag = params.name.to_uppercase();
        let cells = (0..params.n_core_cells)
            .map(|k| {
                let mut c = BTreeSet::from([format!("{tag} TOPIC {k}")]);
                if k % 3 == 2 {
                    c.insert(format!("MULTIDISCIPLINARY {}", k % 4));
                }
                c
            })
            .collect();
        let words = (0..params.vocab_size)
            .map(|i| syllable_word(i * n_specialties + index, 3))
            .collect();
        let targets = (0..params.n_reference_targets)
            .map(|r| {
                if rng.random_bool(non_doi_share) {
                    format!("WOS:{:03}{:09}", index, r)
                } else {
                    format!("10.{}/ref.{}", 5000 + index, r)
                }
            })
            .collect();
        SpecialtyState {
            cells,
            cell_sampler: geometric(params.n_core_cells, params.cell_concentration),
            words,
            word_sampler: PowerLaw::new(params.vocab_size, params.zipf_exponent),
            targets,
            target_sampler: PowerLaw::new(params.n_reference_targets, params.reference_skew_exponent),
            authors: AuthorPool::new(index, params),
            published: Vec::new(),
            params: params.clone(),
        }
    }
}

/// Core value pools of one specialty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecialtyPools {
    pub cells: Vec<String>,
    pub title_words: Vec<String>,
    pub authors: Vec<String>,
    pub reference_targets: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub labels: BTreeMap<String, String>,
    pub pools: BTreeMap<String, SpecialtyPools>,
}

#[derive(Serialize, Deserialize)]
struct LabelLine {
    id: String,
    specialty: String,
}

impl GroundTruth {
    pub fn label(&self, pub_id: &str) -> Option<&str> {
        self.labels.get(pub_id).map(String::as_str)
    }

    pub fn members_of<'a>(&'a self, specialty: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.labels
            .iter()
            .filter(move |(_, s)| s.as_str() == specialty)
            .map(|(id, _)| id.as_str())
    }

    pub fn specialties(&self) -> BTreeSet<&str> {
        self.labels.values().map(String::as_str).collect()
    }

    /// JSON lines of `{"id", "specialty"}`, sorted by id.
    pub fn labels_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, specialty) in &self.labels {
            let line = serde_json::to_string(&LabelLine {
                id: id.clone(),
                specialty: specialty.clone(),
            })
            .expect("serializable");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn write_labels(&self, path: &Path) -> Result<(), SyngenError> {
        std::fs::write(path, self.labels_jsonl()).map_err(io_err(path))
    }

    pub fn read_labels(path: &Path) -> Result<GroundTruth, SyngenError> {
        let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
        let mut labels = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |reason: String| SyngenError::Parse {
                path: path.display().to_string(),
                line: i + 1,
                reason,
            };
            let l: LabelLine = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
            if labels.insert(l.id.clone(), l.specialty).is_some() {
                return Err(parse(format!("publication {:?} labeled twice", l.id)));
            }
        }
        Ok(GroundTruth {
            labels,
            pools: BTreeMap::new(),
        })
    }
}

/// Generated publications (sorted by year, then id) with their labels.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub publications: Vec<Publication>,
    pub ground_truth: GroundTruth,
}

impl GeneratedCorpus {
    pub fn corpus(&self) -> Corpus {
        Corpus::from_publications(self.publications.clone()).expect("generated ids are unique")
    }

    pub fn corpus_jsonl(&self) -> String {
        let mut out = String::new();
        for p in &self.publications {
            out.push_str(&serde_json::to_string(&p.to_record()).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn pools_json(&self) -> String {
        serde_json::to_string_pretty(&self.ground_truth.pools).expect("serializable") + "\n"
    }

    pub fn write_corpus(&self, path: &Path) -> Result<(), SyngenError> {
        std::fs::write(path, self.corpus_jsonl()).map_err(io_err(path))
    }

    pub fn write_pools(&self, path: &Path) -> Result<(), SyngenError> {
        std::fs::write(path, self.pools_json()).map_err(io_err(path))
    }
}

fn contaminated_fields(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> [bool; 4] {
    let c = config.cross_contamination;
    let mut out = [false; 4];
    if c == 0.0 {
        return out;
    }
    if rng.random_bool(config.field_coupling) {
        let u: f64 = rng.random();
        if u < 4.0 * c {
            out[((u / c) as usize).min(3)] = true;
        }
    } else {
        for f in &mut out {
            *f = rng.random_bool(c);
        }
    }
    out
}

fn other_specialty(own: usize, n: usize, rng: &mut ChaCha8Rng) -> usize {
    let k = rng.random_range(0..n - 1);
    if k >= own {
        k + 1
    } else {
        k
    }
}

fn doc_type(rng: &mut ChaCha8Rng) -> DocType {
    match rng.random_range(0..100) {
        0..=84 => DocType::Article,
        85..=92 => DocType::Review,
        93..=96 => DocType::ProceedingsPaper,
        _ => DocType::Letter,
    }
}

/// Generate a corpus. Identical configs produce identical output.
pub fn generate(config: &GeneratorConfig) -> Result<GeneratedCorpus, SyngenError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let n_spec = config.specialties.len();
    let mut states: Vec<SpecialtyState> = config
        .specialties
        .iter()
        .enumerate()
        .map(|(i, p)| SpecialtyState::new(i, p, n_spec, config.non_doi_reference_share, &mut rng))
        .collect();
    let general_words: Vec<String> = (0..config.general_vocab_size)
        .map(|g| syllable_word(1_000_000 + g, 3))
        .collect();
    let general_sampler =
        (config.general_vocab_size > 0).then(|| PowerLaw::new(config.general_vocab_size, 1.0));

    // Interleave specialties so that publication order follows time.
    let mut schedule: Vec<(f64, usize, usize)> = Vec::new();
    for (s, p) in config.specialties.iter().enumerate() {
        for i in 0..p.n_publications {
            schedule.push(((i as f64 + 0.5) / p.n_publications as f64, s, i));
        }
    }
    schedule.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let span = (config.last_year - config.first_year + 1) as f64;
    let mut publications = Vec::with_capacity(schedule.len());
    let mut labels = BTreeMap::new();
    for (pos, s, i) in schedule {
        let year = config.first_year + ((pos * span) as i32).min(config.last_year - config.first_year);
        let pub_id = format!("10.{}/{}.{:06}", 9000 + s, states[s].params.name.to_lowercase(), i);
        let contaminated = contaminated_fields(config, &mut rng);
        let source = |f: Field, rng: &mut ChaCha8Rng| {
            if contaminated[f as usize] {
                other_specialty(s, n_spec, rng)
            } else {
                s
            }
        };

        let cs = source(Field::Cell, &mut rng);
        let cell_rank = states[cs].cell_sampler.sample(&mut rng);
        let subject_categories = states[cs].cells[cell_rank].clone();
        let source_id = format!(
            "{} J{}{}",
            states[cs].params.name.to_uppercase(),
            cell_rank,
            rng.random_range(0..3)
        );

        let ts = source(Field::Title, &mut rng);
        let n_words = states[s].params.title_length.sample(&mut rng);
        let mut words = Vec::with_capacity(n_words * 2);
        for w in 0..n_words {
            let word = match &general_sampler {
                Some(g) if rng.random_bool(config.general_word_prob) => {
                    general_words[g.sample(&mut rng)].clone()
                }
                _ => states[ts].words[states[ts].word_sampler.sample(&mut rng)].clone(),
            };
            if w > 0 && rng.random_bool(0.3) {
                words.push(FILLERS[rng.random_range(0..FILLERS.len())].to_string());
            }
            words.push(word);
        }
        let title = capitalize(&words.join(" "));

        let as_ = source(Field::Author, &mut rng);
        let n_authors = states[s].params.authors_per_pub.sample(&mut rng);
        let dealt = states[as_].authors.deal(n_authors, &mut rng, n_spec);
        let pool = &states[as_].authors;
        let authors: Vec<AuthorName> = dealt.iter().map(|&a| pool.authors[a].name.clone()).collect();
        let reprint_author_index = match states[s].params.reprint_author_rule {
            ReprintAuthorRule::First => Some(0),
            ReprintAuthorRule::Last => Some(authors.len() - 1),
            ReprintAuthorRule::Absent => None,
            ReprintAuthorRule::MostProductive => dealt
                .iter()
                .enumerate()
                .max_by(|(i, &a), (j, &b)| {
                    pool.authors[a]
                        .productivity
                        .cmp(&pool.authors[b].productivity)
                        .then(j.cmp(i))
                })
                .map(|(i, _)| i),
        };

        let rs = source(Field::Reference, &mut rng);
        let n_refs = states[s].params.refs_per_pub.sample(&mut rng);
        let mut references = BTreeSet::new();
        for _ in 0..n_refs {
            let earlier = &states[rs].published;
            if !earlier.is_empty() && rng.random_bool(config.internal_reference_prob) {
                references.insert(earlier[rng.random_range(0..earlier.len())].clone());
            } else {
                let r = states[rs].target_sampler.sample(&mut rng);
                references.insert(states[rs].targets[r].clone());
            }
        }

        states[s].published.push(pub_id.clone());
        labels.insert(pub_id.clone(), states[s].params.name.clone());
        publications.push(Publication {
            pub_id,
            year,
            doc_type: doc_type(&mut rng),
            source_id,
            subject_categories,
            title,
            authors,
            reprint_author_index,
            references,
        });
    }
    publications.sort_by(|a, b| a.year.cmp(&b.year).then_with(|| a.pub_id.cmp(&b.pub_id)));

    let pools = states
        .iter()
        .map(|st| {
            let realized: BTreeSet<String> = st
                .authors
                .authors
                .iter()
                .zip(&st.authors.used)
                .filter(|(_, &u)| u)
                .map(|(a, _)| a.name.key().to_string())
                .collect();
            let pools = SpecialtyPools {
                cells: st
                    .cells
                    .iter()
                    .map(|c| c.iter().cloned().collect::<Vec<_>>().join(";"))
                    .collect(),
                title_words: st.words.clone(),
                authors: realized.into_iter().collect(),
                reference_targets: st.targets.clone(),
            };
            (st.params.name.clone(), pools)
        })
        .collect();

    Ok(GeneratedCorpus {
        publications,
        ground_truth: GroundTruth { labels, pools },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub target: String,
    pub precision: f64,
    pub recall: f64,
    pub members: usize,
    pub members_in_target: usize,
    pub target_in_window: usize,
    pub warnings: Vec<String>,
}

/// Precision and recall of an approximation against the planted labels.
/// Recall counts target publications inside the approximation window.
pub fn evaluate_recovery(
    corpus: &Corpus,
    approximation: &SpecialtyApproximation,
    ground_truth: &GroundTruth,
    target: &str,
) -> Result<RecoveryReport, SyngenError> {
    if !ground_truth.labels.values().any(|s| s == target) {
        return Err(SyngenError::LabelMismatch(format!(
            "no publication labeled {target:?}"
        )));
    }
    let mut members_in_target = 0;
    for id in &approximation.member_ids {
        match ground_truth.label(id) {
            Some(s) if s == target => members_in_target += 1,
            Some(_) => {}
            None => {
                return Err(SyngenError::LabelMismatch(format!(
                    "member {id:?} has no ground-truth label"
                )))
            }
        }
    }
    let mut target_in_window = 0;
    for id in ground_truth.members_of(target) {
        let p = corpus.get(id).ok_or_else(|| {
            SyngenError::LabelMismatch(format!("labeled publication {id:?} not in corpus"))
        })?;
        if approximation.window.contains(p.year) {
            target_in_window += 1;
        }
    }
    let mut warnings = Vec::new();
    let precision = if approximation.is_empty() {
        warnings.push("approximation is empty; precision reported as 0".to_string());
        0.0
    } else {
        members_in_target as f64 / approximation.len() as f64
    };
    let recall = if target_in_window == 0 {
        warnings.push(format!("no {target} publications inside the window"));
        0.0
    } else {
        members_in_target as f64 / target_in_window as f64
    };
    Ok(RecoveryReport {
        target: target.to_string(),
        precision,
        recall,
        members: approximation.len(),
        members_in_target,
        target_in_window,
        warnings,
    })
}

/// Least-squares slope of log(count) against log(rank) over ranks whose count
/// is at least `min_count`; counts are sorted descending first.
pub fn rank_frequency_slope(counts: impl IntoIterator<Item = usize>, min_count: usize) -> f64 {
    let mut c: Vec<usize> = counts.into_iter().filter(|&n| n >= min_count.max(1)).collect();
    c.sort_unstable_by(|a, b| b.cmp(a));
    let pts: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .map(|(r, &n)| (((r + 1) as f64).ln(), (n as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Share of authors with exactly one publication in `pubs`.
pub fn single_contribution_share<'a>(pubs: impl IntoIterator<Item = &'a Publication>) -> f64 {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for p in pubs {
        for k in p.author_keys().collect::<BTreeSet<_>>() {
            *counts.entry(k.to_string()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return 0.0;
    }
    counts.values().filter(|&&n| n == 1).count() as f64 / counts.len() as f64
}
