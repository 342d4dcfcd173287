use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use specialty::analytics::{reviewer_report, ReviewerRequest};
use specialty::approx::{build_approximation, rederive_key_values, seed_coverage_histogram};
use specialty::corpus::{ingest, CorpusError, DocType, IngestOptions, Rejection};
use specialty::export::{
    approximation_csv, keys_csv, mutual_coverage_csv, ranking_csv, read_approximation_ids,
    seed_csv, ApproximationSummary,
};
use specialty::keys::{compute_all_keys, AuthorScope, KeysConfig, OnUnsatisfiable, PerField};
use specialty::syngen::{evaluate_recovery, generate, GeneratorConfig, GroundTruth, SyngenError};
use specialty::{
    build_seed_record, coverage_of_record_by_keys, mutual_coverage, AuthorKey, Corpus,
    KeyValueSets, SeedOptions, SeedRecord, SpecialtyApproximation, YearWindow,
};

use crate::manifest::Run;
use crate::{
    ApproxCmd, Command, CoverageArgs, EvaluateArgs, GenerateArgs, IngestArgs, KeyArgs, KeysCmd,
    ReviewersArgs, SeedArgs, SeedCmd,
};

pub enum Failure {
    Input(anyhow::Error),
    Pipeline(anyhow::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Pipeline(_) => 1,
            Failure::Input(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Pipeline(e) => e,
        }
    }
}

type Res<T> = Result<T, Failure>;

trait Classify<T> {
    fn input(self, what: &str) -> Res<T>;
    fn pipeline(self, what: &str) -> Res<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self, what: &str) -> Res<T> {
        self.map_err(|e| Failure::Input(e.into().context(what.to_string())))
    }

    fn pipeline(self, what: &str) -> Res<T> {
        self.map_err(|e| Failure::Pipeline(e.into().context(what.to_string())))
    }
}

fn io_out(e: std::io::Error) -> Failure {
    Failure::Pipeline(anyhow!(e).context("writing outputs"))
}

pub fn dispatch(command: Command) -> i32 {
    let config = serde_json::to_value(&command).unwrap_or_default();
    let (name, config) = match config {
        serde_json::Value::Object(m) if m.len() == 1 => {
            let (k, v) = m.into_iter().next().expect("one entry");
            (k, v)
        }
        other => ("unknown".to_string(), other),
    };
    let out = match &command {
        Command::Ingest(a) => &a.out.out,
        Command::Seed(a) => &a.out.out,
        Command::Keys(a) => &a.out.out,
        Command::Approx(a) => &a.out.out,
        Command::Reviewers(a) => &a.out.out,
        Command::Coverage(a) => &a.out.out,
        Command::Generate(a) => &a.out.out,
        Command::Evaluate(a) => &a.out.out,
    }
    .clone();
    if let Err(e) = fs::create_dir_all(&out) {
        eprintln!("error: cannot create {}: {e}", out.display());
        return 1;
    }

    let mut run = Run::new(&name, config, &out);
    let result = match &command {
        Command::Ingest(a) => cmd_ingest(&mut run, a),
        Command::Seed(a) => cmd_seed(&mut run, a),
        Command::Keys(a) => cmd_keys(&mut run, a),
        Command::Approx(a) => cmd_approx(&mut run, a),
        Command::Reviewers(a) => cmd_reviewers(&mut run, a),
        Command::Coverage(a) => cmd_coverage(&mut run, a),
        Command::Generate(a) => cmd_generate(&mut run, a),
        Command::Evaluate(a) => cmd_evaluate(&mut run, a),
    };
    for w in run.warnings() {
        eprintln!("warning: {w}");
    }
    let (code, error) = match result {
        Ok(()) => (0, None),
        Err(f) => {
            let msg = format!("{:#}", f.error());
            eprintln!("error: {msg}");
            (f.code(), Some(msg))
        }
    };
    if let Err(e) = run.finish(code, error) {
        eprintln!("error: cannot write manifest: {e}");
        return if code == 0 { 1 } else { code };
    }
    code
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    records: usize,
    lines_read: usize,
    rejected: &'a [Rejection],
}

fn cmd_ingest(run: &mut Run, a: &IngestArgs) -> Res<()> {
    run.input(&a.corpus).input("reading corpus")?;
    let report = match ingest(&a.corpus, IngestOptions { strict: a.strict }) {
        Ok(r) => r,
        Err(e) => {
            if let CorpusError::SchemaError { line, reason } = &e {
                let rejected = [Rejection {
                    line: *line,
                    reason: reason.clone(),
                }];
                run.write_json(
                    "ingest_report.json",
                    &IngestSummary {
                        records: 0,
                        lines_read: *line,
                        rejected: &rejected,
                    },
                )
                .map_err(io_out)?;
            }
            return Err(e).input("ingesting corpus");
        }
    };
    run.write_json(
        "ingest_report.json",
        &IngestSummary {
            records: report.corpus.len(),
            lines_read: report.lines_read,
            rejected: &report.rejected,
        },
    )
    .map_err(io_out)?;
    println!("records: {}", report.corpus.len());
    println!("rejected: {}", report.rejected.len());
    for r in &report.rejected {
        println!("  line {}: {}", r.line, r.reason);
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::Input(anyhow!(
            "{} malformed line(s)",
            report.rejected.len()
        )))
    }
}

fn load_corpus(run: &mut Run, path: &Path) -> Res<Corpus> {
    run.input(path).input("reading corpus")?;
    let report = ingest(path, IngestOptions::default()).input("ingesting corpus")?;
    if let Some(first) = report.rejected.first() {
        return Err(Failure::Input(anyhow!(
            "corpus has {} malformed line(s); first at line {}: {}",
            report.rejected.len(),
            first.line,
            first.reason
        )));
    }
    Ok(report.corpus)
}

fn read_id_file(run: &mut Run, path: &Path) -> Res<Vec<String>> {
    run.input(path).input("reading id file")?;
    let text = fs::read_to_string(path)
        .with_context(|| path.display().to_string())
        .input("reading id file")?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or_default().trim())
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

fn seed_options(a: &SeedArgs) -> Res<SeedOptions> {
    let doc_types = if a.doc_types.is_empty() {
        None
    } else {
        let mut set = BTreeSet::new();
        for label in &a.doc_types {
            let t = DocType::parse_lenient(label);
            if t == DocType::Other && !label.trim().eq_ignore_ascii_case("other") {
                return Err(Failure::Input(anyhow!("unknown document type {label:?}")));
            }
            set.insert(t);
        }
        Some(set)
    };
    Ok(SeedOptions {
        extend: a.extend,
        doc_types,
    })
}

fn build_seed(run: &mut Run, corpus: &Corpus, a: &SeedArgs) -> Res<SeedRecord> {
    let mut ids = a.id.clone();
    if let Some(path) = &a.ids {
        ids.extend(read_id_file(run, path)?);
    }
    let options = seed_options(a)?;
    let seed = build_seed_record(corpus, &ids, &options).pipeline("building seed record")?;
    if seed.filtered_out > 0 {
        run.warn(format!(
            "{} publication(s) dropped by the document-type filter",
            seed.filtered_out
        ));
    }
    Ok(seed)
}

fn keys_config(a: &KeyArgs) -> KeysConfig {
    KeysConfig {
        thresholds: PerField {
            cell: a.threshold_cell,
            title: a.threshold_title,
            author: a.threshold_author,
            reference: a.threshold_ref,
        },
        min_word_len: a.min_word_len as usize,
        required_title_words: a.title_words_required as usize,
        author_scope: a.author_scope.into(),
        doi_only: a.doi_only_refs,
        on_unsatisfiable: OnUnsatisfiable::Error,
    }
}

fn print_seed(seed: &SeedRecord) {
    println!(
        "seed: {} publications ({} initial, {} via references, {} unresolved references)",
        seed.len(),
        seed.initial_ids.len(),
        seed.extended_ids.len(),
        seed.unresolved_references.len()
    );
}

fn cmd_seed(run: &mut Run, a: &SeedCmd) -> Res<()> {
    let corpus = load_corpus(run, &a.seed.corpus)?;
    let seed = build_seed(run, &corpus, &a.seed)?;
    run.write("seed.csv", seed_csv(&seed)).map_err(io_out)?;
    run.write_json("seed.json", &seed).map_err(io_out)?;
    print_seed(&seed);
    Ok(())
}

fn select_keys(run: &mut Run, corpus: &Corpus, seed: &SeedRecord, a: &KeyArgs) -> Res<KeyValueSets> {
    let keys = compute_all_keys(corpus, seed, &keys_config(a)).pipeline("selecting key values")?;
    for w in keys.warnings() {
        run.warn(w);
    }
    run.write("keys.csv", keys_csv(&keys)).map_err(io_out)?;
    run.write_json("keys.json", &keys).map_err(io_out)?;
    for f in specialty::FieldKind::ALL {
        let s = keys.get(f);
        println!(
            "{:<9} {:>6} key values of {:>7} unique, coverage {:.4}",
            f.as_str(),
            s.len(),
            s.unique_values,
            s.achieved_coverage
        );
    }
    Ok(keys)
}

fn cmd_keys(run: &mut Run, a: &KeysCmd) -> Res<()> {
    let corpus = load_corpus(run, &a.seed.corpus)?;
    let seed = build_seed(run, &corpus, &a.seed)?;
    run.write("seed.csv", seed_csv(&seed)).map_err(io_out)?;
    print_seed(&seed);
    select_keys(run, &corpus, &seed, &a.keys)?;
    Ok(())
}

fn cmd_approx(run: &mut Run, a: &ApproxCmd) -> Res<()> {
    let corpus = load_corpus(run, &a.seed.corpus)?;
    let seed = build_seed(run, &corpus, &a.seed)?;
    run.write("seed.csv", seed_csv(&seed)).map_err(io_out)?;
    print_seed(&seed);
    let keys = select_keys(run, &corpus, &seed, &a.keys)?;
    let approx = build_approximation(&corpus, &keys, a.approx.window, a.approx.min_fields)
        .pipeline("building approximation")?;
    let seed_hist = seed_coverage_histogram(&corpus, &seed, &keys).pipeline("seed coverage")?;
    let mut summary = ApproximationSummary::new(&approx, &keys, &seed, seed_hist);
    if a.approx.rederive {
        let mut config = keys.config.clone();
        config.author_scope = AuthorScope::Auto;
        config.on_unsatisfiable = OnUnsatisfiable::Warn;
        match rederive_key_values(&corpus, &approx, &config) {
            Ok(r) => {
                run.write("keys_rederived.csv", keys_csv(&r.keys))
                    .map_err(io_out)?;
                summary.rederived_key_ratios = Some(r.key_ratios);
            }
            Err(e) => run.warn(format!("re-derivation skipped: {e}")),
        }
    }
    run.write("approximation.csv", approximation_csv(&corpus, &approx))
        .map_err(io_out)?;
    run.write_json("summary.json", &summary).map_err(io_out)?;
    println!(
        "approximation: {} of {} publications in {} (seed share with >= {} fields: {:.4})",
        approx.len(),
        approx.in_window,
        approx.window,
        approx.min_fields,
        summary.seed_histogram.at_least(approx.min_fields as usize)
    );
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(run: &mut Run, path: &Path) -> Res<T> {
    run.input(path)
        .with_context(|| path.display().to_string())
        .input("reading run artifact")?;
    let text = fs::read_to_string(path)
        .with_context(|| path.display().to_string())
        .input("reading run artifact")?;
    serde_json::from_str(&text)
        .with_context(|| path.display().to_string())
        .input("parsing run artifact")
}

/// Key values and the approximation rebuilt from an `approx` run directory,
/// checked against the exported member list when present.
fn load_run(
    run: &mut Run,
    corpus: &Corpus,
    dir: &Path,
) -> Res<(KeyValueSets, SpecialtyApproximation)> {
    let keys: KeyValueSets = read_json(run, &dir.join("keys.json"))?;
    let summary: ApproximationSummary = read_json(run, &dir.join("summary.json"))?;
    let approx = build_approximation(corpus, &keys, summary.window, summary.min_fields)
        .pipeline("rebuilding approximation")?;
    let csv_path = dir.join("approximation.csv");
    if csv_path.exists() {
        run.input(&csv_path).input("reading approximation")?;
        let text = fs::read_to_string(&csv_path).input("reading approximation")?;
        let ids = read_approximation_ids(&text)
            .map_err(|e| anyhow!(e))
            .input("parsing approximation.csv")?;
        if ids != approx.member_ids {
            return Err(Failure::Pipeline(anyhow!(
                "approximation.csv lists {} members but the run's key values give {}; was the corpus changed?",
                ids.len(),
                approx.len()
            )));
        }
    }
    Ok((keys, approx))
}

fn cmd_reviewers(run: &mut Run, a: &ReviewersArgs) -> Res<()> {
    let focal = a
        .focal
        .as_deref()
        .ok_or_else(|| Failure::Pipeline(anyhow!("--focal is required")))?;
    let focal: AuthorKey = focal
        .parse()
        .map_err(|e| Failure::Pipeline(anyhow!("invalid --focal {focal:?}: {e}")))?;
    let corpus = load_corpus(run, &a.corpus)?;
    let (keys, approx) = load_run(run, &corpus, &a.run)?;
    let end = approx.window.end;
    let conflict_window = match a.conflict_window {
        Some(w) => w,
        None => YearWindow::new(end - 4, end).expect("ordered"),
    };
    let mut config = keys.config.clone();
    config.author_scope = AuthorScope::Auto;
    let report = reviewer_report(
        &corpus,
        &keys,
        &approx,
        &ReviewerRequest {
            focal: &focal,
            conflict_window,
            top: a.top,
            seed_options: &SeedOptions::default(),
            keys_config: &config,
        },
    );
    for w in &report.warnings {
        run.warn(w.clone());
    }
    run.write_json("reviewers.json", &report).map_err(io_out)?;
    run.write(
        "rankings.csv",
        ranking_csv(&[&report.from_key_authors, &report.from_approximation]),
    )
    .map_err(io_out)?;
    run.write("mutual_coverage.csv", mutual_coverage_csv(&report.candidates))
        .map_err(io_out)?;
    for r in [&report.from_key_authors, &report.from_approximation] {
        let label = serde_json::to_value(r.source).unwrap_or_default();
        println!("{}:", label.as_str().unwrap_or_default());
        for (i, e) in r.entries.iter().enumerate() {
            println!("  {:>3}. {} ({})", i + 1, e.author, e.publications);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CoverageReport {
    subject: String,
    record_size: usize,
    /// Share of the record covered in at least `min_fields` fields by the run's key values.
    covered_by_run_keys: f64,
    min_fields: u8,
    mutual: specialty::MutualCoverage,
    subject_key_warnings: Vec<String>,
}

fn cmd_coverage(run: &mut Run, a: &CoverageArgs) -> Res<()> {
    let corpus = load_corpus(run, &a.corpus)?;
    let (keys, approx) = load_run(run, &corpus, &a.run)?;
    let record: BTreeSet<String> = read_id_file(run, &a.record)?.into_iter().collect();
    let covered = coverage_of_record_by_keys(&corpus, &record, &keys, approx.min_fields)
        .pipeline("record coverage")?;
    let mut config = keys.config.clone();
    config.author_scope = AuthorScope::Auto;
    config.on_unsatisfiable = OnUnsatisfiable::Warn;
    let seed = build_seed_record(&corpus, &record, &SeedOptions::default())
        .pipeline("building subject seed")?;
    let subject_keys = compute_all_keys(&corpus, &seed, &config).pipeline("subject key values")?;
    let mutual = mutual_coverage(&corpus, &a.subject, &record, &subject_keys, &approx)
        .pipeline("mutual coverage")?;
    println!(
        "{}: {} publications, {:.4} inside the approximation",
        a.subject,
        record.len(),
        mutual.share_in_approximation
    );
    run.write_json(
        "coverage.json",
        &CoverageReport {
            subject: a.subject.clone(),
            record_size: record.len(),
            covered_by_run_keys: covered,
            min_fields: approx.min_fields,
            mutual,
            subject_key_warnings: subject_keys.warnings(),
        },
    )
    .map_err(io_out)
}

fn cmd_generate(run: &mut Run, a: &GenerateArgs) -> Res<()> {
    let mut config: GeneratorConfig = match &a.config {
        Some(path) => read_json(run, path)?,
        None => GeneratorConfig::default(),
    };
    if let Some(seed) = a.rng_seed {
        config.rng_seed = seed;
    }
    let generated = generate(&config).map_err(|e| match e {
        SyngenError::InvalidConfig(_) => Failure::Input(anyhow!(e)),
        other => Failure::Pipeline(anyhow!(other)),
    })?;
    run.write("corpus.jsonl", generated.corpus_jsonl())
        .map_err(io_out)?;
    run.write("ground_truth.jsonl", generated.ground_truth.labels_jsonl())
        .map_err(io_out)?;
    run.write("pools.json", generated.pools_json()).map_err(io_out)?;
    run.write_json("generator_config.json", &config)
        .map_err(io_out)?;
    println!(
        "generated {} publications in {} specialties",
        generated.publications.len(),
        config.specialties.len()
    );
    Ok(())
}

fn cmd_evaluate(run: &mut Run, a: &EvaluateArgs) -> Res<()> {
    let corpus = load_corpus(run, &a.corpus)?;
    let (_, approx) = load_run(run, &corpus, &a.run)?;
    run.input(&a.ground_truth).input("reading ground truth")?;
    let truth = GroundTruth::read_labels(&a.ground_truth).input("reading ground truth")?;
    let report = evaluate_recovery(&corpus, &approx, &truth, &a.target).pipeline("evaluating")?;
    for w in &report.warnings {
        run.warn(w.clone());
    }
    println!(
        "{}: precision {:.4}, recall {:.4} ({} members, {} target publications in window)",
        report.target, report.precision, report.recall, report.members, report.target_in_window
    );
    run.write_json("evaluation.json", &report).map_err(io_out)
}
