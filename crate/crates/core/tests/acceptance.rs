//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specialty::analytics::publications_of;
use specialty::export::{approximation_csv, keys_csv};
use specialty::keys::KeysError;
use specialty::syngen::{rank_frequency_slope, single_contribution_share, PowerLaw};
use specialty::*;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

static HISTOGRAMS: Mutex<Vec<(String, [usize; 5])>> = Mutex::new(Vec::new());

fn record_histogram(origin: impl Into<String>, counts: [usize; 5]) {
    HISTOGRAMS.lock().unwrap().push((origin.into(), counts));
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64, detail: String) -> Outcome {
    ensure(elapsed.as_secs_f64() < limit_s as f64, || {
        format!("{detail}; took {:.1}s, limit {limit_s}s", elapsed.as_secs_f64())
    })?;
    Ok(format!("{detail} ({:.2}s)", elapsed.as_secs_f64()))
}

fn seed_from(corpus: &Corpus, ids: &[String], extend: bool) -> SeedRecord {
    let opts = SeedOptions {
        extend,
        doc_types: None,
    };
    build_seed_record(corpus, ids, &opts).expect("seed record")
}

fn full_window() -> YearWindow {
    YearWindow::new(2008, 2012).unwrap()
}

fn formula() -> Outcome {
    let at = |t: f64| expected_inclusion_probability(t).map_err(|e| e.to_string());
    let p = at(0.8)?;
    ensure((p - 0.8192).abs() < 1e-12, || format!("p(0.8) = {p}"))?;
    ensure(at(0.0)? == 0.0, || "p(0) != 0".into())?;
    ensure(at(1.0)? == 1.0, || "p(1) != 1".into())?;
    Ok(format!("p(0.8) = {p:.4}, p(0) = 0, p(1) = 1"))
}

fn greedy_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    let mut unsatisfiable = 0;
    for trial in 0..100 {
        let n = rng.random_range(1..=50);
        let corpus = random_corpus(&mut rng, n);
        let ids: Vec<String> = corpus
            .publications()
            .iter()
            .filter(|_| trial % 2 == 0 || rng.random_bool(0.5))
            .map(|p| p.pub_id.clone())
            .collect();
        if ids.is_empty() {
            continue;
        }
        let seed = seed_from(&corpus, &ids, trial % 3 == 0);
        let pubs: Vec<&Publication> = seed.positions().iter().map(|&i| corpus.publication(i)).collect();
        for t in [0.5, 0.8, 0.95] {
            let config = random_config(&mut rng, t);
            for field in FieldKind::ALL {
                let oracle = brute_greedy(&pubs, field, &config);
                match (select_key_values(&corpus, &seed, field, &config), oracle) {
                    (Ok(set), Some(o)) => {
                        let got: Vec<(String, usize)> =
                            set.entries.iter().map(|e| (e.value.clone(), e.frequency)).collect();
                        ensure(got == o.ranked && set.achieved_coverage == o.coverage, || {
                            format!("trial {trial} {field} t={t}: {got:?} vs {:?}", o.ranked)
                        })?;
                    }
                    (Err(KeysError::Unsatisfiable { .. }), None) => unsatisfiable += 1,
                    (got, want) => {
                        return Err(format!("trial {trial} {field} t={t}: {got:?} vs {want:?}"))
                    }
                }
                compared += 1;
            }
        }
    }
    within(
        start.elapsed(),
        10,
        format!("{compared} key sets equal to brute force ({unsatisfiable} unsatisfiable on both sides)"),
    )
}

fn approximation_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut compared = 0;
    for trial in 0..100 {
        let n = rng.random_range(1..=200);
        let corpus = random_corpus(&mut rng, n);
        let mut config = random_config(&mut rng, 0.8);
        config.on_unsatisfiable = keys::OnUnsatisfiable::Warn;
        let ids: Vec<String> = corpus
            .publications()
            .iter()
            .filter(|_| rng.random_bool(0.3))
            .map(|p| p.pub_id.clone())
            .collect();
        let mut candidates = Vec::new();
        if !ids.is_empty() {
            let seed = seed_from(&corpus, &ids, true);
            candidates.push(compute_all_keys(&corpus, &seed, &config).map_err(|e| e.to_string())?);
        }
        if config.author_scope == AuthorScope::Auto {
            config.author_scope = AuthorScope::AllAuthors;
        }
        candidates.push(random_keys(&mut rng, &corpus, config));
        let start_year = rng.random_range(2008..=2013);
        let window = YearWindow::new(start_year, rng.random_range(start_year..=2013)).unwrap();
        for keys in &candidates {
            for k in 1..=4 {
                let approx = build_approximation(&corpus, keys, window, k).map_err(|e| e.to_string())?;
                let oracle = oracle_approximation(&corpus, keys, window, k);
                ensure(
                    approx.member_ids == oracle.members
                        && approx.histogram == oracle.histogram
                        && approx.subset_sizes == oracle.subsets,
                    || format!("trial {trial} k={k}: library and exhaustive evaluation differ"),
                )?;
                record_histogram(format!("random corpus {trial}"), approx.histogram);
                compared += 1;
            }
        }
    }
    within(start.elapsed(), 30, format!("{compared} approximations equal to exhaustive evaluation"))
}

fn threshold_minimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for trial in 0..300 {
        let n = rng.random_range(1..=60);
        let corpus = random_corpus(&mut rng, n);
        let ids: Vec<String> = corpus.publications().iter().map(|p| p.pub_id.clone()).collect();
        let seed = seed_from(&corpus, &ids, false);
        let pubs: Vec<&Publication> = seed.positions().iter().map(|&i| corpus.publication(i)).collect();
        let t = rng.random_range(0.05..=1.0);
        let config = random_config(&mut rng, t);
        let scope = resolve_scope(&pubs, config.author_scope);
        for field in FieldKind::ALL {
            let Ok(set) = select_key_values(&corpus, &seed, field, &config) else {
                continue;
            };
            ensure(set.achieved_coverage >= t, || {
                format!("trial {trial} {field}: coverage {} < {t}", set.achieved_coverage)
            })?;
            let last = set.entries.last().expect("non-empty key set").frequency;
            let kept: BTreeSet<String> = set
                .entries
                .iter()
                .filter(|e| e.frequency > last)
                .map(|e| e.value.clone())
                .collect();
            let covered = pubs.iter().filter(|p| covered_by(p, field, &kept, &config, scope)).count();
            let without = covered as f64 / pubs.len() as f64;
            ensure(without < t, || {
                format!("trial {trial} {field}: final batch not needed ({without} >= {t})")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} key sets meet the threshold and need their final batch"))
}

fn interconnectedness() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut coverage_range = (f64::INFINITY, 0.0f64);
    for seed in 0..20u64 {
        let mut config = GeneratorConfig::with_specialties(seed, 2, 1000);
        config.cross_contamination = 0.2;
        config.field_coupling = 1.0;
        let g = generate(&config).map_err(|e| e.to_string())?;
        let corpus = g.corpus();
        let members: Vec<&str> = g.ground_truth.members_of("S0").collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<String> = members.choose_multiple(&mut rng, 200).map(|s| s.to_string()).collect();
        let record = seed_from(&corpus, &ids, false);
        let keys = compute_all_keys(&corpus, &record, &KeysConfig::default()).map_err(|e| e.to_string())?;
        for f in FieldKind::ALL {
            let c = keys.get(f).achieved_coverage;
            coverage_range = (coverage_range.0.min(c), coverage_range.1.max(c));
        }
        let hist = seed_coverage_histogram(&corpus, &record, &keys).map_err(|e| e.to_string())?;
        record_histogram(format!("seed histogram, generator seed {seed}"), hist.counts);
        let share = hist.at_least(3);
        ensure(share > 0.82, || format!("generator seed {seed}: share {share:.4} <= 0.82"))?;
        worst = worst.min(share);
    }
    within(
        start.elapsed(),
        60,
        format!(
            "min share covered in >=3 fields {worst:.4} > 0.82 over 20 seeds; field coverage {:.3}..{:.3}",
            coverage_range.0, coverage_range.1
        ),
    )
}

/// Frozen outcome of the reference scenario with generator seed 1.
const REFERENCE_MEMBERS: usize = 1848;
const REFERENCE_MEMBERS_IN_TARGET: usize = 1704;
const REFERENCE_TARGET_IN_WINDOW: usize = 2000;

fn planted_recovery() -> Outcome {
    let start = Instant::now();
    let mut config = GeneratorConfig::with_specialties(1, 2, 2000);
    config.cross_contamination = 0.1;
    let g = generate(&config).map_err(|e| e.to_string())?;
    let corpus = g.corpus();
    let members: Vec<&str> = g.ground_truth.members_of("S0").collect();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ids: Vec<String> = members.choose_multiple(&mut rng, 30).map(|s| s.to_string()).collect();
    let seed = seed_from(&corpus, &ids, true);
    let keys = compute_all_keys(&corpus, &seed, &KeysConfig::default()).map_err(|e| e.to_string())?;
    let approx = build_approximation(&corpus, &keys, full_window(), 3).map_err(|e| e.to_string())?;
    record_histogram("reference scenario", approx.histogram);
    let r = evaluate_recovery(&corpus, &approx, &g.ground_truth, "S0").map_err(|e| e.to_string())?;
    ensure(r.precision >= 0.8 && r.recall >= 0.8, || {
        format!("precision {:.4}, recall {:.4}", r.precision, r.recall)
    })?;
    let got = (r.members, r.members_in_target, r.target_in_window);
    let frozen = (REFERENCE_MEMBERS, REFERENCE_MEMBERS_IN_TARGET, REFERENCE_TARGET_IN_WINDOW);
    ensure(got == frozen, || {
        format!(
            "precision {:.4}, recall {:.4}, but (members, in target, target in window) = {got:?}, frozen {frozen:?}",
            r.precision, r.recall
        )
    })?;
    within(
        start.elapsed(),
        60,
        format!("precision {:.4}, recall {:.4} ({got:?} as frozen)", r.precision, r.recall),
    )
}

fn peer_connection() -> Outcome {
    let mut shares = Vec::new();
    for trial in 0..20u64 {
        let mut config = GeneratorConfig::with_specialties(100 + trial, 2, 2000);
        config.cross_contamination = 0.1;
        let g = generate(&config).map_err(|e| e.to_string())?;
        let corpus = g.corpus();
        let pool = &g.ground_truth.pools["S0"].authors;
        let productive = |min: usize| -> Vec<AuthorKey> {
            pool.iter()
                .filter_map(|a| a.parse::<AuthorKey>().ok())
                .filter(|a| corpus.pubs_with_author(a).len() >= min)
                .collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let focal = productive(10)
            .choose(&mut rng)
            .cloned()
            .ok_or_else(|| format!("trial {trial}: no author with 10 publications"))?;
        let ids: Vec<String> = publications_of(&corpus, &focal).into_iter().collect();
        let seed = seed_from(&corpus, &ids, true);
        let seed_authors: BTreeSet<AuthorKey> = seed
            .positions()
            .iter()
            .flat_map(|&i| corpus.publication(i).author_keys())
            .collect();
        let peers: Vec<AuthorKey> = productive(5)
            .into_iter()
            .filter(|a| !seed_authors.contains(a))
            .collect();
        let peers: Vec<&AuthorKey> = peers.choose_multiple(&mut rng, 2).collect();
        ensure(peers.len() == 2, || format!("trial {trial}: fewer than two disjoint peers"))?;
        let keys = compute_all_keys(&corpus, &seed, &KeysConfig::default()).map_err(|e| e.to_string())?;
        let approx = build_approximation(&corpus, &keys, full_window(), 3).map_err(|e| e.to_string())?;
        record_histogram(format!("peer trial {trial}"), approx.histogram);
        for peer in peers {
            let record = publications_of(&corpus, peer);
            let peer_keys = KeysConfig {
                on_unsatisfiable: keys::OnUnsatisfiable::Warn,
                ..KeysConfig::default()
            };
            let peer_ids: Vec<String> = record.iter().cloned().collect();
            let pk = compute_all_keys(&corpus, &seed_from(&corpus, &peer_ids, true), &peer_keys)
                .map_err(|e| e.to_string())?;
            let m = analytics::mutual_coverage(&corpus, &peer.to_string(), &record, &pk, &approx)
                .map_err(|e| e.to_string())?;
            ensure(m.share_in_approximation > 0.0, || {
                format!("trial {trial}: peer {peer} has no publication in the approximation")
            })?;
            shares.push(m.share_in_approximation);
        }
    }
    let min = shares.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("{} peers across 20 trials, min share in approximation {min:.3}", shares.len()))
}

fn distributions() -> Outcome {
    let g = generate(&GeneratorConfig::with_specialties(1, 1, 2000)).map_err(|e| e.to_string())?;
    let share = single_contribution_share(&g.publications);
    ensure((share - 0.6).abs() <= 0.1, || format!("single-contribution share {share:.3}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let law = PowerLaw::new(1000, 1.0);
    let mut counts = vec![0usize; 1000];
    for _ in 0..10_000 {
        counts[law.sample(&mut rng)] += 1;
    }
    let slope = rank_frequency_slope(counts, 1);
    ensure((slope + 1.0).abs() <= 0.15, || format!("Zipf slope {slope:.3}"))?;
    Ok(format!("single-contribution share {share:.3}, Zipf slope {slope:.3}"))
}

fn normalization() -> Outcome {
    let hists = HISTOGRAMS.lock().unwrap();
    let mut checked = 0;
    let mut empty = 0;
    for (origin, counts) in hists.iter() {
        let h = CoverageHistogram::from_counts(*counts);
        if h.total == 0 {
            empty += 1;
            continue;
        }
        let sum: f64 = h.fractions.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-9, || format!("{origin}: fractions sum to {sum}"))?;
        checked += 1;
    }
    ensure(checked > 0, || "no histograms recorded".into())?;
    Ok(format!("{checked} histograms sum to 1 ({empty} empty windows skipped)"))
}

fn pipeline_outputs(path: &std::path::Path, ids: &[String]) -> Result<(String, String), String> {
    let report = ingest(path, IngestOptions::default()).map_err(|e| e.to_string())?;
    ensure(report.is_clean(), || format!("{} rejected lines", report.rejected.len()))?;
    let corpus = report.corpus;
    let seed = seed_from(&corpus, ids, true);
    let keys = compute_all_keys(&corpus, &seed, &KeysConfig::default()).map_err(|e| e.to_string())?;
    let approx = build_approximation(&corpus, &keys, full_window(), 3).map_err(|e| e.to_string())?;
    record_histogram("performance corpus", approx.histogram);
    Ok((keys_csv(&keys), approximation_csv(&corpus, &approx)))
}

fn performance() -> Outcome {
    let g = generate(&GeneratorConfig::with_specialties(10, 5, 20_000)).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("corpus.jsonl");
    g.write_corpus(&path).map_err(|e| e.to_string())?;
    let members: Vec<&str> = g.ground_truth.members_of("S2").collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let ids: Vec<String> = members.choose_multiple(&mut rng, 200).map(|s| s.to_string()).collect();

    let start = Instant::now();
    let first = pipeline_outputs(&path, &ids)?;
    let once = start.elapsed();
    let second = pipeline_outputs(&path, &ids)?;
    ensure(first == second, || "outputs differ between runs".into())?;
    let n_members = first.1.lines().count() - 1;
    within(
        once,
        60,
        format!("{} publications, {n_members} members, identical outputs on rerun", g.publications.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("inclusion formula", formula),
        ("greedy selection oracle", greedy_oracle),
        ("approximation oracle", approximation_oracle),
        ("threshold satisfaction and minimality", threshold_minimality),
        ("interconnected fields exceed independent floor", interconnectedness),
        ("planted specialty recovery", planted_recovery),
        ("peer records reach the approximation", peer_connection),
        ("generator distributions", distributions),
        ("performance and determinism", performance),
        ("histogram normalization", normalization),
    ];
    // Normalization runs last so it sees every histogram; it is still reported as 9.
    let numbers = [1, 2, 3, 4, 5, 6, 7, 8, 10, 9];
    let mut results = Vec::new();
    for ((name, run), n) in criteria.iter().zip(numbers) {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        results.push((n, *name, outcome));
    }
    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS [{n}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{n}] {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
