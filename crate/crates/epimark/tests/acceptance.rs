//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on any FAIL.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use epimark::elicit::{cache_key, Cache, CachedCompletion, Client, ClientConfig, HttpReply, Transport};
use epimark_core::ece::{ece, EceBinning, EceSample};
use epimark_core::extract::{extract_answer, extract_marker_rule_based, Lexicon};
use epimark_core::ingest::{binarize_gsm8k, binarize_gsm8k_with, parse_gsm8k_gold, prepare_dataset, DatasetId, DatasetSpec, RawItem};
use epimark_core::metrics::{capability_correlation, evaluate_model, EvaluationConfig, ModelSummary};
use epimark_core::prompt::render_prompt;
use epimark_core::stats::{binomial_interval, cv, pearson, spearman};
use epimark_core::synth::{generate_synthetic, SyntheticProfile};
use epimark_core::{Answer, AnswerOption, Marker, PromptMode, QaItem, QuestionType, ResponseRecord, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Named = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1_metric_oracles() -> Check {
    const TOL: f64 = 1e-12;
    const CASES: usize = 1000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 5];
    for _ in 0..CASES {
        let n = rng.random_range(1..300);
        let samples: Vec<(f64, bool)> = (0..n).map(|_| (rng.random::<f64>(), rng.random_bool(0.6))).collect();
        let s: Vec<EceSample> = samples.iter().map(|&(c, y)| EceSample::new(c, y)).collect();
        let got = ece(&s, EceBinning::PerPrediction).map_err(|e| e.to_string())?;
        worst[0] = worst[0].max((got - oracle::mad_ece(&samples)).abs());

        let n = rng.random_range(3..60);
        let x: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + 0.7 * rng.random::<f64>()).collect();
        worst[1] = worst[1].max((pearson(&x, &y).unwrap() - oracle::pearson_def(&x, &y)).abs());

        // coarse grid forces ties
        let n = rng.random_range(4..40);
        let x: Vec<f64> = (0..n).map(|i| if i < 2 { i as f64 } else { rng.random_range(0..5) as f64 }).collect();
        let y: Vec<f64> = (0..n).map(|i| if i < 2 { i as f64 } else { rng.random_range(0..5) as f64 }).collect();
        worst[2] = worst[2].max((spearman(&x, &y).unwrap() - oracle::spearman_def(&x, &y)).abs());

        let n = rng.random_range(1..80);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        worst[3] = worst[3].max((cv(&v).unwrap() - oracle::cv_welford(&v)).abs());

        let count = rng.random_range(1..5000u64);
        let correct = rng.random_range(0..=count);
        let level = [0.8, 0.9, 0.95, 0.99][rng.random_range(0..4)];
        let iv = binomial_interval(correct, count, level).unwrap();
        let (lo, hi) = oracle::wilson_closed_form(correct, count, level);
        worst[4] = worst[4].max((iv.lo - lo).abs()).max((iv.hi - hi).abs());
    }
    let elapsed = start.elapsed();
    let names = ["ece", "pearson", "spearman", "cv", "wilson"];
    for (name, w) in names.iter().zip(worst) {
        ensure(w <= TOL, || format!("{name} max |delta| {w:e} > {TOL:e}"))?;
    }
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{CASES} inputs per estimator, max |delta| {:.1e}, {elapsed:.2?}", worst.iter().cloned().fold(0.0, f64::max)))
}

fn ac2_closed_loop() -> Check {
    let start = Instant::now();
    let config = EvaluationConfig::default();
    let plain = generate_synthetic(&SyntheticProfile::reference(5000, 2024)).map_err(|e| e.to_string())?;
    let r = evaluate_model(&plain.records, &config).map_err(|e| e.to_string())?;
    let (i, c, cvv) = (r.i_avg_ece.unwrap_or(1.0), r.c_avg_ece.unwrap_or(1.0), r.c_avg_cv.unwrap_or(1.0));
    ensure(i < 0.02 && c < 0.02 && cvv < 0.05, || format!("unshifted I {i:.4} C {c:.4} CV {cvv:.4}"))?;

    let profile = SyntheticProfile::reference(5000, 2024).with_shifts(vec![0.2, -0.2, 0.2, -0.2, 0.2]);
    let shifted = generate_synthetic(&profile).map_err(|e| e.to_string())?;
    let s = evaluate_model(&shifted.records, &config).map_err(|e| e.to_string())?;
    let (si, sc) = (s.i_avg_ece.unwrap_or(1.0), s.c_avg_ece.unwrap_or(0.0));
    ensure(sc > 0.1 && si < 0.02, || format!("shifted I {si:.4} C {sc:.4}"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    let per_prediction = EvaluationConfig {
        binning: EceBinning::PerPrediction,
        ..Default::default()
    };
    let pp = evaluate_model(&plain.records, &per_prediction).map_err(|e| e.to_string())?;
    Ok(format!(
        "I-AvgECE {i:.4}, C-AvgECE {c:.4}, C-AvgCV {cvv:.4}; shifted C-AvgECE {sc:.4}, I-AvgECE {si:.4} ({} binning; \
         per_prediction would give I-AvgECE {:.4}), {elapsed:.2?}",
        config.binning,
        pp.i_avg_ece.unwrap_or(f64::NAN)
    ))
}

fn ac3_pair_counts() -> Check {
    let mut profile = SyntheticProfile::reference(300, 3);
    profile.dataset_ids = (1..=7).map(|i| format!("d{i}")).collect();
    let records = generate_synthetic(&profile).map_err(|e| e.to_string())?.records;
    let r = evaluate_model(&records, &EvaluationConfig::default()).map_err(|e| e.to_string())?;
    let cross = r.per_dataset_ece.iter().filter(|p| p.train_dataset != p.test_dataset).count();
    ensure(r.counters.ece_ordered_pairs == 42 && cross == 42, || format!("ordered pairs {} ({cross} cells)", r.counters.ece_ordered_pairs))?;
    ensure(r.counters.mrc_pairs_enumerated == 21, || format!("mrc pairs {}", r.counters.mrc_pairs_enumerated))?;
    Ok("42 ordered C-AvgECE pairs, 21 MRC pairs".into())
}

fn record(dataset: &str, split: Split, idx: usize, marker: &str, correct: bool) -> ResponseRecord {
    let item = QaItem {
        dataset_id: dataset.into(),
        split,
        item_id: format!("{}-{idx}", split.as_str()),
        question_type: QuestionType::Binary,
        question_text: String::new(),
        options: vec![],
        gold_answer: "yes".into(),
    };
    let mut r = ResponseRecord::raw(&item, "m", PromptMode::Marker, String::new(), 0.5);
    r.extracted_answer = Some(Answer::Valid(if correct { "yes" } else { "no" }.into()));
    r.correct = Some(correct);
    r.marker = Some(Marker::normalize(marker));
    r
}

fn ac4_threshold_sweep() -> Check {
    // per dataset: markers with 150, 60, 20 and 9 training occurrences
    let mut records = Vec::new();
    for (d, acc) in [("a", [140, 45, 12, 4]), ("b", [120, 50, 9, 6]), ("c", [135, 40, 15, 2])] {
        let mut idx = 0;
        for ((m, n), c) in [("sure", 150), ("likely", 60), ("maybe", 20), ("rare", 9)].into_iter().zip(acc) {
            for split in [Split::Train, Split::Test] {
                records.extend((0..n).map(|i| record(d, split, idx + i, m, i < c)));
            }
            idx += n;
        }
    }
    let config = EvaluationConfig {
        sweep: vec![10, 50, 100],
        ..Default::default()
    };
    let r = evaluate_model(&records, &config).map_err(|e| e.to_string())?;
    let sizes: Vec<u64> = r.threshold_sweep.iter().map(|t| t.markers_per_dataset["a"]).collect();
    ensure(sizes == [3, 2, 1], || format!("marker counts {sizes:?}"))?;
    for w in r.threshold_sweep.windows(2) {
        for (d, n) in &w[1].markers_per_dataset {
            ensure(*n <= w[0].markers_per_dataset[d], || format!("{d} grew from {} to {n}", w[0].threshold))?;
        }
    }
    ensure(r.shared_markers.iter().all(|m| m.as_str() != "rare"), || "count-9 marker kept at 10".into())?;
    let t10 = &r.threshold_sweep[0];
    let t50 = &r.threshold_sweep[1];
    ensure(
        [t10.c_avg_cv, t10.mac, t10.mrc, t10.i_avg_cv].iter().all(Option::is_some)
            && [t50.c_avg_cv, t50.mac, t50.mrc, t50.i_avg_cv].iter().all(Option::is_some)
            && t10.c_avg_cv != t50.c_avg_cv,
        || "marker metrics not recomputed per threshold".into(),
    )?;
    Ok(format!("markers per dataset {sizes:?} at thresholds 10/50/100; count-9 marker dropped"))
}

const JAGUAR: &str = "Each bird eats 12 beetles per day, each snake eats 3 birds per day, and each jaguar eats 5 snakes per day. If there are 6 jaguars in a forest, how many beetles are eaten each day?";
const LETTER: &str = "James writes a 3 - page letter to 2 different friends twice a week. How many pages does he write a year?";

fn gsm_raw(q: &str, solution: &str) -> RawItem {
    RawItem {
        id: None,
        question: q.into(),
        options: vec![],
        answer: solution.into(),
        multi_answer: false,
    }
}

fn ac5_gsm8k() -> Check {
    let source: Vec<RawItem> = (0..100)
        .map(|i| gsm_raw(&format!("Tom has {i} boxes of 7 pens. How many pens?"), &format!("#### {}", i * 7)))
        .collect();
    let spec = DatasetSpec {
        dataset_id: DatasetId::Gsm8k,
        source_path: String::new(),
        seed: 99,
        sample_sizes: None,
    };
    let items = prepare_dataset(&spec, source.clone(), Some(vec![])).map_err(|e| e.to_string())?.train;
    let yes = items.iter().filter(|i| i.gold_answer == "yes").count();
    let no = items.iter().filter(|i| i.gold_answer == "no").count();
    ensure(yes == 50 && no == 50, || format!("{yes} yes / {no} no"))?;
    for (item, raw) in items.iter().zip(&source) {
        let gold = parse_gsm8k_gold(&raw.answer).unwrap();
        let shown = item.question_text.contains(&format!("is the answer {gold} its"));
        ensure(shown == (item.gold_answer == "yes"), || format!("{}: {}", item.item_id, item.question_text))?;
    }
    let a = binarize_gsm8k(&gsm_raw(JAGUAR, "#### 1080"), Split::Train, 0, 0).map_err(|e| e.to_string())?;
    let b = binarize_gsm8k_with(&gsm_raw(LETTER, "#### 624"), Split::Train, 1, 223).map_err(|e| e.to_string())?;
    ensure(
        a.question_text == format!("For the question '{JAGUAR}', is the answer 1080 its correct answer?") && a.gold_answer == "yes",
        || a.question_text.clone(),
    )?;
    ensure(
        b.question_text == format!("For the question '{LETTER}', is the answer 223 its correct answer?") && b.gold_answer == "no",
        || b.question_text.clone(),
    )?;
    Ok("50 yes / 50 no, distractors differ from gold, both samples verbatim".into())
}

fn summaries(acc: &[f64], cvs: &[f64], mrc: &[f64]) -> Vec<ModelSummary> {
    (0..acc.len())
        .map(|i| ModelSummary {
            model_id: format!("m{i}"),
            mean_accuracy: acc[i],
            c_avg_cv: cvs[i],
            mrc: mrc[i],
        })
        .collect()
}

fn ac6_capability() -> Check {
    let acc: Vec<f64> = (0..7).map(|i| 0.5 + i as f64 / 16.0).collect();
    let cvs: Vec<f64> = acc.iter().map(|a| 1.0 - a).collect();
    let mrc: Vec<f64> = acc.iter().map(|a| 2.0 * a - 1.0).collect();
    let c = capability_correlation(&summaries(&acc, &cvs, &mrc)).map_err(|e| e.to_string())?;
    ensure(c.r_acc_cv == -1.0 && c.r_acc_mrc == 1.0, || format!("planted fixture gave {c:?}"))?;

    let published_cv = [20.80, 31.29, 26.44, 19.24, 28.52, 15.72, 21.98];
    let published_mrc = [11.37, 11.85, 34.60, 36.97, 10.54, 27.54, 16.48];
    let user_acc = [0.64, 0.68, 0.74, 0.78, 0.61, 0.86, 0.77];
    let p = capability_correlation(&summaries(&user_acc, &published_cv, &published_mrc)).map_err(|e| e.to_string())?;
    ensure(p.r_acc_cv.is_finite() && p.r_acc_mrc.is_finite(), || format!("{p:?}"))?;
    Ok(format!(
        "planted -1/+1 exact; published columns with supplied accuracies: r_acc_cv {:.3}, r_acc_mrc {:.3}",
        p.r_acc_cv, p.r_acc_mrc
    ))
}

fn ac7_extraction_fixture() -> Check {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/extraction_labels.json");
    let fx: Value = serde_json::from_str(&fs::read_to_string(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let cases = fx["cases"].as_array().ok_or("no cases")?;
    ensure(cases.len() >= 50, || format!("only {} cases", cases.len()))?;
    let lex = Lexicon::builtin();
    let (mut answers, mut markers) = (0, 0);
    for case in cases {
        let letters: Vec<&str> = case["options"].as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
        let binary = case["type"] == "binary";
        let item = QaItem {
            dataset_id: "fixture".into(),
            split: Split::Test,
            item_id: case["id"].to_string(),
            question_type: if binary { QuestionType::Binary } else { QuestionType::MultipleChoice },
            question_text: String::new(),
            options: letters.iter().map(|l| AnswerOption::new(*l, "option")).collect(),
            gold_answer: if binary { "yes".into() } else { letters[0].to_string() },
        };
        let raw = case["response"].as_str().unwrap();
        let answer = match extract_answer(raw, &item) {
            Answer::Valid(a) => a,
            Answer::Invalid => "INVALID".into(),
        };
        answers += usize::from(answer == case["answer"].as_str().unwrap());
        markers += usize::from(extract_marker_rule_based(raw, &lex).marker.as_str() == case["marker"].as_str().unwrap());
    }
    let n = cases.len() as f64;
    let (a, m) = (answers as f64 / n, markers as f64 / n);
    ensure(a >= 1.0 && m >= 0.9, || format!("answer {a:.3}, marker {m:.3}"))?;
    Ok(format!("{} cases: answer agreement {:.1}%, marker agreement {:.1}%", cases.len(), a * 100.0, m * 100.0))
}

const MARKERS: [&str; 5] = ["I am fairly certain", "very likely", "probably", "I think", "possibly"];

/// Deterministic stand-in for a model: answer and marker depend on the item
/// only.
fn scripted_response(item: &QaItem, mode: PromptMode) -> String {
    let n: usize = item.item_id.bytes().map(usize::from).sum::<usize>() + item.question_text.len();
    let right = n % 10 < 7;
    let answer = match (item.gold_answer.as_str(), right) {
        ("yes", true) | ("no", false) => "Yes",
        _ => "No",
    };
    match mode {
        PromptMode::Marker => format!("{answer}, {}.", MARKERS[n % MARKERS.len()]),
        PromptMode::Numeric => format!("{answer}, confidence {}%.", 60 + n % 40),
    }
}

fn write_fixture_sources(dir: &Path) -> std::io::Result<()> {
    let boolq = |range: std::ops::Range<usize>| {
        range
            .map(|i| format!("{{\"question\":\"is item {i} blue\",\"answer\":{},\"passage\":\"p\"}}\n", i % 3 != 0))
            .collect::<String>()
    };
    fs::write(dir.join("boolq_train.jsonl"), boolq(0..80))?;
    fs::write(dir.join("boolq_dev.jsonl"), boolq(80..140))?;
    let sqa: Vec<Value> = (0..150)
        .map(|i| serde_json::json!({"qid": format!("s{i}"), "question": format!("could thing {i} fly"), "answer": i % 2 == 0}))
        .collect();
    fs::write(dir.join("strategyqa.json"), serde_json::to_string(&sqa).unwrap())
}

fn item_files(run: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = ["boolq", "strategyqa"]
        .iter()
        .flat_map(|d| ["train", "test"].map(|s| run.join("items").join(d).join(format!("{s}.jsonl"))))
        .collect();
    files.sort();
    files
}

fn populate_cache(run: &Path, config: &ClientConfig) -> Result<usize, String> {
    let cache = Cache::new(run.join("raw/cache"));
    let mut n = 0;
    for file in item_files(run) {
        for item in epimark::jsonl::read_items(&file).map_err(|e| e.to_string())? {
            for mode in [PromptMode::Marker, PromptMode::Numeric] {
                let prompt = render_prompt(&item, mode);
                cache
                    .put(&CachedCompletion {
                        cache_key: cache_key(&config.model_id, &prompt, config.temperature, config.max_tokens),
                        model_id: config.model_id.clone(),
                        prompt,
                        temperature: config.temperature,
                        max_tokens: config.max_tokens,
                        raw_response: scripted_response(&item, mode),
                        endpoint_metadata: "{}".into(),
                    })
                    .map_err(|e| e.to_string())?;
                n += 1;
            }
        }
    }
    Ok(n)
}

fn epimark(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_epimark"))
        .args(args)
        .env("RUST_LOG", "error")
        .env_remove("OPENAI_API_KEY")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })
}

fn replay_run(sources: &Path, run: &Path, config: &ClientConfig) -> Result<(), String> {
    let s = |name: &str| sources.join(name).to_string_lossy().into_owned();
    let r = run.to_string_lossy().into_owned();
    epimark(&["--seed", "17", "--run-dir", &r, "prepare", "--dataset", "boolq", "--in", &s("boolq_train.jsonl"), "--test-in", &s("boolq_dev.jsonl")])?;
    epimark(&["--seed", "17", "--run-dir", &r, "prepare", "--dataset", "strategyqa", "--in", &s("strategyqa.json")])?;
    populate_cache(run, config)?;
    let files = item_files(run);
    let file_args: Vec<String> = files.iter().map(|f| f.to_string_lossy().into_owned()).collect();
    for f in &file_args {
        let modes: &[&str] = if f.ends_with("test.jsonl") { &["marker", "numeric"] } else { &["marker"] };
        for mode in modes {
            epimark(&["--run-dir", &r, "generate", "--items", f, "--mode", mode, "--model", &config.model_id, "--offline"])?;
        }
    }
    let raw_dir = run.join("raw").join(&config.model_id);
    let mut raws: Vec<PathBuf> = fs::read_dir(&raw_dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    raws.sort();
    for raw in raws {
        let mut args = vec!["--run-dir".to_string(), r.clone(), "extract".into(), "--raw".into(), raw.to_string_lossy().into_owned()];
        args.push("--items".into());
        args.extend(file_args.iter().cloned());
        args.extend(["--strategy".into(), "rule_based".into()]);
        epimark(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    epimark(&["--run-dir", &r, "metrics", "--thresholds", "10,50"])?;
    epimark(&["--seed", "17", "--run-dir", &r, "report", "--heatmap", "all"])
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Counts and refuses requests.
struct Counting(AtomicUsize);

impl Transport for Counting {
    fn post_json(&self, _: &str, _: &str, _: &Value) -> Result<HttpReply, String> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Err("network disabled".into())
    }
}

fn ac8_offline_replay() -> Check {
    let config = ClientConfig {
        model_id: "replay-model".into(),
        ..Default::default()
    };
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sources = tmp.path().join("sources");
    fs::create_dir_all(&sources).map_err(|e| e.to_string())?;
    write_fixture_sources(&sources).map_err(|e| e.to_string())?;
    // both executions use the same run path, so recorded paths match too
    let (run, a, b) = (tmp.path().join("run"), tmp.path().join("run-a"), tmp.path().join("run-b"));
    replay_run(&sources, &run, &config)?;
    fs::rename(&run, &a).map_err(|e| e.to_string())?;
    replay_run(&sources, &run, &config)?;
    fs::rename(&run, &b).map_err(|e| e.to_string())?;

    let (ta, tb) = (tree(&a), tree(&b));
    ensure(ta.keys().eq(tb.keys()), || "runs produced different file sets".into())?;
    let differing: Vec<_> = ta.iter().filter(|(k, v)| tb[*k] != **v).map(|(k, _)| k.display().to_string()).collect();
    ensure(differing.is_empty(), || format!("differing files: {differing:?}"))?;
    ensure(ta.contains_key(Path::new("reports/metrics.csv")), || "no metrics.csv".into())?;

    // the same replay through the library with a counting transport
    let counter = Counting(AtomicUsize::new(0));
    let client = Client::with_api_key(config, Some(Cache::new(a.join("raw/cache"))), counter, None);
    let mut replayed = 0;
    for file in item_files(&a) {
        let items = epimark::jsonl::read_items(&file).map_err(|e| e.to_string())?;
        replayed += client.generate(&items, PromptMode::Marker).map_err(|e| e.to_string())?.len();
    }
    ensure(client.network_calls() == 0, || format!("{} network calls", client.network_calls()))?;
    Ok(format!("{} files byte-identical across two offline runs; {replayed} cached completions, 0 network calls", ta.len()))
}

fn main() -> ExitCode {
    let checks: [Named; 8] = [
        ("AC1 metric-oracle equivalence", ac1_metric_oracles),
        ("AC2 synthetic closed loop", ac2_closed_loop),
        ("AC3 pair-count structure", ac3_pair_counts),
        ("AC4 filtering semantics", ac4_threshold_sweep),
        ("AC5 GSM8K binarization", ac5_gsm8k),
        ("AC6 capability correlation", ac6_capability),
        ("AC7 extraction fixture", ac7_extraction_fixture),
        ("AC8 offline replay", ac8_offline_replay),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
