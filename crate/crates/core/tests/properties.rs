use std::collections::{BTreeMap, BTreeSet};

use epimark_core::ece::{ece, EceBinning, EceSample};
use epimark_core::extract::{extract_answer, normalize_marker};
use epimark_core::metrics::{evaluate_model, EvaluationConfig};
use epimark_core::model::{validate_record, Violation};
use epimark_core::stats::{cv, pearson, spearman};
use epimark_core::synth::{generate_synthetic, SyntheticProfile};
use epimark_core::table::marker_confidence_table;
use epimark_core::{
    Answer, AnswerOption, ConfidenceTable, Marker, NumericConfidence, PromptMode, QaItem, QuestionType,
    ResponseRecord, Split,
};
use proptest::prelude::*;

fn item_strategy() -> impl Strategy<Value = QaItem> {
    (any::<bool>(), 2usize..6, 0usize..6, "[a-z ]{0,30}", "[a-z0-9-]{1,10}").prop_map(|(binary, n, gold, text, id)| {
        if binary {
            QaItem {
                dataset_id: "d".into(),
                split: Split::Train,
                item_id: id,
                question_type: QuestionType::Binary,
                question_text: text,
                options: vec![],
                gold_answer: if gold % 2 == 0 { "yes" } else { "no" }.into(),
            }
        } else {
            let letters: Vec<String> = "ABCDEF".chars().take(n).map(String::from).collect();
            QaItem {
                dataset_id: "d".into(),
                split: Split::Test,
                item_id: id,
                question_type: QuestionType::MultipleChoice,
                question_text: text,
                gold_answer: letters[gold % n].clone(),
                options: letters.iter().map(|l| AnswerOption::new(l.clone(), "opt")).collect(),
            }
        }
    })
}

fn well_formed(item: &QaItem, mode: PromptMode, answer_idx: usize, conf: f64, marker: &str) -> ResponseRecord {
    let mut r = ResponseRecord::raw(item, "m", mode, "raw".into(), 0.5);
    let candidates: Vec<String> = match item.question_type {
        QuestionType::Binary => vec!["yes".into(), "no".into()],
        QuestionType::MultipleChoice => item.option_letters().map(String::from).collect(),
    };
    let ans = candidates[answer_idx % candidates.len()].clone();
    r.correct = Some(item.is_correct(&ans));
    r.extracted_answer = Some(Answer::Valid(ans));
    match mode {
        PromptMode::Marker => r.marker = Some(Marker::normalize(marker)),
        PromptMode::Numeric => r.numeric_confidence = Some(NumericConfidence::Value(conf)),
    }
    r
}

#[derive(Debug, Clone, Copy)]
enum Mutation {
    None,
    BothChannels,
    DropChannel,
    OutOfRange,
    FlipCorrect,
    DropCorrect,
    InvalidWithCorrect,
    WrongItem,
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn serde_round_trips(item in item_strategy(), idx in 0usize..6, conf in 0.0f64..=1.0, numeric in any::<bool>(), marker in "[A-Za-z ,!]{0,20}") {
        let json = serde_json::to_string(&item).unwrap();
        prop_assert_eq!(&serde_json::from_str::<QaItem>(&json).unwrap(), &item);
        let mode = if numeric { PromptMode::Numeric } else { PromptMode::Marker };
        let rec = well_formed(&item, mode, idx, conf, &marker);
        let json = serde_json::to_string(&rec).unwrap();
        prop_assert_eq!(serde_json::from_str::<ResponseRecord>(&json).unwrap(), rec.clone());
        if mode == PromptMode::Marker {
            let table = marker_confidence_table(&[rec]).unwrap();
            let json = serde_json::to_string(&table).unwrap();
            prop_assert_eq!(serde_json::from_str::<ConfidenceTable>(&json).unwrap(), table);
        }
    }

    #[test]
    fn validate_flags_exactly_the_mutations(
        item in item_strategy(),
        idx in 0usize..6,
        conf in 0.0f64..=1.0,
        numeric in any::<bool>(),
        which in 0usize..8,
    ) {
        let mode = if numeric { PromptMode::Numeric } else { PromptMode::Marker };
        let mut rec = well_formed(&item, mode, idx, conf, "likely");
        let mutation = [
            Mutation::None, Mutation::BothChannels, Mutation::DropChannel, Mutation::OutOfRange,
            Mutation::FlipCorrect, Mutation::DropCorrect, Mutation::InvalidWithCorrect, Mutation::WrongItem,
        ][which];
        let expected = match mutation {
            Mutation::None => None,
            Mutation::BothChannels => {
                rec.marker = Some(Marker::normalize("sure"));
                rec.numeric_confidence = Some(NumericConfidence::Value(0.5));
                Some(Violation::DualChannel)
            }
            Mutation::DropChannel => {
                rec.marker = None;
                rec.numeric_confidence = None;
                Some(Violation::MissingChannel)
            }
            Mutation::OutOfRange => {
                rec.prompt_mode = PromptMode::Numeric;
                rec.marker = None;
                rec.numeric_confidence = Some(NumericConfidence::Value(1.0 + conf + 1e-9));
                Some(Violation::ConfidenceOutOfRange)
            }
            Mutation::FlipCorrect => {
                rec.correct = rec.correct.map(|c| !c);
                Some(Violation::CorrectMismatch)
            }
            Mutation::DropCorrect => {
                rec.correct = None;
                Some(Violation::CorrectMissing)
            }
            Mutation::InvalidWithCorrect => {
                rec.extracted_answer = Some(Answer::Invalid);
                Some(Violation::CorrectOnInvalid)
            }
            Mutation::WrongItem => {
                rec.item_id.push('x');
                Some(Violation::ItemMismatch)
            }
        };
        let violations = validate_record(&rec, &item);
        match expected {
            None => prop_assert!(violations.is_empty(), "{:?}", violations),
            Some(v) => prop_assert!(violations.contains(&v), "{:?} not in {:?}", v, violations),
        }
    }

    #[test]
    fn normalization_is_idempotent(s in "\\PC{0,40}") {
        let once = normalize_marker(&s);
        prop_assert_eq!(normalize_marker(once.canonical_text()), once.clone());
    }

    #[test]
    fn extracted_answers_stay_in_range(item in item_strategy(), raw in "[A-Fa-f yesnoYESNO.,()!?]{0,40}") {
        if let Answer::Valid(a) = extract_answer(&raw, &item) {
            let allowed: BTreeSet<String> = match item.question_type {
                QuestionType::Binary => ["yes", "no"].iter().map(|s| s.to_string()).collect(),
                QuestionType::MultipleChoice => item.option_letters().map(String::from).collect(),
            };
            prop_assert!(allowed.contains(&a), "{a} not allowed");
        }
    }

    #[test]
    fn filtering_is_monotone_and_counts_partition(draws in prop::collection::vec((0usize..12, any::<bool>()), 0..400), t1 in 0u64..60, t2 in 0u64..60) {
        let item = QaItem {
            dataset_id: "d".into(), split: Split::Train, item_id: "i".into(),
            question_type: QuestionType::Binary, question_text: String::new(), options: vec![], gold_answer: "yes".into(),
        };
        let records: Vec<ResponseRecord> = draws
            .iter()
            .map(|&(m, ok)| well_formed(&item, PromptMode::Marker, usize::from(!ok), 0.0, &format!("marker {m}")))
            .collect();
        let table = marker_confidence_table(&records).unwrap();
        prop_assert_eq!(table.total_count(), records.len() as u64);
        for s in table.entries.values() {
            prop_assert!(s.correct <= s.count);
            prop_assert!(s.interval.lo <= s.confidence && s.confidence <= s.interval.hi);
        }
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let strict: BTreeSet<_> = table.filter_by_count(hi).markers().cloned().collect();
        let loose: BTreeSet<_> = table.filter_by_count(lo).markers().cloned().collect();
        prop_assert!(strict.is_subset(&loose));
    }

    #[test]
    fn cv_scale_invariance(values in prop::collection::vec(0.01f64..1.0, 1..30), c in 0.1f64..50.0) {
        let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
        prop_assert!((cv(&values).unwrap() - cv(&scaled).unwrap()).abs() < 1e-9);
        prop_assert!(cv(&values).unwrap() >= 0.0);
    }

    #[test]
    fn correlation_invariances(pairs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..30), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()) };
        prop_assert!((-1.0..=1.0).contains(&r));
        let affine: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&affine, &y).unwrap() - r).abs() < 1e-9);
        let monotone: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
        prop_assert_eq!(spearman(&monotone, &y).unwrap(), spearman(&x, &y).unwrap());
    }

    #[test]
    fn ece_in_unit_interval(samples in prop::collection::vec((0.0f64..=1.0, any::<bool>()), 1..100), bins in 1usize..20) {
        let s: Vec<EceSample> = samples.iter().map(|&(c, y)| EceSample::new(c, y)).collect();
        for b in [EceBinning::PerPrediction, EceBinning::PerValue, EceBinning::Fixed(bins)] {
            let v = ece(&s, b).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn report_is_order_insensitive() {
    let mut profile = SyntheticProfile::reference(300, 11).with_shifts(vec![0.1, -0.1, 0.0, 0.05, -0.05]);
    profile.numeric = true;
    let records = generate_synthetic(&profile).unwrap().records;
    let config = EvaluationConfig {
        sweep: vec![10, 50, 100],
        ..Default::default()
    };
    let base = evaluate_model(&records, &config).unwrap();
    let mut shuffled = records.clone();
    shuffled.reverse();
    shuffled.rotate_left(137);
    let other = evaluate_model(&shuffled, &config).unwrap();
    assert_eq!(base, other);
    assert_eq!(serde_json::to_string(&base).unwrap(), serde_json::to_string(&other).unwrap());
}

#[test]
fn planted_confidence_recovered() {
    use epimark_core::stats::binomial_interval;
    use epimark_core::synth::SyntheticMarker;
    let mut profile = SyntheticProfile::reference(1000, 5);
    profile.markers = vec![SyntheticMarker::new("probably", 0.7, 1.0)];
    let records: Vec<ResponseRecord> = generate_synthetic(&profile)
        .unwrap()
        .records
        .into_iter()
        .filter(|r| r.dataset_id == "ds1" && r.split == Split::Train)
        .collect();
    assert_eq!(records.len(), 1000);
    let table = marker_confidence_table(&records).unwrap();
    let conf = table.confidence(&Marker::normalize("probably")).unwrap();
    // the planted value must lie in the 99% interval around the estimate
    let s = table.entries[&Marker::normalize("probably")];
    let iv = binomial_interval(s.correct, s.count, 0.99).unwrap();
    assert!(iv.contains(0.7), "estimate {conf}, interval {iv:?}");
}

#[test]
fn every_marker_within_interval_at_2000() {
    use epimark_core::stats::binomial_interval;
    let profile = SyntheticProfile::reference(16_000, 21);
    let run = generate_synthetic(&profile).unwrap();
    let train: Vec<ResponseRecord> = run
        .records
        .into_iter()
        .filter(|r| r.dataset_id == "ds2" && r.split == Split::Train)
        .collect();
    let table = marker_confidence_table(&train).unwrap();
    let planted: BTreeMap<Marker, f64> =
        profile.markers.iter().map(|m| (Marker::normalize(&m.text), m.accuracy)).collect();
    for (m, s) in &table.entries {
        if s.count < 2000 {
            continue;
        }
        let iv = binomial_interval(s.correct, s.count, 0.99).unwrap();
        assert!(iv.contains(planted[m]), "{m}: {s:?}");
    }
}
