use std::collections::BTreeSet;

use epimark_core::ingest::{prepare_dataset, DatasetId, DatasetSpec, RawItem};
use epimark_core::AnswerOption;
use proptest::prelude::*;

fn mcq(i: usize, multi: bool) -> RawItem {
    RawItem {
        id: Some(format!("q{i}")),
        question: format!("question {i}"),
        options: ["w", "x", "y", "z"]
            .iter()
            .zip(["A", "B", "C", "D"])
            .map(|(t, l)| AnswerOption::new(l, *t))
            .collect(),
        answer: ["A", "B", "C", "D"][i % 4].into(),
        multi_answer: multi,
    }
}

fn gsm8k(i: usize) -> RawItem {
    RawItem {
        id: None,
        question: format!("What is {i} times 2?"),
        options: Vec::new(),
        answer: format!("{i}*2\n#### {}", i * 2),
        multi_answer: false,
    }
}

fn spec(d: DatasetId, seed: u64, sizes: Option<(usize, usize)>, path: &str) -> DatasetSpec {
    DatasetSpec {
        dataset_id: d,
        source_path: path.into(),
        seed,
        sample_sizes: sizes,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn train_and_test_ids_are_disjoint(n in 20usize..300, seed in any::<u64>(), multi_every in 2usize..7) {
        let pool: Vec<RawItem> = (0..n).map(|i| mcq(i, i % multi_every == 0)).collect();
        let singles = pool.iter().filter(|r| !r.multi_answer).count();
        let (tr, te) = (singles / 2, singles / 3);
        let p = prepare_dataset(&spec(DatasetId::MedMcqa, seed, Some((tr, te)), "a"), pool, None).unwrap();
        let train: BTreeSet<_> = p.train.iter().map(|i| i.question_text.clone()).collect();
        prop_assert_eq!(p.train.len(), tr);
        prop_assert_eq!(p.test.len(), te);
        prop_assert!(p.test.iter().all(|i| !train.contains(&i.question_text)));

        let cut = prepare_dataset(&spec(DatasetId::CaseHold, seed, None, "a"), (0..n).map(|i| mcq(i, false)).collect(), None).unwrap();
        let ids: BTreeSet<_> = cut.train.iter().map(|i| i.question_text.clone()).collect();
        prop_assert!(cut.test.iter().all(|i| !ids.contains(&i.question_text)));
    }

    #[test]
    fn gsm8k_yes_count_is_ceiling_half(n in 1usize..200, seed in any::<u64>()) {
        let p = prepare_dataset(&spec(DatasetId::Gsm8k, seed, None, "g"), (0..n).map(gsm8k).collect(), Some(vec![gsm8k(0)])).unwrap();
        let yes = p.train.iter().filter(|i| i.gold_answer == "yes").count();
        prop_assert_eq!(yes, n.div_ceil(2));
        prop_assert_eq!(p.train.len() - yes, n / 2);
    }

    #[test]
    fn sample_ignores_unrelated_fields(seed in any::<u64>()) {
        let pool = || (0..500).map(|i| mcq(i, false)).collect::<Vec<_>>();
        let a = prepare_dataset(&spec(DatasetId::Mmlu, seed, Some((100, 50)), "one/path"), pool(), Some(pool())).unwrap();
        let b = prepare_dataset(&spec(DatasetId::Mmlu, seed, Some((100, 50)), "other/path"), pool(), Some(pool())).unwrap();
        prop_assert_eq!(&a, &b);
        let json = |p: &epimark_core::ingest::PreparedDataset| serde_json::to_string(p).unwrap();
        prop_assert_eq!(json(&a), json(&b));
    }
}
