use std::collections::BTreeSet;

use proptest::prelude::*;

use super::profile::normalize_by_max;
use super::*;
use crate::corpus::{parse_timezone, Corpus, DEFAULT_TIMEZONE};
use crate::features::FeatureGroup;
use crate::labeling::{assign_labels, detect_accusations, mention_counts, Label, LabelConfig};

fn small_spec(seed: u64) -> SyntheticSpec {
    let d = SyntheticSpec::default();
    SyntheticSpec {
        seed,
        days: 120,
        mentioned_troll: ArchetypeParams { users: 10, ..d.mentioned_troll.clone() },
        non_troll: ArchetypeParams { users: 16, ..d.non_troll.clone() },
        casual: ArchetypeParams { users: 30, ..d.casual.clone() },
        ..d
    }
}

fn small_config(paid: Vec<String>) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.label = LabelConfig { min_comments: 30, paid_troll_ids: paid, ..LabelConfig::default() };
    cfg.test_min_comments = 30;
    cfg.folds = 3;
    cfg
}

fn build(spec: &SyntheticSpec) -> (Corpus, SyntheticCorpus) {
    let s = generate_synthetic(spec).unwrap();
    let tz = parse_timezone(DEFAULT_TIMEZONE).unwrap();
    let c = Corpus::new(s.publications.clone(), s.comments.clone(), s.users.clone(), tz).unwrap();
    (c, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metrics_closed_form(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
        prop_assume!(tp + fp + fn_ + tn > 0);
        let m = Metrics::from_confusion(tp, fp, fn_, tn);
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        prop_assert_eq!(m.accuracy, (tp + tn) as f64 / (tp + fp + fn_ + tn) as f64);
        prop_assert_eq!((m.precision, m.recall), (p, r));
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        prop_assert!((m.f_score - f).abs() <= 1e-15);
    }
}

#[test]
fn suite_inventory() {
    let suite = AblationSpec::suite();
    let g = FeatureGroup::scaled().len();
    assert_eq!(suite.len(), 1 + g + g + 2);
    let labels: BTreeSet<String> = suite.iter().map(AblationSpec::label).collect();
    assert_eq!(labels.len(), suite.len());
    assert!(labels.contains("AS - day of week (S)"));
    assert!(labels.contains("only time hours (S)"));
    for s in &suite {
        assert_eq!(s.to_string().parse::<AblationSpec>().unwrap(), *s);
    }
    assert!(AblationSpec::only(FeatureGroup::NonScaled).is_err());
    assert!("minus:bogus".parse::<AblationSpec>().is_err());
}

#[test]
fn ablation_columns_follow_group_tags() {
    let (c, _) = build(&small_spec(1));
    let table = FeatureTable::build(&c, &Default::default(), &[c.users()[0].id.clone()]).unwrap();
    let m = &table.manifest;
    let all = AblationSpec::all_scaled().columns(m).unwrap();
    let non = AblationSpec::all_non_scaled().columns(m).unwrap();
    assert_eq!(all.len() + non.len(), m.len());
    assert_eq!(AblationSpec::plus_non_scaled().columns(m).unwrap().len(), m.len());
    for &g in FeatureGroup::scaled() {
        let only = AblationSpec::only(g).unwrap().columns(m).unwrap();
        let minus = AblationSpec::minus(g).unwrap().columns(m).unwrap();
        assert_eq!(only.len() + minus.len(), all.len());
        assert!(only.iter().all(|&i| m.specs()[i].group == g));
    }
}

#[test]
fn generator_is_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let spec = small_spec(9);
    generate_synthetic(&spec).unwrap().write(dir_a.path(), &spec).unwrap();
    generate_synthetic(&spec).unwrap().write(dir_b.path(), &spec).unwrap();
    for f in ["publications.jsonl", "comments.jsonl", "users.jsonl", "ground_truth.csv", "paid_trolls.txt", "synth_metadata.json"] {
        let a = std::fs::read(dir_a.path().join(f)).unwrap();
        assert_eq!(a, std::fs::read(dir_b.path().join(f)).unwrap(), "{f}");
        assert!(!a.is_empty());
    }
    let other = generate_synthetic(&small_spec(10)).unwrap();
    assert_ne!(other.comments, generate_synthetic(&spec).unwrap().comments);
}

#[test]
fn planted_accusations_are_recovered() {
    let d = small_spec(3);
    let spec = SyntheticSpec {
        mentioned_troll: ArchetypeParams { accusers: (5, 5), ..d.mentioned_troll.clone() },
        paid_troll: ArchetypeParams { accusers: (0, 0), ..d.paid_troll.clone() },
        ..d
    };
    let (c, s) = build(&spec);
    let counts = mention_counts(&detect_accusations(&c, &Default::default()));
    let planted: BTreeSet<&str> = s
        .ground_truth
        .iter()
        .filter(|(_, a)| *a == Archetype::MentionedTroll)
        .map(|(u, _)| u.as_str())
        .collect();
    assert_eq!(planted.len(), 10);
    let accused: BTreeSet<&str> = counts.keys().map(String::as_str).collect();
    assert_eq!(accused, planted);
    assert!(counts.values().all(|&n| n == 5));
    let cfg = LabelConfig { min_mentions: 5, min_comments: 1, ..LabelConfig::default() };
    let labels = assign_labels(&c, &counts, &cfg).unwrap();
    let mentioned: BTreeSet<&str> = labels.with_label(Label::MentionedTroll).map(|e| e.user_id.as_str()).collect();
    assert_eq!(mentioned, planted);
}

#[test]
fn infeasible_spec() {
    let d = small_spec(1);
    let spec = SyntheticSpec {
        mentioned_troll: ArchetypeParams { accusers: (5, 500), ..d.mentioned_troll.clone() },
        ..d.clone()
    };
    assert!(matches!(generate_synthetic(&spec), Err(Error::InfeasibleSpec(_))));
    let spec = SyntheticSpec {
        casual: ArchetypeParams { reply_rate: 1.5, ..d.casual.clone() },
        ..d
    };
    assert!(matches!(generate_synthetic(&spec), Err(Error::InfeasibleSpec(_))));
}

use crate::error::Error;

#[test]
fn mention_sweep_counts_are_monotone() {
    let d = small_spec(4);
    let spec = SyntheticSpec {
        mentioned_troll: ArchetypeParams { accusers: (3, 8), ..d.mentioned_troll.clone() },
        ..d
    };
    let (c, s) = build(&spec);
    let cfg = small_config(s.paid_troll_ids.clone());
    let rows = sweep_min_mentions(&c, &cfg, &[3, 4, 5, 6], EvalMode::CrossValidation).unwrap();
    assert_eq!(rows.iter().map(|r| r.min_mentions).collect::<Vec<_>>(), [3, 4, 5, 6]);
    for w in rows.windows(2) {
        assert!(w[1].trolls <= w[0].trolls);
    }
    assert!(rows.iter().all(|r| r.trolls == r.non_trolls));
    let text = report::mentions_sweep_text(&rows);
    assert!(text.contains("\"mentioned\" trolls"));
}

#[test]
fn paid_eval_and_sweeps() {
    let (c, s) = build(&small_spec(5));
    let cfg = small_config(s.paid_troll_ids.clone());
    let m = run_paid_troll_eval(&c, &cfg, AblationSpec::all_scaled()).unwrap();
    assert!(m.accuracy >= 0.75, "{m:?}");

    let points = sweep_min_comments(&c, &cfg, &[0, 30, 100_000]).unwrap();
    assert_eq!(points[0].paid_trolls, s.paid_troll_ids.len());
    assert_eq!(points[0].n_test, 2 * s.paid_troll_ids.len());
    assert!(points[1].paid_trolls <= points[0].paid_trolls);
    assert_eq!((points[2].n_test, points[2].metrics), (0, None));
    let csv = report::comments_sweep_csv(&points).unwrap();
    assert!(csv.lines().last().unwrap().ends_with(",,,"));
    assert!(sweep_min_comments(&c, &cfg, &[50, 10]).is_err());

    let mut strict = cfg.clone();
    strict.test_min_comments = 100_000;
    assert!(matches!(
        run_paid_troll_eval(&c, &strict, AblationSpec::all_scaled()),
        Err(Error::NoEligiblePaidTrolls(_))
    ));
}

#[test]
fn test_non_trolls_are_disjoint_from_training() {
    let (c, s) = build(&small_spec(6));
    let cfg = small_config(s.paid_troll_ids.clone());
    let p = Protocol::new(&c, &cfg).unwrap();
    let test = p.test_set(cfg.test_min_comments).unwrap();
    let train: BTreeSet<&String> = p.pair().trolls.iter().chain(&p.pair().non_trolls).collect();
    assert!(test.non_trolls.iter().all(|u| !train.contains(u)));
    assert_eq!(test.non_trolls.len(), test.paid_trolls.len());
    for u in &test.non_trolls {
        assert!(p.dataset().get(u).is_none_or(|e| e.mention_count == 0));
    }
}

#[test]
fn constant_group_ablation_is_a_no_op() {
    let (c, s) = build(&small_spec(7));
    let cfg = small_config(s.paid_troll_ids.clone());
    let p = Protocol::new(&c, &cfg).unwrap();
    let test = p.test_set(cfg.test_min_comments).unwrap();
    let mut table = p.feature_table([&test]).unwrap();
    let g = FeatureGroup::SimilarityTop;
    let cols = AblationSpec::only(g).unwrap().columns(&table.manifest).unwrap();
    for row in table.rows.values_mut() {
        for &k in &cols {
            row[k] = 0.25;
        }
    }
    let all = p.evaluate(&table, AblationSpec::all_scaled(), &test).unwrap();
    let minus = p.evaluate(&table, AblationSpec::minus(g).unwrap(), &test).unwrap();
    assert_eq!(all, minus);
}

#[test]
fn ablation_report_is_complete_and_sorted() {
    let (c, s) = build(&small_spec(8));
    let cfg = small_config(s.paid_troll_ids.clone());
    let r = run_ablation_suite(&c, &cfg).unwrap();
    assert_eq!(r.rows.len(), 35);
    assert_eq!(r.rows[0].label, "All Scaled (AS)");
    for w in r.rows.windows(2) {
        assert!(w[0].mode <= w[1].mode);
        if w[0].mode == w[1].mode {
            assert!(w[0].metrics.f_score >= w[1].metrics.f_score);
        }
    }
    assert_eq!(r.rows.last().unwrap().label, "All Unscaled");
    let text = report::ablation_text(&r);
    assert!(text.contains("AS + Non Scaled (NS)"));
    let csv = report::ablation_csv(&r).unwrap();
    assert_eq!(csv.lines().count(), 36);
    assert_eq!(csv, report::ablation_csv(&run_ablation_suite(&c, &cfg).unwrap()).unwrap());
}

#[test]
fn profile_normalization_examples() {
    let n = normalize_by_max(&[vec![0.15, 0.0, 2.0], vec![0.52, 0.0, 2.0], vec![0.36, 0.0, 2.0]]);
    assert!((n[0][0] - 0.288).abs() < 1e-3);
    assert_eq!(n[1][0], 1.0);
    assert!((n[2][0] - 0.692).abs() < 1e-3);
    assert_eq!([n[0][1], n[1][1], n[2][1]], [0.0; 3]);
    assert_eq!([n[0][2], n[1][2], n[2][2]], [1.0; 3]);
}

#[test]
fn profiles_reflect_archetypes() {
    let (c, s) = build(&small_spec(2));
    let counts = mention_counts(&detect_accusations(&c, &Default::default()));
    let cfg = LabelConfig { min_comments: 30, paid_troll_ids: s.paid_troll_ids.clone(), ..LabelConfig::default() };
    let labels = assign_labels(&c, &counts, &cfg).unwrap();
    let p = aggregate_profiles(&c, &labels, 5).unwrap();
    assert_eq!(p.statistics.len(), 11);
    for k in 0..11 {
        let max = p.groups.iter().map(|g| g.normalized[k]).fold(0.0, f64::max);
        assert!(max == 1.0 || p.groups.iter().all(|g| g.raw[k] == 0.0));
        assert!(p.groups.iter().all(|g| g.raw[k] >= 0.0));
    }
    let stat = |label: Label, name: &str| {
        let k = PROFILE_STATISTICS.iter().position(|s| *s == name).unwrap();
        p.groups.iter().find(|g| g.group == label).unwrap().raw[k]
    };
    assert!(stat(Label::MentionedTroll, "active_days_rate") > stat(Label::PaidTroll, "active_days_rate"));
    assert!(stat(Label::PaidTroll, "work_hours_rate") > stat(Label::NonTroll, "work_hours_rate"));
    let work = stat(Label::NonTroll, "work_hours_rate");
    assert!((work + stat(Label::NonTroll, "non_work_hours_rate") - 1.0).abs() < 1e-12);
    assert!(report::profile_text(&p).contains("active_days_rate"));

    let no_paid = LabelConfig { min_comments: 30, ..LabelConfig::default() };
    let labels = assign_labels(&c, &counts, &no_paid).unwrap();
    assert!(matches!(aggregate_profiles(&c, &labels, 5), Err(Error::EmptyGroup(_))));
}
