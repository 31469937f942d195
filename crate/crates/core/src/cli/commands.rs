use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::manifest::Run;
use super::settings::Settings;
use super::{CmdResult, Failure};
use crate::corpus::{load_corpus, Corpus, COMMENTS_FILE, PUBLICATIONS_FILE, USERS_FILE};
use crate::error::Error;
use crate::experiments::synth::{read_id_list, GROUND_TRUTH_FILE, METADATA_FILE, PAID_TROLLS_FILE};
use crate::experiments::{
    aggregate_profiles, generate_synthetic, report, run_ablation_suite, sweep_min_comments,
    sweep_min_mentions, AblationSpec, EvalMode, ExperimentConfig, FeatureTable, Metrics, Protocol,
    FEATURE_SET_KEY,
};
use crate::features::write_feature_csv;
use crate::labeling::{assign_labels, detect_accusations, mention_counts, Label};
use crate::svm::{default_c_grid, default_gamma_grid, grid_search, SvmModel};
use crate::textsim::Vocabulary;

pub struct Context {
    pub settings: Settings,
    pub config_file: Option<PathBuf>,
}

const DEFAULT_COMMENT_THRESHOLDS: [u64; 13] = [0, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250, 275, 300];
const DEFAULT_MENTION_THRESHOLDS: [u64; 6] = [3, 4, 5, 6, 7, 8];

fn log(msg: impl AsRef<str>) {
    eprintln!("trollscope: {}", msg.as_ref());
}

impl Context {
    fn start(&self) -> Result<Run, Failure> {
        let mut run = Run::start(&self.settings.out)?;
        if let Some(p) = &self.config_file {
            run.input(p)?;
        }
        Ok(run)
    }

    fn corpus(&self, run: &mut Run) -> Result<Corpus, Failure> {
        let dir = self
            .settings
            .corpus_dir()
            .ok_or_else(|| Failure::Usage("--corpus is required for this command".into()))?;
        for f in [PUBLICATIONS_FILE, COMMENTS_FILE, USERS_FILE] {
            run.input(&dir.join(f))?;
        }
        let corpus = load_corpus(dir, &self.settings.timezone)?;
        let c = corpus.counts();
        log(format!(
            "loaded {} publications, {} comments, {} users from {}",
            c.publications,
            c.comments,
            c.users,
            dir.display()
        ));
        Ok(corpus)
    }

    fn paid_trolls(&self, run: &mut Run) -> Result<Vec<String>, Failure> {
        match &self.settings.paid_trolls {
            Some(p) => {
                run.input(p)?;
                Ok(read_id_list(p)?)
            }
            None => Ok(Vec::new()),
        }
    }

    fn experiment(&self, run: &mut Run) -> Result<(Corpus, ExperimentConfig), Failure> {
        let corpus = self.corpus(run)?;
        let paid = self.paid_trolls(run)?;
        if let Some(p) = &self.settings.lexicon {
            run.input(p)?;
        }
        let config = self.settings.experiment_config(paid)?;
        Ok((corpus, config))
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> crate::error::Result<()>) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_text<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

pub fn synth(ctx: &Context) -> CmdResult {
    let spec = &ctx.settings.synth;
    let mut run = ctx.start()?;
    let corpus = generate_synthetic(spec)?;
    corpus.write(&run.out, spec)?;
    for f in [PUBLICATIONS_FILE, COMMENTS_FILE, USERS_FILE, GROUND_TRUTH_FILE, PAID_TROLLS_FILE, METADATA_FILE] {
        run.record(f)?;
    }
    log(format!(
        "wrote {} users, {} comments ({} paid trolls) to {}",
        corpus.users.len(),
        corpus.comments.len(),
        corpus.paid_troll_ids.len(),
        run.out.display()
    ));
    run.finish("synth", &ctx.settings, json!({}))?;
    Ok(())
}

#[derive(Serialize)]
struct IngestSummary {
    timezone: String,
    publications: usize,
    comments: usize,
    replies: usize,
    users: usize,
    users_with_comments: usize,
    first_comment: Option<String>,
    last_comment: Option<String>,
}

pub fn ingest(ctx: &Context) -> CmdResult {
    let mut run = ctx.start()?;
    let corpus = ctx.corpus(&mut run)?;
    let c = corpus.counts();
    let first = corpus.comments().iter().map(|c| c.posted_at).min();
    let summary = IngestSummary {
        timezone: ctx.settings.timezone.clone(),
        publications: c.publications,
        comments: c.comments,
        replies: c.replies,
        users: c.users,
        users_with_comments: (0..c.users).filter(|&u| !corpus.comments_of(u).is_empty()).count(),
        first_comment: first.map(|t| t.to_rfc3339()),
        last_comment: corpus.end().map(|t| t.to_rfc3339()),
    };
    let text = json_text(&summary)?;
    print!("{text}");
    run.write("summary.json", text)?;
    run.finish("ingest", &ctx.settings, json!({}))?;
    Ok(())
}

pub fn label(ctx: &Context) -> CmdResult {
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let accusations = detect_accusations(&corpus, &config.lexicon);
    let counts = mention_counts(&accusations);
    let dataset = assign_labels(&corpus, &counts, &config.label)?;
    run.write("labels.csv", csv_bytes(|b| dataset.write_csv(b))?)?;
    let acc = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["accuser_id", "accused_id", "comment_id"])?;
        for a in &accusations {
            w.write_record([&a.accuser_id, &a.accused_id, &a.comment_id])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))
    })?;
    run.write("accusations.csv", acc)?;
    for l in [Label::MentionedTroll, Label::PaidTroll, Label::NonTroll, Label::Excluded] {
        println!("{:>16}  {}", l.as_str(), dataset.count(l));
    }
    println!("{:>16}  {}", "accusations", accusations.len());
    run.finish("label", &ctx.settings, json!({}))?;
    Ok(())
}

pub fn featurize(ctx: &Context, all_users: bool) -> CmdResult {
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let ids: Vec<String> = if all_users {
        (0..corpus.users().len())
            .filter(|&u| !corpus.comments_of(u).is_empty())
            .map(|u| corpus.users()[u].id.clone())
            .collect()
    } else {
        let protocol = Protocol::new(&corpus, &config)?;
        let test = protocol.test_set(config.test_min_comments)?;
        let (mut ids, _) = protocol.training_set();
        ids.extend(test.ids_and_labels().0);
        ids
    };
    let table = FeatureTable::build(&corpus, &config.features, &ids)?;
    let rows: Vec<_> = table
        .rows
        .iter()
        .map(|(id, v)| crate::features::FeatureVector {
            user_id: id.clone(),
            values: v.clone(),
        })
        .collect();
    run.write("features.csv", csv_bytes(|b| write_feature_csv(b, &table.manifest, &rows))?)?;
    run.write("manifest.csv", table.manifest.to_csv())?;
    run.write("vocabulary.txt", Vocabulary::fit_corpus(&corpus)?.to_text())?;
    log(format!(
        "{} users x {} features, fingerprint {}",
        rows.len(),
        table.manifest.len(),
        table.manifest.fingerprint()
    ));
    run.finish("featurize", &ctx.settings, json!({ "all_users": all_users }))?;
    Ok(())
}

pub fn train(ctx: &Context, features: AblationSpec, grid: bool) -> CmdResult {
    let mut run = ctx.start()?;
    let (corpus, mut config) = ctx.experiment(&mut run)?;
    let mut protocol = Protocol::new(&corpus, &config)?;
    let table = protocol.feature_table(std::iter::empty())?;
    if grid {
        let columns = features.columns(&table.manifest)?;
        let (ids, labels) = protocol.training_set();
        let matrix = table.matrix(&ids, &columns)?;
        let result = grid_search(
            &matrix,
            &labels,
            &default_c_grid(),
            &default_gamma_grid(),
            config.folds,
            &config.train,
        )?;
        let cells = csv_bytes(|b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["c", "gamma", "accuracy", "precision", "recall", "f_score"])?;
            for cell in &result.cells {
                let m = &cell.mean;
                w.write_record(
                    [cell.c, cell.gamma, m.accuracy, m.precision, m.recall, m.f_score].map(|v| v.to_string()),
                )?;
            }
            w.flush().map_err(|e| Error::Csv(e.into()))
        })?;
        run.write("grid.csv", cells)?;
        log(format!(
            "grid search: C={} gamma={} cv accuracy {}",
            result.best_c, result.best_gamma, result.best.accuracy
        ));
        config.train.c = result.best_c;
        config.train.kernel.gamma = result.best_gamma;
        protocol = Protocol::new(&corpus, &config)?;
    }
    let model = protocol.train_model(&table, features)?;
    run.write("model.txt", model.to_text())?;
    log(format!(
        "trained {} on {} users: {} support vectors, C={} gamma={}",
        features,
        protocol.training_set().0.len(),
        model.support_vectors.len(),
        model.c,
        model.kernel.gamma
    ));
    let args = json!({
        "features": features.to_string(),
        "grid": grid,
        "c": config.train.c,
        "gamma": config.train.kernel.gamma,
    });
    run.finish("train", &ctx.settings, args)?;
    Ok(())
}

#[derive(Serialize)]
struct EvaluationOutput<'a> {
    feature_set: &'a str,
    metrics: Metrics,
    display: [(&'static str, String); 4],
    paid_trolls: usize,
    non_trolls: usize,
}

pub fn evaluate(ctx: &Context, model_path: &Path) -> CmdResult {
    let mut run = ctx.start()?;
    run.input(model_path)?;
    let model = SvmModel::load(model_path)?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let protocol = Protocol::new(&corpus, &config)?;
    let test = protocol.paid_test_set()?;
    let (ids, gold) = test.ids_and_labels();
    let table = FeatureTable::build(&corpus, &config.features, &ids)?;
    model.check_fingerprint(&table.manifest.fingerprint())?;
    let feature_set = model
        .metadata
        .get(FEATURE_SET_KEY)
        .ok_or_else(|| Error::ModelFormat(format!("missing {FEATURE_SET_KEY} metadata")))?;
    let spec: AblationSpec = feature_set.parse()?;
    let columns = spec.columns(&table.manifest)?;
    let predictions = model.predict_many(&table.matrix(&ids, &columns)?)?;
    let predicted: Vec<i8> = predictions.iter().map(|p| p.label).collect();
    let metrics = crate::experiments::compute_metrics(&predicted, &gold, 1)?;

    let preds = csv_bytes(|b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["user_id", "gold", "predicted", "decision"])?;
        for ((id, g), p) in ids.iter().zip(&gold).zip(&predictions) {
            w.write_record([id.clone(), g.to_string(), p.label.to_string(), p.decision.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))
    })?;
    run.write("predictions.csv", preds)?;
    let out = EvaluationOutput {
        feature_set,
        metrics,
        display: [
            ("accuracy", metrics.accuracy_display()),
            ("precision", metrics.precision_display()),
            ("recall", metrics.recall_display()),
            ("f_score", metrics.f_score_display()),
        ],
        paid_trolls: test.paid_trolls.len(),
        non_trolls: test.non_trolls.len(),
    };
    run.write("metrics.json", json_text(&out)?)?;
    println!(
        "{}: accuracy {}  precision {}  recall {}  F {}  ({} paid trolls, {} non-trolls)",
        spec.label(),
        out.display[0].1,
        out.display[1].1,
        out.display[2].1,
        out.display[3].1,
        out.paid_trolls,
        out.non_trolls
    );
    run.finish("evaluate", &ctx.settings, json!({ "model": model_path.display().to_string() }))?;
    Ok(())
}

pub fn ablate(ctx: &Context) -> CmdResult {
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let report = run_ablation_suite(&corpus, &config)?;
    let text = report::ablation_text(&report);
    print!("{text}");
    run.write("ablation.txt", text)?;
    run.write("ablation.csv", report::ablation_csv(&report)?)?;
    run.finish("ablate", &ctx.settings, json!({}))?;
    Ok(())
}

pub fn sweep_comments(ctx: &Context, values: Vec<u64>) -> CmdResult {
    let values = if values.is_empty() { DEFAULT_COMMENT_THRESHOLDS.to_vec() } else { values };
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let points = sweep_min_comments(&corpus, &config, &values)?;
    let text = report::comments_sweep_text(&points);
    print!("{text}");
    run.write("sweep_comments.txt", text)?;
    run.write("sweep_comments.csv", report::comments_sweep_csv(&points)?)?;
    run.finish("sweep", &ctx.settings, json!({ "by": "comments", "values": values }))?;
    Ok(())
}

pub fn sweep_mentions(ctx: &Context, values: Vec<u64>, mode: &str) -> CmdResult {
    let values = if values.is_empty() { DEFAULT_MENTION_THRESHOLDS.to_vec() } else { values };
    let mentions = values
        .iter()
        .map(|&v| u32::try_from(v).map_err(|_| Failure::Usage(format!("mention threshold {v} is too large"))))
        .collect::<Result<Vec<u32>, _>>()?;
    let eval: EvalMode = mode.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let rows = sweep_min_mentions(&corpus, &config, &mentions, eval)?;
    let text = report::mentions_sweep_text(&rows);
    print!("{text}");
    run.write("sweep_mentions.txt", text)?;
    run.write("sweep_mentions.csv", report::mentions_sweep_csv(&rows)?)?;
    let args = json!({ "by": "mentions", "values": values, "mode": eval });
    run.finish("sweep", &ctx.settings, args)?;
    Ok(())
}

pub fn profile(ctx: &Context, top: usize) -> CmdResult {
    let mut run = ctx.start()?;
    let (corpus, config) = ctx.experiment(&mut run)?;
    let counts = mention_counts(&detect_accusations(&corpus, &config.lexicon));
    let dataset = assign_labels(&corpus, &counts, &config.label)?;
    let profile = aggregate_profiles(&corpus, &dataset, top)?;
    let text = report::profile_text(&profile);
    print!("{text}");
    run.write("profile.txt", text)?;
    run.write("profile.csv", report::profile_csv(&profile)?)?;
    run.finish("profile", &ctx.settings, json!({ "top": top }))?;
    Ok(())
}
