//! Aligned text tables and CSV for experiment results.
//!
//! Text tables show two decimals rounded half-up; CSV keeps full precision.

use std::fmt::Write as _;

use super::metrics::round2;
use super::profile::GroupProfile;
use super::protocol::{CommentsSweepPoint, ExperimentReport, MentionsSweepRow};
use crate::error::{Error, Result};

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Left-aligned first column, right-aligned others; `None` rows draw a rule.
fn table(header: &[&str], rows: &[Option<Vec<String>>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows.iter().flatten() {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let total = width.iter().sum::<usize>() + 2 * (width.len() - 1);
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
            let pad = w - c.chars().count();
            if i == 0 {
                s.push_str(c);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(c);
            }
        }
        s.trim_end().to_string()
    };
    let mut out = line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    out.push('\n');
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for r in rows {
        match r {
            Some(cells) => out.push_str(&line(cells)),
            None => out.push_str(&"-".repeat(total)),
        }
        out.push('\n');
    }
    out
}

pub fn ablation_text(report: &ExperimentReport) -> String {
    let mut rows = Vec::new();
    for (i, r) in report.rows.iter().enumerate() {
        if i > 0 && report.rows[i - 1].mode != r.mode {
            rows.push(None);
        }
        let m = &r.metrics;
        rows.push(Some(vec![
            r.label.clone(),
            m.accuracy_display(),
            m.precision_display(),
            m.recall_display(),
            m.f_score_display(),
        ]));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Training: {} mentioned trolls vs. {} non-trolls. Test: {} paid trolls vs. {} non-trolls.\n",
        report.train_trolls,
        report.train_non_trolls,
        report.test.paid_trolls.len(),
        report.test.non_trolls.len()
    );
    out.push_str(&table(&["Features", "Accuracy", "Precision", "Recall", "F-score"], &rows));
    out
}

pub fn ablation_csv(report: &ExperimentReport) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "feature_set", "mode", "group", "label", "accuracy", "precision", "recall", "f_score", "tp",
            "fp", "fn", "tn",
        ])?;
        for r in &report.rows {
            let m = &r.metrics;
            w.write_record([
                r.feature_set.clone(),
                r.mode.name().to_string(),
                r.group.unwrap_or("").to_string(),
                r.label.clone(),
                m.accuracy.to_string(),
                m.precision.to_string(),
                m.recall.to_string(),
                m.f_score.to_string(),
                m.tp.to_string(),
                m.fp.to_string(),
                m.fn_.to_string(),
                m.tn.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn comments_sweep_text(points: &[CommentsSweepPoint]) -> String {
    let rows: Vec<_> = points
        .iter()
        .map(|p| {
            let mut r = vec![p.min_comments.to_string(), p.paid_trolls.to_string(), p.n_test.to_string()];
            match &p.metrics {
                Some(m) => r.extend([
                    m.accuracy_display(),
                    m.precision_display(),
                    m.recall_display(),
                    m.f_score_display(),
                ]),
                None => r.extend(std::iter::repeat_n("-".to_string(), 4)),
            }
            Some(r)
        })
        .collect();
    table(
        &["min comments", "paid trolls", "test users", "Accuracy", "Precision", "Recall", "F-score"],
        &rows,
    )
}

/// Figure-style curve; metric cells are empty for thresholds with no paid trolls.
pub fn comments_sweep_csv(points: &[CommentsSweepPoint]) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "min_comments", "paid_trolls", "n_test", "accuracy", "precision", "recall", "f_score",
        ])?;
        for p in points {
            let mut r = vec![p.min_comments.to_string(), p.paid_trolls.to_string(), p.n_test.to_string()];
            match &p.metrics {
                Some(m) => r.extend([m.accuracy, m.precision, m.recall, m.f_score].map(|v| v.to_string())),
                None => r.extend(std::iter::repeat_n(String::new(), 4)),
            }
            w.write_record(&r)?;
        }
        Ok(())
    })
}

/// One column per min-mentions value.
pub fn mentions_sweep_text(rows: &[MentionsSweepRow]) -> String {
    let mut header = vec!["min mentions".to_string()];
    header.extend(rows.iter().map(|r| r.min_mentions.to_string()));
    let line = |name: &str, f: &dyn Fn(&MentionsSweepRow) -> String| {
        let mut v = vec![name.to_string()];
        v.extend(rows.iter().map(f));
        Some(v)
    };
    let body = vec![
        line("\"mentioned\" trolls", &|r| r.trolls.to_string()),
        line("non-trolls", &|r| r.non_trolls.to_string()),
        None,
        line("accuracy", &|r| round2(r.accuracy)),
        line("F-score", &|r| round2(r.f_score)),
    ];
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    table(&header, &body)
}

pub fn mentions_sweep_csv(rows: &[MentionsSweepRow]) -> Result<String> {
    csv_string(|w| {
        w.write_record([
            "min_mentions", "trolls", "non_trolls", "accuracy", "precision", "recall", "f_score",
        ])?;
        for r in rows {
            w.write_record([
                r.min_mentions.to_string(),
                r.trolls.to_string(),
                r.non_trolls.to_string(),
                r.accuracy.to_string(),
                r.precision.to_string(),
                r.recall.to_string(),
                r.f_score.to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn profile_text(profile: &GroupProfile) -> String {
    let mut header = vec!["statistic (value/max)".to_string()];
    header.extend(profile.groups.iter().map(|g| g.group.as_str().to_string()));
    let rows: Vec<_> = profile
        .statistics
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut r = vec![format!("{:>2} {s}", k + 1)];
            r.extend(profile.groups.iter().map(|g| round2(g.normalized[k])));
            Some(r)
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = table(&header, &rows);
    let _ = writeln!(out);
    for g in &profile.groups {
        let _ = writeln!(out, "{}: {} users", g.group.as_str(), g.users.len());
    }
    out
}

pub fn profile_csv(profile: &GroupProfile) -> Result<String> {
    csv_string(|w| {
        w.write_record(["statistic", "group", "users", "raw", "normalized"])?;
        for (k, s) in profile.statistics.iter().enumerate() {
            for g in &profile.groups {
                w.write_record([
                    s.to_string(),
                    g.group.as_str().to_string(),
                    g.users.len().to_string(),
                    g.raw[k].to_string(),
                    g.normalized[k].to_string(),
                ])?;
            }
        }
        Ok(())
    })
}
