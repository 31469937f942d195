use serde::Serialize;

use crate::error::{Error, Result};

/// Binary classification metrics with their confusion counts.
///
/// Every ratio is derived from the counts, so display rounding is done on the
/// exact fraction rather than on a binary float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `num/den` rounded half-up to two decimals; `0.00` when `den` is 0.
pub fn round2_exact(num: u64, den: u64) -> String {
    if den == 0 {
        return "0.00".into();
    }
    let hundredths = (200 * num as u128 + den as u128) / (2 * den as u128);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// Half-up two-decimal display for values that are not exact fractions.
pub fn round2(x: f64) -> String {
    format!("{:.2}", (x * 100.0).round() / 100.0)
}

impl Metrics {
    pub fn from_confusion(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Metrics {
            accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
            precision,
            recall,
            // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN), which is 0 exactly when P+R is 0.
            f_score: ratio(2 * tp, 2 * tp + fp + fn_),
            tp,
            fp,
            fn_,
            tn,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy_display(&self) -> String {
        round2_exact(self.tp + self.tn, self.total())
    }

    pub fn precision_display(&self) -> String {
        round2_exact(self.tp, self.tp + self.fp)
    }

    pub fn recall_display(&self) -> String {
        round2_exact(self.tp, self.tp + self.fn_)
    }

    pub fn f_score_display(&self) -> String {
        round2_exact(2 * self.tp, 2 * self.tp + self.fp + self.fn_)
    }
}

pub fn compute_metrics(predictions: &[i8], gold: &[i8], positive_label: i8) -> Result<Metrics> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidConfig("metrics need at least one prediction".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p == positive_label, g == positive_label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(Metrics::from_confusion(tp, fp, fn_, tn))
}

/// Fold-averaged metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl MeanMetrics {
    pub fn of(folds: &[Metrics]) -> Self {
        let n = folds.len().max(1) as f64;
        let mean = |f: fn(&Metrics) -> f64| folds.iter().map(f).sum::<f64>() / n;
        MeanMetrics {
            accuracy: mean(|m| m.accuracy),
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f_score: mean(|m| m.f_score),
        }
    }
}
