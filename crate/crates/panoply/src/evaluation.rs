//! Inventory evaluation: instance matching and recognition metrics.
//!
//! Predicted instances are paired with surveyed ground-truth assets by
//! class-aware greedy matching (globally closest pair first, within a
//! distance gate). Matched pairs are true positives; leftover predictions
//! and truths are false positives and false negatives. Per-class precision,
//! recall, F1, and mean localization error follow, plus an unweighted
//! (macro) average over the classes present in the ground truth.

use nalgebra::Vector3;

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::instances::AssetInstance;

/// A surveyed asset in the model frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthAsset {
    pub class_id: u8,
    pub location: Vector3<f64>,
}

/// One matched prediction/truth pair and its separation.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub prediction: usize,
    pub truth: usize,
    pub distance: f64,
}

/// Result of matching: TP pairs plus the unmatched leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_predictions: Vec<usize>,
    pub unmatched_truths: Vec<usize>,
}

/// Greedily matches same-class prediction/truth pairs within `max_dist`,
/// globally closest first; every entity matches at most once.
pub fn match_instances(
    predictions: &[AssetInstance],
    truths: &[GroundTruthAsset],
    max_dist: f64,
) -> Result<Matching> {
    if !max_dist.is_finite() || max_dist <= 0.0 {
        return Err(Error::invalid_input("matching distance must be positive"));
    }
    let mut candidates: Vec<MatchedPair> = Vec::new();
    for (i, pred) in predictions.iter().enumerate() {
        for (j, truth) in truths.iter().enumerate() {
            if pred.class_id != truth.class_id {
                continue;
            }
            let distance = (pred.centroid - truth.location).norm();
            if distance <= max_dist {
                candidates.push(MatchedPair {
                    prediction: i,
                    truth: j,
                    distance,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.prediction.cmp(&b.prediction))
            .then(a.truth.cmp(&b.truth))
    });

    let mut pred_taken = vec![false; predictions.len()];
    let mut truth_taken = vec![false; truths.len()];
    let mut pairs = Vec::new();
    for c in candidates {
        if pred_taken[c.prediction] || truth_taken[c.truth] {
            continue;
        }
        pred_taken[c.prediction] = true;
        truth_taken[c.truth] = true;
        pairs.push(c);
    }
    Ok(Matching {
        pairs,
        unmatched_predictions: (0..predictions.len()).filter(|&i| !pred_taken[i]).collect(),
        unmatched_truths: (0..truths.len()).filter(|&j| !truth_taken[j]).collect(),
    })
}

/// Metrics for one class row.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub class_id: u8,
    pub name: String,
    pub ground_truth: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Mean Euclidean error over this class's TP pairs; absent when TP = 0.
    pub mean_distance: Option<f64>,
}

impl ClassMetrics {
    /// Computes the derived metrics from raw counts.
    ///
    /// Conventions: precision is 0 when TP+FP = 0, recall is 0 when
    /// TP+FN = 0, and F1 is 0 when precision + recall = 0.
    pub fn from_counts(
        class_id: u8,
        name: impl Into<String>,
        true_positives: usize,
        false_positives: usize,
        false_negatives: usize,
        mean_distance: Option<f64>,
    ) -> ClassMetrics {
        let tp = true_positives as f64;
        let precision = if true_positives + false_positives == 0 {
            0.0
        } else {
            tp / (tp + false_positives as f64)
        };
        let recall = if true_positives + false_negatives == 0 {
            0.0
        } else {
            tp / (tp + false_negatives as f64)
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            class_id,
            name: name.into(),
            ground_truth: true_positives + false_negatives,
            true_positives,
            false_positives,
            false_negatives,
            precision,
            recall,
            f1,
            mean_distance,
        }
    }
}

/// Unweighted average over the classes present in the ground truth; the
/// distance averages the per-class mean errors of classes with TP > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroAverage {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_distance: Option<f64>,
    /// Number of classes the average runs over.
    pub classes: usize,
}

/// Per-class rows (every class seen in predictions or truths, ascending id)
/// plus the macro-average row.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub average: MacroAverage,
}

impl EvalReport {
    /// Builds a report from per-class rows, deriving the macro average.
    pub fn from_class_metrics(per_class: Vec<ClassMetrics>) -> EvalReport {
        let in_gt: Vec<&ClassMetrics> =
            per_class.iter().filter(|m| m.ground_truth > 0).collect();
        let n = in_gt.len();
        let mean =
            |f: fn(&ClassMetrics) -> f64| in_gt.iter().map(|m| f(m)).sum::<f64>() / n.max(1) as f64;
        let with_distance: Vec<f64> = in_gt.iter().filter_map(|m| m.mean_distance).collect();
        let average = MacroAverage {
            precision: if n == 0 { 0.0 } else { mean(|m| m.precision) },
            recall: if n == 0 { 0.0 } else { mean(|m| m.recall) },
            f1: if n == 0 { 0.0 } else { mean(|m| m.f1) },
            mean_distance: if with_distance.is_empty() {
                None
            } else {
                Some(with_distance.iter().sum::<f64>() / with_distance.len() as f64)
            },
            classes: n,
        };
        EvalReport { per_class, average }
    }
}

/// Turns a matching into per-class and macro metrics.
pub fn compute_metrics(
    predictions: &[AssetInstance],
    truths: &[GroundTruthAsset],
    matching: &Matching,
    table: &ClassTable,
) -> EvalReport {
    let mut class_ids: Vec<u8> = predictions
        .iter()
        .map(|p| p.class_id)
        .chain(truths.iter().map(|t| t.class_id))
        .collect();
    class_ids.sort_unstable();
    class_ids.dedup();

    let per_class = class_ids
        .into_iter()
        .map(|class_id| {
            let mut tp = 0usize;
            let mut distance_sum = 0.0;
            for pair in &matching.pairs {
                if truths[pair.truth].class_id == class_id {
                    tp += 1;
                    distance_sum += pair.distance;
                }
            }
            let fp = matching
                .unmatched_predictions
                .iter()
                .filter(|&&i| predictions[i].class_id == class_id)
                .count();
            let fn_count = matching
                .unmatched_truths
                .iter()
                .filter(|&&j| truths[j].class_id == class_id)
                .count();
            let mean_distance = (tp > 0).then(|| distance_sum / tp as f64);
            ClassMetrics::from_counts(
                class_id,
                table.name(class_id),
                tp,
                fp,
                fn_count,
                mean_distance,
            )
        })
        .collect();
    EvalReport::from_class_metrics(per_class)
}
