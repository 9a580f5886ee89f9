//! Classifier evaluation: confusion matrix, per-class and macro metrics,
//! seeded k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LinkClass;

/// A hand-labeled (url, context) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub url: String,
    pub context: String,
    pub label: LinkClass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows are gold classes, columns predicted, both in `LinkClass::ALL` order.
    pub confusion: [[u64; 3]; 3],
    /// Indexed like `LinkClass::ALL`.
    pub per_class: [ClassMetrics; 3],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl EvalReport {
    pub fn class(&self, class: LinkClass) -> ClassMetrics {
        self.per_class[class.index()]
    }

    pub fn from_confusion(confusion: [[u64; 3]; 3]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let trace: u64 = (0..3).map(|i| confusion[i][i]).sum();
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let mut per_class = [ClassMetrics::default(); 3];
        for (c, m) in per_class.iter_mut().enumerate() {
            let tp = confusion[c][c];
            let predicted: u64 = (0..3).map(|g| confusion[g][c]).sum();
            let gold: u64 = confusion[c].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, gold);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            *m = ClassMetrics { precision, recall, f1 };
        }
        let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / 3.0;
        EvalReport {
            confusion,
            per_class,
            macro_precision: mean(|m| m.precision),
            macro_recall: mean(|m| m.recall),
            macro_f1: mean(|m| m.f1),
            accuracy: ratio(trace, total),
        }
    }
}

pub fn evaluate(predictions: &[LinkClass], gold: &[LinkClass]) -> Result<EvalReport> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Invalid("cannot evaluate an empty label set".into()));
    }
    let mut confusion = [[0u64; 3]; 3];
    for (p, g) in predictions.iter().zip(gold) {
        confusion[g.index()][p.index()] += 1;
    }
    Ok(EvalReport::from_confusion(confusion))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFoldReport {
    pub folds: Vec<EvalReport>,
    /// Unweighted mean of every fold metric; the confusion matrix is the sum.
    pub mean: EvalReport,
}

/// Splits `0..n` into `k` contiguous folds of a seeded permutation. Fold sizes
/// differ by at most one; the first `n % k` folds get the extra item.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Invalid(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::Invalid(format!("k = {k} exceeds {n} examples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// k-fold cross-validation. `predict` receives the training examples and the
/// held-out examples and returns one label per held-out example.
pub fn kfold_evaluate<F>(
    labeled: &[LabeledExample],
    k: usize,
    seed: u64,
    mut predict: F,
) -> Result<KFoldReport>
where
    F: FnMut(&[LabeledExample], &[LabeledExample]) -> Vec<LinkClass>,
{
    let folds = fold_assignment(labeled.len(), k, seed)?;
    let mut reports = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let test: Vec<LabeledExample> = fold.iter().map(|&i| labeled[i].clone()).collect();
        let train: Vec<LabeledExample> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().map(|&i| labeled[i].clone()))
            .collect();
        let predictions = predict(&train, &test);
        let gold: Vec<LinkClass> = test.iter().map(|e| e.label).collect();
        reports.push(evaluate(&predictions, &gold)?);
    }
    let mean = mean_report(&reports);
    Ok(KFoldReport { folds: reports, mean })
}

fn mean_report(reports: &[EvalReport]) -> EvalReport {
    let n = reports.len() as f64;
    let mut confusion = [[0u64; 3]; 3];
    let mut per_class = [ClassMetrics::default(); 3];
    for r in reports {
        for g in 0..3 {
            for (c, add) in confusion[g].iter_mut().zip(r.confusion[g]) {
                *c += add;
            }
            per_class[g].precision += r.per_class[g].precision / n;
            per_class[g].recall += r.per_class[g].recall / n;
            per_class[g].f1 += r.per_class[g].f1 / n;
        }
    }
    let avg = |f: fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    EvalReport {
        confusion,
        per_class,
        macro_precision: avg(|r| r.macro_precision),
        macro_recall: avg(|r| r.macro_recall),
        macro_f1: avg(|r| r.macro_f1),
        accuracy: avg(|r| r.accuracy),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LinkClass::*;

    fn expand(confusion: [[u64; 3]; 3]) -> (Vec<LinkClass>, Vec<LinkClass>) {
        let mut pred = Vec::new();
        let mut gold = Vec::new();
        for (g, row) in confusion.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    gold.push(LinkClass::ALL[g]);
                    pred.push(LinkClass::ALL[p]);
                }
            }
        }
        (pred, gold)
    }

    #[test]
    fn perfect_predictions() {
        let gold = [Data, Methods, Supplement, Data];
        let r = evaluate(&gold, &gold).unwrap();
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_precision, 1.0);
        assert_eq!(r.macro_recall, 1.0);
    }

    #[test]
    fn worked_confusion() {
        let (pred, gold) = expand([[2, 0, 0], [0, 1, 1], [1, 0, 1]]);
        let r = evaluate(&pred, &gold).unwrap();
        let d = r.class(Data);
        assert!((d.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(d.recall, 1.0);
        assert!((d.f1 - 0.8).abs() < 1e-12);
        assert!((r.class(Methods).f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.class(Supplement).f1 - 0.5).abs() < 1e-12);
        assert!((r.macro_f1 - 0.6556).abs() < 1e-4);
        assert!((r.accuracy - 0.6667).abs() < 1e-4);
    }

    #[test]
    fn single_predicted_class() {
        let r = evaluate(&[Data, Data, Data], &[Data, Methods, Supplement]).unwrap();
        assert!((r.accuracy - 1.0 / 3.0).abs() < 1e-12);
        // Methods: nothing predicted, one gold -> precision 0 by definition.
        assert_eq!(r.class(Methods).precision, 0.0);
    }

    #[test]
    fn absent_class_has_zero_f1() {
        let r = evaluate(&[Data, Methods], &[Data, Methods]).unwrap();
        assert_eq!(r.class(Supplement).f1, 0.0);
        assert!((r.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            evaluate(&[Data], &[Data, Data]),
            Err(Error::LengthMismatch { predictions: 1, gold: 2 })
        ));
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn fold_sizes() {
        let folds = fold_assignment(10, 10, 7).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
        let folds = fold_assignment(11, 10, 7).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, [2, 1, 1, 1, 1, 1, 1, 1, 1, 1]);
        let mut all: Vec<usize> = folds.into_iter().flatten().collect();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
    }

    #[test]
    fn folds_are_seeded() {
        assert_eq!(fold_assignment(37, 5, 42).unwrap(), fold_assignment(37, 5, 42).unwrap());
        assert_ne!(fold_assignment(37, 5, 42).unwrap(), fold_assignment(37, 5, 43).unwrap());
    }

    #[test]
    fn fold_errors() {
        assert!(fold_assignment(5, 6, 0).is_err());
        assert!(fold_assignment(5, 1, 0).is_err());
    }

    #[test]
    fn kfold_mean_of_oracle_is_perfect() {
        let labeled: Vec<LabeledExample> = (0..12)
            .map(|i| LabeledExample {
                url: format!("http://x.org/{i}"),
                context: String::new(),
                label: LinkClass::ALL[i % 3],
            })
            .collect();
        let report = kfold_evaluate(&labeled, 4, 1, |train, test| {
            assert_eq!(train.len() + test.len(), 12);
            test.iter().map(|e| e.label).collect()
        })
        .unwrap();
        assert_eq!(report.folds.len(), 4);
        assert_eq!(report.mean.accuracy, 1.0);
        let total: u64 = report.mean.confusion.iter().flatten().sum();
        assert_eq!(total, 12);
    }
}
