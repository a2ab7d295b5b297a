use serde::{Deserialize, Serialize};

use super::{recognize, GestureError, GesturePath, Recognition, TemplateStore};

/// Outcome of recognizing a labeled set.
///
/// `confusion[i][j]` counts trials labeled `labels[i]` that were recognized
/// as `labels[j]`; the extra last column counts rejections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
}

impl Evaluation {
    pub fn trials(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }
}

pub fn evaluate(
    store: &TemplateStore,
    labeled_set: &[(GesturePath, String)],
    reject_threshold: f64,
) -> Result<Evaluation, GestureError> {
    if labeled_set.is_empty() {
        return Err(GestureError::EmptyLabeledSet);
    }
    let labels: Vec<String> = store.templates().iter().map(|t| t.name.clone()).collect();
    let index_of = |name: &str| labels.iter().position(|l| l == name);
    let classes = labels.len();
    let mut confusion = vec![vec![0usize; classes + 1]; classes];
    let mut correct = 0usize;
    for (path, truth) in labeled_set {
        let row = index_of(truth).ok_or_else(|| GestureError::UnknownLabel(truth.clone()))?;
        let col = match recognize(path, store.templates(), store.n(), reject_threshold)? {
            Recognition::Match(r) => index_of(&r.template_name).expect("winner comes from the store"),
            Recognition::NoMatch { .. } => classes,
        };
        if row == col {
            correct += 1;
        }
        confusion[row][col] += 1;
    }

    let mut f1_sum = 0.0;
    let mut counted = 0usize;
    for c in 0..classes {
        let tp = confusion[c][c] as f64;
        let actual: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[c]).sum();
        if actual == 0 && predicted == 0 {
            continue;
        }
        let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
        let recall = if actual > 0 { tp / actual as f64 } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        f1_sum += f1;
        counted += 1;
    }
    Ok(Evaluation {
        accuracy: correct as f64 / labeled_set.len() as f64,
        macro_f1: if counted > 0 { f1_sum / counted as f64 } else { 0.0 },
        labels,
        confusion,
    })
}
