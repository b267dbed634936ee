use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{HValue, StripsHeuristic};
use crate::strips::{StripsState, StripsTask};

/// Ridge damping added to the normal equations.
pub const RIDGE: f64 = 1e-6;

/// Real-valued predictions are scaled by this and rounded to integers.
const SCALE: f64 = 1e3;

#[derive(Debug, Error, PartialEq)]
pub enum SurrogateError {
    #[error("at least one training sample is required")]
    NoSamples,
    #[error("sample has {got} features, model has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("normal equations are singular")]
    Singular,
    #[error("invalid model json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub features: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
}

impl SurrogateModel {
    pub fn predict(&self, features: &[f64]) -> f64 {
        self.weights.iter().zip(features).map(|(w, x)| w * x).sum()
    }

    pub fn weight(&self, feature: &str) -> Option<f64> {
        self.features.iter().position(|f| f == feature).map(|i| self.weights[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SurrogateError> {
        let m: SurrogateModel =
            serde_json::from_str(text).map_err(|e| SurrogateError::Json(e.to_string()))?;
        if m.features.len() != m.weights.len() {
            return Err(SurrogateError::DimensionMismatch {
                expected: m.features.len(),
                got: m.weights.len(),
            });
        }
        Ok(m)
    }
}

/// `round(max(0, prediction) * 1000)`.
pub fn surrogate_value(prediction: f64) -> HValue {
    if prediction.is_nan() || prediction <= 0.0 {
        return HValue::ZERO;
    }
    let scaled = (prediction * SCALE).round();
    if scaled >= (u64::MAX - 1) as f64 {
        return HValue::new(u64::MAX - 1);
    }
    HValue::new(scaled as u64)
}

/// Least squares with ridge damping, solved through the normal equations.
/// Deterministic for a given sample order.
pub fn fit_surrogate(
    features: Vec<String>,
    samples: &[TrainingSample],
) -> Result<SurrogateModel, SurrogateError> {
    if samples.is_empty() {
        return Err(SurrogateError::NoSamples);
    }
    let d = features.len();
    let mut ata = vec![vec![0.0f64; d]; d];
    let mut atb = vec![0.0f64; d];
    for s in samples {
        if s.features.len() != d {
            return Err(SurrogateError::DimensionMismatch { expected: d, got: s.features.len() });
        }
        for i in 0..d {
            let xi = s.features[i];
            if xi == 0.0 {
                continue;
            }
            atb[i] += xi * s.target;
            for j in 0..d {
                ata[i][j] += xi * s.features[j];
            }
        }
    }
    for (i, row) in ata.iter_mut().enumerate() {
        row[i] += RIDGE;
    }
    let weights = solve(ata, atb).ok_or(SurrogateError::Singular)?;
    Ok(SurrogateModel { features, weights })
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Per-predicate aggregate features over a domain's fact vocabulary, so one
/// model applies to every instance of the domain regardless of size.
///
/// Layout: `bias`, `unsat-goals`, `applicable`, then for each predicate `p`
/// `unsat-goal:p` and `true:p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub predicates: Vec<String>,
}

impl FeatureExtractor {
    pub fn new(predicates: Vec<String>) -> Self {
        FeatureExtractor { predicates }
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = vec!["bias".to_string(), "unsat-goals".into(), "applicable".into()];
        for p in &self.predicates {
            v.push(format!("unsat-goal:{p}"));
            v.push(format!("true:{p}"));
        }
        v
    }

    fn predicate_of(&self, fact_name: &str) -> Option<usize> {
        let head = fact_name.split('(').next()?;
        self.predicates.iter().position(|p| p == head)
    }

    pub fn features(&self, task: &StripsTask, s: &StripsState) -> Vec<f64> {
        let np = self.predicates.len();
        let mut out = vec![0.0; 3 + 2 * np];
        out[0] = 1.0;
        out[2] = task.applicable_actions(s).len() as f64;
        for &g in task.goal() {
            if !s.contains(g) {
                out[1] += 1.0;
                if let Some(p) = self.predicate_of(task.fact_name(g)) {
                    out[3 + 2 * p] += 1.0;
                }
            }
        }
        for f in s.iter() {
            if let Some(p) = self.predicate_of(task.fact_name(f)) {
                out[4 + 2 * p] += 1.0;
            }
        }
        out
    }
}

/// A fitted surrogate evaluated on the states of one task.
pub struct SurrogateHeuristic {
    name: String,
    model: Arc<SurrogateModel>,
    task: Arc<StripsTask>,
    fact_predicate: Vec<Option<usize>>,
    num_predicates: usize,
}

impl SurrogateHeuristic {
    pub fn new(
        name: impl Into<String>,
        model: Arc<SurrogateModel>,
        extractor: &FeatureExtractor,
        task: Arc<StripsTask>,
    ) -> Result<Self, SurrogateError> {
        let expected = extractor.names().len();
        if model.weights.len() != expected {
            return Err(SurrogateError::DimensionMismatch { expected, got: model.weights.len() });
        }
        let fact_predicate =
            task.fact_names().iter().map(|n| extractor.predicate_of(n)).collect();
        Ok(SurrogateHeuristic {
            name: name.into(),
            model,
            task,
            fact_predicate,
            num_predicates: extractor.predicates.len(),
        })
    }

    pub fn prediction(&self, s: &StripsState) -> f64 {
        let w = &self.model.weights;
        let mut acc = w[0] + w[2] * self.task.applicable_actions(s).len() as f64;
        let mut unsat = 0.0;
        for &g in self.task.goal() {
            if !s.contains(g) {
                unsat += 1.0;
                if let Some(p) = self.fact_predicate[g.index()] {
                    acc += w[3 + 2 * p];
                }
            }
        }
        acc += w[1] * unsat;
        for f in s.iter() {
            if let Some(p) = self.fact_predicate[f.index()] {
                acc += w[4 + 2 * p];
            }
        }
        debug_assert!(self.num_predicates * 2 + 3 == w.len());
        acc
    }
}

impl StripsHeuristic for SurrogateHeuristic {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &StripsState) -> HValue {
        surrogate_value(self.prediction(s))
    }
}
