//! Binary classifiers that return a real-valued score (higher means more
//! minority-like) for AUC computation.

mod knn;
mod linear;
mod qda;
mod tree;

use serde::{Deserialize, Serialize};

use crate::features::FeatureMatrix;

pub use knn::Knn;
pub use linear::LinearSvm;
pub use qda::Qda;
pub use tree::{AdaBoost, DecisionTree, RandomForest, TreeParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("SingleClassTraining: training data contains only label {0}")]
    SingleClassTraining(u8),
    #[error("NonFiniteInput")]
    NonFiniteInput,
    #[error("ShapeMismatch: model expects {expected} features, got {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("InvalidSpec: {0}")]
    InvalidSpec(String),
    #[error("NumericalFailure: {0}")]
    NumericalFailure(String),
}

impl ClassifyError {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifyError::SingleClassTraining(_) => "SingleClassTraining",
            ClassifyError::NonFiniteInput => "NonFiniteInput",
            ClassifyError::ShapeMismatch { .. } => "ShapeMismatch",
            ClassifyError::InvalidSpec(_) => "InvalidSpec",
            ClassifyError::NumericalFailure(_) => "NumericalFailure",
        }
    }
}

fn k5() -> usize {
    5
}
fn one() -> usize {
    1
}
fn c1() -> f64 {
    1.0
}
fn epochs() -> usize {
    200
}
fn lr() -> f64 {
    0.1
}
fn trees() -> usize {
    100
}
fn rounds() -> usize {
    50
}
fn ridge() -> f64 {
    1e-6
}

/// Classifier family and hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierSpec {
    Knn {
        #[serde(default = "k5")]
        k: usize,
    },
    Qda {
        /// Ridge added to each covariance, relative to its mean diagonal.
        #[serde(default = "ridge")]
        ridge: f64,
    },
    LinearSvm {
        #[serde(default = "c1")]
        c: f64,
        #[serde(default = "epochs")]
        epochs: usize,
        #[serde(default = "lr")]
        learning_rate: f64,
    },
    DecisionTree {
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "one")]
        min_leaf: usize,
    },
    RandomForest {
        #[serde(default = "trees")]
        n_trees: usize,
        #[serde(default)]
        max_depth: Option<usize>,
        #[serde(default = "one")]
        min_leaf: usize,
    },
    AdaBoost {
        #[serde(default = "rounds")]
        n_rounds: usize,
    },
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Knn { k: 5 }
    }
}

impl ClassifierSpec {
    pub fn knn(k: usize) -> Self {
        ClassifierSpec::Knn { k }
    }

    pub fn qda() -> Self {
        ClassifierSpec::Qda { ridge: ridge() }
    }

    pub fn linear_svm() -> Self {
        ClassifierSpec::LinearSvm {
            c: c1(),
            epochs: epochs(),
            learning_rate: lr(),
        }
    }

    pub fn decision_tree() -> Self {
        ClassifierSpec::DecisionTree {
            max_depth: None,
            min_leaf: 1,
        }
    }

    pub fn random_forest() -> Self {
        ClassifierSpec::RandomForest {
            n_trees: trees(),
            max_depth: None,
            min_leaf: 1,
        }
    }

    pub fn ada_boost() -> Self {
        ClassifierSpec::AdaBoost { n_rounds: rounds() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::Qda { .. } => "qda",
            ClassifierSpec::LinearSvm { .. } => "linear_svm",
            ClassifierSpec::DecisionTree { .. } => "decision_tree",
            ClassifierSpec::RandomForest { .. } => "random_forest",
            ClassifierSpec::AdaBoost { .. } => "ada_boost",
        }
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let bad = |msg: &str| {
            Err(ClassifyError::InvalidSpec(format!(
                "{}: {msg}",
                self.kind()
            )))
        };
        match *self {
            ClassifierSpec::Knn { k: 0 } => bad("k must be >= 1"),
            ClassifierSpec::Qda { ridge } if !(ridge >= 0.0 && ridge.is_finite()) => {
                bad("ridge must be >= 0")
            }
            ClassifierSpec::LinearSvm {
                c,
                epochs,
                learning_rate,
            } if !(c > 0.0 && c.is_finite())
                || epochs == 0
                || !(learning_rate > 0.0 && learning_rate.is_finite()) =>
            {
                bad("c, epochs and learning_rate must be positive")
            }
            ClassifierSpec::DecisionTree {
                max_depth,
                min_leaf,
            }
            | ClassifierSpec::RandomForest {
                max_depth,
                min_leaf,
                ..
            } if max_depth == Some(0) || min_leaf == 0 => {
                bad("max_depth and min_leaf must be positive")
            }
            ClassifierSpec::RandomForest { n_trees: 0, .. } => bad("n_trees must be >= 1"),
            ClassifierSpec::AdaBoost { n_rounds: 0 } => bad("n_rounds must be >= 1"),
            _ => Ok(()),
        }
    }

    /// Score at which `predict` switches to the minority class by default.
    pub fn natural_threshold(&self) -> f64 {
        match self {
            ClassifierSpec::Knn { .. }
            | ClassifierSpec::DecisionTree { .. }
            | ClassifierSpec::RandomForest { .. } => 0.5,
            ClassifierSpec::Qda { .. }
            | ClassifierSpec::LinearSvm { .. }
            | ClassifierSpec::AdaBoost { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
enum Model {
    Knn(Knn),
    Qda(Qda),
    LinearSvm(LinearSvm),
    Tree(DecisionTree),
    Forest(RandomForest),
    AdaBoost(AdaBoost),
}

/// A trained classifier. Immutable; safe to score from several threads.
#[derive(Debug, Clone)]
pub struct FittedModel {
    spec: ClassifierSpec,
    model: Model,
    feature_count: usize,
    training_class_counts: (usize, usize),
}

impl FittedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    /// (label-0 count, label-1 count) of the training data.
    pub fn training_class_counts(&self) -> (usize, usize) {
        self.training_class_counts
    }
}

/// Trains `spec` on `m`; `seed` drives any randomness.
pub fn fit(
    spec: &ClassifierSpec,
    m: &FeatureMatrix,
    seed: u64,
) -> Result<FittedModel, ClassifyError> {
    spec.validate()?;
    let counts = m.class_counts();
    if counts.0 == 0 || counts.1 == 0 {
        return Err(ClassifyError::SingleClassTraining(if counts.1 == 0 {
            0
        } else {
            1
        }));
    }
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(ClassifyError::NonFiniteInput);
    }
    let model = match *spec {
        ClassifierSpec::Knn { k } => Model::Knn(Knn::fit(m, k)),
        ClassifierSpec::Qda { ridge } => Model::Qda(Qda::fit(m, ridge)?),
        ClassifierSpec::LinearSvm {
            c,
            epochs,
            learning_rate,
        } => Model::LinearSvm(LinearSvm::fit(m, c, epochs, learning_rate, seed)),
        ClassifierSpec::DecisionTree {
            max_depth,
            min_leaf,
        } => Model::Tree(DecisionTree::fit(
            m,
            TreeParams {
                max_depth,
                min_leaf,
                max_features: None,
            },
        )),
        ClassifierSpec::RandomForest {
            n_trees,
            max_depth,
            min_leaf,
        } => Model::Forest(RandomForest::fit(
            m,
            n_trees,
            TreeParams {
                max_depth,
                min_leaf,
                max_features: None,
            },
            seed,
        )),
        ClassifierSpec::AdaBoost { n_rounds } => Model::AdaBoost(AdaBoost::fit(m, n_rounds)),
    };
    Ok(FittedModel {
        spec: spec.clone(),
        model,
        feature_count: m.n_features(),
        training_class_counts: counts,
    })
}

/// One score per row of `m`.
pub fn score(model: &FittedModel, m: &FeatureMatrix) -> Result<Vec<f64>, ClassifyError> {
    if m.n_features() != model.feature_count {
        return Err(ClassifyError::ShapeMismatch {
            expected: model.feature_count,
            found: m.n_features(),
        });
    }
    Ok(match &model.model {
        Model::Knn(k) => k.score(m),
        Model::Qda(q) => q.score(m),
        Model::LinearSvm(s) => s.score(m),
        Model::Tree(t) => m.rows().map(|r| t.score_row(r)).collect(),
        Model::Forest(f) => m.rows().map(|r| f.score_row(r)).collect(),
        Model::AdaBoost(a) => m.rows().map(|r| a.score_row(r)).collect(),
    })
}

/// Hard labels: 1 where the score reaches `threshold` (the model's natural
/// threshold when `None`).
pub fn predict(
    model: &FittedModel,
    m: &FeatureMatrix,
    threshold: Option<f64>,
) -> Result<Vec<u8>, ClassifyError> {
    let t = threshold.unwrap_or_else(|| model.spec.natural_threshold());
    Ok(score(model, m)?
        .into_iter()
        .map(|s| u8::from(s >= t))
        .collect())
}
