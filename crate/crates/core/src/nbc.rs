//! Binary naive Bayes classifiers over categorical features.
//!
//! Values are stored as 0-based indices into each feature's domain. Class
//! index 0 is the negative class and index 1 the positive class. All
//! probabilities are natural logarithms.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical feature and its ordered value labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub domain: Vec<String>,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>, domain: Vec<String>) -> Result<Self> {
        let spec = FeatureSpec {
            name: name.into(),
            domain,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }

    fn validate(&self) -> Result<()> {
        if self.domain.is_empty() {
            return Err(Error::InvalidModel(format!(
                "feature '{}' has an empty domain",
                self.name
            )));
        }
        for (i, v) in self.domain.iter().enumerate() {
            if self.domain[..i].contains(v) {
                return Err(Error::InvalidModel(format!(
                    "feature '{}' repeats domain value '{}'",
                    self.name, v
                )));
            }
        }
        Ok(())
    }
}

/// Number of points in the feature space spanned by `features`, or `None` on
/// overflow of `u128`.
pub fn space_size<'a>(sizes: impl IntoIterator<Item = &'a FeatureSpec>) -> Option<u128> {
    sizes
        .into_iter()
        .try_fold(1u128, |acc, f| acc.checked_mul(f.size() as u128))
}

/// A point in feature space: one value index per feature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Instance(Vec<usize>);

impl Instance {
    pub fn new(values: Vec<usize>) -> Self {
        Instance(values)
    }

    /// Builds an instance from value labels, naming the offending feature on
    /// failure.
    pub fn from_labels<S: AsRef<str>>(features: &[FeatureSpec], labels: &[S]) -> Result<Self> {
        if labels.len() != features.len() {
            return Err(Error::DomainMismatch(format!(
                "expected {} values, got {}",
                features.len(),
                labels.len()
            )));
        }
        let values = features
            .iter()
            .zip(labels)
            .map(|(f, l)| {
                let l = l.as_ref().trim();
                f.value_index(l).ok_or_else(|| {
                    Error::DomainMismatch(format!(
                        "value '{}' is not in the domain of feature '{}'",
                        l, f.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance(values))
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, feature: usize) -> usize {
        self.0[feature]
    }

    pub fn labels<'a>(&self, features: &'a [FeatureSpec]) -> Vec<&'a str> {
        features
            .iter()
            .zip(&self.0)
            .map(|(f, &v)| f.domain[v].as_str())
            .collect()
    }

    /// Checks the instance against a list of feature specs.
    pub fn conforms(&self, features: &[FeatureSpec]) -> Result<()> {
        if self.0.len() != features.len() {
            return Err(Error::DomainMismatch(format!(
                "instance has {} values but the model has {} features",
                self.0.len(),
                features.len()
            )));
        }
        for (f, &v) in features.iter().zip(&self.0) {
            if v >= f.size() {
                return Err(Error::DomainMismatch(format!(
                    "value index {} out of range for feature '{}' (domain size {})",
                    v,
                    f.name,
                    f.size()
                )));
            }
        }
        Ok(())
    }
}

impl From<Vec<usize>> for Instance {
    fn from(v: Vec<usize>) -> Self {
        Instance(v)
    }
}

/// One of the two classes of a binary classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    Negative,
    Positive,
}

impl Class {
    pub fn index(self) -> usize {
        match self {
            Class::Negative => 0,
            Class::Positive => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Class> {
        match i {
            0 => Some(Class::Negative),
            1 => Some(Class::Positive),
            _ => None,
        }
    }

    pub fn opposite(self) -> Class {
        match self {
            Class::Negative => Class::Positive,
            Class::Positive => Class::Negative,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Negative => write!(f, "negative"),
            Class::Positive => write!(f, "positive"),
        }
    }
}

/// A labelled categorical dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<FeatureSpec>,
    pub classes: [String; 2],
    pub rows: Vec<(Instance, Class)>,
}

impl Dataset {
    pub fn new(
        features: Vec<FeatureSpec>,
        classes: [String; 2],
        rows: Vec<(Instance, Class)>,
    ) -> Result<Self> {
        for f in &features {
            f.validate()?;
        }
        for (i, (x, _)) in rows.iter().enumerate() {
            x.conforms(&features)
                .map_err(|e| Error::DomainMismatch(format!("row {}: {}", i + 1, e)))?;
        }
        Ok(Dataset {
            features,
            classes,
            rows,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Same features and classes, a subset of rows.
    pub fn with_rows(&self, rows: Vec<(Instance, Class)>) -> Dataset {
        Dataset {
            features: self.features.clone(),
            classes: self.classes.clone(),
            rows,
        }
    }
}

/// Binary naive Bayes classifier in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct NbcModel {
    features: Vec<FeatureSpec>,
    classes: [String; 2],
    log_prior: [f64; 2],
    /// `log_likelihood[i][k][c]` = ln Pr(x_i = k | c).
    log_likelihood: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    classes: Vec<String>,
    features: Vec<FeatureSpec>,
    log_prior: Vec<f64>,
    log_likelihood: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawModel> for NbcModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        if raw.classes.len() != 2 {
            return Err(Error::InvalidModel(format!(
                "exactly two classes are supported, found {}",
                raw.classes.len()
            )));
        }
        if raw.log_prior.len() != 2 {
            return Err(Error::InvalidModel(format!(
                "log_prior must have 2 entries, found {}",
                raw.log_prior.len()
            )));
        }
        let mut ll = Vec::with_capacity(raw.log_likelihood.len());
        for (i, per_value) in raw.log_likelihood.into_iter().enumerate() {
            let mut row = Vec::with_capacity(per_value.len());
            for (k, pair) in per_value.into_iter().enumerate() {
                if pair.len() != 2 {
                    return Err(Error::InvalidModel(format!(
                        "log_likelihood[{i}][{k}] must have 2 entries, found {}",
                        pair.len()
                    )));
                }
                row.push([pair[0], pair[1]]);
            }
            ll.push(row);
        }
        NbcModel::from_parts(
            raw.features,
            [raw.classes[0].clone(), raw.classes[1].clone()],
            [raw.log_prior[0], raw.log_prior[1]],
            ll,
        )
    }
}

impl From<NbcModel> for RawModel {
    fn from(m: NbcModel) -> Self {
        RawModel {
            classes: m.classes.to_vec(),
            features: m.features,
            log_prior: m.log_prior.to_vec(),
            log_likelihood: m
                .log_likelihood
                .into_iter()
                .map(|row| row.into_iter().map(|p| p.to_vec()).collect())
                .collect(),
        }
    }
}

impl NbcModel {
    /// Assembles a model, rejecting shape mismatches and non-finite logs.
    pub fn from_parts(
        features: Vec<FeatureSpec>,
        classes: [String; 2],
        log_prior: [f64; 2],
        log_likelihood: Vec<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        if classes[0] == classes[1] {
            return Err(Error::InvalidModel("class labels must differ".into()));
        }
        for f in &features {
            f.validate()?;
        }
        if log_likelihood.len() != features.len() {
            return Err(Error::InvalidModel(format!(
                "log_likelihood covers {} features, expected {}",
                log_likelihood.len(),
                features.len()
            )));
        }
        if log_prior.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidModel("log_prior must be finite".into()));
        }
        for (f, row) in features.iter().zip(&log_likelihood) {
            if row.len() != f.size() {
                return Err(Error::InvalidModel(format!(
                    "feature '{}' has {} values but {} likelihood rows",
                    f.name,
                    f.size(),
                    row.len()
                )));
            }
            if row.iter().flatten().any(|l| !l.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "feature '{}' has a non-finite log-likelihood",
                    f.name
                )));
            }
        }
        Ok(NbcModel {
            features,
            classes,
            log_prior,
            log_likelihood,
        })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn classes(&self) -> &[String; 2] {
        &self.classes
    }

    pub fn class_label(&self, c: Class) -> &str {
        &self.classes[c.index()]
    }

    pub fn log_prior(&self, c: Class) -> f64 {
        self.log_prior[c.index()]
    }

    pub fn log_likelihood(&self, feature: usize, value: usize, c: Class) -> f64 {
        self.log_likelihood[feature][value][c.index()]
    }

    /// Log-joint scores `[score(negative), score(positive)]`.
    pub fn scores(&self, x: &Instance) -> Result<[f64; 2]> {
        x.conforms(&self.features)?;
        let mut s = self.log_prior;
        for (row, &v) in self.log_likelihood.iter().zip(x.values()) {
            s[0] += row[v][0];
            s[1] += row[v][1];
        }
        Ok(s)
    }

    /// Predicted class and the two log-joint scores. Ties go to the negative
    /// class.
    pub fn predict(&self, x: &Instance) -> Result<(Class, [f64; 2])> {
        let s = self.scores(x)?;
        let c = if s[1] > s[0] {
            Class::Positive
        } else {
            Class::Negative
        };
        Ok((c, s))
    }

    /// Fraction of rows whose label matches the prediction.
    pub fn accuracy(&self, data: &Dataset) -> Result<Ratio<u64>> {
        if data.features != self.features {
            return Err(Error::DomainMismatch(
                "dataset features differ from the model's".into(),
            ));
        }
        if data.rows.is_empty() {
            return Ok(Ratio::from_integer(0));
        }
        let mut hits = 0u64;
        for (x, c) in &data.rows {
            if self.predict(x)?.0 == *c {
                hits += 1;
            }
        }
        Ok(Ratio::new(hits, data.rows.len() as u64))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidModel(e.to_string()))
    }
}

/// Smoothed maximum-likelihood training of a categorical naive Bayes model.
pub fn train(data: &Dataset, alpha: f64) -> Result<NbcModel> {
    if alpha.is_nan() || alpha <= 0.0 || !alpha.is_finite() {
        return Err(Error::NonPositiveAlpha(alpha));
    }
    if data.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut class_count = [0usize; 2];
    let mut value_count: Vec<Vec<[usize; 2]>> = data
        .features
        .iter()
        .map(|f| vec![[0usize; 2]; f.size()])
        .collect();
    for (x, c) in &data.rows {
        class_count[c.index()] += 1;
        for (i, &v) in x.values().iter().enumerate() {
            value_count[i][v][c.index()] += 1;
        }
    }
    if class_count.contains(&0) {
        return Err(Error::SingleClassDataset);
    }

    let n = data.rows.len() as f64;
    let log_prior = [0, 1].map(|c| ((class_count[c] as f64 + alpha) / (n + 2.0 * alpha)).ln());
    let log_likelihood = data
        .features
        .iter()
        .zip(&value_count)
        .map(|(f, counts)| {
            let d = f.size() as f64;
            counts
                .iter()
                .map(|kc| {
                    [0, 1].map(|c| {
                        ((kc[c] as f64 + alpha) / (class_count[c] as f64 + d * alpha)).ln()
                    })
                })
                .collect()
        })
        .collect();

    NbcModel::from_parts(
        data.features.clone(),
        data.classes.clone(),
        log_prior,
        log_likelihood,
    )
}
