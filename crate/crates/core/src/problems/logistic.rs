//! Regularized logistic regression
//! `h(x) = (1/n₁) Σ log(1 + exp(-yᵢ xᵀcᵢ)) + (β/2)‖x‖²`
//! and its gradient-descent fixed-point map.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use super::ProblemError;
use crate::fixedpoint::FixedPointMap;
use crate::linalg::{CsrMatrix, MatVec};
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct LogisticDataset<T> {
    samples: CsrMatrix<T>,
    labels: Vec<T>,
    beta: T,
    eta: T,
}

impl<T: Scalar> LogisticDataset<T> {
    pub fn new(samples: CsrMatrix<T>, labels: Vec<T>, beta: T, eta: T) -> Result<Self, ProblemError> {
        if samples.nrows() != labels.len() {
            return Err(ProblemError::InvalidParameter(format!(
                "{} samples but {} labels",
                samples.nrows(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l != T::one() && l != -T::one()) {
            return Err(ProblemError::InvalidParameter(format!("labels must be ±1, found {l}")));
        }
        if !(beta > T::zero()) || !(eta > T::zero()) {
            return Err(ProblemError::InvalidParameter("beta and eta must be positive".into()));
        }
        Ok(Self { samples, labels, beta, eta })
    }

    pub fn from_libsvm(data: LibsvmData<T>, beta: T, eta: T) -> Result<Self, ProblemError> {
        Self::new(data.samples, data.labels, beta, eta)
    }

    pub fn samples(&self) -> &CsrMatrix<T> {
        &self.samples
    }

    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn features(&self) -> usize {
        self.samples.ncols()
    }

    /// Margins `yᵢ xᵀcᵢ`.
    fn margins(&self, x: &[T]) -> Vec<T> {
        let mut z = vec![T::zero(); self.samples.nrows()];
        self.samples.mat_vec_into(x, &mut z);
        z.iter().zip(&self.labels).map(|(&zi, &yi)| zi * yi).collect()
    }
}

/// `1 / (1 + e^{z})` without overflow.
fn sigmoid_neg<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        let e = (-z).exp();
        e / (T::one() + e)
    } else {
        T::one() / (T::one() + z.exp())
    }
}

/// `log(1 + e^{-z})` without overflow.
fn softplus_neg<T: Scalar>(z: T) -> T {
    (-z).max(T::zero()) + (-z.abs()).exp().ln_1p()
}

pub fn logistic_objective<T: Scalar>(data: &LogisticDataset<T>, x: &[T]) -> T {
    let n1 = T::from_usize(data.labels.len()).expect("sample count fits");
    let loss: T = data.margins(x).into_iter().map(softplus_neg).sum::<T>() / n1;
    let reg: T = x.iter().map(|&v| v * v).sum::<T>() * data.beta * T::lit(0.5);
    loss + reg
}

/// `∇h(x) = (1/n₁) Σ -yᵢ cᵢ σ(-yᵢ xᵀcᵢ) + β x`.
pub fn logistic_gradient<T: Scalar>(data: &LogisticDataset<T>, x: &[T]) -> Vec<T> {
    let n1 = T::from_usize(data.labels.len()).expect("sample count fits");
    let weights: Vec<T> = data
        .margins(x)
        .into_iter()
        .zip(&data.labels)
        .map(|(z, &y)| -y * sigmoid_neg(z) / n1)
        .collect();
    let mut g = data.samples.transpose_mat_vec(&weights).expect("dimensions fixed");
    for (gi, &xi) in g.iter_mut().zip(x) {
        *gi += data.beta * xi;
    }
    g
}

/// Gradient descent `q(x) = x - η∇h(x)`.
#[derive(Debug, Clone)]
pub struct GdMap<T> {
    data: LogisticDataset<T>,
}

impl<T: Scalar> GdMap<T> {
    pub fn dataset(&self) -> &LogisticDataset<T> {
        &self.data
    }
}

pub fn gd_map<T: Scalar>(data: LogisticDataset<T>) -> GdMap<T> {
    GdMap { data }
}

impl<T: Scalar> FixedPointMap<T> for GdMap<T> {
    fn dimension(&self) -> usize {
        self.data.features()
    }

    fn eval(&self, x: &[T]) -> Vec<T> {
        self.eval_with_residual(x).0
    }

    fn eval_with_residual(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let eta = self.data.eta;
        let r: Vec<T> = logistic_gradient(&self.data, x).into_iter().map(|g| -eta * g).collect();
        let q = x.iter().zip(&r).map(|(&xi, &ri)| xi + ri).collect();
        (q, r)
    }
}

#[derive(Debug, Error)]
pub enum LibsvmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("expected a two-class problem, found {0} distinct labels")]
    TooManyLabels(usize),
    #[error("single label {0} cannot be mapped to ±1")]
    UnmappableLabel(f64),
}

/// Samples and ±1 labels read from a LIBSVM file.
#[derive(Debug, Clone, PartialEq)]
pub struct LibsvmData<T> {
    pub samples: CsrMatrix<T>,
    pub labels: Vec<T>,
}

pub fn parse_libsvm<T: Scalar>(path: impl AsRef<Path>) -> Result<LibsvmData<T>, LibsvmError> {
    parse_libsvm_reader(BufReader::new(File::open(path)?))
}

/// Parses `label idx:val idx:val …` lines with 1-based feature indices.
///
/// Labels already in `{-1, +1}` are kept. Any other two-class labelling is
/// mapped by sorting: the smaller label becomes `+1` and the larger `-1`
/// (so `{1, 2}` becomes `{+1, -1}`). Blank lines and `#` comments are
/// skipped; the feature count is the largest index seen.
pub fn parse_libsvm_reader<T: Scalar, R: BufRead>(reader: R) -> Result<LibsvmData<T>, LibsvmError> {
    let mut raw_labels: Vec<f64> = Vec::new();
    let mut trip: Vec<(usize, usize, T)> = Vec::new();
    let mut ncols = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |reason: String| LibsvmError::Malformed { line: lineno, reason };
        let mut tok = content.split_whitespace();
        let label_tok = tok.next().expect("nonempty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| bad(format!("invalid label `{label_tok}`")))?;
        if !label.is_finite() {
            return Err(bad(format!("invalid label `{label_tok}`")));
        }
        let row = raw_labels.len();
        let mut last = 0usize;
        for t in tok {
            let (idx, val) = t
                .split_once(':')
                .ok_or_else(|| bad(format!("expected `index:value`, found `{t}`")))?;
            let idx: usize = idx.parse().map_err(|_| bad(format!("invalid index `{idx}`")))?;
            if idx == 0 {
                return Err(bad("feature indices are 1-based".into()));
            }
            if idx <= last {
                return Err(bad("feature indices must be increasing".into()));
            }
            last = idx;
            let v: f64 = val.parse().map_err(|_| bad(format!("invalid value `{val}`")))?;
            if !v.is_finite() {
                return Err(bad(format!("invalid value `{val}`")));
            }
            ncols = ncols.max(idx);
            trip.push((row, idx - 1, T::lit(v)));
        }
        raw_labels.push(label);
    }

    let distinct: BTreeSet<u64> = raw_labels.iter().map(|l| l.to_bits()).collect();
    let mut values: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite labels"));
    let map = |l: f64| -> f64 {
        if values.iter().all(|&v| v == 1.0 || v == -1.0) {
            l
        } else if l == values[0] {
            1.0
        } else {
            -1.0
        }
    };
    if values.len() > 2 {
        return Err(LibsvmError::TooManyLabels(values.len()));
    }
    if values.len() == 1 && values[0] != 1.0 && values[0] != -1.0 {
        return Err(LibsvmError::UnmappableLabel(values[0]));
    }
    let labels = raw_labels.iter().map(|&l| T::lit(map(l))).collect();
    let samples = CsrMatrix::from_triplets(raw_labels.len(), ncols, &trip).expect("indices validated");
    Ok(LibsvmData { samples, labels })
}
