//! Kernels over context points `(user features, selected set, candidate item)`,
//! Gram matrices and effective-dimension diagnostics.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::objectives::GroundSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("{operand} vectors have dimensions {left} and {right}")]
    DimensionMismatch { operand: &'static str, left: usize, right: usize },
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("candidate {0} is already in the selected set")]
    ItemInSet(usize),
}

pub type Result<T> = std::result::Result<T, KernelError>;

/// One bandit context point `x = (phi, S, v)`.
///
/// Item features and the set embedding (sum of item features over `S`) are
/// resolved at construction so kernels never need the ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextPoint {
    pub user: Arc<[f64]>,
    /// Sorted item ids.
    pub set: Arc<[usize]>,
    pub item: usize,
    pub item_features: Arc<[f64]>,
    pub set_embedding: Arc<[f64]>,
}

impl ContextPoint {
    pub fn new(user: Arc<[f64]>, set: &[usize], item: usize, ground: &GroundSet) -> Result<Self> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        if sorted.binary_search(&item).is_ok() {
            return Err(KernelError::ItemInSet(item));
        }
        let d = ground.feature_dim();
        let mut emb = vec![0.0; d];
        for &s in &sorted {
            for (e, x) in emb.iter_mut().zip(&ground.item_features[s]) {
                *e += x;
            }
        }
        Ok(Self {
            user,
            set: sorted.into(),
            item,
            item_features: ground.item_features[item].as_slice().into(),
            set_embedding: emb.into(),
        })
    }

    /// Builds a point from raw parts; `set` must be sorted.
    pub fn from_parts(user: Vec<f64>, set: Vec<usize>, item: usize, item_features: Vec<f64>, set_embedding: Vec<f64>) -> Self {
        Self {
            user: user.into(),
            set: set.into(),
            item,
            item_features: item_features.into(),
            set_embedding: set_embedding.into(),
        }
    }

    fn whole(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.user.len() + self.item_features.len() + self.set_embedding.len());
        v.extend_from_slice(&self.user);
        v.extend_from_slice(&self.item_features);
        v.extend_from_slice(&self.set_embedding);
        v
    }
}

/// Which part of a context point a base kernel reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    User,
    Item,
    SetEmbedding,
    /// Concatenation of user, item and set-embedding vectors.
    Whole,
}

impl Operand {
    fn name(self) -> &'static str {
        match self {
            Operand::User => "user",
            Operand::Item => "item",
            Operand::SetEmbedding => "set_embedding",
            Operand::Whole => "whole",
        }
    }
}

/// Kernel description as it appears in configuration documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `exp(-bandwidth * |x - x'|^2)`.
    Rbf { operand: Operand, bandwidth: f64 },
    Linear { operand: Operand },
    /// `|S n S'| / |S u S'|` on the selected sets, 1 for two empty sets.
    Jaccard {},
    /// The constant kernel.
    Constant { value: f64 },
    /// `sum_i weights[i] * children[i]`; weights default to 1.
    Sum {
        children: Vec<KernelSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Product { children: Vec<KernelSpec> },
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|A n B| / |A u B|` for sorted id lists.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

impl KernelSpec {
    /// The default composite kernel: linear on users, RBF on item features and
    /// Jaccard on selected sets, summed with the given weights.
    pub fn composite(weights: [f64; 3], item_bandwidth: f64) -> Self {
        KernelSpec::Sum {
            children: vec![
                KernelSpec::Linear { operand: Operand::User },
                KernelSpec::Rbf { operand: Operand::Item, bandwidth: item_bandwidth },
                KernelSpec::Jaccard {},
            ],
            weights: Some(weights.to_vec()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Rbf { bandwidth, .. } if !(*bandwidth > 0.0 && bandwidth.is_finite()) => {
                Err(KernelError::InvalidParameter(format!("rbf bandwidth must be > 0, got {bandwidth}")))
            }
            KernelSpec::Constant { value } if !(*value >= 0.0 && value.is_finite()) => {
                Err(KernelError::InvalidParameter(format!("constant kernel value must be >= 0, got {value}")))
            }
            KernelSpec::Sum { children, weights } => {
                if children.is_empty() {
                    return Err(KernelError::InvalidParameter("sum kernel has no children".into()));
                }
                if let Some(w) = weights {
                    if w.len() != children.len() {
                        return Err(KernelError::InvalidParameter(format!(
                            "sum kernel has {} weights for {} children",
                            w.len(),
                            children.len()
                        )));
                    }
                    if let Some(x) = w.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                        return Err(KernelError::InvalidParameter(format!("sum weights must be > 0, got {x}")));
                    }
                }
                children.iter().try_for_each(KernelSpec::validate)
            }
            KernelSpec::Product { children } => {
                if children.is_empty() {
                    return Err(KernelError::InvalidParameter("product kernel has no children".into()));
                }
                children.iter().try_for_each(KernelSpec::validate)
            }
            _ => Ok(()),
        }
    }

    /// Checks that every operand the kernel reads has equal length on both points.
    pub fn check_dims(&self, x: &ContextPoint, y: &ContextPoint) -> Result<()> {
        let check = |operand: Operand| {
            let (l, r) = match operand {
                Operand::User => (x.user.len(), y.user.len()),
                Operand::Item => (x.item_features.len(), y.item_features.len()),
                Operand::SetEmbedding => (x.set_embedding.len(), y.set_embedding.len()),
                Operand::Whole => (
                    x.user.len() + x.item_features.len() + x.set_embedding.len(),
                    y.user.len() + y.item_features.len() + y.set_embedding.len(),
                ),
            };
            let per_part = operand != Operand::Whole
                || (x.user.len() == y.user.len()
                    && x.item_features.len() == y.item_features.len()
                    && x.set_embedding.len() == y.set_embedding.len());
            if l != r || !per_part {
                Err(KernelError::DimensionMismatch { operand: operand.name(), left: l, right: r })
            } else {
                Ok(())
            }
        };
        match self {
            KernelSpec::Rbf { operand, .. } | KernelSpec::Linear { operand } => check(*operand),
            KernelSpec::Jaccard {} | KernelSpec::Constant { .. } => Ok(()),
            KernelSpec::Sum { children, .. } | KernelSpec::Product { children } => {
                children.iter().try_for_each(|c| c.check_dims(x, y))
            }
        }
    }

    /// Kernel value with dimension checks.
    pub fn try_eval(&self, x: &ContextPoint, y: &ContextPoint) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(self.eval(x, y))
    }

    /// Kernel value; operand dimensions are assumed consistent.
    pub fn eval(&self, x: &ContextPoint, y: &ContextPoint) -> f64 {
        match self {
            KernelSpec::Rbf { operand, bandwidth } => {
                let d = match operand {
                    Operand::User => sq_dist(&x.user, &y.user),
                    Operand::Item => sq_dist(&x.item_features, &y.item_features),
                    Operand::SetEmbedding => sq_dist(&x.set_embedding, &y.set_embedding),
                    Operand::Whole => {
                        sq_dist(&x.user, &y.user)
                            + sq_dist(&x.item_features, &y.item_features)
                            + sq_dist(&x.set_embedding, &y.set_embedding)
                    }
                };
                (-bandwidth * d).exp()
            }
            KernelSpec::Linear { operand } => match operand {
                Operand::User => dot(&x.user, &y.user),
                Operand::Item => dot(&x.item_features, &y.item_features),
                Operand::SetEmbedding => dot(&x.set_embedding, &y.set_embedding),
                Operand::Whole => dot(&x.whole(), &y.whole()),
            },
            KernelSpec::Jaccard {} => jaccard(&x.set, &y.set),
            KernelSpec::Constant { value } => *value,
            KernelSpec::Sum { children, weights } => children
                .iter()
                .enumerate()
                .map(|(i, c)| weights.as_ref().map_or(1.0, |w| w[i]) * c.eval(x, y))
                .sum(),
            KernelSpec::Product { children } => children.iter().map(|c| c.eval(x, y)).product(),
        }
    }
}

/// Free-function form of [`KernelSpec::try_eval`].
pub fn kernel_eval(spec: &KernelSpec, x: &ContextPoint, y: &ContextPoint) -> Result<f64> {
    spec.try_eval(x, y)
}

/// `K[i, j] = k(xs[i], ys[j])`.
pub fn gram(spec: &KernelSpec, xs: &[ContextPoint], ys: &[ContextPoint]) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), ys.len(), |i, j| spec.eval(&xs[i], &ys[j]))
}

/// Symmetric Gram matrix of one list.
pub fn gram_sym(spec: &KernelSpec, xs: &[ContextPoint]) -> DMatrix<f64> {
    let n = xs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(&xs[i], &xs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Eigenvalues of a symmetric PSD matrix, with tiny negative values set to 0.
pub fn psd_eigenvalues(k: &DMatrix<f64>) -> Result<Vec<f64>> {
    if k.nrows() != k.ncols() {
        return Err(KernelError::NotSquare { rows: k.nrows(), cols: k.ncols() });
    }
    if k.nrows() == 0 {
        return Ok(vec![]);
    }
    let sym = (k + k.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-6 {
        return Err(KernelError::NotPsd(min));
    }
    Ok(eig.iter().map(|&e| e.max(0.0)).collect())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(KernelError::InvalidParameter(format!("lambda must be > 0, got {lambda}")))
    }
}

/// `Tr(K (K + lambda I)^-1) = sum_i e_i / (e_i + lambda)`.
pub fn effective_dimension(k: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(psd_eigenvalues(k)?.iter().map(|e| e / (e + lambda)).sum())
}

/// `sum_i log(1 + e_i / lambda)`, an upper bound on the effective dimension.
pub fn information_gain_bound(k: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(psd_eigenvalues(k)?.iter().map(|e| (e / lambda).ln_1p()).sum())
}
