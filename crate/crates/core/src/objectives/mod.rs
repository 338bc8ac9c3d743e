//! Set-function oracles over a finite ground set.
//!
//! Every objective in this crate is a [`SetFunction`] wrapped in a
//! [`SetFunctionOracle`], which validates item ids, canonicalizes sets to a
//! sorted id list and memoizes evaluations. Sets are passed around as sorted
//! `&[usize]` slices of item ids.

mod constants;
mod functions;
mod instances;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

pub use constants::{
    generalized_curvature, modular_lower_bound, submodular_curvature, submodularity_ratio,
    supermodular_curvature, subset_table, verify_mnn_properties, CurvaturePart,
    GeneralizedCurvature, ModularLowerBound, PropertyKind, PropertyReport, SubmodularityRatio,
    ENUMERATION_CAP, VERIFY_CAP,
};
pub use functions::{
    make_concave_over_modular, make_facility_location, make_genre_square, make_naive_bayes_al,
    make_sum_dispersion, CardinalityPower, ConcaveOverModular, FacilityLocation, FnSetFunction,
    GenreSquare, Modular, NaiveBayesActiveLearning, SumDispersion, WeightedSum,
};
pub(crate) use instances::median;
pub use instances::{
    BPObjective, CurvatureReport, GroundSet, Instance, InstanceSpec, WeakSubmodReport,
};

/// Errors raised by oracles, constant computations and instance generators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error("item {item} is out of range for a ground set of size {n}")]
    OutOfRange { item: usize, n: usize },
    #[error("item {0} is already in the set")]
    DuplicateItem(usize),
    #[error("every singleton value is zero; curvature is undefined")]
    AllSingletonsZero,
    #[error("ground set of size {n} exceeds the enumeration cap of {cap}")]
    GroundSetTooLarge { n: usize, cap: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("matrix is not symmetric at ({row}, {col})")]
    Asymmetric { row: usize, col: usize },
    #[error("matrix must be square with side {expected}, got {rows}x{cols}")]
    NotSquare { expected: usize, rows: usize, cols: usize },
    #[error("item {0} belongs to no genre")]
    NoGenre(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("ground set must contain at least one item")]
    EmptyGroundSet,
}

pub type Result<T> = std::result::Result<T, ObjectiveError>;

/// A real-valued function on subsets of `{0, .., n-1}`.
///
/// `evaluate` receives a sorted, duplicate-free, in-range id list.
pub trait SetFunction: Send + Sync + fmt::Debug {
    fn ground_size(&self) -> usize;
    fn evaluate(&self, set: &[usize]) -> f64;
}

/// Memo entries beyond this count are not stored.
const MEMO_CAPACITY: usize = 1 << 18;

struct OracleInner {
    func: Box<dyn SetFunction>,
    name: String,
    normalized: bool,
    memo: Option<Mutex<HashMap<Box<[usize]>, f64>>>,
}

/// Shared, immutable handle to a set function.
///
/// Cloning is cheap. The memo table is behind a mutex so one oracle can be
/// shared by concurrent simulation runs.
#[derive(Clone)]
pub struct SetFunctionOracle {
    inner: Arc<OracleInner>,
}

impl fmt::Debug for SetFunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetFunctionOracle")
            .field("name", &self.inner.name)
            .field("n", &self.n())
            .field("normalized", &self.inner.normalized)
            .finish()
    }
}

impl SetFunctionOracle {
    /// Wraps `func` with memoization enabled.
    pub fn new<F: SetFunction + 'static>(name: impl Into<String>, func: F) -> Self {
        Self::build(name.into(), Box::new(func), true)
    }

    /// Wraps `func` without a memo table (for cheap closed-form functions).
    pub fn unmemoized<F: SetFunction + 'static>(name: impl Into<String>, func: F) -> Self {
        Self::build(name.into(), Box::new(func), false)
    }

    fn build(name: String, func: Box<dyn SetFunction>, memo: bool) -> Self {
        let normalized = func.evaluate(&[]).abs() <= 1e-12;
        Self {
            inner: Arc::new(OracleInner {
                func,
                name,
                normalized,
                memo: memo.then(|| Mutex::new(HashMap::new())),
            }),
        }
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// Ground set size.
    pub fn n(&self) -> usize {
        self.inner.func.ground_size()
    }

    /// Whether the function maps the empty set to zero.
    pub fn is_normalized(&self) -> bool {
        self.inner.normalized
    }

    /// Evaluates an arbitrary id list after validating and sorting it.
    pub fn value(&self, set: &[usize]) -> Result<f64> {
        let canon = self.canonicalize(set)?;
        Ok(self.value_sorted(&canon))
    }

    /// Evaluates a set that is already sorted, duplicate-free and in range.
    pub fn value_sorted(&self, set: &[usize]) -> f64 {
        debug_assert!(set.windows(2).all(|w| w[0] < w[1]));
        let Some(memo) = &self.inner.memo else {
            return self.inner.func.evaluate(set);
        };
        if let Some(v) = memo.lock().expect("memo poisoned").get(set) {
            return *v;
        }
        let value = self.inner.func.evaluate(set);
        let mut table = memo.lock().expect("memo poisoned");
        if table.len() < MEMO_CAPACITY {
            table.insert(set.into(), value);
        }
        value
    }

    /// Evaluates bypassing the memo table.
    pub fn value_direct(&self, set: &[usize]) -> f64 {
        self.inner.func.evaluate(set)
    }

    /// Marginal gain `h(v | S) = h(S + v) - h(S)`.
    pub fn marginal_gain(&self, v: usize, set: &[usize]) -> Result<f64> {
        let n = self.n();
        if v >= n {
            return Err(ObjectiveError::OutOfRange { item: v, n });
        }
        let canon = self.canonicalize(set)?;
        if canon.binary_search(&v).is_ok() {
            return Err(ObjectiveError::DuplicateItem(v));
        }
        Ok(self.gain_sorted(v, &canon))
    }

    /// Marginal gain for a sorted set not containing `v`.
    pub fn gain_sorted(&self, v: usize, set: &[usize]) -> f64 {
        let with = insert_sorted(set, v);
        self.value_sorted(&with) - self.value_sorted(set)
    }

    /// Validates ids and returns a sorted copy.
    pub fn canonicalize(&self, set: &[usize]) -> Result<Vec<usize>> {
        canonical_set(set, self.n())
    }
}

/// Sorts `set`, rejecting duplicates and ids `>= n`.
pub fn canonical_set(set: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut canon = set.to_vec();
    canon.sort_unstable();
    for w in canon.windows(2) {
        if w[0] == w[1] {
            return Err(ObjectiveError::DuplicateItem(w[0]));
        }
    }
    if let Some(&last) = canon.last() {
        if last >= n {
            return Err(ObjectiveError::OutOfRange { item: last, n });
        }
    }
    Ok(canon)
}

/// Returns a sorted copy of `set` with `v` inserted.
pub fn insert_sorted(set: &[usize], v: usize) -> Vec<usize> {
    let pos = set.partition_point(|&x| x < v);
    let mut out = Vec::with_capacity(set.len() + 1);
    out.extend_from_slice(&set[..pos]);
    out.push(v);
    out.extend_from_slice(&set[pos..]);
    out
}

/// Sorted id list of the bits set in `mask`.
pub fn mask_to_ids(mask: u64) -> Vec<usize> {
    let mut ids = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        ids.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    ids
}

/// Bit mask of a sorted id list (ids must be `< 64`).
pub fn ids_to_mask(ids: &[usize]) -> u64 {
    ids.iter().fold(0u64, |m, &i| m | (1u64 << i))
}

/// Marginal gain `oracle(v | S)` with id validation; free-function form.
pub fn marginal_gain(oracle: &SetFunctionOracle, v: usize, set: &[usize]) -> Result<f64> {
    oracle.marginal_gain(v, set)
}
