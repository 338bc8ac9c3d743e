//! Concrete set functions: modular, facility location, concave-over-modular,
//! genre-square, sum-sum dispersion, Naive-Bayes active learning and a few
//! cardinality-based test functions.

use std::fmt;

use super::{ObjectiveError, Result, SetFunction, SetFunctionOracle};

/// `h(S) = sum_{v in S} w(v)`.
#[derive(Debug, Clone)]
pub struct Modular {
    weights: Vec<f64>,
}

impl Modular {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SetFunction for Modular {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.weights[v]).sum()
    }
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 {
        return Err(ObjectiveError::EmptyGroundSet);
    }
    for r in rows {
        if r.len() != n {
            return Err(ObjectiveError::NotSquare { expected: n, rows: n, cols: r.len() });
        }
    }
    Ok(n)
}

fn check_nonnegative(rows: &[Vec<f64>]) -> Result<()> {
    for (i, r) in rows.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            if x < 0.0 || x.is_nan() {
                return Err(ObjectiveError::NegativeEntry { row: i, col: j, value: x });
            }
        }
    }
    Ok(())
}

/// `f(S) = sum_i max_{v in S} sim(i, v)` with `f(empty) = 0`.
#[derive(Debug, Clone)]
pub struct FacilityLocation {
    n: usize,
    // row-major, sim[i * n + v]
    sim: Vec<f64>,
}

impl SetFunction for FacilityLocation {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        (0..self.n)
            .map(|i| {
                let row = &self.sim[i * self.n..(i + 1) * self.n];
                set.iter().map(|&v| row[v]).fold(0.0, f64::max)
            })
            .sum()
    }
}

pub fn make_facility_location(similarity: &[Vec<f64>]) -> Result<SetFunctionOracle> {
    let n = check_square(similarity)?;
    check_nonnegative(similarity)?;
    let sim = similarity.iter().flatten().copied().collect();
    Ok(SetFunctionOracle::new("facility_location", FacilityLocation { n, sim }))
}

/// Per-genre item weights shared by the two genre-based functions.
#[derive(Debug, Clone)]
struct GenreWeights {
    n: usize,
    genres: usize,
    // weight[v * genres + g]
    weight: Vec<f64>,
}

impl GenreWeights {
    fn counts(&self, set: &[usize]) -> Vec<f64> {
        let mut u = vec![0.0; self.genres];
        for &v in set {
            let row = &self.weight[v * self.genres..(v + 1) * self.genres];
            for (acc, w) in u.iter_mut().zip(row) {
                *acc += w;
            }
        }
        u
    }
}

fn genre_weights(
    memberships: &[Vec<bool>],
    ratings: &[f64],
    threshold: f64,
    scale_by_rating: bool,
) -> Result<GenreWeights> {
    let n = memberships.len();
    if n == 0 {
        return Err(ObjectiveError::EmptyGroundSet);
    }
    if ratings.len() != n {
        return Err(ObjectiveError::InvalidInstance(format!(
            "{} ratings for {} items",
            ratings.len(),
            n
        )));
    }
    let genres = memberships[0].len();
    let mut weight = vec![0.0; n * genres];
    for (v, r) in memberships.iter().enumerate() {
        if r.len() != genres {
            return Err(ObjectiveError::InvalidInstance(format!(
                "item {v} has {} genre flags, expected {genres}",
                r.len()
            )));
        }
        let count = r.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(ObjectiveError::NoGenre(v));
        }
        if ratings[v] > threshold {
            let base = if scale_by_rating { ratings[v] } else { 1.0 };
            for (g, &has) in r.iter().enumerate() {
                if has {
                    weight[v * genres + g] = base / count as f64;
                }
            }
        }
    }
    Ok(GenreWeights { n, genres, weight })
}

/// `f(A) = sum_g sqrt(1 + u_g(A)) - |L|`, where `u_g` counts the items of
/// genre `g` rated above the threshold, each split evenly across its genres.
#[derive(Debug, Clone)]
pub struct ConcaveOverModular {
    weights: GenreWeights,
}

impl SetFunction for ConcaveOverModular {
    fn ground_size(&self) -> usize {
        self.weights.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        self.weights
            .counts(set)
            .into_iter()
            .map(|u| (1.0 + u).sqrt() - 1.0)
            .sum()
    }
}

pub fn make_concave_over_modular(
    memberships: &[Vec<bool>],
    ratings: &[f64],
    threshold: f64,
) -> Result<SetFunctionOracle> {
    let weights = genre_weights(memberships, ratings, threshold, false)?;
    Ok(SetFunctionOracle::new("concave_over_modular", ConcaveOverModular { weights }))
}

/// `g(A) = sum_g (1 + u~_g(A))^2 - |L|`, with each item's genre share scaled
/// by its rating. Supermodular and monotone for nonnegative ratings.
#[derive(Debug, Clone)]
pub struct GenreSquare {
    weights: GenreWeights,
}

impl SetFunction for GenreSquare {
    fn ground_size(&self) -> usize {
        self.weights.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        self.weights
            .counts(set)
            .into_iter()
            .map(|u| (1.0 + u) * (1.0 + u) - 1.0)
            .sum()
    }
}

pub fn make_genre_square(
    memberships: &[Vec<bool>],
    ratings: &[f64],
    threshold: f64,
) -> Result<SetFunctionOracle> {
    if let Some((v, &r)) = ratings.iter().enumerate().find(|(_, &r)| r < 0.0) {
        return Err(ObjectiveError::NegativeEntry { row: v, col: 0, value: r });
    }
    let weights = genre_weights(memberships, ratings, threshold, true)?;
    Ok(SetFunctionOracle::new("genre_square", GenreSquare { weights }))
}

/// `g(A) = sum_{v in A} sum_{w in A, w != v} B(v, w)`.
#[derive(Debug, Clone)]
pub struct SumDispersion {
    n: usize,
    b: Vec<f64>,
}

impl SetFunction for SumDispersion {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, &v) in set.iter().enumerate() {
            for &w in &set[i + 1..] {
                total += self.b[v * self.n + w];
            }
        }
        2.0 * total
    }
}

pub fn make_sum_dispersion(b: &[Vec<f64>]) -> Result<SetFunctionOracle> {
    let n = check_square(b)?;
    check_nonnegative(b)?;
    for i in 0..n {
        if b[i][i] != 0.0 {
            return Err(ObjectiveError::InvalidInstance(format!(
                "dispersion matrix has nonzero diagonal at {i}"
            )));
        }
        for j in 0..i {
            let scale = b[i][j].abs().max(b[j][i].abs()).max(1.0);
            if (b[i][j] - b[j][i]).abs() > 1e-12 * scale {
                return Err(ObjectiveError::Asymmetric { row: i, col: j });
            }
        }
    }
    let flat = b.iter().flatten().copied().collect();
    Ok(SetFunctionOracle::new("sum_dispersion", SumDispersion { n, b: flat }))
}

/// `f(S) = sum_{x,y} sqrt(m_{x,y}(V)) * ln(1 + m_{x,y}(S))`.
#[derive(Debug, Clone)]
pub struct NaiveBayesActiveLearning {
    cell_of: Vec<usize>,
    cell_weight: Vec<f64>,
}

impl SetFunction for NaiveBayesActiveLearning {
    fn ground_size(&self) -> usize {
        self.cell_of.len()
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        let mut counts = vec![0u32; self.cell_weight.len()];
        for &v in set {
            counts[self.cell_of[v]] += 1;
        }
        counts
            .iter()
            .zip(&self.cell_weight)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, &w)| w * (c as f64).ln_1p())
            .sum()
    }
}

/// Builds the Naive-Bayes objective from discretized feature cells and
/// binary labels (one entry per point).
pub fn make_naive_bayes_al(feature_cells: &[usize], labels: &[bool]) -> Result<SetFunctionOracle> {
    if feature_cells.is_empty() {
        return Err(ObjectiveError::EmptyGroundSet);
    }
    if feature_cells.len() != labels.len() {
        return Err(ObjectiveError::InvalidInstance(format!(
            "{} feature cells for {} labels",
            feature_cells.len(),
            labels.len()
        )));
    }
    let cells = feature_cells.iter().max().map_or(0, |&m| m + 1);
    let cell_of: Vec<usize> = feature_cells
        .iter()
        .zip(labels)
        .map(|(&x, &y)| 2 * x + usize::from(y))
        .collect();
    let mut totals = vec![0usize; 2 * cells];
    for &c in &cell_of {
        totals[c] += 1;
    }
    let cell_weight = totals.iter().map(|&m| (m as f64).sqrt()).collect();
    Ok(SetFunctionOracle::new(
        "naive_bayes_al",
        NaiveBayesActiveLearning { cell_of, cell_weight },
    ))
}

/// `h(S) = scale * |S|^p`.
#[derive(Debug, Clone)]
pub struct CardinalityPower {
    pub n: usize,
    pub exponent: f64,
    pub scale: f64,
}

impl SetFunction for CardinalityPower {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        if set.is_empty() {
            0.0
        } else {
            self.scale * (set.len() as f64).powf(self.exponent)
        }
    }
}

/// `h(S) = sum_i w_i h_i(S)` over oracles sharing one ground set.
#[derive(Debug, Clone)]
pub struct WeightedSum {
    n: usize,
    terms: Vec<(f64, SetFunctionOracle)>,
}

impl WeightedSum {
    pub fn new(terms: Vec<(f64, SetFunctionOracle)>) -> Result<Self> {
        let n = terms.first().map(|(_, o)| o.n()).ok_or(ObjectiveError::EmptyGroundSet)?;
        if let Some((_, o)) = terms.iter().find(|(_, o)| o.n() != n) {
            return Err(ObjectiveError::InvalidInstance(format!(
                "mixed ground sets of size {n} and {}",
                o.n()
            )));
        }
        Ok(Self { n, terms })
    }
}

impl SetFunction for WeightedSum {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        self.terms.iter().map(|(w, o)| w * o.value_sorted(set)).sum()
    }
}

/// Adapter turning a closure into a [`SetFunction`].
pub struct FnSetFunction<F> {
    n: usize,
    f: F,
}

impl<F> FnSetFunction<F>
where
    F: Fn(&[usize]) -> f64 + Send + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> fmt::Debug for FnSetFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnSetFunction").field("n", &self.n).finish()
    }
}

impl<F> SetFunction for FnSetFunction<F>
where
    F: Fn(&[usize]) -> f64 + Send + Sync,
{
    fn ground_size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, set: &[usize]) -> f64 {
        (self.f)(set)
    }
}
