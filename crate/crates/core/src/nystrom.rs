//! Sketched kernel-ridge posterior with leverage-score sampled Nyström points.
//!
//! The state maintains, for the stored set `G` and history `X`, the triple
//! `Lambda = (K_GX K_XG + lambda K_GG)^-1`, `y_proj = K_GX y` and `K_GG^-1`
//! incrementally: a Sherman-Morrison step for every observation and a Schur
//! block-inverse step when the observation joins `G`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::kernels::{effective_dimension, gram_sym, ContextPoint, KernelError, KernelSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NystromError {
    #[error("the Nyström set is empty")]
    EmptyNystromSet,
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, NystromError>;

/// A stored point whose kernel Schur complement against `G` falls below this
/// fraction of `k(x, x)` lies numerically in the span of `G` and is not added.
pub const DEGENERATE_TOL: f64 = 1e-7;

fn de_budget<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
        Raw::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got `{s}`"))),
    }
}

fn ser_budget<S: Serializer>(b: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if b.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*b)
    }
}

/// How `Lambda` and `K_GG^-1` are maintained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// Cholesky factors of `Lambda^-1` and `K_GG`: a rank-one factor update per
    /// observation and a bordered factor when `G` grows.
    #[default]
    Factored,
    /// The inverses themselves: Sherman-Morrison per observation and a Schur
    /// block inverse when `G` grows.
    Explicit,
}

/// Hyperparameters: ridge `lambda`, accuracy `eta` and sampling budget `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NystromParams {
    pub lambda: f64,
    pub eta: f64,
    /// Inclusion probability is `min(budget * tau, 1)`; `"inf"` stores every point.
    #[serde(deserialize_with = "de_budget", serialize_with = "ser_budget")]
    pub budget: f64,
    pub scheme: UpdateScheme,
}

impl Default for NystromParams {
    fn default() -> Self {
        Self { lambda: 1.0, eta: 0.5, budget: 1.0, scheme: UpdateScheme::Factored }
    }
}

impl NystromParams {
    pub fn new(lambda: f64, eta: f64, budget: f64) -> Self {
        Self { lambda, eta, budget, scheme: UpdateScheme::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(NystromError::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(NystromError::InvalidParameter(format!("eta must be >= 0, got {}", self.eta)));
        }
        if !(self.budget >= 0.0) {
            return Err(NystromError::InvalidParameter(format!("budget must be >= 0, got {}", self.budget)));
        }
        Ok(())
    }
}

/// Outcome of the inclusion test for one point, consumed by
/// [`NystromState::update_observation`].
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub joined: bool,
    pub tau: f64,
    /// `min(tau, 1)`, the point's entry in the scaling matrix if stored.
    pub weight: f64,
    /// `k_G(x)` against the stored set at scoring time.
    pub k_g: Vec<f64>,
    z: Vec<f64>,
    score_ops: u64,
}

/// Arithmetic work of one observation, in multiply-adds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RoundOps {
    /// `|G|` before the observation.
    pub g_size: usize,
    pub score: u64,
    /// Work on `|G|`-sided matrices.
    pub update: u64,
    /// Work proportional to the history length (only when `G` grows).
    pub history: u64,
    pub grew: bool,
}

/// Posterior mean and variance per query point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorEstimate {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl PosteriorEstimate {
    pub fn std(&self) -> Vec<f64> {
        self.var.iter().map(|v| v.sqrt()).collect()
    }
}

/// Diagnostics snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NystromSummary {
    pub t: usize,
    pub g_size: usize,
    pub cond_k_gg: f64,
    pub cond_lambda: f64,
    pub degenerate_skips: usize,
}

#[derive(Debug, Clone)]
pub struct NystromState {
    kernel: KernelSpec,
    params: NystromParams,
    g_points: Vec<ContextPoint>,
    g_weights: Vec<f64>,
    history: Vec<ContextPoint>,
    ys: Vec<f64>,
    /// `gx[j][i] = k(g_j, x_i)`.
    gx: Vec<Vec<f64>>,
    /// Lower Cholesky factor of `M K_GG M + lambda I`.
    chol: DMatrix<f64>,
    solver: Solver,
    y_proj: DVector<f64>,
    tau_log: Vec<(f64, bool)>,
    ops: Vec<RoundOps>,
    degenerate_skips: usize,
}

fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut x = b.clone();
    l.solve_lower_triangular_mut(&mut x);
    x
}

/// `[[L, 0], [row^T, diag]]`.
fn border_factor(l: DMatrix<f64>, row: &DVector<f64>, diag: f64) -> DMatrix<f64> {
    let g = l.nrows();
    let mut out = l.resize(g + 1, g + 1, 0.0);
    for j in 0..g {
        out[(g, j)] = row[j];
    }
    out[(g, g)] = diag;
    out
}

fn symmetric_schur_append(inv: &DMatrix<f64>, u: &DVector<f64>, schur: f64) -> DMatrix<f64> {
    // Inverse of [[P, w], [w^T, s]] from P^-1 = inv, u = P^-1 w and
    // schur = s - w^T u.
    let g = inv.nrows();
    let mut out = DMatrix::zeros(g + 1, g + 1);
    for i in 0..g {
        for j in 0..g {
            out[(i, j)] = inv[(i, j)] + u[i] * u[j] / schur;
        }
        out[(i, g)] = -u[i] / schur;
        out[(g, i)] = -u[i] / schur;
    }
    out[(g, g)] = 1.0 / schur;
    out
}

/// Storage for `Lambda` and `K_GG^-1` under either update scheme.
#[derive(Debug, Clone)]
enum Solver {
    Explicit { lambda: DMatrix<f64>, k_inv: DMatrix<f64> },
    /// Lower factors `P P^T = Lambda^-1` and `K K^T = K_GG`.
    Factored { p: DMatrix<f64>, k: DMatrix<f64> },
}

impl Solver {
    fn new(scheme: UpdateScheme) -> Self {
        let e = || DMatrix::zeros(0, 0);
        match scheme {
            UpdateScheme::Explicit => Solver::Explicit { lambda: e(), k_inv: e() },
            UpdateScheme::Factored => Solver::Factored { p: e(), k: e() },
        }
    }

    /// `Lambda^-1 += a a^T`.
    fn observe(&mut self, a: &DVector<f64>) {
        match self {
            Solver::Explicit { lambda, .. } => {
                let la = &*lambda * a;
                let denom = 1.0 + a.dot(&la);
                lambda.ger(-1.0 / denom, &la, &la, 1.0);
            }
            Solver::Factored { p, .. } => {
                let m = std::mem::replace(p, DMatrix::zeros(0, 0));
                let mut ch = nalgebra::Cholesky::pack_dirty(m);
                ch.rank_one_update(a, 1.0);
                *p = ch.unpack_dirty();
            }
        }
    }

    /// Schur complement of bordering `K_GG` with column `a` and corner `c`,
    /// plus the auxiliary vector the append step needs.
    fn border_k(&self, a: &DVector<f64>, c: f64) -> (f64, DVector<f64>) {
        match self {
            Solver::Explicit { k_inv, .. } => {
                let u = k_inv * a;
                (c - a.dot(&u), u)
            }
            Solver::Factored { k, .. } => {
                let l = solve_lower(k, a);
                (c - l.norm_squared(), l)
            }
        }
    }

    /// As [`Solver::border_k`] for `Lambda^-1` with column `w` and corner `s`.
    fn border_p(&self, w: &DVector<f64>, s: f64) -> (f64, DVector<f64>) {
        match self {
            Solver::Explicit { lambda, .. } => {
                let u = lambda * w;
                (s - w.dot(&u), u)
            }
            Solver::Factored { p, .. } => {
                let l = solve_lower(p, w);
                (s - l.norm_squared(), l)
            }
        }
    }

    fn append(&mut self, aux_k: &DVector<f64>, schur_k: f64, aux_p: &DVector<f64>, schur_p: f64) {
        match self {
            Solver::Explicit { lambda, k_inv } => {
                *lambda = symmetric_schur_append(lambda, aux_p, schur_p);
                *k_inv = symmetric_schur_append(k_inv, aux_k, schur_k);
            }
            Solver::Factored { p, k } => {
                *p = border_factor(std::mem::replace(p, DMatrix::zeros(0, 0)), aux_p, schur_p.sqrt());
                *k = border_factor(std::mem::replace(k, DMatrix::zeros(0, 0)), aux_k, schur_k.sqrt());
            }
        }
    }

    /// First stored point: `Lambda^-1 = [s]`, `K_GG = [c]`.
    fn init(&mut self, c: f64, s: f64) {
        match self {
            Solver::Explicit { lambda, k_inv } => {
                *lambda = DMatrix::from_element(1, 1, 1.0 / s);
                *k_inv = DMatrix::from_element(1, 1, 1.0 / c);
            }
            Solver::Factored { p, k } => {
                *p = DMatrix::from_element(1, 1, s.sqrt());
                *k = DMatrix::from_element(1, 1, c.sqrt());
            }
        }
    }

    fn lambda_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            Solver::Explicit { lambda, .. } => lambda * v,
            Solver::Factored { p, .. } => {
                let mut x = solve_lower(p, v);
                p.tr_solve_lower_triangular_mut(&mut x);
                x
            }
        }
    }

    /// `(v^T Lambda v, v^T K_GG^-1 v)`.
    fn quad_forms(&self, v: &DVector<f64>) -> (f64, f64) {
        match self {
            Solver::Explicit { lambda, k_inv } => (v.dot(&(lambda * v)), v.dot(&(k_inv * v))),
            Solver::Factored { p, k } => (solve_lower(p, v).norm_squared(), solve_lower(k, v).norm_squared()),
        }
    }

    fn inverse_of_factor(l: &DMatrix<f64>) -> DMatrix<f64> {
        nalgebra::Cholesky::pack_dirty(l.clone()).inverse()
    }

    fn lambda_matrix(&self) -> DMatrix<f64> {
        match self {
            Solver::Explicit { lambda, .. } => lambda.clone(),
            Solver::Factored { p, .. } => Self::inverse_of_factor(p),
        }
    }

    fn k_inv(&self) -> DMatrix<f64> {
        match self {
            Solver::Explicit { k_inv, .. } => k_inv.clone(),
            Solver::Factored { k, .. } => Self::inverse_of_factor(k),
        }
    }
}

impl NystromState {
    pub fn new(kernel: KernelSpec, params: NystromParams) -> Result<Self> {
        kernel.validate()?;
        params.validate()?;
        Ok(Self {
            kernel,
            params,
            g_points: vec![],
            g_weights: vec![],
            history: vec![],
            ys: vec![],
            gx: vec![],
            chol: DMatrix::zeros(0, 0),
            solver: Solver::new(params.scheme),
            y_proj: DVector::zeros(0),
            tau_log: vec![],
            ops: vec![],
            degenerate_skips: 0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn params(&self) -> &NystromParams {
        &self.params
    }

    pub fn g_size(&self) -> usize {
        self.g_points.len()
    }

    pub fn t(&self) -> usize {
        self.history.len()
    }

    pub fn stored_points(&self) -> &[ContextPoint] {
        &self.g_points
    }

    /// Scaling weights `min(tau, 1)` of the stored points.
    pub fn stored_weights(&self) -> &[f64] {
        &self.g_weights
    }

    pub fn history(&self) -> &[ContextPoint] {
        &self.history
    }

    pub fn observations(&self) -> &[f64] {
        &self.ys
    }

    /// `Lambda`, materialized from the maintained representation.
    pub fn lambda_matrix(&self) -> DMatrix<f64> {
        self.solver.lambda_matrix()
    }

    /// `K_GG^-1`, materialized from the maintained representation.
    pub fn k_gg_inv(&self) -> DMatrix<f64> {
        self.solver.k_inv()
    }

    pub fn y_proj(&self) -> &DVector<f64> {
        &self.y_proj
    }

    /// `(tau, joined)` per observation.
    pub fn score_log(&self) -> &[(f64, bool)] {
        &self.tau_log
    }

    pub fn round_ops(&self) -> &[RoundOps] {
        &self.ops
    }

    pub fn degenerate_skips(&self) -> usize {
        self.degenerate_skips
    }

    fn k_g(&self, x: &ContextPoint) -> Vec<f64> {
        self.g_points.iter().map(|g| self.kernel.eval(g, x)).collect()
    }

    /// `tau`, `k_G(x)` and `z = L^-1 M k_G(x)`.
    fn score(&self, x: &ContextPoint) -> (f64, Vec<f64>, Vec<f64>) {
        let g = self.g_size();
        let k_g = self.k_g(x);
        let mut z = vec![0.0; g];
        for i in 0..g {
            let mut acc = self.g_weights[i] * k_g[i];
            for j in 0..i {
                acc -= self.chol[(i, j)] * z[j];
            }
            z[i] = acc / self.chol[(i, i)];
        }
        let zz: f64 = z.iter().map(|v| v * v).sum();
        let c = self.kernel.eval(x, x);
        let lambda = self.params.lambda;
        let resid = (c - zz).max(0.0);
        let tau = (1.0 + self.params.eta) * resid / (resid + lambda);
        (tau, k_g, z)
    }

    /// Estimated ridge leverage score of `x` against the stored set.
    pub fn leverage_score(&self, x: &ContextPoint) -> f64 {
        self.score(x).0
    }

    /// Scores `x` and draws its inclusion with probability `min(b * tau, 1)`.
    /// One uniform draw is consumed on every call.
    pub fn nystrom_select<R: Rng + ?Sized>(&self, x: &ContextPoint, rng: &mut R) -> Selection {
        let g = self.g_size() as u64;
        let (tau, k_g, z) = self.score(x);
        let p = if self.params.budget.is_infinite() { 1.0 } else { (self.params.budget * tau).min(1.0) };
        let u: f64 = rng.random();
        Selection { joined: u < p, tau, weight: tau.min(1.0), k_g, z, score_ops: g * g + g }
    }

    /// Absorbs observation `(x, y)`; `sel` must come from `nystrom_select` on
    /// the current state.
    pub fn update_observation(&mut self, x: &ContextPoint, y: f64, sel: &Selection) -> Result<()> {
        let g = self.g_size();
        if sel.k_g.len() != g {
            return Err(NystromError::InvalidParameter(format!(
                "selection was scored against |G| = {}, state has {g}",
                sel.k_g.len()
            )));
        }
        let mut ops = RoundOps { g_size: g, score: sel.score_ops, ..RoundOps::default() };
        if g > 0 {
            let a = DVector::from_column_slice(&sel.k_g);
            self.solver.observe(&a);
            self.y_proj.axpy(y, &a, 1.0);
            for (row, &v) in self.gx.iter_mut().zip(&sel.k_g) {
                row.push(v);
            }
            ops.update += 2 * (g * g) as u64 + 2 * g as u64;
        }
        self.history.push(x.clone());
        self.ys.push(y);
        self.tau_log.push((sel.tau, sel.joined));
        if sel.joined {
            self.grow(x, sel, &mut ops)?;
        }
        self.ops.push(ops);
        Ok(())
    }

    /// Scores, samples inclusion and absorbs `(x, y)`.
    pub fn observe<R: Rng + ?Sized>(&mut self, x: &ContextPoint, y: f64, rng: &mut R) -> Result<Selection> {
        let sel = self.nystrom_select(x, rng);
        self.update_observation(x, y, &sel)?;
        Ok(sel)
    }

    fn grow(&mut self, x: &ContextPoint, sel: &Selection, ops: &mut RoundOps) -> Result<()> {
        let g = self.g_size();
        let t = self.history.len();
        let lambda = self.params.lambda;
        let c = self.kernel.eval(x, x);
        let p = sel.weight;
        if g > 0 {
            // Reject points already in the span of G before touching anything.
            let a = DVector::from_column_slice(&sel.k_g);
            let (schur_k, aux_k) = self.solver.border_k(&a, c);
            if schur_k <= DEGENERATE_TOL * c.abs().max(f64::MIN_POSITIVE) {
                self.degenerate_skips += 1;
                ops.update += (g * g) as u64;
                return Ok(());
            }
            let kx: Vec<f64> = self.history.iter().map(|h| self.kernel.eval(h, x)).collect();
            let w = DVector::from_iterator(
                g,
                self.gx.iter().enumerate().map(|(j, row)| {
                    row.iter().zip(&kx).map(|(a, b)| a * b).sum::<f64>() + lambda * sel.k_g[j]
                }),
            );
            let s = kx.iter().map(|v| v * v).sum::<f64>() + lambda * c;
            let (schur_l, aux_l) = self.solver.border_p(&w, s);
            // The bordered Lambda^-1 carries the extra row sqrt(lambda * schur_k)
            // orthogonal to every old column, so its complement is at least
            // lambda * schur_k. Anything smaller is cancellation error.
            let schur_l = schur_l.max(lambda * schur_k);
            let y_new: f64 = kx.iter().zip(&self.ys).map(|(a, b)| a * b).sum();
            self.solver.append(&aux_k, schur_k, &aux_l, schur_l);
            self.y_proj = self.y_proj.clone().push(y_new);

            let zz: f64 = sel.z.iter().map(|v| v * v).sum();
            let d2 = (p * p * c + lambda - p * p * zz).max(lambda);
            let old = std::mem::replace(&mut self.chol, DMatrix::zeros(0, 0));
            let mut chol = old.resize(g + 1, g + 1, 0.0);
            for j in 0..g {
                chol[(g, j)] = p * sel.z[j];
            }
            chol[(g, g)] = d2.sqrt();
            self.chol = chol;

            self.gx.push(kx);
            ops.update += 5 * (g * g) as u64 + 4 * g as u64;
            ops.history += (t * (g + 2)) as u64;
        } else {
            if c <= 0.0 {
                self.degenerate_skips += 1;
                return Ok(());
            }
            let kx: Vec<f64> = self.history.iter().map(|h| self.kernel.eval(h, x)).collect();
            let s = kx.iter().map(|v| v * v).sum::<f64>() + lambda * c;
            let y_new: f64 = kx.iter().zip(&self.ys).map(|(a, b)| a * b).sum();
            self.solver.init(c, s);
            self.y_proj = DVector::from_element(1, y_new);
            self.chol = DMatrix::from_element(1, 1, (p * p * c + lambda).sqrt());
            self.gx.push(kx);
            ops.update += 4;
            ops.history += 2 * t as u64;
        }
        self.g_points.push(x.clone());
        self.g_weights.push(p);
        ops.grew = true;
        Ok(())
    }

    /// Posterior mean and variance at each query from the projected model.
    pub fn mv_calc(&self, queries: &[ContextPoint]) -> Result<PosteriorEstimate> {
        if self.g_size() == 0 {
            return Err(NystromError::EmptyNystromSet);
        }
        let lambda = self.params.lambda;
        let alpha = self.solver.lambda_mul(&self.y_proj);
        let mut mean = Vec::with_capacity(queries.len());
        let mut var = Vec::with_capacity(queries.len());
        for q in queries {
            let kg = DVector::from_vec(self.k_g(q));
            let c = self.kernel.eval(q, q);
            mean.push(kg.dot(&alpha));
            let (q_lambda, q_k) = self.solver.quad_forms(&kg);
            var.push((c / lambda + q_lambda - q_k / lambda).max(0.0));
        }
        Ok(PosteriorEstimate { mean, var })
    }

    /// Effective dimension of the stored points' Gram matrix.
    pub fn d_eff(&self) -> Result<f64> {
        Ok(effective_dimension(&gram_sym(&self.kernel, &self.g_points), self.params.lambda)?)
    }

    pub fn summary(&self) -> NystromSummary {
        let cond = |m: &DMatrix<f64>| {
            if m.nrows() == 0 {
                return 1.0;
            }
            let e = ((m + m.transpose()) * 0.5).symmetric_eigenvalues();
            let (lo, hi) = e.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x.abs()), hi.max(x.abs())));
            hi / lo
        };
        NystromSummary {
            t: self.t(),
            g_size: self.g_size(),
            cond_k_gg: cond(&self.k_gg_inv()),
            cond_lambda: cond(&self.lambda_matrix()),
            degenerate_skips: self.degenerate_skips,
        }
    }

    /// Writes the per-observation score log as CSV `t,tau,joined,g_size`.
    pub fn write_score_log<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "tau", "joined", "g_size"])?;
        let mut g = 0usize;
        for (i, ((tau, joined), ops)) in self.tau_log.iter().zip(&self.ops).enumerate() {
            if ops.grew {
                g += 1;
            }
            w.write_record([(i + 1).to_string(), tau.to_string(), joined.to_string(), g.to_string()])?;
        }
        w.flush()
    }
}

/// Solves with the Cholesky factor of `K + lambda I`, adding jitter once.
fn regularized_cholesky(k: &DMatrix<f64>, lambda: f64) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = k.nrows();
    let a = k + DMatrix::identity(n, n) * lambda;
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch);
    }
    let jitter = 1e-10 * a.trace() / n.max(1) as f64;
    (a + DMatrix::identity(n, n) * jitter)
        .cholesky()
        .ok_or_else(|| NystromError::Singular("K + lambda I is not positive definite".into()))
}

/// Dense kernel ridge posterior at `query` from the full history.
pub fn exact_posterior(
    history: &[ContextPoint],
    ys: &[f64],
    kernel: &KernelSpec,
    lambda: f64,
    query: &ContextPoint,
) -> Result<(f64, f64)> {
    let est = ExactModel::fit(kernel.clone(), lambda, history.to_vec(), ys.to_vec())?.predict(std::slice::from_ref(query));
    Ok((est.mean[0], est.var[0]))
}

/// Dense posterior over the whole history; the reference the sketch is
/// compared against.
#[derive(Debug, Clone)]
pub struct ExactModel {
    kernel: KernelSpec,
    lambda: f64,
    points: Vec<ContextPoint>,
    alpha: DVector<f64>,
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl ExactModel {
    pub fn fit(kernel: KernelSpec, lambda: f64, points: Vec<ContextPoint>, ys: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(NystromError::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if points.len() != ys.len() {
            return Err(NystromError::InvalidParameter(format!("{} points but {} observations", points.len(), ys.len())));
        }
        if points.is_empty() {
            return Ok(Self { kernel, lambda, points, alpha: DVector::zeros(0), chol: None });
        }
        let k = gram_sym(&kernel, &points);
        let chol = regularized_cholesky(&k, lambda)?;
        let alpha = chol.solve(&DVector::from_vec(ys));
        Ok(Self { kernel, lambda, points, alpha, chol: Some(chol) })
    }

    pub fn predict(&self, queries: &[ContextPoint]) -> PosteriorEstimate {
        let mut mean = Vec::with_capacity(queries.len());
        let mut var = Vec::with_capacity(queries.len());
        for q in queries {
            let c = self.kernel.eval(q, q);
            match &self.chol {
                None => {
                    mean.push(0.0);
                    var.push(c / self.lambda);
                }
                Some(ch) => {
                    let k = DVector::from_iterator(self.points.len(), self.points.iter().map(|p| self.kernel.eval(p, q)));
                    mean.push(k.dot(&self.alpha));
                    let sol = ch.solve(&k);
                    var.push(((c - k.dot(&sol)) / self.lambda).max(0.0));
                }
            }
        }
        PosteriorEstimate { mean, var }
    }
}

/// Exploration coefficient schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaSchedule {
    Constant { value: f64 },
    /// `sqrt(lambda) B + sqrt(4 log T + log(e + e t / lambda) d_eff)`.
    Theoretical { rkhs_bound: f64, lambda: f64, horizon: usize },
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Constant { value: 1.0 }
    }
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Constant { value } if !(value >= 0.0 && value.is_finite()) => {
                Err(NystromError::InvalidParameter(format!("beta value must be >= 0, got {value}")))
            }
            BetaSchedule::Theoretical { rkhs_bound, lambda, horizon } => {
                if !(rkhs_bound > 0.0) || !(lambda > 0.0) {
                    Err(NystromError::InvalidParameter("rkhs_bound and lambda must be > 0".into()))
                } else if horizon == 0 {
                    Err(NystromError::InvalidParameter("horizon must be >= 1".into()))
                } else {
                    Ok(())
                }
            }
            BetaSchedule::Constant { .. } => Ok(()),
        }
    }

    pub fn needs_d_eff(&self) -> bool {
        matches!(self, BetaSchedule::Theoretical { .. })
    }

    /// `beta_t`; `d_eff` is ignored in constant mode.
    pub fn beta(&self, t: usize, d_eff: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            BetaSchedule::Constant { value } => value,
            BetaSchedule::Theoretical { rkhs_bound, lambda, horizon } => {
                let e = std::f64::consts::E;
                lambda.sqrt() * rkhs_bound
                    + (4.0 * (horizon as f64).ln() + (e + e * t as f64 / lambda).ln() * d_eff).max(0.0).sqrt()
            }
        })
    }
}
