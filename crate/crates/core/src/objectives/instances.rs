//! Ground sets, BP decompositions and seeded instance generation.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::constants::{
    generalized_curvature, submodular_curvature, submodularity_ratio, supermodular_curvature,
};
use super::functions::{
    make_concave_over_modular, make_facility_location, make_genre_square, make_naive_bayes_al,
    make_sum_dispersion, CardinalityPower, Modular, WeightedSum,
};
use super::{ObjectiveError, Result, SetFunctionOracle};

/// The finite ground set `V` with per-item features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSet {
    pub item_features: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item_labels: Option<Vec<usize>>,
}

impl GroundSet {
    pub fn new(item_features: Vec<Vec<f64>>) -> Result<Self> {
        let ground = Self { item_features, item_labels: None };
        ground.validate()?;
        Ok(ground)
    }

    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(ObjectiveError::InvalidInstance(format!(
                "{} labels for {} items",
                labels.len(),
                self.n()
            )));
        }
        self.item_labels = Some(labels);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.item_features.first() else {
            return Err(ObjectiveError::EmptyGroundSet);
        };
        let d = first.len();
        if let Some(v) = self.item_features.iter().position(|f| f.len() != d) {
            return Err(ObjectiveError::InvalidInstance(format!(
                "item {v} has feature dimension {}, expected {d}",
                self.item_features[v].len()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.item_features.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.item_features.first().map_or(0, Vec::len)
    }
}

/// Curvatures of a BP decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub kappa_f: f64,
    pub kappa_g: f64,
    /// `None` when the part is identically zero.
    pub argmin_f: Option<usize>,
    pub argmin_g: Option<usize>,
}

/// Weak-submodularity constants of an arbitrary MNN function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakSubmodReport {
    pub gamma: f64,
    pub zeta: f64,
    pub gamma_witness: Option<(Vec<usize>, Vec<usize>)>,
    pub zeta_witness: Option<(Vec<usize>, Vec<usize>, usize)>,
}

impl WeakSubmodReport {
    pub fn compute(h: &SetFunctionOracle) -> Result<Self> {
        let ratio = submodularity_ratio(h)?;
        let curv = generalized_curvature(h)?;
        Ok(Self {
            gamma: ratio.gamma,
            zeta: curv.zeta,
            gamma_witness: ratio.witness,
            zeta_witness: curv.witness,
        })
    }
}

/// `h(S) = sum_{v in S} m(v) + scale_f * f(S) + scale_g * g(S)` with `f`
/// submodular and `g` supermodular, both MNN.
///
/// The submodular part of the decomposition is `m + scale_f * f` and the
/// supermodular part is `scale_g * g`.
#[derive(Debug, Clone)]
pub struct BPObjective {
    modular: Vec<f64>,
    f: SetFunctionOracle,
    g: SetFunctionOracle,
    scale_f: f64,
    scale_g: f64,
    submodular: SetFunctionOracle,
    supermodular: SetFunctionOracle,
    total: SetFunctionOracle,
}

impl BPObjective {
    pub fn new(
        modular: Vec<f64>,
        f: SetFunctionOracle,
        g: SetFunctionOracle,
        scale_f: f64,
        scale_g: f64,
    ) -> Result<Self> {
        let n = f.n();
        if g.n() != n || modular.len() != n {
            return Err(ObjectiveError::InvalidInstance(format!(
                "parts disagree on ground set size: m={}, f={}, g={}",
                modular.len(),
                n,
                g.n()
            )));
        }
        for (name, s) in [("scale_f", scale_f), ("scale_g", scale_g)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(ObjectiveError::InvalidInstance(format!("{name} must be >= 0, got {s}")));
            }
        }
        if let Some(v) = modular.iter().position(|&w| w < 0.0) {
            return Err(ObjectiveError::NegativeEntry { row: v, col: 0, value: modular[v] });
        }
        let m = SetFunctionOracle::unmemoized("modular", Modular::new(modular.clone()));
        let submodular = SetFunctionOracle::new(
            "bp_submodular",
            WeightedSum::new(vec![(1.0, m), (scale_f, f.clone())])?,
        );
        let supermodular =
            SetFunctionOracle::new("bp_supermodular", WeightedSum::new(vec![(scale_g, g.clone())])?);
        let total = SetFunctionOracle::new(
            "bp_total",
            WeightedSum::new(vec![(1.0, submodular.clone()), (1.0, supermodular.clone())])?,
        );
        Ok(Self { modular, f, g, scale_f, scale_g, submodular, supermodular, total })
    }

    /// Builds with `scale_g` chosen so `scale_g * g(R_g) = dominance * scale_f * f(R_f)`.
    ///
    /// `R_f`, `R_g` are the full ground set when `reference_size` is `None`,
    /// otherwise the greedy sets of that size for `f` and `g` separately.
    pub fn balanced(
        modular: Vec<f64>,
        f: SetFunctionOracle,
        g: SetFunctionOracle,
        scale_f: f64,
        dominance: f64,
        reference_size: Option<usize>,
    ) -> Result<Self> {
        let reference = |o: &SetFunctionOracle| -> f64 {
            match reference_size {
                None => o.value_sorted(&(0..o.n()).collect::<Vec<_>>()),
                Some(k) => {
                    let mut set: Vec<usize> = Vec::new();
                    for _ in 0..k.min(o.n()) {
                        let best = (0..o.n())
                            .filter(|v| set.binary_search(v).is_err())
                            .map(|v| (o.gain_sorted(v, &set), v))
                            .fold(None, |acc: Option<(f64, usize)>, (gain, v)| match acc {
                                Some((bg, _)) if bg >= gain => acc,
                                _ => Some((gain, v)),
                            });
                        if let Some((_, v)) = best {
                            set = super::insert_sorted(&set, v);
                        }
                    }
                    o.value_sorted(&set)
                }
            }
        };
        let fv = reference(&f);
        let gv = reference(&g);
        let scale_g = if gv > 0.0 { dominance * scale_f * fv / gv } else { 0.0 };
        Self::new(modular, f, g, scale_f, scale_g)
    }

    pub fn n(&self) -> usize {
        self.total.n()
    }

    pub fn modular_weights(&self) -> &[f64] {
        &self.modular
    }

    pub fn f(&self) -> &SetFunctionOracle {
        &self.f
    }

    pub fn g(&self) -> &SetFunctionOracle {
        &self.g
    }

    pub fn scale_f(&self) -> f64 {
        self.scale_f
    }

    pub fn scale_g(&self) -> f64 {
        self.scale_g
    }

    /// `m + scale_f * f`.
    pub fn submodular_part(&self) -> &SetFunctionOracle {
        &self.submodular
    }

    /// `scale_g * g`.
    pub fn supermodular_part(&self) -> &SetFunctionOracle {
        &self.supermodular
    }

    /// The whole objective `h`.
    pub fn total(&self) -> &SetFunctionOracle {
        &self.total
    }

    pub fn value(&self, set: &[usize]) -> Result<f64> {
        self.total.value(set)
    }

    /// Curvatures of the two parts. An identically zero part is modular and
    /// reports curvature 0.
    pub fn curvatures(&self) -> Result<CurvatureReport> {
        let part = |r: Result<super::CurvaturePart>| match r {
            Ok(p) => Ok((p.kappa, Some(p.argmin))),
            Err(ObjectiveError::AllSingletonsZero) => Ok((0.0, None)),
            Err(e) => Err(e),
        };
        let (kappa_f, argmin_f) = part(submodular_curvature(&self.submodular))?;
        let (kappa_g, argmin_g) = part(supermodular_curvature(&self.supermodular))?;
        Ok(CurvatureReport { kappa_f, kappa_g, argmin_f, argmin_g })
    }
}

/// A generated objective with its ground set.
#[derive(Debug, Clone)]
pub enum Instance {
    Single { ground: GroundSet, oracle: SetFunctionOracle },
    Bp { ground: GroundSet, objective: BPObjective },
}

impl Instance {
    pub fn ground(&self) -> &GroundSet {
        match self {
            Instance::Single { ground, .. } | Instance::Bp { ground, .. } => ground,
        }
    }

    /// The objective `h` as a single oracle.
    pub fn oracle(&self) -> &SetFunctionOracle {
        match self {
            Instance::Single { oracle, .. } => oracle,
            Instance::Bp { objective, .. } => objective.total(),
        }
    }

    pub fn as_bp(&self) -> Option<&BPObjective> {
        match self {
            Instance::Bp { objective, .. } => Some(objective),
            Instance::Single { .. } => None,
        }
    }
}

/// Serializable recipe for an instance; regeneration from the same spec is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parameters: Map<String, Value>,
}

pub(crate) struct Params<'a> {
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(map: &'a Map<String, Value>) -> Self {
        Self { map }
    }

    fn bad(name: &str, what: &str) -> ObjectiveError {
        ObjectiveError::InvalidInstance(format!("parameter `{name}` must be {what}"))
    }

    pub(crate) fn f64_or(&self, name: &str, default: f64) -> Result<f64> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| Self::bad(name, "a number")),
        }
    }

    pub(crate) fn opt_f64(&self, name: &str) -> Result<Option<f64>> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| Self::bad(name, "a number")),
        }
    }

    pub(crate) fn usize_or(&self, name: &str, default: usize) -> Result<usize> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Self::bad(name, "a nonnegative integer")),
        }
    }

    pub(crate) fn opt_usize(&self, name: &str) -> Result<Option<usize>> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => self.usize_or(name, 0).map(Some),
        }
    }

    pub(crate) fn str_or(&self, name: &str, default: &'a str) -> Result<&'a str> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => v.as_str().ok_or_else(|| Self::bad(name, "a string")),
        }
    }

    pub(crate) fn opt_vec(&self, name: &str) -> Result<Option<Vec<f64>>> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(xs)) => xs
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| Self::bad(name, "an array of numbers")))
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(Self::bad(name, "an array of numbers")),
        }
    }

    pub(crate) fn opt_matrix(&self, name: &str) -> Result<Option<Vec<Vec<f64>>>> {
        match self.map.get(name) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Array(rows)) => rows
                .iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Self::bad(name, "a matrix of numbers"))?
                        .iter()
                        .map(|x| x.as_f64().ok_or_else(|| Self::bad(name, "a matrix of numbers")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(Self::bad(name, "a matrix of numbers")),
        }
    }
}

/// Median of a slice (average of the two middle values for even lengths).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub(crate) fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
}

pub(crate) fn random_dispersion(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<Vec<f64>> {
    let mut b = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < density {
                let w = rng.random::<f64>();
                b[i][j] = w;
                b[j][i] = w;
            }
        }
    }
    b
}

/// Each item gets one or two of `genres` genres.
pub(crate) fn random_genres(rng: &mut ChaCha8Rng, n: usize, genres: usize) -> Vec<Vec<bool>> {
    (0..n)
        .map(|_| {
            let mut row = vec![false; genres];
            row[rng.random_range(0..genres)] = true;
            if genres > 1 && rng.random::<f64>() < 0.4 {
                row[rng.random_range(0..genres)] = true;
            }
            row
        })
        .collect()
}

fn random_features(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect()
}

fn genre_features(genres: &[Vec<bool>]) -> Vec<Vec<f64>> {
    genres.iter().map(|r| r.iter().map(|&b| f64::from(u8::from(b))).collect()).collect()
}

impl InstanceSpec {
    pub fn new(kind: impl Into<String>, n: usize, seed: u64) -> Self {
        Self { kind: kind.into(), n, seed, parameters: Map::new() }
    }

    pub fn with_param(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(name.to_owned(), value.into());
        self
    }

    /// Regenerates the instance from `(kind, n, seed, parameters)`.
    pub fn generate(&self) -> Result<Instance> {
        let n = self.n;
        if n == 0 {
            return Err(ObjectiveError::EmptyGroundSet);
        }
        let p = Params::new(&self.parameters);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let single = |ground: GroundSet, oracle: SetFunctionOracle| Ok(Instance::Single { ground, oracle });
        match self.kind.as_str() {
            "modular" => {
                let w = match p.opt_vec("weights")? {
                    Some(w) => w,
                    None => (0..n).map(|_| rng.random::<f64>()).collect(),
                };
                check_len("weights", w.len(), n)?;
                let ground = GroundSet::new(random_features(&mut rng, n, 2))?;
                single(ground, SetFunctionOracle::new("modular", Modular::new(w)))
            }
            "facility_location" => {
                let sim = match p.opt_matrix("similarity")? {
                    Some(m) => m,
                    None => random_similarity(&mut rng, n),
                };
                check_len("similarity", sim.len(), n)?;
                let ground = GroundSet::new(sim.clone())?;
                single(ground, make_facility_location(&sim)?)
            }
            "concave_over_modular" | "genre_square" => {
                let genres = p.usize_or("genres", 3)?.max(1);
                let memberships = random_genres(&mut rng, n, genres);
                let ratings: Vec<f64> = match p.opt_vec("ratings")? {
                    Some(r) => r,
                    None => (0..n).map(|_| 1.0 + 4.0 * rng.random::<f64>()).collect(),
                };
                check_len("ratings", ratings.len(), n)?;
                let tau = p.f64_or("threshold", median(&ratings))?;
                let ground = GroundSet::new(genre_features(&memberships))?;
                let oracle = if self.kind == "genre_square" {
                    make_genre_square(&memberships, &ratings, tau)?
                } else {
                    make_concave_over_modular(&memberships, &ratings, tau)?
                };
                single(ground, oracle)
            }
            "sum_dispersion" => {
                let b = match p.opt_matrix("matrix")? {
                    Some(b) => b,
                    None => random_dispersion(&mut rng, n, p.f64_or("density", 0.5)?),
                };
                check_len("matrix", b.len(), n)?;
                let ground = GroundSet::new(random_features(&mut rng, n, 2))?;
                single(ground, make_sum_dispersion(&b)?)
            }
            "naive_bayes" => {
                let cells = p.usize_or("cells", 4)?.max(1);
                let points = random_features(&mut rng, n, 2);
                let side = (cells as f64).sqrt().ceil() as usize;
                let cell_ids: Vec<usize> = points
                    .iter()
                    .map(|x| {
                        let cx = ((x[0] * side as f64) as usize).min(side - 1);
                        let cy = ((x[1] * side as f64) as usize).min(side - 1);
                        (cx * side + cy) % cells
                    })
                    .collect();
                let labels: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
                let ground = GroundSet::new(points)?
                    .with_labels(labels.iter().map(|&b| usize::from(b)).collect())?;
                single(ground, make_naive_bayes_al(&cell_ids, &labels)?)
            }
            "cardinality_power" => {
                let exponent = p.f64_or("exponent", 2.0)?;
                let scale = p.f64_or("scale", 1.0)?;
                let ground = GroundSet::new(random_features(&mut rng, n, 2))?;
                single(
                    ground,
                    SetFunctionOracle::unmemoized("cardinality_power", CardinalityPower { n, exponent, scale }),
                )
            }
            "bp" => self.generate_bp(&p, &mut rng),
            "ws_mixture" => self.generate_ws(&p, &mut rng),
            other => Err(ObjectiveError::InvalidInstance(format!("unknown instance kind `{other}`"))),
        }
    }

    fn generate_bp(&self, p: &Params<'_>, rng: &mut ChaCha8Rng) -> Result<Instance> {
        let n = self.n;
        let f_kind = match p.str_or("f_kind", "mixed")? {
            "mixed" => {
                if rng.random::<f64>() < 0.5 {
                    "facility_location"
                } else {
                    "concave_over_modular"
                }
            }
            k @ ("facility_location" | "concave_over_modular") => k,
            other => {
                return Err(ObjectiveError::InvalidInstance(format!("unsupported f_kind `{other}`")))
            }
        };
        let genres = p.usize_or("genres", 3)?.max(1);
        let memberships = random_genres(rng, n, genres);
        let ratings: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.random::<f64>()).collect();
        let tau = p.f64_or("threshold", median(&ratings))?;
        let f = if f_kind == "facility_location" {
            make_facility_location(&random_similarity(rng, n))?
        } else {
            make_concave_over_modular(&memberships, &ratings, tau)?
        };
        let g = match p.str_or("g_kind", "sum_dispersion")? {
            "sum_dispersion" => make_sum_dispersion(&random_dispersion(rng, n, p.f64_or("density", 0.5)?))?,
            "genre_square" => make_genre_square(&memberships, &ratings, tau)?,
            other => {
                return Err(ObjectiveError::InvalidInstance(format!("unsupported g_kind `{other}`")))
            }
        };
        let modular_scale = p.f64_or("modular_scale", 0.3)?;
        let modular: Vec<f64> = (0..n).map(|_| modular_scale * rng.random::<f64>()).collect();
        let scale_f = p.f64_or("scale_f", 1.0)?;
        let objective = match p.opt_f64("scale_g")? {
            Some(scale_g) => BPObjective::new(modular, f, g, scale_f, scale_g)?,
            None => BPObjective::balanced(
                modular,
                f,
                g,
                scale_f,
                p.f64_or("dominance", 1.2)?,
                p.opt_usize("reference_size")?,
            )?,
        };
        let ground = GroundSet::new(genre_features(&memberships))?;
        Ok(Instance::Bp { ground, objective })
    }

    /// Monotone mixtures of a submodular term and `|S|^p` terms.
    fn generate_ws(&self, p: &Params<'_>, rng: &mut ChaCha8Rng) -> Result<Instance> {
        let n = self.n;
        let sub = if rng.random::<f64>() < 0.5 {
            make_facility_location(&random_similarity(rng, n))?
        } else {
            let memberships = random_genres(rng, n, 3);
            let ratings: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.random::<f64>()).collect();
            make_concave_over_modular(&memberships, &ratings, median(&ratings))?
        };
        let mut terms = vec![(0.5 + rng.random::<f64>(), sub)];
        let powers = p.usize_or("power_terms", 1 + rng.random_range(0..2usize))?;
        for _ in 0..powers {
            let exponent = 1.0 + 2.0 * rng.random::<f64>();
            let scale = 0.02 + 0.3 * rng.random::<f64>();
            terms.push((
                1.0,
                SetFunctionOracle::unmemoized("cardinality_power", CardinalityPower { n, exponent, scale }),
            ));
        }
        let modular: Vec<f64> = (0..n).map(|_| 0.3 * rng.random::<f64>()).collect();
        terms.push((1.0, SetFunctionOracle::unmemoized("modular", Modular::new(modular))));
        let oracle = SetFunctionOracle::new("ws_mixture", WeightedSum::new(terms)?);
        let ground = GroundSet::new(random_features(rng, n, 2))?;
        Ok(Instance::Single { ground, oracle })
    }
}

fn check_len(name: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(ObjectiveError::InvalidInstance(format!("`{name}` has {got} entries, expected {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{verify_mnn_properties, PropertyKind};

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec::new("bp", 7, 42);
        let a = spec.generate().unwrap();
        let b = spec.generate().unwrap();
        let all: Vec<usize> = (0..7).collect();
        assert_eq!(a.oracle().value(&all).unwrap(), b.oracle().value(&all).unwrap());
        let json = serde_json::to_string(&spec).unwrap();
        let back: InstanceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_kind_and_fields_are_rejected() {
        assert!(InstanceSpec::new("nope", 3, 0).generate().is_err());
        let err = serde_json::from_str::<InstanceSpec>(r#"{"kind":"bp","n":3,"sed":1}"#);
        assert!(err.is_err());
    }

    #[test]
    fn balanced_scale_matches_dominance_rule() {
        let inst = InstanceSpec::new("bp", 6, 3).generate().unwrap();
        let bp = inst.as_bp().unwrap();
        let all: Vec<usize> = (0..6).collect();
        let lhs = bp.scale_g() * bp.g().value(&all).unwrap();
        let rhs = 1.2 * bp.scale_f() * bp.f().value(&all).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn bp_parts_are_mnn() {
        for seed in 0..5 {
            let inst = InstanceSpec::new("bp", 6, seed).generate().unwrap();
            let bp = inst.as_bp().unwrap();
            let sub = bp.submodular_part();
            let sup = bp.supermodular_part();
            assert!(verify_mnn_properties(sub, PropertyKind::Submodular).unwrap().passed);
            assert!(verify_mnn_properties(sup, PropertyKind::Supermodular).unwrap().passed);
            assert!(verify_mnn_properties(bp.total(), PropertyKind::Monotone).unwrap().passed);
            let c = bp.curvatures().unwrap();
            assert!((0.0..=1.0).contains(&c.kappa_f) && (0.0..=1.0).contains(&c.kappa_g));
        }
    }

    #[test]
    fn ground_set_validation() {
        assert_eq!(GroundSet::new(vec![]).unwrap_err(), ObjectiveError::EmptyGroundSet);
        assert!(GroundSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
