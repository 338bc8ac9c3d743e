//! Exact structural constants of set functions.
//!
//! Curvatures need `O(n)` evaluations. The submodularity ratio and the
//! generalized curvature are computed by exhaustive enumeration over a table
//! of all `2^n` subset values, so they are capped at [`ENUMERATION_CAP`].

use super::{mask_to_ids, ObjectiveError, Result, SetFunctionOracle};

/// Largest ground set for which `gamma` and `zeta` are enumerated.
pub const ENUMERATION_CAP: usize = 12;
/// Largest ground set accepted by [`verify_mnn_properties`].
pub const VERIFY_CAP: usize = 10;

// Gains at or below this are treated as zero denominators.
const ZERO_GAIN: f64 = 1e-12;

/// One curvature value with the item attaining the minimum ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvaturePart {
    pub kappa: f64,
    pub argmin: usize,
}

fn all_but(n: usize, v: usize) -> Vec<usize> {
    (0..n).filter(|&i| i != v).collect()
}

fn curvature_by<F>(f: &SetFunctionOracle, ratio: F) -> Result<CurvaturePart>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    let n = f.n();
    let mut best: Option<(f64, usize)> = None;
    for v in 0..n {
        let single = f.value_sorted(&[v]);
        let last = f.gain_sorted(v, &all_but(n, v));
        if let Some(r) = ratio(single, last) {
            if best.is_none_or(|(b, _)| r < b) {
                best = Some((r, v));
            }
        }
    }
    let (min_ratio, argmin) = best.ok_or(ObjectiveError::AllSingletonsZero)?;
    // Rounding in `f(v | V - v)` leaves modular functions a few ulps off 0.
    let kappa = if (1.0 - min_ratio).abs() <= 1e-12 { 0.0 } else { (1.0 - min_ratio).clamp(0.0, 1.0) };
    Ok(CurvaturePart { kappa, argmin })
}

/// `kappa_f = 1 - min_v f(v | V - v) / f(v)`, skipping items with `f(v) = 0`.
pub fn submodular_curvature(f: &SetFunctionOracle) -> Result<CurvaturePart> {
    curvature_by(f, |single, last| (single > ZERO_GAIN).then(|| last / single))
}

/// `kappa^g = 1 - min_v g(v) / g(v | V - v)`, skipping items with
/// `g(v | V - v) = 0`.
pub fn supermodular_curvature(g: &SetFunctionOracle) -> Result<CurvaturePart> {
    curvature_by(g, |single, last| (last > ZERO_GAIN).then(|| single / last))
}

/// Values of `f` on every subset, indexed by bit mask.
pub fn subset_table(f: &SetFunctionOracle, cap: usize) -> Result<Vec<f64>> {
    let n = f.n();
    if n > cap {
        return Err(ObjectiveError::GroundSetTooLarge { n, cap });
    }
    Ok((0..1u64 << n).map(|m| f.value_direct(&mask_to_ids(m))).collect())
}

/// Iterates the submasks of `mask`, including `0` and `mask` itself.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// Submodularity ratio with the `(A, S)` pair attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityRatio {
    pub gamma: f64,
    /// `(A, S)` with `S` disjoint from `A`; `None` when no pair has a positive gain.
    pub witness: Option<(Vec<usize>, Vec<usize>)>,
}

/// Largest `gamma` with `sum_{v in S - A} h(v|A) >= gamma h(S|A)` for all `A, S`.
///
/// Both sides only depend on `S - A`, so the search runs over disjoint pairs.
pub fn submodularity_ratio(h: &SetFunctionOracle) -> Result<SubmodularityRatio> {
    let n = h.n();
    let table = subset_table(h, ENUMERATION_CAP)?;
    let full = (1u64 << n) - 1;
    let mut best: Option<(f64, u64, u64)> = None;
    for a in 0..=full {
        let base = table[a as usize];
        let rest = full & !a;
        for s in submasks(rest) {
            if s.count_ones() < 2 {
                continue;
            }
            let joint = table[(a | s) as usize] - base;
            if joint <= ZERO_GAIN {
                continue;
            }
            let mut singles = 0.0;
            let mut bits = s;
            while bits != 0 {
                let v = bits.trailing_zeros();
                singles += table[(a | (1 << v)) as usize] - base;
                bits &= bits - 1;
            }
            let ratio = singles / joint;
            if best.is_none_or(|(b, _, _)| ratio < b) {
                best = Some((ratio, a, s));
            }
        }
    }
    Ok(match best {
        Some((ratio, a, s)) => SubmodularityRatio {
            gamma: ratio.clamp(0.0, 1.0),
            witness: Some((mask_to_ids(a), mask_to_ids(s))),
        },
        None => SubmodularityRatio { gamma: 1.0, witness: None },
    })
}

/// Generalized curvature with the `(S, A, v)` triple attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedCurvature {
    pub zeta: f64,
    pub witness: Option<(Vec<usize>, Vec<usize>, usize)>,
}

/// Smallest `zeta` with `h(v | (A - v) + S) >= (1 - zeta) h(v | A - v)`.
///
/// With `B = A - v` and `C = B + S` the condition reads
/// `h(v|C) >= (1 - zeta) h(v|B)` over all `B subset C subset V - v`.
pub fn generalized_curvature(h: &SetFunctionOracle) -> Result<GeneralizedCurvature> {
    let n = h.n();
    let table = subset_table(h, ENUMERATION_CAP)?;
    let full = (1u64 << n) - 1;
    let mut best: Option<(f64, u64, u64, usize)> = None;
    for v in 0..n {
        let bit = 1u64 << v;
        let others = full & !bit;
        for b in submasks(others) {
            let gain_b = table[(b | bit) as usize] - table[b as usize];
            if gain_b <= ZERO_GAIN {
                continue;
            }
            for extra in submasks(others & !b) {
                let c = b | extra;
                let gain_c = table[(c | bit) as usize] - table[c as usize];
                let ratio = gain_c / gain_b;
                if best.is_none_or(|(r, ..)| ratio < r) {
                    best = Some((ratio, b, c, v));
                }
            }
        }
    }
    Ok(match best {
        Some((ratio, b, c, v)) => GeneralizedCurvature {
            zeta: (1.0 - ratio).clamp(0.0, 1.0),
            witness: Some((mask_to_ids(c & !b), mask_to_ids(b | (1 << v)), v)),
        },
        None => GeneralizedCurvature { zeta: 0.0, witness: None },
    })
}

/// Modular lower bound `l1(v) = f(v | V - v)` of a submodular function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularLowerBound {
    pub weights: Vec<f64>,
}

impl ModularLowerBound {
    pub fn value(&self, set: &[usize]) -> f64 {
        set.iter().map(|&v| self.weights[v]).sum()
    }

    /// `f1 = f - l1`, the totally normalized part of `f`.
    pub fn totally_normalized(&self, f: &SetFunctionOracle) -> SetFunctionOracle {
        let inner = f.clone();
        let weights = self.weights.clone();
        SetFunctionOracle::new(
            format!("{}_totally_normalized", f.name()),
            super::FnSetFunction::new(f.n(), move |s: &[usize]| {
                inner.value_sorted(s) - s.iter().map(|&v| weights[v]).sum::<f64>()
            }),
        )
    }
}

pub fn modular_lower_bound(f: &SetFunctionOracle) -> ModularLowerBound {
    let n = f.n();
    ModularLowerBound { weights: (0..n).map(|v| f.gain_sorted(v, &all_but(n, v))).collect() }
}

/// Property checked by [`verify_mnn_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Submodular,
    Supermodular,
    Monotone,
    Normalized,
}

/// Outcome of an exhaustive property check. On failure `counterexample`
/// holds `(A, B, v)` with `A subset B` and `v` not in `B` (for
/// monotonicity `A = B`).
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub kind: PropertyKind,
    pub passed: bool,
    pub counterexample: Option<(Vec<usize>, Vec<usize>, usize)>,
}

/// Exhaustively checks one MNN-related property for `n <= VERIFY_CAP`.
///
/// Submodularity is checked through the equivalent local condition
/// `f(v|A) >= f(v|A + w)` for all `A` and distinct `v, w` outside `A`.
pub fn verify_mnn_properties(f: &SetFunctionOracle, kind: PropertyKind) -> Result<PropertyReport> {
    let n = f.n();
    let table = subset_table(f, VERIFY_CAP)?;
    let scale = table.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let full = (1u64 << n) - 1;
    let fail = |a: u64, b: u64, v: usize| PropertyReport {
        kind,
        passed: false,
        counterexample: Some((mask_to_ids(a), mask_to_ids(b), v)),
    };
    match kind {
        PropertyKind::Normalized => {
            if table[0].abs() > tol {
                return Ok(fail(0, 0, 0));
            }
        }
        PropertyKind::Monotone => {
            for a in 0..=full {
                for v in 0..n {
                    if a & (1 << v) == 0 && table[(a | 1 << v) as usize] < table[a as usize] - tol {
                        return Ok(fail(a, a, v));
                    }
                }
            }
        }
        PropertyKind::Submodular | PropertyKind::Supermodular => {
            let sign = if kind == PropertyKind::Submodular { 1.0 } else { -1.0 };
            for a in 0..=full {
                for v in 0..n {
                    if a & (1 << v) != 0 {
                        continue;
                    }
                    let small = table[(a | 1 << v) as usize] - table[a as usize];
                    for w in 0..n {
                        if w == v || a & (1 << w) != 0 {
                            continue;
                        }
                        let b = a | 1 << w;
                        let large = table[(b | 1 << v) as usize] - table[b as usize];
                        if sign * (small - large) < -tol {
                            return Ok(fail(a, b, v));
                        }
                    }
                }
            }
        }
    }
    Ok(PropertyReport { kind, passed: true, counterexample: None })
}
