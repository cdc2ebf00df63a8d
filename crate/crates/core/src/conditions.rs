//! Embeddability conditions and the parameter regimes in which they are
//! known to be sufficient.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{binom2, classify_edge, conforms_to_gdd, EdgeKind, GddParams, ParamError};
use crate::graph::{Color, ColoredMultigraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("graph is not K({a}^({p}); {lambda}, {mu})")]
    NotConforming { a: u64, p: u64, lambda: u64, mu: u64 },
    #[error("lambda = {lambda} differs from mu*a*(p+r-1) = {bound}")]
    NotBoundary { lambda: u64, bound: u64 },
}

/// Stable identifiers for every condition the checker can report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionId {
    ColorCount,
    PureBound,
    PathForest,
    ComponentBound,
    SumInequality,
    BoundaryColorCount,
    BoundaryPathForest,
    BoundaryEdgeCounts,
    BoundaryComponentBound,
}

impl ConditionId {
    pub const ALL: [ConditionId; 9] = [
        ConditionId::ColorCount,
        ConditionId::PureBound,
        ConditionId::PathForest,
        ConditionId::ComponentBound,
        ConditionId::SumInequality,
        ConditionId::BoundaryColorCount,
        ConditionId::BoundaryPathForest,
        ConditionId::BoundaryEdgeCounts,
        ConditionId::BoundaryComponentBound,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            ConditionId::ColorCount => "thm1.2.i",
            ConditionId::PureBound => "thm1.2.ii",
            ConditionId::PathForest => "thm1.2.iii",
            ConditionId::ComponentBound => "thm1.2.iv",
            ConditionId::SumInequality => "eq2",
            ConditionId::BoundaryColorCount => "thm3.5.i",
            ConditionId::BoundaryPathForest => "thm3.5.ii",
            ConditionId::BoundaryEdgeCounts => "thm3.5.iii",
            ConditionId::BoundaryComponentBound => "thm3.5.iv",
        }
    }

    pub fn from_code(code: &str) -> Option<ConditionId> {
        Self::ALL.into_iter().find(|c| c.code() == code)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Per-color diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStats {
    pub color: Color,
    /// Components of the spanning color class, isolated vertices included.
    pub omega: u64,
    /// `omega` reduced modulo `r` into `1..=r`.
    pub s: u64,
    pub mixed_edges: u64,
    pub pure_edges_per_part: Vec<u64>,
}

/// `x mod r` normalized into `1..=r`.
pub fn residue(x: u64, r: u64) -> u64 {
    if x == 0 {
        r
    } else {
        (x - 1) % r + 1
    }
}

pub fn class_stats_all(g: &ColoredMultigraph, params: &GddParams) -> Result<Vec<ClassStats>, ParamError> {
    let r = params.radius()?;
    Ok((1..=g.colors())
        .map(|color| {
            let class = g.color_class(color);
            let omega = class.components().count() as u64;
            let mut pure = vec![0u64; params.p as usize];
            let mut mixed = 0;
            for e in class.edges() {
                match classify_edge(e.a, e.b) {
                    Ok(EdgeKind::Mixed) => mixed += 1,
                    Ok(EdgeKind::Pure) => {
                        if let Some(slot) = pure.get_mut(e.a.part as usize - 1) {
                            *slot += 1;
                        }
                    }
                    Err(_) => {}
                }
            }
            ClassStats { color, omega, s: residue(omega, r), mixed_edges: mixed, pure_edges_per_part: pure }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    SumCondition,
    LargeR,
    UnitR,
    SmallParams,
    Boundary,
    Undetermined,
}

impl RegimeTag {
    pub fn name(&self) -> &'static str {
        match self {
            RegimeTag::SumCondition => "SumCondition",
            RegimeTag::LargeR => "LargeR",
            RegimeTag::UnitR => "UnitR",
            RegimeTag::SmallParams => "SmallParams",
            RegimeTag::Boundary => "Boundary",
            RegimeTag::Undetermined => "Undetermined",
        }
    }

    /// Regimes in which the sum inequality is implied by the parameters alone.
    pub fn guarantees_sum_condition(&self) -> bool {
        matches!(self, RegimeTag::LargeR | RegimeTag::UnitR | RegimeTag::SmallParams)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regime {
    pub tag: RegimeTag,
    /// The verdict depends on the coloring (the sum inequality must be evaluated).
    pub needs_instance: bool,
    /// Smallest radius from which the large-radius bound holds.
    pub min_large_radius: u64,
}

/// Whether `r ≥ (λ(a−1) + μa(p−1)) / (μa(a−1))`.
pub fn meets_large_radius(params: &GddParams, r: u64) -> bool {
    let GddParams { a, p, lambda, mu, .. } = *params;
    r * mu * a * (a - 1) >= lambda * (a - 1) + mu * a * (p - 1)
}

pub fn min_large_radius(params: &GddParams) -> u64 {
    let GddParams { a, p, lambda, mu, .. } = *params;
    let num = lambda * (a - 1) + mu * a * (p - 1);
    let den = mu * a * (a - 1);
    num.div_ceil(den).max(1)
}

/// `λ ≤ μa` and `p ≤ a`: every radius is covered.
pub fn is_small_params(params: &GddParams) -> bool {
    params.lambda <= params.mu * params.a && params.p <= params.a
}

/// Parameter-only classification. Without a radius the answer describes all
/// radii: `SmallParams` if every `r ≥ 1` is settled, otherwise `LargeR`
/// carrying the threshold from which it applies.
pub fn classify_regime(params: &GddParams) -> Regime {
    let min_large = min_large_radius(params);
    let regime = |tag, needs_instance| Regime { tag, needs_instance, min_large_radius: min_large };
    let Some(r) = params.r else {
        return if is_small_params(params) {
            regime(RegimeTag::SmallParams, false)
        } else {
            regime(RegimeTag::LargeR, false)
        };
    };
    if params.is_boundary().unwrap_or(false) {
        regime(RegimeTag::Boundary, false)
    } else if r == 1 {
        regime(RegimeTag::UnitR, false)
    } else if meets_large_radius(params, r) {
        regime(RegimeTag::LargeR, false)
    } else if is_small_params(params) {
        regime(RegimeTag::SmallParams, false)
    } else {
        regime(RegimeTag::SumCondition, true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embeddable {
    Yes,
    No,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub embeddable: Embeddable,
    pub violated: Vec<ConditionId>,
    pub stats: Vec<ClassStats>,
    pub regime: RegimeTag,
}

/// `Σ s_j ≥ kr − μa²·C(r,2)` with `k` the number of classes in `stats`.
pub fn check_sum_condition(stats: &[ClassStats], params: &GddParams) -> Result<bool, ParamError> {
    let r = params.radius()? as i128;
    let k = stats.len() as i128;
    let lhs: i128 = stats.iter().map(|s| s.s as i128).sum();
    let rhs = k * r - (params.mu * params.a * params.a) as i128 * binom2(r as u64) as i128;
    Ok(lhs >= rhs)
}

fn ensure_conforming(g: &ColoredMultigraph, params: &GddParams) -> Result<(), ConditionError> {
    params.validate()?;
    if conforms_to_gdd(g, params, params.p) {
        Ok(())
    } else {
        Err(ConditionError::NotConforming { a: params.a, p: params.p, lambda: params.lambda, mu: params.mu })
    }
}

/// Conditions (i)–(iv) of the general embedding theorem. With no violation the
/// verdict is `Yes` when the sum inequality holds and `Undetermined` otherwise.
pub fn check_main_conditions(g: &ColoredMultigraph, params: &GddParams) -> Result<Verdict, ConditionError> {
    ensure_conforming(g, params)?;
    let r = params.radius()?;
    let k = u64::from(g.colors());
    let stats = class_stats_all(g, params)?;
    let mut violated = Vec::new();
    if 2 * k != params.doubled_color_count()? {
        violated.push(ConditionId::ColorCount);
    }
    if params.lambda > params.pure_bound()? {
        violated.push(ConditionId::PureBound);
    }
    if (1..=g.colors()).any(|j| !g.color_class(j).is_path_forest()) {
        violated.push(ConditionId::PathForest);
    }
    if stats.iter().any(|s| s.omega > params.a * r) {
        violated.push(ConditionId::ComponentBound);
    }
    let param_tag = classify_regime(params).tag;
    if !violated.is_empty() {
        return Ok(Verdict { embeddable: Embeddable::No, violated, stats, regime: param_tag });
    }
    let sum_ok = check_sum_condition(&stats, params)?;
    debug_assert!(sum_ok || !param_tag.guarantees_sum_condition());
    let (embeddable, regime) = match (sum_ok, param_tag) {
        (true, tag) if tag.guarantees_sum_condition() => (Embeddable::Yes, tag),
        (true, _) => (Embeddable::Yes, RegimeTag::SumCondition),
        (false, _) => (Embeddable::Undetermined, RegimeTag::Undetermined),
    };
    Ok(Verdict { embeddable, violated, stats, regime })
}

/// Conditions of the boundary case `λ = μa(p+r−1)`, which are necessary and
/// sufficient there.
pub fn check_boundary_conditions(g: &ColoredMultigraph, params: &GddParams) -> Result<Verdict, ConditionError> {
    ensure_conforming(g, params)?;
    let r = params.radius()?;
    let bound = params.pure_bound()?;
    if params.lambda != bound {
        return Err(ConditionError::NotBoundary { lambda: params.lambda, bound });
    }
    let k = u64::from(g.colors());
    let stats = class_stats_all(g, params)?;
    let mut violated = Vec::new();
    if 2 * k != params.mu * params.a * params.a * (params.p + r - 1) {
        violated.push(ConditionId::BoundaryColorCount);
    }
    if (1..=g.colors()).any(|j| !g.color_class(j).is_path_forest()) {
        violated.push(ConditionId::BoundaryPathForest);
    }
    if stats
        .iter()
        .any(|s| s.mixed_edges > params.p - 1 || s.pure_edges_per_part.iter().any(|&c| c != params.a - 1))
    {
        violated.push(ConditionId::BoundaryEdgeCounts);
    }
    if stats.iter().any(|s| s.omega > r) {
        violated.push(ConditionId::BoundaryComponentBound);
    }
    let embeddable = if violated.is_empty() { Embeddable::Yes } else { Embeddable::No };
    Ok(Verdict { embeddable, violated, stats, regime: RegimeTag::Boundary })
}

/// Instance-level decision: boundary parameters use the boundary conditions,
/// everything else the general ones.
pub fn decide(g: &ColoredMultigraph, params: &GddParams) -> Result<Verdict, ConditionError> {
    if classify_regime(params).tag == RegimeTag::Boundary {
        check_boundary_conditions(g, params)
    } else {
        check_main_conditions(g, params)
    }
}
