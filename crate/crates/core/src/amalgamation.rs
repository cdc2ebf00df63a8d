//! The intermediate graphs of the embedding construction.
//!
//! `G1` adds one hub vertex standing for all `ar` new vertices, with
//! `μa²·C(r,2)` loops and `μar` edges to every original vertex. Its coloring
//! gives each original vertex degree 2 in every color and leaves the hub with
//! per-color degree `b_j·r`. After the hub is detached into `r` vertices the
//! spare color `k+1` is folded back into the proper colors 2-factor by
//! 2-factor, and `G3` adds `λ·C(a,2)` loops per new vertex so that every color
//! has degree exactly `2a` there.

use thiserror::Error;

use crate::conditions::{ClassStats, ConditionId};
use crate::detachment::{two_factorize, FactorError};
use crate::family::{binom2, family_vertices, GddParams, ParamError};
use crate::graph::{Color, ColoredMultigraph, GraphError, VertexId, UNCOLORED};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalgamationError {
    #[error("precondition {0} does not hold")]
    Precondition(ConditionId),
    #[error("invariant broken: {0}")]
    Invariant(String),
    #[error("operation expects stage {expected:?}, found {found:?}")]
    Stage { expected: Stage, found: Stage },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    G1,
    G2,
    G3,
}

/// General construction, or the boundary case `λ = μa(p+r−1)` where each
/// color takes `r − ω_j` hub loops and no spare color is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    General,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct AmalgamationState {
    pub graph: ColoredMultigraph,
    pub stage: Stage,
    pub variant: Variant,
    /// `b_j` for colors `1..=k+1` (index `j − 1`): hub degree in color j over r.
    pub b: Vec<u64>,
    /// `b'_j` for colors `1..=k` after the spare color is reabsorbed.
    pub b_prime: Vec<u64>,
}

impl AmalgamationState {
    /// Replaces the graph by its detachment of the hub into `r` vertices.
    pub fn detached(mut self, graph: ColoredMultigraph) -> Self {
        self.graph = graph;
        self.stage = Stage::G2;
        self
    }

    fn expect(&self, stage: Stage) -> Result<(), AmalgamationError> {
        if self.stage == stage {
            Ok(())
        } else {
            Err(AmalgamationError::Stage { expected: stage, found: self.stage })
        }
    }
}

/// The single vertex standing for all new vertices in `G1`.
pub const fn hub() -> VertexId {
    VertexId::added(0, 0)
}

/// Vertex `u_i` of `G2` (1-based `i`), placed in part `p + i`.
pub fn hub_copy(params: &GddParams, i: u64) -> VertexId {
    VertexId::added((params.p + i) as u32, 0)
}

/// Vertex `u_ij` of the final graph, slot `j` of part `p + i`.
pub fn final_copy(params: &GddParams, i: u64, j: u64) -> VertexId {
    VertexId::added((params.p + i) as u32, j as u32)
}

pub fn hub_copies(params: &GddParams) -> Result<Vec<VertexId>, ParamError> {
    Ok((1..=params.radius()?).map(|i| hub_copy(params, i)).collect())
}

/// Adds the hub with its loops and edges, all uncolored; the input colors are
/// kept and the color range grows by one spare color.
pub fn build_g1(g: &ColoredMultigraph, params: &GddParams) -> Result<AmalgamationState, AmalgamationError> {
    let r = params.radius()?;
    let k = g.colors();
    let mut graph = g.clone();
    graph.set_colors(k + 1);
    graph.add_vertex(hub())?;
    let per_vertex = params.mu * params.a * r;
    for v in family_vertices(params.a, params.p) {
        for _ in 0..per_vertex {
            graph.add_edge(v, hub(), UNCOLORED)?;
        }
    }
    for _ in 0..params.mu * params.a * params.a * binom2(r) {
        graph.add_edge(hub(), hub(), UNCOLORED)?;
    }
    Ok(AmalgamationState { graph, stage: Stage::G1, variant: Variant::General, b: Vec::new(), b_prime: Vec::new() })
}

/// Colors the hub edges and loops of `G1`.
pub fn extend_coloring_a(
    mut state: AmalgamationState,
    params: &GddParams,
    stats: &[ClassStats],
    variant: Variant,
) -> Result<AmalgamationState, AmalgamationError> {
    state.expect(Stage::G1)?;
    let r = params.radius()?;
    let k = state.graph.colors() - 1;
    let spare = k + 1;
    if stats.len() != k as usize {
        return Err(AmalgamationError::Precondition(ConditionId::ColorCount));
    }
    let hub = hub();

    // A2: lift every original vertex to degree 2 in every color
    let originals = family_vertices(params.a, params.p);
    let mut plan: Vec<(usize, Color)> = Vec::new();
    for &v in &originals {
        let mut deficits: Vec<Color> = Vec::new();
        for j in 1..=k {
            let d = state.graph.degree(v, Some(j))?;
            if d > 2 {
                return Err(AmalgamationError::Precondition(ConditionId::PathForest));
            }
            deficits.extend(std::iter::repeat_n(j, (2 - d) as usize));
        }
        let slots: Vec<usize> = state
            .graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.color == UNCOLORED && e.touches(v) && e.touches(hub))
            .map(|(i, _)| i)
            .collect();
        if slots.len() != deficits.len() {
            return Err(AmalgamationError::Precondition(ConditionId::ColorCount));
        }
        plan.extend(slots.into_iter().zip(deficits));
    }
    for (edge, color) in plan {
        state.graph.recolor(edge, color)?;
    }

    // A3: loop colors
    let loops: Vec<usize> = state
        .graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_loop() && e.a == hub)
        .map(|(i, _)| i)
        .collect();
    let mut wanted: Vec<Color> = Vec::new();
    for s in stats {
        let take = match variant {
            Variant::General => r - s.s,
            Variant::Boundary => r
                .checked_sub(s.omega)
                .ok_or(AmalgamationError::Precondition(ConditionId::BoundaryComponentBound))?,
        };
        wanted.extend(std::iter::repeat_n(s.color, take as usize));
    }
    if wanted.len() > loops.len() {
        return Err(AmalgamationError::Precondition(ConditionId::SumInequality));
    }
    if variant == Variant::Boundary && wanted.len() != loops.len() {
        return Err(AmalgamationError::Invariant(format!(
            "boundary loop budget {} differs from {}",
            wanted.len(),
            loops.len()
        )));
    }
    for (i, &edge) in loops.iter().enumerate() {
        state.graph.recolor(edge, wanted.get(i).copied().unwrap_or(spare))?;
    }

    let mut b = Vec::with_capacity(spare as usize);
    for j in 1..=spare {
        let d = state.graph.degree(hub, Some(j))?;
        if d % (2 * r) != 0 {
            return Err(AmalgamationError::Invariant(format!("hub degree {d} in color {j} is not a multiple of 2r")));
        }
        let bj = d / r;
        if j <= k && bj / 2 > params.a {
            return Err(AmalgamationError::Invariant(format!("b_{j} = {bj} exceeds 2a")));
        }
        b.push(bj);
    }
    for j in 1..=spare {
        if !state.graph.is_class_connected(j) {
            return Err(AmalgamationError::Invariant(format!("color {j} disconnected in G1")));
        }
    }
    state.b = b;
    state.variant = variant;
    Ok(state)
}

/// Recolors the spare color 2-factor by 2-factor into proper colors, keeping
/// every per-color degree at the hub copies within `2a`.
pub fn reabsorb_extra_color(
    mut state: AmalgamationState,
    params: &GddParams,
) -> Result<AmalgamationState, AmalgamationError> {
    state.expect(Stage::G2)?;
    let copies = hub_copies(params)?;
    let k = state.graph.colors() - 1;
    let spare = k + 1;

    let mut b_prime = Vec::with_capacity(k as usize);
    for j in 1..=k {
        let d = state.graph.degree(copies[0], Some(j))?;
        for &c in &copies[1..] {
            if state.graph.degree(c, Some(j))? != d {
                return Err(AmalgamationError::Invariant(format!("unequal degrees in color {j} across hub copies")));
            }
        }
        b_prime.push(d);
    }

    let spare_edges: Vec<usize> =
        state.graph.edges().iter().enumerate().filter(|(_, e)| e.color == spare).map(|(i, _)| i).collect();
    let mut class = ColoredMultigraph::with_vertices(spare, copies.iter().copied());
    for &i in &spare_edges {
        let e = state.graph.edges()[i];
        class.add_edge(e.a, e.b, spare).map_err(|_| {
            AmalgamationError::Invariant(format!("spare color edge {i} leaves the hub copies"))
        })?;
    }
    let factorization = two_factorize(&class)?;
    let cap = 2 * params.a;
    for factor in &factorization.factors {
        if factor.vertices.len() != copies.len() {
            return Err(AmalgamationError::Invariant("spare color 2-factor does not span the hub copies".into()));
        }
        let target = (0..k as usize)
            .find(|&j| b_prime[j] + 2 <= cap)
            .ok_or_else(|| AmalgamationError::Invariant("no color has room for a 2-factor".into()))?;
        for &local in &factor.edges {
            state.graph.recolor(spare_edges[local], target as Color + 1)?;
        }
        b_prime[target] += 2;
    }
    state.graph.set_colors(k);
    state.b_prime = b_prime;
    Ok(state)
}

/// Adds `λ·C(a,2)` loops to every hub copy, `a − b'_j/2` of them in color j.
pub fn build_g3(mut state: AmalgamationState, params: &GddParams) -> Result<AmalgamationState, AmalgamationError> {
    state.expect(Stage::G2)?;
    if state.b_prime.len() != state.graph.colors() as usize {
        return Err(AmalgamationError::Invariant("spare color not reabsorbed".into()));
    }
    let budget = params.lambda * binom2(params.a);
    let mut per_color = Vec::with_capacity(state.b_prime.len());
    for (j, &bp) in state.b_prime.iter().enumerate() {
        let half = bp / 2;
        if bp % 2 != 0 || half > params.a {
            return Err(AmalgamationError::Invariant(format!("b'_{} = {bp} is not an even number ≤ 2a", j + 1)));
        }
        per_color.push(params.a - half);
    }
    let total: u64 = per_color.iter().sum();
    if total != budget {
        return Err(AmalgamationError::Invariant(format!("loop budget {total} differs from λ·C(a,2) = {budget}")));
    }
    if state.variant == Variant::Boundary && per_color.iter().any(|&c| c != params.a - 1) {
        return Err(AmalgamationError::Invariant("boundary case needs a−1 loops per color".into()));
    }
    for c in hub_copies(params)? {
        for (j, &count) in per_color.iter().enumerate() {
            for _ in 0..count {
                state.graph.add_edge(c, c, j as Color + 1)?;
            }
        }
        for j in 1..=state.graph.colors() {
            let d = state.graph.degree(c, Some(j))?;
            if d != 2 * params.a {
                return Err(AmalgamationError::Invariant(format!("{c} has degree {d} in color {j}, expected 2a")));
            }
        }
    }
    for j in 1..=state.graph.colors() {
        if !state.graph.is_class_connected(j) {
            return Err(AmalgamationError::Invariant(format!("color {j} disconnected in G3")));
        }
    }
    state.stage = Stage::G3;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::class_stats_all;
    use crate::family::build_gdd;

    fn v(part: u32, slot: u32) -> VertexId {
        VertexId::original(part, slot)
    }

    fn k22_matchings() -> (ColoredMultigraph, GddParams) {
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        let base = build_gdd(&params, 2).unwrap();
        let mut g = ColoredMultigraph::with_vertices(2, base.vertices());
        for (e, c) in base.edges().iter().zip([1, 2, 2, 1]) {
            g.add_edge(e.a, e.b, c).unwrap();
        }
        (g, params)
    }

    #[test]
    fn g1_shape() {
        let (g, params) = k22_matchings();
        let state = build_g1(&g, &params).unwrap();
        assert_eq!(state.graph.loop_count(hub()).unwrap(), 0);
        for x in family_vertices(2, 2) {
            assert_eq!(state.graph.multiplicity(x, hub()).unwrap(), 2);
            assert_eq!(state.graph.degree(x, None).unwrap(), 4);
        }
        let wide = GddParams::embedding(2, 1, 0, 1, 2).unwrap();
        let g = build_gdd(&wide, 1).unwrap();
        let state = build_g1(&g, &wide).unwrap();
        assert_eq!(state.graph.loop_count(hub()).unwrap(), 4);
    }

    #[test]
    fn coloring_of_matchings_instance() {
        let (g, params) = k22_matchings();
        let stats = class_stats_all(&g, &params).unwrap();
        let state = build_g1(&g, &params).unwrap();
        let state = extend_coloring_a(state, &params, &stats, Variant::General).unwrap();
        assert_eq!(state.b, vec![4, 4, 0]);
        for x in family_vertices(2, 2) {
            for j in 1..=2 {
                assert_eq!(state.graph.degree(x, Some(j)).unwrap(), 2);
            }
        }
        assert_eq!(state.graph.color_class_size(3), 0);
    }

    #[test]
    fn isolated_vertex_takes_two_hub_edges() {
        // two paths of length 2: p1.v2 misses color 1 and p1.v1 misses color 2
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        let base = build_gdd(&params, 2).unwrap();
        let mut g = ColoredMultigraph::with_vertices(2, base.vertices());
        for (e, c) in base.edges().iter().zip([1, 1, 2, 2]) {
            g.add_edge(e.a, e.b, c).unwrap();
        }
        let stats = class_stats_all(&g, &params).unwrap();
        let state = build_g1(&g, &params).unwrap();
        let state = extend_coloring_a(state, &params, &stats, Variant::General).unwrap();
        let hub_edges = |x: VertexId, c: Color| {
            state.graph.edges().iter().filter(|e| e.touches(x) && e.touches(hub()) && e.color == c).count()
        };
        assert_eq!(hub_edges(v(1, 2), 1), 2);
        assert_eq!(hub_edges(v(1, 1), 2), 2);
        assert_eq!(state.b, vec![4, 4, 0]);
    }

    #[test]
    fn boundary_coloring_uses_every_loop() {
        // a=2, p=1, r=2, μ=1, λ = μa(p+r−1) = 4, k = μa²(p+r−1)/2 = 4
        let params = GddParams::embedding(2, 1, 4, 1, 2).unwrap();
        let base = build_gdd(&params, 1).unwrap();
        let mut g = ColoredMultigraph::with_vertices(4, base.vertices());
        for (e, c) in base.edges().iter().zip(1..) {
            g.add_edge(e.a, e.b, c).unwrap();
        }
        let stats = class_stats_all(&g, &params).unwrap();
        let state = build_g1(&g, &params).unwrap();
        let state = extend_coloring_a(state, &params, &stats, Variant::Boundary).unwrap();
        assert_eq!(state.b, vec![2, 2, 2, 2, 0]);
        assert_eq!(state.graph.color_class_size(5), 0);
    }

    #[test]
    fn reabsorb_double_edge() {
        // G2 stand-in: r = 2 hub copies joined by a double edge in the spare color 3
        let params = GddParams::embedding(2, 1, 0, 1, 2).unwrap();
        let (u1, u2) = (hub_copy(&params, 1), hub_copy(&params, 2));
        let mut graph = ColoredMultigraph::with_vertices(3, [u1, u2]);
        graph.add_edge(u1, u2, 1).unwrap();
        graph.add_edge(u1, u2, 1).unwrap();
        graph.add_edge(u1, u2, 3).unwrap();
        graph.add_edge(u1, u2, 3).unwrap();
        let state = AmalgamationState {
            graph,
            stage: Stage::G2,
            variant: Variant::General,
            b: vec![1, 0, 1],
            b_prime: Vec::new(),
        };
        let state = reabsorb_extra_color(state, &params).unwrap();
        // color 1 has b' = 2 ≤ 2a − 2, so the 2-factor lands there
        assert_eq!(state.b_prime, vec![4, 0]);
        assert_eq!(state.graph.colors(), 2);
        assert_eq!(state.graph.color_class_size(1), 4);
    }

    #[test]
    fn reabsorb_four_regular_pair() {
        let params = GddParams::embedding(2, 1, 0, 1, 2).unwrap();
        let (u1, u2) = (hub_copy(&params, 1), hub_copy(&params, 2));
        let mut graph = ColoredMultigraph::with_vertices(3, [u1, u2]);
        for _ in 0..4 {
            graph.add_edge(u1, u2, 3).unwrap();
        }
        let state =
            AmalgamationState { graph, stage: Stage::G2, variant: Variant::General, b: vec![], b_prime: vec![] };
        let state = reabsorb_extra_color(state, &params).unwrap();
        assert_eq!(state.b_prime, vec![4, 0]);
    }

    #[test]
    fn empty_spare_is_identity() {
        let params = GddParams::embedding(2, 1, 0, 1, 2).unwrap();
        let (u1, u2) = (hub_copy(&params, 1), hub_copy(&params, 2));
        let mut graph = ColoredMultigraph::with_vertices(2, [u1, u2]);
        graph.add_edge(u1, u2, 1).unwrap();
        graph.add_edge(u1, u2, 1).unwrap();
        let before = graph.clone();
        let state =
            AmalgamationState { graph, stage: Stage::G2, variant: Variant::General, b: vec![], b_prime: vec![] };
        let state = reabsorb_extra_color(state, &params).unwrap();
        assert_eq!(state.graph.edges(), before.edges());
        assert_eq!(state.b_prime, vec![2]);
    }

    #[test]
    fn g3_loop_budget() {
        // a=2, λ=2: each hub copy gets λ·C(2,2) = 2 loops, a − b'_j/2 per color
        let params = GddParams::embedding(2, 1, 2, 1, 1).unwrap();
        let u1 = hub_copy(&params, 1);
        let (x, y) = (v(1, 1), v(1, 2));
        let mut graph = ColoredMultigraph::with_vertices(2, [u1, x, y]);
        for j in 1..=2 {
            graph.add_edge(u1, x, j).unwrap();
            graph.add_edge(u1, y, j).unwrap();
            graph.add_edge(x, y, j).unwrap();
        }
        let state = AmalgamationState {
            graph,
            stage: Stage::G2,
            variant: Variant::Boundary,
            b: vec![2, 2, 0],
            b_prime: vec![2, 2],
        };
        let state = build_g3(state, &params).unwrap();
        assert_eq!(state.graph.loop_count(u1).unwrap(), 2);
        assert_eq!(state.stage, Stage::G3);
    }

    #[test]
    fn g3_rejects_budget_mismatch() {
        let params = GddParams::embedding(2, 1, 0, 1, 1).unwrap();
        let u1 = hub_copy(&params, 1);
        let graph = ColoredMultigraph::with_vertices(1, [u1]);
        let state =
            AmalgamationState { graph, stage: Stage::G2, variant: Variant::General, b: vec![], b_prime: vec![2] };
        assert!(matches!(build_g3(state, &params), Err(AmalgamationError::Invariant(_))));
    }
}
