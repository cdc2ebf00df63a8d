//! End-to-end embedding: decide, amalgamate, detach twice, verify.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::amalgamation::{
    build_g1, build_g3, extend_coloring_a, final_copy, hub, hub_copies, reabsorb_extra_color, AmalgamationError,
    Variant,
};
use crate::conditions::{decide, ConditionError, Embeddable, RegimeTag, Verdict};
use crate::detachment::{
    eta_detach_with_budget, verify_detachment_contract, DetachError, Detachment, DetachmentPlan, DEFAULT_STEP_BUDGET,
};
use crate::family::{conforms_to_gdd, GddParams, ParamError};
use crate::graph::{Color, ColoredMultigraph, GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error(transparent)]
    Conditions(#[from] ConditionError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Amalgamation(#[from] AmalgamationError),
    #[error(transparent)]
    Detach(#[from] DetachError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("constructed graph fails verification: {0:?}")]
    Contract(Vec<EmbeddingViolation>),
}

impl EmbedError {
    /// True when the input itself is at fault rather than the construction.
    pub fn is_input_error(&self) -> bool {
        matches!(self, EmbedError::Conditions(_) | EmbedError::Params(_))
    }
}

/// One line of the construction trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSummary {
    pub stage: &'static str,
    pub vertices: usize,
    pub edges: usize,
    pub note: String,
}

impl StageSummary {
    fn of(stage: &'static str, g: &ColoredMultigraph, note: String) -> Self {
        StageSummary { stage, vertices: g.vertex_count(), edges: g.edge_count(), note }
    }
}

#[derive(Clone, Debug)]
pub struct EmbedReport {
    pub verdict: Verdict,
    /// The decomposed `K(a^(p+r); λ, μ)`, present when the verdict is `Yes`.
    pub result: Option<ColoredMultigraph>,
    pub trace: Vec<StageSummary>,
}

pub fn embed(g: &ColoredMultigraph, params: &GddParams, seed: u64) -> Result<EmbedReport, EmbedError> {
    embed_with_budget(g, params, seed, DEFAULT_STEP_BUDGET)
}

/// Like [`embed`], with an explicit search-node budget per split step.
pub fn embed_with_budget(
    g: &ColoredMultigraph,
    params: &GddParams,
    seed: u64,
    budget: usize,
) -> Result<EmbedReport, EmbedError> {
    let verdict = decide(g, params)?;
    let mut trace = vec![StageSummary::of("input", g, format!("verdict {:?}", verdict.embeddable))];
    if verdict.embeddable != Embeddable::Yes {
        return Ok(EmbedReport { verdict, result: None, trace });
    }
    let variant = if verdict.regime == RegimeTag::Boundary { Variant::Boundary } else { Variant::General };

    let state = build_g1(g, params)?;
    let state = extend_coloring_a(state, params, &verdict.stats, variant)?;
    trace.push(StageSummary::of("g1", &state.graph, format!("b = {:?}", state.b)));

    let plan = DetachmentPlan::new().split(hub(), hub_copies(params)?);
    let first = detach_checked(&state.graph, &plan, seed, budget)?;
    trace.push(StageSummary::of("g2", &first.graph, search_note(&first)));
    let state = state.detached(first.graph);
    let state = reabsorb_extra_color(state, params)?;
    trace.push(StageSummary::of("g2-reabsorbed", &state.graph, format!("b' = {:?}", state.b_prime)));
    let state = build_g3(state, params)?;
    trace.push(StageSummary::of("g3", &state.graph, String::new()));

    let r = params.radius()?;
    let mut plan = DetachmentPlan::new();
    for (i, u) in (1..=r).zip(hub_copies(params)?) {
        plan = plan.split(u, (1..=params.a).map(|j| final_copy(params, i, j)).collect());
    }
    let second = detach_checked(&state.graph, &plan, seed.wrapping_add(1), budget)?;
    let note = search_note(&second);
    let mut result = second.graph;
    let added: Vec<VertexId> = result.vertices().filter(VertexId::is_added).collect();
    for v in added {
        result.rename_vertex(v, VertexId::original(v.part, v.slot))?;
    }
    trace.push(StageSummary::of("result", &result, note));

    let violations = verify_embedding(g, params, &result);
    if !violations.is_empty() {
        return Err(EmbedError::Contract(violations));
    }
    Ok(EmbedReport { verdict, result: Some(result), trace })
}

fn detach_checked(
    h: &ColoredMultigraph,
    plan: &DetachmentPlan,
    seed: u64,
    budget: usize,
) -> Result<Detachment, EmbedError> {
    let out = eta_detach_with_budget(h, plan, seed, budget)?;
    let report = verify_detachment_contract(h, plan, &out.graph);
    if !report.is_clean() {
        let vertex = plan.splits().next().map_or(hub(), |(v, _)| v);
        return Err(DetachError::Internal { vertex, detail: format!("{:?}", report.violations) }.into());
    }
    Ok(out)
}

fn search_note(d: &Detachment) -> String {
    format!("pinned steps {}, search nodes {}", d.pinned_steps, d.search_nodes)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingViolation {
    /// The result is not `K(a^(p+r); λ, μ)`.
    NotComplete,
    ColorCount { expected: Color, found: Color },
    UncoloredEdge(usize),
    NotHamiltonian(Color),
    /// The first `p` parts do not carry the input coloring.
    RestrictionMismatch,
}

/// Checks that `result` is a Hamiltonian decomposition of `K(a^(p+r); λ, μ)`
/// whose restriction to the first `p` parts is `g`.
pub fn verify_embedding(
    g: &ColoredMultigraph,
    params: &GddParams,
    result: &ColoredMultigraph,
) -> Vec<EmbeddingViolation> {
    let mut out = Vec::new();
    let Ok(r) = params.radius() else {
        return vec![EmbeddingViolation::NotComplete];
    };
    if !conforms_to_gdd(result, params, params.p + r) {
        out.push(EmbeddingViolation::NotComplete);
    }
    if result.colors() != g.colors() {
        out.push(EmbeddingViolation::ColorCount { expected: g.colors(), found: result.colors() });
    }
    for (i, e) in result.edges().iter().enumerate() {
        if e.color == 0 || e.color > result.colors() {
            out.push(EmbeddingViolation::UncoloredEdge(i));
        }
    }
    for j in 1..=result.colors() {
        if hamiltonian_order(result, j).is_none() {
            out.push(EmbeddingViolation::NotHamiltonian(j));
        }
    }
    let p = params.p as u32;
    if result.induced(|v| v.part <= p).edge_multiset() != g.edge_multiset() {
        out.push(EmbeddingViolation::RestrictionMismatch);
    }
    out
}

/// Vertex order of color class `color` when it is a Hamiltonian cycle: starts
/// at the smallest vertex and leaves it towards the smaller neighbor.
pub fn hamiltonian_order(g: &ColoredMultigraph, color: Color) -> Option<Vec<VertexId>> {
    let n = g.vertex_count();
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = g.vertices().map(|v| (v, Vec::new())).collect();
    let mut size = 0;
    for e in g.edges().iter().filter(|e| e.color == color) {
        if e.is_loop() {
            return None;
        }
        adj.get_mut(&e.a)?.push(e.b);
        adj.get_mut(&e.b)?.push(e.a);
        size += 1;
    }
    if n < 3 || size != n || adj.values().any(|list| list.len() != 2) {
        return None;
    }
    let start = *adj.keys().next()?;
    let mut order = vec![start];
    let (mut prev, mut cur) = (start, *adj[&start].iter().min()?);
    while cur != start {
        order.push(cur);
        let list = &adj[&cur];
        let next = if list[0] == prev { list[1] } else { list[0] };
        (prev, cur) = (cur, next);
        if order.len() > n {
            return None;
        }
    }
    (order.len() == n).then_some(order)
}

/// Cycle orders for colors `1..=k`; `None` if some class is not a Hamiltonian cycle.
pub fn hamiltonian_cycles(g: &ColoredMultigraph) -> Option<Vec<Vec<VertexId>>> {
    (1..=g.colors()).map(|j| hamiltonian_order(g, j)).collect()
}
