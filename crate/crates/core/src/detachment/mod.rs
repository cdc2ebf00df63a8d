//! η-detachments of edge-colored multigraphs.
//!
//! A vertex `v` with `η(v) = n` is split one copy at a time. Each step picks
//! which edge ends at `v` move to the new copy: per color exactly `d_j(v)/n`
//! ends, per neighbor `w` exactly `m(v,w)/n` ends, and `2ℓ(v)/n` loops get one
//! end on the copy (they become copy–residual edges). These quotas form an
//! integral transportation problem solved by max-flow.
//!
//! A color class stays connected after the step iff some component of the
//! class with `v` removed keeps ends on both the copy and the residual, or a
//! loop of that color is converted. When the first flow solution misses this
//! for some color, the search pins a witness pair of ends for that color and
//! re-solves, backtracking over witnesses until every color has one.

mod euler;
mod factor;
mod flow;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::family::binom2;
use crate::graph::{Color, ColoredMultigraph, DisjointSets, GraphError, VertexId};
use flow::FlowNetwork;

pub use euler::{euler_circuit, ClosedWalk, EulerError};
pub use factor::{two_factorize, FactorError, TwoFactor, TwoFactorization};

/// Default cap on search nodes per split step.
pub const DEFAULT_STEP_BUDGET: usize = 200_000;

/// Split function: each listed vertex is replaced by the named copies.
/// Vertices not listed keep `η = 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DetachmentPlan {
    splits: BTreeMap<VertexId, Vec<VertexId>>,
}

impl DetachmentPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn split(mut self, v: VertexId, copies: Vec<VertexId>) -> Self {
        self.splits.insert(v, copies);
        self
    }

    pub fn eta(&self, v: VertexId) -> u64 {
        self.splits.get(&v).map_or(1, |c| c.len() as u64)
    }

    pub fn copies(&self, v: VertexId) -> Vec<VertexId> {
        self.splits.get(&v).cloned().unwrap_or_else(|| vec![v])
    }

    pub fn splits(&self) -> impl Iterator<Item = (VertexId, &[VertexId])> {
        self.splits.iter().map(|(&v, c)| (v, c.as_slice()))
    }

    /// Maps every vertex of the detached graph back to the vertex it came from.
    pub fn origin_map(&self, h: &ColoredMultigraph) -> BTreeMap<VertexId, VertexId> {
        h.vertices().flat_map(|v| self.copies(v).into_iter().map(move |c| (c, v))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanViolation {
    UnknownVertex(VertexId),
    NoCopies(VertexId),
    CopyClash(VertexId),
    /// η(v) = 1 but v carries loops.
    LoopsOnUnsplit(VertexId),
    /// d_j(v)/η(v) is not an even integer.
    DegreeNotEvenMultiple { vertex: VertexId, color: Color },
    /// C(η(v), 2) does not divide ℓ(v).
    LoopsNotDivisible(VertexId),
    /// η(v)η(w) does not divide m(v, w).
    MultiplicityNotDivisible(VertexId, VertexId),
    DisconnectedClass(Color),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DetachError {
    #[error("detachment hypotheses fail: {0:?}")]
    Plan(Vec<PlanViolation>),
    #[error("no valid split of {vertex} found within {nodes} search nodes")]
    Exhausted { vertex: VertexId, nodes: usize },
    #[error("split step for {vertex} produced an invalid graph: {detail}")]
    Internal { vertex: VertexId, detail: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Output of [`eta_detach`] with search statistics.
#[derive(Clone, Debug)]
pub struct Detachment {
    pub graph: ColoredMultigraph,
    /// Split steps whose first flow solution needed witness pinning.
    pub pinned_steps: usize,
    pub search_nodes: usize,
}

const SCRATCH: VertexId = VertexId::added(u32::MAX, u32::MAX);

struct Tallies {
    loops: BTreeMap<VertexId, u64>,
    pairs: BTreeMap<(VertexId, VertexId), u64>,
    color_degree: BTreeMap<(VertexId, Color), u64>,
    colors: BTreeSet<Color>,
}

fn tally(g: &ColoredMultigraph) -> Tallies {
    let mut t = Tallies {
        loops: BTreeMap::new(),
        pairs: BTreeMap::new(),
        color_degree: BTreeMap::new(),
        colors: BTreeSet::new(),
    };
    for e in g.edges() {
        t.colors.insert(e.color);
        *t.color_degree.entry((e.a, e.color)).or_default() += 1;
        *t.color_degree.entry((e.b, e.color)).or_default() += 1;
        if e.is_loop() {
            *t.loops.entry(e.a).or_default() += 1;
        } else {
            let (x, y, _) = e.key();
            *t.pairs.entry((x, y)).or_default() += 1;
        }
    }
    t
}

/// Checks the detachment hypotheses and per-class connectivity.
pub fn validate_plan(h: &ColoredMultigraph, plan: &DetachmentPlan) -> Vec<PlanViolation> {
    let mut out = Vec::new();
    let mut names: BTreeSet<VertexId> = BTreeSet::new();
    for (v, copies) in plan.splits() {
        if !h.contains(v) {
            out.push(PlanViolation::UnknownVertex(v));
        }
        if copies.is_empty() {
            out.push(PlanViolation::NoCopies(v));
        }
        for &c in copies {
            let foreign = c != v && h.contains(c);
            if foreign || c == SCRATCH || !names.insert(c) {
                out.push(PlanViolation::CopyClash(c));
            }
        }
    }
    for v in h.vertices() {
        if !plan.splits.contains_key(&v) && !names.insert(v) {
            out.push(PlanViolation::CopyClash(v));
        }
    }
    if !out.is_empty() {
        return out;
    }

    let t = tally(h);
    for v in h.vertices() {
        let eta = plan.eta(v);
        let loops = t.loops.get(&v).copied().unwrap_or(0);
        if eta == 1 && loops > 0 {
            out.push(PlanViolation::LoopsOnUnsplit(v));
        }
        if eta >= 2 && loops % binom2(eta) != 0 {
            out.push(PlanViolation::LoopsNotDivisible(v));
        }
        for &color in &t.colors {
            let d = t.color_degree.get(&(v, color)).copied().unwrap_or(0);
            if d % (2 * eta) != 0 {
                out.push(PlanViolation::DegreeNotEvenMultiple { vertex: v, color });
            }
        }
    }
    for (&(x, y), &m) in &t.pairs {
        if m % (plan.eta(x) * plan.eta(y)) != 0 {
            out.push(PlanViolation::MultiplicityNotDivisible(x, y));
        }
    }
    for &color in &t.colors {
        if !h.is_class_connected(color) {
            out.push(PlanViolation::DisconnectedClass(color));
        }
    }
    out
}

/// Constructs a loopless η-detachment meeting the multiplicity, degree and
/// connectivity guarantees. Tie-breaking is driven by `seed`.
pub fn eta_detach(h: &ColoredMultigraph, plan: &DetachmentPlan, seed: u64) -> Result<Detachment, DetachError> {
    eta_detach_with_budget(h, plan, seed, DEFAULT_STEP_BUDGET)
}

pub fn eta_detach_with_budget(
    h: &ColoredMultigraph,
    plan: &DetachmentPlan,
    seed: u64,
    step_budget: usize,
) -> Result<Detachment, DetachError> {
    let violations = validate_plan(h, plan);
    if !violations.is_empty() {
        return Err(DetachError::Plan(violations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = h.clone();
    let mut pinned_steps = 0;
    let mut search_nodes = 0;
    for (v, copies) in plan.splits() {
        if copies.len() == 1 {
            g.rename_vertex(v, copies[0])?;
            continue;
        }
        g.rename_vertex(v, SCRATCH)?;
        let n = copies.len();
        for (i, &copy) in copies[..n - 1].iter().enumerate() {
            g.add_vertex(copy)?;
            let stats = split_off(&mut g, SCRATCH, copy, (n - i) as u64, &mut rng, step_budget)
                .map_err(|e| relabel_error(e, v))?;
            search_nodes += stats.nodes;
            pinned_steps += usize::from(stats.pinned);
        }
        g.rename_vertex(SCRATCH, copies[n - 1])?;
    }
    Ok(Detachment { graph: g, pinned_steps, search_nodes })
}

fn relabel_error(e: DetachError, v: VertexId) -> DetachError {
    match e {
        DetachError::Exhausted { nodes, .. } => DetachError::Exhausted { vertex: v, nodes },
        DetachError::Internal { detail, .. } => DetachError::Internal { vertex: v, detail },
        other => other,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Column {
    Neighbor(VertexId),
    Loop,
}

#[derive(Clone, Debug)]
struct End {
    edge: usize,
    color: Color,
    column: usize,
    /// Component of the color class with the split vertex removed.
    piece: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Witness {
    Loop,
    /// End `sel` moves to the copy while `unsel` stays, both in one piece.
    Pair { sel: usize, unsel: usize },
}

struct StepStats {
    nodes: usize,
    pinned: bool,
}

/// Everything about the ends at the split vertex that the search needs.
struct SplitProblem {
    ends: Vec<End>,
    loops: BTreeMap<Color, Vec<usize>>,
    columns: Vec<Column>,
    column_quota: Vec<u64>,
    rows: Vec<Color>,
    row_quota: BTreeMap<Color, u64>,
    cells: BTreeMap<(Color, usize), Vec<usize>>,
}

/// An assignment together with the witnesses pinned while finding it.
type Pinned = (Assignment, BTreeMap<Color, Witness>);

#[derive(Clone, Debug, Default)]
struct Assignment {
    /// Selected count per non-loop cell.
    selected: BTreeMap<(Color, usize), u64>,
    /// Converted loops per color.
    converted: BTreeMap<Color, u64>,
    fixed_sel: BTreeSet<usize>,
    fixed_unsel: BTreeSet<usize>,
}

impl SplitProblem {
    fn build(g: &ColoredMultigraph, v: VertexId, n: u64) -> Result<Self, DetachError> {
        let internal = |detail: String| DetachError::Internal { vertex: v, detail };
        let edges = g.edges();
        let index: BTreeMap<VertexId, usize> = g.vertices().enumerate().map(|(i, x)| (x, i)).collect();

        let mut degree: BTreeMap<Color, u64> = BTreeMap::new();
        let mut loops: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
        let mut raw_ends: Vec<(usize, Color, VertexId)> = Vec::new();
        let mut by_neighbor: BTreeMap<VertexId, u64> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if e.is_loop() && e.a == v {
                loops.entry(e.color).or_default().push(i);
                *degree.entry(e.color).or_default() += 2;
            } else if e.touches(v) {
                let w = e.other(v);
                raw_ends.push((i, e.color, w));
                *by_neighbor.entry(w).or_default() += 1;
                *degree.entry(e.color).or_default() += 1;
            }
        }

        let mut columns: Vec<Column> = by_neighbor.keys().map(|&w| Column::Neighbor(w)).collect();
        let mut column_quota = Vec::with_capacity(columns.len() + 1);
        for (&w, &m) in &by_neighbor {
            if m % n != 0 {
                return Err(internal(format!("multiplicity {m} toward {w} not divisible by {n}")));
            }
            column_quota.push(m / n);
        }
        let loop_total: u64 = loops.values().map(|l| l.len() as u64).sum();
        if !(2 * loop_total).is_multiple_of(n) {
            return Err(internal(format!("{loop_total} loops cannot be shared among {n} copies")));
        }
        columns.push(Column::Loop);
        column_quota.push(2 * loop_total / n);
        let column_of: BTreeMap<Column, usize> = columns.iter().enumerate().map(|(i, &c)| (c, i)).collect();

        let mut row_quota = BTreeMap::new();
        for (&color, &d) in &degree {
            if d % (2 * n) != 0 {
                return Err(internal(format!("color {color} degree {d} is not an even multiple of {n}")));
            }
            row_quota.insert(color, d / n);
        }

        // pieces: components of each color class after deleting v
        let mut pieces: BTreeMap<Color, DisjointSets> = BTreeMap::new();
        for e in edges {
            if degree.contains_key(&e.color) && !e.touches(v) {
                pieces
                    .entry(e.color)
                    .or_insert_with(|| DisjointSets::new(index.len()))
                    .union(index[&e.a], index[&e.b]);
            }
        }
        let mut ends = Vec::with_capacity(raw_ends.len());
        let mut cells: BTreeMap<(Color, usize), Vec<usize>> = BTreeMap::new();
        for (edge, color, w) in raw_ends {
            let piece = match pieces.get_mut(&color) {
                Some(dsu) => dsu.find(index[&w]),
                None => index[&w],
            };
            let column = column_of[&Column::Neighbor(w)];
            cells.entry((color, column)).or_default().push(ends.len());
            ends.push(End { edge, color, column, piece });
        }
        Ok(SplitProblem {
            ends,
            loops,
            columns,
            column_quota,
            rows: row_quota.keys().copied().collect(),
            row_quota,
            cells,
        })
    }

    fn loop_column(&self) -> usize {
        self.columns.len() - 1
    }

    /// Witness candidates for one color, one per (piece, cell, cell) pattern.
    fn candidates(&self, color: Color) -> Vec<Witness> {
        let mut out = Vec::new();
        if self.loops.get(&color).is_some_and(|l| !l.is_empty()) {
            out.push(Witness::Loop);
        }
        let mut by_piece: BTreeMap<usize, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
        for (i, end) in self.ends.iter().enumerate() {
            if end.color == color {
                by_piece.entry(end.piece).or_default().entry(end.column).or_default().push(i);
            }
        }
        for cells in by_piece.values() {
            for (&ca, ea) in cells {
                for (&cb, eb) in cells {
                    if ca == cb {
                        if ea.len() >= 2 {
                            out.push(Witness::Pair { sel: ea[0], unsel: ea[1] });
                        }
                    } else {
                        out.push(Witness::Pair { sel: ea[0], unsel: eb[0] });
                    }
                }
            }
        }
        out
    }

    /// Max-flow solution of the quota problem with pinned witnesses.
    fn solve(&self, pins: &BTreeMap<Color, Witness>) -> Option<Assignment> {
        let mut fixed_sel = BTreeSet::new();
        let mut fixed_unsel = BTreeSet::new();
        let mut forced_loops: BTreeMap<Color, u64> = BTreeMap::new();
        for (&color, &w) in pins {
            match w {
                Witness::Loop => *forced_loops.entry(color).or_default() += 1,
                Witness::Pair { sel, unsel } => {
                    fixed_sel.insert(sel);
                    fixed_unsel.insert(unsel);
                }
            }
        }
        let mut row_cap: BTreeMap<Color, i64> = self.row_quota.iter().map(|(&c, &q)| (c, q as i64)).collect();
        let mut col_cap: Vec<i64> = self.column_quota.iter().map(|&q| q as i64).collect();
        for &e in &fixed_sel {
            *row_cap.get_mut(&self.ends[e].color)? -= 1;
            col_cap[self.ends[e].column] -= 1;
        }
        for (&color, &k) in &forced_loops {
            *row_cap.get_mut(&color)? -= k as i64;
            col_cap[self.loop_column()] -= k as i64;
        }
        if row_cap.values().any(|&c| c < 0) || col_cap.iter().any(|&c| c < 0) {
            return None;
        }

        let rows = self.rows.len();
        let cols = self.columns.len();
        let cell_keys: Vec<(Color, usize)> = self
            .cells
            .keys()
            .copied()
            .chain(self.loops.keys().map(|&c| (c, self.loop_column())))
            .collect();
        let source = 0;
        let sink = 1 + rows + cols;
        let mut net = FlowNetwork::new(sink + 1);
        let row_node: BTreeMap<Color, usize> = self.rows.iter().enumerate().map(|(i, &c)| (c, 1 + i)).collect();
        let mut demand = 0;
        for (&color, &cap) in &row_cap {
            net.add_arc(source, row_node[&color], cap as u64);
            demand += cap as u64;
        }
        for (j, &cap) in col_cap.iter().enumerate() {
            net.add_arc(1 + rows + j, sink, cap as u64);
        }
        let mut arcs = Vec::with_capacity(cell_keys.len());
        for &(color, col) in &cell_keys {
            let cap = if col == self.loop_column() {
                self.loops[&color].len() as u64 - forced_loops.get(&color).copied().unwrap_or(0)
            } else {
                let members = &self.cells[&(color, col)];
                let pinned = members.iter().filter(|e| fixed_sel.contains(e) || fixed_unsel.contains(e)).count();
                (members.len() - pinned) as u64
            };
            arcs.push(net.add_arc(row_node[&color], 1 + rows + col, cap));
        }
        if net.max_flow(source, sink) != demand {
            return None;
        }

        let mut assignment = Assignment { fixed_sel, fixed_unsel, ..Default::default() };
        for (&(color, col), &arc) in cell_keys.iter().zip(&arcs) {
            let flow = net.flow(arc);
            if col == self.loop_column() {
                assignment.converted.insert(color, flow + forced_loops.get(&color).copied().unwrap_or(0));
            } else {
                let pinned = self.cells[&(color, col)].iter().filter(|e| assignment.fixed_sel.contains(e)).count();
                assignment.selected.insert((color, col), flow + pinned as u64);
            }
        }
        Some(assignment)
    }

    fn free_slots(&self, a: &Assignment, cell: (Color, usize)) -> (u64, u64) {
        let members = &self.cells[&cell];
        let sel = a.selected[&cell];
        let fs = members.iter().filter(|e| a.fixed_sel.contains(e)).count() as u64;
        let fu = members.iter().filter(|e| a.fixed_unsel.contains(e)).count() as u64;
        (sel - fs, members.len() as u64 - sel - fu)
    }

    /// Finds ends realizing connectivity for `color` under the given counts.
    fn witness(&self, a: &Assignment, color: Color) -> Option<Witness> {
        if a.converted.get(&color).copied().unwrap_or(0) > 0 {
            return Some(Witness::Loop);
        }
        let members: Vec<usize> = (0..self.ends.len()).filter(|&i| self.ends[i].color == color).collect();
        let selectable = |e: usize| {
            a.fixed_sel.contains(&e)
                || (!a.fixed_unsel.contains(&e) && self.free_slots(a, (color, self.ends[e].column)).0 > 0)
        };
        let unselectable = |e: usize| {
            a.fixed_unsel.contains(&e)
                || (!a.fixed_sel.contains(&e) && self.free_slots(a, (color, self.ends[e].column)).1 > 0)
        };
        for &x in &members {
            if !selectable(x) {
                continue;
            }
            for &y in &members {
                if x != y && self.ends[x].piece == self.ends[y].piece && unselectable(y) {
                    return Some(Witness::Pair { sel: x, unsel: y });
                }
            }
        }
        None
    }

    fn search(
        &self,
        pins: &mut BTreeMap<Color, Witness>,
        rng: &mut ChaCha8Rng,
        nodes: &mut usize,
        budget: usize,
    ) -> Result<Option<Pinned>, usize> {
        *nodes += 1;
        if *nodes > budget {
            return Err(*nodes);
        }
        let Some(assignment) = self.solve(pins) else {
            return Ok(None);
        };
        let mut witnesses = BTreeMap::new();
        let mut failing = None;
        for &color in &self.rows {
            match self.witness(&assignment, color) {
                Some(w) => {
                    witnesses.insert(color, w);
                }
                None => {
                    failing = Some(color);
                    break;
                }
            }
        }
        let Some(color) = failing else {
            return Ok(Some((assignment, witnesses)));
        };
        let mut candidates = self.candidates(color);
        candidates.shuffle(rng);
        for cand in candidates {
            pins.insert(color, cand);
            if let Some(found) = self.search(pins, rng, nodes, budget)? {
                return Ok(Some(found));
            }
            pins.remove(&color);
        }
        Ok(None)
    }
}

/// Moves a share of the ends at `v` onto the fresh vertex `copy`, where `v`
/// currently stands for `n` future copies.
fn split_off(
    g: &mut ColoredMultigraph,
    v: VertexId,
    copy: VertexId,
    n: u64,
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<StepStats, DetachError> {
    let problem = SplitProblem::build(g, v, n)?;
    let mut nodes = 0;
    let mut pins = BTreeMap::new();
    let (assignment, witnesses) = match problem.search(&mut pins, rng, &mut nodes, budget) {
        Ok(Some(found)) => found,
        Ok(None) | Err(_) => return Err(DetachError::Exhausted { vertex: v, nodes }),
    };

    let mut must = assignment.fixed_sel.clone();
    let mut must_not = assignment.fixed_unsel.clone();
    for w in witnesses.values() {
        if let Witness::Pair { sel, unsel } = *w {
            must.insert(sel);
            must_not.insert(unsel);
        }
    }
    let mut moving: Vec<usize> = Vec::new();
    for (&cell, members) in &problem.cells {
        let want = assignment.selected[&cell] as usize;
        let mut chosen: Vec<usize> = members.iter().copied().filter(|e| must.contains(e)).collect();
        let mut optional: Vec<usize> =
            members.iter().copied().filter(|e| !must.contains(e) && !must_not.contains(e)).collect();
        optional.shuffle(rng);
        chosen.extend(optional.into_iter().take(want - chosen.len()));
        debug_assert_eq!(chosen.len(), want);
        moving.extend(chosen.into_iter().map(|e| problem.ends[e].edge));
    }
    let mut converting: Vec<usize> = Vec::new();
    for (&color, list) in &problem.loops {
        let want = assignment.converted.get(&color).copied().unwrap_or(0) as usize;
        let mut list = list.clone();
        list.shuffle(rng);
        converting.extend(list.into_iter().take(want));
    }

    let edges = g.edges_mut();
    for e in moving {
        let edge = &mut edges[e];
        if edge.a == v {
            edge.a = copy;
        } else {
            edge.b = copy;
        }
    }
    for e in converting {
        edges[e].a = copy;
    }

    for &color in &problem.rows {
        let got = g.degree(copy, Some(color))?;
        if got != problem.row_quota[&color] || !g.is_class_connected(color) {
            return Err(DetachError::Internal {
                vertex: v,
                detail: format!("color {color}: copy degree {got}, connected {}", g.is_class_connected(color)),
            });
        }
    }
    Ok(StepStats { nodes, pinned: !pins.is_empty() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractViolation {
    Hypothesis(PlanViolation),
    VertexSet,
    EdgeCount { expected: usize, found: usize },
    /// Edge `index` does not amalgamate onto the edge with the same index.
    EdgeMismatch(usize),
    Loop(usize),
    CopyMultiplicity { x: VertexId, y: VertexId, expected: u64, found: u64 },
    CrossMultiplicity { x: VertexId, y: VertexId, expected: u64, found: u64 },
    ColorDegree { vertex: VertexId, color: Color, expected: u64, found: u64 },
    DisconnectedClass(Color),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractReport {
    pub violations: Vec<ContractViolation>,
}

impl ContractReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks every guarantee of an η-detachment `g` of `h` from scratch.
pub fn verify_detachment_contract(h: &ColoredMultigraph, plan: &DetachmentPlan, g: &ColoredMultigraph) -> ContractReport {
    let mut out: Vec<ContractViolation> =
        validate_plan(h, plan).into_iter().map(ContractViolation::Hypothesis).collect();
    if !out.is_empty() {
        return ContractReport { violations: out };
    }
    let origin = plan.origin_map(h);
    if g.vertex_set() != &origin.keys().copied().collect::<BTreeSet<_>>() {
        out.push(ContractViolation::VertexSet);
        return ContractReport { violations: out };
    }
    if g.edge_count() != h.edge_count() {
        out.push(ContractViolation::EdgeCount { expected: h.edge_count(), found: g.edge_count() });
        return ContractReport { violations: out };
    }
    for (i, (ge, he)) in g.edges().iter().zip(h.edges()).enumerate() {
        let merged = crate::graph::Edge::new(origin[&ge.a], origin[&ge.b], ge.color);
        if merged.key() != he.key() {
            out.push(ContractViolation::EdgeMismatch(i));
        }
        if ge.is_loop() {
            out.push(ContractViolation::Loop(i));
        }
    }

    let ht = tally(h);
    let gt = tally(g);
    let g_pair = |x: VertexId, y: VertexId| {
        let key = if x <= y { (x, y) } else { (y, x) };
        gt.pairs.get(&key).copied().unwrap_or(0)
    };
    let h_vertices: Vec<VertexId> = h.vertices().collect();
    for (i, &v) in h_vertices.iter().enumerate() {
        let copies = plan.copies(v);
        let eta = copies.len() as u64;
        if eta >= 2 {
            let expected = ht.loops.get(&v).copied().unwrap_or(0) / binom2(eta);
            for (ci, &x) in copies.iter().enumerate() {
                for &y in &copies[ci + 1..] {
                    let found = g_pair(x, y);
                    if found != expected {
                        out.push(ContractViolation::CopyMultiplicity { x, y, expected, found });
                    }
                }
            }
        }
        for &w in &h_vertices[i + 1..] {
            let w_copies = plan.copies(w);
            let m = ht.pairs.get(&(v, w)).copied().unwrap_or(0);
            let expected = m / (eta * w_copies.len() as u64);
            for &x in &copies {
                for &y in &w_copies {
                    let found = g_pair(x, y);
                    if found != expected {
                        out.push(ContractViolation::CrossMultiplicity { x, y, expected, found });
                    }
                }
            }
        }
        for &color in &ht.colors {
            let expected = ht.color_degree.get(&(v, color)).copied().unwrap_or(0) / eta;
            for &x in &copies {
                let found = gt.color_degree.get(&(x, color)).copied().unwrap_or(0);
                if found != expected {
                    out.push(ContractViolation::ColorDegree { vertex: x, color, expected, found });
                }
            }
        }
    }
    for &color in &ht.colors {
        if !g.is_class_connected(color) {
            out.push(ContractViolation::DisconnectedClass(color));
        }
    }
    ContractReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(part: u32, slot: u32) -> VertexId {
        VertexId::original(part, slot)
    }

    fn hub() -> VertexId {
        VertexId::added(0, 0)
    }

    #[test]
    fn unit_plan_is_identity() {
        let mut h = ColoredMultigraph::with_vertices(1, [v(1, 1), v(1, 2), v(1, 3)]);
        for (x, y) in [(1, 2), (2, 3), (3, 1)] {
            h.add_edge(v(1, x), v(1, y), 1).unwrap();
        }
        let plan = DetachmentPlan::new();
        assert!(validate_plan(&h, &plan).is_empty());
        let out = eta_detach(&h, &plan, 0).unwrap();
        assert_eq!(out.graph, h);
        assert!(verify_detachment_contract(&h, &plan, &out.graph).is_clean());
    }

    #[test]
    fn plan_hypotheses() {
        let mut h = ColoredMultigraph::with_vertices(1, [hub(), v(1, 1)]);
        h.add_edge(hub(), hub(), 1).unwrap();
        h.add_edge(hub(), hub(), 1).unwrap();
        let two = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        assert!(validate_plan(&h, &two).is_empty());
        let three = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2), v(2, 3)]);
        let found = validate_plan(&h, &three);
        assert!(found.contains(&PlanViolation::LoopsNotDivisible(hub())));
        let none = DetachmentPlan::new();
        assert!(validate_plan(&h, &none).contains(&PlanViolation::LoopsOnUnsplit(hub())));

        let mut m = ColoredMultigraph::with_vertices(1, [hub(), v(1, 1)]);
        for _ in 0..3 {
            m.add_edge(hub(), v(1, 1), 1).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        assert!(validate_plan(&m, &plan).contains(&PlanViolation::MultiplicityNotDivisible(hub(), v(1, 1))));

        let clash = DetachmentPlan::new().split(hub(), vec![v(1, 1), v(2, 2)]);
        assert!(validate_plan(&m, &clash).contains(&PlanViolation::CopyClash(v(1, 1))));
    }

    #[test]
    fn star_amalgam_splits_evenly() {
        // u joined to x and y by two parallel edges each, one color
        let (x, y) = (v(1, 1), v(1, 2));
        let mut h = ColoredMultigraph::with_vertices(1, [hub(), x, y]);
        for w in [x, x, y, y] {
            h.add_edge(hub(), w, 1).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        for seed in 0..8 {
            let out = eta_detach(&h, &plan, seed).unwrap();
            let report = verify_detachment_contract(&h, &plan, &out.graph);
            assert!(report.is_clean(), "{report:?}");
            assert_eq!(out.graph.multiplicity(v(2, 1), x).unwrap(), 1);
            assert_eq!(out.graph.multiplicity(v(2, 2), y).unwrap(), 1);
        }
    }

    /// Brute force over all ways to hand the four ends to the two copies.
    #[test]
    fn star_amalgam_matches_enumeration() {
        let (x, y) = (v(1, 1), v(1, 2));
        let mut h = ColoredMultigraph::with_vertices(1, [hub(), x, y]);
        for w in [x, x, y, y] {
            h.add_edge(hub(), w, 1).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        let mut valid = 0;
        for mask in 0u32..16 {
            let mut g = ColoredMultigraph::with_vertices(1, [v(2, 1), v(2, 2), x, y]);
            for (i, e) in h.edges().iter().enumerate() {
                let side = if mask >> i & 1 == 1 { v(2, 1) } else { v(2, 2) };
                g.add_edge(side, e.b, 1).unwrap();
            }
            if verify_detachment_contract(&h, &plan, &g).is_clean() {
                valid += 1;
            }
        }
        // each copy takes one x-edge and one y-edge: 2 * 2 choices
        assert_eq!(valid, 4);
    }

    #[test]
    fn loops_become_copy_edges() {
        // boundary G3-like: hub with 2 loops (one per color) and one edge per
        // color to each of two outer vertices
        let (x, y) = (v(1, 1), v(1, 2));
        let mut h = ColoredMultigraph::with_vertices(2, [hub(), x, y]);
        h.add_edge(hub(), hub(), 1).unwrap();
        h.add_edge(hub(), hub(), 2).unwrap();
        h.add_edge(hub(), x, 1).unwrap();
        h.add_edge(hub(), y, 1).unwrap();
        h.add_edge(hub(), x, 2).unwrap();
        h.add_edge(hub(), y, 2).unwrap();
        h.add_edge(x, y, 1).unwrap();
        h.add_edge(x, y, 2).unwrap();
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        assert!(validate_plan(&h, &plan).is_empty());
        let out = eta_detach(&h, &plan, 3).unwrap();
        assert!(verify_detachment_contract(&h, &plan, &out.graph).is_clean());
        assert_eq!(out.graph.multiplicity(v(2, 1), v(2, 2)).unwrap(), 2);
        for color in 1..=2 {
            for c in [v(2, 1), v(2, 2), x, y] {
                assert_eq!(out.graph.degree(c, Some(color)).unwrap(), 2);
            }
        }
    }

    #[test]
    fn swapped_ends_are_reported() {
        let (x, y) = (v(1, 1), v(1, 2));
        let mut h = ColoredMultigraph::with_vertices(1, [hub(), x, y]);
        for w in [x, x, y, y] {
            h.add_edge(hub(), w, 1).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        let good = eta_detach(&h, &plan, 0).unwrap().graph;
        // move both x-edges onto the same copy
        let mut bad = ColoredMultigraph::with_vertices(1, good.vertices());
        for e in good.edges() {
            let a = if e.b == x { v(2, 1) } else { e.a };
            bad.add_edge(a, e.b, e.color).unwrap();
        }
        let report = verify_detachment_contract(&h, &plan, &bad);
        assert!(report.violations.contains(&ContractViolation::CrossMultiplicity {
            x: v(2, 1),
            y: x,
            expected: 1,
            found: 2
        }));
    }

    #[test]
    fn connectivity_forces_pinning() {
        // Color 1: two triangles through the hub (hub-a-b-hub, hub-c-d-hub).
        // Color 2: a single cycle hub-a-c-hub-b-d-hub.
        // Splitting the hub in two: each copy takes one end toward each of a..d.
        let (a, b, c, d) = (v(1, 1), v(1, 2), v(1, 3), v(1, 4));
        let mut h = ColoredMultigraph::with_vertices(2, [hub(), a, b, c, d]);
        for (x, y) in [(a, b), (c, d)] {
            h.add_edge(hub(), x, 1).unwrap();
            h.add_edge(x, y, 1).unwrap();
            h.add_edge(y, hub(), 1).unwrap();
        }
        for (x, y) in [(a, c), (b, d)] {
            h.add_edge(hub(), x, 2).unwrap();
            h.add_edge(x, y, 2).unwrap();
            h.add_edge(y, hub(), 2).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2)]);
        assert!(validate_plan(&h, &plan).is_empty());
        let mut pinned = 0;
        for seed in 0..20 {
            let out = eta_detach(&h, &plan, seed).unwrap();
            pinned += out.pinned_steps;
            let report = verify_detachment_contract(&h, &plan, &out.graph);
            assert!(report.is_clean(), "seed {seed}: {report:?}");
        }
        assert!(pinned <= 20);
    }

    #[test]
    fn three_way_split_with_loops() {
        // hub with 3 loops per color (C(3,2) = 3) and 3 edges per color to x
        // plus 3 edges per color to y and one x-y edge per color
        let (x, y) = (v(1, 1), v(1, 2));
        let mut g = ColoredMultigraph::with_vertices(2, [hub(), x, y]);
        for color in 1..=2 {
            for _ in 0..3 {
                g.add_edge(hub(), hub(), color).unwrap();
                g.add_edge(hub(), x, color).unwrap();
                g.add_edge(hub(), y, color).unwrap();
            }
            g.add_edge(x, y, color).unwrap();
        }
        let plan = DetachmentPlan::new().split(hub(), vec![v(2, 1), v(2, 2), v(2, 3)]);
        assert!(validate_plan(&g, &plan).is_empty(), "{:?}", validate_plan(&g, &plan));
        for seed in 0..10 {
            let out = eta_detach(&g, &plan, seed).unwrap();
            assert!(verify_detachment_contract(&g, &plan, &out.graph).is_clean());
        }
    }
}
