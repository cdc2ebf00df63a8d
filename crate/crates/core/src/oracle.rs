//! Brute-force Hamiltonian decompositions and instance generators for tiny
//! parameters. Nothing here shares code with the amalgamation pipeline, so it
//! can be used to cross-check it.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conditions::{decide, ConditionError, Verdict};
use crate::family::{build_gdd, GddParams, ParamError};
use crate::graph::{Color, ColoredMultigraph, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_vertices: usize,
    pub max_colors: u32,
    pub timeout: Duration,
    /// Search nodes for one decomposition, or colorings for one enumeration.
    pub max_nodes: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_vertices: 12,
            max_colors: 16,
            timeout: Duration::from_secs(20),
            max_nodes: 50_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vertices} vertices exceed the budget of {max}")]
    TooManyVertices { vertices: usize, max: usize },
    #[error("{colors} colors exceed the budget of {max}")]
    TooManyColors { colors: u64, max: u32 },
    #[error("search budget exhausted")]
    Timeout,
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Conditions(#[from] ConditionError),
}

/// Edge-by-edge color assignment where every class must end up a
/// Hamiltonian cycle. Classes stay path forests until their closing edge.
struct CycleSearch {
    n: usize,
    k: usize,
    ends: Vec<(usize, usize)>,
    /// Preassigned color per edge (0-based), if any.
    fixed: Vec<Option<usize>>,
    nbr: Vec<Vec<[usize; 2]>>,
    deg: Vec<Vec<u8>>,
    size: Vec<usize>,
    /// Colors that may not be used before every lower one of them is.
    interchangeable: Vec<bool>,
    rng: ChaCha8Rng,
    nodes: u64,
    cap: u64,
    deadline: Instant,
    timed_out: bool,
    /// Positions in the free-edge order of the edges at each vertex.
    incident: Vec<Vec<usize>>,
}

const NONE: usize = usize::MAX;

impl CycleSearch {
    fn new(n: usize, k: usize, ends: Vec<(usize, usize)>, fixed: Vec<Option<usize>>, seed: u64) -> Self {
        let mut used = vec![false; k];
        for c in fixed.iter().flatten() {
            used[*c] = true;
        }
        CycleSearch {
            n,
            k,
            ends,
            fixed,
            nbr: vec![vec![[NONE; 2]; n]; k],
            deg: vec![vec![0; n]; k],
            size: vec![0; k],
            interchangeable: used.into_iter().map(|u| !u).collect(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: 0,
            cap: u64::MAX,
            deadline: Instant::now() + Duration::from_secs(3600),
            timed_out: false,
            incident: Vec::new(),
        }
    }

    /// Other end of the path through `v` in class `c`, walking away from `v`.
    fn path_end(&self, c: usize, v: usize) -> (usize, usize) {
        // returns (far end, number of vertices on the path)
        let adj = &self.nbr[c];
        let mut count = 1;
        let mut far = v;
        for &start in adj[v].iter().filter(|&&w| w != NONE) {
            let (mut prev, mut cur) = (v, start);
            count += 1;
            loop {
                let next = adj[cur].iter().copied().find(|&w| w != NONE && w != prev);
                match next {
                    Some(w) if w != v => {
                        prev = cur;
                        cur = w;
                        count += 1;
                    }
                    _ => break,
                }
            }
            far = cur;
        }
        (far, count)
    }

    fn allowed(&self, c: usize, x: usize, y: usize) -> bool {
        if self.deg[c][x] >= 2 || self.deg[c][y] >= 2 {
            return false;
        }
        if self.deg[c][x] == 1 && self.deg[c][y] == 1 {
            // joining two path ends: only the closing edge of a spanning path
            let (far, count) = self.path_end(c, x);
            if far == y {
                return count == self.n && self.size[c] + 1 == self.n;
            }
        }
        true
    }

    fn place(&mut self, c: usize, x: usize, y: usize) {
        for (a, b) in [(x, y), (y, x)] {
            let slot = if self.nbr[c][a][0] == NONE { 0 } else { 1 };
            self.nbr[c][a][slot] = b;
            self.deg[c][a] += 1;
        }
        self.size[c] += 1;
    }

    fn unplace(&mut self, c: usize, x: usize, y: usize) {
        for (a, b) in [(x, y), (y, x)] {
            let slot = if self.nbr[c][a][1] == b { 1 } else { 0 };
            self.nbr[c][a][slot] = NONE;
            self.deg[c][a] -= 1;
        }
        self.size[c] -= 1;
    }

    fn run(&mut self, cap: u64, deadline: Instant) -> Option<Vec<usize>> {
        self.cap = cap;
        self.deadline = deadline;
        self.nodes = 0;
        let mut out = vec![NONE; self.ends.len()];
        // fixed edges first; their validity is checked like any other placement
        for i in 0..self.ends.len() {
            if let Some(c) = self.fixed[i] {
                let (x, y) = self.ends[i];
                if !self.allowed(c, x, y) {
                    return None;
                }
                self.place(c, x, y);
                out[i] = c;
            }
        }
        let free: Vec<usize> = (0..self.ends.len()).filter(|&i| self.fixed[i].is_none()).collect();
        let mut incident = vec![Vec::new(); self.n];
        for (pos, &i) in free.iter().enumerate() {
            let (x, y) = self.ends[i];
            incident[x].push(pos);
            if y != x {
                incident[y].push(pos);
            }
        }
        self.incident = incident;
        self.extend(&free, 0, &mut out).then_some(out)
    }

    /// Every color still missing at `v` has some later free edge at `v` able to take it.
    fn feasible_at(&self, v: usize, free: &[usize], after: usize) -> bool {
        let later = &self.incident[v];
        let start = later.partition_point(|&pos| pos <= after);
        (0..self.k).all(|c| {
            let need = 2 - self.deg[c][v] as usize;
            need == 0
                || later[start..]
                    .iter()
                    .filter(|&&pos| {
                        let (x, y) = self.ends[free[pos]];
                        self.allowed(c, x, y)
                    })
                    .take(need)
                    .count()
                    == need
        })
    }

    fn extend(&mut self, free: &[usize], at: usize, out: &mut [usize]) -> bool {
        let Some(&i) = free.get(at) else {
            return true;
        };
        self.nodes += 1;
        if self.nodes >= self.cap {
            return false;
        }
        if self.nodes.is_multiple_of(4096) && Instant::now() >= self.deadline {
            self.timed_out = true;
            self.cap = 0;
            return false;
        }
        let (x, y) = self.ends[i];
        let mut order: Vec<usize> = Vec::with_capacity(self.k);
        let mut fresh_seen = false;
        for c in 0..self.k {
            if self.interchangeable[c] && self.size[c] == 0 {
                if fresh_seen {
                    continue;
                }
                fresh_seen = true;
            }
            order.push(c);
        }
        order.shuffle(&mut self.rng);
        for c in order {
            if !self.allowed(c, x, y) {
                continue;
            }
            self.place(c, x, y);
            out[i] = c;
            if self.feasible_at(x, free, at) && self.feasible_at(y, free, at) && self.extend(free, at + 1, out) {
                return true;
            }
            self.unplace(c, x, y);
            if self.nodes >= self.cap {
                return false;
            }
        }
        false
    }
}

/// Runs the search with growing node caps until it finishes or the budget
/// runs out. Returns 0-based colors per edge.
fn search(
    n: usize,
    k: usize,
    ends: &[(usize, usize)],
    fixed: &[Option<usize>],
    budget: &EnumerationBudget,
    seed: u64,
) -> Result<Option<Vec<usize>>, OracleError> {
    let deadline = Instant::now() + budget.timeout;
    let mut cap: u64 = 20_000;
    let mut spent: u64 = 0;
    for attempt in 0u64.. {
        let capped = cap.min(budget.max_nodes.saturating_sub(spent));
        let mut s = CycleSearch::new(n, k, ends.to_vec(), fixed.to_vec(), seed.wrapping_add(attempt));
        let found = s.run(capped, deadline);
        spent += s.nodes;
        if found.is_some() {
            return Ok(found);
        }
        if s.nodes < capped && !s.timed_out {
            // the search space was exhausted
            return Ok(None);
        }
        if s.timed_out || spent >= budget.max_nodes || Instant::now() >= deadline {
            return Err(OracleError::Timeout);
        }
        cap = cap.saturating_add(cap / 4);
    }
    unreachable!("attempt counter is unbounded")
}

fn check_size(vertices: usize, colors: u64, budget: &EnumerationBudget) -> Result<(), OracleError> {
    if vertices > budget.max_vertices {
        return Err(OracleError::TooManyVertices { vertices, max: budget.max_vertices });
    }
    if colors > u64::from(budget.max_colors) {
        return Err(OracleError::TooManyColors { colors, max: budget.max_colors });
    }
    Ok(())
}

fn indexed(g: &ColoredMultigraph) -> (BTreeMap<VertexId, usize>, Vec<(usize, usize)>) {
    let index: BTreeMap<VertexId, usize> = g.vertices().enumerate().map(|(i, v)| (v, i)).collect();
    let ends = g.edges().iter().map(|e| (index[&e.a], index[&e.b])).collect();
    (index, ends)
}

fn recolored(base: &ColoredMultigraph, k: usize, colors: &[usize]) -> ColoredMultigraph {
    let mut out = ColoredMultigraph::with_vertices(k as Color, base.vertices());
    for (e, &c) in base.edges().iter().zip(colors) {
        out.add_edge(e.a, e.b, c as Color + 1).expect("vertices and colors in range");
    }
    out
}

/// Some Hamiltonian decomposition of `K(a^(parts); λ, μ)`, colored `1..=k` on
/// the edges of [`build_gdd`] in their order; `None` if there is none.
pub fn brute_force_decompose(
    params: &GddParams,
    parts: u64,
    budget: &EnumerationBudget,
    seed: u64,
) -> Result<Option<ColoredMultigraph>, OracleError> {
    let base = build_gdd(params, parts)?;
    let degree = params.vertex_degree(parts);
    let n = base.vertex_count();
    check_size(n, degree / 2, budget)?;
    if degree % 2 == 1 || (degree > 0 && n < 3) {
        return Ok(None);
    }
    let k = (degree / 2) as usize;
    let (_, ends) = indexed(&base);
    let fixed = vec![None; ends.len()];
    Ok(search(n, k, &ends, &fixed, budget, seed)?.map(|colors| recolored(&base, k, &colors)))
}

/// Restriction of a random Hamiltonian decomposition of `K(a^(p+r); λ, μ)` to
/// the first `p` parts.
pub fn generate_valid_input(
    params: &GddParams,
    budget: &EnumerationBudget,
    seed: u64,
) -> Result<Option<ColoredMultigraph>, OracleError> {
    let r = params.radius()?;
    let Some(full) = brute_force_decompose(params, params.p + r, budget, seed)? else {
        return Ok(None);
    };
    let p = params.p as u32;
    Ok(Some(full.induced(|v| v.part <= p)))
}

/// A Hamiltonian decomposition of `K(a^(p+r); λ, μ)` whose restriction to
/// the first `p` parts is `g`, found by exhaustive search; `None` if none exists.
pub fn find_extension(
    g: &ColoredMultigraph,
    params: &GddParams,
    budget: &EnumerationBudget,
) -> Result<Option<ColoredMultigraph>, OracleError> {
    let r = params.radius()?;
    let base = build_gdd(params, params.p + r)?;
    let k = g.colors() as usize;
    let n = base.vertex_count();
    check_size(n, k as u64, budget)?;
    if 2 * k as u64 != params.vertex_degree(params.p + r) {
        return Ok(None);
    }
    let mut pending: BTreeMap<(VertexId, VertexId), Vec<usize>> = BTreeMap::new();
    for e in g.edges() {
        if e.color == 0 {
            return Ok(None);
        }
        let (x, y, c) = e.key();
        pending.entry((x, y)).or_default().push(c as usize - 1);
    }
    let p = params.p as u32;
    let mut fixed = Vec::with_capacity(base.edge_count());
    for e in base.edges() {
        if e.a.part <= p && e.b.part <= p {
            let (x, y, _) = e.key();
            match pending.get_mut(&(x, y)).and_then(Vec::pop) {
                Some(c) => fixed.push(Some(c)),
                None => return Ok(None),
            }
        } else {
            fixed.push(None);
        }
    }
    if pending.values().any(|left| !left.is_empty()) {
        return Ok(None);
    }
    let (_, ends) = indexed(&base);
    Ok(search(n, k, &ends, &fixed, budget, 0)?.map(|colors| recolored(&base, k, &colors)))
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub colorings: Vec<(ColoredMultigraph, Verdict)>,
    /// The budget ran out before every coloring was produced.
    pub truncated: bool,
}

/// Every coloring of `K(a^(p); λ, μ)` with `colors` colors, each with its
/// verdict. With `quotient`, colorings that differ by a color permutation are
/// listed once (first occurrences in edge order use colors in increasing order).
pub fn enumerate_inputs(
    params: &GddParams,
    colors: u32,
    budget: &EnumerationBudget,
    quotient: bool,
) -> Result<Enumeration, OracleError> {
    let base = build_gdd(params, params.p)?;
    check_size(base.vertex_count(), u64::from(colors), budget)?;
    let deadline = Instant::now() + budget.timeout;
    let m = base.edge_count();
    let mut out = Enumeration { colorings: Vec::new(), truncated: false };
    if colors == 0 && m > 0 {
        return Ok(out);
    }
    let mut digits = vec![1 as Color; m];
    loop {
        if quotient_ok(&digits, quotient) {
            if out.colorings.len() as u64 >= budget.max_nodes || Instant::now() >= deadline {
                out.truncated = true;
                return Ok(out);
            }
            let mut g = ColoredMultigraph::with_vertices(colors, base.vertices());
            for (e, &c) in base.edges().iter().zip(&digits) {
                g.add_edge(e.a, e.b, c).expect("color in range");
            }
            let verdict = decide(&g, params)?;
            out.colorings.push((g, verdict));
        }
        // odometer step, last edge fastest
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if digits[i] < colors {
                digits[i] += 1;
                break;
            }
            digits[i] = 1;
        }
    }
}

fn quotient_ok(digits: &[Color], quotient: bool) -> bool {
    if !quotient {
        return true;
    }
    let mut max = 0;
    for &d in digits {
        if d > max + 1 {
            return false;
        }
        max = max.max(d);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::Embeddable;
    use crate::pipeline::hamiltonian_cycles;

    fn budget() -> EnumerationBudget {
        EnumerationBudget::default()
    }

    #[test]
    fn k222_decomposes() {
        let params = GddParams::new(2, 3, 0, 1, None).unwrap();
        let g = brute_force_decompose(&params, 3, &budget(), 0).unwrap().unwrap();
        assert_eq!(g.colors(), 2);
        assert_eq!(hamiltonian_cycles(&g).unwrap().len(), 2);
        assert_eq!(g.edge_multiset().len(), 12);
    }

    #[test]
    fn doubled_pure_pairs_decompose() {
        let params = GddParams::new(2, 2, 2, 1, None).unwrap();
        let g = brute_force_decompose(&params, 2, &budget(), 3).unwrap().unwrap();
        for order in hamiltonian_cycles(&g).unwrap() {
            assert_eq!(order.len(), 4);
        }
    }

    #[test]
    fn odd_degree_has_none() {
        // K_{3,3} has odd degree 3
        let params = GddParams::new(3, 2, 0, 1, None).unwrap();
        assert_eq!(brute_force_decompose(&params, 2, &budget(), 0).unwrap(), None);
    }

    #[test]
    fn exhausted_search_reports_none() {
        // K(2^(1);2,1) is a double edge on two vertices
        let params = GddParams::new(2, 1, 2, 1, None).unwrap();
        assert_eq!(brute_force_decompose(&params, 1, &budget(), 0).unwrap(), None);
    }

    #[test]
    fn budget_is_enforced() {
        let params = GddParams::new(3, 4, 0, 2, None).unwrap();
        let tight = EnumerationBudget { max_vertices: 8, ..budget() };
        assert!(matches!(
            brute_force_decompose(&params, 4, &tight, 0),
            Err(OracleError::TooManyVertices { vertices: 12, max: 8 })
        ));
        let slow = EnumerationBudget { max_nodes: 10, ..budget() };
        assert_eq!(brute_force_decompose(&params, 4, &slow, 0), Err(OracleError::Timeout));
    }

    #[test]
    fn generated_input_passes_conditions() {
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        for seed in 0..10 {
            let g = generate_valid_input(&params, &budget(), seed).unwrap().unwrap();
            let verdict = decide(&g, &params).unwrap();
            assert!(verdict.violated.is_empty());
            assert!((1..=g.colors()).all(|j| g.color_class(j).is_path_forest()));
        }
    }

    #[test]
    fn k22_enumeration_counts() {
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        let raw = enumerate_inputs(&params, 2, &budget(), false).unwrap();
        assert_eq!(raw.colorings.len(), 16);
        assert!(!raw.truncated);
        let quotient = enumerate_inputs(&params, 2, &budget(), true).unwrap();
        assert_eq!(quotient.colorings.len(), 8);
        // valid exactly when both classes have two edges (ω_j ≤ 2)
        let accepted = raw.colorings.iter().filter(|(_, v)| v.embeddable == Embeddable::Yes).count();
        assert_eq!(accepted, 6);
    }

    #[test]
    fn enumeration_truncates() {
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        let small = EnumerationBudget { max_nodes: 5, ..budget() };
        let out = enumerate_inputs(&params, 2, &small, false).unwrap();
        assert!(out.truncated);
        assert_eq!(out.colorings.len(), 5);
    }

    #[test]
    fn extension_of_cycle_is_impossible() {
        let params = GddParams::embedding(2, 2, 0, 1, 1).unwrap();
        let raw = enumerate_inputs(&params, 2, &budget(), false).unwrap();
        for (g, verdict) in &raw.colorings {
            let ext = find_extension(g, &params, &budget()).unwrap();
            assert_eq!(ext.is_some(), verdict.embeddable == Embeddable::Yes, "{:?}", g.edges());
            if let Some(full) = ext {
                assert_eq!(full.induced(|v| v.part <= 2).edge_multiset(), g.edge_multiset());
            }
        }
    }
}
