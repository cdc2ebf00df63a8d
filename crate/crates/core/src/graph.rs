//! Edge-colored multigraphs with loops.
//!
//! Edges live in an explicit multiset so that individual edge ends can be
//! moved around during detachment. Loops are ordinary edges whose two
//! endpoints coincide; they contribute two to the degree of their vertex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Color index. Proper colors start at 1; 0 marks an edge that has not been
/// colored yet (only seen inside the construction pipeline).
pub type Color = u32;

/// Color value carried by freshly added, not yet colored edges.
pub const UNCOLORED: Color = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Original,
    Added,
}

/// A vertex label: part index, slot within the part, and whether it belongs
/// to the input graph or was introduced while building an embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub part: u32,
    pub slot: u32,
    pub tier: Tier,
}

impl VertexId {
    pub const fn original(part: u32, slot: u32) -> Self {
        VertexId { part, slot, tier: Tier::Original }
    }

    pub const fn added(part: u32, slot: u32) -> Self {
        VertexId { part, slot, tier: Tier::Added }
    }

    pub fn is_added(&self) -> bool {
        self.tier == Tier::Added
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tier {
            Tier::Original => write!(f, "p{}.v{}", self.part, self.slot),
            Tier::Added => write!(f, "u[{}.{}]", self.part, self.slot),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub a: VertexId,
    pub b: VertexId,
    pub color: Color,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId, color: Color) -> Self {
        Edge { a, b, color }
    }

    pub fn is_loop(&self) -> bool {
        self.a == self.b
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }

    /// The endpoint opposite `v`; for a loop this is `v` itself.
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }

    /// Endpoints in ascending order, used when comparing edges as unordered pairs.
    pub fn key(&self) -> (VertexId, VertexId, Color) {
        if self.a <= self.b {
            (self.a, self.b, self.color)
        } else {
            (self.b, self.a, self.color)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} already present")]
    DuplicateVertex(VertexId),
    #[error("multiplicity is defined for distinct vertices; use loop_count for {0}")]
    SameVertex(VertexId),
    #[error("color {color} outside 1..={max}")]
    ColorOutOfRange { color: Color, max: Color },
}

/// Loop-aware edge-colored multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredMultigraph {
    vertices: BTreeSet<VertexId>,
    edges: Vec<Edge>,
    colors: Color,
}

impl ColoredMultigraph {
    /// Empty graph whose edges may use colors `1..=colors`.
    pub fn new(colors: Color) -> Self {
        ColoredMultigraph { vertices: BTreeSet::new(), edges: Vec::new(), colors }
    }

    pub fn with_vertices(colors: Color, vertices: impl IntoIterator<Item = VertexId>) -> Self {
        ColoredMultigraph { vertices: vertices.into_iter().collect(), edges: Vec::new(), colors }
    }

    pub fn add_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        if !self.vertices.insert(v) {
            return Err(GraphError::DuplicateVertex(v));
        }
        Ok(())
    }

    /// Appends an edge and returns its index. Color 0 (uncolored) is accepted.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, color: Color) -> Result<usize, GraphError> {
        for v in [a, b] {
            if !self.vertices.contains(&v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        if color > self.colors {
            return Err(GraphError::ColorOutOfRange { color, max: self.colors });
        }
        self.edges.push(Edge::new(a, b, color));
        Ok(self.edges.len() - 1)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Highest color an edge may carry.
    pub fn colors(&self) -> Color {
        self.colors
    }

    pub fn set_colors(&mut self, colors: Color) {
        self.colors = colors;
    }

    pub fn recolor(&mut self, edge: usize, color: Color) -> Result<(), GraphError> {
        if color > self.colors {
            return Err(GraphError::ColorOutOfRange { color, max: self.colors });
        }
        self.edges[edge].color = color;
        Ok(())
    }

    pub(crate) fn edges_mut(&mut self) -> &mut Vec<Edge> {
        &mut self.edges
    }

    /// Renames vertex `from` to `to` everywhere, including edge ends.
    pub fn rename_vertex(&mut self, from: VertexId, to: VertexId) -> Result<(), GraphError> {
        if from == to {
            return Ok(());
        }
        if !self.vertices.remove(&from) {
            return Err(GraphError::UnknownVertex(from));
        }
        if !self.vertices.insert(to) {
            self.vertices.insert(from);
            return Err(GraphError::DuplicateVertex(to));
        }
        for e in &mut self.edges {
            if e.a == from {
                e.a = to;
            }
            if e.b == from {
                e.b = to;
            }
        }
        Ok(())
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if self.vertices.contains(&v) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// Degree of `v`, optionally restricted to one color. Loops count twice.
    pub fn degree(&self, v: VertexId, color: Option<Color>) -> Result<u64, GraphError> {
        self.check(v)?;
        Ok(self
            .edges
            .iter()
            .filter(|e| color.is_none_or(|c| e.color == c))
            .map(|e| u64::from(e.a == v) + u64::from(e.b == v))
            .sum())
    }

    /// Number of edges joining two distinct vertices, over all colors.
    pub fn multiplicity(&self, v: VertexId, w: VertexId) -> Result<u64, GraphError> {
        self.check(v)?;
        self.check(w)?;
        if v == w {
            return Err(GraphError::SameVertex(v));
        }
        Ok(self.edges.iter().filter(|e| (e.a == v && e.b == w) || (e.a == w && e.b == v)).count() as u64)
    }

    pub fn loop_count(&self, v: VertexId) -> Result<u64, GraphError> {
        self.check(v)?;
        Ok(self.edges.iter().filter(|e| e.a == v && e.b == v).count() as u64)
    }

    /// Spanning subgraph holding exactly the edges colored `color`.
    pub fn color_class(&self, color: Color) -> ColoredMultigraph {
        ColoredMultigraph {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().filter(|e| e.color == color).copied().collect(),
            colors: self.colors,
        }
    }

    pub fn color_class_size(&self, color: Color) -> usize {
        self.edges.iter().filter(|e| e.color == color).count()
    }

    /// Connected components; isolated vertices form singleton components.
    pub fn components(&self) -> Components {
        let index: BTreeMap<VertexId, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut dsu = DisjointSets::new(index.len());
        for e in &self.edges {
            dsu.union(index[&e.a], index[&e.b]);
        }
        let mut groups: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
        for (&v, &i) in &index {
            groups.entry(dsu.find(i)).or_default().push(v);
        }
        let mut parts: Vec<Vec<VertexId>> = groups.into_values().collect();
        parts.sort();
        Components { parts }
    }

    /// True iff every component is a path, single vertices included.
    pub fn is_path_forest(&self) -> bool {
        if self.edges.iter().any(Edge::is_loop) {
            return false;
        }
        let mut deg: BTreeMap<VertexId, u64> = BTreeMap::new();
        for e in &self.edges {
            *deg.entry(e.a).or_default() += 1;
            *deg.entry(e.b).or_default() += 1;
        }
        if deg.values().any(|&d| d > 2) {
            return false;
        }
        // a forest has exactly |V| - ω edges
        self.edges.len() + self.components().count() == self.vertices.len()
    }

    /// Connectivity of the edges of one color, ignoring vertices the color
    /// does not touch. An empty class counts as connected.
    pub fn is_class_connected(&self, color: Color) -> bool {
        let class: Vec<&Edge> = self.edges.iter().filter(|e| e.color == color).collect();
        let Some(first) = class.first() else {
            return true;
        };
        let touched: BTreeSet<VertexId> = class.iter().flat_map(|e| [e.a, e.b]).collect();
        let index: BTreeMap<VertexId, usize> = touched.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut dsu = DisjointSets::new(index.len());
        for e in &class {
            dsu.union(index[&e.a], index[&e.b]);
        }
        let root = dsu.find(index[&first.a]);
        (0..index.len()).all(|i| dsu.find(i) == root)
    }

    /// Quotient by a vertex map: every vertex `v` becomes `merge(v)` and edges
    /// keep their index and color. Edges inside one merged group become loops.
    pub fn amalgamate(&self, merge: impl Fn(VertexId) -> VertexId) -> ColoredMultigraph {
        ColoredMultigraph {
            vertices: self.vertices.iter().map(|&v| merge(v)).collect(),
            edges: self.edges.iter().map(|e| Edge::new(merge(e.a), merge(e.b), e.color)).collect(),
            colors: self.colors,
        }
    }

    /// Induced subgraph on the vertices accepted by `keep`; edge order is preserved.
    pub fn induced(&self, keep: impl Fn(VertexId) -> bool) -> ColoredMultigraph {
        ColoredMultigraph {
            vertices: self.vertices.iter().copied().filter(|&v| keep(v)).collect(),
            edges: self.edges.iter().filter(|e| keep(e.a) && keep(e.b)).copied().collect(),
            colors: self.colors,
        }
    }

    /// Edge multiset as sorted unordered triples, for order-insensitive comparison.
    pub fn edge_multiset(&self) -> Vec<(VertexId, VertexId, Color)> {
        let mut keys: Vec<_> = self.edges.iter().map(Edge::key).collect();
        keys.sort();
        keys
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub parts: Vec<Vec<VertexId>>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.parts.len()
    }
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}
