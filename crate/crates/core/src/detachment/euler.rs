use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{ColoredMultigraph, Edge, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EulerError {
    #[error("vertex {0} has odd degree")]
    OddDegree(VertexId),
    #[error("edges do not form a connected graph")]
    Disconnected,
}

/// A closed walk: `vertices[i]` and `vertices[i + 1]` are the ends of
/// `edges[i]`, and the last vertex equals the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedWalk {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<usize>,
}

impl ClosedWalk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Euler circuit through every edge of `g`. An edgeless graph yields an empty walk.
pub fn euler_circuit(g: &ColoredMultigraph) -> Result<ClosedWalk, EulerError> {
    let all: Vec<usize> = (0..g.edge_count()).collect();
    circuit_over(g.edges(), &all)
}

/// Euler circuit through the listed edges; indices in the walk refer to `edges`.
pub(crate) fn circuit_over(edges: &[Edge], subset: &[usize]) -> Result<ClosedWalk, EulerError> {
    let mut incident: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for &i in subset {
        let e = edges[i];
        incident.entry(e.a).or_default().push(i);
        incident.entry(e.b).or_default().push(i);
    }
    if let Some((&v, _)) = incident.iter().find(|(_, list)| list.len() % 2 == 1) {
        return Err(EulerError::OddDegree(v));
    }
    let Some(&start) = incident.keys().next() else {
        return Ok(ClosedWalk { vertices: Vec::new(), edges: Vec::new() });
    };

    let mut used = vec![false; edges.len()];
    let mut cursor: BTreeMap<VertexId, usize> = incident.keys().map(|&v| (v, 0)).collect();
    let mut stack: Vec<(VertexId, Option<usize>)> = vec![(start, None)];
    let mut out_vertices = Vec::with_capacity(subset.len() + 1);
    let mut out_edges = Vec::with_capacity(subset.len());
    while let Some(&(v, via)) = stack.last() {
        let list = &incident[&v];
        let pos = cursor.get_mut(&v).expect("cursor for every vertex");
        while *pos < list.len() && used[list[*pos]] {
            *pos += 1;
        }
        if let Some(&e) = list.get(*pos) {
            used[e] = true;
            stack.push((edges[e].other(v), Some(e)));
        } else {
            stack.pop();
            out_vertices.push(v);
            if let Some(e) = via {
                out_edges.push(e);
            }
        }
    }
    if out_edges.len() != subset.len() {
        return Err(EulerError::Disconnected);
    }
    out_vertices.reverse();
    out_edges.reverse();
    Ok(ClosedWalk { vertices: out_vertices, edges: out_edges })
}
