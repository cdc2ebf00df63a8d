//! 2-factorization of even regular multigraphs (Petersen): orient along an
//! Euler circuit, then peel perfect matchings off the out/in bipartite graph.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::euler::{circuit_over, EulerError};
use crate::graph::{ColoredMultigraph, DisjointSets, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error("vertex {0} has odd degree")]
    OddDegree(VertexId),
    #[error("component containing {0} is not regular")]
    Irregular(VertexId),
    #[error(transparent)]
    Euler(#[from] EulerError),
}

/// A 2-regular subgraph given by edge indices into the factorized graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoFactor {
    pub vertices: BTreeSet<VertexId>,
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TwoFactorization {
    pub factors: Vec<TwoFactor>,
}

/// Splits every component of the edge support into 2-factors of that component.
pub fn two_factorize(g: &ColoredMultigraph) -> Result<TwoFactorization, FactorError> {
    let edges = g.edges();
    let mut degree: BTreeMap<VertexId, u64> = BTreeMap::new();
    for e in edges {
        *degree.entry(e.a).or_default() += 1;
        *degree.entry(e.b).or_default() += 1;
    }
    if let Some((&v, _)) = degree.iter().find(|(_, &d)| d % 2 == 1) {
        return Err(FactorError::OddDegree(v));
    }
    let index: BTreeMap<VertexId, usize> = degree.keys().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut dsu = DisjointSets::new(index.len());
    for e in edges {
        dsu.union(index[&e.a], index[&e.b]);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        groups.entry(dsu.find(index[&e.a])).or_default().push(i);
    }

    let mut factors = Vec::new();
    for subset in groups.values() {
        let support: BTreeSet<VertexId> = subset.iter().flat_map(|&i| [edges[i].a, edges[i].b]).collect();
        let first = *support.iter().next().expect("nonempty component");
        let d = degree[&first];
        if let Some(&v) = support.iter().find(|v| degree[v] != d) {
            return Err(FactorError::Irregular(v));
        }
        let walk = circuit_over(edges, subset)?;
        let local: BTreeMap<VertexId, usize> = support.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        // oriented arcs (tail, head, edge)
        let mut arcs: Vec<(usize, usize, usize)> = walk
            .edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (local[&walk.vertices[i]], local[&walk.vertices[i + 1]], e))
            .collect();
        for _ in 0..d / 2 {
            let chosen = perfect_matching(support.len(), &arcs);
            let mut taken = vec![false; arcs.len()];
            let mut factor_edges = Vec::with_capacity(support.len());
            for arc in chosen {
                taken[arc] = true;
                factor_edges.push(arcs[arc].2);
            }
            factor_edges.sort_unstable();
            factors.push(TwoFactor { vertices: support.clone(), edges: factor_edges });
            arcs = arcs.into_iter().zip(taken).filter(|(_, t)| !t).map(|(a, _)| a).collect();
        }
    }
    Ok(TwoFactorization { factors })
}

/// Perfect matching of a regular bipartite multigraph (tails on the left,
/// heads on the right). Returns arc indices.
fn perfect_matching(n: usize, arcs: &[(usize, usize, usize)]) -> Vec<usize> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(tail, _, _)) in arcs.iter().enumerate() {
        out[tail].push(i);
    }
    let mut head_match: Vec<Option<usize>> = vec![None; n];
    for tail in 0..n {
        let mut visited = vec![false; n];
        let found = augment(tail, arcs, &out, &mut head_match, &mut visited);
        assert!(found, "regular bipartite multigraph always has a perfect matching");
    }
    head_match.into_iter().map(|m| m.expect("every head matched")).collect()
}

fn augment(
    tail: usize,
    arcs: &[(usize, usize, usize)],
    out: &[Vec<usize>],
    head_match: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for &arc in &out[tail] {
        let head = arcs[arc].1;
        if visited[head] {
            continue;
        }
        visited[head] = true;
        let free = match head_match[head] {
            None => true,
            Some(prev) => augment(arcs[prev].0, arcs, out, head_match, visited),
        };
        if free {
            head_match[head] = Some(arc);
            return true;
        }
    }
    false
}
