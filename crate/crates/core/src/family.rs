//! The complete equipartite multigraphs `K(a^(p); λ, μ)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColoredMultigraph, GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("part size a must exceed 1 (got {0})")]
    PartSize(u64),
    #[error("part count p must be at least 1")]
    PartCount,
    #[error("mixed multiplicity mu must be at least 1")]
    MixedMultiplicity,
    #[error("embedding radius r must be at least 1")]
    Radius,
    #[error("lambda = mu = {0} is not covered by the embedding theorems")]
    LambdaEqualsMu(u64),
    #[error("an embedding radius r is required here")]
    MissingRadius,
}

impl ParamError {
    pub fn code(&self) -> &'static str {
        match self {
            ParamError::LambdaEqualsMu(_) => "lambda-equals-mu",
            ParamError::MissingRadius => "missing-radius",
            _ => "invalid-params",
        }
    }
}

/// Parameters `(a, p, λ, μ)` and, for embedding instances, the radius `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GddParams {
    pub a: u64,
    pub p: u64,
    pub lambda: u64,
    pub mu: u64,
    pub r: Option<u64>,
}

impl GddParams {
    pub fn new(a: u64, p: u64, lambda: u64, mu: u64, r: Option<u64>) -> Result<Self, ParamError> {
        let params = GddParams { a, p, lambda, mu, r };
        params.validate()?;
        Ok(params)
    }

    /// Shorthand for an embedding instance with radius `r`.
    pub fn embedding(a: u64, p: u64, lambda: u64, mu: u64, r: u64) -> Result<Self, ParamError> {
        Self::new(a, p, lambda, mu, Some(r))
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.a < 2 {
            return Err(ParamError::PartSize(self.a));
        }
        if self.p < 1 {
            return Err(ParamError::PartCount);
        }
        if self.mu < 1 {
            return Err(ParamError::MixedMultiplicity);
        }
        if self.r == Some(0) {
            return Err(ParamError::Radius);
        }
        if self.lambda == self.mu {
            return Err(ParamError::LambdaEqualsMu(self.mu));
        }
        Ok(())
    }

    pub fn radius(&self) -> Result<u64, ParamError> {
        self.r.ok_or(ParamError::MissingRadius)
    }

    /// `λ(a−1) + μa(p+r−1)`, twice the color count of a Hamiltonian
    /// decomposition of the enlarged graph.
    pub fn doubled_color_count(&self) -> Result<u64, ParamError> {
        let r = self.radius()?;
        Ok(self.lambda * (self.a - 1) + self.mu * self.a * (self.p + r - 1))
    }

    /// Color count of a Hamiltonian decomposition of `K(a^(p+r); λ, μ)`, if integral.
    pub fn required_colors(&self) -> Result<Option<u64>, ParamError> {
        let twice = self.doubled_color_count()?;
        Ok((twice % 2 == 0).then_some(twice / 2))
    }

    /// `μa(p+r−1)`, the largest λ for which the enlarged graph can be
    /// Hamiltonian decomposable.
    pub fn pure_bound(&self) -> Result<u64, ParamError> {
        Ok(self.mu * self.a * (self.p + self.radius()? - 1))
    }

    pub fn is_boundary(&self) -> Result<bool, ParamError> {
        Ok(self.lambda == self.pure_bound()?)
    }

    /// Degree of every vertex of `K(a^(parts); λ, μ)`.
    pub fn vertex_degree(&self, parts: u64) -> u64 {
        self.lambda * (self.a - 1) + self.mu * self.a * (parts - 1)
    }

    pub fn edge_total(&self, parts: u64) -> u64 {
        parts * self.lambda * binom2(self.a) + binom2(parts) * self.mu * self.a * self.a
    }
}

pub fn binom2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Pure,
    Mixed,
}

pub fn classify_edge(v: VertexId, w: VertexId) -> Result<EdgeKind, GraphError> {
    if v == w {
        return Err(GraphError::SameVertex(v));
    }
    Ok(if v.part == w.part { EdgeKind::Pure } else { EdgeKind::Mixed })
}

/// Vertices of `K(a^(parts); ·, ·)` in canonical order.
pub fn family_vertices(a: u64, parts: u64) -> Vec<VertexId> {
    (1..=parts as u32)
        .flat_map(|part| (1..=a as u32).map(move |slot| VertexId::original(part, slot)))
        .collect()
}

/// `K(a^(parts); λ, μ)` with every edge in color 1. Edges are listed pair by
/// pair in canonical vertex order, parallel copies adjacent.
pub fn build_gdd(params: &GddParams, parts: u64) -> Result<ColoredMultigraph, ParamError> {
    params.validate()?;
    if parts < 1 {
        return Err(ParamError::PartCount);
    }
    Ok(build_unchecked(params, parts))
}

pub(crate) fn build_unchecked(params: &GddParams, parts: u64) -> ColoredMultigraph {
    let vertices = family_vertices(params.a, parts);
    let mut g = ColoredMultigraph::with_vertices(1, vertices.iter().copied());
    for (i, &v) in vertices.iter().enumerate() {
        for &w in &vertices[i + 1..] {
            let m = if v.part == w.part { params.lambda } else { params.mu };
            for _ in 0..m {
                g.add_edge(v, w, 1).expect("family vertices are present");
            }
        }
    }
    g
}

/// Loopless, on exactly the vertices of `K(a^(parts))`, with λ/μ multiplicities.
pub fn conforms_to_gdd(g: &ColoredMultigraph, params: &GddParams, parts: u64) -> bool {
    let expected = family_vertices(params.a, parts);
    if g.vertex_count() != expected.len() || !expected.iter().all(|&v| g.contains(v)) {
        return false;
    }
    if g.edges().iter().any(|e| e.is_loop()) {
        return false;
    }
    if g.edge_count() as u64 != params.edge_total(parts) {
        return false;
    }
    let mut counts = std::collections::BTreeMap::new();
    for e in g.edges() {
        let (x, y, _) = e.key();
        *counts.entry((x, y)).or_insert(0u64) += 1;
    }
    counts.iter().all(|(&(x, y), &m)| match classify_edge(x, y) {
        Ok(EdgeKind::Pure) => m == params.lambda,
        Ok(EdgeKind::Mixed) => m == params.mu,
        Err(_) => false,
    }) && {
        // every pair with positive expected multiplicity must be present
        let present = counts.len() as u64;
        let pure_pairs = if params.lambda > 0 { parts * binom2(params.a) } else { 0 };
        let mixed_pairs = binom2(parts) * params.a * params.a;
        present == pure_pairs + mixed_pairs
    }
}
