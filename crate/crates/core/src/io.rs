//! JSON instance and result files.
//!
//! An instance lists the parameters, the number of colors `k` and every edge
//! of `K(a^(p); λ, μ)` with its color. Vertices are named `p<i>.v<j>` (part
//! `i`, slot `j`, both from 1). Serialization is canonical: edges are written
//! with `from ≤ to` and sorted by `(from, to, color)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conditions::{classify_regime, ConditionId, Embeddable};
use crate::family::{conforms_to_gdd, family_vertices, GddParams, ParamError};
use crate::graph::{Color, ColoredMultigraph, VertexId};
use crate::pipeline::{hamiltonian_cycles, EmbedReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IoError {
    #[error("malformed file: {0}")]
    Schema(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("color {color} outside 1..={k}")]
    ColorOutOfRange { color: Color, k: Color },
    #[error("edge multiplicities do not match K({a}^({parts}); {lambda}, {mu})")]
    MultiplicityMismatch { a: u64, parts: u64, lambda: u64, mu: u64 },
}

impl IoError {
    /// Stable identifier for scripts.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Schema(_) => "schema",
            IoError::Params(e) => e.code(),
            IoError::UnknownVertex(_) => "unknown-vertex",
            IoError::ColorOutOfRange { .. } => "color-out-of-range",
            IoError::MultiplicityMismatch { .. } => "multiplicity-mismatch",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub color: Color,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub a: u64,
    pub p: u64,
    pub lambda: u64,
    pub mu: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    pub k: Color,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub verdict: Embeddable,
    pub violated: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingFile>,
}

/// The decomposed `K(a^(p+r); λ, μ)` with one vertex order per color.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingFile {
    pub a: u64,
    pub p: u64,
    pub lambda: u64,
    pub mu: u64,
    pub r: u64,
    pub k: Color,
    pub edges: Vec<EdgeRecord>,
    pub cycles: Vec<Vec<String>>,
}

pub fn vertex_name(v: VertexId) -> String {
    format!("p{}.v{}", v.part, v.slot)
}

fn parse_vertex(name: &str, a: u64, parts: u64) -> Result<VertexId, IoError> {
    let unknown = || IoError::UnknownVertex(name.to_string());
    let (part, slot) = name.strip_prefix('p').and_then(|rest| rest.split_once(".v")).ok_or_else(unknown)?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !digits(part) || !digits(slot) {
        return Err(unknown());
    }
    let part: u64 = part.parse().map_err(|_| unknown())?;
    let slot: u64 = slot.parse().map_err(|_| unknown())?;
    if !(1..=parts).contains(&part) || !(1..=a).contains(&slot) {
        return Err(unknown());
    }
    Ok(VertexId::original(part as u32, slot as u32))
}

fn build_graph(a: u64, parts: u64, k: Color, edges: &[EdgeRecord]) -> Result<ColoredMultigraph, IoError> {
    let mut g = ColoredMultigraph::with_vertices(k, family_vertices(a, parts));
    for rec in edges {
        let x = parse_vertex(&rec.from, a, parts)?;
        let y = parse_vertex(&rec.to, a, parts)?;
        if rec.color == 0 || rec.color > k {
            return Err(IoError::ColorOutOfRange { color: rec.color, k });
        }
        g.add_edge(x, y, rec.color).expect("vertex and color checked");
    }
    Ok(g)
}

fn records(g: &ColoredMultigraph) -> Vec<EdgeRecord> {
    g.edge_multiset()
        .into_iter()
        .map(|(x, y, color)| EdgeRecord { from: vertex_name(x), to: vertex_name(y), color })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn parse_instance(text: &str) -> Result<(GddParams, ColoredMultigraph), IoError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| IoError::Schema(e.to_string()))?;
    let params = GddParams::new(file.a, file.p, file.lambda, file.mu, file.r)?;
    let g = build_graph(file.a, file.p, file.k, &file.edges)?;
    if !conforms_to_gdd(&g, &params, params.p) {
        return Err(IoError::MultiplicityMismatch { a: params.a, parts: params.p, lambda: params.lambda, mu: params.mu });
    }
    Ok((params, g))
}

pub fn instance_file(params: &GddParams, g: &ColoredMultigraph) -> InstanceFile {
    InstanceFile {
        a: params.a,
        p: params.p,
        lambda: params.lambda,
        mu: params.mu,
        r: params.r,
        k: g.colors(),
        edges: records(g),
    }
}

pub fn serialize_instance(params: &GddParams, g: &ColoredMultigraph) -> String {
    to_json(&instance_file(params, g))
}

pub fn result_file(params: &GddParams, report: &EmbedReport) -> ResultFile {
    let verdict = &report.verdict;
    let regime = match verdict.embeddable {
        Embeddable::No => None,
        Embeddable::Yes => Some(verdict.regime.name().to_string()),
        // the parameter regime says why the sum inequality had to be checked
        Embeddable::Undetermined => Some(classify_regime(params).tag.name().to_string()),
    };
    let embedding = report.result.as_ref().map(|g| EmbeddingFile {
        a: params.a,
        p: params.p,
        lambda: params.lambda,
        mu: params.mu,
        r: params.r.unwrap_or(0),
        k: g.colors(),
        edges: records(g),
        cycles: hamiltonian_cycles(g)
            .unwrap_or_default()
            .into_iter()
            .map(|order| order.into_iter().map(vertex_name).collect())
            .collect(),
    });
    ResultFile {
        verdict: verdict.embeddable,
        violated: verdict.violated.iter().map(|c| c.code().to_string()).collect(),
        regime,
        embedding,
    }
}

pub fn serialize_result(params: &GddParams, report: &EmbedReport) -> String {
    to_json(&result_file(params, report))
}

#[derive(Clone, Debug)]
pub struct ParsedResult {
    pub verdict: Embeddable,
    pub violated: Vec<ConditionId>,
    pub regime: Option<String>,
    /// Parameters (with `r`) and the decomposed graph, if the file has one.
    pub embedding: Option<(GddParams, ColoredMultigraph)>,
}

pub fn parse_result(text: &str) -> Result<ParsedResult, IoError> {
    let file: ResultFile = serde_json::from_str(text).map_err(|e| IoError::Schema(e.to_string()))?;
    let violated = file
        .violated
        .iter()
        .map(|code| ConditionId::from_code(code).ok_or_else(|| IoError::Schema(format!("unknown condition {code:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let embedding = match file.embedding {
        None => None,
        Some(e) => {
            let params = GddParams::embedding(e.a, e.p, e.lambda, e.mu, e.r)?;
            let g = build_graph(e.a, e.p + e.r, e.k, &e.edges)?;
            Some((params, g))
        }
    };
    Ok(ParsedResult { verdict: file.verdict, violated, regime: file.regime, embedding })
}

/// Per-color edge counts, used by the table summary.
pub fn color_histogram(g: &ColoredMultigraph) -> BTreeMap<Color, usize> {
    (1..=g.colors()).map(|j| (j, g.color_class_size(j))).collect()
}
