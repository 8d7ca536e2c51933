//! Quivers, labels and the doubling construction.
//!
//! Vertex and edge identifiers are strings; every vertex and edge also gets a
//! dense index in declaration order, which fixes the block layout used by the
//! matrix code elsewhere in the crate.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

/// A finite quiver. Loops and parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    DuplicateVertex {
        id: String,
    },
    DuplicateEdge {
        id: String,
    },
    DanglingEdge {
        edge: String,
        missing: String,
    },
    LengthMismatch {
        field: String,
        expected: usize,
        found: usize,
    },
    NonPositiveRank {
        vertex: String,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateVertex { id } => write!(f, "duplicate vertex `{id}`"),
            Self::DuplicateEdge { id } => write!(f, "duplicate edge `{id}`"),
            Self::DanglingEdge { edge, missing } => {
                write!(f, "edge `{edge}` references missing vertex `{missing}`")
            }
            Self::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "`{field}` has length {found}, expected {expected}"),
            Self::NonPositiveRank { vertex } => write!(f, "rank at `{vertex}` must be >= 1"),
        }
    }
}

/// Raw edge description as it appears in spec files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub tail: String,
    pub head: String,
}

impl EdgeSpec {
    pub fn new(id: &str, tail: &str, head: &str) -> Self {
        Self {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
        }
    }
}

/// Per-vertex rank and degree vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub rank: Vec<usize>,
    pub degree: Vec<i64>,
}

impl Label {
    pub fn new(rank: Vec<usize>, degree: Vec<i64>) -> Self {
        Self { rank, degree }
    }

    /// Label with the given ranks and all degrees zero.
    pub fn ranks(rank: &[usize]) -> Self {
        Self {
            rank: rank.to_vec(),
            degree: vec![0; rank.len()],
        }
    }

    pub fn total_rank(&self) -> usize {
        self.rank.iter().sum()
    }
}

/// Collects every problem with a raw quiver description and optional label.
/// The report is empty iff the input is valid.
pub fn validate(
    vertices: &[String],
    edges: &[EdgeSpec],
    label: Option<&Label>,
) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut seen = HashSet::new();
    for v in vertices {
        if !seen.insert(v.as_str()) {
            issues.push(ValidationIssue::DuplicateVertex { id: v.clone() });
        }
    }
    let mut seen_edges = HashSet::new();
    for e in edges {
        if !seen_edges.insert(e.id.as_str()) {
            issues.push(ValidationIssue::DuplicateEdge { id: e.id.clone() });
        }
        for end in [&e.tail, &e.head] {
            if !seen.contains(end.as_str()) {
                issues.push(ValidationIssue::DanglingEdge {
                    edge: e.id.clone(),
                    missing: end.clone(),
                });
                // a loop onto a missing vertex is one dangling reference
                if e.tail == e.head {
                    break;
                }
            }
        }
    }
    if let Some(l) = label {
        issues.extend(label_issues(vertices, l));
    }
    issues
}

fn label_issues(vertices: &[String], l: &Label) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    if l.rank.len() != vertices.len() {
        issues.push(ValidationIssue::LengthMismatch {
            field: "rank".into(),
            expected: vertices.len(),
            found: l.rank.len(),
        });
    }
    if l.degree.len() != vertices.len() {
        issues.push(ValidationIssue::LengthMismatch {
            field: "degree".into(),
            expected: vertices.len(),
            found: l.degree.len(),
        });
    }
    for (v, &r) in vertices.iter().zip(&l.rank) {
        if r == 0 {
            issues.push(ValidationIssue::NonPositiveRank { vertex: v.clone() });
        }
    }
    issues
}

impl Quiver {
    pub fn new(vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let issues = validate(&vertices, &edges, None);
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let edges = edges
            .iter()
            .map(|e| Edge {
                id: e.id.clone(),
                tail: index[e.tail.as_str()],
                head: index[e.head.as_str()],
            })
            .collect();
        Ok(Self { vertices, edges })
    }

    /// Convenience constructor from string slices.
    pub fn from_parts(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Result<Self> {
        Self::new(
            vertices.iter().map(|v| v.to_string()).collect(),
            edges
                .iter()
                .map(|(id, t, h)| EdgeSpec::new(id, t, h))
                .collect(),
        )
    }

    /// One vertex, no edges.
    pub fn point() -> Self {
        Self::from_parts(&["v"], &[]).unwrap()
    }

    /// One vertex with one loop.
    pub fn jordan() -> Self {
        Self::from_parts(&["v"], &[("a", "v", "v")]).unwrap()
    }

    /// Two vertices joined by `a: 1 -> 2`.
    pub fn a2() -> Self {
        Self::from_parts(&["1", "2"], &[("a", "1", "2")]).unwrap()
    }

    /// A center vertex `c` with `arms` edges pointing into it.
    pub fn star(arms: usize) -> Self {
        let mut vertices = vec!["c".to_string()];
        let mut edges = Vec::new();
        for k in 0..arms {
            let v = format!("l{k}");
            edges.push(EdgeSpec::new(&format!("a{k}"), &v, "c"));
            vertices.push(v);
        }
        Self::new(vertices, edges).unwrap()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                tail: self.vertices[e.tail].clone(),
                head: self.vertices[e.head].clone(),
            })
            .collect()
    }

    /// Checks a label against this quiver.
    pub fn check_label(&self, l: &Label) -> Result<()> {
        let issues = label_issues(&self.vertices, l);
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}

/// Edge of the double quiver: either a base edge or the reverse of one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleEdge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub base: usize,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleQuiver {
    base: Quiver,
    edges: Vec<DoubleEdge>,
}

impl DoubleQuiver {
    pub fn base(&self) -> &Quiver {
        &self.base
    }

    /// Base edges first, then their reverses in the same order.
    pub fn edges(&self) -> &[DoubleEdge] {
        &self.edges
    }

    /// Index of the paired edge: `a <-> -a`.
    pub fn reverse(&self, edge: usize) -> usize {
        let m = self.base.num_edges();
        if edge < m {
            edge + m
        } else {
            edge - m
        }
    }

    /// Forgets the pairing, giving an ordinary quiver on the same vertices.
    pub fn as_quiver(&self) -> Quiver {
        Quiver {
            vertices: self.base.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    id: e.id.clone(),
                    tail: e.tail,
                    head: e.head,
                })
                .collect(),
        }
    }
}

pub fn double(q: &Quiver) -> DoubleQuiver {
    let forward = q.edges.iter().enumerate().map(|(i, e)| DoubleEdge {
        id: e.id.clone(),
        tail: e.tail,
        head: e.head,
        base: i,
        reversed: false,
    });
    let backward = q.edges.iter().enumerate().map(|(i, e)| DoubleEdge {
        id: format!("-{}", e.id),
        tail: e.head,
        head: e.tail,
        base: i,
        reversed: true,
    });
    DoubleQuiver {
        base: q.clone(),
        edges: forward.chain(backward).collect(),
    }
}

/// Real dimension of the space of `(x, y)` pairs over a point.
pub fn rep_space_dimension(q: &Quiver, l: &Label) -> Result<usize> {
    q.check_label(l)?;
    Ok(q.edges
        .iter()
        .map(|e| 2 * 2 * l.rank[e.head] * l.rank[e.tail])
        .sum())
}
