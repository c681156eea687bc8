//! Changes: user-declared regions of the static model, the "before/after"
//! order that flows and triggers impose on them, and the chronologies
//! (linear extensions) compatible with that order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::graph;
use crate::model::{is_segment, StageId, StaticModel};
use crate::validate::validate;

/// Largest DAG for which chronologies are counted exactly.
pub const MAX_COUNTED_NODES: usize = 20;

/// A change: a connected subdiagram of the static model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub stages: BTreeSet<StageId>,
}

impl Region {
    pub fn new<I, S>(id: impl Into<String>, stages: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Region {
            id: id.into(),
            stages: stages
                .into_iter()
                .map(|s| StageId::new_unchecked(s.into()))
                .collect(),
        }
    }
}

/// Regions over one static model, in declaration order. Stages outside
/// every region are context and take no part in the analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangePartition {
    pub regions: Vec<Region>,
}

impl ChangePartition {
    pub fn new(regions: Vec<Region>) -> Self {
        ChangePartition { regions }
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    /// Region owning each stage.
    pub fn owner_map(&self) -> HashMap<&StageId, &str> {
        let mut map = HashMap::new();
        for r in &self.regions {
            for s in &r.stages {
                map.entry(s).or_insert(r.id.as_str());
            }
        }
        map
    }

    /// Stages of the model that belong to no region.
    pub fn unassigned<'m>(&self, model: &'m StaticModel) -> Vec<&'m StageId> {
        let owned = self.owner_map();
        model
            .stages
            .keys()
            .filter(|s| !owned.contains_key(s))
            .collect()
    }
}

/// Checks a partition against its model: ids, non-empty regions, known
/// stages, pairwise disjointness and flow-connectivity of each region.
pub fn check_partition(model: &StaticModel, partition: &ChangePartition) -> Diagnostics {
    let mut out = Diagnostics::new();
    let mut seen_ids = BTreeSet::new();
    let mut claimed: HashMap<&StageId, &str> = HashMap::new();
    for r in &partition.regions {
        let loc = format!("region {}", r.id);
        if !is_segment(&r.id) {
            out.push(Diagnostic::error(
                Code::InvalidIdentifier,
                &loc,
                format!("`{}` is not a valid region identifier", r.id),
            ));
        }
        if !seen_ids.insert(r.id.as_str()) {
            out.push(Diagnostic::error(
                Code::DuplicateId,
                &loc,
                format!("region `{}` declared twice", r.id),
            ));
        }
        if r.stages.is_empty() {
            out.push(Diagnostic::error(
                Code::EmptyRegion,
                &loc,
                "a change has at least one stage",
            ));
            continue;
        }
        for s in &r.stages {
            if !model.stages.contains_key(s) {
                out.push(Diagnostic::error(
                    Code::UnknownReference,
                    &loc,
                    format!("stage `{s}` does not exist"),
                ));
            }
            if let Some(other) = claimed.insert(s, &r.id) {
                if other != r.id {
                    out.push(Diagnostic::error(
                        Code::RegionOverlap,
                        &loc,
                        format!("stage `{s}` already belongs to region `{other}`"),
                    ));
                }
            }
        }
        if !region_connected(model, r) {
            out.push(Diagnostic::error(
                Code::RegionDisconnected,
                &loc,
                "stages are not weakly connected by flows inside the region",
            ));
        }
    }
    out
}

fn region_connected(model: &StaticModel, region: &Region) -> bool {
    let members: Vec<&StageId> = region
        .stages
        .iter()
        .filter(|s| model.stages.contains_key(*s))
        .collect();
    if members.len() <= 1 {
        return true;
    }
    let index: HashMap<&StageId, usize> =
        members.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let edges = model
        .flows
        .iter()
        .filter_map(|f| Some((*index.get(&f.from)?, *index.get(&f.to)?)));
    let adj = graph::adjacency(members.len(), edges);
    let (count, _) = graph::weak_components(&adj, &vec![true; members.len()]);
    count == 1
}

/// What put an ordering edge between two changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cause {
    Flow,
    Trigger,
    /// Declared directly rather than derived from the static model.
    Declared,
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cause::Flow => "flow",
            Cause::Trigger => "trigger",
            Cause::Declared => "declared",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PrecedenceEdge {
    pub before: String,
    pub after: String,
    pub cause: Cause,
}

/// Acyclic "appears before" relation over named nodes (changes or events).
/// Nodes are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecedenceDag {
    nodes: Vec<String>,
    edges: BTreeSet<PrecedenceEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderClass {
    Before,
    After,
    Unordered,
}

impl fmt::Display for OrderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderClass::Before => "before",
            OrderClass::After => "after",
            OrderClass::Unordered => "unordered",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChangeError {
    #[error("static model has errors:\n{}", render(.0))]
    InvalidModel(Diagnostics),
    #[error("change partition has errors:\n{}", render(.0))]
    InvalidPartition(Diagnostics),
    #[error("precedence contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("precedence graph has {components} weakly connected components; pass the multi-component override to analyze it anyway")]
    MultiComponent { components: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("edge references unknown node `{0}`")]
    UnknownEdgeEndpoint(String),
    #[error("{nodes} nodes exceed the exact-count limit of {MAX_COUNTED_NODES}")]
    TooLarge { nodes: usize },
    #[error("chronology limit must be positive")]
    ZeroLimit,
}

fn render(d: &Diagnostics) -> String {
    d.iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl PrecedenceDag {
    /// Builds a DAG from explicit edges, rejecting cycles and unknown endpoints.
    pub fn new(
        nodes: impl IntoIterator<Item = String>,
        edges: impl IntoIterator<Item = PrecedenceEdge>,
    ) -> Result<Self, ChangeError> {
        let mut nodes: Vec<String> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        let dag = PrecedenceDag {
            nodes,
            edges: edges.into_iter().collect(),
        };
        for e in &dag.edges {
            for end in [&e.before, &e.after] {
                if dag.index_of(end).is_none() {
                    return Err(ChangeError::UnknownEdgeEndpoint(end.clone()));
                }
            }
        }
        if let Some(cycle) = graph::find_cycle(&dag.adjacency()) {
            return Err(ChangeError::Cycle(
                cycle.into_iter().map(|i| dag.nodes[i].clone()).collect(),
            ));
        }
        Ok(dag)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<PrecedenceEdge> {
        &self.edges
    }

    /// Distinct ordered pairs, ignoring cause.
    pub fn pairs(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|e| (e.before.clone(), e.after.clone()))
            .collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        graph::adjacency(
            self.nodes.len(),
            self.edges.iter().map(|e| {
                (
                    self.index_of(&e.before).unwrap(),
                    self.index_of(&e.after).unwrap(),
                )
            }),
        )
    }

    /// `m[i][j]` is true iff node `i` appears before node `j`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        graph::transitive_closure(&self.adjacency())
    }

    pub fn component_count(&self) -> usize {
        graph::weak_components(&self.adjacency(), &vec![true; self.nodes.len()]).0
    }
}

/// Orders changes by the flows and triggers that cross region boundaries.
///
/// An edge `Ci -> Cj` exists iff some flow or trigger runs from a stage in
/// `Ci` to a stage in `Cj`, `i != j`. Both edge kinds impose "before"; the
/// cause is kept for reporting. Unless `allow_multi` is set, a result with
/// more than one weakly connected component is rejected.
pub fn derive_precedence(
    model: &StaticModel,
    partition: &ChangePartition,
    allow_multi: bool,
) -> Result<PrecedenceDag, ChangeError> {
    let model_diags = validate(model);
    if model_diags.has_errors() {
        return Err(ChangeError::InvalidModel(model_diags));
    }
    let part_diags = check_partition(model, partition);
    if part_diags.has_errors() {
        return Err(ChangeError::InvalidPartition(part_diags));
    }

    let owner = partition.owner_map();
    let crossing = |from: &StageId, to: &StageId, cause: Cause| {
        let (a, b) = (owner.get(from)?, owner.get(to)?);
        (a != b).then(|| PrecedenceEdge {
            before: a.to_string(),
            after: b.to_string(),
            cause,
        })
    };
    let edges: Vec<PrecedenceEdge> = model
        .flows
        .iter()
        .filter_map(|f| crossing(&f.from, &f.to, Cause::Flow))
        .chain(
            model
                .triggers
                .iter()
                .filter_map(|t| crossing(&t.from, &t.to, Cause::Trigger)),
        )
        .collect();
    let dag = PrecedenceDag::new(partition.regions.iter().map(|r| r.id.clone()), edges)?;

    let components = dag.component_count();
    if components > 1 && !allow_multi {
        return Err(ChangeError::MultiComponent { components });
    }
    Ok(dag)
}

/// Before iff a directed path leads from `a` to `b`, After iff one leads
/// from `b` to `a`, Unordered otherwise (including `a == b`).
pub fn classify_pair(dag: &PrecedenceDag, a: &str, b: &str) -> Result<OrderClass, ChangeError> {
    let ia = dag
        .index_of(a)
        .ok_or_else(|| ChangeError::UnknownNode(a.to_string()))?;
    let ib = dag
        .index_of(b)
        .ok_or_else(|| ChangeError::UnknownNode(b.to_string()))?;
    if ia == ib {
        return Ok(OrderClass::Unordered);
    }
    let adj = dag.adjacency();
    Ok(if graph::reachable_from(&adj, ia)[ib] {
        OrderClass::Before
    } else if graph::reachable_from(&adj, ib)[ia] {
        OrderClass::After
    } else {
        OrderClass::Unordered
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chronologies {
    /// Linear extensions in lexicographic order, at most `limit` of them.
    pub sequences: Vec<Vec<String>>,
    /// Exact number of linear extensions, independent of the limit.
    pub total: u64,
}

impl Chronologies {
    pub fn truncated(&self) -> bool {
        (self.sequences.len() as u64) < self.total
    }
}

/// Every total order of the DAG's nodes that respects all its edges,
/// sorted lexicographically by node id and cut off after `limit`.
pub fn enumerate_chronologies(
    dag: &PrecedenceDag,
    limit: usize,
) -> Result<Chronologies, ChangeError> {
    if limit == 0 {
        return Err(ChangeError::ZeroLimit);
    }
    let n = dag.nodes.len();
    if n > MAX_COUNTED_NODES {
        return Err(ChangeError::TooLarge { nodes: n });
    }
    let adj = dag.adjacency();
    let rank: Vec<usize> = (0..n).collect();
    let sequences = graph::linear_extensions(&adj, &rank, limit)
        .into_iter()
        .map(|seq| seq.into_iter().map(|i| dag.nodes[i].clone()).collect())
        .collect();
    Ok(Chronologies {
        sequences,
        total: graph::count_linear_extensions(&adj),
    })
}

/// Collapses runs of the same change into one occurrence: a change cannot
/// follow itself.
pub fn normalize_consecutive<T: PartialEq + Clone>(seq: &[T]) -> Vec<T> {
    let mut out = seq.to_vec();
    out.dedup();
    out
}
