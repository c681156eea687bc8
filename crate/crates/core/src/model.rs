//! The static model: thimacs, their stages, and the flow and trigger edges
//! between stages.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Code, Diagnostic, Diagnostics, SourceSpan};
use crate::validate::validate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "invalid identifier `{0}`: expected dot-separated segments matching [A-Za-z_][A-Za-z0-9_]*"
)]
pub struct InvalidId(pub String);

pub(crate) fn is_segment(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub(crate) fn is_path(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(is_segment)
}

/// Hierarchical thimac identifier such as `Living.Heart`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThimacId(String);

impl ThimacId {
    pub fn new(s: impl Into<String>) -> Result<Self, InvalidId> {
        let s = s.into();
        if is_path(&s) {
            Ok(ThimacId(s))
        } else {
            Err(InvalidId(s))
        }
    }

    /// Skips validation; [`validate`] reports malformed ids later.
    pub fn new_unchecked(s: impl Into<String>) -> Self {
        ThimacId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The enclosing path, if this id has more than one segment.
    pub fn path_parent(&self) -> Option<ThimacId> {
        self.0
            .rsplit_once('.')
            .map(|(p, _)| ThimacId(p.to_string()))
    }

    pub fn last_segment(&self) -> &str {
        self.0.rsplit('.').next().unwrap_or(&self.0)
    }

    pub fn child(&self, segment: &str) -> ThimacId {
        ThimacId(format!("{}.{segment}", self.0))
    }
}

impl fmt::Display for ThimacId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Stage identifier: the owning thimac path followed by the stage kind,
/// e.g. `Living.Heart.release`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StageId(String);

impl StageId {
    pub fn of(owner: &ThimacId, kind: StageKind) -> Self {
        StageId(format!("{owner}.{kind}"))
    }

    pub fn new_unchecked(s: impl Into<String>) -> Self {
        StageId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Splits `Owner.Path.kind` into its parts.
    pub fn split(&self) -> Option<(ThimacId, StageKind)> {
        let (owner, kind) = self.0.rsplit_once('.')?;
        let kind = kind.parse().ok()?;
        is_path(owner).then(|| (ThimacId(owner.to_string()), kind))
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The five generic actions. Arrival and acceptance are merged into `Receive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    Create,
    Receive,
    Process,
    Release,
    Transfer,
}

impl StageKind {
    pub const ALL: [StageKind; 5] = [
        StageKind::Create,
        StageKind::Receive,
        StageKind::Process,
        StageKind::Release,
        StageKind::Transfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageKind::Create => "create",
            StageKind::Receive => "receive",
            StageKind::Process => "process",
            StageKind::Release => "release",
            StageKind::Transfer => "transfer",
        }
    }
}

impl fmt::Display for StageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageKind {
    type Err = InvalidId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| InvalidId(s.to_string()))
    }
}

/// Whether a flow from a `from` stage to a `to` stage is meaningful.
///
/// Inside one thimac a thing moves from creation or receipt into processing
/// or release, processing may create a result, and release hands over to
/// transfer. Between thimacs only a transfer can pass a thing on, either to
/// the other machine's transfer or straight to its receive stage.
pub fn stage_adjacency_legal(from: StageKind, to: StageKind, same_thimac: bool) -> bool {
    use StageKind::*;
    if same_thimac {
        matches!(
            (from, to),
            (Create, Process)
                | (Create, Release)
                | (Receive, Process)
                | (Receive, Release)
                | (Process, Create)
                | (Process, Release)
                | (Release, Transfer)
        )
    } else {
        matches!((from, to), (Transfer, Transfer) | (Transfer, Receive))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thimac {
    pub id: ThimacId,
    pub name: String,
    pub parent: Option<ThimacId>,
    pub children: Vec<ThimacId>,
    pub stages: Vec<StageId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub id: StageId,
    pub kind: StageKind,
    pub owner: ThimacId,
    pub label: Option<String>,
    /// Reference number tying the stage to a numbered element of a source diagram.
    pub anchor: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlowEdge {
    pub from: StageId,
    pub to: StageId,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriggerEdge {
    pub from: StageId,
    pub to: StageId,
    /// Triggers sharing a join group must all fire before their target proceeds.
    pub join: Option<String>,
}

/// The atemporal structural model.
///
/// Values produced by [`build_model`] are canonical: thimacs in pre-order
/// (siblings in declaration order), stages grouped by owner in kind order,
/// and edges sorted. Fields are public so that analyses and tests can work
/// on arbitrary models; [`validate`] checks every invariant.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StaticModel {
    pub name: String,
    pub thimacs: IndexMap<ThimacId, Thimac>,
    pub stages: IndexMap<StageId, Stage>,
    pub flows: Vec<FlowEdge>,
    pub triggers: Vec<TriggerEdge>,
}

impl StaticModel {
    pub fn empty(name: impl Into<String>) -> Self {
        StaticModel {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn stage(&self, id: &StageId) -> Option<&Stage> {
        self.stages.get(id)
    }

    pub fn roots(&self) -> impl Iterator<Item = &Thimac> {
        self.thimacs.values().filter(|t| t.parent.is_none())
    }

    /// Stage-index adjacency over flow edges whose endpoints both exist.
    pub(crate) fn flow_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.stages.len()];
        for f in &self.flows {
            if let (Some(a), Some(b)) = (
                self.stages.get_index_of(&f.from),
                self.stages.get_index_of(&f.to),
            ) {
                adj[a].push(b);
            }
        }
        adj
    }

    /// True if a directed path of one or more flow edges leads from `from` to `to`.
    pub fn flow_path_exists(&self, from: &StageId, to: &StageId) -> bool {
        let (Some(a), Some(b)) = (self.stages.get_index_of(from), self.stages.get_index_of(to))
        else {
            return false;
        };
        crate::graph::reachable_from(&self.flow_adjacency(), a)[b]
    }
}

/// One declaration fed to [`build_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Decl {
    Thimac {
        id: String,
        parent: Option<String>,
        span: Option<SourceSpan>,
    },
    Stage {
        owner: String,
        kind: StageKind,
        label: Option<String>,
        anchor: Option<u32>,
        span: Option<SourceSpan>,
    },
    Flow {
        from: String,
        to: String,
        span: Option<SourceSpan>,
    },
    Trigger {
        from: String,
        to: String,
        join: Option<String>,
        span: Option<SourceSpan>,
    },
}

impl Decl {
    pub fn thimac(id: &str, parent: Option<&str>) -> Self {
        Decl::Thimac {
            id: id.to_string(),
            parent: parent.map(str::to_string),
            span: None,
        }
    }

    pub fn stage(owner: &str, kind: StageKind) -> Self {
        Decl::Stage {
            owner: owner.to_string(),
            kind,
            label: None,
            anchor: None,
            span: None,
        }
    }

    pub fn flow(from: &str, to: &str) -> Self {
        Decl::Flow {
            from: from.to_string(),
            to: to.to_string(),
            span: None,
        }
    }

    pub fn trigger(from: &str, to: &str, join: Option<&str>) -> Self {
        Decl::Trigger {
            from: from.to_string(),
            to: to.to_string(),
            join: join.map(str::to_string),
            span: None,
        }
    }
}

/// Links declarations into a [`StaticModel`], accumulating every problem
/// found instead of stopping at the first one. Warnings (such as
/// `MULTI_COMPONENT`) do not make the build fail.
pub fn build_model(name: &str, decls: &[Decl]) -> Result<StaticModel, Diagnostics> {
    let mut diags = Diagnostics::new();

    let mut thimacs: IndexMap<ThimacId, (Option<ThimacId>, Option<SourceSpan>)> = IndexMap::new();
    for d in decls {
        let Decl::Thimac { id, parent, span } = d else {
            continue;
        };
        let Ok(tid) = ThimacId::new(id.clone()) else {
            diags.push(
                Diagnostic::error(
                    Code::InvalidIdentifier,
                    id,
                    InvalidId(id.clone()).to_string(),
                )
                .with_span(span.clone()),
            );
            continue;
        };
        if thimacs.contains_key(&tid) {
            diags.push(
                Diagnostic::error(
                    Code::DuplicateId,
                    id,
                    format!("thimac `{id}` declared twice"),
                )
                .with_span(span.clone()),
            );
            continue;
        }
        let parent = parent.as_ref().map(|p| ThimacId::new_unchecked(p.clone()));
        thimacs.insert(tid, (parent, span.clone()));
    }

    // Parents must be declared and must be the path prefix of the child.
    let mut links: IndexMap<ThimacId, Option<ThimacId>> = IndexMap::new();
    for (tid, (parent, span)) in &thimacs {
        let parent = match parent {
            None if tid.path_parent().is_some() => {
                diags.push(
                    Diagnostic::error(
                        Code::ForestViolation,
                        tid.as_str(),
                        format!("nested thimac `{tid}` has no parent"),
                    )
                    .with_span(span.clone()),
                );
                None
            }
            None => None,
            Some(p) if !thimacs.contains_key(p) => {
                diags.push(
                    Diagnostic::error(
                        Code::UnknownReference,
                        tid.as_str(),
                        format!("parent thimac `{p}` is not declared"),
                    )
                    .with_span(span.clone()),
                );
                None
            }
            Some(p) if tid.path_parent().as_ref() != Some(p) => {
                diags.push(
                    Diagnostic::error(
                        Code::ForestViolation,
                        tid.as_str(),
                        format!("thimac `{tid}` does not extend the path of its parent `{p}`"),
                    )
                    .with_span(span.clone()),
                );
                None
            }
            Some(p) => Some(p.clone()),
        };
        links.insert(tid.clone(), parent);
    }

    // Pre-order, siblings in declaration order.
    let mut children: HashMap<Option<ThimacId>, Vec<ThimacId>> = HashMap::new();
    for (tid, parent) in &links {
        children
            .entry(parent.clone())
            .or_default()
            .push(tid.clone());
    }
    let mut order = Vec::with_capacity(links.len());
    let mut stack: Vec<ThimacId> = children.get(&None).cloned().unwrap_or_default();
    stack.reverse();
    while let Some(t) = stack.pop() {
        if let Some(kids) = children.get(&Some(t.clone())) {
            stack.extend(kids.iter().rev().cloned());
        }
        order.push(t);
    }

    let mut model = StaticModel::empty(name);
    for tid in &order {
        model.thimacs.insert(
            tid.clone(),
            Thimac {
                id: tid.clone(),
                name: tid.last_segment().to_string(),
                parent: links[tid].clone(),
                children: children
                    .get(&Some(tid.clone()))
                    .cloned()
                    .unwrap_or_default(),
                stages: Vec::new(),
            },
        );
    }

    let mut stages: HashMap<StageId, Stage> = HashMap::new();
    for d in decls {
        let Decl::Stage {
            owner,
            kind,
            label,
            anchor,
            span,
        } = d
        else {
            continue;
        };
        let owner_id = ThimacId::new_unchecked(owner.clone());
        if !model.thimacs.contains_key(&owner_id) {
            diags.push(
                Diagnostic::error(
                    Code::UnknownReference,
                    format!("{owner}.{kind}"),
                    format!("stage owner `{owner}` is not a declared thimac"),
                )
                .with_span(span.clone()),
            );
            continue;
        }
        let id = StageId::of(&owner_id, *kind);
        if stages.contains_key(&id) {
            diags.push(
                Diagnostic::error(
                    Code::DuplicateId,
                    id.as_str(),
                    format!("thimac `{owner}` declares more than one {kind} stage"),
                )
                .with_span(span.clone()),
            );
            continue;
        }
        stages.insert(
            id.clone(),
            Stage {
                id,
                kind: *kind,
                owner: owner_id,
                label: label.clone(),
                anchor: *anchor,
            },
        );
    }
    for tid in &order {
        for kind in StageKind::ALL {
            let sid = StageId::of(tid, kind);
            if let Some(stage) = stages.remove(&sid) {
                model.thimacs[tid].stages.push(sid.clone());
                model.stages.insert(sid, stage);
            }
        }
    }

    let mut edge_spans: HashMap<(bool, &str, &str), Option<SourceSpan>> = HashMap::new();
    for d in decls {
        match d {
            Decl::Flow { from, to, span } => {
                edge_spans.entry((false, from, to)).or_insert(span.clone());
                model.flows.push(FlowEdge {
                    from: StageId::new_unchecked(from.clone()),
                    to: StageId::new_unchecked(to.clone()),
                });
            }
            Decl::Trigger {
                from,
                to,
                join,
                span,
            } => {
                edge_spans.entry((true, from, to)).or_insert(span.clone());
                model.triggers.push(TriggerEdge {
                    from: StageId::new_unchecked(from.clone()),
                    to: StageId::new_unchecked(to.clone()),
                    join: join.clone(),
                });
            }
            _ => {}
        }
    }
    model.flows.sort();
    model.flows.dedup();
    model.triggers.sort();
    model.triggers.dedup();

    // Attach source positions to edge findings where we know them.
    for mut d in validate(&model) {
        if d.span.is_none() {
            if let Some((kind, rest)) = d.location.split_once(' ') {
                let is_trigger = kind == "trigger";
                let sep = if is_trigger { " --> " } else { " -> " };
                if let Some((a, b)) = rest.split_once(sep) {
                    if let Some(span) = edge_spans.get(&(is_trigger, a, b)) {
                        d.span = span.clone();
                    }
                }
            }
        }
        diags.push(d);
    }

    if diags.has_errors() {
        Err(diags)
    } else {
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use StageKind::*;

    #[test]
    fn empty_declarations_give_empty_model() {
        let m = build_model("m", &[]).unwrap();
        assert_eq!(m.name, "m");
        assert!(m.thimacs.is_empty());
        assert!(m.stages.is_empty());
    }

    #[test]
    fn identifiers() {
        assert!(ThimacId::new("Living.Heart").is_ok());
        assert!(ThimacId::new("_a.b9").is_ok());
        assert!(ThimacId::new("").is_err());
        assert!(ThimacId::new("a..b").is_err());
        assert!(ThimacId::new("9a").is_err());
        assert!(ThimacId::new("a-b").is_err());
        let sid = StageId::of(&ThimacId::new("A.B").unwrap(), Release);
        assert_eq!(sid.as_str(), "A.B.release");
        assert_eq!(sid.split(), Some((ThimacId::new("A.B").unwrap(), Release)));
    }

    #[test]
    fn legality_examples() {
        assert!(stage_adjacency_legal(Release, Transfer, true));
        assert!(stage_adjacency_legal(Transfer, Transfer, false));
        assert!(!stage_adjacency_legal(Process, Receive, true));
        assert!(!stage_adjacency_legal(Transfer, Create, true));
        assert!(!stage_adjacency_legal(Transfer, Create, false));
    }

    #[test]
    fn transfer_to_create_is_rejected() {
        let err = build_model(
            "m",
            &[
                Decl::thimac("A", None),
                Decl::thimac("B", None),
                Decl::stage("A", Transfer),
                Decl::stage("B", Create),
                Decl::flow("A.transfer", "B.create"),
            ],
        )
        .unwrap_err();
        assert!(err.has_code(Code::IllegalFlow));
    }

    #[test]
    fn errors_accumulate() {
        let err = build_model(
            "m",
            &[
                Decl::thimac("A", None),
                Decl::thimac("A", None),
                Decl::thimac("X.Y", Some("X")),
                Decl::stage("Nope", Create),
                Decl::stage("A", Create),
                Decl::stage("A", Create),
                Decl::flow("A.create", "Q.receive"),
            ],
        )
        .unwrap_err();
        for code in [Code::DuplicateId, Code::UnknownReference] {
            assert!(err.has_code(code), "missing {code}: {err:?}");
        }
        assert!(err.error_count() >= 5, "{err:?}");
    }

    #[test]
    fn forest_violations() {
        let err = build_model(
            "m",
            &[Decl::thimac("A", None), Decl::thimac("B.C", Some("A"))],
        )
        .unwrap_err();
        assert!(err.has_code(Code::ForestViolation));
        let err =
            build_model("m", &[Decl::thimac("A", None), Decl::thimac("A.C", None)]).unwrap_err();
        assert!(err.has_code(Code::ForestViolation));
    }

    #[test]
    fn canonical_order() {
        let m = build_model(
            "m",
            &[
                Decl::thimac("B", None),
                Decl::thimac("A", None),
                Decl::thimac("B.Child", Some("B")),
                Decl::stage("A", Release),
                Decl::stage("A", Create),
                Decl::stage("B.Child", Transfer),
                Decl::flow("A.release", "A.transfer"),
                Decl::stage("A", Transfer),
                Decl::flow("A.create", "A.release"),
                Decl::flow("A.transfer", "B.Child.transfer"),
            ],
        )
        .unwrap();
        let ids: Vec<_> = m.thimacs.keys().map(ThimacId::as_str).collect();
        assert_eq!(ids, ["B", "B.Child", "A"]);
        let stages: Vec<_> = m.stages.keys().map(StageId::as_str).collect();
        assert_eq!(
            stages,
            ["B.Child.transfer", "A.create", "A.release", "A.transfer"]
        );
        assert_eq!(m.thimacs[&ThimacId::new("B").unwrap()].children.len(), 1);
        let flows: Vec<_> = m.flows.iter().map(|f| f.from.as_str()).collect();
        assert_eq!(flows, ["A.create", "A.release", "A.transfer"]);
    }
}
