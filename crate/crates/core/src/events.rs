//! Events lift changes into time; the behavior model orders them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::changes::{ChangePartition, PrecedenceDag};
use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::graph;
use crate::model::is_segment;
use crate::time::TimeValue;

/// An event: a change region placed in time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    pub id: String,
    pub region: String,
    /// `None` means instantaneous.
    pub duration: Option<TimeValue>,
}

impl EventSpec {
    pub fn new(id: impl Into<String>, region: impl Into<String>) -> Self {
        EventSpec {
            id: id.into(),
            region: region.into(),
            duration: None,
        }
    }

    pub fn with_duration(mut self, d: TimeValue) -> Self {
        self.duration = Some(d);
        self
    }
}

/// The events lifted from a partition, at most one per region.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicModel {
    pub events: Vec<EventSpec>,
}

impl DynamicModel {
    pub fn event(&self, id: &str) -> Option<&EventSpec> {
        self.events.iter().find(|e| e.id == id)
    }

    /// region id -> event id
    pub fn region_map(&self) -> BTreeMap<String, String> {
        self.events
            .iter()
            .map(|e| (e.region.clone(), e.id.clone()))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("event `{event}` names unknown region `{region}`")]
    UnknownRegion { event: String, region: String },
    #[error("region `{region}` already lifted to event `{first}`; `{second}` duplicates it")]
    DuplicateEventForRegion {
        region: String,
        first: String,
        second: String,
    },
    #[error("event `{0}` declared twice")]
    DuplicateEvent(String),
    #[error("`{0}` is not a valid event identifier")]
    InvalidId(String),
}

impl EventError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let (code, loc) = match self {
            EventError::UnknownRegion { event, .. } => (Code::UnknownReference, event),
            EventError::DuplicateEventForRegion { second, .. } => {
                (Code::DuplicateEventForRegion, second)
            }
            EventError::DuplicateEvent(e) => (Code::DuplicateId, e),
            EventError::InvalidId(e) => (Code::InvalidIdentifier, e),
        };
        Diagnostic::error(code, format!("event {loc}"), self.to_string())
    }
}

/// Binds event specs to the regions they lift. Regions without a spec stay
/// changes only.
pub fn lift_to_events(
    partition: &ChangePartition,
    specs: &[EventSpec],
) -> Result<DynamicModel, Vec<EventError>> {
    let mut errors = Vec::new();
    let mut ids = HashSet::new();
    let mut by_region: BTreeMap<&str, &str> = BTreeMap::new();
    for spec in specs {
        if !is_segment(&spec.id) {
            errors.push(EventError::InvalidId(spec.id.clone()));
        }
        if !ids.insert(spec.id.as_str()) {
            errors.push(EventError::DuplicateEvent(spec.id.clone()));
        }
        if partition.region(&spec.region).is_none() {
            errors.push(EventError::UnknownRegion {
                event: spec.id.clone(),
                region: spec.region.clone(),
            });
        } else if let Some(first) = by_region.insert(&spec.region, &spec.id) {
            errors.push(EventError::DuplicateEventForRegion {
                region: spec.region.clone(),
                first: first.to_string(),
                second: spec.id.clone(),
            });
        }
    }
    if errors.is_empty() {
        Ok(DynamicModel {
            events: specs.to_vec(),
        })
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }

    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            CmpOp::Lt => value < threshold,
            CmpOp::Le => value <= threshold,
            CmpOp::Gt => value > threshold,
            CmpOp::Ge => value >= threshold,
            CmpOp::Eq => value == threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub measurement: String,
    pub op: CmpOp,
    pub threshold: f64,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.measurement,
            self.op.as_str(),
            self.threshold
        )
    }
}

/// A conjunction of comparisons over scenario measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GuardExpr {
    pub terms: Vec<Comparison>,
}

impl GuardExpr {
    pub fn new(terms: Vec<Comparison>) -> Self {
        GuardExpr { terms }
    }

    /// Evaluates against a measurement map; `Err` carries the first missing name.
    pub fn eval(&self, measurements: &BTreeMap<String, f64>) -> Result<bool, String> {
        let mut all = true;
        for t in &self.terms {
            let value = measurements
                .get(&t.measurement)
                .ok_or_else(|| t.measurement.clone())?;
            all &= t.op.holds(*value, t.threshold);
        }
        Ok(all)
    }

    pub fn measurements(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.measurement.as_str())
    }
}

impl fmt::Display for GuardExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arm {
    pub guard: GuardExpr,
    pub to: String,
}

/// After `at` the first arm whose guard holds hands control to its target.
/// With `else_skip`, a branch where no arm holds lets `at`'s ordinary
/// successors proceed; without it, nothing proceeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub at: String,
    pub arms: Vec<Arm>,
    pub else_skip: bool,
}

/// What a model file declares about behavior on top of the derived order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDecl {
    pub edges: Vec<(String, String)>,
    pub repeats: BTreeSet<String>,
    pub branches: Vec<Branch>,
}

impl BehaviorDecl {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.repeats.is_empty() && self.branches.is_empty()
    }
}

/// The chronology of events: a Hasse diagram of the event order plus
/// repetition markers and guarded branches.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BehaviorModel {
    pub events: Vec<String>,
    /// Ordering edges (no branch arms).
    pub edges: BTreeSet<(String, String)>,
    pub repeats: BTreeSet<String>,
    pub branches: Vec<Branch>,
}

impl BehaviorModel {
    /// Ordering edges and branch-arm edges together.
    pub fn all_edges(&self) -> BTreeSet<(String, String)> {
        let mut all = self.edges.clone();
        for b in &self.branches {
            for arm in &b.arms {
                all.insert((b.at.clone(), arm.to.clone()));
            }
        }
        all
    }

    pub fn branch_at(&self, event: &str) -> Option<&Branch> {
        self.branches.iter().find(|b| b.at == event)
    }

    pub fn arm_targets(&self) -> BTreeSet<&str> {
        self.branches
            .iter()
            .flat_map(|b| b.arms.iter().map(|a| a.to.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BehaviorError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("`{0} -> {1}` is not an edge of the behavior and cannot be dropped")]
    NotAnEdge(String, String),
    #[error("branch at `{0}` has no arms")]
    EmptyBranch(String),
    #[error("more than one branch at `{0}`")]
    DuplicateBranch(String),
    #[error("branch arm at `{0}` has an empty guard")]
    EmptyGuard(String),
    #[error("behavior contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

impl BehaviorError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let code = match self {
            BehaviorError::UnknownEvent(_) | BehaviorError::NotAnEdge(..) => Code::UnknownReference,
            BehaviorError::Cycle(_) => Code::BehaviorCycle,
            BehaviorError::DuplicateBranch(_) => Code::DuplicateId,
            BehaviorError::EmptyBranch(_) | BehaviorError::EmptyGuard(_) => Code::InvalidConstraint,
        };
        Diagnostic::error(code, "behavior", self.to_string())
    }
}

/// Checks a behavior declaration against the events it names, without
/// needing the change order.
pub fn check_behavior_decl(dynamic: &DynamicModel, decl: &BehaviorDecl) -> Vec<BehaviorError> {
    let known: HashSet<&str> = dynamic.events.iter().map(|e| e.id.as_str()).collect();
    let mut errors = Vec::new();
    let unknown = |id: &str, errors: &mut Vec<BehaviorError>| {
        if !known.contains(id) {
            errors.push(BehaviorError::UnknownEvent(id.to_string()));
        }
    };
    for (a, b) in &decl.edges {
        unknown(a, &mut errors);
        unknown(b, &mut errors);
    }
    for r in &decl.repeats {
        unknown(r, &mut errors);
    }
    let mut branch_sites = HashSet::new();
    for br in &decl.branches {
        unknown(&br.at, &mut errors);
        if !branch_sites.insert(br.at.as_str()) {
            errors.push(BehaviorError::DuplicateBranch(br.at.clone()));
        }
        if br.arms.is_empty() {
            errors.push(BehaviorError::EmptyBranch(br.at.clone()));
        }
        for arm in &br.arms {
            unknown(&arm.to, &mut errors);
            if arm.guard.terms.is_empty() {
                errors.push(BehaviorError::EmptyGuard(br.at.clone()));
            }
        }
    }
    errors
}

/// Builds B from the change order: the transitive reduction of the order
/// among lifted regions, renamed to events, minus `reductions`, plus the
/// declared edges, repeats and branches. Acyclicity over ordering and arm
/// edges is re-verified.
pub fn build_behavior(
    dynamic: &DynamicModel,
    dag: &PrecedenceDag,
    decl: &BehaviorDecl,
    reductions: &[(String, String)],
) -> Result<BehaviorModel, BehaviorError> {
    if let Some(e) = check_behavior_decl(dynamic, decl).into_iter().next() {
        return Err(e);
    }

    // Order among lifted regions, then reduce.
    let lifted: Vec<(usize, &EventSpec)> = dynamic
        .events
        .iter()
        .filter_map(|e| dag.index_of(&e.region).map(|i| (i, e)))
        .collect();
    let closure = dag.reachability();
    let mut induced = Vec::new();
    for (a, (ra, _)) in lifted.iter().enumerate() {
        for (b, (rb, _)) in lifted.iter().enumerate() {
            if closure[*ra][*rb] {
                induced.push((a, b));
            }
        }
    }
    let adj = graph::adjacency(lifted.len(), induced);
    let mut edges: BTreeSet<(String, String)> = graph::transitive_reduction(&adj)
        .into_iter()
        .map(|(a, b)| (lifted[a].1.id.clone(), lifted[b].1.id.clone()))
        .collect();

    for (a, b) in reductions {
        if !edges.remove(&(a.clone(), b.clone())) {
            return Err(BehaviorError::NotAnEdge(a.clone(), b.clone()));
        }
    }
    edges.extend(decl.edges.iter().cloned());

    let behavior = BehaviorModel {
        events: dynamic.events.iter().map(|e| e.id.clone()).collect(),
        edges,
        repeats: decl.repeats.clone(),
        branches: decl.branches.clone(),
    };
    check_acyclic(&behavior)?;
    Ok(behavior)
}

fn check_acyclic(b: &BehaviorModel) -> Result<(), BehaviorError> {
    let index = |id: &str| b.events.iter().position(|e| e == id).unwrap();
    let adj = graph::adjacency(
        b.events.len(),
        b.all_edges().iter().map(|(x, y)| (index(x), index(y))),
    );
    match graph::find_cycle(&adj) {
        Some(c) => Err(BehaviorError::Cycle(
            c.into_iter().map(|i| b.events[i].clone()).collect(),
        )),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub holds: bool,
    /// First region pair (in node order) whose ordering differs.
    pub counterexample: Option<(String, String)>,
}

/// Compares reachability in the change order with reachability over B's
/// ordering edges (branch arms excluded), for every pair of mapped regions.
pub fn check_isomorphism(
    dag: &PrecedenceDag,
    behavior: &BehaviorModel,
    mapping: &BTreeMap<String, String>,
) -> Isomorphism {
    let changes = dag.reachability();
    let event_index: BTreeMap<&str, usize> = behavior
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let adj = graph::adjacency(
        behavior.events.len(),
        behavior.edges.iter().filter_map(|(a, b)| {
            Some((*event_index.get(a.as_str())?, *event_index.get(b.as_str())?))
        }),
    );
    let events = graph::transitive_closure(&adj);

    let mapped: Vec<(usize, &String, Option<usize>)> = dag
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let e = mapping.get(r)?;
            Some((i, r, event_index.get(e.as_str()).copied()))
        })
        .collect();
    for &(ri, rname, ei) in &mapped {
        for &(rj, rjname, ej) in &mapped {
            if ri == rj {
                continue;
            }
            let in_b = matches!((ei, ej), (Some(a), Some(b)) if events[a][b]);
            if changes[ri][rj] != in_b {
                return Isomorphism {
                    holds: false,
                    counterexample: Some((rname.clone(), rjname.clone())),
                };
            }
        }
    }
    Isomorphism {
        holds: true,
        counterexample: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    Start,
    Finish,
}

impl Anchor {
    pub fn as_str(self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Finish => "finish",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub event: String,
    pub anchor: Anchor,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.event, self.anchor.as_str())
    }
}

/// "Within an acceptable period": `later - earlier` must not exceed
/// `max_separation`; a larger separation raises `warning_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WapConstraint {
    pub earlier: Endpoint,
    pub later: Endpoint,
    pub max_separation: TimeValue,
    pub warning_id: String,
}

impl WapConstraint {
    pub fn default_warning_id(earlier: &str, later: &str) -> String {
        format!("wap_{earlier}_{later}")
    }
}

impl fmt::Display for WapConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} - {} <= {} warn {}",
            self.later, self.earlier, self.max_separation, self.warning_id
        )
    }
}

pub fn check_constraints(dynamic: &DynamicModel, constraints: &[WapConstraint]) -> Diagnostics {
    let mut out = Diagnostics::new();
    for c in constraints {
        let loc = format!("wap {}", c.warning_id);
        for ep in [&c.earlier, &c.later] {
            if dynamic.event(&ep.event).is_none() {
                out.push(Diagnostic::error(
                    Code::UnknownReference,
                    &loc,
                    format!("unknown event `{}`", ep.event),
                ));
            }
        }
        if c.max_separation.is_zero() {
            out.push(Diagnostic::error(
                Code::InvalidConstraint,
                &loc,
                "maximum separation must be positive",
            ));
        }
        if !is_segment(&c.warning_id) {
            out.push(Diagnostic::error(
                Code::InvalidIdentifier,
                &loc,
                format!("`{}` is not a valid warning identifier", c.warning_id),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::changes::{Cause, PrecedenceEdge, Region};

    fn heart_like_dag() -> PrecedenceDag {
        let e = |a: &str, b: &str, cause| PrecedenceEdge {
            before: a.into(),
            after: b.into(),
            cause,
        };
        PrecedenceDag::new(
            ["C1", "C2", "C3", "C4"].map(String::from),
            [
                e("C1", "C3", Cause::Flow),
                e("C1", "C4", Cause::Flow),
                e("C2", "C4", Cause::Flow),
                e("C3", "C4", Cause::Trigger),
            ],
        )
        .unwrap()
    }

    fn four_regions() -> ChangePartition {
        ChangePartition::new(
            (1..=4)
                .map(|i| Region::new(format!("C{i}"), [format!("S{i}.create")]))
                .collect(),
        )
    }

    fn four_events() -> DynamicModel {
        lift_to_events(
            &four_regions(),
            &(1..=4)
                .map(|i| EventSpec::new(format!("E{i}"), format!("C{i}")))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        list.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn lift_errors() {
        let p = four_regions();
        assert!(lift_to_events(&p, &[]).unwrap().is_empty());
        let err = lift_to_events(
            &p,
            &[EventSpec::new("E1", "C1"), EventSpec::new("E2", "C1")],
        )
        .unwrap_err();
        assert!(matches!(err[0], EventError::DuplicateEventForRegion { .. }));
        let err = lift_to_events(&p, &[EventSpec::new("E1", "C9")]).unwrap_err();
        assert!(matches!(err[0], EventError::UnknownRegion { .. }));
    }

    #[test]
    fn behavior_is_reduced_image() {
        let b = build_behavior(
            &four_events(),
            &heart_like_dag(),
            &BehaviorDecl::default(),
            &[],
        )
        .unwrap();
        assert_eq!(b.edges, pairs(&[("E1", "E3"), ("E2", "E4"), ("E3", "E4")]));
        let map = four_events().region_map();
        assert!(check_isomorphism(&heart_like_dag(), &b, &map).holds);
    }

    #[test]
    fn extra_edge_breaks_isomorphism() {
        let mut b = build_behavior(
            &four_events(),
            &heart_like_dag(),
            &BehaviorDecl::default(),
            &[],
        )
        .unwrap();
        b.edges.insert(("E2".into(), "E3".into()));
        let iso = check_isomorphism(&heart_like_dag(), &b, &four_events().region_map());
        assert!(!iso.holds);
        assert_eq!(iso.counterexample, Some(("C2".into(), "C3".into())));
    }

    #[test]
    fn empty_inputs() {
        let dag = PrecedenceDag::new(Vec::<String>::new(), []).unwrap();
        let b = build_behavior(
            &DynamicModel::default(),
            &dag,
            &BehaviorDecl::default(),
            &[],
        )
        .unwrap();
        assert_eq!(b, BehaviorModel::default());
        assert!(check_isomorphism(&dag, &b, &BTreeMap::new()).holds);
    }

    #[test]
    fn reductions_and_cycles() {
        let d = four_events();
        let dag = heart_like_dag();
        let b = build_behavior(
            &d,
            &dag,
            &BehaviorDecl::default(),
            &[("E3".into(), "E4".into())],
        )
        .unwrap();
        assert!(!b.edges.contains(&("E3".to_string(), "E4".to_string())));
        assert!(matches!(
            build_behavior(
                &d,
                &dag,
                &BehaviorDecl::default(),
                &[("E1".into(), "E4".into())]
            ),
            Err(BehaviorError::NotAnEdge(..))
        ));
        let decl = BehaviorDecl {
            edges: vec![("E4".into(), "E1".into())],
            ..Default::default()
        };
        assert!(matches!(
            build_behavior(&d, &dag, &decl, &[]),
            Err(BehaviorError::Cycle(_))
        ));
        let decl = BehaviorDecl {
            repeats: ["E9".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(
            build_behavior(&d, &dag, &decl, &[]),
            Err(BehaviorError::UnknownEvent("E9".into()))
        );
    }

    #[test]
    fn unlifted_regions_keep_transitive_order() {
        // C3 is not lifted; E1 must still precede E4 through it.
        let p = four_regions();
        let d = lift_to_events(
            &p,
            &[
                EventSpec::new("E1", "C1"),
                EventSpec::new("E2", "C2"),
                EventSpec::new("E4", "C4"),
            ],
        )
        .unwrap();
        let b = build_behavior(&d, &heart_like_dag(), &BehaviorDecl::default(), &[]).unwrap();
        assert_eq!(b.edges, pairs(&[("E1", "E4"), ("E2", "E4")]));
        assert!(check_isomorphism(&heart_like_dag(), &b, &d.region_map()).holds);
    }

    #[test]
    fn guard_evaluation() {
        let g = GuardExpr::new(vec![
            Comparison {
                measurement: "speed_drop".into(),
                op: CmpOp::Ge,
                threshold: 20.0,
            },
            Comparison {
                measurement: "angle".into(),
                op: CmpOp::Lt,
                threshold: 30.0,
            },
        ]);
        assert_eq!(g.to_string(), "speed_drop >= 20 and angle < 30");
        let m: BTreeMap<String, f64> =
            [("speed_drop".to_string(), 20.0), ("angle".into(), 30.0)].into();
        assert_eq!(g.eval(&m), Ok(false));
        let m: BTreeMap<String, f64> = [("speed_drop".to_string(), 25.0)].into();
        assert_eq!(g.eval(&m), Err("angle".into()));
    }

    #[test]
    fn constraint_checks() {
        let d = four_events();
        let c = WapConstraint {
            earlier: Endpoint {
                event: "E1".into(),
                anchor: Anchor::Start,
            },
            later: Endpoint {
                event: "E9".into(),
                anchor: Anchor::Finish,
            },
            max_separation: TimeValue::ZERO,
            warning_id: "W1".into(),
        };
        let diags = check_constraints(&d, &[c]);
        assert!(diags.has_code(Code::UnknownReference));
        assert!(diags.has_code(Code::InvalidConstraint));
    }
}
