use std::collections::{BTreeMap, HashMap, HashSet};

use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::graph;
use crate::model::{is_path, stage_adjacency_legal, StageId, StaticModel, ThimacId};

pub(crate) fn flow_location(from: &StageId, to: &StageId) -> String {
    format!("flow {from} -> {to}")
}

pub(crate) fn trigger_location(from: &StageId, to: &StageId) -> String {
    format!("trigger {from} --> {to}")
}

/// Checks every structural invariant of a static model.
///
/// Returns an empty list iff the model is well formed. A model whose
/// flow-and-trigger graph splits into several weakly connected components
/// gets a `MULTI_COMPONENT` warning; that alone is not an error.
pub fn validate(model: &StaticModel) -> Diagnostics {
    let mut out = Diagnostics::new();
    check_thimacs(model, &mut out);
    check_stages(model, &mut out);
    check_flows(model, &mut out);
    check_triggers(model, &mut out);
    check_components(model, &mut out);
    out
}

fn check_thimacs(model: &StaticModel, out: &mut Diagnostics) {
    for (key, t) in &model.thimacs {
        if key != &t.id {
            out.push(Diagnostic::error(
                Code::OwnershipViolation,
                key.as_str(),
                format!("thimac stored under `{key}` carries id `{}`", t.id),
            ));
        }
        if !is_path(t.id.as_str()) {
            out.push(Diagnostic::error(
                Code::InvalidIdentifier,
                t.id.as_str(),
                format!("`{}` is not a valid thimac path", t.id),
            ));
        }
        match &t.parent {
            Some(p) => match model.thimacs.get(p) {
                None => out.push(Diagnostic::error(
                    Code::UnknownReference,
                    t.id.as_str(),
                    format!("parent thimac `{p}` does not exist"),
                )),
                Some(pt) if !pt.children.contains(&t.id) => out.push(Diagnostic::error(
                    Code::ForestViolation,
                    t.id.as_str(),
                    format!("parent `{p}` does not list `{}` as a child", t.id),
                )),
                Some(_) => {}
            },
            None if t.id.path_parent().is_some() => out.push(Diagnostic::error(
                Code::ForestViolation,
                t.id.as_str(),
                format!("nested thimac `{}` has no parent", t.id),
            )),
            None => {}
        }
        for c in &t.children {
            match model.thimacs.get(c) {
                None => out.push(Diagnostic::error(
                    Code::UnknownReference,
                    t.id.as_str(),
                    format!("child thimac `{c}` does not exist"),
                )),
                Some(ct) if ct.parent.as_ref() != Some(&t.id) => out.push(Diagnostic::error(
                    Code::ForestViolation,
                    c.as_str(),
                    format!(
                        "`{c}` is listed as a child of `{}` but names another parent",
                        t.id
                    ),
                )),
                Some(_) => {}
            }
        }
    }

    // Parent links must not loop.
    let index: HashMap<&ThimacId, usize> = model
        .thimacs
        .keys()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();
    let adj: Vec<Vec<usize>> = model
        .thimacs
        .values()
        .map(|t| {
            t.parent
                .as_ref()
                .and_then(|p| index.get(p).copied())
                .into_iter()
                .collect()
        })
        .collect();
    if let Some(cycle) = graph::find_cycle(&adj) {
        let names: Vec<&str> = cycle
            .iter()
            .map(|&i| model.thimacs.get_index(i).unwrap().0.as_str())
            .collect();
        out.push(Diagnostic::error(
            Code::ForestViolation,
            names[0],
            format!("thimac hierarchy contains a cycle: {}", names.join(" -> ")),
        ));
    }
}

fn check_stages(model: &StaticModel, out: &mut Diagnostics) {
    let mut listed_by: HashMap<&StageId, Vec<&ThimacId>> = HashMap::new();
    for t in model.thimacs.values() {
        for s in &t.stages {
            listed_by.entry(s).or_default().push(&t.id);
        }
    }
    for (key, s) in &model.stages {
        if key != &s.id {
            out.push(Diagnostic::error(
                Code::OwnershipViolation,
                key.as_str(),
                format!("stage stored under `{key}` carries id `{}`", s.id),
            ));
        }
        if !model.thimacs.contains_key(&s.owner) {
            out.push(Diagnostic::error(
                Code::UnknownReference,
                s.id.as_str(),
                format!("owner thimac `{}` does not exist", s.owner),
            ));
            continue;
        }
        if s.id != StageId::of(&s.owner, s.kind) {
            out.push(Diagnostic::error(
                Code::InvalidIdentifier,
                s.id.as_str(),
                format!("stage id should be `{}`", StageId::of(&s.owner, s.kind)),
            ));
        }
        let owners = listed_by.remove(&s.id).unwrap_or_default();
        if owners.len() != 1 || owners[0] != &s.owner {
            let names: Vec<&str> = owners.iter().map(|t| t.as_str()).collect();
            out.push(Diagnostic::error(
                Code::OwnershipViolation,
                s.id.as_str(),
                format!(
                    "stage must be listed by exactly its owner `{}`; listed by [{}]",
                    s.owner,
                    names.join(", ")
                ),
            ));
        }
    }
    let mut dangling: Vec<(&StageId, Vec<&ThimacId>)> = listed_by.into_iter().collect();
    dangling.sort();
    for (sid, owners) in dangling {
        out.push(Diagnostic::error(
            Code::UnknownReference,
            owners[0].as_str(),
            format!("thimac lists stage `{sid}` which does not exist"),
        ));
    }
}

fn check_flows(model: &StaticModel, out: &mut Diagnostics) {
    for f in &model.flows {
        let loc = flow_location(&f.from, &f.to);
        let (from, to) = (model.stage(&f.from), model.stage(&f.to));
        for (id, s) in [(&f.from, from), (&f.to, to)] {
            if s.is_none() {
                out.push(Diagnostic::error(
                    Code::UnknownReference,
                    &loc,
                    format!("stage `{id}` does not exist"),
                ));
            }
        }
        if f.from == f.to {
            out.push(Diagnostic::error(
                Code::SelfLoop,
                &loc,
                "flow from a stage to itself",
            ));
            continue;
        }
        let (Some(from), Some(to)) = (from, to) else {
            continue;
        };
        let same = from.owner == to.owner;
        if !stage_adjacency_legal(from.kind, to.kind, same) {
            out.push(Diagnostic::error(
                Code::IllegalFlow,
                &loc,
                format!(
                    "{} -> {} is not a legal flow {}",
                    from.kind,
                    to.kind,
                    if same {
                        "within a thimac"
                    } else {
                        "between thimacs"
                    }
                ),
            ));
        }
    }
}

fn check_triggers(model: &StaticModel, out: &mut Diagnostics) {
    let flow_adj = model.flow_adjacency();
    let mut reach_cache: HashMap<usize, Vec<bool>> = HashMap::new();
    let mut reaches = |a: usize, b: usize| -> bool {
        reach_cache
            .entry(a)
            .or_insert_with(|| graph::reachable_from(&flow_adj, a))[b]
    };

    let mut join_targets: BTreeMap<&str, HashSet<&StageId>> = BTreeMap::new();
    for t in &model.triggers {
        let loc = trigger_location(&t.from, &t.to);
        let (from, to) = (
            model.stages.get_index_of(&t.from),
            model.stages.get_index_of(&t.to),
        );
        for (id, s) in [(&t.from, from), (&t.to, to)] {
            if s.is_none() {
                out.push(Diagnostic::error(
                    Code::UnknownReference,
                    &loc,
                    format!("stage `{id}` does not exist"),
                ));
            }
        }
        if let Some(j) = &t.join {
            join_targets.entry(j).or_default().insert(&t.to);
        }
        if t.from == t.to {
            out.push(Diagnostic::error(
                Code::SelfLoop,
                &loc,
                "trigger from a stage to itself",
            ));
            continue;
        }
        let (Some(a), Some(b)) = (from, to) else {
            continue;
        };
        if reaches(a, b) || reaches(b, a) {
            out.push(Diagnostic::error(
                Code::TriggerOverlapsFlow,
                &loc,
                "trigger endpoints are already connected by a flow path",
            ));
        }
    }
    for (join, targets) in join_targets {
        if targets.len() > 1 {
            let mut names: Vec<&str> = targets.iter().map(|s| s.as_str()).collect();
            names.sort_unstable();
            out.push(Diagnostic::error(
                Code::JoinDiverges,
                format!("join {join}"),
                format!(
                    "triggers in one join group must share a target; found {}",
                    names.join(", ")
                ),
            ));
        }
    }
}

fn check_components(model: &StaticModel, out: &mut Diagnostics) {
    let n = model.stages.len();
    let mut edges = Vec::new();
    let mut involved = vec![false; n];
    let flow_pairs = model.flows.iter().map(|f| (&f.from, &f.to));
    let trigger_pairs = model.triggers.iter().map(|t| (&t.from, &t.to));
    for (a, b) in flow_pairs.chain(trigger_pairs) {
        if let (Some(a), Some(b)) = (model.stages.get_index_of(a), model.stages.get_index_of(b)) {
            involved[a] = true;
            involved[b] = true;
            edges.push((a, b));
        }
    }
    let adj = graph::adjacency(n, edges);
    let (count, _) = graph::weak_components(&adj, &involved);
    if count > 1 {
        out.push(Diagnostic::warning(
            Code::MultiComponent,
            model.name.as_str(),
            format!(
                "flow and trigger edges form {count} disconnected components; analyses expect one"
            ),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Decl, FlowEdge, StageKind::*, TriggerEdge};

    fn chain_model() -> StaticModel {
        build_model(
            "m",
            &[
                Decl::thimac("A", None),
                Decl::thimac("B", None),
                Decl::stage("A", Create),
                Decl::stage("A", Release),
                Decl::stage("A", Transfer),
                Decl::stage("B", Receive),
                Decl::stage("B", Process),
                Decl::flow("A.create", "A.release"),
                Decl::flow("A.release", "A.transfer"),
                Decl::flow("A.transfer", "B.receive"),
                Decl::flow("B.receive", "B.process"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn valid_model_is_clean_and_idempotent() {
        let m = chain_model();
        let d = validate(&m);
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(validate(&m), d);
    }

    #[test]
    fn two_disjoint_chains_warn() {
        let m = build_model(
            "m",
            &[
                Decl::thimac("A", None),
                Decl::thimac("B", None),
                Decl::stage("A", Create),
                Decl::stage("A", Release),
                Decl::stage("B", Create),
                Decl::stage("B", Process),
                Decl::flow("A.create", "A.release"),
                Decl::flow("B.create", "B.process"),
            ],
        )
        .unwrap();
        let d = validate(&m);
        assert_eq!(d.len(), 1);
        assert_eq!(d.0[0].code, Code::MultiComponent);
        assert!(!d.has_errors());
    }

    #[test]
    fn trigger_over_flow_path_is_rejected() {
        let mut m = chain_model();
        m.triggers.push(TriggerEdge {
            from: StageId::new_unchecked("A.create"),
            to: StageId::new_unchecked("B.process"),
            join: None,
        });
        assert!(validate(&m).has_code(Code::TriggerOverlapsFlow));
        // The reverse direction is caught too.
        m.triggers[0] = TriggerEdge {
            from: StageId::new_unchecked("B.process"),
            to: StageId::new_unchecked("A.release"),
            join: None,
        };
        assert!(validate(&m).has_code(Code::TriggerOverlapsFlow));
    }

    #[test]
    fn mutated_edges_are_flagged() {
        let mut m = chain_model();
        m.flows.push(FlowEdge {
            from: StageId::new_unchecked("B.process"),
            to: StageId::new_unchecked("A.create"),
        });
        m.flows.push(FlowEdge {
            from: StageId::new_unchecked("A.create"),
            to: StageId::new_unchecked("A.create"),
        });
        m.flows.push(FlowEdge {
            from: StageId::new_unchecked("A.create"),
            to: StageId::new_unchecked("Z.receive"),
        });
        let d = validate(&m);
        assert!(d.has_code(Code::IllegalFlow));
        assert!(d.has_code(Code::SelfLoop));
        assert!(d.has_code(Code::UnknownReference));
    }

    #[test]
    fn join_groups_must_converge() {
        let mut m = chain_model();
        m.triggers = vec![
            TriggerEdge {
                from: StageId::new_unchecked("A.create"),
                to: StageId::new_unchecked("A.transfer"),
                join: Some("bar".into()),
            },
            TriggerEdge {
                from: StageId::new_unchecked("B.process"),
                to: StageId::new_unchecked("A.release"),
                join: Some("bar".into()),
            },
        ];
        assert!(validate(&m).has_code(Code::JoinDiverges));
    }

    #[test]
    fn hierarchy_breakage() {
        let mut m = chain_model();
        let a = ThimacId::new("A").unwrap();
        let b = ThimacId::new("B").unwrap();
        m.thimacs[&a].parent = Some(b.clone());
        m.thimacs[&b].parent = Some(a.clone());
        m.thimacs[&a].children.push(b.clone());
        m.thimacs[&b].children.push(a.clone());
        assert!(validate(&m).has_code(Code::ForestViolation));

        let mut m = chain_model();
        m.thimacs[&b]
            .stages
            .push(StageId::new_unchecked("A.create"));
        assert!(validate(&m).has_code(Code::OwnershipViolation));
    }
}
