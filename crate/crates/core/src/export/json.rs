//! Versioned JSON interchange. The static model is flattened into arrays
//! of thimacs and stages that reference each other by id.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::changes::{ChangePartition, Region};
use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::document::Document;
use crate::events::{BehaviorDecl, DynamicModel, EventSpec, WapConstraint};
use crate::model::{build_model, Decl, FlowEdge, StageKind, TriggerEdge};
use crate::sim::{Scenario, Trace};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("unsupported schema version {found} (expected {SCHEMA_VERSION})")]
    SchemaVersionMismatch { found: String },
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("invalid model:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Diagnostics),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Bundle {
    tm_schema: u64,
    name: String,
    thimacs: Vec<FlatThimac>,
    stages: Vec<FlatStage>,
    flows: Vec<FlowEdge>,
    triggers: Vec<TriggerEdge>,
    regions: Vec<Region>,
    events: Vec<EventSpec>,
    behavior: BehaviorDecl,
    constraints: Vec<WapConstraint>,
    scenarios: Vec<Scenario>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatThimac {
    id: String,
    parent: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlatStage {
    id: String,
    owner: String,
    kind: StageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<u32>,
}

pub fn to_json(doc: &Document) -> String {
    let m = &doc.model;
    let bundle = Bundle {
        tm_schema: SCHEMA_VERSION,
        name: m.name.clone(),
        thimacs: m
            .thimacs
            .values()
            .map(|t| FlatThimac {
                id: t.id.to_string(),
                parent: t.parent.as_ref().map(ToString::to_string),
            })
            .collect(),
        stages: m
            .stages
            .values()
            .map(|s| FlatStage {
                id: s.id.to_string(),
                owner: s.owner.to_string(),
                kind: s.kind,
                label: s.label.clone(),
                anchor: s.anchor,
            })
            .collect(),
        flows: m.flows.clone(),
        triggers: m.triggers.clone(),
        regions: doc.partition.regions.clone(),
        events: doc.dynamic.events.clone(),
        behavior: doc.behavior.clone(),
        constraints: doc.constraints.clone(),
        scenarios: doc.scenarios.clone(),
    };
    let mut text = serde_json::to_string_pretty(&bundle).expect("bundle serializes");
    text.push('\n');
    text
}

/// Reads a bundle written by [`to_json`], rebuilding and re-checking the model.
pub fn from_json(text: &str) -> Result<Document, JsonError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| JsonError::MalformedJson(e.to_string()))?;
    match value.get("tm_schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(JsonError::SchemaVersionMismatch {
                found: other.to_string(),
            })
        }
        None => {
            return Err(JsonError::SchemaVersionMismatch {
                found: "none".to_string(),
            })
        }
    }
    let bundle: Bundle =
        serde_json::from_value(value).map_err(|e| JsonError::MalformedJson(e.to_string()))?;

    let mut decls = Vec::new();
    for t in &bundle.thimacs {
        decls.push(Decl::Thimac {
            id: t.id.clone(),
            parent: t.parent.clone(),
            span: None,
        });
    }
    let mut diags = Diagnostics::new();
    for s in &bundle.stages {
        let expected = format!("{}.{}", s.owner, s.kind.as_str());
        if s.id != expected {
            diags.push(Diagnostic::error(
                Code::OwnershipViolation,
                format!("stage {}", s.id),
                format!("stage id must be `{expected}`"),
            ));
        }
        decls.push(Decl::Stage {
            owner: s.owner.clone(),
            kind: s.kind,
            label: s.label.clone(),
            anchor: s.anchor,
            span: None,
        });
    }
    for f in &bundle.flows {
        decls.push(Decl::Flow {
            from: f.from.to_string(),
            to: f.to.to_string(),
            span: None,
        });
    }
    for t in &bundle.triggers {
        decls.push(Decl::Trigger {
            from: t.from.to_string(),
            to: t.to.to_string(),
            join: t.join.clone(),
            span: None,
        });
    }
    let model = match build_model(&bundle.name, &decls) {
        Ok(m) => Some(m),
        Err(d) => {
            diags.extend(d);
            None
        }
    };
    let Some(model) = model.filter(|_| !diags.has_errors()) else {
        return Err(JsonError::Invalid(diags));
    };

    let mut behavior = bundle.behavior;
    behavior.edges.sort();
    behavior.edges.dedup();
    let doc = Document {
        model,
        partition: ChangePartition::new(bundle.regions),
        dynamic: DynamicModel {
            events: bundle.events,
        },
        behavior,
        constraints: bundle.constraints,
        scenarios: bundle.scenarios,
    };
    let diags = doc.check();
    if diags.has_errors() {
        return Err(JsonError::Invalid(diags));
    }
    Ok(doc)
}

pub fn trace_to_json(trace: &Trace) -> String {
    let mut text = serde_json::to_string_pretty(trace).expect("trace serializes");
    text.push('\n');
    text
}
