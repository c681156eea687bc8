//! Thinging Machine modeling toolkit.

pub mod changes;
pub mod corpus;
pub mod diagnostics;
pub mod document;
pub mod dsl;
pub mod events;
pub mod export;
mod graph;
pub mod model;
pub mod report;
pub mod sim;
pub mod time;
pub mod validate;

pub use changes::{
    check_partition, classify_pair, derive_precedence, enumerate_chronologies,
    normalize_consecutive, Cause, ChangeError, ChangePartition, Chronologies, OrderClass,
    PrecedenceDag, PrecedenceEdge, Region,
};
pub use diagnostics::{Code, Diagnostic, Diagnostics, Severity, SourceSpan};
pub use document::{AnalysisError, Document};
pub use dsl::{parse, parse_named, serialize, DslError, ParseError, Parsed};
pub use events::{
    build_behavior, check_behavior_decl, check_constraints, check_isomorphism, lift_to_events,
    Anchor, Arm, BehaviorDecl, BehaviorError, BehaviorModel, Branch, CmpOp, Comparison,
    DynamicModel, Endpoint, EventError, EventSpec, GuardExpr, Isomorphism, WapConstraint,
};
pub use model::{
    build_model, stage_adjacency_legal, Decl, FlowEdge, Stage, StageId, StageKind, StaticModel,
    Thimac, ThimacId, TriggerEdge,
};
pub use sim::{
    check_scenario, check_wap, simulate, Scenario, SimError, Tick, Trace, TraceEntry, WapCheck,
    Warning,
};
pub use time::{TimeError, TimeUnit, TimeValue};
pub use validate::validate;
