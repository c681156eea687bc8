//! A parsed model file: the static model plus everything layered on it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::changes::{
    check_partition, derive_precedence, ChangeError, ChangePartition, PrecedenceDag,
};
use crate::diagnostics::{Code, Diagnostic, Diagnostics};
use crate::events::{
    build_behavior, check_behavior_decl, check_constraints, lift_to_events, BehaviorDecl,
    BehaviorError, BehaviorModel, DynamicModel, WapConstraint,
};
use crate::model::StaticModel;
use crate::sim::{check_scenario, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub model: StaticModel,
    pub partition: ChangePartition,
    pub dynamic: DynamicModel,
    pub behavior: BehaviorDecl,
    pub constraints: Vec<WapConstraint>,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Change(#[from] ChangeError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

impl Document {
    pub fn new(model: StaticModel) -> Self {
        Document {
            model,
            partition: ChangePartition::default(),
            dynamic: DynamicModel::default(),
            behavior: BehaviorDecl::default(),
            constraints: Vec::new(),
            scenarios: Vec::new(),
        }
    }

    /// Checks everything layered on the model: regions, events, behavior
    /// declarations, constraints and scenarios. The model itself is
    /// checked by [`crate::validate`].
    pub fn check(&self) -> Diagnostics {
        let mut diags = check_partition(&self.model, &self.partition);
        if let Err(errors) = lift_to_events(&self.partition, &self.dynamic.events) {
            diags.extend(errors.iter().map(|e| e.to_diagnostic()));
        }
        diags.extend(
            check_behavior_decl(&self.dynamic, &self.behavior)
                .iter()
                .map(|e| e.to_diagnostic()),
        );
        diags.extend(check_constraints(&self.dynamic, &self.constraints));
        let mut names = BTreeSet::new();
        for s in &self.scenarios {
            if !names.insert(s.name.as_str()) {
                diags.push(Diagnostic::error(
                    Code::DuplicateId,
                    format!("scenario {}", s.name),
                    format!("scenario `{}` declared twice", s.name),
                ));
            }
            diags.extend(check_scenario(s, &self.dynamic));
        }
        diags
    }

    pub fn scenario(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    pub fn precedence(&self, allow_multi: bool) -> Result<PrecedenceDag, ChangeError> {
        derive_precedence(&self.model, &self.partition, allow_multi)
    }

    /// Behavior derived from the change order plus the declared additions.
    pub fn behavior_model(&self, allow_multi: bool) -> Result<BehaviorModel, AnalysisError> {
        let dag = self.precedence(allow_multi)?;
        Ok(build_behavior(&self.dynamic, &dag, &self.behavior, &[])?)
    }
}
