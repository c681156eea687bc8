//! Graphviz DOT and JSON output.

mod dot;
mod json;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use dot::{behavior_to_dot, to_dot};
pub use json::{from_json, to_json, trace_to_json, JsonError, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Thimacs, stages, flows and triggers.
    #[default]
    Static,
    /// Stages grouped by the region (and event) they belong to.
    Dynamic,
    /// Events and their order.
    Behavior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RankDir {
    #[default]
    LR,
    TB,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownOption(pub String);

impl fmt::Display for UnknownOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown option value `{}`", self.0)
    }
}

impl std::error::Error for UnknownOption {}

impl FromStr for Target {
    type Err = UnknownOption;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Target::Static),
            "dynamic" => Ok(Target::Dynamic),
            "behavior" => Ok(Target::Behavior),
            other => Err(UnknownOption(other.to_string())),
        }
    }
}

impl FromStr for RankDir {
    type Err = UnknownOption;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LR" | "lr" => Ok(RankDir::LR),
            "TB" | "tb" => Ok(RankDir::TB),
            other => Err(UnknownOption(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExportOptions {
    pub target: Target,
    /// Adds stage anchor numbers to node labels.
    pub show_anchors: bool,
    pub rankdir: RankDir,
}
