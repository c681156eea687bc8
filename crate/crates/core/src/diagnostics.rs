use std::fmt;

use serde::{Deserialize, Serialize};

/// A position in a `.tm` source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    /// 1-based.
    pub line: usize,
    /// 1-based.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    InvalidIdentifier,
    DuplicateId,
    UnknownReference,
    ForestViolation,
    OwnershipViolation,
    SelfLoop,
    IllegalFlow,
    TriggerOverlapsFlow,
    JoinDiverges,
    MultiComponent,
    EmptyRegion,
    RegionOverlap,
    RegionDisconnected,
    DuplicateEventForRegion,
    BehaviorCycle,
    InvalidConstraint,
    InvalidScenario,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::InvalidIdentifier => "INVALID_IDENTIFIER",
            Code::DuplicateId => "DUPLICATE_ID",
            Code::UnknownReference => "UNKNOWN_REFERENCE",
            Code::ForestViolation => "FOREST_VIOLATION",
            Code::OwnershipViolation => "OWNERSHIP_VIOLATION",
            Code::SelfLoop => "SELF_LOOP",
            Code::IllegalFlow => "ILLEGAL_FLOW",
            Code::TriggerOverlapsFlow => "TRIGGER_OVERLAPS_FLOW",
            Code::JoinDiverges => "JOIN_DIVERGES",
            Code::MultiComponent => "MULTI_COMPONENT",
            Code::EmptyRegion => "EMPTY_REGION",
            Code::RegionOverlap => "REGION_OVERLAP",
            Code::RegionDisconnected => "REGION_DISCONNECTED",
            Code::DuplicateEventForRegion => "DUPLICATE_EVENT_FOR_REGION",
            Code::BehaviorCycle => "BEHAVIOR_CYCLE",
            Code::InvalidConstraint => "INVALID_CONSTRAINT",
            Code::InvalidScenario => "INVALID_SCENARIO",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// The model element the finding is about, e.g. a stage id or an edge.
    pub location: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn error(code: Code, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            location: location.into(),
            message: message.into(),
            span: None,
        }
    }

    pub fn warning(code: Code, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            location: location.into(),
            message: message.into(),
            span: None,
        }
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(
            f,
            "{} {} at {}: {}",
            self.severity, self.code, self.location, self.message
        )
    }
}

/// An ordered collection of findings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Diagnostic>) {
        self.0.extend(other);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn error_count(&self) -> usize {
        self.0.iter().filter(|d| d.is_error()).count()
    }

    pub fn warning_count(&self) -> usize {
        self.0.len() - self.error_count()
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(Diagnostic::is_error)
    }

    pub fn has_code(&self, code: Code) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    pub fn into_vec(self) -> Vec<Diagnostic> {
        self.0
    }
}

impl IntoIterator for Diagnostics {
    type Item = Diagnostic;
    type IntoIter = std::vec::IntoIter<Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a Diagnostics {
    type Item = &'a Diagnostic;
    type IntoIter = std::slice::Iter<'a, Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<Diagnostic> for Diagnostics {
    fn from_iter<I: IntoIterator<Item = Diagnostic>>(iter: I) -> Self {
        Diagnostics(iter.into_iter().collect())
    }
}
