//! The `.tm` text format: one file carries the static model, its change
//! regions, events, behavior additions, wap constraints and scenarios.
//!
//! ```text
//! model "m"
//! thimac A { create release transfer }
//! thimac B { receive process }
//! flow A.create -> A.release -> A.transfer -> B.receive
//! region C1 { A.create }
//! event E1 region C1 duration 2ms
//! ```

mod lexer;
mod parser;
mod serialize;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::changes::ChangePartition;
use crate::diagnostics::{Diagnostics, SourceSpan};
use crate::document::Document;
use crate::events::DynamicModel;
use crate::model::build_model;
use crate::validate::validate;

pub use parser::MAX_ERRORS;
pub use serialize::serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {}, found {}",
            self.span, self.expected, self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    /// The text does not follow the grammar.
    #[error("{}", join_lines(.0))]
    Syntax(Vec<ParseError>),
    /// The text parses but declares an invalid model.
    #[error("{}", join_lines(&.0.0))]
    Invalid(Diagnostics),
}

fn join_lines<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A successfully parsed file with the warnings found while checking it.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub document: Document,
    pub warnings: Diagnostics,
}

pub fn parse(text: &str) -> Result<Document, DslError> {
    parse_named(text, "<input>").map(|p| p.document)
}

/// Parses and checks `text`; `file` is used in source spans.
pub fn parse_named(text: &str, file: &str) -> Result<Parsed, DslError> {
    let ast = parser::parse_ast(text, file).map_err(DslError::Syntax)?;

    let model = build_model(&ast.name, &ast.decls).map_err(DslError::Invalid)?;

    let mut spans: HashMap<String, SourceSpan> = HashMap::new();
    let items = ast
        .regions
        .iter()
        .map(|(r, sp)| (format!("region {}", r.id), sp));
    let items = items.chain(
        ast.events
            .iter()
            .map(|(e, sp)| (format!("event {}", e.id), sp)),
    );
    let items = items.chain(
        ast.constraints
            .iter()
            .map(|(c, sp)| (format!("wap {}", c.warning_id), sp)),
    );
    let items = items.chain(
        ast.scenarios
            .iter()
            .map(|(s, sp)| (format!("scenario {}", s.name), sp)),
    );
    for (loc, span) in items {
        spans.entry(loc).or_insert_with(|| span.clone());
    }

    let mut behavior = ast.behavior;
    behavior.edges.sort();
    behavior.edges.dedup();
    let document = Document {
        model,
        partition: ChangePartition::new(ast.regions.into_iter().map(|(r, _)| r).collect()),
        dynamic: DynamicModel {
            events: ast.events.into_iter().map(|(e, _)| e).collect(),
        },
        behavior,
        constraints: ast.constraints.into_iter().map(|(c, _)| c).collect(),
        scenarios: ast.scenarios.into_iter().map(|(s, _)| s).collect(),
    };

    let diags: Diagnostics = document
        .check()
        .into_iter()
        .map(|d| {
            let span = d.span.clone().or_else(|| spans.get(&d.location).cloned());
            d.with_span(span)
        })
        .collect();
    if diags.has_errors() {
        return Err(DslError::Invalid(diags));
    }
    let mut warnings = validate(&document.model);
    warnings.extend(diags);
    Ok(Parsed { document, warnings })
}
