//! Plain-text renderings of analysis results, shared by the CLI and the
//! corpus goldens.

use std::fmt::Write as _;

use crate::changes::{
    check_partition, classify_pair, ChangePartition, Chronologies, OrderClass, PrecedenceDag,
};
use crate::diagnostics::Diagnostics;
use crate::model::StaticModel;

/// One line per diagnostic, then `N errors, M warnings`.
pub fn diagnostics(diags: &Diagnostics) -> String {
    let mut out = String::new();
    for d in diags.iter() {
        let _ = writeln!(out, "{d}");
    }
    let _ = writeln!(
        out,
        "{} errors, {} warnings",
        diags.error_count(),
        diags.warning_count()
    );
    out
}

/// Region table with stage counts, unassigned stages and partition findings.
pub fn changes(model: &StaticModel, partition: &ChangePartition) -> String {
    let mut out = String::new();
    let width = partition
        .regions
        .iter()
        .map(|r| r.id.len())
        .max()
        .unwrap_or(0)
        .max(6);
    let _ = writeln!(out, "{:<width$}  stages", "region");
    for r in &partition.regions {
        let stages: Vec<&str> = r.stages.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "{:<width$}  {}", r.id, stages.join(", "));
    }
    let unassigned = partition.unassigned(model);
    if unassigned.is_empty() {
        out.push_str("unassigned: none\n");
    } else {
        let names: Vec<&str> = unassigned.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(out, "unassigned: {}", names.join(", "));
    }
    let findings = check_partition(model, partition);
    if findings.is_empty() {
        out.push_str("every region is connected and disjoint\n");
    } else {
        for d in findings.iter() {
            let _ = writeln!(out, "{d}");
        }
    }
    out
}

/// Numbered precedence edges with their cause, then the pair matrix:
/// `<` row before column, `>` row after column, `.` unordered.
pub fn order(dag: &PrecedenceDag) -> String {
    let mut out = String::new();
    out.push_str("edges:\n");
    for (i, e) in dag.edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "  {}. {} -> {} ({})",
            i + 1,
            e.before,
            e.after,
            e.cause
        );
    }
    if dag.edges().is_empty() {
        out.push_str("  none\n");
    }
    let nodes = dag.nodes();
    let width = nodes.iter().map(String::len).max().unwrap_or(0);
    out.push_str("matrix:\n");
    let _ = write!(out, "  {:width$}", "");
    for n in nodes {
        let _ = write!(out, " {n:>width$}");
    }
    out.push('\n');
    for a in nodes {
        let _ = write!(out, "  {a:<width$}");
        for b in nodes {
            let mark = match classify_pair(dag, a, b) {
                Ok(OrderClass::Before) => "<",
                Ok(OrderClass::After) => ">",
                _ => ".",
            };
            let _ = write!(out, " {mark:>width$}");
        }
        out.push('\n');
    }
    out
}

/// One comma-separated sequence per line, then `total: N`.
pub fn chronologies(ch: &Chronologies) -> String {
    let mut out = String::new();
    for seq in &ch.sequences {
        let _ = writeln!(out, "{}", seq.join(","));
    }
    let _ = writeln!(out, "total: {}", ch.total);
    out
}
