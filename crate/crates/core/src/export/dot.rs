use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{ExportOptions, RankDir, Target};
use crate::document::{AnalysisError, Document};
use crate::events::BehaviorModel;
use crate::model::{Stage, StaticModel, ThimacId};

const REGION_COLORS: [&str; 8] = [
    "#fde2e4", "#e2ece9", "#dfe7fd", "#fff1e6", "#e8e8e4", "#f0efeb", "#d8e2dc", "#eae4e9",
];

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(out: &mut String, name: &str, opts: &ExportOptions) {
    let _ = writeln!(out, "digraph {} {{", quote(name));
    let rankdir = match opts.rankdir {
        RankDir::LR => "LR",
        RankDir::TB => "TB",
    };
    let _ = writeln!(out, "  rankdir={rankdir};");
    out.push_str("  compound=true;\n");
}

fn stage_label(stage: &Stage, opts: &ExportOptions) -> String {
    let mut label = stage.kind.as_str().to_string();
    if opts.show_anchors {
        if let Some(a) = stage.anchor {
            let _ = write!(label, " ({a})");
        }
    }
    if let Some(text) = &stage.label {
        label.push('\n');
        label.push_str(text);
    }
    label
}

fn stage_node(out: &mut String, pad: &str, stage: &Stage, opts: &ExportOptions) {
    let _ = writeln!(
        out,
        "{pad}{} [shape=box, label={}];",
        quote(stage.id.as_str()),
        quote(&stage_label(stage, opts))
    );
}

fn thimac_cluster(
    out: &mut String,
    model: &StaticModel,
    id: &ThimacId,
    depth: usize,
    opts: &ExportOptions,
) {
    let Some(t) = model.thimacs.get(id) else {
        return;
    };
    let pad = "  ".repeat(depth + 1);
    let _ = writeln!(out, "{pad}subgraph {} {{", quote(&format!("cluster_{id}")));
    let _ = writeln!(out, "{pad}  label={};", quote(&t.name));
    for sid in &t.stages {
        if let Some(stage) = model.stages.get(sid) {
            stage_node(out, &format!("{pad}  "), stage, opts);
        }
    }
    for child in &t.children {
        thimac_cluster(out, model, child, depth + 1, opts);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn edges(out: &mut String, model: &StaticModel) {
    for f in &model.flows {
        let _ = writeln!(
            out,
            "  {} -> {};",
            quote(f.from.as_str()),
            quote(f.to.as_str())
        );
    }
    for t in &model.triggers {
        let label = t
            .join
            .as_ref()
            .map(|j| format!(", label={}", quote(&format!("join {j}"))))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  {} -> {} [style=dashed{label}];",
            quote(t.from.as_str()),
            quote(t.to.as_str())
        );
    }
}

fn static_dot(doc: &Document, opts: &ExportOptions) -> String {
    let model = &doc.model;
    let mut out = String::new();
    header(&mut out, &model.name, opts);
    for root in model.roots() {
        thimac_cluster(&mut out, model, &root.id, 0, opts);
    }
    edges(&mut out, model);
    out.push_str("}\n");
    out
}

fn dynamic_dot(doc: &Document, opts: &ExportOptions) -> String {
    let model = &doc.model;
    let events = doc.dynamic.region_map();
    let mut out = String::new();
    header(&mut out, &model.name, opts);
    let mut placed = BTreeSet::new();
    for (i, region) in doc.partition.regions.iter().enumerate() {
        let title = match events.get(&region.id) {
            Some(event) => format!("{} / {event}", region.id),
            None => region.id.clone(),
        };
        let _ = writeln!(
            out,
            "  subgraph {} {{",
            quote(&format!("cluster_{}", region.id))
        );
        let _ = writeln!(out, "    label={};", quote(&title));
        out.push_str("    style=filled;\n");
        let _ = writeln!(
            out,
            "    fillcolor={};",
            quote(REGION_COLORS[i % REGION_COLORS.len()])
        );
        for sid in &region.stages {
            if let Some(stage) = model.stages.get(sid) {
                if placed.insert(sid) {
                    stage_node(&mut out, "    ", stage, opts);
                }
            }
        }
        out.push_str("  }\n");
    }
    for (sid, stage) in &model.stages {
        if !placed.contains(sid) {
            stage_node(&mut out, "  ", stage, opts);
        }
    }
    edges(&mut out, model);
    out.push_str("}\n");
    out
}

/// Events as nodes; order edges solid, branch arms bold with their guard,
/// repeated events with a self-loop.
pub fn behavior_to_dot(name: &str, behavior: &BehaviorModel, opts: &ExportOptions) -> String {
    let mut out = String::new();
    header(&mut out, name, opts);
    for e in &behavior.events {
        let _ = writeln!(out, "  {} [shape=ellipse];", quote(e));
    }
    let arms: BTreeSet<(&str, &str)> = behavior
        .branches
        .iter()
        .flat_map(|b| b.arms.iter().map(move |a| (b.at.as_str(), a.to.as_str())))
        .collect();
    for (a, b) in &behavior.edges {
        if !arms.contains(&(a.as_str(), b.as_str())) {
            let _ = writeln!(out, "  {} -> {};", quote(a), quote(b));
        }
    }
    for r in &behavior.repeats {
        let _ = writeln!(out, "  {} -> {} [label=\"repeat\"];", quote(r), quote(r));
    }
    for br in &behavior.branches {
        for arm in &br.arms {
            let _ = writeln!(
                out,
                "  {} -> {} [style=bold, label={}];",
                quote(&br.at),
                quote(&arm.to),
                quote(&arm.guard.to_string())
            );
        }
    }
    out.push_str("}\n");
    out
}

/// Renders the selected view of `doc`. The behavior view derives the event
/// order first, which fails when the change order does.
pub fn to_dot(doc: &Document, opts: &ExportOptions) -> Result<String, AnalysisError> {
    Ok(match opts.target {
        Target::Static => static_dot(doc, opts),
        Target::Dynamic => dynamic_dot(doc, opts),
        Target::Behavior => {
            let behavior = doc.behavior_model(true)?;
            behavior_to_dot(&doc.model.name, &behavior, opts)
        }
    })
}
