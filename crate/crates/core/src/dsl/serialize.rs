//! Canonical text output. Parsing the output yields the same document.

use std::fmt::Write as _;

use crate::document::Document;
use crate::model::{StaticModel, ThimacId};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_thimac(out: &mut String, model: &StaticModel, id: &ThimacId, depth: usize) {
    let Some(t) = model.thimacs.get(id) else {
        return;
    };
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}thimac {} {{", id.last_segment());
    for sid in &t.stages {
        let Some(stage) = model.stages.get(sid) else {
            continue;
        };
        let _ = write!(out, "{pad}  {}", stage.kind.as_str());
        if let Some(label) = &stage.label {
            let _ = write!(out, " {}", quote(label));
        }
        if let Some(anchor) = stage.anchor {
            let _ = write!(out, " @{anchor}");
        }
        out.push('\n');
    }
    for child in &t.children {
        write_thimac(out, model, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

/// Writes `doc` as `.tm` text. Sections are separated by blank lines and
/// omitted when empty; an empty model is the single header line.
pub fn serialize(doc: &Document) -> String {
    let model = &doc.model;
    let mut sections: Vec<String> = Vec::new();

    let mut s = String::new();
    for root in model.roots() {
        write_thimac(&mut s, model, &root.id, 0);
    }
    sections.push(s);

    let mut s = String::new();
    for f in &model.flows {
        let _ = writeln!(s, "flow {} -> {}", f.from, f.to);
    }
    for t in &model.triggers {
        let _ = write!(s, "trigger {} --> {}", t.from, t.to);
        if let Some(j) = &t.join {
            let _ = write!(s, " join {j}");
        }
        s.push('\n');
    }
    sections.push(s);

    let mut s = String::new();
    for r in &doc.partition.regions {
        let stages: Vec<&str> = r.stages.iter().map(|s| s.as_str()).collect();
        let _ = writeln!(s, "region {} {{ {} }}", r.id, stages.join(", "));
    }
    sections.push(s);

    let mut s = String::new();
    for e in &doc.dynamic.events {
        let _ = write!(s, "event {} region {}", e.id, e.region);
        if let Some(d) = e.duration {
            let _ = write!(s, " duration {d}");
        }
        s.push('\n');
    }
    sections.push(s);

    let b = &doc.behavior;
    if !b.is_empty() {
        let mut s = String::from("behavior {\n");
        for (from, to) in &b.edges {
            let _ = writeln!(s, "  {from} -> {to}");
        }
        for r in &b.repeats {
            let _ = writeln!(s, "  repeat {r}");
        }
        for br in &b.branches {
            let _ = writeln!(s, "  branch {} {{", br.at);
            let mut arms: Vec<String> = br
                .arms
                .iter()
                .map(|a| format!("    when {} -> {}", a.guard, a.to))
                .collect();
            if br.else_skip {
                arms.push("    else -> skip".to_string());
            }
            let _ = writeln!(s, "{}", arms.join(",\n"));
            s.push_str("  }\n");
        }
        s.push_str("}\n");
        sections.push(s);
    }

    let mut s = String::new();
    for c in &doc.constraints {
        let _ = writeln!(s, "wap {c}");
    }
    sections.push(s);

    for sc in &doc.scenarios {
        let mut s = format!("scenario {} {{\n", sc.name);
        for tick in &sc.ticks {
            if tick.measurements.is_empty() && tick.delays.is_empty() {
                let _ = writeln!(s, "  tick {} {{ }}", tick.time);
                continue;
            }
            let _ = writeln!(s, "  tick {} {{", tick.time);
            for (name, value) in &tick.measurements {
                let _ = writeln!(s, "    {name} = {value}");
            }
            for (event, d) in &tick.delays {
                let _ = writeln!(s, "    delay {event} {d}");
            }
            s.push_str("  }\n");
        }
        s.push_str("}\n");
        sections.push(s);
    }

    let mut out = format!("model {}\n", quote(&model.name));
    for section in sections.into_iter().filter(|s| !s.is_empty()) {
        out.push('\n');
        out.push_str(&section);
    }
    out
}
