//! Shared helpers for integration tests: independent oracles, random model
//! generators and corpus loading.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tmkit::corpus::{load_manifest, CorpusEntry};
use tmkit::{
    build_model, parse, validate, Cause, ChangePartition, Code, Decl, Document, DynamicModel,
    EventSpec, FlowEdge, PrecedenceDag, PrecedenceEdge, Region, StageId, StageKind, StaticModel,
};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every corpus entry with its source text and parsed document.
pub fn corpus() -> Vec<(CorpusEntry, String, Document)> {
    let dir = corpus_dir();
    let manifest = load_manifest(&dir).expect("manifest");
    manifest
        .entries
        .into_iter()
        .map(|e| {
            let text = fs::read_to_string(dir.join(&e.model)).expect("model file");
            let doc = parse(&text).unwrap_or_else(|err| panic!("{}: {err}", e.model));
            (e, text, doc)
        })
        .collect()
}

pub fn corpus_doc(name: &str) -> Document {
    corpus()
        .into_iter()
        .find(|(e, _, _)| e.name == name)
        .map(|(_, _, d)| d)
        .unwrap_or_else(|| panic!("no corpus entry {name}"))
}

/// All permutations of `items`, produced by plain recursion.
pub fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Brute-force linear extensions: every permutation that puts each pair's
/// first element before its second, sorted lexicographically.
pub fn brute_force_extensions(nodes: &[String], pairs: &[(String, String)]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = permutations(nodes)
        .into_iter()
        .filter(|perm| {
            let pos = |x: &String| perm.iter().position(|p| p == x).unwrap();
            pairs.iter().all(|(a, b)| pos(a) < pos(b))
        })
        .collect();
    out.sort();
    out
}

/// Floyd-Warshall closure over named nodes.
pub fn closure(nodes: &[String], pairs: &[(String, String)]) -> Vec<Vec<bool>> {
    let n = nodes.len();
    let idx = |x: &String| nodes.iter().position(|p| p == x).unwrap();
    let mut m = vec![vec![false; n]; n];
    for (a, b) in pairs {
        m[idx(a)][idx(b)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    m
}

/// Transitive reduction by pairwise reachability: keep `a -> b` iff `b` is
/// reachable from `a` and no third node sits between them.
pub fn reduction_oracle(nodes: &[String], pairs: &[(String, String)]) -> Vec<(String, String)> {
    let m = closure(nodes, pairs);
    let n = nodes.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if m[a][b] && !(0..n).any(|c| c != a && c != b && m[a][c] && m[c][b]) {
                out.push((nodes[a].clone(), nodes[b].clone()));
            }
        }
    }
    out.sort();
    out
}

/// A random DAG on `n` nodes named with `prefix`: a hidden random order
/// decides edge direction, each forward pair becomes an edge with
/// probability `density`.
pub fn random_pairs(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    n: usize,
    density: f64,
) -> (Vec<String>, Vec<(String, String)>) {
    let nodes: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let mut order = nodes.clone();
    order.shuffle(rng);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                pairs.push((order[i].clone(), order[j].clone()));
            }
        }
    }
    (nodes, pairs)
}

pub fn dag_from_pairs(nodes: &[String], pairs: &[(String, String)]) -> PrecedenceDag {
    PrecedenceDag::new(
        nodes.iter().cloned(),
        pairs.iter().map(|(a, b)| PrecedenceEdge {
            before: a.clone(),
            after: b.clone(),
            cause: Cause::Declared,
        }),
    )
    .expect("acyclic by construction")
}

/// A document whose region order realizes `pairs` over regions `R<i>`.
///
/// Each region is one thimac `T<i>` with create, receive, process, release
/// and transfer stages connected by legal internal flows. An order pair is
/// realized either as a cross flow `T<i>.transfer -> T<j>.receive` or as a
/// trigger `T<i>.release --> T<j>.create`. Region `R<i>` lifts to event `E<i>`.
pub fn random_document(
    rng: &mut ChaCha8Rng,
    n: usize,
    density: f64,
) -> (Document, Vec<(String, String)>) {
    let (_, index_pairs) = random_pairs(rng, "", n, density);
    let mut decls = Vec::new();
    for i in 0..n {
        let t = format!("T{i}");
        decls.push(Decl::thimac(&t, None));
        for kind in StageKind::ALL {
            decls.push(Decl::stage(&t, kind));
        }
        for (a, b) in [
            ("create", "process"),
            ("receive", "process"),
            ("process", "release"),
            ("release", "transfer"),
        ] {
            decls.push(Decl::flow(&format!("{t}.{a}"), &format!("{t}.{b}")));
        }
    }
    let mut region_pairs = Vec::new();
    for (a, b) in &index_pairs {
        if rng.random_bool(0.5) {
            decls.push(Decl::flow(
                &format!("T{a}.transfer"),
                &format!("T{b}.receive"),
            ));
        } else {
            decls.push(Decl::trigger(
                &format!("T{a}.release"),
                &format!("T{b}.create"),
                None,
            ));
        }
        region_pairs.push((format!("R{a}"), format!("R{b}")));
    }
    let model = build_model("random", &decls).expect("generated model builds");
    let regions = (0..n)
        .map(|i| {
            let t = format!("T{i}");
            Region::new(
                format!("R{i}"),
                StageKind::ALL.iter().map(|k| format!("{t}.{}", k.as_str())),
            )
        })
        .collect();
    let mut doc = Document::new(model);
    doc.partition = ChangePartition::new(regions);
    doc.dynamic = DynamicModel {
        events: (0..n)
            .map(|i| EventSpec::new(format!("E{i}"), format!("R{i}")))
            .collect(),
    };
    (doc, region_pairs)
}

/// The legality table written out as data, independent of the library.
pub fn legal_by_table(from: StageKind, to: StageKind, same_thimac: bool) -> bool {
    use StageKind::*;
    let same: [(StageKind, StageKind); 7] = [
        (Create, Process),
        (Create, Release),
        (Receive, Process),
        (Receive, Release),
        (Process, Create),
        (Process, Release),
        (Release, Transfer),
    ];
    let cross: [(StageKind, StageKind); 2] = [(Transfer, Transfer), (Transfer, Receive)];
    if same_thimac {
        same.contains(&(from, to))
    } else {
        cross.contains(&(from, to))
    }
}

pub fn region_event_map(doc: &Document) -> BTreeMap<String, String> {
    doc.dynamic.region_map()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Applies one random flow mutation: add a flow between two stages, or
/// move one end of an existing flow. Returns the mutated model and the
/// edge that changed.
pub fn mutate_flow(rng: &mut ChaCha8Rng, model: &StaticModel) -> (StaticModel, FlowEdge) {
    let stages: Vec<&StageId> = model.stages.keys().collect();
    let mut m = model.clone();
    loop {
        let pick = |rng: &mut ChaCha8Rng| stages[rng.random_range(0..stages.len())].clone();
        let edge = match rng.random_range(0..3) {
            0 if !m.flows.is_empty() => {
                let i = rng.random_range(0..m.flows.len());
                let e = FlowEdge {
                    from: m.flows[i].from.clone(),
                    to: pick(rng),
                };
                m.flows.remove(i);
                e
            }
            1 if !m.flows.is_empty() => {
                let i = rng.random_range(0..m.flows.len());
                let e = FlowEdge {
                    from: pick(rng),
                    to: m.flows[i].to.clone(),
                };
                m.flows.remove(i);
                e
            }
            _ => FlowEdge {
                from: pick(rng),
                to: pick(rng),
            },
        };
        if edge.from == edge.to || m.flows.contains(&edge) {
            m = model.clone();
            continue;
        }
        m.flows.push(edge.clone());
        m.flows.sort();
        return (m, edge);
    }
}

/// Whether `edge` breaks the legality table, judged from stage kinds and owners.
pub fn violates_table(model: &StaticModel, edge: &FlowEdge) -> bool {
    let (a, b) = (&model.stages[&edge.from], &model.stages[&edge.to]);
    !legal_by_table(a.kind, b.kind, a.owner == b.owner)
}

/// Whether `validate` reports `edge` as an illegal flow.
pub fn flagged_illegal(model: &StaticModel, edge: &FlowEdge) -> bool {
    let loc = format!("flow {} -> {}", edge.from, edge.to);
    validate(model)
        .iter()
        .any(|d| d.code == Code::IllegalFlow && d.location == loc)
}
