//! DSL and JSON round trips on the corpus and on generated documents.

mod common;

use proptest::prelude::*;
use serde_json::Value;
use tmkit::export::{from_json, to_json, JsonError};
use tmkit::{parse, serialize, Scenario, Tick, TimeValue};

use common::*;

#[test]
fn corpus_dsl_round_trip_is_identity() {
    for (entry, _, doc) in corpus() {
        let text = serialize(&doc);
        let back = parse(&text).unwrap_or_else(|e| panic!("{}: {e}\n{text}", entry.name));
        assert_eq!(back, doc, "{}", entry.name);
        assert_eq!(serialize(&back), text, "{}", entry.name);
    }
}

#[test]
fn corpus_json_round_trip_is_identity() {
    for (entry, _, doc) in corpus() {
        let json = to_json(&doc);
        let back = from_json(&json).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
        assert_eq!(back, doc, "{}", entry.name);
        assert_eq!(to_json(&back), json, "{}", entry.name);
    }
}

fn with_schema(json: &str, version: Option<Value>) -> String {
    let mut v: Value = serde_json::from_str(json).unwrap();
    let obj = v.as_object_mut().unwrap();
    match version {
        Some(x) => {
            obj.insert("tm_schema".to_string(), x);
        }
        None => {
            obj.remove("tm_schema");
        }
    }
    v.to_string()
}

#[test]
fn json_rejects_other_schema_versions() {
    let json = to_json(&corpus_doc("heart"));
    assert!(matches!(
        from_json(&with_schema(&json, Some(Value::from(2)))),
        Err(JsonError::SchemaVersionMismatch { .. })
    ));
    assert!(matches!(
        from_json(&with_schema(&json, None)),
        Err(JsonError::SchemaVersionMismatch { .. })
    ));
    assert!(matches!(
        from_json("{ nope"),
        Err(JsonError::MalformedJson(_))
    ));
}

#[test]
fn json_rejects_unknown_fields_and_bad_models() {
    let json = to_json(&corpus_doc("heart"));
    let mut v: Value = serde_json::from_str(&json).unwrap();
    v["extra"] = Value::from(1);
    assert!(matches!(
        from_json(&v.to_string()),
        Err(JsonError::MalformedJson(_))
    ));

    let mut v: Value = serde_json::from_str(&json).unwrap();
    v["flows"][0]["to"] = Value::from("Nowhere.receive");
    assert!(matches!(
        from_json(&v.to_string()),
        Err(JsonError::Invalid(_))
    ));
}

fn arb_document() -> impl Strategy<Value = tmkit::Document> {
    (
        1usize..=6,
        any::<u64>(),
        0.0f64..0.7,
        proptest::collection::vec((0u64..50, -5i32..30), 0..4),
    )
        .prop_map(|(n, seed, density, ticks)| {
            let mut r = rng(seed);
            let (mut doc, _) = random_document(&mut r, n, density);
            let mut times: Vec<u64> = ticks.iter().map(|(t, _)| *t).collect();
            times.sort();
            times.dedup();
            let ticks = times
                .iter()
                .zip(ticks.iter().map(|(_, m)| *m))
                .map(|(t, m)| Tick {
                    time: TimeValue::ms(*t),
                    measurements: [("level".to_string(), f64::from(m) / 4.0)]
                        .into_iter()
                        .collect(),
                    delays: [("E0".to_string(), TimeValue::us(u64::from(m.unsigned_abs())))]
                        .into_iter()
                        .collect(),
                })
                .collect::<Vec<_>>();
            if !ticks.is_empty() {
                doc.scenarios.push(Scenario {
                    name: "generated".to_string(),
                    ticks,
                });
            }
            doc
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_documents_round_trip(doc in arb_document()) {
        let text = serialize(&doc);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize(&back), text);

        let json = to_json(&doc);
        let back = from_json(&json).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(back, doc);
    }
}
