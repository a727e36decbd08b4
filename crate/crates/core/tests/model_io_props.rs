mod common;

use cegd::model_io::{
    parse_model, parse_model_bytes, parse_solve_report, DeclaredKind, Declaration, Located,
    ModelDocument, ParseErrorKind,
};
use common::{random_model, read_data, GenConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        Just(0.0),
        Just(1e-12),
        Just(-2.5e17),
        (0u32..1000).prop_map(|n| n as f64 / 1000.0),
    ]
}

fn declaration() -> impl Strategy<Value = Declaration> {
    prop_oneof![
        (0usize..50, ident()).prop_map(|(depth, var)| Declaration::Level { depth, var }),
        (ident(), any::<bool>()).prop_map(|(id, d)| Declaration::Node {
            id,
            kind: if d { DeclaredKind::Decision } else { DeclaredKind::Chance },
        }),
        (ident(), number()).prop_map(|(id, utility)| Declaration::Leaf { id, utility }),
        (
            ident(),
            ident(),
            proptest::option::of("[ -~]{0,8}"),
            proptest::option::of(number()),
            proptest::option::of(number()),
        )
            .prop_map(|(source, target, label, prob, util)| Declaration::Edge {
                source,
                target,
                label,
                prob,
                util,
            }),
        ident().prop_map(|id| Declaration::Root { id }),
        (ident(), ident()).prop_map(|(first, second)| Declaration::ExpectStage { first, second }),
    ]
}

proptest! {
    #[test]
    fn printing_then_parsing_round_trips(decls in proptest::collection::vec(declaration(), 0..20)) {
        // Keep the document free of duplicates, which the parser rejects.
        let mut seen = std::collections::HashSet::new();
        let decls: Vec<Declaration> = decls
            .into_iter()
            .filter(|d| match d {
                Declaration::Level { depth, var } => {
                    seen.insert(format!("depth {depth}")) && seen.insert(format!("var {var}"))
                }
                Declaration::Node { id, .. } | Declaration::Leaf { id, .. } => seen.insert(format!("id {id}")),
                Declaration::Root { .. } => seen.insert("root".to_string()),
                _ => true,
            })
            .collect();
        let doc = ModelDocument {
            declarations: decls
                .into_iter()
                .enumerate()
                .map(|(i, decl)| Located { line: i + 2, decl })
                .collect(),
        };
        let text = doc.to_string();
        let parsed = parse_model(&text).unwrap();
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..300)) {
        if let Err(errors) = parse_model_bytes(&bytes) {
            let lines = bytes.iter().filter(|&&b| b == b'\n').count() + 1;
            for e in errors.0 {
                prop_assert!(e.line >= 1 && e.line <= lines);
            }
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "(edge|node|leaf|level|root|expect-stage| |=|\"|[a-z0-9.#\\n])*") {
        let _ = parse_model(&text);
        let _ = parse_solve_report(&text);
    }
}

#[test]
fn generated_models_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let text = random_model(&mut rng, &GenConfig { edge_utilities: true, ..GenConfig::default() });
        let doc = parse_model(&text).unwrap();
        let again = parse_model(&doc.to_string()).unwrap();
        let decls = |d: &ModelDocument| d.iter().map(|l| l.decl.clone()).collect::<Vec<_>>();
        assert_eq!(decls(&again), decls(&doc));
    }
}

#[test]
fn worked_example_parses_cleanly() {
    let text = read_data("paper_example.ceg");
    let doc = parse_model(&text).unwrap();
    let count = |f: fn(&Declaration) -> bool| doc.iter().filter(|l| f(&l.decl)).count();
    assert_eq!(count(|d| matches!(d, Declaration::Level { .. })), 5);
    assert_eq!(count(|d| matches!(d, Declaration::Node { .. })), 25);
    assert_eq!(count(|d| matches!(d, Declaration::Leaf { .. })), 24);
    assert_eq!(count(|d| matches!(d, Declaration::Edge { .. })), 48);
    assert_eq!(count(|d| matches!(d, Declaration::Root { .. })), 1);
}

#[test]
fn every_error_is_reported() {
    let text = "node a kind=chance\nbogus line\nleaf a utility=1\nedge a b label=x prob=abc\nroot a\nroot a\n";
    let errors = parse_model(text).unwrap_err();
    let lines: Vec<usize> = errors.0.iter().map(|e| e.line).collect();
    assert_eq!(lines, [2, 3, 4, 6]);
    assert!(matches!(errors.0[0].kind, ParseErrorKind::UnknownKeyword(_)));
    assert!(matches!(errors.0[1].kind, ParseErrorKind::DuplicateDeclaration(_)));
    assert!(matches!(errors.0[2].kind, ParseErrorKind::Syntax(_)));
}

#[test]
fn scientific_notation_is_accepted() {
    let doc = parse_model("leaf a utility=1.5e3\n").unwrap();
    assert_eq!(
        doc.declarations[0].decl,
        Declaration::Leaf { id: "a".into(), utility: 1500.0 }
    );
}
