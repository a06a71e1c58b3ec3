use std::path::PathBuf;

use cardproto::analyzer::{build_report, verify_security, Options};
use cardproto::deck::{Permutation, Scheme, Suit};
use cardproto::protocol::{
    equality_second, five_card_trick, Domain, LayoutItem, Pattern, ResultRule, Target,
};
use cardproto::script::{
    elaborate, load, parse, serialize, Branch, Header, ScriptDocument, Spanned, Statement,
};
use proptest::prelude::*;

fn script(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scripts")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn five_card_trick_script_matches_builtin() {
    let from_script = load(&script("five_card_trick.cardp")).unwrap();
    let builtin = five_card_trick().unwrap();
    let opts = Options::default();
    let a = build_report(&from_script, &opts, None).unwrap().to_json();
    let b = build_report(&builtin, &opts, None).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn equality_second_script_matches_builtin() {
    let from_script = load(&script("equality_second_3.cardp")).unwrap();
    let builtin = equality_second(3).unwrap();
    assert_eq!(from_script.body(), builtin.body());
    let opts = Options::default();
    let a = build_report(&from_script, &opts, None).unwrap().to_json();
    let b = build_report(&builtin, &opts, None).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn leaky_script_elaborates_and_fails_security() {
    let p = load(&script("leaky_and.cardp")).unwrap();
    let r = verify_security(&p, &Options::default()).unwrap();
    assert!(!r.pass);
    assert_eq!(r.violations[0].trace.to_string(), "1,2=CH");
}

#[test]
fn reference_scripts_round_trip() {
    for name in [
        "five_card_trick.cardp",
        "equality_second_3.cardp",
        "leaky_and.cardp",
    ] {
        let doc = parse(&script(name)).unwrap();
        let text = serialize(&doc);
        let again = parse(&text).unwrap();
        assert_eq!(doc, again, "{name}");
        assert_eq!(serialize(&again), text);
        assert_eq!(elaborate(&again).unwrap(), elaborate(&doc).unwrap());
    }
}

const CARDS: usize = 6;

fn at<T>(node: T) -> Spanned<T> {
    Spanned {
        node,
        line: 0,
        col: 0,
    }
}

fn perm() -> impl Strategy<Value = Permutation> {
    Just((0..CARDS).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|image| Permutation::from_image(image).unwrap())
}

fn slots() -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence((0..CARDS).collect::<Vec<_>>(), 1..=CARDS).prop_shuffle()
}

fn simple() -> impl Strategy<Value = Statement> {
    prop_oneof![
        perm().prop_map(Statement::Perm),
        proptest::collection::vec(perm(), 1..4).prop_map(Statement::Shuffle),
        (0..8usize, proptest::option::of(slots())).prop_map(|(r, on)| Statement::LShift { r, on }),
        (0..8usize, proptest::option::of(slots())).prop_map(|(r, on)| Statement::RShift { r, on }),
        slots().prop_map(Statement::RCut),
        (1..4usize, proptest::option::of(slots())).prop_map(|(k, on)| Statement::KSec { k, on }),
        proptest::option::of(slots()).prop_map(|on| Statement::XorAll { on }),
        slots().prop_map(Statement::PCut),
        slots().prop_map(Statement::Conceal),
        (-3i64..3).prop_map(|v| Statement::Output(ResultRule::Public(v))),
        (0..CARDS, 1..CARDS)
            .prop_map(|(a, d)| Statement::Output(ResultRule::Committed([a, (a + d) % CARDS]))),
        (slots(), any::<bool>()).prop_map(|(positions, heart)| {
            Statement::Output(ResultRule::Encoded {
                positions,
                scheme: if heart { Scheme::Heart } else { Scheme::Club },
            })
        }),
    ]
}

fn reveal(inner: BoxedStrategy<Vec<Spanned<Statement>>>) -> impl Strategy<Value = Statement> {
    (slots(), proptest::collection::vec(inner, 0..3)).prop_map(|(positions, bodies)| {
        let n = positions.len();
        // distinct exact patterns: binary expansions of 0, 1, 2 ...
        let branches = bodies
            .into_iter()
            .enumerate()
            .filter(|(i, _)| *i < (1 << n))
            .map(|(i, body)| {
                let suits: Vec<Suit> = (0..n)
                    .map(|b| {
                        if (i >> b) & 1 == 1 {
                            Suit::Heart
                        } else {
                            Suit::Club
                        }
                    })
                    .collect();
                at(Branch {
                    pattern: Pattern::exact(&suits),
                    body,
                })
            })
            .collect();
        Statement::Reveal {
            positions,
            branches,
        }
    })
}

fn body() -> impl Strategy<Value = Vec<Spanned<Statement>>> {
    let leaf = proptest::collection::vec(simple().prop_map(at), 0..4).boxed();
    leaf.prop_recursive(2, 24, 4, |inner| {
        proptest::collection::vec(prop_oneof![simple(), reveal(inner)].prop_map(at), 0..5).boxed()
    })
}

fn document() -> impl Strategy<Value = ScriptDocument> {
    body().prop_map(|body| ScriptDocument {
        header: at(Header {
            name: "generated".into(),
            params: vec![("n".into(), serde_json::json!(3))],
            domain: Domain::Bits { n: 3 },
            cards: CARDS,
            function: Target::Symmetric(vec![1, 0, 0, 1]),
            layout: vec![
                LayoutItem::Commit(0),
                LayoutItem::Commit(1),
                LayoutItem::Commit(2),
            ],
        }),
        body,
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(doc in document()) {
        let text = serialize(&doc);
        let parsed = parse(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(serialize(&parsed), text);
    }
}
