//! Property tests: rendering a parsed tree and parsing it again must give
//! back the same tree, and arbitrary token soup must never panic.

use proptest::prelude::*;

use mathsem::mst::{parse, render, tokenize, MathTree, NodeKind, Span};

fn span() -> Span {
    Span::new(0, 0)
}

fn leaf() -> impl Strategy<Value = MathTree> {
    prop_oneof![
        prop_oneof![
            Just("a"),
            Just("b"),
            Just("x"),
            Just("y"),
            Just("z"),
            Just("alpha"),
            Just("beta"),
            Just("Theta"),
        ]
        .prop_map(|s| MathTree::new(NodeKind::Identifier(s.to_string()), span())),
        prop_oneof![Just("0"), Just("1"), Just("2"), Just("42"), Just("3.5")]
            .prop_map(|s| MathTree::new(NodeKind::Number(s.to_string()), span())),
    ]
}

/// Trees built only from constructs whose rendering is re-parse stable:
/// no operator atoms, no sequence-in-sequence, script bases kept atomic.
fn tree() -> impl Strategy<Value = MathTree> {
    leaf().prop_recursive(4, 48, 4, |inner| {
        let identifier = prop_oneof![Just("a"), Just("x"), Just("P"), Just("alpha")]
            .prop_map(|s| MathTree::new(NodeKind::Identifier(s.to_string()), span()));
        let scripted = (
            identifier.clone(),
            proptest::option::of(inner.clone()),
            inner.clone(),
        )
            .prop_map(|(base, sub, sup)| {
                MathTree::new(
                    NodeKind::Scripted {
                        base: Box::new(base),
                        sub: sub.map(Box::new),
                        sup: Some(Box::new(sup)),
                    },
                    span(),
                )
            });
        let fenced = inner.clone().prop_map(|body| {
            MathTree::new(
                NodeKind::Fenced {
                    open: '(',
                    close: ')',
                    body: Box::new(body),
                },
                span(),
            )
        });
        let sequence = proptest::collection::vec(
            prop_oneof![identifier.clone(), fenced.clone()],
            2..4,
        )
        .prop_map(|items| MathTree::new(NodeKind::Sequence(items), span()));
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(num, den)| MathTree::new(
                NodeKind::Frac {
                    num: Box::new(num),
                    den: Box::new(den),
                },
                span(),
            )),
            inner.clone().prop_map(|body| MathTree::new(
                NodeKind::Sqrt {
                    degree: None,
                    body: Box::new(body),
                },
                span(),
            )),
            (prop_oneof![Just('+'), Just('-'), Just('*'), Just('/')], inner.clone(), inner)
                .prop_map(|(op, left, right)| MathTree::new(
                    NodeKind::BinaryOp {
                        op,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    span(),
                )),
            scripted,
            fenced,
            sequence,
        ]
    })
}

proptest! {
    #[test]
    fn render_parse_round_trip(tree in tree()) {
        let rendered = render(&tree);
        let tokens = tokenize(&rendered).expect("rendered output must lex");
        let reparsed = parse(&tokens).expect("rendered output must parse");
        // equality is structural; spans are ignored
        prop_assert_eq!(&reparsed, &tree, "source: {}", rendered);
        // and rendering is a fixpoint from then on
        prop_assert_eq!(render(&reparsed), rendered);
    }

    #[test]
    fn lexer_and_parser_never_panic(input in "[ a-z0-9+*/^_{}()\\[\\]|<>=,.\\\\-]{0,40}") {
        if let Ok(tokens) = tokenize(&input) {
            let _ = parse(&tokens);
        }
    }

    #[test]
    fn accepted_soup_round_trips(
        fragments in proptest::collection::vec(
            prop_oneof![
                Just("x"), Just("2"), Just("+"), Just("-"), Just("^"), Just("_"),
                Just("{"), Just("}"), Just("("), Just(")"), Just(" "),
                Just("\\alpha"), Just("\\frac"), Just("\\sqrt"), Just("\\cos"),
            ],
            1..10,
        )
    ) {
        let source: String = fragments.concat();
        let Ok(tokens) = tokenize(&source) else { return Ok(()); };
        let Ok(tree) = parse(&tokens) else { return Ok(()); };
        let reparsed = parse(&tokenize(&render(&tree)).unwrap()).unwrap();
        prop_assert_eq!(reparsed, tree, "source: {:?}", source);
    }
}
