use g2t::bundled;
use g2t::model::{parse_model, ModelFile};
use proptest::prelude::*;

#[test]
fn bundled_models_round_trip() {
    for text in [bundled::EXAMPLE1, bundled::EXAMPLE2, bundled::EXAMPLE3] {
        let m = parse_model(text).unwrap();
        let printed = m.to_string();
        let again = parse_model(&printed).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn bundled_example1_differentials() {
    let m = parse_model(bundled::EXAMPLE1).unwrap();
    let g = m.algebra("g").unwrap();
    assert_eq!(g.basis_differential(3).to_string(), "e17");
    assert_eq!(g.basis_differential(4).to_string(), "e15 + e27");
    assert_eq!(g.basis_differential(6).to_string(), "e13");
}

fn model_text() -> impl Strategy<Value = String> {
    let dim = 3usize..12;
    dim.prop_flat_map(|n| {
        let term = (1usize..=n, 1usize..=n, 1usize..=n, -4i64..5, 1i64..4);
        (
            Just(n),
            proptest::collection::vec(term.clone(), 0..5),
            proptest::collection::vec(term, 0..4),
            proptest::collection::btree_set(1usize..=n, 1..3),
        )
    })
    .prop_map(|(n, diffs, form_terms, fiber)| {
        let idx = |i: usize| if n > 9 { format!("e{{{i}}}") } else { format!("e{i}") };
        let pair = |i: usize, j: usize| if n > 9 { format!("e{{{i},{j}}}") } else { format!("e{i}{j}") };
        let mut text = format!("algebra g dim {n}\n");
        for (k, i, j, c, _) in diffs {
            if i != j {
                text.push_str(&format!("  d {} = {c} {}\n", idx(k), pair(i.min(j), i.max(j))));
            }
        }
        let mut form = String::from("0");
        for (i, j, _, c, q) in form_terms {
            if i != j {
                form.push_str(&format!(" + {c}/{q} {}", pair(i, j)));
            }
        }
        text.push_str(&format!("form w on g = {form}\n"));
        let span: Vec<String> = fiber.into_iter().map(idx).collect();
        text.push_str(&format!("fiber a on g = span({})\n", span.join(", ")));
        text.push_str("task check-jacobi g\n");
        text
    })
}

proptest! {
    #[test]
    fn parse_print_parse_is_identity(text in model_text()) {
        // duplicate differential lines for one index are rejected; skip those inputs
        let parsed: Result<ModelFile, _> = parse_model(&text);
        prop_assume!(parsed.is_ok());
        let m = parsed.unwrap();
        let printed = m.to_string();
        let again = parse_model(&printed).unwrap();
        prop_assert_eq!(&again, &m);
        prop_assert_eq!(again.to_string(), printed);
    }
}
