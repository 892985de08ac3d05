//! Print/reparse round trips over randomly generated expression trees.
//!
//! The printed form of a tree must parse back to something that evaluates
//! bit-identically on arbitrary states, including states where evaluation
//! fails (both sides must then fail). Trees are generated directly over
//! the AST so the printer, not the generator, decides parenthesization.

use proptest::prelude::*;

use lifespan_core::dsl::{parse_expression, BinOp, Expression, UnaryFn, VarSpec};

const N_VARS: usize = 3;

fn leaf() -> impl Strategy<Value = Expression<f64>> {
    prop_oneof![
        (-1.0e3..1.0e3f64).prop_map(Expression::Constant),
        prop_oneof![
            Just(0.0),
            Just(-0.0),
            Just(1.0),
            Just(-1.0),
            Just(2.25),
            Just(1.5e-8),
        ]
        .prop_map(Expression::Constant),
        (0..N_VARS).prop_map(Expression::Variable),
    ]
}

fn tree() -> impl Strategy<Value = Expression<f64>> {
    leaf().prop_recursive(5, 48, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expression::Neg(Box::new(e))),
            (0u8..6, inner.clone()).prop_map(|(k, e)| {
                let f = [
                    UnaryFn::Sin,
                    UnaryFn::Cos,
                    UnaryFn::Exp,
                    UnaryFn::Tanh,
                    UnaryFn::Sqrt,
                    UnaryFn::Abs,
                ][k as usize];
                Expression::Call(f, Box::new(e))
            }),
            (0u8..4, inner.clone(), inner.clone()).prop_map(|(k, a, b)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k as usize];
                Expression::Binary(op, Box::new(a), Box::new(b))
            }),
            (
                inner,
                prop_oneof![
                    Just(-3.0),
                    Just(-1.0),
                    Just(0.5),
                    Just(1.0),
                    Just(1.5),
                    Just(2.0),
                    Just(3.0),
                ]
            )
                .prop_map(|(b, e)| Expression::Power(Box::new(b), e)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn printed_trees_reparse_to_bit_identical_evaluation(
        expr in tree(),
        states in proptest::collection::vec(
            proptest::collection::vec(-2.0..2.0f64, N_VARS),
            8,
        ),
    ) {
        let printed = expr.to_string();
        let reparsed: Expression<f64> = parse_expression(&printed, &VarSpec::State(N_VARS))
            .unwrap_or_else(|e| panic!("printed form failed to parse: {e}\n  {printed}"));
        for u in &states {
            match (expr.eval(u), reparsed.eval(u)) {
                (Ok(a), Ok(b)) => prop_assert!(
                    a.to_bits() == b.to_bits(),
                    "{printed}\n  at {u:?}: {a:e} vs {b:e}"
                ),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(
                    false,
                    "{printed}\n  at {u:?}: one side failed, the other did not ({a:?} vs {b:?})"
                ),
            }
        }
    }

    #[test]
    fn evaluation_is_pure(expr in tree(), u in proptest::collection::vec(-2.0..2.0f64, N_VARS)) {
        let first = expr.eval(&u);
        let second = expr.eval(&u);
        match (first, second) {
            (Ok(a), Ok(b)) => prop_assert!(a.to_bits() == b.to_bits()),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "evaluation changed outcome between calls"),
        }
    }
}
