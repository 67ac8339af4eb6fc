mod support;

use num_traits::Signed;
use proptest::prelude::*;
use support::*;
use vspec_core::diagnostics::Span;
use vspec_core::expr::{Builtin, CmpOp, Expr, Lit, Quantifier, Truth};
use vspec_core::frontend::{load_program, parse_source, print_program, BinOp, SBinder, SExpr, SExprKind, SType, SurfaceDecl};
use vspec_core::scalar::rat;
use vspec_core::Rational;

fn sx(kind: SExprKind) -> SExpr {
    SExpr::new(kind, Span::default())
}

fn boxed(e: SExpr) -> Box<SExpr> {
    Box::new(e)
}

fn name() -> impl Strategy<Value = String> {
    prop_oneof![Just("a"), Just("b"), Just("f"), Just("xs"), Just("v1")].prop_map(str::to_string)
}

fn bin_op() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Cmp(CmpOp::Le)),
        Just(BinOp::Cmp(CmpOp::Lt)),
        Just(BinOp::Cmp(CmpOp::Eq)),
        Just(BinOp::Cmp(CmpOp::Gt)),
        Just(BinOp::Cmp(CmpOp::Ge)),
        Just(BinOp::And),
        Just(BinOp::Or),
        Just(BinOp::Implies),
    ]
}

/// Non-negative literal; the parser folds a leading minus into literals.
fn literal() -> impl Strategy<Value = SExprKind> {
    prop_oneof![
        (0u32..100).prop_map(|n| SExprKind::Num { value: rat(i64::from(n), 1), decimal: false }),
        (0i64..400, prop_oneof![Just(1i64), Just(2), Just(4), Just(8), Just(10), Just(100)])
            .prop_map(|(n, d)| SExprKind::Num { value: rat(n, d), decimal: true }),
        any::<bool>().prop_map(SExprKind::Bool),
    ]
}

fn surface_expr() -> impl Strategy<Value = SExpr> {
    let leaf = prop_oneof![name().prop_map(SExprKind::Var), literal()].prop_map(sx);
    leaf.prop_recursive(5, 40, 3, |inner| {
        let binder = (name(), prop::option::of(Just(SType::Rat)))
            .prop_map(|(name, ty)| SBinder { name, ty, loc: Default::default() });
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(SExprKind::Tensor),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| SExprKind::App(boxed(f), boxed(a))),
            (inner.clone(), inner.clone()).prop_map(|(t, i)| SExprKind::Index(boxed(t), boxed(i))),
            inner
                .clone()
                .prop_filter("literal under minus", |a| !matches!(a.kind, SExprKind::Num { .. }))
                .prop_map(|a| SExprKind::Neg(boxed(a))),
            inner.clone().prop_map(|a| SExprKind::Not(boxed(a))),
            (bin_op(), inner.clone(), inner.clone()).prop_map(|(op, l, r)| SExprKind::Bin(op, boxed(l), boxed(r))),
            (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, t, f)| SExprKind::If(boxed(c), boxed(t), boxed(f))),
            (
                prop_oneof![Just(Quantifier::Forall), Just(Quantifier::Exists)],
                prop::collection::vec(binder, 1..3),
                inner,
            )
                .prop_map(|(q, bs, body)| SExprKind::Quant(q, bs, boxed(body))),
        ]
        .prop_map(sx)
    })
}

fn program(body: SExpr) -> Vec<SurfaceDecl> {
    vec![
        SurfaceDecl::TypeSynonym {
            name: "V".into(),
            ty: SType::Tensor(Box::new(SType::Rat), vec![2, 3]),
            loc: Default::default(),
        },
        SurfaceDecl::Network {
            name: "n".into(),
            ty: SType::fun(SType::Named("V".into(), Default::default()), SType::Rat),
            loc: Default::default(),
        },
        SurfaceDecl::FunDef {
            name: "p".into(),
            sig: SType::fun(SType::Rat, SType::fun(SType::Rat, SType::Bool)),
            params: vec![("a".into(), Default::default()), ("b".into(), Default::default())],
            body,
            loc: Default::default(),
        },
    ]
}

/// Quantifiers may only sit under Prop connectives, If branches and other
/// quantifiers; If conditions must be Bool.
fn check_tags(e: &Expr, prop_context: bool) -> Result<(), String> {
    match e {
        Expr::Quant(_, _, body) => {
            if !prop_context {
                return Err(format!("quantifier outside a Prop context: {e:?}"));
            }
            check_tags(body, true)
        }
        Expr::Builtin(Builtin::If, args) => {
            let cond = &args[0];
            let bool_cond = match cond {
                Expr::Builtin(b, _) => b.truth() == Some(Truth::Bool),
                Expr::Lit(Lit::Bool(_)) | Expr::Var(_) | Expr::App(..) | Expr::Free(_) => true,
                _ => false,
            };
            if !bool_cond {
                return Err(format!("If condition is not Bool: {cond:?}"));
            }
            check_tags(cond, false)?;
            check_tags(&args[1], prop_context)?;
            check_tags(&args[2], prop_context)
        }
        Expr::Builtin(b, args) => {
            let keep = prop_context && b.truth() == Some(Truth::Prop) && !matches!(b, Builtin::Cmp(..));
            args.iter().try_for_each(|a| check_tags(a, keep))
        }
        Expr::Lam(_, body) => check_tags(body, prop_context),
        _ => e.children().into_iter().try_for_each(|c| check_tags(c, false)),
    }
}

fn quantified_source(outer: &Formula, inner: &Formula) -> String {
    format!(
        "{PRELUDE}p : Prop\np = forall (v0 v1 v2 v3 : Rat) . {} and (exists (w : Rat) . w <= v0 or {})\n",
        outer.render(),
        inner.render()
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(body in surface_expr()) {
        let decls = program(body);
        let text = print_program(&decls);
        let parsed = parse_source(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        prop_assert_eq!(&parsed, &decls, "{}", text);
        prop_assert_eq!(print_program(&parsed), text);
    }

    #[test]
    fn decimal_literals_round_trip(n in -100_000i64..100_000, k in 0u32..5) {
        let value = Rational::new(n.into(), 10i64.pow(k).into());
        let decls = program(sx(SExprKind::Num { value: value.abs(), decimal: true }));
        let text = print_program(&decls);
        let parsed = parse_source(&text).unwrap();
        let SurfaceDecl::FunDef { body, .. } = &parsed[2] else { panic!() };
        prop_assert_eq!(&body.kind, &SExprKind::Num { value: value.abs(), decimal: true });
        // a leading minus folds into the literal
        let src = text.replace(&format!("= {}", body), &format!("= -{}", body));
        let parsed = parse_source(&src).unwrap();
        let SurfaceDecl::FunDef { body, .. } = &parsed[2] else { panic!() };
        prop_assert_eq!(&body.kind, &SExprKind::Num { value: -value.abs(), decimal: true });
    }

    #[test]
    fn quantifiers_and_conditions_are_tagged(outer in formula(false), inner in formula(false)) {
        let src = quantified_source(&outer, &inner);
        let program = load_program(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        let (_, _, body) = program.defs().find(|(n, _, _)| *n == "p").unwrap();
        check_tags(body, true).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn typechecking_is_deterministic(p in formula(true)) {
        let src = property_source(&p, true);
        let first = load_program(&src).unwrap();
        for _ in 0..3 {
            prop_assert_eq!(&load_program(&src).unwrap(), &first);
        }
    }
}

#[test]
fn quantifier_under_bool_connective_is_rejected() {
    let src = "b : Rat -> Bool\nb x = x <= 1 and (forall (y : Rat) . y <= x)\n";
    assert!(load_program(src).is_err());
}

#[test]
fn tag_walk_rejects_a_buried_quantifier() {
    let q = Expr::Quant(
        Quantifier::Forall,
        vspec_core::expr::Binder::new("y", vspec_core::expr::VType::RAT),
        Box::new(Expr::bool(true)),
    );
    let e = Expr::Builtin(Builtin::And(Truth::Bool), vec![Expr::bool(true), q]);
    assert!(check_tags(&e, true).is_err());
}
