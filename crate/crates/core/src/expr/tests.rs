use super::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(s: &str, n: usize) -> Expr {
    parse(s, n).unwrap()
}

#[test]
fn grammar_cases() {
    let e = p("z1^2 + conj(z1)", 1);
    assert_eq!(e, Expr::z(0).powi(2).add(&Expr::zb(0)));
    assert!(p("0", 3).is_zero());
    let g = p("exp(-(z1*zb1))", 1);
    assert!(matches!(g.node(), Node::Exp(_)));
    assert_eq!(g, Expr::z(0).mul(&Expr::zb(0)).neg().exp());
}

#[test]
fn complex_literals() {
    assert_eq!(p("2+3i", 1).as_const(), Some(c(2.0, 3.0)));
    assert_eq!(p("-i", 1).as_const(), Some(c(0.0, -1.0)));
    assert_eq!(p("1.5e2", 1).as_const(), Some(c(150.0, 0.0)));
    assert_eq!(p("2i*z1", 1), Expr::z(0).scale(c(0.0, 2.0)));
}

#[test]
fn parse_errors_carry_columns() {
    assert_eq!(parse("z1 + w2", 2), Err(ParseError::UnknownVariable { column: 6, name: "w2".into() }));
    assert_eq!(parse("z3", 2), Err(ParseError::IndexOutOfRange { column: 1, name: "z3".into(), dim: 2 }));
    assert!(matches!(parse("z1 +* z2", 2), Err(ParseError::Syntax { column: 5, .. })));
    assert!(matches!(parse("(z1", 1), Err(ParseError::Syntax { column: 4, .. })));
    assert!(matches!(parse("z1^1.5", 1), Err(ParseError::Syntax { column: 4, .. })));
    assert!(matches!(parse("z1 $", 1), Err(ParseError::Syntax { column: 4, .. })));
}

#[test]
fn derivative_examples() {
    let z = Expr::z(0);
    assert_eq!(z.powi(2).d_z(0), z.scale(c(2.0, 0.0)));
    assert!(z.d_zbar(0).is_zero());
    assert_eq!(z.mul(&Expr::zb(0)).d_z(0), Expr::zb(0));
}

#[test]
fn eval_examples() {
    let e = p("z1*zb1", 1);
    assert_eq!(e.eval(&[c(1.0, 1.0)]).unwrap(), c(2.0, 0.0));
    assert_eq!(p("exp(-z1*zb1)", 1).eval(&[c(0.0, 0.0)]).unwrap(), c(1.0, 0.0));
    let d = p("z1^3", 1).d_z(0);
    let v = d.eval(&[c(2.0, 0.0)]).unwrap();
    assert_eq!(v, c(12.0, 0.0));
    let h = 1e-5;
    let f = |x: f64| x * x * x;
    let fd = (f(2.0 + h) - f(2.0 - h)) / (2.0 * h);
    assert!((v.re - fd).abs() / fd < 1e-6);
}

#[test]
fn reciprocal_of_zero_is_an_error() {
    let e = p("1/z1", 1);
    assert_eq!(e.eval(&[c(0.0, 0.0)]), Err(EvalError::ReciprocalOfZero));
    let t = Tape::compile(&[e]);
    assert_eq!(t.eval_vec(&[c(0.0, 0.0)]), Err(EvalError::ReciprocalOfZero));
    assert_eq!(p("exp(z1)", 1).eval(&[c(1e4, 0.0)]), Err(EvalError::Overflow));
}

#[test]
fn conj_examples() {
    assert_eq!(Expr::z(0).conj(), Expr::zb(0));
    let r = p("z1*zb1", 1);
    assert_eq!(r.conj(), r);
    assert_eq!(p("i*z1", 1).conj(), Expr::zb(0).scale(c(0.0, -1.0)));
}

#[test]
fn like_terms_merge_and_cancel() {
    let e = p("z1*zb1 - zb1*z1 + 2*z2 - z2 - z2", 2);
    assert!(e.is_zero());
    let q = p("(z1 + 1)/(z1 + 1)", 1);
    assert!(q.is_one());
    let x = p("(z1+z2)^2", 2);
    assert_eq!(x, p("z1^2 + 2*z1*z2 + z2^2", 2));
    let r = p("(1 + z1*zb1)^-2 * (1 + z1*zb1)^-1", 1);
    assert_eq!(r, p("(1 + z1*zb1)^-3", 1));
    let s = p("(1 + z1*zb1) * (1 + z1*zb1)^-2", 1);
    assert_eq!(s, p("(1 + z1*zb1)^-1", 1));
}

#[test]
fn exponential_derivative_is_exact() {
    let e = p("exp(-2*z1*zb1)", 1);
    let d = e.d_zbar(0);
    assert_eq!(d, p("-2*z1*exp(-2*z1*zb1)", 1));
}

#[test]
fn tape_matches_tree_evaluation() {
    let exprs: Vec<Expr> = ["z1*zb2 + exp(z1)", "(1 + z1*zb1 + z2*zb2)^-2*z2", "3", "zb1^3 - z2"]
        .iter()
        .map(|s| p(s, 2))
        .collect();
    let t = Tape::compile(&exprs);
    let z = [c(0.3, -0.7), c(1.1, 0.4)];
    let got = t.eval_vec(&z).unwrap();
    for (e, g) in exprs.iter().zip(got) {
        assert!((e.eval(&z).unwrap() - g).norm() < 1e-14);
    }
}

#[test]
fn polynomial_coefficients_extracts_monomials() {
    let e = p("3*z1*z2^2 + z1 - 2", 2);
    let m = e.polynomial_coefficients(2).unwrap();
    assert_eq!(m[&vec![1, 2]], c(3.0, 0.0));
    assert_eq!(m[&vec![0, 0]], c(-2.0, 0.0));
    assert!(p("zb1", 1).polynomial_coefficients(1).is_none());
}

/// Fifty expressions of the kind that appear in scenario files.
const CORPUS: &[&str] = &[
    "z1", "zb1", "0", "1", "-1", "2.5", "i", "-2i", "3+4i", "z1^2",
    "z1^-1", "z1*zb1", "exp(-z1*zb1)", "exp(-(z1*zb1))", "z1^2 - 1", "z1^3/3 - z1", "z1*z2^3", "z1^5/5 + z2^5/5",
    "(z1 + z2)^3", "1/(1 + z1*zb1)", "(z1*zb1 + z2*zb2)^-2*zb1", "conj(z1^2 + i*z2)", "z1*(z2 - 2i)",
    "exp(z1)*exp(zb1)", "-z1^4", "0.1*z1 + 0.2*z2 - 0.3", "1e-3*z1", "(2-3i)*z1*zb2", "z1^2*z2^4",
    "z1 - z1", "exp(0)", "z1/z2", "(z1 - 1)^-3", "z1*exp(-2*z1*zb1)", "z1^8", "z1*z2*z3",
    "z1^2 + z2^2 + z3^2", "(1 + z1*zb1 + z2*zb2 + z3*zb3)^-1", "zb3*z3^2", "exp(-z1*zb1 - z2*zb2)",
    "-(z1 + z2)", "z1 + 2*z1", "((z1))", "+z2", "z1 - -z2", "i*i", "z1^0", "(z1 + 1)^2*(z1 - 1)^-1",
    "3*exp(z1^2)^2", "conj(exp(i*z1))",
];

#[test]
fn corpus_round_trips() {
    assert_eq!(CORPUS.len(), 50);
    for s in CORPUS {
        let e = p(s, 3);
        let printed = e.to_string();
        let again = parse(&printed, 3).unwrap_or_else(|err| panic!("{s} -> {printed}: {err}"));
        assert_eq!(again, e, "{s} -> {printed}");
        assert_eq!(again.to_string(), printed);
    }
}

fn arb_expr(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..n, any::<bool>()).prop_map(|(i, cj)| if cj { Expr::zb(i) } else { Expr::z(i) }),
        (-3i32..4, -2i32..3).prop_map(|(a, b)| Expr::constant(Complex64::new(a as f64 / 2.0, b as f64))),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), 1i32..3).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a.scale(Complex64::new(0.25, 0.0)).exp()),
            inner.prop_map(|a| a.conj()),
        ]
    })
}

fn arb_point(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normal_form_is_idempotent(e in arb_expr(2)) {
        let again = parse(&e.to_string(), 2).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(Expr::sum([again.clone()]), again);
    }

    #[test]
    fn mixed_partials_commute(e in arb_expr(2), i in 0usize..2, j in 0usize..2) {
        prop_assert_eq!(e.d_z(i).d_z(j), e.d_z(j).d_z(i));
        prop_assert_eq!(e.d_zbar(i).d_zbar(j), e.d_zbar(j).d_zbar(i));
        prop_assert_eq!(e.d_z(i).d_zbar(j), e.d_zbar(j).d_z(i));
    }

    #[test]
    fn conj_swaps_derivatives(e in arb_expr(2), i in 0usize..2) {
        prop_assert_eq!(e.conj().d_zbar(i), e.d_z(i).conj());
    }

    #[test]
    fn holomorphic_expressions_have_no_dbar(e in arb_expr(2), i in 0usize..2) {
        let h = e.substitute(&[Expr::z(0), Expr::z(1)]);
        let _ = h.clone();
        if e.is_holomorphic() {
            prop_assert!(e.d_zbar(i).is_zero());
        }
    }

    #[test]
    fn leibniz_rule(a in arb_expr(2), b in arb_expr(2), z in arb_point(2), i in 0usize..2) {
        let lhs = a.mul(&b).d_z(i);
        let rhs = a.d_z(i).mul(&b).add(&a.mul(&b.d_z(i)));
        let (l, r) = (lhs.eval(&z).unwrap(), rhs.eval(&z).unwrap());
        prop_assert!(close(l, r, 1e-10), "{} vs {}", l, r);
    }

    #[test]
    fn conj_evaluates_to_conjugate(e in arb_expr(2), z in arb_point(2)) {
        let a = e.conj().eval(&z).unwrap();
        let b = e.eval(&z).unwrap().conj();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn derivatives_match_finite_differences(e in arb_expr(2), z in arb_point(2), i in 0usize..2) {
        // d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2
        let h = 1e-5;
        let shift = |dz: Complex64| {
            let mut w = z.clone();
            w[i] += dz;
            e.eval(&w).unwrap()
        };
        let dx = (shift(Complex64::new(h, 0.0)) - shift(Complex64::new(-h, 0.0))) / (2.0 * h);
        let dy = (shift(Complex64::new(0.0, h)) - shift(Complex64::new(0.0, -h))) / (2.0 * h);
        let i_unit = Complex64::i();
        let fz = (dx - i_unit * dy) / 2.0;
        let fzb = (dx + i_unit * dy) / 2.0;
        prop_assert!(close(e.d_z(i).eval(&z).unwrap(), fz, 1e-6));
        prop_assert!(close(e.d_zbar(i).eval(&z).unwrap(), fzb, 1e-6));
    }
}
