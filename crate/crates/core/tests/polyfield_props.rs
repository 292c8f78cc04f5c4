use proptest::prelude::*;

use polyflow::polyfield::{parse_system, Monomial, PolyVectorField, TriPolynomial};
use polyflow::Vec3;

fn poly(max_exp: u32, max_terms: usize) -> impl Strategy<Value = TriPolynomial> {
    prop::collection::vec((-3.0..3.0f64, 0..=max_exp, 0..=max_exp, 0..=max_exp), 0..max_terms).prop_map(|terms| {
        TriPolynomial::from_monomials(
            terms.into_iter().map(|(coefficient, a, b, c)| Monomial { coefficient, exponents: [a, b, c] }),
        )
    })
}

fn field() -> impl Strategy<Value = PolyVectorField> {
    (poly(2, 5), poly(2, 5), poly(2, 5)).prop_map(|(a, b, c)| PolyVectorField::from_components("p", [a, b, c]))
}

fn point() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn canonical_is_idempotent(p in poly(4, 8)) {
        let c = p.canonical();
        prop_assert_eq!(c.canonical(), c);
    }

    #[test]
    fn mixed_partials_commute(p in poly(4, 8)) {
        prop_assert_eq!(p.derivative(0).derivative(1), p.derivative(1).derivative(0));
        prop_assert_eq!(p.derivative(1).derivative(2), p.derivative(2).derivative(1));
    }

    #[test]
    fn print_then_parse_is_identity(f in field()) {
        let g = parse_system(&f.to_string()).unwrap();
        prop_assert_eq!(g.components(), f.components());
    }

    #[test]
    fn jacobian_matches_central_differences(f in field(), s in point(), d in point()) {
        let h = if d.norm() > 1e-3 { d.normalize() * 1e-4 } else { Vec3::new(1e-4, 0.0, 0.0) };
        let fd = (f.evaluate(&(s + h)) - f.evaluate(&(s - h))) / 2.0;
        let jh = f.jacobian_at(&s) * h;
        prop_assert!((fd - jh).norm() < 1e-6, "{:?} vs {:?}", fd, jh);
    }

    #[test]
    fn lie_derivative_is_gradient_dot_field(f in field(), s in point(), k in 0usize..3) {
        let g = f.component(k);
        let want = g.eval_gradient(&s).dot(&f.evaluate(&s));
        let got = f.lie_derivative(g).eval(&s);
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{} vs {}", got, want);
    }

    #[test]
    fn homogeneous_parts_sum_to_radial_polynomial(f in field()) {
        let p = f.radial_polynomial();
        let sum = p.homogeneous_components().values().fold(TriPolynomial::zero(), |acc, q| &acc + q);
        prop_assert_eq!(sum, p);
    }

    #[test]
    fn negation_is_an_involution(f in field()) {
        let g = f.negated().negated();
        prop_assert_eq!(g.components(), f.components());
    }
}
