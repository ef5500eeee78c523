use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qsphere::sampling::{centrality_sample, random_element};
use qsphere::*;

fn scalar() -> impl Strategy<Value = QScalar> {
    (-4i64..=4, 1i64..=3, -3i32..=3, -2i64..=2, -2i32..=2).prop_map(|(a, d, k, b, j)| {
        let num = QScalar::ratio(a, d) * QScalar::s_pow(k) + QScalar::from_int(b) * QScalar::q_pow(j);
        let den = QScalar::one() + QScalar::from_int(b.max(1)) * QScalar::q_pow(j.abs() + 1);
        num.checked_div(&den).expect("denominator is nonzero")
    })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn field_laws(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in scalar(), b in scalar(), re in 0.3f64..0.95, im in -0.2f64..0.2) {
        let s0 = Complex64::new(re, im);
        if let (Ok(x), Ok(y)) = (a.eval(s0), b.eval(s0)) {
            prop_assert!(close((&a + &b).eval(s0).unwrap(), x + y));
            prop_assert!(close((&a * &b).eval(s0).unwrap(), x * y));
        }
    }

    #[test]
    fn scalar_display_round_trips(a in scalar()) {
        prop_assert_eq!(parse_scalar(&a.to_string()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_display_round_trips(n in 3usize..=6, seed in any::<u64>()) {
        let p = build_sphere(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_element(&p, &mut rng, 4, 5);
        prop_assert_eq!(parse_poly(&x.to_string(), p.alphabet()).unwrap(), x);
    }

    #[test]
    fn random_orders_agree(n in 3usize..=6, seed in any::<u64>()) {
        let p = build_sphere(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_element(&p, &mut rng, 4, 4);
        let a = p.rules().normal_form_with(&x, ReductionOrder::Random, &mut rng).unwrap();
        let b = p.rules().normal_form(&x).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normal_form_is_idempotent_and_linear(n in 3usize..=6, seed in any::<u64>()) {
        let p = build_sphere(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_element(&p, &mut rng, 4, 3);
        let y = random_element(&p, &mut rng, 4, 3);
        let nx = p.normal_form(&x).unwrap();
        prop_assert_eq!(p.normal_form(&nx).unwrap(), nx.clone());
        let ny = p.normal_form(&y).unwrap();
        prop_assert_eq!(p.normal_form(&(&x + &y)).unwrap(), &nx + &ny);
    }

    #[test]
    fn character_is_multiplicative(n in 3usize..=6, seed in any::<u64>()) {
        let p = build_sphere(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = p.normal_form(&random_element(&p, &mut rng, 3, 3)).unwrap();
        let y = p.normal_form(&random_element(&p, &mut rng, 3, 3)).unwrap();
        let xy = p.normal_form(&(&x * &y)).unwrap();
        prop_assert_eq!(character(&xy, &p).unwrap(), character(&x, &p).unwrap().mul(&character(&y, &p).unwrap()));
    }

    #[test]
    fn radius_is_central(n in 3usize..=7, seed in any::<u64>()) {
        let p = build_sphere(n).unwrap();
        prop_assert!(centrality_sample(&p, 4, 3, seed).unwrap().pass());
    }

    #[test]
    fn matrix_product_is_associative_and_adjoint_reverses(seed in any::<u64>(), dim in 1usize..=3) {
        let p = build_sphere(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = || NCMatrix::from_fn(p.algebra(), dim, dim, |_, _| random_element(&p, &mut rng, 2, 2));
        let (a, b, c) = (random(), random(), random());
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(a.mul(&b).unwrap().adjoint(), b.adjoint().mul(&a.adjoint()).unwrap());
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }
}
