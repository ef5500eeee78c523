use super::*;
use crate::expr::parse_poly;

fn q(k: i32) -> QScalar {
    QScalar::q_pow(k)
}

fn parse(p: &SpherePresentation, text: &str) -> NCPoly {
    parse_poly(text, p.alphabet()).unwrap()
}

fn vanishes(p: &SpherePresentation, e: &NCPoly) -> bool {
    p.normal_form(e).unwrap().is_zero()
}

#[test]
fn rho_layouts() {
    let odd: Vec<i32> = rho_twice(5).values().copied().collect();
    // indices -2..2 in ascending order
    assert_eq!(odd, vec![3, 1, 0, -1, -3]);
    let even: Vec<i32> = rho_twice(6).values().copied().collect();
    assert_eq!(even, vec![4, 2, 0, 0, -2, -4]);
    assert!(!rho_twice(4).contains_key(&0));
}

#[test]
fn radius_normalizations() {
    let one = QScalar::one();
    assert_eq!(build_sphere(3).unwrap().radius_sq(), &one);
    assert_eq!(build_sphere(4).unwrap().radius_sq(), &(&one + &q(2)));
    assert_eq!(build_sphere(5).unwrap().radius_sq(), &(&one + &q(3)).checked_div(&(&one + &q(1))).unwrap());
    assert_eq!(build_sphere(6).unwrap().radius_sq(), &(&one + &q(4)));
}

#[test]
fn dimension_below_three_is_rejected() {
    assert_eq!(build_sphere(2).unwrap_err(), PresentationError::Domain(2));
    assert_eq!(build_sphere(0).unwrap_err(), PresentationError::Domain(0));
}

#[test]
fn low_dimensional_commutators() {
    let s3 = build_sphere(4).unwrap();
    assert_eq!(s3.commutator(2).unwrap(), &parse(&s3, "(1-q^-2) x1* x1"));
    assert!(s3.commutator(1).unwrap().is_zero());

    let s4 = build_sphere(5).unwrap().with_unit_scales().unwrap();
    assert_eq!(s4.commutator(1).unwrap(), &parse(&s4, "(1-q^-1) x0^2"));

    let s2 = build_sphere(3).unwrap();
    let t = s2.gen(1, false);
    let ts = s2.gen(1, true);
    assert_eq!(s2.normal_form(&(&ts * &t)).unwrap(), parse(&s2, "1 - q x0 x0"));
    assert_eq!(s2.normal_form(&(&t * &ts)).unwrap(), parse(&s2, "1 - q^-1 x0 x0"));
}

#[test]
fn radius_identities() {
    let s5 = build_sphere(6).unwrap();
    assert!(vanishes(&s5, &parse(&s5, "x3* x3 + x2* x2 + x1* x1 - 1")));
    let s3 = build_sphere(4).unwrap();
    let r2 = s3.r_squared(2).unwrap();
    assert!(vanishes(&s3, &(&r2 - &parse(&s3, "(1+q^2)*(x2* x2 + x1* x1)"))));
    let s2 = build_sphere(3).unwrap();
    assert_eq!(s2.r_squared(0).unwrap(), parse(&s2, "x0^2"));
    assert!(s3.r_squared(0).is_err());
    assert!(s3.r_squared(3).is_err());
}

#[test]
fn radius_reduces_to_its_value() {
    for n in 3..=8 {
        let p = build_sphere(n).unwrap();
        let r2 = p.r_squared(p.rank()).unwrap();
        let diff = &r2 - &p.scalar(p.radius_sq().clone());
        assert!(vanishes(&p, &diff), "N = {n}");
    }
}

#[test]
fn critical_pairs_resolve() {
    for n in 3..=7 {
        let p = build_sphere(n).unwrap();
        let pairs = p.rules().critical_pairs();
        assert!(!pairs.is_empty());
        for triple in pairs {
            assert_eq!(p.rules().check_critical_pair(triple).unwrap(), None, "N = {n}, overlap {triple:?}");
        }
    }
}

#[test]
fn relations_vanish() {
    for n in 3..=6 {
        let p = build_sphere(n).unwrap();
        for (label, rel) in p.relations() {
            assert!(vanishes(&p, &rel), "N = {n}: {label}");
        }
    }
}

#[test]
fn metric_is_antidiagonal_power() {
    let p = build_sphere(5).unwrap();
    assert_eq!(p.metric_diag(2), Some(QScalar::s_pow(3)));
    assert_eq!(p.metric_diag(-1), Some(QScalar::s_pow(-1)));
    assert_eq!(p.metric_diag(0), Some(QScalar::one()));
    assert_eq!(p.rho(2), Some(num_rational::Ratio::new(-3, 2)));
}

#[test]
fn bundled_file_matches_builder() {
    let parsed = parse_presentation(S3Q_PRESENTATION).unwrap();
    assert_eq!(parsed, build_sphere(4).unwrap());
}

#[test]
fn text_round_trip() {
    for n in 3..=7 {
        let p = build_sphere(n).unwrap();
        let again = parse_presentation(&p.to_text()).unwrap();
        assert_eq!(again, p, "N = {n}\n{}", p.to_text());
    }
}

#[test]
fn file_errors() {
    assert!(matches!(parse_presentation("").unwrap_err(), PresentationError::Syntax { line: 1, column: 1, .. }));
    assert!(matches!(parse_presentation("# only a comment\n").unwrap_err(), PresentationError::Syntax { .. }));

    let raising = S3Q_PRESENTATION.replace("commutator 1 0", "commutator 1 x2* x2");
    match parse_presentation(&raising).unwrap_err() {
        PresentationError::Semantic { rule, .. } => assert_eq!(rule, "commutator 1"),
        e => panic!("unexpected {e:?}"),
    }

    let missing = S3Q_PRESENTATION.replace("swap x2* x1  q\n", "");
    match parse_presentation(&missing).unwrap_err() {
        PresentationError::Semantic { rule, .. } => assert_eq!(rule, "swap x2* x1"),
        e => panic!("unexpected {e:?}"),
    }

    let wrong_way = format!("{S3Q_PRESENTATION}swap x1 x2 q\n");
    assert!(matches!(parse_presentation(&wrong_way).unwrap_err(), PresentationError::Semantic { .. }));

    let bad_expr = S3Q_PRESENTATION.replace("radius 1+q^2", "radius 1+q^");
    match parse_presentation(&bad_expr).unwrap_err() {
        PresentationError::Syntax { line, column, .. } => {
            assert_eq!(line, 17);
            assert_eq!(column, 12);
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn unit_rescaling_keeps_coefficients_rational() {
    for n in 3..=7 {
        let p = build_sphere(n).unwrap();
        let u = p.with_unit_scales().unwrap();
        assert!(u.scales().values().all(QScalar::is_one));
        assert_ne!(u.algebra(), p.algebra());
        let r2 = u.r_squared(u.rank()).unwrap();
        assert!(vanishes(&u, &(&r2 - &u.scalar(u.radius_sq().clone()))));
    }
}
