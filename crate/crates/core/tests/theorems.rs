//! End-to-end checks of the main structural results on fixed inputs.

use std::collections::BTreeMap;

use num_traits::Zero;

use quiver_dmod::coeffs::{CycScalar, Rational};
use quiver_dmod::connections::{class_multiset_equal, one_dim_class};
use quiver_dmod::fourier::{gh_consistency, lft_infty_infty, LftInput};
use quiver_dmod::quivers::{
    classical_limit_curve, companion_normal_form, cover_from_normal_form, k_shift_classes,
    ks_normal_form, parse_quiver_file, random_valid_b, umm_ks_from_potential,
    verify_quiver_solution, Permutation, QuiverSpec,
};
use quiver_dmod::series::Series;
use quiver_dmod::virasoro::{build_l, build_l_deformed, string_identity_check};

fn string_fixture() -> quiver_dmod::quivers::QuiverFile {
    parse_quiver_file(include_str!("../fixtures/string-n3.quiver")).unwrap()
}

#[test]
fn companion_matrix_has_ks_normal_form() {
    let q = string_fixture();
    let cm = q.companion.unwrap();
    let nf = companion_normal_form(&cm, None, None).unwrap();
    assert!(nf.residue.is_zero());
    assert_eq!(nf.f, q.spec.f);
    assert!(class_multiset_equal(&nf.classes, &ks_normal_form(&q.spec).unwrap()));
}

#[test]
fn flat_sections_span_the_quiver_module() {
    let q = string_fixture();
    let cm = q.companion.unwrap();
    let nf = companion_normal_form(&cm, None, None).unwrap();
    let sheets = cover_from_normal_form(&cm, &nf, 12).unwrap();
    assert_eq!(sheets.len(), 3);
    for s in &sheets {
        let report = verify_quiver_solution(s, &s.spec(&cm.sigma), 12);
        assert!(report.ok(), "sheet {}: {:?}", s.root_twist, report.failures);
        assert_eq!(report.skipped, 0);
    }
}

#[test]
fn constant_shift_quivers_follow_the_shift_law() {
    // n = 5, σ(i) = i + 2; s = 1 keeps the top slots a 5-cycle.
    let sigma = Permutation::shift(5, 2);
    let cm = random_valid_b(&sigma, 1, 7);
    let nf = companion_normal_form(&cm, None, None).unwrap();
    assert_eq!(nf.shift, Some(2));
    assert_eq!(nf.shift_law, Some(true));
    let predicted = k_shift_classes(&nf.f, 5, 2).unwrap();
    assert!(class_multiset_equal(&nf.classes, &predicted));
}

#[test]
fn umm_spectral_curve_from_potential() {
    // t_3 = 1, t_5 = -1/5 gives f = -3z^2 + z^4.
    let t = BTreeMap::from([(3, Rational::from_integer(1.into())), (5, Rational::new((-1).into(), 5.into()))]);
    let spec = umm_ks_from_potential(&t).unwrap();
    assert_eq!(spec.f, "z^4 - 3*z^2".parse().unwrap());
    let curve = classical_limit_curve(&spec).unwrap();
    assert_eq!(curve.to_string(), "y^2 - z^8 + 6*z^6 - 9*z^4");
}

#[test]
fn fourier_transform_of_a_quadratic_potential() {
    // f = z^2: the stationary point of f(x) − zx gives λ̂ = (z/2)^{1/2}·√2 − 3/(4z).
    let f: Series = "z^2".parse().unwrap();
    for n in 1..=4u32 {
        for i in 0..n as i64 {
            let input = LftInput::new(f.clone(), i, n).unwrap();
            let out = lft_infty_infty(&input, 8).unwrap();
            assert_eq!(out.r, 2);
            assert_eq!(out.class.ram(), 2);
            assert_eq!(out.class.residue(), &CycScalar::from_frac(-3, 4));
            assert!(gh_consistency(&input, 8).unwrap());
        }
    }
}

#[test]
fn string_virasoro_constraints() {
    for n in 2..=4 {
        for k in 1..=2 {
            assert!(string_identity_check(n, k, 14, 3, 6).unwrap(), "n = {n}, k = {k}");
        }
    }
    // Without deformation the generator is the plain L_{jn}.
    let zero = Series::zero();
    assert_eq!(build_l_deformed(1, &zero, 2, 14).unwrap(), build_l(2, 14).unwrap());
}

#[test]
fn ks_classes_are_distinct_twists() {
    let spec = QuiverSpec::string(3, "z^2 + z".parse().unwrap());
    let classes = ks_normal_form(&spec).unwrap();
    assert_eq!(classes.len(), 3);
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            assert_ne!(a, b);
        }
    }
    assert!(classes.contains(&one_dim_class(&spec.f).unwrap()));
}
