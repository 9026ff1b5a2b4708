use super::*;
use crate::exactnum::{q, qi, GenId};
use crate::testfn::Gaussian;
use num_rational::BigRational;
use proptest::prelude::*;

fn reg_with_gen() -> (Registry, GenId) {
    let r = Registry::new();
    let g = r
        .add_sqrt("s2", 2, BigRational::from_integer(1.into()), (-1).into(), "test")
        .unwrap();
    (r, g)
}

#[test]
fn merge_and_prune() {
    let r = Registry::new();
    let m = PointMeasure::finite(
        &r,
        [
            (SymbolicPoint::int(1), Weight::int(2)),
            (SymbolicPoint::int(0), Weight::one()),
            (SymbolicPoint::int(1), Weight::int(-2)),
        ],
    )
    .unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(m.atoms()[0].coord, SymbolicPoint::int(0));
}

#[test]
fn sorted_with_generators() {
    let (r, g) = reg_with_gen();
    let x = SymbolicPoint::generator(g); // ~0.4142
    let m = PointMeasure::finite(
        &r,
        [
            (SymbolicPoint::rational(q(1, 2)), Weight::one()),
            (x.clone(), Weight::one()),
            (SymbolicPoint::rational(q(2, 5)), Weight::one()),
        ],
    )
    .unwrap();
    let c: Vec<_> = m.atoms().iter().map(|a| a.coord.clone()).collect();
    assert_eq!(c[1], x);
    assert_eq!(m.atom_weight(&x), Weight::one());
    assert!(m.atom_weight(&SymbolicPoint::int(7)).is_exact_zero());
}

#[test]
fn translate_reflect_modulate() {
    let (r, g) = reg_with_gen();
    let x = SymbolicPoint::generator(g);
    let m = PointMeasure::finite(&r, [(SymbolicPoint::int(1), Weight::one()), (x.clone(), Weight::i())]).unwrap();
    let t = translate(&m, &x).unwrap();
    assert_eq!(t.atom_weight(&x.add(&x).unwrap()), Weight::i());
    let back = translate(&t, &x.neg()).unwrap();
    assert_eq!(back.atoms(), m.atoms());
    let rr = reflect(&reflect(&m));
    assert_eq!(rr.atoms(), m.atoms());
    let md = modulate(&m, &SymbolicPoint::rational(q(1, 4))).unwrap();
    let w = md.atom_weight(&SymbolicPoint::int(1)).to_c64();
    assert!((w - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    for a in md.atoms() {
        assert!((a.weight.abs() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn window_norm_integer_comb() {
    let r = Registry::new();
    let m = integer_comb(&r, 10, |_| Weight::one()).unwrap();
    let s = window_norm(&m, qi(1), qi(-10), qi(9)).unwrap();
    assert_eq!(s.sup_mass, 1.0);
    let s2 = window_norm(&m, q(3, 2), qi(-10), qi(8)).unwrap();
    assert_eq!(s2.sup_mass, 2.0);
    assert!(window_norm(&m, qi(1), qi(-10), qi(10)).is_err());
    assert_eq!(ball_mass(&m, qi(3)).unwrap(), 7.0);
}

#[test]
fn convolution_coverage() {
    let r = Registry::new();
    let comb = integer_comb(&r, 20, |_| Weight::one()).unwrap();
    let fin = PointMeasure::finite(
        &r,
        [(SymbolicPoint::rational(q(1, 2)), Weight::one()), (SymbolicPoint::int(-1), Weight::int(-1))],
    )
    .unwrap();
    let c = convolve(&comb, &fin).unwrap();
    assert_eq!(c.coverage(), Coverage::window(q(-39, 2), qi(19)));
    assert!(convolve_capped(&comb, &fin, 10).is_err());
}

#[test]
fn pair_full_measure() {
    let r = Registry::new();
    let m = integer_comb(&r, 40, |_| Weight::one()).unwrap().with_coverage(Coverage::All);
    let g = TestFunction::Gaussian(Gaussian::new(1.0));
    let p = pair(&m, &g);
    // sum_n e^{-pi n^2} = theta(1)
    assert!((p.value.re - 1.0864348112133080).abs() < 1e-14);
    assert_eq!(p.tail, Some(0.0));
}

#[test]
fn sample_convolution_matches_direct() {
    let r = Registry::new();
    let m = integer_comb(&r, 30, |k| Weight::int(k % 3)).unwrap();
    let g = TestFunction::Gaussian(Gaussian::new(2.0).centered(0.25));
    let s = sample_convolution(&m, &g, -3.0, 0.5, 13).unwrap();
    for (k, v) in s.values.iter().enumerate() {
        let t = -3.0 + 0.5 * k as f64;
        let direct: Complex64 = m.atoms().iter().map(|a| a.weight.to_c64() * g.eval(t - a.coord.approx(&r))).sum();
        assert!((v - direct).norm() < 1e-13);
    }
}

fn small_measure() -> impl Strategy<Value = Vec<(i64, i64, i64)>> {
    proptest::collection::vec((-20i64..20, 1i64..6, -5i64..5), 0..12)
}

fn build(r: &Registry, v: &[(i64, i64, i64)]) -> PointMeasure {
    PointMeasure::finite(r, v.iter().map(|&(n, d, w)| (SymbolicPoint::rational(q(n, d)), Weight::int(w)))).unwrap()
}

proptest! {
    #[test]
    fn combine_is_linear(a in small_measure(), b in small_measure()) {
        let r = Registry::new();
        let (m, n) = (build(&r, &a), build(&r, &b));
        let s = sub(&add(&m, &n).unwrap(), &n).unwrap();
        prop_assert_eq!(s.atoms(), m.atoms());
    }

    #[test]
    fn convolution_mass_multiplies(a in small_measure(), b in small_measure()) {
        let r = Registry::new();
        let (m, n) = (build(&r, &a), build(&r, &b));
        let c = convolve(&m, &n).unwrap();
        let tot = |x: &PointMeasure| x.atoms().iter().map(|a| a.weight.to_c64().re).sum::<f64>();
        prop_assert!((tot(&c) - tot(&m) * tot(&n)).abs() < 1e-9);
        prop_assert!(total_variation(&c) <= total_variation(&m) * total_variation(&n) + 1e-9);
    }

    #[test]
    fn sorted_strictly(a in small_measure()) {
        let r = Registry::new();
        let m = build(&r, &a);
        let o = m.order();
        for w in m.atoms().windows(2) {
            prop_assert_eq!(o.cmp(&w[0].coord, &w[1].coord), std::cmp::Ordering::Less);
        }
    }
}
