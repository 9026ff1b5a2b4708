use super::*;
use crate::exactnum::{q, qi};
use crate::fourier::{duality_residual, shifted_gaussian_family, Lambda};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};

fn random_comb(m: usize, seed: u64) -> PeriodicComb {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = (0..m * m)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    PeriodicComb::new(m, w).unwrap()
}

fn setup() -> (Registry, SymbolicPoint, SymbolicPoint) {
    let reg = Registry::new();
    let bound = BigRational::new(1.into(), 2.into());
    let a = SymbolicPoint::generator(reg.add_small_sqrt("a", &bound, "t").unwrap());
    let b = SymbolicPoint::generator(reg.add_small_sqrt("b", &bound, "t").unwrap());
    (reg, a, b)
}

fn omega(reg: &Registry, a: &SymbolicPoint, b: &SymbolicPoint) -> PointMeasure {
    PointMeasure::finite(
        reg,
        [
            (SymbolicPoint::zero(), Weight::one()),
            (a.clone(), Weight::one()),
            (b.clone(), Weight::one()),
            (a.add(b).unwrap(), Weight::int(-1)),
        ],
    )
    .unwrap()
}

fn check(mu: &Term, reg: &Registry, tol: f64) {
    let claimed = mu.fourier().unwrap();
    let r = duality_residual(mu, &claimed, &shifted_gaussian_family(), reg).unwrap();
    assert!(r.max_residual() <= tol, "{r:?}");
    assert!(r.max_tail() <= 1e-12, "{r:?}");
}

#[test]
fn comb_transform_passes_oracle() {
    let (reg, _, _) = setup();
    check(&Term::comb(random_comb(4, 1)), &reg, 1e-10);
}

#[test]
fn translation_and_modulation_rules() {
    let (reg, a, _) = setup();
    let c = Term::comb(random_comb(3, 2));
    check(&c.clone().translate(a.clone()), &reg, 1e-9);
    check(&c.clone().translate(SymbolicPoint::rational(q(1, 3))), &reg, 1e-9);
    check(&c.clone().modulate(a.clone()), &reg, 1e-9);
    check(&c.reflect().translate(a.neg()), &reg, 1e-9);
}

#[test]
fn convolution_and_product_rules() {
    let (reg, a, b) = setup();
    let w = FiniteSrc::explicit(omega(&reg, &a, &b)).unwrap();
    let c = Term::comb(random_comb(4, 3));
    let conv = Term::convolve(w.clone(), c.clone());
    check(&conv, &reg, 1e-9);
    check(&Term::multiply(w, c), &reg, 1e-9);
}

#[test]
fn eigen_tag_is_symbolic() {
    let c = PeriodicComb::lattice(1).tagged(Some(Lambda::One));
    match Term::comb(c).fourier().unwrap() {
        Term::Scale(inner, w) => {
            assert!(matches!(*inner, Term::Comb(_)));
            assert_eq!(w, Weight::one());
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(Term::measure(PointMeasure::empty(&Registry::new())).fourier().is_err());
}

#[test]
fn exact_atom_weights_through_shapes() {
    let (reg, a, _) = setup();
    let order = PointOrder::new(&reg);
    let c = Term::comb(PeriodicComb::lattice(2));
    let t = c.clone().translate(a.neg()).sub(c.clone());
    // atom of delta_{2Z} at 4, moved to 4 - a
    let p = SymbolicPoint::int(4).sub(&a).unwrap();
    assert_eq!(t.atom_weight(&p, &order).unwrap(), Weight::one());
    assert_eq!(t.atom_weight(&SymbolicPoint::int(4), &order).unwrap(), Weight::int(-1));
    assert!(t.atom_weight(&a, &order).unwrap().is_exact_zero());
    // quarter-turn phases stay exact
    let m = c.modulate(SymbolicPoint::rational(q(1, 8)));
    assert_eq!(m.atom_weight(&SymbolicPoint::int(2), &order).unwrap(), Weight::i());
}

#[test]
fn realize_agrees_with_atom_weight() {
    let (reg, a, b) = setup();
    let order = PointOrder::new(&reg);
    let w = FiniteSrc::explicit(omega(&reg, &a, &b)).unwrap();
    let t = Term::convolve(w, Term::comb(random_comb(2, 9))).translate(a.clone());
    let r = t.realize(&reg, qi(-3), qi(3)).unwrap();
    assert_eq!(r.coverage(), Coverage::window(qi(-3), qi(3)));
    for at in r.atoms() {
        let w = t.atom_weight(&at.coord, &order).unwrap();
        assert!((w.to_c64() - at.weight.to_c64()).norm() < 1e-14);
    }
    assert!(r.len() > 40);
}

#[test]
fn difference_terms_with_huge_coefficient() {
    let reg = Registry::new();
    let bound = BigRational::new(1.into(), BigInt::from(10u64).pow(15));
    let t = SymbolicPoint::generator(reg.add_small_sqrt("t", &bound, "t").unwrap());
    let c = Term::comb(random_comb(4, 9));
    let a = Weight::q(q(1_000_000_000_000, 1));
    let mu = c.clone().translate_diff(t.neg()).scale(a.clone());
    let claimed = mu.fourier().unwrap();
    let r = duality_residual(&mu, &claimed, &shifted_gaussian_family(), &reg).unwrap();
    assert!(r.max_residual() <= 1e-9, "{r:?}");
    // exact weight at a shifted rational atom
    let order = PointOrder::new(&reg);
    let p = SymbolicPoint::rational(q(1, 4)).sub(&t).unwrap();
    let w = mu.atom_weight(&p, &order).unwrap();
    let c0 = random_comb(4, 9).weight_at_point(&SymbolicPoint::rational(q(1, 4)));
    assert_eq!(w, c0.mul(&a));
}
