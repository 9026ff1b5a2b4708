//! Exact coordinates in the Q-module spanned by 1 and declared irrational generators.

mod point;
mod registry;

pub use point::{
    fmt_q, key30, parse_q, q, q_ceil_int, q_floor_int, q_round, qi, sym_cmp, sym_combine,
    sym_eval, sym_sign, Decimal, PointOrder, SymbolicPoint, Q,
};
pub(crate) use point::q_to_f64;
#[allow(unused_imports)]
pub(crate) use point::{big_to_f64, q_to_big};
pub(crate) use registry::bigrat_to_f64;
pub use registry::{square_split, GenEntry, GenId, GenSource, Registry, DEFAULT_DIGITS, MAX_DIGITS};

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;
    use std::cmp::Ordering;

    fn registry() -> (Registry, Vec<GenId>) {
        let r = Registry::new();
        let ids = (0..3)
            .map(|i| {
                let b = num_rational::BigRational::new(1.into(), 3.into());
                r.add_small_sqrt(&format!("g{i}"), &b, "prop").unwrap()
            })
            .collect();
        (r, ids)
    }

    fn point(ids: &[GenId]) -> impl Strategy<Value = SymbolicPoint> {
        let ids = ids.to_vec();
        (
            -50i64..50,
            1i64..12,
            proptest::collection::vec((0usize..3, -6i64..6, 1i64..5), 0..4),
        )
            .prop_map(move |(n, d, terms)| {
                SymbolicPoint::new(q(n, d), terms.into_iter().map(|(g, a, b)| (ids[g], q(a, b))))
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn canonical_idempotent(p in point(&registry().1)) {
            prop_assert_eq!(p.canonicalize(), p.clone());
            prop_assert_eq!(p.canonicalize().canonicalize(), p.canonicalize());
        }

        #[test]
        fn combine_round_trips(p in point(&registry().1), x in point(&registry().1), c in -5i64..5) {
            let s = p.combine(&x, qi(c)).unwrap();
            prop_assert_eq!(s.combine(&x, qi(-c)).unwrap(), p);
        }

        #[test]
        fn cmp_consistent_with_eval(a in point(&registry().1), b in point(&registry().1)) {
            let (r, _) = registry();
            let o = sym_cmp(&a, &b, &r).unwrap();
            let va = sym_eval(&a, &r, 40).unwrap().to_rational();
            let vb = sym_eval(&b, &r, 40).unwrap().to_rational();
            match o {
                Ordering::Equal => prop_assert_eq!(&a, &b),
                Ordering::Less => prop_assert!(va <= vb),
                Ordering::Greater => prop_assert!(va >= vb),
            }
            prop_assert_eq!(sym_cmp(&b, &a, &r).unwrap(), o.reverse());
            prop_assert_eq!(PointOrder::new(&r).cmp(&a, &b), o);
        }
    }
}
