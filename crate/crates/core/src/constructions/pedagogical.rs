use crate::error::{Error, Result};
use crate::exactnum::{q, qi, Registry, SymbolicPoint};
use crate::measure::{integer_comb, Atom, Coverage, PointMeasure, TailModel, Weight};

/// Largest block index for the factorial example (`8! = 40320` atoms in the last block).
pub const FACTORIAL_CAP: u32 = 8;

/// `sum_{|k| <= N} k delta_k`.
pub fn kdelta_example(reg: &Registry, n: i64) -> Result<PointMeasure> {
    Ok(integer_comb(reg, n, Weight::int)?
        .with_tail(Some(TailModel { c: 1.0, alpha: 1.0 }))
        .with_meta("construction", "kdelta"))
}

/// `sum_{|k| <= N} delta_k`.
pub fn lattice_example(reg: &Registry, n: i64) -> Result<PointMeasure> {
    Ok(integer_comb(reg, n, |_| Weight::one())?
        .with_tail(Some(TailModel::bounded(1.0)))
        .with_meta("construction", "lattice"))
}

/// `sum_{n <= N} (1/n!) sum_{k=1}^{n!} delta_{n + k/n!}`, exact on `[-(N+1), N+1]`.
pub fn factorial_example(reg: &Registry, n_max: u32) -> Result<PointMeasure> {
    if n_max == 0 || n_max > FACTORIAL_CAP {
        return Err(Error::Capacity(format!("factorial example needs 1 <= N <= {FACTORIAL_CAP}")));
    }
    let mut atoms = Vec::new();
    let mut fact = 1i64;
    for n in 1..=n_max as i64 {
        fact *= n;
        let w = Weight::q(q(1, fact));
        for k in 1..=fact {
            atoms.push(Atom::new(SymbolicPoint::rational(qi(n) + q(k, fact)), w.clone()));
        }
    }
    let r = n_max as i64 + 1;
    Ok(PointMeasure::new(reg, atoms, Coverage::window(qi(-r), qi(r)))?
        .with_tail(Some(TailModel::bounded(2.0)))
        .with_meta("construction", "factorial"))
}

/// Dispatch by name: `kdelta`, `lattice`, `factorial`.
pub fn pedagogical_example(reg: &Registry, which: &str, n: i64) -> Result<PointMeasure> {
    match which {
        "kdelta" => kdelta_example(reg, n),
        "lattice" => lattice_example(reg, n),
        "factorial" => factorial_example(reg, u32::try_from(n).map_err(|_| Error::Input("negative N".into()))?),
        _ => Err(Error::Input(format!("unknown example `{which}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{ball_mass, window_norm};

    #[test]
    fn kdelta_ball_mass() {
        let reg = Registry::new();
        let m = kdelta_example(&reg, 10).unwrap();
        assert_eq!(ball_mass(&m, qi(10)).unwrap(), 110.0);
    }

    #[test]
    fn factorial_blocks_have_unit_mass() {
        let reg = Registry::new();
        let m = factorial_example(&reg, 5).unwrap();
        for n in 1..=5 {
            // (n, n+1] = [n + 1/n!, n + 1]
            let lo = SymbolicPoint::rational(qi(n));
            let hi = SymbolicPoint::rational(qi(n + 1));
            let a = m.lower_bound(&lo, true);
            let b = m.lower_bound(&hi, true);
            let s: f64 = m.atoms()[a..b].iter().map(|x| x.weight.abs()).sum();
            assert!((s - 1.0).abs() < 1e-12, "block {n}: {s}");
        }
        assert!(window_norm(&m, qi(1), qi(0), qi(5)).unwrap().sup_mass <= 2.0 + 1e-12);
        assert!(factorial_example(&reg, 9).is_err());
    }
}
