//! `tau = sum_n chi(n) r_3(n)/sqrt(n) (delta_{sqrt(n)/2} - delta_{-sqrt(n)/2})`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{q, qi, square_split, GenId, GenSource, Registry, SymbolicPoint, Q};
use crate::measure::{Atom, Coverage, PointMeasure, TailModel, Weight};

/// Unit-cell mass bound outside the coverage window.
///
/// Lattice points with `4x^2 <= |v|^2 < 4(x+1)^2` number at most
/// `(4π/3)((2x+2+√3)^3 - (2x-√3)_+^3)`, each weighted by at most `4/(2x)`.
pub const GUINAND_TAIL: TailModel = TailModel { c: 2000.0, alpha: 2.0 };

/// `-1/2` off `4N`, `4` on `4N \ 16N`, `0` on `16N`.
pub fn guinand_chi(n: u64) -> Q {
    if n % 16 == 0 {
        qi(0)
    } else if n % 4 == 0 {
        qi(4)
    } else {
        q(-1, 2)
    }
}

/// Ordered signed triples with `x^2 + y^2 + z^2 = n`, by enumeration.
pub fn sum_three_squares(n: u64) -> u64 {
    let r = (n as f64).sqrt() as i64 + 1;
    let n = n as i64;
    let mut count = 0;
    for x in -r..=r {
        let rx = n - x * x;
        if rx < 0 {
            continue;
        }
        for y in -r..=r {
            let rz = rx - y * y;
            if rz < 0 {
                continue;
            }
            let z = (rz as f64).sqrt().round() as i64;
            if z * z == rz {
                count += if z == 0 { 1 } else { 2 };
            }
        }
    }
    count
}

/// `r_3(0..=n_max)` in one pass over the lattice ball.
pub fn r3_table(n_max: u64) -> Vec<u64> {
    let mut t = vec![0u64; n_max as usize + 1];
    let r = (n_max as f64).sqrt() as i64 + 1;
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let s = (x * x + y * y + z * z) as u64;
                if s <= n_max {
                    t[s as usize] += 1;
                }
            }
        }
    }
    t
}

/// Generator for `frac(sqrt(d))`, or an existing one with the same radicand,
/// as `sqrt(d) = rat + coeff * g`.
fn sqrt_generator(reg: &Registry, d: u64) -> Result<(GenId, Q, Q)> {
    for e in reg.entries() {
        if let GenSource::Sqrt { radicand, scale, offset } = &e.source {
            if *radicand == d {
                // g = scale sqrt(d) + offset  =>  sqrt(d) = g/scale - offset/scale
                let inv = BigRational::one() / scale;
                let rat = -BigRational::from_integer(offset.clone()) * &inv;
                let to_q = |x: &BigRational| -> Result<Q> {
                    match (x.numer().to_i64(), x.denom().to_i64()) {
                        (Some(a), Some(b)) => Ok(q(a, b)),
                        _ => Err(Error::Overflow("sqrt generator reuse")),
                    }
                };
                return Ok((reg.lookup(&e.name)?, to_q(&rat)?, to_q(&inv)?));
            }
        }
    }
    let fl = (d as f64).sqrt().floor() as i64;
    let fl = if (fl + 1) * (fl + 1) <= d as i64 { fl + 1 } else if fl * fl > d as i64 { fl - 1 } else { fl };
    let id = reg.add_sqrt(
        &format!("sqrt_{d}"),
        d,
        BigRational::one(),
        BigInt::from(-fl),
        &format!("fractional part of sqrt({d})"),
    )?;
    Ok((id, qi(fl), qi(1)))
}

/// Exact coordinate `sqrt(n)/2`.
pub fn half_sqrt_point(reg: &Registry, n: u64) -> Result<SymbolicPoint> {
    let (s, d) = square_split(n);
    let half = q(s as i64, 2);
    if d == 1 {
        return Ok(SymbolicPoint::rational(half));
    }
    let (g, rat, coeff) = sqrt_generator(reg, d)?;
    SymbolicPoint::new(rat * half, [(g, coeff * half)])
}

/// Atoms of `tau` with `sqrt(n)/2 <= R`, i.e. `n <= 4R^2`; coverage `[-R, R]`.
pub fn guinand_comb(reg: &Registry, radius: u64) -> Result<PointMeasure> {
    if radius == 0 {
        return Err(Error::Input("radius must be at least 1".into()));
    }
    let n_max = 4 * radius * radius;
    let r3 = r3_table(n_max);
    let mut atoms = Vec::new();
    for n in 1..=n_max {
        let chi = guinand_chi(n);
        if chi.is_zero() || r3[n as usize] == 0 {
            continue;
        }
        let (s, d) = square_split(n);
        let w = if d == 1 {
            Weight::q(chi * q(r3[n as usize] as i64, s as i64))
        } else {
            let c = *chi.numer() as f64 / *chi.denom() as f64;
            Weight::num(Complex64::new(c * r3[n as usize] as f64 / (n as f64).sqrt(), 0.0))
        };
        let p = half_sqrt_point(reg, n)?;
        atoms.push(Atom::new(p.neg(), w.neg()));
        atoms.push(Atom::new(p, w));
    }
    let r = radius as i64;
    Ok(PointMeasure::new(reg, atoms, Coverage::window(qi(-r), qi(r)))?
        .with_tail(Some(GUINAND_TAIL))
        .with_meta("construction", "guinand")
        .with_meta("radius", radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::reflect;

    #[test]
    fn chi_and_r3() {
        assert_eq!(guinand_chi(3), q(-1, 2));
        assert_eq!(guinand_chi(4), qi(4));
        assert_eq!(guinand_chi(16), qi(0));
        assert_eq!(sum_three_squares(0), 1);
        assert_eq!(sum_three_squares(1), 6);
        assert_eq!(sum_three_squares(2), 12);
        for n in [7, 15, 28] {
            assert_eq!(sum_three_squares(n), 0);
        }
        let t = r3_table(300);
        for n in 0..=300 {
            assert_eq!(t[n as usize], sum_three_squares(n), "n = {n}");
        }
    }

    #[test]
    fn odd_and_exact_squares() {
        let reg = Registry::new();
        let tau = guinand_comb(&reg, 3).unwrap();
        let r = reflect(&tau);
        assert_eq!(r.atoms().len(), tau.atoms().len());
        for (a, b) in r.atoms().iter().zip(tau.atoms()) {
            assert_eq!(a.coord, b.coord);
            assert_eq!(a.weight, b.weight.neg());
        }
        // sqrt(8)/2 = sqrt(2) shares the generator of sqrt(2)/2
        let p2 = half_sqrt_point(&reg, 2).unwrap();
        let p8 = half_sqrt_point(&reg, 8).unwrap();
        assert_eq!(p8, p2.scale(qi(2)).unwrap());
        // n = 4: atom at 1 with weight chi(4) r3(4)/2 = 12
        assert_eq!(tau.atom_weight(&SymbolicPoint::int(1)), Weight::int(12));
    }

    #[test]
    fn reuses_foreign_radicand() {
        let reg = Registry::new();
        let g = reg
            .add_sqrt("s5", 5, BigRational::new(1.into(), 4.into()), BigInt::zero(), "t")
            .unwrap();
        let p = half_sqrt_point(&reg, 5).unwrap();
        assert_eq!(p.coeff(g), qi(2));
        assert!((p.approx(&reg) - 5f64.sqrt() / 2.0).abs() < 1e-15);
    }
}
