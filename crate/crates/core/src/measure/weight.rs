use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactnum::{bigrat_to_f64, Q};

/// Exact Gaussian rational `re + im i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussQ {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussQ {
    pub fn real(re: BigRational) -> Self {
        GaussQ {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(bigrat_to_f64(&self.re), bigrat_to_f64(&self.im))
    }

    /// |z|^2, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

/// Atom weight: exact when the identities it feeds must hold exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    Exact(GaussQ),
    Num(Complex64),
}

impl Default for Weight {
    fn default() -> Self {
        Weight::zero()
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Weight {
    pub fn zero() -> Self {
        Weight::Exact(GaussQ::real(BigRational::zero()))
    }

    pub fn one() -> Self {
        Weight::int(1)
    }

    pub fn int(n: i64) -> Self {
        Weight::Exact(GaussQ::real(big(n)))
    }

    pub fn q(x: Q) -> Self {
        Weight::Exact(GaussQ::real(BigRational::new(
            BigInt::from(*x.numer()),
            BigInt::from(*x.denom()),
        )))
    }

    pub fn rat(x: BigRational) -> Self {
        Weight::Exact(GaussQ::real(x))
    }

    pub fn gauss(re: BigRational, im: BigRational) -> Self {
        Weight::Exact(GaussQ { re, im })
    }

    pub fn i() -> Self {
        Weight::gauss(BigRational::zero(), BigRational::one())
    }

    pub fn num(z: Complex64) -> Self {
        Weight::Num(z)
    }

    /// Exact image of a double-precision value (every finite f64 is rational).
    pub fn exact_from_c64(z: Complex64) -> Result<Self> {
        let re = BigRational::from_float(z.re)
            .ok_or_else(|| Error::Input(format!("non-finite weight {z}")))?;
        let im = BigRational::from_float(z.im)
            .ok_or_else(|| Error::Input(format!("non-finite weight {z}")))?;
        Ok(Weight::gauss(re, im))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Weight::Exact(_))
    }

    /// True only for an exact zero; numeric zeros are kept unless pruned.
    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Weight::Exact(g) if g.is_zero())
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Weight::Exact(g) => g.to_c64(),
            Weight::Num(z) => *z,
        }
    }

    pub fn abs(&self) -> f64 {
        match self {
            Weight::Exact(g) if g.im.is_zero() => bigrat_to_f64(&g.re.abs()),
            Weight::Exact(g) if g.re.is_zero() => bigrat_to_f64(&g.im.abs()),
            other => other.to_c64().norm(),
        }
    }

    pub fn add(&self, o: &Weight) -> Weight {
        match (self, o) {
            (Weight::Exact(a), Weight::Exact(b)) => Weight::Exact(GaussQ {
                re: &a.re + &b.re,
                im: &a.im + &b.im,
            }),
            _ if self.is_exact_zero() => o.clone(),
            _ if o.is_exact_zero() => self.clone(),
            _ => Weight::Num(self.to_c64() + o.to_c64()),
        }
    }

    pub fn neg(&self) -> Weight {
        match self {
            Weight::Exact(a) => Weight::Exact(GaussQ {
                re: -&a.re,
                im: -&a.im,
            }),
            Weight::Num(z) => Weight::Num(-z),
        }
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Weight) -> Weight {
        match (self, o) {
            (Weight::Exact(a), Weight::Exact(b)) => Weight::Exact(GaussQ {
                re: &a.re * &b.re - &a.im * &b.im,
                im: &a.re * &b.im + &a.im * &b.re,
            }),
            // an exact zero annihilates numeric factors
            _ if self.is_exact_zero() || o.is_exact_zero() => Weight::zero(),
            _ => Weight::Num(self.to_c64() * o.to_c64()),
        }
    }

    pub fn mul_c64(&self, z: Complex64) -> Weight {
        self.mul(&Weight::Num(z))
    }

    pub fn conj(&self) -> Weight {
        match self {
            Weight::Exact(a) => Weight::Exact(GaussQ {
                re: a.re.clone(),
                im: -&a.im,
            }),
            Weight::Num(z) => Weight::Num(z.conj()),
        }
    }

    /// Exact string `p/q+(p/q)i`, or `None` for numeric weights.
    pub fn exact_string(&self) -> Option<String> {
        match self {
            Weight::Exact(g) => Some(format!("{}+({})i", fmt_big(&g.re), fmt_big(&g.im))),
            Weight::Num(_) => None,
        }
    }

    pub fn parse_exact(s: &str) -> Result<Weight> {
        let bad = || Error::Parse(format!("bad exact weight `{s}`"));
        let s = s.trim();
        let (re, rest) = s.split_once("+(").ok_or_else(bad)?;
        let im = rest.strip_suffix(")i").ok_or_else(bad)?;
        Ok(Weight::gauss(parse_big(re).ok_or_else(bad)?, parse_big(im).ok_or_else(bad)?))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_string() {
            Some(s) => write!(f, "{s}"),
            None => {
                let z = self.to_c64();
                write!(f, "{}{:+}i", z.re, z.im)
            }
        }
    }
}

pub fn fmt_big(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_big(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Weight::q(Q::new(1, 3));
        let b = Weight::i();
        let c = a.mul(&b).add(&Weight::int(2));
        assert!(c.is_exact());
        assert_eq!(c.exact_string().unwrap(), "2/1+(1/3)i");
        assert_eq!(Weight::parse_exact("2/1+(1/3)i").unwrap(), c);
        assert!(a.sub(&a).is_exact_zero());
    }

    #[test]
    fn exact_zero_annihilates_numeric() {
        let z = Weight::zero().mul_c64(Complex64::new(0.3, 0.4));
        assert!(z.is_exact_zero());
        let n = Weight::one().mul_c64(Complex64::new(0.0, 1.0));
        assert!(!n.is_exact());
    }

    #[test]
    fn f64_lifts_exactly() {
        let z = Complex64::new(0.1, -2.5e-7);
        let w = Weight::exact_from_c64(z).unwrap();
        assert_eq!(w.to_c64(), z);
        assert!(Weight::exact_from_c64(Complex64::new(f64::NAN, 0.0)).is_err());
    }
}
