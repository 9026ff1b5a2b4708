use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::testfn::CSum;

/// Above this size the direct sum is replaced by an FFT.
pub const DIRECT_DFT_MAX: usize = 4096;

/// An eigenvalue of the unitary DFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lambda {
    One,
    MinusOne,
    I,
    MinusI,
}

impl Lambda {
    pub const ALL: [Lambda; 4] = [Lambda::One, Lambda::MinusOne, Lambda::I, Lambda::MinusI];

    /// Exponent k with `lambda = i^k`.
    pub fn power(self) -> u32 {
        match self {
            Lambda::One => 0,
            Lambda::I => 1,
            Lambda::MinusOne => 2,
            Lambda::MinusI => 3,
        }
    }

    pub fn from_power(k: u32) -> Lambda {
        match k % 4 {
            0 => Lambda::One,
            1 => Lambda::I,
            2 => Lambda::MinusOne,
            _ => Lambda::MinusI,
        }
    }

    pub fn to_c64(self) -> Complex64 {
        match self {
            Lambda::One => Complex64::new(1.0, 0.0),
            Lambda::MinusOne => Complex64::new(-1.0, 0.0),
            Lambda::I => Complex64::new(0.0, 1.0),
            Lambda::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Lambda {
        Lambda::from_power(4 - self.power())
    }

    pub fn pow(self, j: u32) -> Lambda {
        Lambda::from_power(self.power() * j)
    }

    pub fn to_weight(self) -> crate::measure::Weight {
        use crate::measure::Weight;
        match self {
            Lambda::One => Weight::one(),
            Lambda::MinusOne => Weight::int(-1),
            Lambda::I => Weight::i(),
            Lambda::MinusI => Weight::i().neg(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Lambda::One => "1",
            Lambda::MinusOne => "-1",
            Lambda::I => "i",
            Lambda::MinusI => "-i",
        }
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lambda {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "+1" => Ok(Lambda::One),
            "-1" => Ok(Lambda::MinusOne),
            "i" | "+i" => Ok(Lambda::I),
            "-i" => Ok(Lambda::MinusI),
            other => Err(Error::Parse(format!("lambda must be one of 1,-1,i,-i (got `{other}`)"))),
        }
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `e^{-2πi r/N}` for r in 0..N, built from exact index reduction.
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|r| {
            let ph = -2.0 * PI * r as f64 / n as f64;
            Complex64::new(ph.cos(), ph.sin())
        })
        .collect()
}

fn direct(c: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = c.len();
    let w = twiddles(n);
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|j| {
            let mut acc = CSum::default();
            let mut idx = 0usize;
            for ck in c {
                let t = if sign < 0.0 { w[idx] } else { w[idx].conj() };
                acc.add(*ck * t);
                idx += j;
                if idx >= n {
                    idx -= n;
                }
            }
            acc.sum() * scale
        })
        .collect()
}

fn is_power_of_four(n: usize) -> bool {
    n.is_power_of_two() && n.trailing_zeros() % 2 == 0
}

fn fast(c: &[Complex64], inverse: bool) -> Vec<Complex64> {
    thread_local! {
        static PLANNER: std::cell::RefCell<rustfft::FftPlanner<f64>> =
            std::cell::RefCell::new(rustfft::FftPlanner::new());
    }
    let n = c.len();
    let plan: Arc<dyn rustfft::Fft<f64>> = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut buf = c.to_vec();
    plan.process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

fn use_fast(n: usize) -> bool {
    n > DIRECT_DFT_MAX || (n >= 16 && is_power_of_four(n))
}

/// `(Uc)_j = N^{-1/2} sum_k c_k e^{-2πi jk/N}`.
pub fn unitary_dft(c: &[Complex64]) -> Vec<Complex64> {
    match c.len() {
        0 => Vec::new(),
        n if use_fast(n) => fast(c, false),
        _ => direct(c, -1.0),
    }
}

/// Direct compensated summation regardless of size.
pub fn unitary_dft_direct(c: &[Complex64]) -> Vec<Complex64> {
    direct(c, -1.0)
}

pub fn inverse_dft(c: &[Complex64]) -> Vec<Complex64> {
    match c.len() {
        0 => Vec::new(),
        n if use_fast(n) => fast(c, true),
        _ => direct(c, 1.0),
    }
}

/// `U^2 c`: the index reflection `k -> -k mod N`, exact.
pub fn dft_square(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    (0..n).map(|k| c[(n - k) % n]).collect()
}

/// `U^p c` for any power, using exact reflection for the even part.
pub fn dft_power(c: &[Complex64], p: u32) -> Vec<Complex64> {
    match p % 4 {
        0 => c.to_vec(),
        1 => unitary_dft(c),
        2 => dft_square(c),
        _ => dft_square(&unitary_dft(c)),
    }
}

pub fn l2_norm(c: &[Complex64]) -> f64 {
    let scale = c.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut s = crate::testfn::KahanSum::default();
    for z in c {
        s.add((z / scale).norm_sqr());
    }
    scale * s.sum().sqrt()
}

pub fn l2_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn point_mass_and_eigenvector() {
        let u = unitary_dft(&[c(1.0), c(0.0), c(0.0), c(0.0)]);
        for z in &u {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
        let v = vec![c(2.0), c(1.0), c(0.0), c(1.0)];
        assert!(l2_dist(&unitary_dft(&v), &v) < 1e-15);
    }

    #[test]
    fn fast_matches_direct() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [16usize, 64, 256] {
            let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
            assert!(l2_dist(&unitary_dft(&v), &unitary_dft_direct(&v)) < 1e-12 * l2_norm(&v));
        }
    }

    #[test]
    fn fourth_power_identity_and_square_reflection() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [1usize, 7, 36, 144, 4096] {
            let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
            let u2 = unitary_dft(&unitary_dft(&v));
            assert!(l2_dist(&u2, &dft_square(&v)) < 1e-12 * l2_norm(&v));
            let u4 = unitary_dft(&unitary_dft(&u2));
            assert!(l2_dist(&u4, &v) < 1e-12 * l2_norm(&v));
            assert!(l2_dist(&inverse_dft(&unitary_dft(&v)), &v) < 1e-12 * l2_norm(&v));
        }
    }

    #[test]
    fn lambda_algebra() {
        for l in Lambda::ALL {
            assert_eq!(l.to_c64() * l.conj().to_c64(), c(1.0));
            assert_eq!(l.as_str().parse::<Lambda>().unwrap(), l);
            assert_eq!(l.pow(4), Lambda::One);
        }
        assert!("2".parse::<Lambda>().is_err());
    }
}
