use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use super::registry::{pow10, GenId, Registry, MAX_DIGITS};
use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub(crate) fn q_to_big(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub(crate) fn q_to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn add_q(a: &Q, b: &Q) -> Result<Q> {
    a.checked_add(b).ok_or(Error::Overflow("rational add"))
}

fn mul_q(a: &Q, b: &Q) -> Result<Q> {
    a.checked_mul(b).ok_or(Error::Overflow("rational mul"))
}

/// Exact element `rat + sum coeff_i * g_i` of the Q-module spanned by 1 and the
/// registry generators. Coefficients are sorted by id and never zero.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SymbolicPoint {
    rat: Q,
    coeffs: SmallVec<[(GenId, Q); 2]>,
}

impl Default for SymbolicPoint {
    fn default() -> Self {
        Self::zero()
    }
}

impl SymbolicPoint {
    pub fn zero() -> Self {
        SymbolicPoint {
            rat: qi(0),
            coeffs: SmallVec::new(),
        }
    }

    pub fn rational(r: Q) -> Self {
        SymbolicPoint {
            rat: r,
            coeffs: SmallVec::new(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(qi(n))
    }

    pub fn generator(id: GenId) -> Self {
        let mut coeffs = SmallVec::new();
        coeffs.push((id, qi(1)));
        SymbolicPoint { rat: qi(0), coeffs }
    }

    /// Build from arbitrary (possibly unsorted, repeated, zero) terms.
    pub fn new(rat: Q, terms: impl IntoIterator<Item = (GenId, Q)>) -> Result<Self> {
        let mut v: SmallVec<[(GenId, Q); 2]> = terms.into_iter().collect();
        v.sort_by_key(|t| t.0);
        let mut out: SmallVec<[(GenId, Q); 2]> = SmallVec::new();
        for (id, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == id => last.1 = add_q(&last.1, &c)?,
                _ => out.push((id, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        Ok(SymbolicPoint { rat, coeffs: out })
    }

    pub fn rat(&self) -> Q {
        self.rat
    }

    pub fn coeffs(&self) -> &[(GenId, Q)] {
        &self.coeffs
    }

    pub fn coeff(&self, id: GenId) -> Q {
        self.coeffs
            .iter()
            .find(|t| t.0 == id)
            .map(|t| t.1)
            .unwrap_or_else(|| qi(0))
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Canonical form is maintained by every constructor; this re-derives it.
    pub fn canonicalize(&self) -> Self {
        SymbolicPoint::new(self.rat, self.coeffs.iter().copied()).expect("canonical input")
    }

    /// `self + c * other`, exact.
    pub fn combine(&self, other: &SymbolicPoint, c: Q) -> Result<Self> {
        let rat = add_q(&self.rat, &mul_q(&other.rat, &c)?)?;
        let mut out: SmallVec<[(GenId, Q); 2]> = SmallVec::new();
        let (a, b) = (&self.coeffs, &other.coeffs);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                let v = mul_q(&b[j].1, &c)?;
                if !v.is_zero() {
                    out.push((b[j].0, v));
                }
                j += 1;
            } else {
                let v = add_q(&a[i].1, &mul_q(&b[j].1, &c)?)?;
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        Ok(SymbolicPoint { rat, coeffs: out })
    }

    pub fn add(&self, other: &SymbolicPoint) -> Result<Self> {
        self.combine(other, qi(1))
    }

    pub fn sub(&self, other: &SymbolicPoint) -> Result<Self> {
        self.combine(other, qi(-1))
    }

    pub fn neg(&self) -> Self {
        SymbolicPoint {
            rat: -self.rat,
            coeffs: self.coeffs.iter().map(|(g, c)| (*g, -*c)).collect(),
        }
    }

    pub fn scale(&self, c: Q) -> Result<Self> {
        if c.is_zero() {
            return Ok(Self::zero());
        }
        let mut coeffs = SmallVec::new();
        for (g, x) in &self.coeffs {
            coeffs.push((*g, mul_q(x, &c)?));
        }
        Ok(SymbolicPoint {
            rat: mul_q(&self.rat, &c)?,
            coeffs,
        })
    }

    pub fn add_rational(&self, r: Q) -> Result<Self> {
        let mut p = self.clone();
        p.rat = add_q(&self.rat, &r)?;
        Ok(p)
    }

    pub fn sub_rational(&self, r: Q) -> Result<Self> {
        let mut p = self.clone();
        p.rat = self
            .rat
            .checked_sub(&r)
            .ok_or(Error::Overflow("rational sub"))?;
        Ok(p)
    }

    /// The irrational part; two points lie in the same Q-coset iff these agree.
    pub fn coset_key(&self) -> &[(GenId, Q)] {
        &self.coeffs
    }

    pub fn check_registry(&self, reg: &Registry) -> Result<()> {
        let n = reg.len();
        for (g, _) in &self.coeffs {
            if g.0 as usize >= n {
                return Err(Error::Registry(format!(
                    "generator id {} not in registry",
                    g.0
                )));
            }
        }
        Ok(())
    }

    /// Double-precision value and a rigorous bound on its absolute error.
    pub fn approx_with(&self, values: &[f64]) -> (f64, f64) {
        let r = q_to_f64(&self.rat);
        let mut v = r;
        let mut mag = r.abs();
        for (g, c) in &self.coeffs {
            let t = q_to_f64(c) * values[g.0 as usize];
            v += t;
            mag += t.abs();
        }
        let k = 2.0 * (self.coeffs.len() as f64 + 2.0);
        (v, k * f64::EPSILON * mag + f64::MIN_POSITIVE)
    }

    pub fn approx(&self, reg: &Registry) -> f64 {
        let mut v = q_to_f64(&self.rat);
        for (g, c) in &self.coeffs {
            v += q_to_f64(c) * reg.value_f64(*g);
        }
        v
    }

    fn coeff_abs_sum(&self) -> BigRational {
        self.coeffs
            .iter()
            .fold(BigRational::zero(), |acc, (_, c)| acc + q_to_big(c).abs())
    }

    fn digit_cap(&self, reg: &Registry) -> Result<u32> {
        let mut cap = MAX_DIGITS;
        for (g, _) in &self.coeffs {
            cap = cap.min(reg.digit_cap(*g)?);
        }
        Ok(cap)
    }

    /// Exact rational approximation using generator digits at precision `p`;
    /// error at most `10^-p * sum|coeff|`.
    fn eval_raw(&self, reg: &Registry, p: u32) -> Result<BigRational> {
        let scale = pow10(p);
        let mut acc = BigRational::zero();
        for (g, c) in &self.coeffs {
            let d = reg.scaled_floor(*g, p)?;
            acc += q_to_big(c) * BigRational::new(d, scale.clone());
        }
        Ok(acc + q_to_big(&self.rat))
    }
}

/// High-precision decimal: `mantissa * 10^-digits`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decimal {
    pub mantissa: BigInt,
    pub digits: u32,
}

impl Decimal {
    pub fn to_f64(&self) -> f64 {
        let s = self.to_string();
        s.parse().unwrap_or(f64::NAN)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.mantissa.clone(), pow10(self.digits))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let neg = self.mantissa.is_negative();
        let s = self.mantissa.abs().to_string();
        let d = self.digits as usize;
        let s = format!("{s:0>width$}", width = d + 1);
        let (int, frac) = s.split_at(s.len() - d);
        write!(f, "{}{}", if neg { "-" } else { "" }, int)?;
        if d > 0 {
            write!(f, ".{frac}")?;
        }
        Ok(())
    }
}

fn round_to(x: &BigRational, digits: u32) -> BigInt {
    // half away from zero
    let half = BigRational::new(1.into(), 2.into());
    let scaled = (x.abs() * BigRational::from_integer(pow10(digits)) + half).floor().to_integer();
    if x.is_negative() {
        -scaled
    } else {
        scaled
    }
}

/// Evaluate to `precision` decimal digits with error at most
/// `10^-precision * (1 + sum|coeff|)`.
pub fn sym_eval(p: &SymbolicPoint, reg: &Registry, precision: u32) -> Result<Decimal> {
    if precision < 15 {
        return Err(Error::Input("sym_eval precision must be at least 15".into()));
    }
    p.check_registry(reg)?;
    for (g, _) in p.coeffs() {
        let cap = reg.digit_cap(*g)?;
        if precision > cap {
            return Err(Error::Precision {
                name: reg.name(*g)?,
                available: cap,
                requested: precision,
            });
        }
    }
    let work = (precision + 1).min(p.digit_cap(reg)?);
    let v = p.eval_raw(reg, work)?;
    Ok(Decimal {
        mantissa: round_to(&v, precision),
        digits: precision,
    })
}

/// p + c*q with registry validation.
pub fn sym_combine(
    p: &SymbolicPoint,
    q_: &SymbolicPoint,
    c: Q,
    reg: &Registry,
) -> Result<SymbolicPoint> {
    p.check_registry(reg)?;
    q_.check_registry(reg)?;
    p.combine(q_, c)
}

/// Sign of a nonzero-or-zero point, by exact equality and then escalating
/// precision (30, 60, 120, ... up to the generators' digit cap).
pub fn sym_sign(d: &SymbolicPoint, reg: &Registry) -> Result<Ordering> {
    if d.is_rational() {
        return Ok(d.rat.cmp(&qi(0)));
    }
    d.check_registry(reg)?;
    let cap = d.digit_cap(reg)?;
    let csum = d.coeff_abs_sum();
    let mut p = 30u32.min(cap);
    loop {
        let v = d.eval_raw(reg, p)?;
        let bound = &csum / BigRational::from_integer(pow10(p));
        if v.abs() > bound {
            return Ok(if v.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            });
        }
        if p >= cap {
            return Err(Error::Indistinguishable { digits: p });
        }
        p = (p * 2).min(cap);
    }
}

pub fn sym_cmp(a: &SymbolicPoint, b: &SymbolicPoint, reg: &Registry) -> Result<Ordering> {
    if a == b {
        return Ok(Ordering::Equal);
    }
    let d = a.sub(b)?;
    match sym_sign(&d, reg)? {
        Ordering::Equal => Err(Error::Indistinguishable { digits: 0 }),
        o => Ok(o),
    }
}

/// floor(value * 10^30), the numeric part of the storage tie-break key.
pub fn key30(p: &SymbolicPoint, reg: &Registry) -> Result<BigInt> {
    let cap = p.digit_cap(reg)?.min(40);
    let v = p.eval_raw(reg, cap)?;
    Ok((v * BigRational::from_integer(pow10(30))).floor().to_integer())
}

/// Total order used for atom storage: certified double-precision comparison,
/// then exact `sym_cmp`, then (30-digit key, canonical form) if the points
/// cannot be separated.
#[derive(Clone)]
pub struct PointOrder {
    reg: Registry,
    values: Vec<f64>,
}

impl PointOrder {
    pub fn new(reg: &Registry) -> Self {
        PointOrder {
            reg: reg.clone(),
            values: reg.values_f64(),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn approx(&self, p: &SymbolicPoint) -> (f64, f64) {
        if p.coeffs.iter().any(|(g, _)| g.0 as usize >= self.values.len()) {
            // generators appended since construction
            let vals = self.reg.values_f64();
            return p.approx_with(&vals);
        }
        p.approx_with(&self.values)
    }

    pub fn cmp_with(&self, a: &SymbolicPoint, ea: (f64, f64), b: &SymbolicPoint, eb: (f64, f64)) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        let diff = ea.0 - eb.0;
        if diff.abs() > ea.1 + eb.1 + 4.0 * f64::EPSILON * diff.abs() {
            return if diff > 0.0 {
                Ordering::Greater
            } else {
                Ordering::Less
            };
        }
        match sym_cmp(a, b, &self.reg) {
            Ok(o) => o,
            Err(_) => {
                let ka = key30(a, &self.reg).ok();
                let kb = key30(b, &self.reg).ok();
                ka.cmp(&kb).then_with(|| a.cmp(b))
            }
        }
    }

    pub fn cmp(&self, a: &SymbolicPoint, b: &SymbolicPoint) -> Ordering {
        self.cmp_with(a, self.approx(a), b, self.approx(b))
    }
}

/// Exact rational from a decimal or "p/q" string.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        Ok(q(n, d))
    } else if let Some((i, f)) = s.split_once('.') {
        let neg = i.starts_with('-');
        let ip: i64 = if i == "-" || i.is_empty() { 0 } else { i.parse().map_err(|_| bad())? };
        let den = 10i64.checked_pow(f.len() as u32).ok_or_else(bad)?;
        let fp: i64 = if f.is_empty() { 0 } else { f.parse().map_err(|_| bad())? };
        let mag = ip.abs().checked_mul(den).and_then(|x| x.checked_add(fp)).ok_or_else(bad)?;
        Ok(q(if neg { -mag } else { mag }, den))
    } else {
        Ok(qi(s.parse().map_err(|_| bad())?))
    }
}

pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Nearest rational with denominator `den` not exceeding (`down`) or not below `x`.
pub fn q_round(x: f64, den: i64, down: bool) -> Q {
    let s = x * den as f64;
    let n = if down { s.floor() } else { s.ceil() };
    q(n as i64, den)
}

pub fn q_floor_int(x: &Q) -> i64 {
    x.numer().div_floor(x.denom())
}

pub fn q_ceil_int(x: &Q) -> i64 {
    -num_integer::Integer::div_floor(&(-x.numer()), x.denom())
}

#[allow(dead_code)]
pub(crate) fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg_t1() -> (Registry, GenId) {
        let r = Registry::new();
        let t = r.add_literal("t1", "0.125", "secretly rational").unwrap();
        (r, t)
    }

    #[test]
    fn combine_examples() {
        let r = Registry::new();
        let t1 = r.add_literal("t1", "0.3", "").unwrap();
        let t2 = r.add_literal("t2", "0.7", "").unwrap();
        let a = SymbolicPoint::rational(q(3, 4));
        let g1 = SymbolicPoint::generator(t1);
        let s = sym_combine(&a, &g1, qi(1), &r).unwrap();
        assert_eq!(s, SymbolicPoint::new(q(3, 4), [(t1, qi(1))]).unwrap());
        let back = sym_combine(&s, &g1, qi(-1), &r).unwrap();
        assert_eq!(back, a);
        assert!(back.coeffs().is_empty());
        let m = sym_combine(&g1, &SymbolicPoint::generator(t2), qi(-1), &r).unwrap();
        assert_eq!(m.coeffs().len(), 2);
        assert_eq!(m.coeff(t2), qi(-1));
    }

    #[test]
    fn unknown_generator_is_registry_error() {
        let r = Registry::new();
        let p = SymbolicPoint::generator(GenId(3));
        assert!(matches!(
            sym_combine(&p, &p, qi(1), &r),
            Err(Error::Registry(_))
        ));
    }

    #[test]
    fn eval_examples() {
        let (r, t) = reg_t1();
        let half = SymbolicPoint::rational(q(1, 2));
        assert_eq!(
            sym_eval(&half, &r, 20).unwrap().to_string(),
            "0.50000000000000000000"
        );
        let g = SymbolicPoint::generator(t);
        assert_eq!(sym_eval(&g, &r, 15).unwrap().to_string(), "0.125000000000000");
        let p = SymbolicPoint::new(qi(1), [(t, qi(-2))]).unwrap();
        assert_eq!(sym_eval(&p, &r, 18).unwrap().to_f64(), 0.75);
        assert!(matches!(
            sym_eval(&g, &r, 61),
            Err(Error::Precision { .. })
        ));
    }

    #[test]
    fn eval_negative_rounding() {
        let r = Registry::new();
        let p = SymbolicPoint::rational(q(-1, 3));
        assert_eq!(sym_eval(&p, &r, 16).unwrap().to_string(), "-0.3333333333333333");
        let p = SymbolicPoint::rational(q(-2, 3));
        assert_eq!(sym_eval(&p, &r, 16).unwrap().to_string(), "-0.6666666666666667");
        let p = SymbolicPoint::rational(q(2, 3));
        assert_eq!(sym_eval(&p, &r, 16).unwrap().to_string(), "0.6666666666666667");
    }

    #[test]
    fn cmp_examples() {
        let (r, t) = reg_t1();
        let a = SymbolicPoint::rational(q(1, 3));
        assert_eq!(sym_cmp(&a, &a.clone(), &r).unwrap(), Ordering::Equal);
        let g = SymbolicPoint::generator(t);
        assert_eq!(
            sym_cmp(&g, &SymbolicPoint::zero(), &r).unwrap(),
            Ordering::Greater
        );
        let h = SymbolicPoint::rational(q(1, 2));
        let g4 = SymbolicPoint::new(qi(0), [(t, qi(4))]).unwrap();
        assert!(matches!(
            sym_cmp(&h, &g4, &r),
            Err(Error::Indistinguishable { digits: 60 })
        ));
    }

    #[test]
    fn tiny_differences_need_escalation() {
        let r = Registry::new();
        // 10^-40 * sqrt(2): beyond the 30-digit first pass
        let scale = BigRational::new(1.into(), pow10(40));
        let t = r.add_sqrt("tiny", 2, scale, BigInt::zero(), "").unwrap();
        let p = SymbolicPoint::new(qi(1), [(t, qi(1))]).unwrap();
        let one = SymbolicPoint::int(1);
        assert_eq!(sym_cmp(&p, &one, &r).unwrap(), Ordering::Greater);
        let ord = PointOrder::new(&r);
        assert_eq!(ord.cmp(&one, &p), Ordering::Less);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_q("2.5").unwrap(), q(5, 2));
        assert_eq!(parse_q("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert_eq!(fmt_q(&q(6, -4)), "-3/2");
    }

    #[test]
    fn overflow_is_an_error() {
        let a = SymbolicPoint::rational(q(i64::MAX, 1));
        assert!(matches!(a.add(&a), Err(Error::Overflow(_))));
    }
}
