//! Generator registry: named irrational constants in (0,1) with reproducible
//! decimal expansions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default number of stored decimal digits per generator.
pub const DEFAULT_DIGITS: u32 = 60;
/// Hard ceiling for on-demand expansion of computable generators.
pub const MAX_DIGITS: u32 = 4000;

static NEXT_REGISTRY_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenId(pub u32);

/// How a generator's digits are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum GenSource {
    /// Fixed decimal digits; nothing beyond the stored length is known.
    Literal,
    /// `scale * sqrt(radicand) + offset`, expandable to any precision.
    Sqrt {
        radicand: u64,
        scale: BigRational,
        offset: BigInt,
    },
}

#[derive(Debug)]
pub struct GenEntry {
    pub name: String,
    pub provenance: String,
    pub source: GenSource,
    /// "0.ddd..." with the registry's stored length.
    pub decimal: String,
    literal_digits: Option<BigInt>,
    stored: u32,
    approx: f64,
    cache: Mutex<Option<(u32, BigInt)>>,
}

impl GenEntry {
    pub fn value_f64(&self) -> f64 {
        self.approx
    }

    /// Digits available, `None` when unbounded (computable source).
    pub fn available_digits(&self) -> Option<u32> {
        match self.source {
            GenSource::Literal => Some(self.stored),
            GenSource::Sqrt { .. } => None,
        }
    }

    pub fn radicand(&self) -> Option<u64> {
        match self.source {
            GenSource::Sqrt { radicand, .. } => Some(radicand),
            GenSource::Literal => None,
        }
    }

    /// floor(value * 10^p).
    fn scaled_floor(&self, p: u32) -> Result<BigInt> {
        if let Some((cp, v)) = &*self.cache.lock().unwrap() {
            if *cp == p {
                return Ok(v.clone());
            }
            if *cp > p {
                return Ok(v / pow10(cp - p));
            }
        }
        let v = match &self.source {
            GenSource::Literal => {
                if p > self.stored {
                    return Err(Error::Precision {
                        name: self.name.clone(),
                        available: self.stored,
                        requested: p,
                    });
                }
                self.literal_digits.as_ref().unwrap() / pow10(self.stored - p)
            }
            GenSource::Sqrt {
                radicand,
                scale,
                offset,
            } => sqrt_floor_scaled(*radicand, scale, offset, p),
        };
        *self.cache.lock().unwrap() = Some((p, v.clone()));
        Ok(v)
    }
}

pub(crate) fn pow10(p: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), p as usize)
}

fn sqrt_floor_scaled(radicand: u64, scale: &BigRational, offset: &BigInt, p: u32) -> BigInt {
    // floor(a*sqrt(r)*10^p / b) = floor(isqrt(a^2 r 10^2p) / b) for a, b > 0
    let a = scale.numer().abs();
    let b = scale.denom().clone();
    let inner = &a * &a * BigInt::from(radicand) * pow10(2 * p);
    let root = inner.sqrt();
    let mut q = root.div_floor(&b);
    if scale.is_negative() {
        // floor(-y) = -ceil(y); the root is irrational unless a perfect square
        let exact = &root * &root == inner && (&root % &b).is_zero();
        q = if exact { -q } else { -q - 1 };
    }
    q + offset * pow10(p)
}

fn is_squarefree(n: u64) -> bool {
    let mut d = 2u64;
    while d * d <= n {
        if n % (d * d) == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

struct Inner {
    id: u64,
    stored_digits: u32,
    entries: RwLock<Vec<Arc<GenEntry>>>,
    names: RwLock<HashMap<String, GenId>>,
}

/// Append-only generator registry shared by reference.
///
/// Rational independence of `{1, g1, g2, ...}` is a construction-time contract
/// recorded in each entry's provenance. The registry only refuses two square-root
/// generators with the same radicand, which would be trivially dependent.
#[derive(Clone)]
pub struct Registry {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("id", &self.inner.id)
            .field("len", &self.len())
            .finish()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::new()
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::with_digits(DEFAULT_DIGITS)
    }

    pub fn with_digits(stored_digits: u32) -> Self {
        assert!(stored_digits >= 30, "registry needs at least 30 stored digits");
        Registry {
            inner: Arc::new(Inner {
                id: NEXT_REGISTRY_ID.fetch_add(1, Ordering::Relaxed),
                stored_digits,
                entries: RwLock::new(Vec::new()),
                names: RwLock::new(HashMap::new()),
            }),
        }
    }

    pub fn id(&self) -> u64 {
        self.inner.id
    }

    pub fn same(&self, other: &Registry) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn ensure_same(&self, other: &Registry) -> Result<()> {
        if self.same(other) {
            Ok(())
        } else {
            Err(Error::Registry(format!(
                "mixing registries {} and {}",
                self.id(),
                other.id()
            )))
        }
    }

    pub fn stored_digits(&self) -> u32 {
        self.inner.stored_digits
    }

    pub fn len(&self) -> usize {
        self.inner.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, id: GenId) -> Result<Arc<GenEntry>> {
        self.inner
            .entries
            .read()
            .unwrap()
            .get(id.0 as usize)
            .cloned()
            .ok_or_else(|| Error::Registry(format!("unknown generator id {}", id.0)))
    }

    pub fn entries(&self) -> Vec<Arc<GenEntry>> {
        self.inner.entries.read().unwrap().clone()
    }

    pub fn lookup(&self, name: &str) -> Result<GenId> {
        self.inner
            .names
            .read()
            .unwrap()
            .get(name)
            .copied()
            .ok_or_else(|| Error::Registry(format!("unknown generator `{name}`")))
    }

    pub fn name(&self, id: GenId) -> Result<String> {
        Ok(self.entry(id)?.name.clone())
    }

    pub fn value_f64(&self, id: GenId) -> f64 {
        self.inner.entries.read().unwrap()[id.0 as usize].approx
    }

    /// Snapshot of all generator values as f64, indexed by id.
    pub fn values_f64(&self) -> Vec<f64> {
        self.inner
            .entries
            .read()
            .unwrap()
            .iter()
            .map(|e| e.approx)
            .collect()
    }

    /// floor(g * 10^p) for generator `id`.
    pub fn scaled_floor(&self, id: GenId, p: u32) -> Result<BigInt> {
        self.entry(id)?.scaled_floor(p)
    }

    /// Smallest prime not yet used as a square-root radicand.
    pub fn fresh_prime(&self) -> u64 {
        let used: Vec<u64> = self
            .inner
            .entries
            .read()
            .unwrap()
            .iter()
            .filter_map(|e| e.radicand())
            .collect();
        let mut p = 2u64;
        loop {
            if is_prime(p) && !used.contains(&p) {
                return p;
            }
            p += 1;
        }
    }

    fn push(&self, entry: GenEntry) -> Result<GenId> {
        let mut names = self.inner.names.write().unwrap();
        let mut entries = self.inner.entries.write().unwrap();
        if names.contains_key(&entry.name) {
            return Err(Error::Registry(format!(
                "duplicate generator name `{}`",
                entry.name
            )));
        }
        if let Some(r) = entry.radicand() {
            if entries.iter().any(|e| e.radicand() == Some(r)) {
                return Err(Error::Registry(format!(
                    "radicand {r} already used; `{}` would be rationally dependent",
                    entry.name
                )));
            }
        }
        if entries.len() >= u32::MAX as usize {
            return Err(Error::Registry("registry full".into()));
        }
        let id = GenId(entries.len() as u32);
        names.insert(entry.name.clone(), id);
        entries.push(Arc::new(entry));
        Ok(id)
    }

    /// Register a generator given by decimal digits, e.g. "0.125".
    pub fn add_literal(&self, name: &str, decimal: &str, provenance: &str) -> Result<GenId> {
        let stored = self.stored_digits();
        let frac = decimal
            .strip_prefix("0.")
            .ok_or_else(|| Error::Registry(format!("`{name}`: decimal must be 0.ddd")))?;
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Registry(format!("`{name}`: bad decimal `{decimal}`")));
        }
        if frac.len() as u32 > stored {
            return Err(Error::Registry(format!(
                "`{name}`: {} digits exceed stored length {stored}",
                frac.len()
            )));
        }
        let padded = format!("{frac:0<width$}", width = stored as usize);
        let digits: BigInt = padded.parse().unwrap();
        if digits.is_zero() {
            return Err(Error::Registry(format!("`{name}`: value must lie in (0,1)")));
        }
        let approx = format!("0.{padded}").parse::<f64>().unwrap();
        self.push(GenEntry {
            name: name.to_string(),
            provenance: provenance.to_string(),
            source: GenSource::Literal,
            decimal: format!("0.{padded}"),
            literal_digits: Some(digits),
            stored,
            approx,
            cache: Mutex::new(None),
        })
    }

    /// Register `scale * sqrt(radicand) + offset`; the value must lie in (0,1).
    pub fn add_sqrt(
        &self,
        name: &str,
        radicand: u64,
        scale: BigRational,
        offset: BigInt,
        provenance: &str,
    ) -> Result<GenId> {
        if radicand < 2 || !is_squarefree(radicand) {
            return Err(Error::Registry(format!(
                "`{name}`: radicand {radicand} must be squarefree and > 1"
            )));
        }
        if scale.is_zero() {
            return Err(Error::Registry(format!("`{name}`: zero scale")));
        }
        let stored = self.stored_digits();
        let d = sqrt_floor_scaled(radicand, &scale, &offset, stored);
        let one = pow10(stored);
        if d.sign() != Sign::Plus || d >= one {
            return Err(Error::Registry(format!("`{name}`: value must lie in (0,1)")));
        }
        let decimal = format!("0.{:0>width$}", d.to_string(), width = stored as usize);
        let approx = decimal.parse::<f64>().unwrap();
        self.push(GenEntry {
            name: name.to_string(),
            provenance: provenance.to_string(),
            source: GenSource::Sqrt {
                radicand,
                scale,
                offset,
            },
            decimal,
            literal_digits: None,
            stored,
            approx,
            cache: Mutex::new(None),
        })
    }

    /// Register `sqrt(p) / K` for a fresh prime `p`, with `K` the smallest integer
    /// making the value strictly below `bound`.
    pub fn add_small_sqrt(&self, name: &str, bound: &BigRational, provenance: &str) -> Result<GenId> {
        let p = self.fresh_prime();
        // smallest K with sqrt(p) < K * bound  <=>  p < K^2 bound^2
        let b2 = bound * bound;
        let need = BigRational::from_integer(BigInt::from(p)) / b2;
        let mut k = need.to_integer().sqrt();
        while BigRational::from_integer(&k * &k) <= need {
            k += BigInt::one();
        }
        let scale = BigRational::new(BigInt::one(), k.clone());
        let prov = format!("sqrt({p})/{k}; {provenance}");
        self.add_sqrt(name, p, scale, BigInt::zero(), &prov)
    }

    /// Number of decimal digits of `id` that can be produced, capped at [`MAX_DIGITS`].
    pub fn digit_cap(&self, id: GenId) -> Result<u32> {
        Ok(self.entry(id)?.available_digits().unwrap_or(MAX_DIGITS))
    }
}

/// Squarefree kernel decomposition: n = s^2 * k with k squarefree.
pub fn square_split(n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut k = n;
    let mut d = 2u64;
    while d * d <= k {
        while k % (d * d) == 0 {
            k /= d * d;
            s *= d;
        }
        d += 1;
    }
    (s, k)
}

pub(crate) fn bigrat_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // scale down huge operands
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_padding_and_precision_error() {
        let r = Registry::new();
        let t = r.add_literal("t1", "0.125", "test").unwrap();
        assert_eq!(r.value_f64(t), 0.125);
        assert_eq!(r.scaled_floor(t, 3).unwrap(), BigInt::from(125));
        assert_eq!(r.scaled_floor(t, 60).unwrap(), BigInt::from(125) * pow10(57));
        match r.scaled_floor(t, 61) {
            Err(Error::Precision { name, .. }) => assert_eq!(name, "t1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sqrt_digits_match_known_expansion() {
        let r = Registry::new();
        let g = r
            .add_sqrt("g2", 2, BigRational::one(), BigInt::from(-1), "frac sqrt2")
            .unwrap();
        // sqrt(2) - 1 = 0.41421356237309504880168872420969807856967187537694...
        let d = r.scaled_floor(g, 50).unwrap().to_string();
        assert_eq!(d, "41421356237309504880168872420969807856967187537694");
        assert!(r.entry(g).unwrap().decimal.starts_with("0.4142135623730950488"));
    }

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        let r = Registry::new();
        assert!(r
            .add_sqrt("x", 2, BigRational::one(), BigInt::zero(), "")
            .is_err());
        r.add_literal("a", "0.5", "").unwrap();
        assert!(r.add_literal("a", "0.25", "").is_err());
        assert!(r.add_literal("z", "0.000", "").is_err());
        let s = BigRational::new(1.into(), 4.into());
        r.add_sqrt("s3", 3, s.clone(), BigInt::zero(), "").unwrap();
        assert!(r.add_sqrt("s3b", 3, s, BigInt::zero(), "").is_err());
    }

    #[test]
    fn small_sqrt_respects_bound_and_uses_fresh_primes() {
        let r = Registry::new();
        let bound = BigRational::new(1.into(), 7.into());
        let a = r.add_small_sqrt("a1", &bound, "").unwrap();
        let b = r.add_small_sqrt("b1", &bound, "").unwrap();
        assert!(r.value_f64(a) < 1.0 / 7.0 && r.value_f64(a) > 0.0);
        assert!(r.value_f64(b) < 1.0 / 7.0);
        assert_eq!(r.fresh_prime(), 5);
    }

    #[test]
    fn square_split_kernels() {
        assert_eq!(square_split(8), (2, 2));
        assert_eq!(square_split(12), (2, 3));
        assert_eq!(square_split(36), (6, 1));
        assert_eq!(square_split(7), (1, 7));
    }

    #[test]
    fn negative_scale_floor() {
        // 1 - sqrt(2)/2 = 0.29289321881345247559915563789515...
        let r = Registry::new();
        let g = r
            .add_sqrt("h", 2, BigRational::new((-1).into(), 2.into()), BigInt::one(), "")
            .unwrap();
        assert_eq!(r.scaled_floor(g, 20).unwrap().to_string(), "29289321881345247559");
    }
}
