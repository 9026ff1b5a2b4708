//! Shifted-difference series `sum a_n (translate(sigma_n, -t_n) - sigma_n)` and
//! the modulated series forming its transform.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Certificate;
use crate::eigenlab::{nested_family, Marker, NestedFamily};
use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, q, GenId, PointOrder, Registry, SymbolicPoint, Q};
use crate::fourier::{Lambda, PeriodicComb, Term};
use crate::measure::{fmt_big, PointMeasure, Weight};
use crate::testfn::{Bump, Gaussian, KahanSum};

/// Quadrature nodes used for the bump transform.
pub const BUMP_NODES: usize = 4096;

fn big(x: &Q) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// Lower bound read off the stored digits `0.ddd...`.
fn decimal_lower(s: &str) -> Result<BigRational> {
    let digits = s
        .strip_prefix("0.")
        .ok_or_else(|| Error::Parse(format!("not a fractional decimal: {s}")))?;
    let n: BigInt = digits.parse().map_err(|_| Error::Parse(s.to_string()))?;
    Ok(BigRational::new(n, BigInt::from(10u32).pow(digits.len() as u32)))
}

fn decimal_upper(s: &str) -> Result<BigRational> {
    let lo = decimal_lower(s)?;
    let len = s.len() as u32 - 2;
    Ok(lo + BigRational::new(BigInt::one(), BigInt::from(10u32).pow(len)))
}

/// `sum_{n > N} |a_n| t_n (4 k_n^2 + k_n) <= 2^{-N}`, enforced term by term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCertificate {
    pub rule: String,
    /// Certified upper bounds on `|a_n| t_n (4 k_n^2 + k_n)`, one per retained term.
    pub term_bounds: Vec<f64>,
}

impl TailCertificate {
    /// Bound on everything after the first `depth` terms.
    pub fn tail_after(&self, depth: usize) -> f64 {
        0.5f64.powi(depth as i32)
    }

    pub fn partial_sum(&self, depth: usize) -> f64 {
        let mut s = KahanSum::default();
        for b in self.term_bounds.iter().take(depth) {
            s.add(*b);
        }
        s.sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDescriptor {
    pub k_rule: String,
    pub a_rule: String,
    pub k: Vec<usize>,
    #[serde(with = "q_vec")]
    pub a: Vec<Q>,
    pub t_names: Vec<String>,
    /// Strict upper bounds `t_n < bound_n` as exact rationals.
    pub t_bounds: Vec<String>,
    pub tail_certificate: Option<TailCertificate>,
}

mod q_vec {
    use crate::exactnum::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(fmt_q).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl SeriesDescriptor {
    pub fn depth(&self) -> usize {
        self.k.len().min(self.a.len()).min(self.t_names.len())
    }

    pub fn t_ids(&self, reg: &Registry) -> Result<Vec<GenId>> {
        self.t_names.iter().map(|n| reg.lookup(n)).collect()
    }

    pub fn t_point(&self, reg: &Registry, n: usize) -> Result<SymbolicPoint> {
        Ok(SymbolicPoint::generator(reg.lookup(&self.t_names[n])?))
    }
}

/// Register `t_1 > t_2 > ...` as fresh independent generators with
/// `t_n < min(cap_n, 2^{-3n^2}, 2^{-n} / (|a_n| (4k_n^2 + k_n)), t_{n-1})`.
pub fn series_descriptor(
    reg: &Registry,
    prefix: &str,
    k: &[usize],
    a: &[Q],
    caps: &[Option<BigRational>],
) -> Result<SeriesDescriptor> {
    if k.len() != a.len() {
        return Err(Error::Shape("k and a sequences differ in length".into()));
    }
    let mut t_names = Vec::new();
    let mut t_bounds = Vec::new();
    let mut term_bounds = Vec::new();
    let mut prev: Option<BigRational> = None;
    for (i, (&kn, an)) in k.iter().zip(a).enumerate() {
        let n = (i + 1) as u64;
        let c = BigInt::from(4 * kn * kn + kn);
        let abs_a = big(an).abs();
        let mut bound = BigRational::new(BigInt::one(), pow2(3 * n * n));
        if !abs_a.is_zero() {
            let tail = BigRational::new(BigInt::one(), pow2(n)) / (&abs_a * BigRational::from_integer(c.clone()));
            bound = bound.min(tail);
        }
        if let Some(Some(cap)) = caps.get(i) {
            bound = bound.min(cap.clone());
        }
        if let Some(p) = &prev {
            bound = bound.min(p.clone());
        }
        let name = format!("{prefix}_{n}");
        let id = reg.add_small_sqrt(&name, &bound, &format!("series shift t_{n}"))?;
        let entry = reg.entry(id)?;
        prev = Some(decimal_lower(&entry.decimal)?);
        let upper = decimal_upper(&entry.decimal)?.min(bound.clone());
        let tb = &abs_a * upper * BigRational::from_integer(c);
        term_bounds.push(crate::exactnum::bigrat_to_f64(&tb) * (1.0 + 1e-15));
        t_names.push(name);
        t_bounds.push(fmt_big(&bound));
    }
    Ok(SeriesDescriptor {
        k_rule: "k_n = 4^n".into(),
        a_rule: "supplied".into(),
        k: k.to_vec(),
        a: a.to_vec(),
        t_names,
        t_bounds,
        tail_certificate: Some(TailCertificate {
            rule: "|a_n| t_n (4k_n^2 + k_n) < 2^-n".into(),
            term_bounds,
        }),
    })
}

#[derive(Clone, Debug)]
pub struct FavorovPair {
    pub sigma_term: Term,
    pub big_sigma_term: Term,
    pub sigma: PointMeasure,
    pub big_sigma: PointMeasure,
    /// `supp(sigma)` lies in `Q` and the translates `-t_n + Q`.
    pub sigma_support_ok: bool,
    /// `supp(Sigma)` lies in `Q`.
    pub big_sigma_support_ok: bool,
    pub certificate: Certificate,
}

fn sigma_terms(desc: &SeriesDescriptor, family: &NestedFamily, depth: usize, reg: &Registry) -> Result<(Term, Term)> {
    let lambda = family.lambda.to_weight();
    let mut s = Vec::with_capacity(depth);
    let mut f = Vec::with_capacity(depth);
    for n in 0..depth {
        let t = desc.t_point(reg, n)?;
        let comb = Term::comb(family.combs[n].clone());
        let a = Weight::q(desc.a[n]);
        s.push(comb.clone().translate_diff(t.neg()).scale(a.clone()));
        f.push(comb.modulate_diff(t).scale(a.mul(&lambda)));
    }
    Ok((Term::Sum(s), Term::Sum(f)))
}

/// Truncation of the pair on `[lo, hi]`, exact there by the gap of term `N + 1`.
pub fn favorov_pair(
    reg: &Registry,
    desc: &SeriesDescriptor,
    family: &NestedFamily,
    depth: usize,
    lo: Q,
    hi: Q,
) -> Result<FavorovPair> {
    let tail = desc
        .tail_certificate
        .as_ref()
        .ok_or_else(|| Error::Certification("series descriptor has no tail certificate".into()))?;
    if depth == 0 || depth > desc.depth() || depth > family.combs.len() {
        return Err(Error::Spec(format!("depth {depth} exceeds the available terms")));
    }
    for n in 0..depth {
        if desc.k[n] != family.k_seq[n] {
            return Err(Error::Spec(format!("k_{} differs between descriptor and family", n + 1)));
        }
    }
    // first omitted term vanishes on |x| < k/4 - 1, shifts move it by less than 1
    let k_next = family
        .k_seq
        .get(depth)
        .copied()
        .unwrap_or(2 * family.k_seq[depth - 1] + 8);
    let safe = q(k_next as i64, 4) - q(2, 1);
    let reach = if -lo > hi { -lo } else { hi };
    if reach > safe {
        return Err(Error::Coverage(format!(
            "window [{}, {}] exceeds the exact region |x| <= {} of depth {depth}",
            fmt_q(&lo),
            fmt_q(&hi),
            fmt_q(&safe)
        )));
    }
    let (sigma_term, big_sigma_term) = sigma_terms(desc, family, depth, reg)?;
    let sigma = sigma_term
        .realize(reg, lo, hi)?
        .with_meta("construction", "favorov_sigma")
        .with_meta("depth", depth);
    let big_sigma = big_sigma_term
        .realize(reg, lo, hi)?
        .with_meta("construction", "favorov_Sigma")
        .with_meta("depth", depth);
    let t_ids = desc.t_ids(reg)?;
    let sigma_support_ok = sigma.atoms().iter().all(|a| match a.coord.coeffs() {
        [] => true,
        [(g, c)] => *c == q(-1, 1) && t_ids.contains(g),
        _ => false,
    });
    let big_sigma_support_ok = big_sigma.atoms().iter().all(|a| a.coord.is_rational());
    let certificate = Certificate {
        construction: "favorov".into(),
        window: Some((fmt_q(&lo), fmt_q(&hi))),
        depth: Some(depth),
        tail_bound: Some(tail.tail_after(depth)),
        ..Default::default()
    }
    .param("k_rule", &desc.k_rule)
    .param("a_rule", &desc.a_rule)
    .param("a", desc.a[..depth].iter().map(fmt_q).collect::<Vec<_>>().join(","))
    .param("t", desc.t_names[..depth].join(","))
    .param("t_bounds", desc.t_bounds[..depth].join(","))
    .param("lambda", family.lambda)
    .check("tech_condition_partial_sum", tail.partial_sum(depth))
    .check("sigma_support_in_Q_or_shifted_Q", sigma_support_ok)
    .check("Sigma_support_in_Q", big_sigma_support_ok);
    Ok(FavorovPair {
        sigma_term,
        big_sigma_term,
        sigma,
        big_sigma,
        sigma_support_ok,
        big_sigma_support_ok,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomVerdict {
    pub n: usize,
    pub point: String,
    pub weight: String,
    pub a_n: String,
    /// `sigma({y_n - t_n}) = a_n` exactly.
    pub equals_a_n: bool,
    /// `a_n - sum_{k<n} |a_k|`.
    pub lower_bound: String,
    pub lower_bound_holds: bool,
}

/// `y_n - t_n` as an exact point (`n` is 1-based).
pub fn marker_shift_point(family: &NestedFamily, desc: &SeriesDescriptor, n: usize, reg: &Registry) -> Result<SymbolicPoint> {
    let m = family
        .markers
        .get(n - 1)
        .ok_or_else(|| Error::Marker(format!("no marker for n = {n}")))?;
    SymbolicPoint::rational(m.y).sub(&desc.t_point(reg, n - 1)?)
}

/// Exact weight of `sigma` at `y_n - t_n` against `a_n` and the lower bound.
pub fn atom_identity_check(
    sigma: &Term,
    family: &NestedFamily,
    desc: &SeriesDescriptor,
    n: usize,
    reg: &Registry,
) -> Result<AtomVerdict> {
    if n == 0 || n > desc.depth() {
        return Err(Error::Spec(format!("term index {n} out of range")));
    }
    let p = marker_shift_point(family, desc, n, reg)?;
    let w = sigma.atom_weight(&p, &PointOrder::new(reg))?;
    let a_n = Weight::q(desc.a[n - 1]);
    let lower = (0..n - 1).fold(big(&desc.a[n - 1]), |acc, k| acc - big(&desc.a[k]).abs());
    let lower_bound_holds = match &w {
        Weight::Exact(g) => g.im.is_zero() && g.re >= lower,
        Weight::Num(z) => z.im.abs() <= 1e-12 * z.norm() && z.re >= crate::exactnum::bigrat_to_f64(&lower),
    };
    Ok(AtomVerdict {
        n,
        point: serde_json::to_string(&crate::io::point_to_json(&p, reg)?)?,
        weight: w.to_string(),
        a_n: fmt_q(&desc.a[n - 1]),
        equals_a_n: w.is_exact() && w == a_n,
        lower_bound: fmt_big(&lower),
        lower_bound_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ex1Params {
    #[serde(with = "crate::io::q_string")]
    pub y: Q,
    /// `c_n`, powers of two.
    pub c_seq: Vec<f64>,
    pub delta_seq: Vec<f64>,
    pub bump: Bump,
    pub depth: usize,
    /// Smallest `|phi^(x - y)| / c_n` seen on the margin probes.
    pub margin_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct Ex1Instance {
    /// Family with markers possibly mirrored to the positive side.
    pub family: NestedFamily,
    pub desc: SeriesDescriptor,
    pub params: Ex1Params,
    pub sigma: Term,
    pub big_sigma: Term,
    /// `sum_j conj(lambda)^j F^j sigma`.
    pub eta: Term,
    /// `psi(x) = e^{2πi x y} phi(x)`.
    pub psi: String,
    /// Exact partial sums of `(a_n c_n)^2`.
    pub bessel_exact: Vec<BigRational>,
    /// Partial sums of `|a_n phi^(y_n - t_n - y)|^2`.
    pub bessel_measured: Vec<f64>,
    pub certificate: Certificate,
}

fn is_default_bump(b: &Bump) -> bool {
    b.center == 0.0 && b.width == 1.0
}

fn bump_hat_q(b: &Bump, xi: Q) -> Complex64 {
    if is_default_bump(b) {
        Bump::hat_exact_phase(xi, BUMP_NODES)
    } else {
        b.hat(crate::exactnum::q_to_f64(&xi), BUMP_NODES)
    }
}

/// Grid point `y` (spacing `1/den`) maximizing `min_n |phi^(y_n - y)|`.
pub fn choose_bump_margins(bump: &Bump, markers: &[Q], den: i64) -> Result<(Q, Vec<f64>)> {
    if markers.is_empty() {
        return Err(Error::Marker("no markers".into()));
    }
    let lo = markers.iter().min().unwrap().floor().to_integer() - 1;
    let hi = markers.iter().max().unwrap().ceil().to_integer() + 1;
    let candidates: Vec<Q> = (lo * den..=hi * den).map(|j| q(j, den)).collect();
    use rayon::prelude::*;
    let best = candidates
        .par_iter()
        .map(|y| {
            let m = markers
                .iter()
                .map(|yn| bump_hat_q(bump, yn - y).norm())
                .fold(f64::INFINITY, f64::min);
            (m, *y)
        })
        .reduce(|| (f64::NEG_INFINITY, Q::zero()), |a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        });
    if !(best.0 > 0.0) || !best.0.is_finite() {
        return Err(Error::Input("bump transform vanishes on the probe grid".into()));
    }
    let vals = markers.iter().map(|yn| bump_hat_q(bump, yn - best.1).norm()).collect();
    Ok((best.1, vals))
}

/// Replace each marker `y` by `-y` when the comb carries weight exactly 1 there too.
fn mirror_markers(family: &mut NestedFamily) {
    for (c, m) in family.combs.iter().zip(family.markers.iter_mut()) {
        if m.y_index < 0 && c.weight_at(-m.y_index) == Complex64::new(1.0, 0.0) {
            *m = Marker {
                y_index: -m.y_index,
                y: -m.y,
                close_pair: m.close_pair,
            };
        }
    }
}

/// Instance of the non-strongly-tempered eigenmeasure with `k_n = 4^n`.
pub fn theorem_ex1_instance(reg: &Registry, bump: Bump, depth: usize, lambda: Lambda, seed: u64) -> Result<Ex1Instance> {
    if !(bump.width > 0.0) || !bump.width.is_finite() || !bump.center.is_finite() {
        return Err(Error::Input("bump must have positive finite width".into()));
    }
    if depth == 0 || depth > 5 {
        return Err(Error::Capacity(format!("depth {depth} outside 1..=5")));
    }
    let k: Vec<usize> = (1..=depth as u32).map(|n| 4usize.pow(n)).collect();
    let mut family = nested_family(&k, lambda, seed)?;
    mirror_markers(&mut family);
    for n in 0..depth {
        if !family.marker_isolated(n) {
            return Err(Error::Marker(format!("marker {} is not isolated from later terms", n + 1)));
        }
    }
    let markers: Vec<Q> = family.markers.iter().map(|m| m.y).collect();
    let (y, hats) = choose_bump_margins(&bump, &markers, 64)?;
    // sup |phi^'| <= ∫ |2πx phi|
    let lip = bump.moments(BUMP_NODES).1 * (1.0 + 1e-6);
    let mut c_seq = Vec::new();
    let mut delta_seq = Vec::new();
    let mut a = Vec::new();
    let mut caps = Vec::new();
    for &h in &hats {
        let e = (-(h / 2.0).log2()).ceil().max(0.0) as i32;
        if e > 60 {
            return Err(Error::Capacity(format!("|phi^| = {h:e} too small for i64 weights")));
        }
        let c = 0.5f64.powi(e);
        let delta = c / (2.0 * lip);
        c_seq.push(c);
        delta_seq.push(delta);
        a.push(Q::from_integer(1i64 << e));
        caps.push(BigRational::from_float(delta).ok_or(Error::Overflow("delta"))?);
    }
    // |x - y_n| < delta_n  =>  |phi^(x - y)| >= 2c_n - lip delta_n > c_n; probe it
    let mut margin_ratio = f64::INFINITY;
    let y_f = crate::exactnum::q_to_f64(&y);
    for (n, yn) in markers.iter().enumerate() {
        let yn = crate::exactnum::q_to_f64(yn);
        for j in -16..=16 {
            let x = yn + delta_seq[n] * j as f64 / 16.5;
            let v = bump.hat(x - y_f, BUMP_NODES).norm() / c_seq[n];
            margin_ratio = margin_ratio.min(v);
        }
    }
    if !(margin_ratio > 1.0) {
        return Err(Error::Certification(format!("margin probe failed, ratio {margin_ratio}")));
    }
    let mut desc = series_descriptor(reg, "ex1_t", &k, &a, &caps.into_iter().map(Some).collect::<Vec<_>>())?;
    desc.a_rule = "a_n = 1/c_n".into();
    let (sigma, big_sigma) = sigma_terms(&desc, &family, depth, reg)?;
    let mut eta_parts = Vec::with_capacity(4);
    let mut cur = sigma.clone();
    for j in 0..4u32 {
        eta_parts.push(cur.clone().scale(lambda.conj().pow(j).to_weight()));
        cur = cur.fourier()?;
    }
    let eta = Term::Sum(eta_parts);
    let mut bessel_exact = Vec::new();
    let mut bessel_measured = Vec::new();
    let mut acc = BigRational::zero();
    let mut meas = KahanSum::default();
    for n in 0..depth {
        let ac = big(&a[n]) * BigRational::from_float(c_seq[n]).unwrap();
        acc += &ac * &ac;
        bessel_exact.push(acc.clone());
        let t = reg.value_f64(desc.t_ids(reg)?[n]);
        let xi = crate::exactnum::q_to_f64(&(markers[n] - y)) - t;
        let v = a[n].to_f64().unwrap() * bump.hat(xi, BUMP_NODES).norm();
        meas.add(v * v);
        bessel_measured.push(meas.sum());
    }
    let params = Ex1Params {
        y,
        c_seq,
        delta_seq,
        bump,
        depth,
        margin_ratio,
    };
    let certificate = Certificate {
        construction: "ex1".into(),
        window: None,
        depth: Some(depth),
        tail_bound: desc.tail_certificate.as_ref().map(|t| t.tail_after(depth)),
        ..Default::default()
    }
    .param("y", fmt_q(&y))
    .param("bump", format!("center={},width={}", bump.center, bump.width))
    .param("lambda", lambda)
    .param("seed", seed)
    .param("markers", markers.iter().map(fmt_q).collect::<Vec<_>>().join(","))
    .param("a", a.iter().map(fmt_q).collect::<Vec<_>>().join(","))
    .check("margin_ratio", margin_ratio)
    .check("bessel_exact", bessel_exact.iter().map(fmt_big).collect::<Vec<_>>().join(","));
    Ok(Ex1Instance {
        family,
        desc,
        params,
        sigma,
        big_sigma,
        eta,
        psi: format!("e^(2πi x {}) phi(x)", fmt_q(&y)),
        bessel_exact,
        bessel_measured,
        certificate,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechBound {
    pub m: usize,
    pub t: f64,
    pub function: String,
    pub value: [f64; 2],
    pub tail: f64,
    pub empirical: f64,
    pub weighted_norm: f64,
    pub constant: usize,
    pub bound: f64,
    pub holds: bool,
}

/// `||(1+x^2) f'||_∞` for a centered, unmodulated Gaussian, in closed form.
pub fn weighted_derivative_norm(g: &Gaussian) -> Result<f64> {
    if g.c != 0.0 || g.xi != 0.0 {
        return Err(Error::Certification(
            "closed form needs a centered unmodulated Gaussian".into(),
        ));
    }
    // |x|(1+x^2)e^{-a x^2} peaks at u = x^2 solving 2a u^2 + (2a-3)u - 1 = 0
    let a = std::f64::consts::PI * g.s;
    let u = ((3.0 - 2.0 * a) + ((2.0 * a - 3.0).powi(2) + 8.0 * a).sqrt()) / (4.0 * a);
    Ok(g.amp.norm() * 2.0 * a * u.sqrt() * (1.0 + u) * (-a * u).exp())
}

/// Pairing of `translate(mu, t) - mu` with `f` over `[-R, R]` plus a certified tail,
/// against `t (4m^2 + m) ||(1+x^2) f'||_∞`.
pub fn lemma_tech_bound(mu: &PeriodicComb, t: Q, f: &Gaussian, radius: f64) -> Result<TechBound> {
    let tf = crate::exactnum::q_to_f64(&t);
    if !(tf > 0.0 && tf < 1.0) {
        return Err(Error::Input("t must lie in (0, 1)".into()));
    }
    if mu.max_abs() > 1.0 {
        return Err(Error::Input("weights must lie in the unit disk".into()));
    }
    let m = mu.m as f64;
    let (a, b) = ((-radius * m).ceil() as i64, (radius * m).floor() as i64);
    let mut acc = crate::testfn::CSum::default();
    for j in a..=b {
        let w = mu.weight_at(j);
        if w != Complex64::new(0.0, 0.0) {
            acc.add(w * f.shift_diff(j as f64 / m, tf));
        }
    }
    let (cl, ch) = ((a as f64 - 0.5) / m, (b as f64 + 0.5) / m);
    let cell = mu.cell_mass_bound();
    let tail = f.cell_tail(cl, ch, cell, 0.0) + f.shift_arg(tf).cell_tail(cl, ch, cell, 0.0);
    if !tail.is_finite() {
        return Err(Error::Certification("tail bound unavailable".into()));
    }
    let value = acc.sum();
    let weighted_norm = weighted_derivative_norm(f)?;
    let constant = 4 * mu.m * mu.m + mu.m;
    let bound = tf * constant as f64 * weighted_norm;
    let empirical = value.norm() + tail;
    Ok(TechBound {
        m: mu.m,
        t: tf,
        function: f.id(),
        value: [value.re, value.im],
        tail,
        empirical,
        weighted_norm,
        constant,
        bound,
        holds: empirical <= bound,
    })
}

/// `sum_{|l| <= L} 1/(1+l^2)` against `π coth π`.
pub fn pi_coth_pi_check(l: u64) -> (f64, f64, f64) {
    let mut s = KahanSum::default();
    // smallest terms first
    for k in (1..=l).rev() {
        let kf = k as f64;
        s.add(2.0 / (1.0 + kf * kf));
    }
    s.add(1.0);
    let pi = std::f64::consts::PI;
    let exact = pi / pi.tanh();
    (s.sum(), exact, (s.sum() - exact).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::qi;
    use crate::fourier::{duality_residual, gaussian_family};

    #[test]
    fn descriptor_bounds_and_order() {
        let reg = Registry::new();
        let d = series_descriptor(&reg, "t", &[4, 16], &[qi(1), qi(8)], &[]).unwrap();
        let ids = d.t_ids(&reg).unwrap();
        let (t1, t2) = (reg.value_f64(ids[0]), reg.value_f64(ids[1]));
        assert!(0.0 < t2 && t2 < t1 && t1 < 0.125);
        assert!(t2 < 0.5f64.powi(12));
        let tc = d.tail_certificate.unwrap();
        assert!(tc.term_bounds[0] < 0.5 && tc.term_bounds[1] < 0.25);
        assert!(tc.tail_after(2) < tc.tail_after(1));
    }

    #[test]
    fn single_term_pair() {
        let reg = Registry::new();
        let fam = nested_family(&[4], Lambda::One, 5).unwrap();
        let d = series_descriptor(&reg, "t", &[4], &[qi(3)], &[]).unwrap();
        let p = favorov_pair(&reg, &d, &fam, 1, qi(-2), qi(2)).unwrap();
        let s1 = fam.combs[0].realize(&reg, qi(-2), qi(2)).unwrap();
        // atoms strictly inside shift cleanly; only the boundary atom at -2 drops out
        assert!(p.sigma.len() >= 2 * s1.len() - 2);
        let mags: Vec<f64> = s1.atoms().iter().map(|a| 3.0 * a.weight.abs()).collect();
        assert!(p
            .sigma
            .atoms()
            .iter()
            .all(|a| mags.iter().any(|m| (m - a.weight.abs()).abs() <= 1e-12 * m)));
        assert!(p.sigma_support_ok && p.big_sigma_support_ok);
        // Sigma weight at x: lambda a (e^{2πi x t} - 1) w(x)
        let t = reg.value_f64(d.t_ids(&reg).unwrap()[0]);
        for at in p.big_sigma.atoms() {
            let x = crate::exactnum::q_to_f64(&at.coord.rat());
            let w = fam.combs[0].weight_at_point(&at.coord).to_c64();
            let want = 3.0 * (Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x * t) - 1.0) * w;
            assert!((at.weight.to_c64() - want).norm() <= 1e-12 * want.norm().max(1e-300));
        }
        let fam_g = gaussian_family(&[0.5, 1.0, 2.0]);
        let r = duality_residual(&p.sigma_term, &p.big_sigma_term, &fam_g, &reg).unwrap();
        assert!(r.max_residual() <= 1e-9, "{r:?}");
    }

    #[test]
    fn exponential_coefficients_force_ball_mass() {
        let reg = Registry::new();
        let k = [4usize, 16];
        let fam = nested_family(&k, Lambda::One, 7).unwrap();
        let a: Vec<Q> = k.iter().map(|&kn| qi(1i64 << kn)).collect();
        let d = series_descriptor(&reg, "t", &k, &a, &[]).unwrap();
        let p = favorov_pair(&reg, &d, &fam, 2, qi(-8), qi(8)).unwrap();
        // markers sit in |y| <= k_n / 2, inside the exact region |x| <= 8
        let mut prev = 0.0;
        for &kn in &k {
            let m = crate::measure::ball_mass(&p.sigma, qi(kn.min(8) as i64)).unwrap();
            let an = (1u64 << kn) as f64;
            assert!(m >= an - prev, "k={kn}: {m}");
            prev += an;
        }
    }

    #[test]
    fn missing_certificate_rejected() {
        let reg = Registry::new();
        let fam = nested_family(&[4], Lambda::One, 5).unwrap();
        let mut d = series_descriptor(&reg, "t", &[4], &[qi(1)], &[]).unwrap();
        d.tail_certificate = None;
        let e = favorov_pair(&reg, &d, &fam, 1, qi(-1), qi(1)).unwrap_err();
        assert!(matches!(e, Error::Certification(_)));
    }

    #[test]
    fn atom_identities_small() {
        let reg = Registry::new();
        let fam = nested_family(&[4, 16], Lambda::One, 9).unwrap();
        let d = series_descriptor(&reg, "t", &[4, 16], &[qi(2), qi(4)], &[]).unwrap();
        let (s, _) = sigma_terms(&d, &fam, 2, &reg).unwrap();
        for n in 1..=2 {
            let v = atom_identity_check(&s, &fam, &d, n, &reg).unwrap();
            assert!(v.equals_a_n && v.lower_bound_holds, "{v:?}");
        }
        // dependent shifts: t_2 := t_1
        let mut dep = d.clone();
        dep.t_names[1] = dep.t_names[0].clone();
        let (s2, _) = sigma_terms(&dep, &fam, 2, &reg).unwrap();
        let v = atom_identity_check(&s2, &fam, &dep, 2, &reg).unwrap();
        assert!(v.lower_bound_holds, "{v:?}");
    }

    #[test]
    fn tech_lemma_and_constant() {
        let (c, _) = crate::eigenlab::synthesize(&crate::eigenlab::EigenSpec::new(4, Lambda::One, 1)).unwrap();
        let g = Gaussian::new(1.0);
        let b = lemma_tech_bound(&c, q(1, 1000), &g, 30.0).unwrap();
        assert_eq!(b.constant, 68);
        assert!(b.holds, "{b:?}");
        let b10 = lemma_tech_bound(&c, q(1, 10000), &g, 30.0).unwrap();
        assert!((b10.bound * 10.0 - b.bound).abs() <= 1e-15 * b.bound);
        let (s, e, d) = pi_coth_pi_check(1_000_000);
        assert!(d <= 1e-5 && (e - 3.1533).abs() < 1e-4 && s < 4.0);
    }

    #[test]
    fn weighted_norm_against_grid() {
        for s in [0.5, 1.0, 2.0] {
            let g = Gaussian::new(s);
            let h = weighted_derivative_norm(&g).unwrap();
            let pi = std::f64::consts::PI;
            let grid = (0..200_000)
                .map(|i| {
                    let x = i as f64 * 1e-4;
                    (1.0 + x * x) * 2.0 * pi * s * x * (-pi * s * x * x).exp()
                })
                .fold(0.0, f64::max);
            assert!(h >= grid && h - grid < 1e-6, "{h} {grid}");
        }
    }

    #[test]
    fn ex1_instance_depth_three() {
        let reg = Registry::new();
        let inst = theorem_ex1_instance(&reg, Bump::default(), 3, Lambda::One, 11).unwrap();
        assert!(inst.params.margin_ratio > 1.0);
        for (n, b) in inst.bessel_exact.iter().enumerate() {
            assert_eq!(*b, BigRational::from_integer((n as i64 + 1).into()));
            assert!(inst.bessel_measured[n] >= (n + 1) as f64 * (1.0 - 1e-9));
        }
        for n in 1..=3 {
            let v = atom_identity_check(
                &inst.sigma,
                &inst.family,
                &inst.desc,
                n,
                &reg,
            )
            .unwrap();
            assert!(v.equals_a_n && v.lower_bound_holds, "{v:?}");
        }
    }
}
