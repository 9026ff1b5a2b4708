//! Kahane-Salem measures `omega_{a,b}`, their convolution powers, the
//! normalized shifts `Omega_m` and the convolution series built from them.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Certificate;
use crate::eigenlab::{synthesize, EigenSpec};
use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, q, GenId, Registry, SymbolicPoint, Q};
use crate::fourier::{cis_neg, product_torus_sup, FiniteSrc, Lambda, LazyFinite, PeriodicComb, Term, TorusSup, TrigPoly};
use crate::measure::{convolve_capped, total_variation_exact, window_norm, Atom, PointMeasure, Weight};

/// Largest `n` for which `theta_n` is built explicitly.
pub const THETA_CAP: usize = 10;
/// Largest `n` for which the lazy `Omega_m` will list its atoms exactly.
pub const OMEGA_EXACT_CAP: usize = 8;
pub const SUP_REL_TOL: f64 = 1e-13;
pub const SUP_MAX_BOXES: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsParams {
    pub n_max: usize,
    pub a: Vec<String>,
    pub b: Vec<String>,
    /// `c[n-1]` is the shift used at depth `n`.
    pub c: Vec<String>,
    /// Common strict bound `1/(2 n_max + 1)`.
    pub bound: String,
}

impl KsParams {
    fn ids(names: &[String], reg: &Registry) -> Result<Vec<GenId>> {
        names.iter().map(|s| reg.lookup(s)).collect()
    }

    pub fn a_ids(&self, reg: &Registry) -> Result<Vec<GenId>> {
        Self::ids(&self.a, reg)
    }

    pub fn b_ids(&self, reg: &Registry) -> Result<Vec<GenId>> {
        Self::ids(&self.b, reg)
    }

    pub fn c_id(&self, n: usize, reg: &Registry) -> Result<GenId> {
        let name = self
            .c
            .get(n.wrapping_sub(1))
            .ok_or_else(|| Error::Spec(format!("no shift c_{n} (n_max = {})", self.n_max)))?;
        reg.lookup(name)
    }
}

/// Register `a_i, b_i, c_n` for `i, n <= n_max`, all below `1/(2 n_max + 1)`.
///
/// One bound for every index keeps `theta_n` inside `[0, 1 - 1/(2n+1))` for all `n <= n_max`.
pub fn ks_params(reg: &Registry, prefix: &str, n_max: usize) -> Result<KsParams> {
    if n_max == 0 {
        return Err(Error::Spec("n_max must be positive".into()));
    }
    let bound = BigRational::new(BigInt::one(), BigInt::from(2 * n_max + 1));
    let reg_all = |kind: &str| -> Result<Vec<String>> {
        (1..=n_max)
            .map(|i| {
                let name = format!("{prefix}_{kind}{i}");
                reg.add_small_sqrt(&name, &bound, &format!("Kahane-Salem {kind}_{i}"))?;
                Ok(name)
            })
            .collect()
    };
    let a = reg_all("a")?;
    let b = reg_all("b")?;
    let c = reg_all("c")?;
    Ok(KsParams {
        n_max,
        a,
        b,
        c,
        bound: crate::measure::fmt_big(&bound),
    })
}

/// `delta_0 + delta_a + delta_b - delta_{a+b}`.
pub fn ks_omega(reg: &Registry, a: GenId, b: GenId) -> Result<PointMeasure> {
    let pa = SymbolicPoint::generator(a);
    let pb = SymbolicPoint::generator(b);
    let ab = pa.add(&pb)?;
    PointMeasure::finite(
        reg,
        [
            (SymbolicPoint::zero(), Weight::one()),
            (pa, Weight::one()),
            (pb, Weight::one()),
            (ab, Weight::int(-1)),
        ],
    )
}

/// `omega_{a_1,b_1} * ... * omega_{a_n,b_n}`, rejected unless it has `4^n` atoms.
pub fn ks_theta(reg: &Registry, params: &KsParams, n: usize) -> Result<PointMeasure> {
    if n == 0 || n > params.n_max {
        return Err(Error::Spec(format!("n = {n} outside 1..={}", params.n_max)));
    }
    if n > THETA_CAP {
        return Err(Error::Capacity(format!("theta_{n} has 4^{n} atoms, cap is n <= {THETA_CAP}")));
    }
    let (a, b) = (params.a_ids(reg)?, params.b_ids(reg)?);
    let mut theta = ks_omega(reg, a[0], b[0])?;
    for i in 1..n {
        theta = convolve_capped(&theta, &ks_omega(reg, a[i], b[i])?, 1 << (2 * THETA_CAP))?;
    }
    if theta.len() != 1 << (2 * n) {
        return Err(Error::Certification(format!(
            "theta_{n} has {} atoms, expected 4^{n}: the shifts are not independent",
            theta.len()
        )));
    }
    let tv = total_variation_exact(&theta);
    if tv != Some(BigRational::from_integer(BigInt::from(1u64 << (2 * n)))) {
        return Err(Error::Certification(format!("theta_{n} total variation is not 4^{n}")));
    }
    if let Some((lo, hi)) = theta.hull_f64() {
        if lo < -1e-12 || hi >= 1.0 - 1.0 / (2 * n + 1) as f64 {
            return Err(Error::Certification(format!("theta_{n} support [{lo}, {hi}] too wide")));
        }
    }
    Ok(theta.with_meta("construction", "ks_theta").with_meta("n", n))
}

/// Certified `sup |theta_n^|` as the product of the factor sups.
pub fn theta_sup(reg: &Registry, params: &KsParams, n: usize) -> Result<TorusSup> {
    let (a, b) = (params.a_ids(reg)?, params.b_ids(reg)?);
    let factors = (0..n)
        .map(|i| TrigPoly::from_measure(&ks_omega(reg, a[i], b[i])?))
        .collect::<Result<Vec<_>>>()?;
    product_torus_sup(&factors, SUP_REL_TOL, SUP_MAX_BOXES)
}

/// `Omega_m = delta_{c_n} * theta_n / (2^m ||theta_n^||_∞)`, enumerated lazily.
#[derive(Debug)]
pub struct KsOmega {
    reg: Registry,
    pub m: usize,
    pub n: usize,
    a: Vec<GenId>,
    b: Vec<GenId>,
    c: GenId,
    shift: f64,
    /// Subset sums and signs of the first `h` and last `n - h` factors.
    left: Vec<(f64, f64)>,
    right: Vec<(f64, f64)>,
    pub sup: TorusSup,
    /// `2^m * sup.upper`.
    pub norm: f64,
    reflected: bool,
}

fn half_sums(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 1.0)];
    for (x, y) in a.iter().zip(b) {
        let mut next = Vec::with_capacity(out.len() * 4);
        for &(p, s) in &out {
            next.push((p, s));
            next.push((p + x, s));
            next.push((p + y, s));
            next.push((p + x + y, -s));
        }
        out = next;
    }
    out
}

impl KsOmega {
    fn omega_hat(&self, i: usize, x: f64) -> Complex64 {
        let (a, b) = (self.reg.value_f64(self.a[i]), self.reg.value_f64(self.b[i]));
        Complex64::new(1.0, 0.0) + cis_neg(x, a) + cis_neg(x, b) - cis_neg(x, a + b)
    }

    /// `||Omega_m|| = 4^n / (2^m ||theta_n^||)`.
    pub fn mass(&self) -> f64 {
        4f64.powi(self.n as i32) / self.norm
    }

    /// `sup |Omega_m^|` lies in `[lower, 2^{-m}]`.
    pub fn hat_sup_interval(&self) -> (f64, f64) {
        (self.sup.lower / self.norm, self.sup.upper / self.norm)
    }

    pub fn shift_id(&self) -> GenId {
        self.c
    }

    pub fn generator_ids(&self) -> Vec<GenId> {
        let mut v: Vec<GenId> = self.a.iter().chain(&self.b).copied().collect();
        v.push(self.c);
        v
    }

    fn sign(&self) -> f64 {
        if self.reflected {
            -1.0
        } else {
            1.0
        }
    }

    /// Exact coordinate of atom `(i, j)`: `c + sum alpha_k a_k + beta_k b_k`.
    pub fn atom_point(&self, mut idx: usize) -> Result<(SymbolicPoint, f64)> {
        let mut terms = vec![(self.c, Q::from_integer(1))];
        let mut s = 1.0;
        for k in 0..self.n {
            let choice = idx & 3;
            idx >>= 2;
            let (al, be) = (choice & 1 == 1, choice & 2 == 2);
            if al {
                terms.push((self.a[k], Q::from_integer(1)));
            }
            if be {
                terms.push((self.b[k], Q::from_integer(1)));
            }
            if al && be {
                s = -s;
            }
        }
        let p = SymbolicPoint::new(Q::from_integer(0), terms)?;
        Ok((if self.reflected { p.neg() } else { p }, s / self.norm))
    }
}

impl LazyFinite for KsOmega {
    fn label(&self) -> String {
        format!("Omega_{}[n={}{}]", self.m, self.n, if self.reflected { ",reflected" } else { "" })
    }

    fn atom_count(&self) -> usize {
        1usize << (2 * self.n)
    }

    fn total_variation(&self) -> f64 {
        self.mass()
    }

    fn hull(&self) -> (f64, f64) {
        let width: f64 = self.a.iter().chain(&self.b).map(|g| self.reg.value_f64(*g)).sum();
        let (lo, hi) = (self.shift, self.shift + width);
        if self.reflected {
            (-hi, -lo)
        } else {
            (lo, hi)
        }
    }

    fn hat(&self, x: f64) -> Complex64 {
        let x = self.sign() * x;
        let mut v = cis_neg(x, self.shift) / self.norm;
        for i in 0..self.n {
            v *= self.omega_hat(i, x);
        }
        v
    }

    fn sup_hat(&self) -> f64 {
        self.sup.upper / self.norm
    }

    fn chunks(&self) -> usize {
        self.left.len()
    }

    fn for_each_in_chunk(&self, c: usize, f: &mut dyn FnMut(f64, Complex64)) {
        let (p, s) = self.left[c];
        let sg = self.sign();
        for &(q, t) in &self.right {
            f(sg * (self.shift + p + q), Complex64::new(s * t / self.norm, 0.0));
        }
    }

    fn atoms_exact(&self) -> Result<Vec<Atom>> {
        if self.n > OMEGA_EXACT_CAP {
            return Err(Error::Capacity(format!(
                "Omega_{} has 4^{} atoms; exact listing capped at n <= {OMEGA_EXACT_CAP}",
                self.m, self.n
            )));
        }
        (0..self.atom_count())
            .map(|i| {
                let (p, w) = self.atom_point(i)?;
                Ok(Atom::new(p, Weight::exact_from_c64(Complex64::new(w, 0.0))?))
            })
            .collect()
    }

    fn reflected(&self) -> Arc<dyn LazyFinite> {
        Arc::new(KsOmega {
            reg: self.reg.clone(),
            m: self.m,
            n: self.n,
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c,
            shift: self.shift,
            left: self.left.clone(),
            right: self.right.clone(),
            sup: self.sup.clone(),
            norm: self.norm,
            reflected: !self.reflected,
        })
    }
}

/// Lazy `Omega_m` at depth `n` (reduced growth target: caller picks `n`).
pub fn ks_big_omega(reg: &Registry, params: &KsParams, m: usize, n: usize) -> Result<KsOmega> {
    if n == 0 || n > params.n_max {
        return Err(Error::Spec(format!("n = {n} outside 1..={}", params.n_max)));
    }
    if n > 20 {
        return Err(Error::Capacity(format!("n = {n} too large for lazy enumeration")));
    }
    let (a, b) = (params.a_ids(reg)?[..n].to_vec(), params.b_ids(reg)?[..n].to_vec());
    let c = params.c_id(n, reg)?;
    let sup = theta_sup(reg, params, n)?;
    let h = n / 2;
    let av: Vec<f64> = a.iter().map(|g| reg.value_f64(*g)).collect();
    let bv: Vec<f64> = b.iter().map(|g| reg.value_f64(*g)).collect();
    let norm = 2f64.powi(m as i32) * sup.upper;
    Ok(KsOmega {
        reg: reg.clone(),
        m,
        n,
        shift: reg.value_f64(c),
        left: half_sums(&av[..h], &bv[..h]),
        right: half_sums(&av[h..], &bv[h..]),
        a,
        b,
        c,
        sup,
        norm,
        reflected: false,
    })
}

/// Smallest `n` with `2^{n/2} > 2^m (m^2 + 1)^m`.
pub fn full_growth_depth(m: u32) -> u32 {
    let target = m as f64 + m as f64 * ((m * m + 1) as f64).log2();
    (2.0 * target).floor() as u32 + 1
}

#[derive(Clone, Debug)]
pub struct Thm341Term {
    pub m: usize,
    pub n: usize,
    pub omega: Arc<KsOmega>,
    pub mu: PeriodicComb,
    /// `mu_m` has weight exactly 1 at `marker`, reduced into `[0, m)`.
    #[allow(dead_code)]
    pub marker: Q,
    pub term: Term,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthWitness {
    pub m: usize,
    pub radius: usize,
    /// Lower bound on `|sigma|(B_{m+1}(0))` from the atoms `y + marker`, `y` in `supp(Omega_m)`.
    pub ball_mass_lower: f64,
    pub omega_mass: f64,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct Thm341 {
    pub lambda: Lambda,
    pub terms: Vec<Thm341Term>,
    /// The first omitted term, used for the approximant bound.
    pub next: Thm341Term,
    pub sigma: Term,
    pub big_sigma: Term,
    pub disjoint: bool,
    pub growth: Vec<GrowthWitness>,
    /// `window_norm(Sigma_M, 1)` over the scan window.
    pub sigma_hat_window_norm: f64,
    /// `window_norm(Sigma_{M+1} - Sigma_M, 1)`.
    pub approximant_gap: f64,
    pub certificate: Certificate,
}

fn thm_term(reg: &Registry, params: &KsParams, m: usize, lambda: Lambda, seed: u64) -> Result<Thm341Term> {
    let n = 2 * m + 1;
    let omega = Arc::new(ks_big_omega(reg, params, m, n)?);
    let (mu, report) = synthesize(&EigenSpec::new(m, lambda, seed.wrapping_add(m as u64)))?;
    let mu = mu.tagged(Some(lambda));
    let idx = report
        .unit_weight_index
        .ok_or_else(|| Error::Marker(format!("mu_{m} has no weight-1 atom")))?;
    let marker = q(idx as i64, m as i64);
    let term = Term::convolve(FiniteSrc::Lazy(omega.clone()), Term::comb(mu.clone()));
    Ok(Thm341Term {
        m,
        n,
        omega,
        mu,
        marker,
        term,
    })
}

/// Exact disjointness of the term supports.
///
/// Every atom of term `m` has coefficient exactly 1 on its shift generator `c_{n(m)}`,
/// which does not occur in any other term.
pub fn support_disjointness(terms: &[Thm341Term]) -> Result<bool> {
    for (i, t) in terms.iter().enumerate() {
        for (j, u) in terms.iter().enumerate() {
            if i == j {
                continue;
            }
            if u.omega.generator_ids().contains(&t.omega.shift_id()) {
                return Ok(false);
            }
            // sampled exact confirmation on listed atoms
            let step = (t.omega.atom_count() / 257).max(1);
            for idx in (0..t.omega.atom_count()).step_by(step) {
                let (p, _) = t.omega.atom_point(idx)?;
                let p = p.add_rational(t.marker)?;
                if p.coeff(t.omega.shift_id()) != Q::from_integer(1) {
                    return Ok(false);
                }
                if p.coeff(u.omega.shift_id()) != Q::from_integer(0) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn growth_witness(t: &Thm341Term) -> GrowthWitness {
    let r = (t.m + 1) as f64;
    let y0 = crate::exactnum::q_to_f64(&t.marker);
    let om = &t.omega;
    let total: f64 = (0..om.chunks())
        .into_par_iter()
        .map(|c| {
            let mut s = crate::testfn::KahanSum::default();
            om.for_each_in_chunk(c, &mut |y, w| {
                let x = y + y0;
                if x.abs() <= r - 1e-12 {
                    s.add(w.norm());
                }
            });
            s.sum()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let mass = om.mass();
    GrowthWitness {
        m: t.m,
        radius: t.m + 1,
        ball_mass_lower: total,
        omega_mass: mass,
        holds: total >= mass * (1.0 - 1e-12),
    }
}

/// Approximant `sigma_M = sum_{m = m0}^{m0 + M - 1} Omega_m * mu_m` and its transform.
pub fn theorem341_pair(
    reg: &Registry,
    params: &KsParams,
    m0: usize,
    depth: usize,
    lambda: Lambda,
    seed: u64,
    scan: (Q, Q),
) -> Result<Thm341> {
    if depth == 0 {
        return Err(Error::Spec("need at least one term".into()));
    }
    let ms: Vec<usize> = (m0..m0 + depth).collect();
    let needed = 2 * (m0 + depth) + 1;
    if needed > params.n_max {
        return Err(Error::Spec(format!("parameters cover n <= {}, need {needed}", params.n_max)));
    }
    let terms = ms
        .iter()
        .map(|&m| thm_term(reg, params, m, lambda, seed))
        .collect::<Result<Vec<_>>>()?;
    let next = thm_term(reg, params, m0 + depth, lambda, seed)?;
    let sigma = Term::Sum(terms.iter().map(|t| t.term.clone()).collect());
    let big_sigma = sigma.fourier()?;
    let disjoint = support_disjointness(&terms)?;
    let growth: Vec<GrowthWitness> = terms.iter().map(growth_witness).collect();
    let (lo, hi) = scan;
    let one = Q::from_integer(1);
    let bs = big_sigma.realize(reg, lo, hi + one)?;
    let sigma_hat_window_norm = window_norm(&bs, one, lo, hi)?.sup_mass;
    let gap_term = next.term.fourier()?;
    let gm = gap_term.realize(reg, lo, hi + one)?;
    let approximant_gap = window_norm(&gm, one, lo, hi)?.sup_mass;
    let mut certificate = Certificate {
        construction: "theorem341".into(),
        window: Some((fmt_q(&lo), fmt_q(&hi))),
        depth: Some(depth),
        tail_bound: Some(
            (m0 + depth..m0 + depth + 60)
                .map(|m| m as f64 * 0.5f64.powi(m as i32))
                .sum(),
        ),
        ..Default::default()
    }
    .param("lambda", lambda)
    .param("seed", seed)
    .param("m", ms.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(","))
    .param("n", terms.iter().map(|t| t.n.to_string()).collect::<Vec<_>>().join(","))
    .param("truncation", "approximant; terms are periodic, so no window is exact")
    .check("disjoint", disjoint)
    .check("Sigma_window_norm", sigma_hat_window_norm)
    .check("approximant_gap", approximant_gap);
    for t in &terms {
        let m = t.m as u32;
        certificate = certificate.check(
            &format!("growth_m{}", t.m),
            format!(
                "reduced n={} (2^(n/2) > 2^m: {}); full condition needs n >= {}",
                t.n,
                (t.n as f64) / 2.0 > m as f64,
                full_growth_depth(m)
            ),
        );
    }
    Ok(Thm341 {
        lambda,
        terms,
        next,
        sigma,
        big_sigma,
        disjoint,
        growth,
        sigma_hat_window_norm,
        approximant_gap,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::finite_fourier;
    use crate::measure::total_variation;
    use crate::exactnum::qi;

    #[test]
    fn omega_basics() {
        let reg = Registry::new();
        let p = ks_params(&reg, "ks", 3).unwrap();
        let w = ks_omega(&reg, p.a_ids(&reg).unwrap()[0], p.b_ids(&reg).unwrap()[0]).unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(total_variation_exact(&w), Some(BigRational::from_integer(4.into())));
        assert!((finite_fourier(&w).unwrap().eval(0.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn theta_count_product_and_fault() {
        let reg = Registry::new();
        let p = ks_params(&reg, "ks", 4).unwrap();
        let th = ks_theta(&reg, &p, 3).unwrap();
        assert_eq!(th.len(), 64);
        assert_eq!(total_variation(&th), 64.0);
        let f = finite_fourier(&th).unwrap();
        let (a, b) = (p.a_ids(&reg).unwrap(), p.b_ids(&reg).unwrap());
        let factors: Vec<_> = (0..3)
            .map(|i| finite_fourier(&ks_omega(&reg, a[i], b[i]).unwrap()).unwrap())
            .collect();
        for x in [0.0, 0.3, -1.7, 12.25, 101.5] {
            let prod: Complex64 = factors.iter().map(|g| g.eval(x)).product();
            assert!((f.eval(x) - prod).norm() <= 1e-10);
        }
        let mut bad = p.clone();
        bad.a[1] = bad.a[0].clone();
        bad.b[1] = bad.b[0].clone();
        assert!(matches!(ks_theta(&reg, &bad, 2), Err(Error::Certification(_))));
    }

    #[test]
    fn lazy_omega_matches_explicit() {
        let reg = Registry::new();
        let p = ks_params(&reg, "ks", 4).unwrap();
        let om = ks_big_omega(&reg, &p, 2, 4).unwrap();
        let (lo, hi) = om.hat_sup_interval();
        assert!(hi <= 0.25 * (1.0 + 1e-15) && lo >= 0.25 * (1.0 - 1e-6));
        let th = ks_theta(&reg, &p, 4).unwrap();
        let ex = FiniteSrc::Lazy(Arc::new(om)).materialize(&reg).unwrap();
        assert_eq!(ex.len(), 256);
        let c = SymbolicPoint::generator(p.c_id(4, &reg).unwrap());
        let shifted = crate::measure::translate(&th, &c).unwrap();
        let f1 = finite_fourier(&ex).unwrap();
        let f2 = finite_fourier(&shifted).unwrap();
        for x in [0.0, 0.7, 3.3] {
            let scale = f1.eval(0.0).norm() / f2.eval(0.0).norm();
            assert!((f1.eval(x) - f2.eval(x) * scale).norm() <= 1e-12);
        }
        let hull = ex.hull_f64().unwrap();
        assert!(hull.0 > 0.0 && hull.1 < 1.0);
    }

    #[test]
    fn full_growth_depth_at_four() {
        assert_eq!(full_growth_depth(4), 41);
    }

    #[test]
    fn thm341_small() {
        let reg = Registry::new();
        let p = ks_params(&reg, "ks", 13).unwrap();
        let t = theorem341_pair(&reg, &p, 4, 2, Lambda::One, 3, (qi(-2), qi(2))).unwrap();
        assert!(t.disjoint);
        assert!(t.growth.iter().all(|g| g.holds));
        assert!(t.sigma_hat_window_norm.is_finite());
    }
}
