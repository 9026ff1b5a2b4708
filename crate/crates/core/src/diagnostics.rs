//! Quantitative probes: growth, p-discreteness, Fourier-Bohr coefficients,
//! Bessel sums, almost-period scans and B-norm almost-period probes.
//!
//! Divergence and almost-periodicity claims are trends on finite data, never proofs.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, q_to_f64, PointOrder, Registry, SymbolicPoint, Q};
use crate::fourier::Term;
use crate::measure::{ball_mass, sample_convolution, sub, translate, window_norm, PointMeasure};
use crate::testfn::{CSum, Gaussian, KahanSum, TestFunction};

/// Final local log-log slope above which a rising slope sequence counts as superpolynomial.
pub const EXPLOSIVE_SLOPE: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    BoundedExponent,
    SuperpolynomialTrend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `(r, |mu|(B_r(0)))`, sorted by `r`.
    pub samples: Vec<(f64, f64)>,
    pub fit_range: (f64, f64),
    pub fitted_exponent: f64,
    /// Slopes between consecutive samples.
    pub local_exponents: Vec<f64>,
    pub verdict: GrowthVerdict,
}

impl GrowthReport {
    pub fn to_csv(&self) -> String {
        crate::io::csv_pairs("r", "mass", &self.samples)
    }
}

/// Least-squares slope of `log mass` against `log r` over samples with `r` in `[lo, hi]`.
pub fn loglog_slope(samples: &[(f64, f64)], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(r, m)| *r >= lo && *r <= hi && *r > 0.0 && *m > 0.0)
        .map(|(r, m)| (r.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in &pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

/// Ball masses at the given radii; exponent fitted over the largest decade.
pub fn growth_profile(mu: &PointMeasure, radii: &[Q]) -> Result<GrowthReport> {
    let mut rs: Vec<Q> = radii.to_vec();
    rs.sort();
    rs.dedup();
    let r_max = match rs.last() {
        Some(r) => q_to_f64(r),
        None => return Err(Error::Input("growth_profile needs at least one radius".into())),
    };
    growth_profile_fit(mu, &rs, (r_max / 10.0, r_max))
}

/// [`growth_profile`] with an explicit fit range.
pub fn growth_profile_fit(mu: &PointMeasure, radii: &[Q], fit: (f64, f64)) -> Result<GrowthReport> {
    let mut rs: Vec<Q> = radii.to_vec();
    rs.sort();
    rs.dedup();
    let samples = rs
        .iter()
        .map(|r| Ok((q_to_f64(r), ball_mass(mu, *r)?)))
        .collect::<Result<Vec<_>>>()?;
    let fitted_exponent = loglog_slope(&samples, fit.0, fit.1).unwrap_or(f64::NAN);
    let local_exponents: Vec<f64> = samples
        .windows(2)
        .map(|w| {
            if w[0].1 > 0.0 && w[1].1 > 0.0 {
                (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln()
            } else {
                0.0
            }
        })
        .collect();
    // rising slopes ending above the cap: masses outrun every polynomial fitted so far
    let n = local_exponents.len();
    let rising = n >= 3 && local_exponents[n - 3] < local_exponents[n - 2] && local_exponents[n - 2] < local_exponents[n - 1];
    let verdict = if rising && local_exponents[n - 1] > EXPLOSIVE_SLOPE {
        GrowthVerdict::SuperpolynomialTrend
    } else {
        GrowthVerdict::BoundedExponent
    };
    Ok(GrowthReport {
        samples,
        fit_range: fit,
        fitted_exponent,
        local_exponents,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PairVerdict {
    SatisfiedOnTruncation,
    ViolatedAt { x: f64, y: f64, gap: f64, bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PDiscreteRow {
    pub c: f64,
    pub h: f64,
    pub result: PairVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PDiscreteReport {
    pub rows: Vec<PDiscreteRow>,
    /// `-slope` of `log gap` against `log max(|x|, |y|)` for `|x|, |y| >= 2`.
    pub best_h_estimate: Option<f64>,
    pub points: usize,
    pub scope: String,
}

impl PDiscreteReport {
    pub fn satisfied(&self, c: f64, h: f64) -> Option<bool> {
        self.rows
            .iter()
            .find(|r| r.c == c && r.h == h)
            .map(|r| r.result == PairVerdict::SatisfiedOnTruncation)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("c,h,verdict,x,y\n");
        for r in &self.rows {
            match r.result {
                PairVerdict::SatisfiedOnTruncation => s.push_str(&format!("{},{},satisfied,,\n", r.c, r.h)),
                PairVerdict::ViolatedAt { x, y, .. } => s.push_str(&format!("{},{},violated,{x},{y}\n", r.c, r.h)),
            }
        }
        s
    }
}

fn pd_bound(c: f64, h: f64, x: f64, y: f64) -> f64 {
    c * 1f64.min(x.abs().powf(-h)).min(y.abs().powf(-h))
}

/// Checks `|x - y| >= c min{1, |x|^-h, |y|^-h}` on adjacent support points.
///
/// Reports the violating pair with the smallest `max(|x|, |y|)`.
pub fn p_discreteness_probe(points: &[f64], grid: &[(f64, f64)]) -> PDiscreteReport {
    let mut pts: Vec<f64> = points.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let rows = grid
        .iter()
        .map(|&(c, h)| {
            let mut worst: Option<(f64, PairVerdict)> = None;
            for w in pts.windows(2) {
                let (x, y) = (w[0], w[1]);
                let gap = y - x;
                let bound = pd_bound(c, h, x, y);
                if gap < bound {
                    let key = x.abs().max(y.abs());
                    if worst.as_ref().is_none_or(|(k, _)| key < *k) {
                        worst = Some((key, PairVerdict::ViolatedAt { x, y, gap, bound }));
                    }
                }
            }
            PDiscreteRow {
                c,
                h,
                result: worst.map_or(PairVerdict::SatisfiedOnTruncation, |w| w.1),
            }
        })
        .collect();
    let logs: Vec<(f64, f64)> = pts
        .windows(2)
        .filter(|w| w[0].abs() >= 2.0 && w[1].abs() >= 2.0)
        .map(|w| (w[0].abs().max(w[1].abs()), w[1] - w[0]))
        .collect();
    let best_h_estimate = loglog_slope(&logs, 0.0, f64::INFINITY).map(|s| -s);
    PDiscreteReport {
        rows,
        best_h_estimate,
        points: pts.len(),
        scope: "adjacent pairs only; distant pairs are farther apart".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrRow {
    pub radius: f64,
    pub window_avg: Complex64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrReport {
    pub k: String,
    pub function: String,
    pub closed_form: Complex64,
    /// One row per radius, in the order given (a doubling ladder shows the `O(1/R)` trend).
    pub rows: Vec<BohrRow>,
}

impl BohrReport {
    pub fn window_avg(&self) -> Complex64 {
        self.rows.last().map_or(Complex64::new(0.0, 0.0), |r| r.window_avg)
    }

    pub fn discrepancy(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.discrepancy)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,avg_re,avg_im,discrepancy\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{:e}\n", r.radius, r.window_avg.re, r.window_avg.im, r.discrepancy));
        }
        s
    }
}

/// Mean of `e^{-2πikx} (mu * f)(x)` over `[-R, R]` against `f^(k) mu^({k})`.
///
/// `mu` is the space-side measure; the closed form reads the atom of its transform at `k`.
/// `step` is the Riemann grid.
pub fn fourier_bohr(mu: &Term, f: &Gaussian, k: &SymbolicPoint, radii: &[f64], step: f64, reg: &Registry) -> Result<BohrReport> {
    if !(step > 0.0) {
        return Err(Error::Input("Riemann step must be positive".into()));
    }
    let order = PointOrder::new(reg);
    let kf = order.approx(k).0;
    let coeff = mu.fourier()?.atom_weight(k, &order)?.to_c64();
    let closed_form = f.hat().eval(kf) * coeff;
    let tf = TestFunction::Gaussian(*f);
    let reach = f.half_width(1e-18) + f.c.abs() + 1.0;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let count = (2.0 * r / step).round() as usize;
        let lo = (-r - reach).floor() as i64;
        let hi = (r + reach).ceil() as i64;
        let m = mu.realize(reg, Q::from_integer(lo), Q::from_integer(hi))?;
        let s = sample_convolution(&m, &tf, -r, step, count)?;
        let mut acc = CSum::default();
        for (j, v) in s.values.iter().enumerate() {
            let x = -r + step * j as f64;
            acc.add(crate::fourier::cis_neg(kf, x) * v);
        }
        let window_avg = acc.sum() * (step / (2.0 * r));
        rows.push(BohrRow {
            radius: r,
            window_avg,
            discrepancy: (window_avg - closed_form).norm(),
        });
    }
    Ok(BohrReport {
        k: serde_json::to_string(&crate::io::point_to_json(k, reg)?)?,
        function: f.id(),
        closed_form,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesselReport {
    /// Frequencies in canonical (increasing) order.
    pub frequencies: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl BesselReport {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,term,partial_sum\n");
        for i in 0..self.terms.len() {
            s.push_str(&format!("{},{:e},{:e}\n", self.frequencies[i], self.terms[i], self.partial_sums[i]));
        }
        s
    }
}

/// Partial sums of `|f^(k) mu^({k})|^2` over `ks` sorted canonically (duplicates dropped).
pub fn bessel_partial_sums(
    mu_hat: &Term,
    f_hat: &dyn Fn(f64) -> Complex64,
    ks: &[SymbolicPoint],
    reg: &Registry,
) -> Result<BesselReport> {
    let order = PointOrder::new(reg);
    let mut ks: Vec<SymbolicPoint> = ks.to_vec();
    ks.sort_by(|a, b| order.cmp(a, b));
    ks.dedup();
    let mut acc = KahanSum::default();
    let mut rep = BesselReport {
        frequencies: Vec::with_capacity(ks.len()),
        terms: Vec::with_capacity(ks.len()),
        partial_sums: Vec::with_capacity(ks.len()),
    };
    for k in &ks {
        let kf = order.approx(k).0;
        let w = mu_hat.atom_weight(k, &order)?.to_c64();
        let t = (f_hat(kf) * w).norm_sqr();
        acc.add(t);
        rep.frequencies.push(kf);
        rep.terms.push(t);
        rep.partial_sums.push(acc.sum());
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct APScanReport {
    pub epsilon: f64,
    pub scan_range: (f64, f64),
    pub step: f64,
    pub base_window: (f64, f64),
    pub periods_found: Vec<f64>,
    /// `sup_grid |g(x + t) - g(x)|` for each reported period.
    pub sup_diff: Vec<f64>,
    /// Largest gap between consecutive periods, counting the range ends.
    pub max_gap: f64,
    pub relatively_dense: bool,
    pub certification: String,
}

impl APScanReport {
    pub fn to_csv(&self) -> String {
        crate::io::csv_pairs(
            "t",
            "sup_diff",
            &self.periods_found.iter().copied().zip(self.sup_diff.iter().copied()).collect::<Vec<_>>(),
        )
    }
}

/// Grid `epsilon`-almost periods of `g = mu * f` on `t in [lo, hi]` (multiples of `step`),
/// with `x` ranging over the base window on the same grid.
pub fn almost_period_scan(
    mu: &PointMeasure,
    f: &TestFunction,
    epsilon: f64,
    scan: (f64, f64),
    step: f64,
    base: (f64, f64),
) -> Result<APScanReport> {
    if !(step > 0.0) || scan.0 > scan.1 || base.0 > base.1 {
        return Err(Error::Input("almost_period_scan needs step > 0 and ordered ranges".into()));
    }
    let j_lo = (scan.0 / step).ceil() as i64;
    let j_hi = (scan.1 / step).floor() as i64;
    let b_lo = (base.0 / step).ceil() as i64;
    let b_hi = (base.1 / step).floor() as i64;
    let start = (b_lo + j_lo.min(0)) as f64 * step;
    let count = (b_hi + j_hi.max(0) - (b_lo + j_lo.min(0)) + 1) as usize;
    let s = sample_convolution(mu, f, start, step, count)?;
    let off = |j: i64| (j - (b_lo + j_lo.min(0))) as usize;
    let rows: Vec<(i64, f64)> = (j_lo..=j_hi)
        .into_par_iter()
        .map(|jt| {
            let sup = (b_lo..=b_hi)
                .map(|jx| (s.values[off(jx + jt)] - s.values[off(jx)]).norm())
                .fold(0.0, f64::max);
            (jt, sup)
        })
        .collect();
    let mut periods_found = Vec::new();
    let mut sup_diff = Vec::new();
    for (jt, sup) in rows {
        if sup < epsilon {
            periods_found.push(jt as f64 * step);
            sup_diff.push(sup);
        }
    }
    let mut max_gap = 0.0f64;
    let mut prev = scan.0;
    for &t in &periods_found {
        max_gap = max_gap.max(t - prev);
        prev = t;
    }
    max_gap = max_gap.max(scan.1 - prev);
    let relatively_dense = periods_found.len() >= 3 && max_gap <= (scan.1 - scan.0) / 2.0;
    Ok(APScanReport {
        epsilon,
        scan_range: scan,
        step,
        base_window: base,
        periods_found,
        sup_diff,
        max_gap,
        relatively_dense,
        certification: format!("grid-certified (step {step}); the continuum sup is not claimed"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormApRow {
    pub candidate: String,
    pub candidate_f64: f64,
    /// `sup_x |mu - tau_p mu|([x, x + len))` over the scanned range.
    pub norm: f64,
}

/// Sliding-window B-norm of `mu - tau_p mu` for each candidate `p`.
pub fn norm_ap_probe(mu: &PointMeasure, candidates: &[SymbolicPoint], len: Q, range: (Q, Q)) -> Result<Vec<NormApRow>> {
    let reg = mu.registry();
    let order = PointOrder::new(reg);
    candidates
        .iter()
        .map(|p| {
            let d = sub(mu, &translate(mu, p)?)?;
            let w = window_norm(&d, len, range.0, range.1)?;
            Ok(NormApRow {
                candidate: serde_json::to_string(&crate::io::point_to_json(p, reg)?)?,
                candidate_f64: order.approx(p).0,
                norm: w.sup_mass,
            })
        })
        .collect()
}

/// CSV of [`norm_ap_probe`] rows.
pub fn norm_ap_csv(rows: &[NormApRow]) -> String {
    let mut s = String::from("p,norm\n");
    for r in rows {
        s.push_str(&format!("{},{:e}\n", r.candidate_f64, r.norm));
    }
    s
}

/// Doubling ladder `r0, 2r0, ...` up to `r_max`, always ending at `r_max`.
pub fn doubling_ladder(r0: Q, r_max: Q) -> Vec<Q> {
    let mut v = Vec::new();
    let mut r = r0;
    while r < r_max {
        v.push(r);
        r *= Q::from_integer(2);
    }
    v.push(r_max);
    v
}

/// Human-readable radius label.
pub fn fmt_radius(r: &Q) -> String {
    fmt_q(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{factorial_example, guinand_comb, kdelta_example, lattice_example};
    use crate::eigenlab::{synthesize, EigenSpec};
    use crate::exactnum::{q, qi};
    use crate::fourier::{Lambda, PeriodicComb};
    use proptest::prelude::*;

    fn log_radii() -> Vec<Q> {
        (0..=20).map(|i| qi((10f64 * 100f64.powf(i as f64 / 20.0)).round() as i64)).collect()
    }

    #[test]
    fn growth_exponents() {
        let reg = Registry::new();
        let lat = lattice_example(&reg, 1000).unwrap();
        let g = growth_profile_fit(&lat, &log_radii(), (10.0, 1000.0)).unwrap();
        assert!((g.fitted_exponent - 1.0).abs() <= 0.1, "{}", g.fitted_exponent);
        assert_eq!(g.verdict, GrowthVerdict::BoundedExponent);
        let kd = kdelta_example(&reg, 1000).unwrap();
        let g = growth_profile_fit(&kd, &log_radii(), (10.0, 1000.0)).unwrap();
        assert!((g.fitted_exponent - 2.0).abs() <= 0.1, "{}", g.fitted_exponent);
        assert!(g.samples.windows(2).all(|w| w[0].1 <= w[1].1));
        // oracle: |kdelta|(B_r) = r(r+1)
        for (r, m) in &g.samples {
            assert_eq!(*m, r * (r + 1.0));
        }
    }

    #[test]
    fn explosive_growth_trend() {
        let reg = Registry::new();
        let atoms: Vec<_> = (1..=5)
            .map(|n: i64| (SymbolicPoint::int(1 << n), crate::measure::Weight::int(1 << (1 << n))))
            .collect();
        let m = PointMeasure::finite(&reg, atoms).unwrap();
        let g = growth_profile(&m, &doubling_ladder(qi(2), qi(32))).unwrap();
        assert_eq!(g.verdict, GrowthVerdict::SuperpolynomialTrend);
    }

    #[test]
    fn pdiscrete_examples() {
        let reg = Registry::new();
        let fac = factorial_example(&reg, 7).unwrap();
        let r = p_discreteness_probe(&fac.positions_f64(), &[(1.0, 3.0)]);
        match r.rows[0].result {
            PairVerdict::ViolatedAt { x, y, gap, bound } => {
                assert!((6.0..7.0).contains(&x), "{x}");
                assert!(gap < bound && y > x);
                assert!((gap - 1.0 / 720.0).abs() < 1e-12);
            }
            _ => panic!("expected a violation"),
        }
        let lat = lattice_example(&reg, 50).unwrap();
        assert_eq!(p_discreteness_probe(&lat.positions_f64(), &[(1.0, 0.0)]).satisfied(1.0, 0.0), Some(true));
        let tau = guinand_comb(&reg, 40).unwrap();
        let r = p_discreteness_probe(&tau.positions_f64(), &[(0.125, 1.0)]);
        assert_eq!(r.satisfied(0.125, 1.0), Some(true));
        let h = r.best_h_estimate.unwrap();
        assert!((h - 1.0).abs() < 0.2, "{h}");
    }

    #[test]
    fn bohr_lattice_and_off_support() {
        let reg = Registry::new();
        let mu = Term::comb(PeriodicComb::lattice(1));
        let f = Gaussian::new(1.0);
        let r = fourier_bohr(&mu, &f, &SymbolicPoint::int(0), &[50.0, 100.0], 1.0 / 32.0, &reg).unwrap();
        assert!((r.closed_form - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(r.discrepancy() < 1e-3);
        let off = fourier_bohr(&mu, &f, &SymbolicPoint::rational(q(1, 2)), &[100.0], 1.0 / 32.0, &reg).unwrap();
        assert_eq!(off.closed_form, Complex64::new(0.0, 0.0));
        assert!(off.discrepancy() < 1e-3);
    }

    #[test]
    fn bessel_empty_and_order() {
        let reg = Registry::new();
        let (c, _) = synthesize(&EigenSpec::new(8, Lambda::One, 2)).unwrap();
        let t = Term::comb(c);
        let fh = |x: f64| Gaussian::new(1.0).hat().eval(x);
        assert_eq!(bessel_partial_sums(&t, &fh, &[], &reg).unwrap().total(), 0.0);
        let ks: Vec<_> = (-8..8).map(|j| SymbolicPoint::rational(q(j, 8))).collect();
        let mut rev = ks.clone();
        rev.reverse();
        let a = bessel_partial_sums(&t, &fh, &ks, &reg).unwrap();
        let b = bessel_partial_sums(&t, &fh, &rev, &reg).unwrap();
        assert_eq!(a, b);
        assert!(a.partial_sums.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ap_scan_lattice_and_kdelta() {
        let reg = Registry::new();
        let lat = lattice_example(&reg, 40).unwrap();
        let f = TestFunction::Gaussian(Gaussian::new(1.0));
        let r = almost_period_scan(&lat, &f, 1e-6, (-10.0, 10.0), 0.125, (-5.0, 5.0)).unwrap();
        let want: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
        assert_eq!(r.periods_found, want);
        assert_eq!(r.max_gap, 1.0);
        assert!(r.relatively_dense);
        let kd = kdelta_example(&reg, 40).unwrap();
        let r = almost_period_scan(&kd, &f, 1e-3, (-10.0, 10.0), 0.125, (-5.0, 5.0)).unwrap();
        assert_eq!(r.periods_found, vec![0.0]);
        assert!(!r.relatively_dense);
    }

    #[test]
    fn norm_ap_periodic_and_random() {
        let reg = Registry::new();
        let (c, _) = synthesize(&EigenSpec::new(8, Lambda::One, 4)).unwrap();
        let m = c.realize(&reg, qi(-40), qi(40)).unwrap();
        let rows = norm_ap_probe(&m, &[SymbolicPoint::int(8), SymbolicPoint::rational(q(3, 16))], qi(1), (qi(-20), qi(20))).unwrap();
        assert_eq!(rows[0].norm, 0.0);
        let heaviest = m.atoms().iter().map(|a| a.weight.abs()).fold(0.0, f64::max);
        assert!(rows[1].norm >= heaviest);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pdiscrete_monotone(c in 0.01f64..2.0, h in 0.0f64..4.0, dc in 0.0f64..1.0, dh in 0.0f64..2.0) {
            let reg = Registry::new();
            let fac = factorial_example(&reg, 5).unwrap();
            let pts = fac.positions_f64();
            let r = p_discreteness_probe(&pts, &[(c, h), (c * dc, h + dh)]);
            if r.rows[0].result == PairVerdict::SatisfiedOnTruncation {
                prop_assert_eq!(&r.rows[1].result, &PairVerdict::SatisfiedOnTruncation);
            }
        }

        #[test]
        fn bohr_closed_form_linear(a in -4.0f64..4.0) {
            let reg = Registry::new();
            let (c, rep) = synthesize(&EigenSpec::new(4, Lambda::One, 1)).unwrap();
            let k = SymbolicPoint::rational(q(rep.unit_weight_index.unwrap() as i64, 4));
            let f = Gaussian::new(1.0);
            let base = fourier_bohr(&Term::comb(c.clone()), &f, &k, &[], 0.1, &reg).unwrap().closed_form;
            let sc = fourier_bohr(&Term::comb(c.scale(Complex64::new(a, 0.0))), &f, &k, &[], 0.1, &reg).unwrap().closed_form;
            prop_assert!((sc - base * a).norm() <= 1e-12 * (1.0 + base.norm() * a.abs()));
        }

        #[test]
        fn ap_scan_contains_multiples(m in 1i64..4) {
            let reg = Registry::new();
            let c = PeriodicComb::lattice(m as usize);
            let mu = c.realize(&reg, qi(-30), qi(30)).unwrap();
            let f = TestFunction::Gaussian(Gaussian::new(2.0));
            let r = almost_period_scan(&mu, &f, 1e-9, (-12.0, 12.0), 0.25, (-4.0, 4.0)).unwrap();
            for k in -12 / m..=12 / m {
                prop_assert!(r.periods_found.contains(&((k * m) as f64)));
            }
            for (t, s) in r.periods_found.iter().zip(&r.sup_diff) {
                prop_assert!(*s < 1e-9, "{t}");
            }
        }
    }
}
