//! Periodic Fourier eigenmeasures with a central gap, and nested families of them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{q, SymbolicPoint, Q};
use crate::fourier::{l2_norm, symmetrize_eigencomponent, unitary_dft, Lambda, PeriodicComb};

/// Largest `m` synthesized through the dense nullspace route.
pub const DENSE_MAX_M: usize = 32;
pub const MAX_ATTEMPTS: usize = 16;
pub const RANK_TOL: f64 = 1e-10;
pub const SNAP_TOL: f64 = 1e-10;
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenSpec {
    pub m: usize,
    pub lambda: Lambda,
    pub seed: u64,
}

impl EigenSpec {
    pub fn new(m: usize, lambda: Lambda, seed: u64) -> Self {
        EigenSpec { m, lambda, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub m: usize,
    pub lambda: Lambda,
    pub eigen_residual: f64,
    pub gap_max_weight: f64,
    pub max_abs_weight: f64,
    pub unit_weight_index: Option<usize>,
    /// Dimension of the joint nullspace; absent on the packet route.
    pub nullspace_dim: Option<usize>,
    pub gap_size: usize,
    pub zero_measure: bool,
    pub route: Option<String>,
    pub attempts: usize,
    /// `max ||(U c)|_G||` over nullspace basis vectors (U-invariance check).
    pub invariance_residual: Option<f64>,
}

impl EigenReport {
    pub fn passes(&self) -> bool {
        !self.zero_measure
            && self.eigen_residual <= EIGEN_TOL
            && self.gap_max_weight == 0.0
            && self.max_abs_weight == 1.0
            && self.unit_weight_index.is_some()
    }
}

/// Centered representative of `k mod n` in `(-n/2, n/2]`.
pub fn centered(k: usize, n: usize) -> i64 {
    let k = (k % n) as i64;
    let n = n as i64;
    if 2 * k > n {
        k - n
    } else {
        k
    }
}

/// Indices whose centered point `j/m` lies in `(-m/4 + 1, m/4 - 1)`.
pub fn gap_index_set(m: usize) -> Vec<usize> {
    let n = m * m;
    let (m4, nn) = (m as i64, n as i64);
    (0..n)
        .filter(|&k| {
            let j = centered(k, n);
            // |j/m| < m/4 - 1  <=>  4|j| < m^2 - 4m
            4 * j.abs() < nn - 4 * m4
        })
        .collect()
}

fn gap_mask(m: usize) -> Vec<bool> {
    let mut mask = vec![false; m * m];
    for k in gap_index_set(m) {
        mask[k] = true;
    }
    mask
}

/// Property check of a comb against the five defining properties.
pub fn verify_eigen_properties(mu: &PeriodicComb, lambda: Lambda) -> EigenReport {
    let mask = gap_mask(mu.m);
    let max_abs = mu.max_abs();
    let gap_max = mu
        .weights
        .iter()
        .zip(&mask)
        .filter(|(_, g)| **g)
        .fold(0.0f64, |a, (w, _)| a.max(w.norm()));
    EigenReport {
        m: mu.m,
        lambda,
        eigen_residual: mu.eigen_residual(lambda),
        gap_max_weight: gap_max,
        max_abs_weight: max_abs,
        unit_weight_index: mu.weights.iter().position(|w| *w == Complex64::new(1.0, 0.0)),
        nullspace_dim: None,
        gap_size: mask.iter().filter(|g| **g).count(),
        zero_measure: max_abs == 0.0,
        route: None,
        attempts: 0,
        invariance_residual: None,
    }
}

fn unit_entry(k: usize, n: usize) -> Complex64 {
    // exact reduction of the exponent before sin/cos
    let ph = -2.0 * PI * (k % n) as f64 / n as f64;
    Complex64::from_polar(1.0 / (n as f64).sqrt(), ph)
}

struct Nullspace {
    /// Orthonormal basis of the row space of `U[G, G^c]` (as columns).
    range: DMatrix<Complex64>,
    /// Orthonormal basis of the nullspace (as columns).
    null: DMatrix<Complex64>,
    cols: Vec<usize>,
}

fn dense_nullspace(m: usize, mask: &[bool]) -> Nullspace {
    let n = m * m;
    let rows: Vec<usize> = (0..n).filter(|&k| mask[k]).collect();
    let cols: Vec<usize> = (0..n).filter(|&k| !mask[k]).collect();
    // A^H with A = U[G, G^c]
    let ah = DMatrix::from_fn(cols.len(), rows.len(), |i, j| {
        unit_entry((rows[j] * cols[i]) % n, n).conj()
    });
    let qr = ah.col_piv_qr();
    let r = qr.r();
    let diag_max = (0..r.nrows().min(r.ncols())).fold(0.0f64, |a, i| a.max(r[(i, i)].norm()));
    let rank = (0..r.nrows().min(r.ncols()))
        .filter(|&i| r[(i, i)].norm() > RANK_TOL * diag_max)
        .count();
    // full Q to get the complement as well
    let mut q_full = DMatrix::<Complex64>::identity(cols.len(), cols.len());
    qr.q_tr_mul(&mut q_full);
    let q_full = q_full.adjoint();
    Nullspace {
        range: q_full.columns(0, rank).into_owned(),
        null: q_full.columns(rank, cols.len() - rank).into_owned(),
        cols,
    }
}

fn project_out(ns: &Nullspace, z: &mut nalgebra::DVector<Complex64>) {
    for _ in 0..2 {
        let c = ns.range.adjoint() * &*z;
        *z -= &ns.range * c;
    }
}

fn random_c64(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Periodized Gaussian packet centered at `n/2` in time and frequency,
/// shifted by `s` in time and `t` in frequency.
fn packet(n: usize, s: i64, t: i64) -> Vec<Complex64> {
    let c0 = (n / 2) as i64;
    let nn = n as i64;
    (0..nn)
        .map(|k| {
            let mut env = 0.0;
            for l in -1..=1i64 {
                let d = (k - c0 - s + l * nn) as f64;
                env += (-PI * d * d / n as f64).exp();
            }
            let fr = ((c0 + t) * k).rem_euclid(nn);
            Complex64::from_polar(env, 2.0 * PI * fr as f64 / n as f64)
        })
        .collect()
}

fn packet_draw(m: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = m * m;
    let half = (m / 2) as i64;
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..8 {
        let (s, t) = (rng.gen_range(-half..=half), rng.gen_range(-half..=half));
        let a = random_c64(rng);
        for (zk, pk) in z.iter_mut().zip(packet(n, s, t)) {
            *zk += a * pk;
        }
    }
    z
}

/// Zero-snap the gap, then divide by the largest entry so it becomes exactly 1.
fn finish(mut w: Vec<Complex64>, mask: &[bool]) -> Vec<Complex64> {
    let max = w.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    for (z, g) in w.iter_mut().zip(mask) {
        if *g && z.norm() <= SNAP_TOL * max {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    let mut idx = 0;
    for (k, z) in w.iter().enumerate() {
        if z.norm() > w[idx].norm() {
            idx = k;
        }
    }
    let pivot = w[idx];
    for z in w.iter_mut() {
        *z /= pivot;
        let r = z.norm();
        if r > 1.0 {
            *z /= r;
        }
    }
    w[idx] = Complex64::new(1.0, 0.0);
    w
}

/// Synthesize a comb with properties (i)-(v); `EigenComponentEmpty` when
/// every draw projects to zero.
pub fn synthesize(spec: &EigenSpec) -> Result<(PeriodicComb, EigenReport)> {
    let m = spec.m;
    if m < 4 {
        return Err(Error::Spec(format!("eigenmeasures need m >= 4, got {m}")));
    }
    let n = m * m;
    let mask = gap_mask(m);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ ((m as u64) << 32) ^ (spec.lambda.power() as u64) << 56);
    let dense = m <= DENSE_MAX_M;
    let ns = if dense { Some(dense_nullspace(m, &mask)) } else { None };
    if let Some(ns) = &ns {
        if ns.null.ncols() == 0 {
            return Err(Error::Infeasible(format!("empty joint nullspace at m = {m}")));
        }
    }
    for attempt in 1..=MAX_ATTEMPTS {
        let z = match &ns {
            Some(ns) => {
                let mut v = nalgebra::DVector::from_fn(ns.cols.len(), |_, _| random_c64(&mut rng));
                project_out(ns, &mut v);
                let mut full = vec![Complex64::new(0.0, 0.0); n];
                for (i, &k) in ns.cols.iter().enumerate() {
                    full[k] = v[i];
                }
                full
            }
            None => packet_draw(m, &mut rng),
        };
        let rho = PeriodicComb::new(m, z)?;
        let sym = symmetrize_eigencomponent(&rho, spec.lambda);
        if sym.empty {
            continue;
        }
        let comb = PeriodicComb::new(m, finish(sym.comb.weights, &mask))?.tagged(Some(spec.lambda));
        let mut report = verify_eigen_properties(&comb, spec.lambda);
        report.attempts = attempt;
        report.route = Some(if dense { "dense-nullspace" } else { "gaussian-packet" }.into());
        if let Some(ns) = &ns {
            report.nullspace_dim = Some(ns.null.ncols());
            report.invariance_residual = Some(invariance_residual(ns, m, &mask));
        }
        return Ok((comb, report));
    }
    Err(Error::EigenComponentEmpty {
        lambda: spec.lambda.to_string(),
        m,
    })
}

fn invariance_residual(ns: &Nullspace, m: usize, mask: &[bool]) -> f64 {
    let n = m * m;
    let k = ns.null.ncols().min(4);
    (0..k)
        .map(|j| {
            let mut full = vec![Complex64::new(0.0, 0.0); n];
            for (i, &c) in ns.cols.iter().enumerate() {
                full[c] = ns.null[(i, j)];
            }
            let u = unitary_dft(&full);
            let g: Vec<Complex64> = u.iter().zip(mask).filter(|(_, g)| **g).map(|(z, _)| *z).collect();
            l2_norm(&g)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    /// Centered index `j` of the weight-1 atom; `y = j/k`.
    pub y_index: i64,
    #[serde(with = "crate::io::q_string")]
    pub y: Q,
    /// Adjacent occupied atoms `(x, x')` at distance `1/k`, nearest the origin.
    pub close_pair: Option<(i64, i64)>,
}

impl Marker {
    pub fn point(&self) -> SymbolicPoint {
        SymbolicPoint::rational(self.y)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NestedFamily {
    pub k_seq: Vec<usize>,
    pub lambda: Lambda,
    pub seed: u64,
    pub combs: Vec<PeriodicComb>,
    pub reports: Vec<EigenReport>,
    pub markers: Vec<Marker>,
}

/// `k_1 >= 4` and `k_{n+1}/4 - 1 >= k_n/2 + 1`.
pub fn check_nesting(k_seq: &[usize]) -> Result<()> {
    match k_seq.first() {
        None => return Err(Error::Spec("empty k sequence".into())),
        Some(&k) if k < 4 => return Err(Error::Spec(format!("k_1 = {k} < 4"))),
        _ => {}
    }
    for w in k_seq.windows(2) {
        // k'/4 - 1 >= k/2 + 1  <=>  k' >= 2k + 8
        if w[1] < 2 * w[0] + 8 {
            return Err(Error::Spec(format!(
                "nesting fails: {}/4 - 1 < {}/2 + 1",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

fn marker_of(comb: &PeriodicComb, report: &EigenReport) -> Result<Marker> {
    let n = comb.n();
    let idx = report
        .unit_weight_index
        .ok_or_else(|| Error::Marker(format!("no weight-1 atom at m = {}", comb.m)))?;
    let j = centered(idx, n);
    let zero = Complex64::new(0.0, 0.0);
    let close_pair = (0..n)
        .map(|k| centered(k, n))
        .filter(|&a| {
            let b = a + 1;
            comb.weight_at(a) != zero && comb.weight_at(b) != zero && 2 * b <= n as i64
        })
        .min_by_key(|a| (a.abs(), *a))
        .map(|a| (a, a + 1));
    Ok(Marker {
        y_index: j,
        y: q(j, comb.m as i64),
        close_pair,
    })
}

/// Synthesize `sigma_n = mu_{k_n}` (seed `seed + n`) with markers.
pub fn nested_family(k_seq: &[usize], lambda: Lambda, seed: u64) -> Result<NestedFamily> {
    check_nesting(k_seq)?;
    let built: Vec<Result<(PeriodicComb, EigenReport)>> = k_seq
        .par_iter()
        .enumerate()
        .map(|(i, &k)| synthesize(&EigenSpec::new(k, lambda, seed.wrapping_add(i as u64))))
        .collect();
    let mut combs = Vec::new();
    let mut reports = Vec::new();
    let mut markers = Vec::new();
    for b in built {
        let (c, r) = b?;
        markers.push(marker_of(&c, &r)?);
        combs.push(c);
        reports.push(r);
    }
    Ok(NestedFamily {
        k_seq: k_seq.to_vec(),
        lambda,
        seed,
        combs,
        reports,
        markers,
    })
}

impl NestedFamily {
    /// `sigma_l({y_n + y}) = 0` for every later `l` and every `y` in `[-1, 1)`.
    pub fn marker_isolated(&self, n: usize) -> bool {
        let y = self.markers[n].y;
        self.combs.iter().skip(n + 1).all(|c| {
            let (a, b) = c.index_range(y - Q::from_integer(1), y + Q::from_integer(1));
            let m = Q::from_integer(c.m as i64);
            (a..=b)
                .filter(|&j| Q::from_integer(j) < (y + Q::from_integer(1)) * m)
                .all(|j| c.weight_at(j) == Complex64::new(0.0, 0.0))
        })
    }

    /// Half-width of the central gap of `sigma_n`: `k_n/4 - 1`.
    pub fn gap_radius(&self, n: usize) -> Q {
        q(self.k_seq[n] as i64, 4) - Q::from_integer(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_sizes() {
        assert!(gap_index_set(4).is_empty());
        assert_eq!(gap_index_set(8).len(), 15);
        assert_eq!(gap_index_set(12).len(), 47);
    }

    #[test]
    fn synthesis_small_cases() {
        let (c, r) = synthesize(&EigenSpec::new(4, Lambda::One, 1)).unwrap();
        assert!(r.passes(), "{r:?}");
        assert_eq!(c.n(), 16);
        let (c8, r8) = synthesize(&EigenSpec::new(8, Lambda::I, 7)).unwrap();
        assert!(r8.passes(), "{r8:?}");
        assert!(r8.nullspace_dim.unwrap() >= 64 - 2 * 15);
        assert!(r8.invariance_residual.unwrap() <= 1e-10);
        // the transform vanishes on the gap as well
        let f = c8.comb_fourier();
        for k in gap_index_set(8) {
            assert!(f.weights[k].norm() < 1e-12);
        }
    }

    #[test]
    fn deterministic() {
        let s = EigenSpec::new(12, Lambda::MinusI, 3);
        assert_eq!(synthesize(&s).unwrap().0, synthesize(&s).unwrap().0);
    }

    #[test]
    fn fault_injection_and_zero() {
        let (mut c, _) = synthesize(&EigenSpec::new(8, Lambda::One, 2)).unwrap();
        c.weights[0] = Complex64::new(0.1, 0.0);
        assert_eq!(verify_eigen_properties(&c, Lambda::One).gap_max_weight, 0.1);
        let z = PeriodicComb::new(4, vec![Complex64::new(0.0, 0.0); 16]).unwrap();
        let r = verify_eigen_properties(&z, Lambda::I);
        assert!(r.zero_measure && r.eigen_residual == 0.0 && !r.passes());
    }

    #[test]
    fn unit_phase_invariance() {
        let (c, _) = synthesize(&EigenSpec::new(8, Lambda::MinusOne, 5)).unwrap();
        let r0 = c.eigen_residual(Lambda::MinusOne);
        let r1 = c.scale(Complex64::from_polar(1.0, 0.7)).eigen_residual(Lambda::MinusOne);
        assert!((r0 - r1).abs() <= 1e-12);
    }

    #[test]
    fn packet_route() {
        let (_, r) = synthesize(&EigenSpec::new(64, Lambda::One, 1)).unwrap();
        assert!(r.passes(), "{r:?}");
        assert_eq!(r.route.as_deref(), Some("gaussian-packet"));
    }

    #[test]
    fn nesting() {
        assert!(check_nesting(&[4, 8]).is_err());
        assert!(check_nesting(&[4, 16, 64]).is_ok());
        let f = nested_family(&[4, 16], Lambda::One, 11).unwrap();
        assert!(num_traits::Signed::abs(&f.markers[0].y) <= q(2, 1));
        assert!(f.marker_isolated(0));
    }
}
