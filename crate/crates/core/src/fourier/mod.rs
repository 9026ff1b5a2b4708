//! Fourier transforms for periodic combs, finite measures and series terms.
//!
//! Convention: kernel `e^{-2πixy}`, `F(mu)(phi) = mu(phi^)`, and
//! `translate(mu, t)` moves the support by `+t`, so that
//! `F(translate(mu, t)) = modulate(F mu, -t)`.

mod comb;
mod dft;
mod term;
mod trig;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use comb::PeriodicComb;
#[allow(unused_imports)]
pub(crate) use comb::c64_pairs;
pub use dft::{
    dft_power, dft_square, inverse_dft, l2_dist, l2_norm, unitary_dft, unitary_dft_direct, Lambda,
    DIRECT_DFT_MAX,
};
pub use term::{FiniteSrc, LazyFinite, Term};
pub use trig::{cis_neg, product_torus_sup, DimKey, GridSup, TorusSup, TrigPoly};

use crate::error::Result;
use crate::exactnum::Registry;
use crate::measure::PointMeasure;
use crate::testfn::Gaussian;

/// Evaluator of `x -> sum w e^{-2πi x coord}` for a finite measure.
pub fn finite_fourier(mu: &PointMeasure) -> Result<TrigPoly> {
    TrigPoly::from_measure(mu)
}

/// `rho + conj(l) U rho + conj(l)^2 U^2 rho + conj(l)^3 U^3 rho`.
#[derive(Clone, Debug)]
pub struct Symmetrized {
    pub comb: PeriodicComb,
    /// The projection vanished (relative to the input norm).
    pub empty: bool,
}

pub fn symmetrize_eigencomponent(rho: &PeriodicComb, lambda: Lambda) -> Symmetrized {
    let w = &rho.weights;
    let u1 = unitary_dft(w);
    let u2 = dft_square(w);
    let u3 = dft_square(&u1);
    let lc = lambda.conj();
    let c: [Complex64; 4] = [0, 1, 2, 3].map(|j| lc.pow(j).to_c64());
    let out: Vec<Complex64> = (0..w.len())
        .map(|k| c[0] * w[k] + c[1] * u1[k] + c[2] * u2[k] + c[3] * u3[k])
        .collect();
    let empty = l2_norm(&out) <= 1e-12 * l2_norm(w).max(f64::MIN_POSITIVE);
    Symmetrized {
        comb: PeriodicComb {
            m: rho.m,
            eigen_tag: Some(lambda),
            weights: out,
        },
        empty,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityRow {
    pub function: String,
    pub residual: f64,
    pub tail_bound: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub residuals: Vec<DualityRow>,
}

impl DualityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    pub fn max_tail(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.tail_bound))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("function,residual,tail_bound\n");
        for r in &self.residuals {
            s.push_str(&format!("\"{}\",{:e},{:e}\n", r.function, r.residual, r.tail_bound));
        }
        s
    }
}

/// `|<claimed, f> - <mu, f^>|` per Gaussian; tails are infinite without a certificate.
pub fn duality_residual(mu: &Term, claimed: &Term, family: &[Gaussian], reg: &Registry) -> Result<DualityReport> {
    let mut residuals = Vec::with_capacity(family.len());
    for f in family {
        let lhs = claimed.pair(f, reg)?;
        let rhs = mu.pair(&f.hat(), reg)?;
        residuals.push(DualityRow {
            function: f.id(),
            residual: (lhs.value - rhs.value).norm(),
            tail_bound: lhs.tail.unwrap_or(f64::INFINITY) + rhs.tail.unwrap_or(f64::INFINITY),
        });
    }
    Ok(DualityReport { residuals })
}

/// Gaussians `e^{-π s x^2}` for the given scales.
pub fn gaussian_family(scales: &[f64]) -> Vec<Gaussian> {
    scales.iter().map(|&s| Gaussian::new(s)).collect()
}

/// Scales, centers and modulations mixed so that sign errors in transform rules show up.
pub fn shifted_gaussian_family() -> Vec<Gaussian> {
    vec![
        Gaussian::new(0.5),
        Gaussian::new(1.0),
        Gaussian::new(2.0),
        Gaussian::new(1.0).centered(0.37),
        Gaussian::new(0.5).modulated(0.29),
        Gaussian::new(2.0).centered(-0.61).modulated(0.43),
    ]
}
