use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dft::{dft_power, l2_dist, l2_norm, unitary_dft, Lambda};
use crate::error::{Error, Result};
use crate::exactnum::{q, q_ceil_int, q_floor_int, Registry, SymbolicPoint, Q};
use crate::measure::{Atom, Coverage, PairValue, PointMeasure, TailModel, Weight};
use crate::testfn::{CSum, Gaussian};

/// An `mZ`-periodic measure on `(1/m)Z`: atom `k/m + mZ` has weight `weights[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicComb {
    pub m: usize,
    #[serde(rename = "lambda")]
    pub eigen_tag: Option<Lambda>,
    #[serde(with = "c64_pairs")]
    pub weights: Vec<Complex64>,
}

pub(crate) mod c64_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
    }
}

impl PeriodicComb {
    pub fn new(m: usize, weights: Vec<Complex64>) -> Result<Self> {
        if m == 0 || weights.len() != m * m {
            return Err(Error::Shape(format!(
                "periodic comb with m = {m} needs {} weights, got {}",
                m * m,
                weights.len()
            )));
        }
        Ok(PeriodicComb {
            m,
            eigen_tag: None,
            weights,
        })
    }

    pub fn tagged(mut self, lambda: Option<Lambda>) -> Self {
        self.eigen_tag = lambda;
        self
    }

    /// `delta_{mZ}`.
    pub fn lattice(m: usize) -> Self {
        let mut w = vec![Complex64::new(0.0, 0.0); m * m];
        w[0] = Complex64::new(1.0, 0.0);
        PeriodicComb::new(m, w).expect("shape")
    }

    pub fn n(&self) -> usize {
        self.m * self.m
    }

    /// Weight of the atom at `j/m` for any integer `j`.
    pub fn weight_at(&self, j: i64) -> Complex64 {
        self.weights[j.rem_euclid(self.n() as i64) as usize]
    }

    /// Atom weight at an exact point, zero off `(1/m)Z`.
    pub fn weight_at_point(&self, p: &SymbolicPoint) -> Weight {
        if !p.is_rational() {
            return Weight::zero();
        }
        let x = p.rat() * Q::from_integer(self.m as i64);
        if !x.is_integer() {
            return Weight::zero();
        }
        let w = self.weight_at(x.to_integer());
        if w == Complex64::new(0.0, 0.0) {
            Weight::zero()
        } else {
            Weight::exact_from_c64(w).expect("finite weight")
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Bound on `|mu|([x, x+1))`.
    pub fn cell_mass_bound(&self) -> f64 {
        self.m as f64 * self.max_abs()
    }

    /// Index range `j` with `j/m` in `[lo, hi]`.
    pub fn index_range(&self, lo: Q, hi: Q) -> (i64, i64) {
        let m = Q::from_integer(self.m as i64);
        (q_ceil_int(&(lo * m)), q_floor_int(&(hi * m)))
    }

    /// Finite truncation on `[lo, hi]`; weights lifted exactly from the stored doubles.
    pub fn realize(&self, reg: &Registry, lo: Q, hi: Q) -> Result<PointMeasure> {
        let (a, b) = self.index_range(lo, hi);
        let m = self.m as i64;
        let mut atoms = Vec::new();
        for j in a..=b {
            let w = self.weight_at(j);
            if w != Complex64::new(0.0, 0.0) {
                atoms.push(Atom::new(SymbolicPoint::rational(q(j, m)), Weight::exact_from_c64(w)?));
            }
        }
        Ok(PointMeasure::new(reg, atoms, Coverage::window(lo, hi))?
            .with_tail(Some(TailModel::bounded(self.cell_mass_bound())))
            .with_meta("periodic_comb_m", self.m))
    }

    /// Fourier transform: weights `U w` with `N = m^2`.
    pub fn comb_fourier(&self) -> PeriodicComb {
        PeriodicComb {
            m: self.m,
            eigen_tag: self.eigen_tag,
            weights: unitary_dft(&self.weights),
        }
    }

    pub fn comb_fourier_power(&self, p: u32) -> PeriodicComb {
        PeriodicComb {
            m: self.m,
            eigen_tag: self.eigen_tag,
            weights: dft_power(&self.weights, p),
        }
    }

    pub fn scale(&self, c: Complex64) -> PeriodicComb {
        PeriodicComb {
            m: self.m,
            eigen_tag: self.eigen_tag,
            weights: self.weights.iter().map(|z| z * c).collect(),
        }
    }

    /// `||U w - lambda w|| / ||w||`, zero for the zero comb.
    pub fn eigen_residual(&self, lambda: Lambda) -> f64 {
        let norm = l2_norm(&self.weights);
        if norm == 0.0 {
            return 0.0;
        }
        let u = unitary_dft(&self.weights);
        let lw: Vec<Complex64> = self.weights.iter().map(|z| z * lambda.to_c64()).collect();
        l2_dist(&u, &lw) / norm
    }

    /// `sum_j w_j g(j/m)` over atoms within the Gaussian's effective support,
    /// with a rigorous bound on the rest.
    pub fn pair_gaussian(&self, g: &Gaussian) -> PairValue {
        const EPS: f64 = 1e-20;
        let m = self.m as f64;
        let hw = g.half_width(EPS / (1.0 + self.cell_mass_bound()));
        let (lo, hi) = (g.c - hw, g.c + hw);
        let (a, b) = ((lo * m).ceil() as i64, (hi * m).floor() as i64);
        let mut acc = CSum::default();
        for j in a..=b {
            let w = self.weight_at(j);
            if w != Complex64::new(0.0, 0.0) {
                acc.add(w * g.eval(j as f64 / m));
            }
        }
        // cells start half a spacing past the last summed atom on each side
        let tail = g.cell_tail((a as f64 - 0.5) / m, (b as f64 + 0.5) / m, self.cell_mass_bound(), 0.0);
        PairValue {
            value: acc.sum(),
            tail: Some(tail),
        }
    }

    /// `sum_j w_j (g(j/m + t) - g(j/m))`, accurate for tiny `t`.
    pub fn pair_gaussian_shift_diff(&self, g: &Gaussian, t: f64) -> PairValue {
        const EPS: f64 = 1e-30;
        let m = self.m as f64;
        let hw = g.half_width(EPS / (1.0 + self.cell_mass_bound())) + t.abs();
        let (lo, hi) = (g.c - hw, g.c + hw);
        let (a, b) = ((lo * m).ceil() as i64, (hi * m).floor() as i64);
        let mut acc = CSum::default();
        for j in a..=b {
            let w = self.weight_at(j);
            if w != Complex64::new(0.0, 0.0) {
                acc.add(w * g.shift_diff(j as f64 / m, t));
            }
        }
        let (cl, ch) = ((a as f64 - 0.5) / m, (b as f64 + 0.5) / m);
        let cell = self.cell_mass_bound();
        let tail = g.cell_tail(cl, ch, cell, 0.0) + g.shift_arg(t).cell_tail(cl, ch, cell, 0.0);
        PairValue {
            value: acc.sum(),
            tail: Some(tail),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_for_lattice() {
        let c = PeriodicComb::lattice(2).comb_fourier();
        for z in &c.weights {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn lattice_pairs_with_theta_value() {
        // delta_Z as m = 1 comb
        let c = PeriodicComb::lattice(1);
        let p = c.pair_gaussian(&Gaussian::new(1.0));
        assert!((p.value.re - 1.0864348112133080).abs() < 1e-14);
        assert!(p.tail.unwrap() < 1e-14);
    }

    #[test]
    fn realize_window_and_exact_weights() {
        let reg = Registry::new();
        let c = PeriodicComb::lattice(4);
        let m = c.realize(&reg, q(-9, 1), q(9, 1)).unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(c.weight_at_point(&SymbolicPoint::int(8)), Weight::one());
        assert!(c.weight_at_point(&SymbolicPoint::rational(q(1, 8))).is_exact_zero());
    }

    #[test]
    fn json_round_trip() {
        let c = PeriodicComb::lattice(2).tagged(Some(Lambda::I));
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"lambda\":\"i\""));
        let back: PeriodicComb = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
