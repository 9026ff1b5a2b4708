//! Lazily evaluated series terms with termwise Fourier rules.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use super::comb::PeriodicComb;
use super::trig::cis_neg;
use crate::error::{Error, Result};
use crate::exactnum::{q_round, PointOrder, Registry, SymbolicPoint, Q};
use crate::measure::{
    char_phase, convolve_capped, modulate, reflect, translate, Atom, Coverage, PairValue,
    PointMeasure, TailModel, Weight, DEFAULT_CONVOLVE_CAP,
};
use crate::testfn::{phase_m1, CSum, Gaussian, TestFunction};

/// A finite measure too large to materialize by default.
pub trait LazyFinite: Send + Sync + Debug {
    fn label(&self) -> String;
    fn atom_count(&self) -> usize;
    fn total_variation(&self) -> f64;
    /// Closed interval containing the support.
    fn hull(&self) -> (f64, f64);
    /// `sum w e^{-2πi x y}`.
    fn hat(&self, x: f64) -> Complex64;
    /// Certified upper bound on `sup |hat|`.
    fn sup_hat(&self) -> f64;
    /// Number of independent chunks for parallel iteration.
    fn chunks(&self) -> usize;
    /// Visit `(coord, weight)` of every atom in chunk `c`, in a fixed order.
    fn for_each_in_chunk(&self, c: usize, f: &mut dyn FnMut(f64, Complex64));
    /// Exact atoms; may fail on capacity.
    fn atoms_exact(&self) -> Result<Vec<Atom>>;
    fn reflected(&self) -> Arc<dyn LazyFinite>;
}

#[derive(Clone, Debug)]
pub enum FiniteSrc {
    Explicit(Arc<PointMeasure>),
    Lazy(Arc<dyn LazyFinite>),
}

impl FiniteSrc {
    pub fn explicit(mu: PointMeasure) -> Result<Self> {
        if mu.coverage() != Coverage::All {
            return Err(Error::Shape("convolution factor must be finite".into()));
        }
        Ok(FiniteSrc::Explicit(Arc::new(mu)))
    }

    pub fn hat(&self, x: f64) -> Complex64 {
        match self {
            FiniteSrc::Explicit(m) => {
                let mut acc = CSum::default();
                for (a, y) in m.atoms().iter().zip(m.positions_f64()) {
                    acc.add(a.weight.to_c64() * cis_neg(x, y));
                }
                acc.sum()
            }
            FiniteSrc::Lazy(l) => l.hat(x),
        }
    }

    pub fn sup_hat(&self) -> f64 {
        match self {
            FiniteSrc::Explicit(m) => crate::measure::total_variation(m),
            FiniteSrc::Lazy(l) => l.sup_hat(),
        }
    }

    pub fn total_variation(&self) -> f64 {
        match self {
            FiniteSrc::Explicit(m) => crate::measure::total_variation(m),
            FiniteSrc::Lazy(l) => l.total_variation(),
        }
    }

    pub fn hull(&self) -> (f64, f64) {
        match self {
            FiniteSrc::Explicit(m) => m.hull_f64().unwrap_or((0.0, 0.0)),
            FiniteSrc::Lazy(l) => l.hull(),
        }
    }

    pub fn reflected(&self) -> FiniteSrc {
        match self {
            FiniteSrc::Explicit(m) => FiniteSrc::Explicit(Arc::new(reflect(m))),
            FiniteSrc::Lazy(l) => FiniteSrc::Lazy(l.reflected()),
        }
    }

    pub fn materialize(&self, reg: &Registry) -> Result<PointMeasure> {
        match self {
            FiniteSrc::Explicit(m) => Ok((**m).clone()),
            FiniteSrc::Lazy(l) => PointMeasure::new(reg, l.atoms_exact()?, Coverage::All),
        }
    }

    fn atom_count(&self) -> usize {
        match self {
            FiniteSrc::Explicit(m) => m.len(),
            FiniteSrc::Lazy(l) => l.atom_count(),
        }
    }

    fn label(&self) -> String {
        match self {
            FiniteSrc::Explicit(m) => format!("finite[{}]", m.len()),
            FiniteSrc::Lazy(l) => l.label(),
        }
    }
}

/// Series-term shapes with exact Fourier rules.
#[derive(Clone, Debug)]
pub enum Term {
    Comb(Arc<PeriodicComb>),
    /// A finite or truncated measure (pairing and realization respect its coverage).
    Measure(Arc<PointMeasure>),
    Translate(Box<Term>, SymbolicPoint),
    /// Weights multiplied by `e^{2πi xi x}`.
    Modulate(Box<Term>, SymbolicPoint),
    Reflect(Box<Term>),
    Scale(Box<Term>, Weight),
    Sum(Vec<Term>),
    ConvolveFinite(FiniteSrc, Box<Term>),
    /// Weights multiplied by the transform of the finite factor.
    MultiplyTrig(FiniteSrc, Box<Term>),
    /// `translate(T, x) - T`, paired without cancellation.
    TranslateDiff(Box<Term>, SymbolicPoint),
    /// `(e^{2πi xi x} - 1) T`.
    ModulateDiff(Box<Term>, SymbolicPoint),
}

/// Outward slack for inner windows, a few grid steps of the coverage rounding.
const SLACK: f64 = 4.0 / (1u64 << 20) as f64;

fn outward(lo: f64, hi: f64) -> (Q, Q) {
    (
        q_round(lo - SLACK, 1 << 20, true),
        q_round(hi + SLACK, 1 << 20, false),
    )
}

/// `e^{2πi xi p}`, exact when the phase is a quarter turn.
fn phase_weight(xi: &SymbolicPoint, p: &SymbolicPoint, order: &PointOrder) -> Weight {
    if xi.is_rational() && p.is_rational() {
        let (a, b) = (xi.rat(), p.rat());
        let n = *a.numer() as i128 * *b.numer() as i128 * 4;
        let d = *a.denom() as i128 * *b.denom() as i128;
        if n % d == 0 {
            return match (n / d).rem_euclid(4) {
                0 => Weight::one(),
                1 => Weight::i(),
                2 => Weight::int(-1),
                _ => Weight::i().neg(),
            };
        }
    }
    Weight::num(char_phase(xi, p, order))
}

/// `e^{2πi xi p} - 1`, exact on quarter turns and cancellation-free otherwise.
fn phase_m1_weight(xi: &SymbolicPoint, p: &SymbolicPoint, order: &PointOrder) -> Weight {
    let w = phase_weight(xi, p, order);
    if w.is_exact() {
        return w.sub(&Weight::one());
    }
    Weight::num(phase_m1(order.approx(xi).0 * order.approx(p).0))
}

impl Term {
    pub fn comb(c: PeriodicComb) -> Term {
        Term::Comb(Arc::new(c))
    }

    pub fn measure(m: PointMeasure) -> Term {
        Term::Measure(Arc::new(m))
    }

    pub fn translate(self, t: SymbolicPoint) -> Term {
        Term::Translate(Box::new(self), t)
    }

    pub fn modulate(self, xi: SymbolicPoint) -> Term {
        Term::Modulate(Box::new(self), xi)
    }

    pub fn reflect(self) -> Term {
        Term::Reflect(Box::new(self))
    }

    pub fn scale(self, w: Weight) -> Term {
        Term::Scale(Box::new(self), w)
    }

    pub fn sub(self, o: Term) -> Term {
        Term::Sum(vec![self, o.scale(Weight::int(-1))])
    }

    pub fn translate_diff(self, x: SymbolicPoint) -> Term {
        Term::TranslateDiff(Box::new(self), x)
    }

    pub fn modulate_diff(self, xi: SymbolicPoint) -> Term {
        Term::ModulateDiff(Box::new(self), xi)
    }

    pub fn convolve(src: FiniteSrc, t: Term) -> Term {
        Term::ConvolveFinite(src, Box::new(t))
    }

    pub fn multiply(src: FiniteSrc, t: Term) -> Term {
        Term::MultiplyTrig(src, Box::new(t))
    }

    /// Termwise Fourier transform; eigen-tagged combs map to `lambda * comb`.
    pub fn fourier(&self) -> Result<Term> {
        Ok(match self {
            Term::Comb(c) => match c.eigen_tag {
                Some(l) => Term::Comb(c.clone()).scale(l.to_weight()),
                None => Term::comb(c.comb_fourier()),
            },
            Term::Measure(_) => {
                return Err(Error::Shape(
                    "transform of a bare finite measure is not a measure".into(),
                ))
            }
            Term::Translate(t, x) => t.fourier()?.modulate(x.neg()),
            Term::Modulate(t, xi) => t.fourier()?.translate(xi.clone()),
            Term::Reflect(t) => t.fourier()?.reflect(),
            Term::Scale(t, w) => t.fourier()?.scale(w.clone()),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.fourier()).collect::<Result<_>>()?),
            Term::ConvolveFinite(s, t) => Term::multiply(s.clone(), t.fourier()?),
            Term::MultiplyTrig(s, t) => Term::convolve(s.reflected(), t.fourier()?),
            Term::TranslateDiff(t, x) => t.fourier()?.modulate_diff(x.neg()),
            Term::ModulateDiff(t, xi) => t.fourier()?.translate_diff(xi.clone()),
        })
    }

    /// Exact weight at `p` where the term's structure permits.
    pub fn atom_weight(&self, p: &SymbolicPoint, order: &PointOrder) -> Result<Weight> {
        Ok(match self {
            Term::Comb(c) => c.weight_at_point(p),
            Term::Measure(m) => {
                let (x, e) = order.approx(p);
                if !m.coverage().covers_f64(x - e, x + e) {
                    return Err(Error::Coverage(format!("atom weight at {x} outside coverage")));
                }
                m.atom_weight(p)
            }
            Term::Translate(t, x) => t.atom_weight(&p.sub(x)?, order)?,
            Term::Modulate(t, xi) => {
                let w = t.atom_weight(p, order)?;
                if w.is_exact_zero() {
                    w
                } else {
                    w.mul(&phase_weight(xi, p, order))
                }
            }
            Term::Reflect(t) => t.atom_weight(&p.neg(), order)?,
            Term::Scale(t, s) => t.atom_weight(p, order)?.mul(s),
            Term::Sum(ts) => {
                let mut acc = Weight::zero();
                for t in ts {
                    acc = acc.add(&t.atom_weight(p, order)?);
                }
                acc
            }
            Term::ConvolveFinite(s, t) => {
                let mut acc = Weight::zero();
                for a in s.materialize(order.registry())?.atoms() {
                    let w = t.atom_weight(&p.sub(&a.coord)?, order)?;
                    acc = acc.add(&w.mul(&a.weight));
                }
                acc
            }
            Term::MultiplyTrig(s, t) => {
                let w = t.atom_weight(p, order)?;
                if w.is_exact_zero() {
                    w
                } else {
                    w.mul_c64(s.hat(order.approx(p).0))
                }
            }
            Term::TranslateDiff(t, x) => t.atom_weight(&p.sub(x)?, order)?.sub(&t.atom_weight(p, order)?),
            Term::ModulateDiff(t, xi) => {
                let w = t.atom_weight(p, order)?;
                if w.is_exact_zero() {
                    w
                } else {
                    w.mul(&phase_m1_weight(xi, p, order))
                }
            }
        })
    }

    /// Atoms on the closed window `[lo, hi]`, coverage exactly that window.
    pub fn realize(&self, reg: &Registry, lo: Q, hi: Q) -> Result<PointMeasure> {
        self.realize_capped(reg, lo, hi, DEFAULT_CONVOLVE_CAP)
    }

    pub fn realize_capped(&self, reg: &Registry, lo: Q, hi: Q, cap: usize) -> Result<PointMeasure> {
        let (lf, hf) = (crate::exactnum::q_to_f64(&lo), crate::exactnum::q_to_f64(&hi));
        let m = match self {
            Term::Comb(c) => c.realize(reg, lo, hi)?,
            Term::Measure(m) => {
                m.require_cover(lo, hi, "realize")?;
                m.restrict(lo, hi)
            }
            Term::Translate(t, x) => {
                let (xa, xe) = PointOrder::new(reg).approx(x);
                let (a, b) = outward(lf - xa - xe, hf - xa + xe);
                translate(&t.realize_capped(reg, a, b, cap)?, x)?
            }
            Term::Modulate(t, xi) => modulate(&t.realize_capped(reg, lo, hi, cap)?, xi)?,
            Term::Reflect(t) => reflect(&t.realize_capped(reg, -hi, -lo, cap)?),
            Term::Scale(t, w) => t.realize_capped(reg, lo, hi, cap)?.scale(w),
            Term::Sum(ts) => {
                let mut acc = PointMeasure::empty(reg);
                for t in ts {
                    acc = crate::measure::add(&acc, &t.realize_capped(reg, lo, hi, cap)?)?;
                }
                acc
            }
            Term::ConvolveFinite(s, t) => {
                let (a, b) = s.hull();
                let (ia, ib) = outward(lf - b, hf - a);
                let inner = t.realize_capped(reg, ia, ib, cap)?;
                if s.atom_count().saturating_mul(inner.len()) > cap {
                    return Err(Error::Capacity(format!(
                        "realizing {} * term needs {} x {} atoms",
                        s.label(),
                        s.atom_count(),
                        inner.len()
                    )));
                }
                convolve_capped(&s.materialize(reg)?, &inner, cap)?
            }
            Term::MultiplyTrig(s, t) => {
                let inner = t.realize_capped(reg, lo, hi, cap)?;
                let order = PointOrder::new(reg);
                let tail = inner.tail().map(|tm| TailModel {
                    c: tm.c * s.sup_hat(),
                    alpha: tm.alpha,
                });
                inner
                    .map_weights(|a| a.weight.mul_c64(s.hat(order.approx(&a.coord).0)))
                    .with_tail(tail)
            }
            Term::TranslateDiff(t, x) => {
                let shifted = Term::Translate(t.clone(), x.clone()).realize_capped(reg, lo, hi, cap)?;
                crate::measure::sub(&shifted, &t.realize_capped(reg, lo, hi, cap)?)?
            }
            Term::ModulateDiff(t, xi) => {
                let inner = t.realize_capped(reg, lo, hi, cap)?;
                let order = PointOrder::new(reg);
                let tail = inner.tail().map(|tm| TailModel {
                    c: tm.c * 2.0,
                    alpha: tm.alpha,
                });
                inner
                    .map_weights(|a| a.weight.mul(&phase_m1_weight(xi, &a.coord, &order)))
                    .with_tail(tail)
            }
        };
        let m = m.restrict(lo, hi);
        Ok(m)
    }

    /// `<term, g>` with a certified tail bound.
    pub fn pair(&self, g: &Gaussian, reg: &Registry) -> Result<PairValue> {
        let order = PointOrder::new(reg);
        Ok(match self {
            Term::Comb(c) => c.pair_gaussian(g),
            Term::Measure(m) => crate::measure::pair(m, &TestFunction::Gaussian(*g)),
            Term::Translate(t, x) => t.pair(&g.shift_arg(order.approx(x).0), reg)?,
            Term::Modulate(t, xi) => t.pair(&g.modulate(order.approx(xi).0), reg)?,
            Term::Reflect(t) => t.pair(&g.reflect(), reg)?,
            Term::Scale(t, w) => {
                let p = t.pair(g, reg)?;
                PairValue {
                    value: p.value * w.to_c64(),
                    tail: p.tail.map(|e| e * w.abs()),
                }
            }
            Term::Sum(ts) => {
                let mut v = CSum::default();
                let mut tail = Some(0.0);
                for t in ts {
                    let p = t.pair(g, reg)?;
                    v.add(p.value);
                    tail = tail.zip(p.tail).map(|(a, b)| a + b);
                }
                PairValue { value: v.sum(), tail }
            }
            Term::ConvolveFinite(s, t) => match (s, peel_comb(t)) {
                (FiniteSrc::Lazy(l), Some((c, w))) => {
                    let p = lazy_comb_pair(l.as_ref(), &c, g);
                    PairValue {
                        value: p.value * w,
                        tail: p.tail.map(|e| e * w.norm()),
                    }
                }
                (FiniteSrc::Explicit(m), _) if m.len() <= 4096 => {
                    let mut v = CSum::default();
                    let mut tail = Some(0.0);
                    for (a, y) in m.atoms().iter().zip(m.positions_f64()) {
                        let p = t.pair(&g.shift_arg(y), reg)?;
                        v.add(p.value * a.weight.to_c64());
                        tail = tail.zip(p.tail).map(|(e, f)| e + f * a.weight.abs());
                    }
                    PairValue { value: v.sum(), tail }
                }
                _ => self.pair_by_realize(g, reg)?,
            },
            Term::MultiplyTrig(..) | Term::ModulateDiff(..) => self.pair_by_realize(g, reg)?,
            Term::TranslateDiff(t, x) => match peel_comb(t) {
                Some((c, w)) => {
                    let p = c.pair_gaussian_shift_diff(g, order.approx(x).0);
                    PairValue {
                        value: p.value * w,
                        tail: p.tail.map(|e| e * w.norm()),
                    }
                }
                None => {
                    let a = t.pair(&g.shift_arg(order.approx(x).0), reg)?;
                    let b = t.pair(g, reg)?;
                    PairValue {
                        value: a.value - b.value,
                        tail: a.tail.zip(b.tail).map(|(e, f)| e + f),
                    }
                }
            },
        })
    }

    fn pair_by_realize(&self, g: &Gaussian, reg: &Registry) -> Result<PairValue> {
        let hw = g.half_width(1e-22);
        let (lo, hi) = outward(g.c - hw, g.c + hw);
        let m = self.realize(reg, lo, hi)?;
        Ok(crate::measure::pair(&m, &TestFunction::Gaussian(*g)))
    }
}

/// `Scale*(Comb)` as `(comb, factor)`.
fn peel_comb(t: &Term) -> Option<(Arc<PeriodicComb>, Complex64)> {
    match t {
        Term::Comb(c) => Some((c.clone(), Complex64::new(1.0, 0.0))),
        Term::Scale(inner, w) => peel_comb(inner).map(|(c, f)| (c, f * w.to_c64())),
        _ => None,
    }
}

/// `sum_y w_y sum_j mu_j g(y + j/m)` with the Gaussian and phase factors
/// advanced by multiplicative recurrences along each run of `j`.
fn lazy_comb_pair(src: &dyn LazyFinite, comb: &PeriodicComb, g: &Gaussian) -> PairValue {
    let m = comb.m as f64;
    let cell = comb.cell_mass_bound();
    let hw = g.half_width(1e-20 / (1.0 + cell * src.total_variation()));
    let pi = std::f64::consts::PI;
    let decay = (-2.0 * pi * g.s / (m * m)).exp();
    let rot = Complex64::from_polar(1.0, 2.0 * pi * (g.xi / m).rem_euclid(1.0));
    let sums: Vec<Complex64> = (0..src.chunks())
        .into_par_iter()
        .map(|ch| {
            let mut acc = CSum::default();
            src.for_each_in_chunk(ch, &mut |y, w| {
                let a = ((g.c - hw - y) * m).ceil() as i64;
                let b = ((g.c + hw - y) * m).floor() as i64;
                if a > b {
                    return;
                }
                let x = y + a as f64 / m;
                let d = x - g.c;
                let mut gv = (-pi * g.s * d * d).exp();
                let mut ratio = (-pi * g.s * (2.0 * d / m + 1.0 / (m * m))).exp();
                let mut ph = Complex64::from_polar(1.0, 2.0 * pi * (g.xi * x).rem_euclid(1.0));
                let mut inner = Complex64::zero();
                for j in a..=b {
                    let mu = comb.weight_at(j);
                    if mu != Complex64::zero() {
                        inner += mu * ph * gv;
                    }
                    gv *= ratio;
                    ratio *= decay;
                    ph *= rot;
                }
                acc.add(w * inner);
            });
            acc.sum()
        })
        .collect();
    let mut total = CSum::default();
    for s in sums {
        total.add(s);
    }
    // per source atom the skipped comb atoms lie outside [c - hw, c + hw]
    let unit = Gaussian::new(g.s).centered(g.c);
    let tail = src.total_variation() * g.amp.norm() * unit.cell_tail(g.c - hw, g.c + hw, cell, 0.0);
    PairValue {
        value: total.sum() * g.amp,
        tail: Some(tail),
    }
}

#[cfg(test)]
mod tests;
