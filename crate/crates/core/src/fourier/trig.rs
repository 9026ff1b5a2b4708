//! Evaluation and certified sup norms of `x -> sum w e^{-2πi x y}`.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{GenId, SymbolicPoint};
use crate::measure::{Coverage, PointMeasure};
use crate::testfn::CSum;

/// Phase factor `e^{-2πi x y}` with the product reduced mod 1 before sin/cos.
#[inline]
pub fn cis_neg(x: f64, y: f64) -> Complex64 {
    let p = x * y;
    let e = x.mul_add(y, -p);
    let f = (p.rem_euclid(1.0) + e).rem_euclid(1.0);
    let (s, c) = (2.0 * PI * f).sin_cos();
    Complex64::new(c, -s)
}

#[derive(Clone, Debug)]
pub struct TrigPoly {
    freqs: Vec<f64>,
    weights: Vec<Complex64>,
    exact: Vec<SymbolicPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSup {
    pub max: f64,
    pub argmax: f64,
    pub step: f64,
    /// `max + step/2 * L` with `L = 2π sum |w||y|`: bounds the sup over the scanned range.
    pub certified_upper: f64,
    pub points: usize,
}

/// Sup over the torus the frequencies live on; equals the sup over the real
/// line when 1 and the generators are rationally independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSup {
    pub lower: f64,
    pub upper: f64,
    pub dims: usize,
    pub boxes: usize,
    pub witness: Vec<f64>,
}

impl TrigPoly {
    pub fn from_measure(mu: &PointMeasure) -> Result<Self> {
        if mu.coverage() != Coverage::All {
            return Err(Error::Coverage("finite_fourier needs a finite measure".into()));
        }
        Ok(TrigPoly {
            freqs: mu.positions_f64(),
            weights: mu.atoms().iter().map(|a| a.weight.to_c64()).collect(),
            exact: mu.atoms().iter().map(|a| a.coord.clone()).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = CSum::default();
        for (y, w) in self.freqs.iter().zip(&self.weights) {
            acc.add(w * cis_neg(x, *y));
        }
        acc.sum()
    }

    /// `2π sum |w||y|`, a Lipschitz constant on the real line.
    pub fn lipschitz(&self) -> f64 {
        2.0 * PI
            * self
                .freqs
                .iter()
                .zip(&self.weights)
                .map(|(y, w)| y.abs() * w.norm())
                .sum::<f64>()
    }

    pub fn l1(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// Grid maximization on `[lo, hi]` with the step chosen so the certified
    /// error is at most `rel_tol` times the grid max.
    pub fn grid_sup(&self, lo: f64, hi: f64, rel_tol: f64, max_points: usize) -> Result<GridSup> {
        let lip = self.lipschitz().max(f64::MIN_POSITIVE);
        let coarse = ((hi - lo) * lip / 0.5).ceil().clamp(16.0, 1e6) as usize;
        let probe = self.scan(lo, hi, coarse);
        let m0 = probe.0.max(1e-300);
        let step = (2.0 * rel_tol * m0 / lip).min((hi - lo).max(f64::MIN_POSITIVE));
        let points = ((hi - lo) / step).ceil() as usize + 1;
        if points > max_points {
            return Err(Error::Capacity(format!(
                "grid sup needs {points} points (cap {max_points})"
            )));
        }
        let (max, argmax) = self.scan(lo, hi, points.max(2) - 1);
        let step = (hi - lo) / (points.max(2) - 1) as f64;
        Ok(GridSup {
            max,
            argmax,
            step,
            certified_upper: max + 0.5 * step * lip,
            points,
        })
    }

    fn scan(&self, lo: f64, hi: f64, intervals: usize) -> (f64, f64) {
        let h = (hi - lo) / intervals as f64;
        (0..=intervals)
            .into_par_iter()
            .map(|k| {
                let x = lo + h * k as f64;
                (self.eval(x).norm(), x)
            })
            .reduce(
                || (f64::NEG_INFINITY, lo),
                |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
            )
    }

    /// Integer frequency vectors on the torus, one axis per generator plus
    /// one for the rational part when present.
    fn torus_coords(&self) -> (Vec<DimKey>, Vec<Vec<i64>>) {
        let mut dens: BTreeMap<DimKey, i64> = BTreeMap::new();
        for p in &self.exact {
            if *p.rat().numer() != 0 {
                let d = dens.entry(DimKey::Rational).or_insert(1);
                *d = d.lcm(p.rat().denom());
            }
            for (g, c) in p.coeffs() {
                let d = dens.entry(DimKey::Gen(*g)).or_insert(1);
                *d = d.lcm(c.denom());
            }
        }
        let keys: Vec<DimKey> = dens.keys().copied().collect();
        let vecs = self
            .exact
            .iter()
            .map(|p| {
                keys.iter()
                    .map(|k| {
                        let c = match k {
                            DimKey::Rational => p.rat(),
                            DimKey::Gen(g) => p.coeff(*g),
                        };
                        (c * dens[k]).to_integer()
                    })
                    .collect()
            })
            .collect();
        (keys, vecs)
    }

    pub fn torus_dims(&self) -> BTreeSet<DimKey> {
        self.torus_coords().0.into_iter().collect()
    }

    /// Branch and bound over the torus with a second-order box bound.
    pub fn torus_sup(&self, rel_tol: f64, max_boxes: usize) -> Result<TorusSup> {
        let (keys, n) = self.torus_coords();
        let d = keys.len();
        if d == 0 {
            let v = self.weights.iter().sum::<Complex64>().norm();
            return Ok(TorusSup { lower: v, upper: v, dims: 0, boxes: 0, witness: vec![] });
        }
        if d > 4 {
            return Err(Error::Shape(format!("torus sup limited to 4 dimensions, got {d}")));
        }
        let tp = TorusPoly { n, w: self.weights.clone(), d };
        let grid = (0..d)
            .map(|j| 4 * tp.n.iter().map(|v| v[j].abs()).max().unwrap_or(1).max(1) as usize)
            .collect::<Vec<_>>();
        let mut heap = BinaryHeap::new();
        let mut best = (f64::NEG_INFINITY, vec![0.0; d]);
        let total: usize = grid.iter().product();
        for idx in 0..total {
            let mut r = idx;
            let mut c = vec![0.0; d];
            let mut h = vec![0.0; d];
            for j in 0..d {
                let g = grid[j];
                h[j] = 0.5 / g as f64;
                c[j] = (r % g) as f64 / g as f64 + h[j];
                r /= g;
            }
            let bx = tp.bound(c, h);
            if bx.value > best.0 {
                best = (bx.value, bx.c.clone());
            }
            heap.push(bx);
        }
        let mut boxes = total;
        loop {
            let top = heap.pop().expect("nonempty heap");
            if top.upper <= best.0 * (1.0 + rel_tol) || top.upper - best.0 <= 1e-300 {
                return Ok(TorusSup {
                    lower: best.0,
                    upper: top.upper.max(best.0),
                    dims: d,
                    boxes,
                    witness: best.1,
                });
            }
            if boxes >= max_boxes {
                return Err(Error::Certification(format!(
                    "torus sup not certified after {boxes} boxes: [{}, {}]",
                    best.0, top.upper
                )));
            }
            let j = top.split_dim;
            for s in [-0.5, 0.5] {
                let mut c = top.c.clone();
                let mut h = top.h.clone();
                h[j] *= 0.5;
                c[j] += s * top.h[j];
                let bx = tp.bound(c, h);
                if bx.value > best.0 {
                    best = (bx.value, bx.c.clone());
                }
                heap.push(bx);
                boxes += 1;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DimKey {
    Rational,
    Gen(GenId),
}

struct TorusPoly {
    n: Vec<Vec<i64>>,
    w: Vec<Complex64>,
    d: usize,
}

struct TorusBox {
    c: Vec<f64>,
    h: Vec<f64>,
    value: f64,
    upper: f64,
    split_dim: usize,
}

impl PartialEq for TorusBox {
    fn eq(&self, o: &Self) -> bool {
        self.upper == o.upper
    }
}
impl Eq for TorusBox {}
impl PartialOrd for TorusBox {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for TorusBox {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.upper.total_cmp(&o.upper)
    }
}

impl TorusPoly {
    fn bound(&self, c: Vec<f64>, h: Vec<f64>) -> TorusBox {
        let mut val = CSum::default();
        let mut grad = vec![Complex64::new(0.0, 0.0); self.d];
        let mut second = 0.0;
        for (nk, wk) in self.n.iter().zip(&self.w) {
            let mut ph = 0.0;
            let mut spread = 0.0;
            for j in 0..self.d {
                ph += nk[j] as f64 * c[j];
                spread += nk[j].abs() as f64 * h[j];
            }
            let (s, co) = (-2.0 * PI * ph.rem_euclid(1.0)).sin_cos();
            let e = wk * Complex64::new(co, s);
            val.add(e);
            for j in 0..self.d {
                grad[j] += e * Complex64::new(0.0, -2.0 * PI * nk[j] as f64);
            }
            second += wk.norm() * spread * spread;
        }
        let pc = val.sum();
        let value = pc.norm();
        let quad = 0.5 * (2.0 * PI).powi(2) * second;
        // first-order step v split along u = P(c)/|P(c)| (a) and across it (b):
        // |P + v| <= sqrt((|P| + a)^2 + b^2) <= |P| + a + b^2 / (2(|P| + a))
        let (lin, first): (Vec<f64>, f64) = if value > 0.0 {
            let u = pc / value;
            let along: Vec<f64> = (0..self.d).map(|j| (u.conj() * grad[j]).re.abs() * h[j]).collect();
            let a: f64 = along.iter().sum();
            let b: f64 = (0..self.d).map(|j| (u.conj() * grad[j]).im.abs() * h[j]).sum();
            let full: f64 = (0..self.d).map(|j| grad[j].norm() * h[j]).sum();
            let lin = (0..self.d).map(|j| grad[j].norm() * h[j]).collect();
            let first = if value - a > 0.0 {
                (a + b * b / (2.0 * (value - a))).min(full)
            } else {
                full
            };
            (lin, first)
        } else {
            let lin: Vec<f64> = (0..self.d).map(|j| grad[j].norm() * h[j]).collect();
            let f = lin.iter().sum();
            (lin, f)
        };
        let upper = value + first + quad + 1e-15 * (1.0 + value);
        let split_dim = (0..self.d)
            .max_by(|&a, &b| {
                let wa = lin[a] + h[a] * h[a];
                let wb = lin[b] + h[b] * h[b];
                wa.total_cmp(&wb).then(b.cmp(&a))
            })
            .unwrap_or(0);
        TorusBox { c, h, value, upper, split_dim }
    }
}

/// Sup of a product of polynomials living on pairwise disjoint torus axes:
/// the product of the factor sups.
pub fn product_torus_sup(factors: &[TrigPoly], rel_tol: f64, max_boxes: usize) -> Result<TorusSup> {
    let mut seen = BTreeSet::new();
    let (mut lower, mut upper, mut dims, mut boxes) = (1.0, 1.0, 0, 0);
    for f in factors {
        let d = f.torus_dims();
        if !d.is_disjoint(&seen) {
            return Err(Error::Shape("product sup needs factors on disjoint torus axes".into()));
        }
        seen.extend(d);
        let s = f.torus_sup(rel_tol, max_boxes)?;
        lower *= s.lower;
        upper *= s.upper;
        dims += s.dims;
        boxes += s.boxes;
    }
    Ok(TorusSup { lower, upper, dims, boxes, witness: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{q, Registry};
    use crate::measure::Weight;
    use num_rational::BigRational;

    fn omega(reg: &Registry) -> PointMeasure {
        let bound = BigRational::new(1.into(), 3.into());
        let a = SymbolicPoint::generator(reg.add_small_sqrt("a", &bound, "t").unwrap());
        let b = SymbolicPoint::generator(reg.add_small_sqrt("b", &bound, "t").unwrap());
        PointMeasure::finite(
            reg,
            [
                (SymbolicPoint::zero(), Weight::one()),
                (a.clone(), Weight::one()),
                (b.clone(), Weight::one()),
                (a.add(&b).unwrap(), Weight::int(-1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn omega_value_at_zero_and_torus_sup() {
        let reg = Registry::new();
        let p = TrigPoly::from_measure(&omega(&reg)).unwrap();
        assert!((p.eval(0.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let s = p.torus_sup(1e-13, 2_000_000).unwrap();
        let r = 2.0 * 2f64.sqrt();
        assert!(s.lower <= r + 1e-12 && s.lower >= r - 1e-9, "{s:?}");
        assert!(s.upper >= r && s.upper <= r * (1.0 + 1e-12), "{s:?}");
    }

    #[test]
    fn grid_sup_is_below_torus_sup() {
        let reg = Registry::new();
        let p = TrigPoly::from_measure(&omega(&reg)).unwrap();
        let g = p.grid_sup(-5.0, 5.0, 1e-6, 50_000_000).unwrap();
        assert!(g.max <= 2.0 * 2f64.sqrt() + 1e-12);
        assert!(g.certified_upper >= g.max);
    }

    #[test]
    fn rational_frequencies_use_one_axis() {
        let reg = Registry::new();
        // 1 + e^{-2πi x/2}: sup 2 at x = 0
        let m = PointMeasure::finite(
            &reg,
            [(SymbolicPoint::zero(), Weight::one()), (SymbolicPoint::rational(q(1, 2)), Weight::one())],
        )
        .unwrap();
        let s = TrigPoly::from_measure(&m).unwrap().torus_sup(1e-12, 100_000).unwrap();
        assert_eq!(s.dims, 1);
        assert!((s.lower - 2.0).abs() < 1e-12);
    }
}
