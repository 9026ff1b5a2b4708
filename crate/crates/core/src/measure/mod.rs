//! Finite weighted Dirac combs with exact coordinates.

mod weight;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use weight::{fmt_big, parse_big, GaussQ, Weight};

use crate::error::{Error, Result};
use crate::exactnum::{q, q_round, q_to_f64, qi, PointOrder, Registry, SymbolicPoint, Q};
use crate::testfn::{CSum, TestFunction};

/// Default cap on the atom count of a convolution.
pub const DEFAULT_CONVOLVE_CAP: usize = 10_000_000;
/// Denominator used when a coverage endpoint must be rounded inward.
const COVER_DEN: i64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub coord: SymbolicPoint,
    pub weight: Weight,
}

impl Atom {
    pub fn new(coord: SymbolicPoint, weight: Weight) -> Self {
        Atom { coord, weight }
    }
}

/// Closed interval on which the stored atoms equal the full measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coverage {
    All,
    Window { lo: Q, hi: Q },
    Empty,
}

impl Coverage {
    pub fn window(lo: Q, hi: Q) -> Coverage {
        if lo > hi {
            Coverage::Empty
        } else {
            Coverage::Window { lo, hi }
        }
    }

    pub fn intersect(self, o: Coverage) -> Coverage {
        match (self, o) {
            (Coverage::Empty, _) | (_, Coverage::Empty) => Coverage::Empty,
            (Coverage::All, c) | (c, Coverage::All) => c,
            (Coverage::Window { lo: a, hi: b }, Coverage::Window { lo: c, hi: d }) => {
                Coverage::window(a.max(c), b.min(d))
            }
        }
    }

    pub fn covers(&self, lo: Q, hi: Q) -> bool {
        match self {
            Coverage::All => true,
            Coverage::Empty => false,
            Coverage::Window { lo: a, hi: b } => *a <= lo && hi <= *b,
        }
    }

    /// Conservative check for a floating interval.
    pub fn covers_f64(&self, lo: f64, hi: f64) -> bool {
        match self {
            Coverage::All => true,
            Coverage::Empty => false,
            Coverage::Window { lo: a, hi: b } => {
                let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                q_to_f64(a) <= lo - slack && hi + slack <= q_to_f64(b)
            }
        }
    }

    pub fn bounds_f64(&self) -> Option<(f64, f64)> {
        match self {
            Coverage::Window { lo, hi } => Some((q_to_f64(lo), q_to_f64(hi))),
            _ => None,
        }
    }

    /// Shift by an approximately known amount, rounding inward.
    fn shifted(self, t: f64, err: f64) -> Coverage {
        match self {
            Coverage::Window { lo, hi } => Coverage::window(
                q_round(q_to_f64(&lo) + t + err + 1e-12, COVER_DEN, false),
                q_round(q_to_f64(&hi) + t - err - 1e-12, COVER_DEN, true),
            ),
            c => c,
        }
    }

    fn shifted_exact(self, t: Q) -> Coverage {
        match self {
            Coverage::Window { lo, hi } => Coverage::window(lo + t, hi + t),
            c => c,
        }
    }

    fn reflected(self) -> Coverage {
        match self {
            Coverage::Window { lo, hi } => Coverage::window(-hi, -lo),
            c => c,
        }
    }
}

/// Bound `|mu|([x, x+1)) <= c (1+|x|)^alpha` for the part outside the coverage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub c: f64,
    pub alpha: f64,
}

impl TailModel {
    pub fn bounded(c: f64) -> Self {
        TailModel { c, alpha: 0.0 }
    }

    fn add(a: Option<TailModel>, b: Option<TailModel>, sa: f64, sb: f64) -> Option<TailModel> {
        match (a, b) {
            (Some(x), Some(y)) => Some(TailModel {
                c: sa * x.c + sb * y.c,
                alpha: x.alpha.max(y.alpha),
            }),
            _ => None,
        }
    }
}

/// Finite set of atoms sorted by the exact coordinate order, no repeated coords.
#[derive(Clone, Debug)]
pub struct PointMeasure {
    reg: Registry,
    atoms: Vec<Atom>,
    approx: Vec<(f64, f64)>,
    coverage: Coverage,
    tail: Option<TailModel>,
    pub metadata: BTreeMap<String, String>,
}

fn sort_merge(order: &PointOrder, items: Vec<Atom>) -> (Vec<Atom>, Vec<(f64, f64)>) {
    let mut keyed: Vec<((f64, f64), Atom)> = if items.len() > 20_000 {
        items.into_par_iter().map(|a| (order.approx(&a.coord), a)).collect()
    } else {
        items.into_iter().map(|a| (order.approx(&a.coord), a)).collect()
    };
    let cmp = |x: &((f64, f64), Atom), y: &((f64, f64), Atom)| {
        order.cmp_with(&x.1.coord, x.0, &y.1.coord, y.0)
    };
    if keyed.len() > 20_000 {
        keyed.par_sort_by(cmp);
    } else {
        keyed.sort_by(cmp);
    }
    let mut atoms: Vec<Atom> = Vec::with_capacity(keyed.len());
    let mut approx = Vec::with_capacity(keyed.len());
    for (ap, a) in keyed {
        match atoms.last_mut() {
            Some(last) if last.coord == a.coord => last.weight = last.weight.add(&a.weight),
            _ => {
                atoms.push(a);
                approx.push(ap);
            }
        }
    }
    let mut out_a = Vec::with_capacity(atoms.len());
    let mut out_p = Vec::with_capacity(atoms.len());
    for (a, p) in atoms.into_iter().zip(approx) {
        if !a.weight.is_exact_zero() {
            out_a.push(a);
            out_p.push(p);
        }
    }
    (out_a, out_p)
}

impl PointMeasure {
    pub fn empty(reg: &Registry) -> Self {
        PointMeasure {
            reg: reg.clone(),
            atoms: Vec::new(),
            approx: Vec::new(),
            coverage: Coverage::All,
            tail: Some(TailModel::bounded(0.0)),
            metadata: BTreeMap::new(),
        }
    }

    /// Normalize arbitrary atoms: exact dedup (weights summed), exact zeros pruned.
    pub fn new(reg: &Registry, atoms: Vec<Atom>, coverage: Coverage) -> Result<Self> {
        for a in &atoms {
            a.coord.check_registry(reg)?;
        }
        let order = PointOrder::new(reg);
        let (atoms, approx) = sort_merge(&order, atoms);
        Ok(PointMeasure {
            reg: reg.clone(),
            atoms,
            approx,
            coverage,
            tail: if coverage == Coverage::All {
                Some(TailModel::bounded(0.0))
            } else {
                None
            },
            metadata: BTreeMap::new(),
        })
    }

    /// Finite measure from (coord, weight) pairs.
    pub fn finite(reg: &Registry, atoms: impl IntoIterator<Item = (SymbolicPoint, Weight)>) -> Result<Self> {
        Self::new(
            reg,
            atoms.into_iter().map(|(c, w)| Atom::new(c, w)).collect(),
            Coverage::All,
        )
    }

    pub fn dirac(reg: &Registry, x: SymbolicPoint) -> Result<Self> {
        Self::finite(reg, [(x, Weight::one())])
    }

    /// Trusted constructor for atoms already sorted and merged.
    fn from_sorted(&self, atoms: Vec<Atom>, approx: Vec<(f64, f64)>, coverage: Coverage) -> Self {
        PointMeasure {
            reg: self.reg.clone(),
            atoms,
            approx,
            coverage,
            tail: self.tail,
            metadata: self.metadata.clone(),
        }
    }

    pub fn with_tail(mut self, tail: Option<TailModel>) -> Self {
        self.tail = tail;
        self
    }

    pub fn with_coverage(mut self, coverage: Coverage) -> Self {
        self.coverage = coverage;
        self
    }

    pub fn with_meta(mut self, k: &str, v: impl ToString) -> Self {
        self.metadata.insert(k.to_string(), v.to_string());
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.reg
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn tail(&self) -> Option<TailModel> {
        self.tail
    }

    /// Double-precision coordinate of atom `i` and its error bound.
    pub fn approx(&self, i: usize) -> (f64, f64) {
        self.approx[i]
    }

    pub fn positions_f64(&self) -> Vec<f64> {
        self.approx.iter().map(|p| p.0).collect()
    }

    pub fn order(&self) -> PointOrder {
        PointOrder::new(&self.reg)
    }

    pub fn require_cover(&self, lo: Q, hi: Q, what: &str) -> Result<()> {
        if self.coverage.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::Coverage(format!(
                "{what}: [{lo}, {hi}] not inside coverage {:?}",
                self.coverage
            )))
        }
    }

    pub fn is_all_exact(&self) -> bool {
        self.atoms.iter().all(|a| a.weight.is_exact())
    }

    /// Exact weight at `p` (zero when `p` is not an atom).
    pub fn atom_weight(&self, p: &SymbolicPoint) -> Weight {
        let order = self.order();
        let pa = order.approx(p);
        let idx = self
            .partition(|c, ca| order.cmp_with(c, ca, p, pa) == Ordering::Less);
        match self.atoms.get(idx) {
            Some(a) if &a.coord == p => a.weight.clone(),
            _ => Weight::zero(),
        }
    }

    /// First index where `pred` fails (pred must be monotone true..false).
    fn partition(&self, pred: impl Fn(&SymbolicPoint, (f64, f64)) -> bool) -> usize {
        let (mut lo, mut hi) = (0usize, self.atoms.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if pred(&self.atoms[mid].coord, self.approx[mid]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Index of the first atom `>= p` (or `> p` when `strict`).
    pub fn lower_bound(&self, p: &SymbolicPoint, strict: bool) -> usize {
        let order = self.order();
        let pa = order.approx(p);
        self.partition(|c, ca| {
            let o = order.cmp_with(c, ca, p, pa);
            o == Ordering::Less || (strict && o == Ordering::Equal)
        })
    }

    /// Drop numeric atoms with `|w| <= threshold`.
    pub fn prune_numeric(&self, threshold: f64) -> Self {
        let mut atoms = Vec::new();
        let mut approx = Vec::new();
        for (a, p) in self.atoms.iter().zip(&self.approx) {
            if a.weight.is_exact() || a.weight.abs() > threshold {
                atoms.push(a.clone());
                approx.push(*p);
            }
        }
        self.from_sorted(atoms, approx, self.coverage)
    }

    pub fn map_weights(&self, f: impl Fn(&Atom) -> Weight) -> Self {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        let mut approx = Vec::with_capacity(self.atoms.len());
        for (a, p) in self.atoms.iter().zip(&self.approx) {
            let w = f(a);
            if !w.is_exact_zero() {
                atoms.push(Atom::new(a.coord.clone(), w));
                approx.push(*p);
            }
        }
        self.from_sorted(atoms, approx, self.coverage)
    }

    pub fn scale(&self, c: &Weight) -> Self {
        let mut m = self.map_weights(|a| a.weight.mul(c));
        m.tail = self.tail.map(|t| TailModel {
            c: t.c * c.abs(),
            alpha: t.alpha,
        });
        m
    }

    /// Restrict to the closed interval `[lo, hi]`.
    pub fn restrict(&self, lo: Q, hi: Q) -> Self {
        let a = self.lower_bound(&SymbolicPoint::rational(lo), false);
        let b = self.lower_bound(&SymbolicPoint::rational(hi), true);
        let b = b.max(a);
        let mut m = self.from_sorted(
            self.atoms[a..b].to_vec(),
            self.approx[a..b].to_vec(),
            self.coverage.intersect(Coverage::window(lo, hi)),
        );
        m.tail = self.tail;
        m
    }

    /// Convex hull of the support, in double precision.
    pub fn hull_f64(&self) -> Option<(f64, f64)> {
        match (self.approx.first(), self.approx.last()) {
            (Some(a), Some(b)) => Some((a.0 - a.1, b.0 + b.1)),
            _ => None,
        }
    }
}

/// `alpha * mu + beta * nu`.
pub fn combine(mu: &PointMeasure, nu: &PointMeasure, alpha: &Weight, beta: &Weight) -> Result<PointMeasure> {
    mu.reg.ensure_same(&nu.reg)?;
    let order = mu.order();
    let (a, b) = (&mu.atoms, &nu.atoms);
    let mut atoms = Vec::with_capacity(a.len() + b.len());
    let mut approx = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut push = |c: SymbolicPoint, w: Weight, p: (f64, f64)| {
        if !w.is_exact_zero() {
            atoms.push(Atom::new(c, w));
            approx.push(p);
        }
    };
    while i < a.len() || j < b.len() {
        let o = if i == a.len() {
            Ordering::Greater
        } else if j == b.len() {
            Ordering::Less
        } else {
            order.cmp_with(&a[i].coord, mu.approx[i], &b[j].coord, nu.approx[j])
        };
        match o {
            Ordering::Less => {
                push(a[i].coord.clone(), a[i].weight.mul(alpha), mu.approx[i]);
                i += 1;
            }
            Ordering::Greater => {
                push(b[j].coord.clone(), b[j].weight.mul(beta), nu.approx[j]);
                j += 1;
            }
            Ordering::Equal => {
                let w = a[i].weight.mul(alpha).add(&b[j].weight.mul(beta));
                push(a[i].coord.clone(), w, mu.approx[i]);
                i += 1;
                j += 1;
            }
        }
    }
    let mut m = mu.from_sorted(atoms, approx, mu.coverage.intersect(nu.coverage));
    m.tail = TailModel::add(mu.tail, nu.tail, alpha.abs(), beta.abs());
    m.metadata = BTreeMap::new();
    Ok(m)
}

pub fn add(mu: &PointMeasure, nu: &PointMeasure) -> Result<PointMeasure> {
    combine(mu, nu, &Weight::one(), &Weight::one())
}

pub fn sub(mu: &PointMeasure, nu: &PointMeasure) -> Result<PointMeasure> {
    combine(mu, nu, &Weight::one(), &Weight::int(-1))
}

pub fn translate(mu: &PointMeasure, t: &SymbolicPoint) -> Result<PointMeasure> {
    t.check_registry(&mu.reg)?;
    let order = mu.order();
    let ta = order.approx(t);
    let mut atoms = Vec::with_capacity(mu.len());
    let mut approx = Vec::with_capacity(mu.len());
    for a in &mu.atoms {
        let c = a.coord.add(t)?;
        approx.push(order.approx(&c));
        atoms.push(Atom::new(c, a.weight.clone()));
    }
    let cov = if t.is_rational() {
        mu.coverage.shifted_exact(t.rat())
    } else {
        mu.coverage.shifted(ta.0, ta.1)
    };
    let mut m = mu.from_sorted(atoms, approx, cov);
    m.tail = mu.tail.map(|tm| TailModel {
        c: tm.c * 2.0 * (2.0 + ta.0.abs()).powf(tm.alpha),
        alpha: tm.alpha,
    });
    Ok(m)
}

/// `mu†`: coordinates negated.
pub fn reflect(mu: &PointMeasure) -> PointMeasure {
    let atoms: Vec<Atom> = mu
        .atoms
        .iter()
        .rev()
        .map(|a| Atom::new(a.coord.neg(), a.weight.clone()))
        .collect();
    let approx = mu.approx.iter().rev().map(|p| (-p.0, p.1)).collect();
    let mut m = mu.from_sorted(atoms, approx, mu.coverage.reflected());
    m.tail = mu.tail.map(|tm| TailModel {
        c: tm.c * 2.0 * 2f64.powf(tm.alpha),
        alpha: tm.alpha,
    });
    m
}

/// frac(a*b) from double-precision factors using an exact product split.
fn frac_product(a: f64, b: f64) -> f64 {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p.rem_euclid(1.0) + e).rem_euclid(1.0)
}

/// Phase `e^{2πi xi x}`, exact reduction when both are rational.
pub fn char_phase(xi: &SymbolicPoint, x: &SymbolicPoint, order: &PointOrder) -> Complex64 {
    let f = if xi.is_rational() && x.is_rational() {
        let (a, b) = (xi.rat(), x.rat());
        let n = *a.numer() as i128 * *b.numer() as i128;
        let d = *a.denom() as i128 * *b.denom() as i128;
        n.rem_euclid(d) as f64 / d as f64
    } else {
        frac_product(order.approx(xi).0, order.approx(x).0)
    };
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * f)
}

/// Weights multiplied by `e^{2πi xi x}`; exact zeros stay exact.
pub fn modulate(mu: &PointMeasure, xi: &SymbolicPoint) -> Result<PointMeasure> {
    xi.check_registry(&mu.reg)?;
    let order = mu.order();
    Ok(mu.map_weights(|a| a.weight.mul_c64(char_phase(xi, &a.coord, &order))))
}

/// Exact convolution of two measures; at least one must be finite.
pub fn convolve_capped(mu: &PointMeasure, nu: &PointMeasure, cap: usize) -> Result<PointMeasure> {
    mu.reg.ensure_same(&nu.reg)?;
    let n = mu.len().saturating_mul(nu.len());
    if n > cap {
        return Err(Error::Capacity(format!(
            "convolution would produce up to {n} atoms (cap {cap})"
        )));
    }
    let coverage = match (mu.coverage, nu.coverage) {
        (Coverage::All, Coverage::All) => Coverage::All,
        (Coverage::All, w) | (w, Coverage::All) => {
            let fin = if mu.coverage == Coverage::All { mu } else { nu };
            match (w, fin.hull_f64()) {
                (Coverage::Window { lo, hi }, Some((a, b))) => {
                    let (first, last) = (&fin.atoms[0].coord, &fin.atoms[fin.len() - 1].coord);
                    let lo = if last.is_rational() {
                        lo + last.rat()
                    } else {
                        q_round(q_to_f64(&lo) + b + 1e-12, COVER_DEN, false)
                    };
                    let hi = if first.is_rational() {
                        hi + first.rat()
                    } else {
                        q_round(q_to_f64(&hi) + a - 1e-12, COVER_DEN, true)
                    };
                    Coverage::window(lo, hi)
                }
                (c, _) => c,
            }
        }
        _ => {
            return Err(Error::Coverage(
                "convolution of two truncated infinite measures".into(),
            ))
        }
    };
    let mut items = Vec::with_capacity(n);
    for a in &mu.atoms {
        for b in &nu.atoms {
            items.push(Atom::new(a.coord.add(&b.coord)?, a.weight.mul(&b.weight)));
        }
    }
    let mut m = PointMeasure::new(&mu.reg, items, coverage)?;
    m.tail = match (mu.coverage, nu.coverage) {
        (Coverage::All, Coverage::All) => Some(TailModel::bounded(0.0)),
        _ => {
            let (inf, fin) = if mu.coverage == Coverage::All { (nu, mu) } else { (mu, nu) };
            let reach = fin.hull_f64().map(|(a, b)| a.abs().max(b.abs())).unwrap_or(0.0);
            inf.tail.map(|t| TailModel {
                c: 2.0 * t.c * total_variation(fin) * (2.0 + reach).powf(t.alpha),
                alpha: t.alpha,
            })
        }
    };
    Ok(m)
}

pub fn convolve(mu: &PointMeasure, nu: &PointMeasure) -> Result<PointMeasure> {
    convolve_capped(mu, nu, DEFAULT_CONVOLVE_CAP)
}

/// `sum |w|` in double precision, fixed summation order.
pub fn total_variation(mu: &PointMeasure) -> f64 {
    let mut s = crate::testfn::KahanSum::default();
    for a in &mu.atoms {
        s.add(a.weight.abs());
    }
    s.sum()
}

/// Exact total variation when every weight is an exact real or imaginary rational.
pub fn total_variation_exact(mu: &PointMeasure) -> Option<BigRational> {
    let mut s = BigRational::zero();
    for a in &mu.atoms {
        match &a.weight {
            Weight::Exact(g) if g.im.is_zero() => s += g.re.abs(),
            Weight::Exact(g) if g.re.is_zero() => s += g.im.abs(),
            _ => return None,
        }
    }
    Some(s)
}

/// Sliding-window sup of `|mu|([x, x+len))` for `x` in a closed range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub window_length: String,
    pub scan_range: (String, String),
    pub sup_mass: f64,
    pub argmax_window_start: f64,
    pub table: Vec<(f64, f64)>,
}

pub fn window_norm(mu: &PointMeasure, len: Q, lo: Q, hi: Q) -> Result<WindowStats> {
    if len <= qi(0) || lo > hi {
        return Err(Error::Input("window_norm needs len > 0 and lo <= hi".into()));
    }
    mu.require_cover(lo, hi + len, "window_norm")?;
    let order = mu.order();
    let prefix: Vec<f64> = std::iter::once(0.0)
        .chain(mu.atoms.iter().scan(0.0, |s, a| {
            *s += a.weight.abs();
            Some(*s)
        }))
        .collect();
    let lo_p = SymbolicPoint::rational(lo);
    let hi_p = SymbolicPoint::rational(hi);
    let first = mu.lower_bound(&lo_p, false);
    let last = mu.lower_bound(&hi_p, true);
    let mut j = first;
    let mut best = (f64::NEG_INFINITY, q_to_f64(&lo));
    let mut table = Vec::new();
    let mut visit = |start_idx: usize, start: SymbolicPoint, start_f: f64, j: &mut usize| -> Result<()> {
        let end = start.add_rational(len)?;
        let ea = order.approx(&end);
        while *j < mu.len() && order.cmp_with(&mu.atoms[*j].coord, mu.approx[*j], &end, ea) == Ordering::Less {
            *j += 1;
        }
        let mass = prefix[*j] - prefix[start_idx];
        table.push((start_f, mass));
        if mass > best.0 {
            best = (mass, start_f);
        }
        Ok(())
    };
    visit(first, lo_p.clone(), q_to_f64(&lo), &mut j)?;
    for i in first..last {
        let c = mu.atoms[i].coord.clone();
        if j < i {
            j = i;
        }
        visit(i, c, mu.approx[i].0, &mut j)?;
    }
    Ok(WindowStats {
        window_length: crate::exactnum::fmt_q(&len),
        scan_range: (crate::exactnum::fmt_q(&lo), crate::exactnum::fmt_q(&hi)),
        sup_mass: best.0.max(0.0),
        argmax_window_start: best.1,
        table,
    })
}

/// `|mu|(B_r(0))`, closed ball.
pub fn ball_mass(mu: &PointMeasure, r: Q) -> Result<f64> {
    mu.require_cover(-r, r, "ball_mass")?;
    let a = mu.lower_bound(&SymbolicPoint::rational(-r), false);
    let b = mu.lower_bound(&SymbolicPoint::rational(r), true);
    let mut s = crate::testfn::KahanSum::default();
    for at in &mu.atoms[a..b.max(a)] {
        s.add(at.weight.abs());
    }
    Ok(s.sum())
}

/// Pairing value with the bound on what lies outside the coverage window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairValue {
    pub value: Complex64,
    /// `None`: no tail certificate available.
    pub tail: Option<f64>,
}

pub fn pair(mu: &PointMeasure, f: &TestFunction) -> PairValue {
    let mut acc = CSum::default();
    for (a, p) in mu.atoms.iter().zip(&mu.approx) {
        acc.add(a.weight.to_c64() * f.eval(p.0));
    }
    let tail = match mu.coverage {
        Coverage::All => Some(0.0),
        Coverage::Empty => None,
        Coverage::Window { lo, hi } => mu
            .tail
            .map(|t| f.cell_tail(q_to_f64(&lo), q_to_f64(&hi), t.c, t.alpha)),
    };
    PairValue {
        value: acc.sum(),
        tail,
    }
}

/// Samples of `(mu * f)(t) = sum w f(t - x)` on `start + k*step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub start: f64,
    pub step: f64,
    pub values: Vec<Complex64>,
    pub tail: f64,
}

pub fn sample_convolution(mu: &PointMeasure, f: &TestFunction, start: f64, step: f64, count: usize) -> Result<Samples> {
    const EPS: f64 = 1e-18;
    let pos = mu.positions_f64();
    let (fc, hw) = match f {
        TestFunction::Gaussian(g) => (g.c, g.half_width(EPS)),
        TestFunction::Bump(b) => (b.center, b.width),
    };
    let end = start + step * count.saturating_sub(1) as f64;
    // atoms x with |t - x - fc| <= hw matter
    let (need_lo, need_hi) = (start.min(end) - fc - hw, start.max(end) - fc + hw);
    if !mu.coverage.covers_f64(need_lo, need_hi) {
        return Err(Error::Coverage(format!(
            "sample_convolution needs [{need_lo}, {need_hi}], have {:?}",
            mu.coverage
        )));
    }
    let values: Vec<Complex64> = (0..count)
        .into_par_iter()
        .map(|k| {
            let t = start + step * k as f64;
            let a = pos.partition_point(|&x| x < t - fc - hw);
            let mut acc = CSum::default();
            let mut i = a;
            while i < pos.len() && pos[i] <= t - fc + hw {
                acc.add(mu.atoms[i].weight.to_c64() * f.eval(t - pos[i]));
                i += 1;
            }
            acc.sum()
        })
        .collect();
    let tail = EPS * total_variation(mu)
        + match (mu.coverage, mu.tail) {
            (Coverage::All, _) => 0.0,
            (Coverage::Window { lo, hi }, Some(tm)) => {
                let (lo, hi) = (q_to_f64(&lo), q_to_f64(&hi));
                [start, end]
                    .iter()
                    .map(|&t| {
                        let g = match f {
                            TestFunction::Gaussian(g) => TestFunction::Gaussian(g.reflect().shift_arg(-t)),
                            TestFunction::Bump(b) => TestFunction::Bump(crate::testfn::Bump {
                                center: t - b.center,
                                width: b.width,
                            }),
                        };
                        g.cell_tail(lo, hi, tm.c, tm.alpha)
                    })
                    .fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        };
    Ok(Samples {
        start,
        step,
        values,
        tail,
    })
}

/// `sum_{|k| <= n} w(k) delta_k` on the integers, coverage `[-n, n]`.
pub fn integer_comb(reg: &Registry, n: i64, w: impl Fn(i64) -> Weight) -> Result<PointMeasure> {
    let atoms = (-n..=n)
        .map(|k| Atom::new(SymbolicPoint::int(k), w(k)))
        .collect();
    PointMeasure::new(reg, atoms, Coverage::window(qi(-n), qi(n)))
}

/// Rational helper for half-open unit windows.
pub fn unit() -> Q {
    q(1, 1)
}

#[cfg(test)]
mod tests;
