//! Test functions: Gaussians with closed-form transforms and a compactly
//! supported bump evaluated numerically.
//!
//! Transform convention: `f^(y) = ∫ f(x) e^{-2πixy} dx`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exactnum::Q;

/// `amp * e^{2πi xi x} * e^{-π s (x-c)^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub s: f64,
    pub c: f64,
    pub xi: f64,
    pub amp: Complex64,
}

impl Gaussian {
    pub fn new(s: f64) -> Self {
        assert!(s > 0.0, "Gaussian scale must be positive");
        Gaussian {
            s,
            c: 0.0,
            xi: 0.0,
            amp: Complex64::new(1.0, 0.0),
        }
    }

    pub fn centered(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn modulated(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn scaled(mut self, a: Complex64) -> Self {
        self.amp *= a;
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        let d = x - self.c;
        let env = (-PI * self.s * d * d).exp();
        let ph = 2.0 * PI * (self.xi * x).rem_euclid(1.0);
        self.amp * Complex64::new(env * ph.cos(), env * ph.sin())
    }

    pub fn hat(&self) -> Gaussian {
        let ph = 2.0 * PI * (self.c * self.xi).rem_euclid(1.0);
        Gaussian {
            s: 1.0 / self.s,
            c: self.xi,
            xi: -self.c,
            amp: self.amp * Complex64::from_polar(self.s.powf(-0.5), ph),
        }
    }

    /// `x -> f(x + t)`.
    pub fn shift_arg(&self, t: f64) -> Gaussian {
        let ph = 2.0 * PI * (self.xi * t).rem_euclid(1.0);
        Gaussian {
            c: self.c - t,
            amp: self.amp * Complex64::from_polar(1.0, ph),
            ..*self
        }
    }

    /// `x -> e^{2πi eta x} f(x)`.
    pub fn modulate(&self, eta: f64) -> Gaussian {
        Gaussian {
            xi: self.xi + eta,
            ..*self
        }
    }

    /// `x -> f(-x)`.
    pub fn reflect(&self) -> Gaussian {
        Gaussian {
            c: -self.c,
            xi: -self.xi,
            ..*self
        }
    }

    /// Distance from the center beyond which `|f| <= eps`.
    pub fn half_width(&self, eps: f64) -> f64 {
        let a = self.amp.norm();
        if a <= eps {
            return 0.0;
        }
        ((a / eps).ln() / (PI * self.s)).sqrt()
    }

    /// `|f| <= eps` outside `[-R, R]`.
    pub fn radius(&self, eps: f64) -> f64 {
        self.c.abs() + self.half_width(eps)
    }

    /// Sup of `|f|` over `[a, b]`.
    pub fn sup_abs_on(&self, a: f64, b: f64) -> f64 {
        let d = if self.c < a {
            a - self.c
        } else if self.c > b {
            self.c - b
        } else {
            0.0
        };
        self.amp.norm() * (-PI * self.s * d * d).exp()
    }

    /// Rigorous bound on `sum_k w(k) sup_{[k,k+1)} |f|` over unit cells outside
    /// `[lo, hi]`, with cell mass `w(x) <= c (1+|x|)^alpha`.
    pub fn cell_tail(&self, lo: f64, hi: f64, c: f64, alpha: f64) -> f64 {
        let mut total = 0.0;
        for dir in [1.0f64, -1.0] {
            let mut k = 0usize;
            let mut prev = f64::INFINITY;
            loop {
                let (a, b) = if dir > 0.0 {
                    (hi + k as f64, hi + k as f64 + 1.0)
                } else {
                    (lo - k as f64 - 1.0, lo - k as f64)
                };
                let far = a.abs().max(b.abs());
                let term = c * (1.0 + far).powf(alpha) * self.sup_abs_on(a, b);
                total += term;
                let beyond_center = if dir > 0.0 { a > self.c && a >= 0.0 } else { b < self.c && b <= 0.0 };
                // past the center both factors have decreasing ratios, so once
                // the ratio is below 1/2 the rest sums to at most `term`
                if beyond_center && (term == 0.0 || term <= 0.5 * prev) {
                    total += term;
                    break;
                }
                prev = if beyond_center { term } else { f64::INFINITY };
                k += 1;
                if k > 1_000_000 {
                    return f64::INFINITY;
                }
            }
        }
        total
    }

    /// `f(x + t) - f(x)` without cancellation for small `t`.
    pub fn shift_diff(&self, x: f64, t: f64) -> Complex64 {
        let d = x - self.c;
        let re = -PI * self.s * (2.0 * d + t) * t;
        let im = 2.0 * PI * self.xi * t;
        self.eval(x) * cexpm1(Complex64::new(re, im))
    }

    pub fn id(&self) -> String {
        format!(
            "gauss(s={},c={},xi={},amp={}{:+}i)",
            self.s, self.c, self.xi, self.amp.re, self.amp.im
        )
    }
}

/// `e^z - 1`, accurate for small `|z|`.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let h = (0.5 * z.im).sin();
    Complex64::new(z.re.exp_m1() * c - 2.0 * h * h, z.re.exp() * s)
}

/// `e^{2πi v} - 1` with `v` reduced to the nearest integer first.
pub fn phase_m1(v: f64) -> Complex64 {
    let f = v - v.round();
    cexpm1(Complex64::new(0.0, 2.0 * PI * f))
}

/// `phi((x - center) / width)` with `phi(x) = exp(-1/(1-x^2))` on (-1,1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Bump {
            center: 0.0,
            width: 1.0,
        }
    }
}

pub fn bump_profile(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        bump_profile((x - self.center) / self.width)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    /// Trapezoid nodes `u_j = -1 + 2j/K`, spectrally accurate for this profile.
    fn nodes(k: usize) -> impl Iterator<Item = (i64, f64)> {
        (1..k).map(move |j| {
            let num = 2 * j as i64 - k as i64;
            (num, bump_profile(num as f64 / k as f64))
        })
    }

    /// `phi^(xi)` for the default bump (center 0, width 1) at rational `xi`,
    /// with the phase reduced exactly before evaluating sin/cos.
    pub fn hat_exact_phase(xi: Q, k: usize) -> Complex64 {
        let (p, q) = (*xi.numer() as i128, *xi.denom() as i128);
        let modulus = q * k as i128;
        let h = 2.0 / k as f64;
        let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
        for (num, w) in Self::nodes(k) {
            let r = (p * num as i128).rem_euclid(modulus);
            let ph = -2.0 * PI * (r as f64 / modulus as f64);
            re.add(w * ph.cos());
            im.add(w * ph.sin());
        }
        Complex64::new(re.sum() * h, im.sum() * h)
    }

    /// `phi^(xi)` for this bump by trapezoid quadrature.
    pub fn hat(&self, xi: f64, k: usize) -> Complex64 {
        let h = 2.0 / k as f64;
        let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
        for (num, w) in Self::nodes(k) {
            let x = self.center + self.width * num as f64 / k as f64;
            let ph = -2.0 * PI * (xi * x).rem_euclid(1.0);
            re.add(w * ph.cos());
            im.add(w * ph.sin());
        }
        Complex64::new(re.sum(), im.sum()) * (h * self.width)
    }

    /// `∫ |phi|` and `∫ |2πx phi(x)|`, the latter bounding `|phi^'|`.
    pub fn moments(&self, k: usize) -> (f64, f64) {
        let h = 2.0 / k as f64 * self.width;
        let (mut m0, mut m1) = (KahanSum::default(), KahanSum::default());
        for (num, w) in Self::nodes(k) {
            let x = self.center + self.width * num as f64 / k as f64;
            m0.add(w);
            m1.add(2.0 * PI * x.abs() * w);
        }
        (m0.sum() * h, m1.sum() * h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    Gaussian(Gaussian),
    Bump(Bump),
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            TestFunction::Gaussian(g) => g.eval(x),
            TestFunction::Bump(b) => Complex64::new(b.eval(x), 0.0),
        }
    }

    /// Closed-form transform; only Gaussians have one.
    pub fn hat(&self) -> Option<TestFunction> {
        match self {
            TestFunction::Gaussian(g) => Some(TestFunction::Gaussian(g.hat())),
            TestFunction::Bump(_) => None,
        }
    }

    pub fn radius(&self, eps: f64) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.radius(eps),
            TestFunction::Bump(b) => b.center.abs() + b.width,
        }
    }

    pub fn sup_abs_on(&self, a: f64, b: f64) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.sup_abs_on(a, b),
            TestFunction::Bump(bp) => {
                let (lo, hi) = bp.support();
                if b <= lo || a >= hi {
                    0.0
                } else {
                    (-1.0f64).exp()
                }
            }
        }
    }

    pub fn cell_tail(&self, lo: f64, hi: f64, c: f64, alpha: f64) -> f64 {
        match self {
            TestFunction::Gaussian(g) => g.cell_tail(lo, hi, c, alpha),
            TestFunction::Bump(b) => {
                let (a, z) = b.support();
                if a >= lo && z <= hi {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            TestFunction::Gaussian(g) => g.id(),
            TestFunction::Bump(b) => format!("bump(c={},w={})", b.center, b.width),
        }
    }
}

impl From<Gaussian> for TestFunction {
    fn from(g: Gaussian) -> Self {
        TestFunction::Gaussian(g)
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    s: f64,
    c: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CSum {
    re: KahanSum,
    im: KahanSum,
}

impl CSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;

    /// Riemann sum of f(x) e^{-2πixy} on a fine grid.
    fn quad_hat(g: &Gaussian, y: f64) -> Complex64 {
        let h = 1e-3;
        let r = g.radius(1e-20);
        let n = (2.0 * r / h) as i64;
        let mut acc = CSum::default();
        for j in -n..=n {
            let x = j as f64 * h;
            acc.add(g.eval(x) * Complex64::from_polar(1.0, -2.0 * PI * x * y));
        }
        acc.sum() * h
    }

    #[test]
    fn gaussian_hat_matches_quadrature() {
        for g in [
            Gaussian::new(1.0),
            Gaussian::new(0.5).centered(0.3).modulated(0.7),
            Gaussian::new(2.0).centered(-1.1).modulated(-0.4),
        ] {
            let gh = g.hat();
            for y in [-1.3, -0.2, 0.0, 0.45, 1.7] {
                let d = (quad_hat(&g, y) - gh.eval(y)).norm();
                assert!(d < 1e-9, "{} at {y}: {d}", g.id());
            }
        }
    }

    #[test]
    fn standard_gaussian_is_self_dual() {
        let g = Gaussian::new(1.0);
        let h = g.hat();
        for x in [-2.0, -0.5, 0.0, 0.3, 1.9] {
            assert!((g.eval(x) - h.eval(x)).norm() < 1e-15);
        }
        // s^{-1/2} e^{-π x^2/s}
        let g2 = Gaussian::new(2.0).hat();
        let want = 2f64.powf(-0.5) * (-PI * 0.49 / 2.0).exp();
        assert!((g2.eval(0.7).re - want).abs() < 1e-15);
    }

    #[test]
    fn shift_modulate_reflect_rules() {
        let g = Gaussian::new(0.7).centered(0.2).modulated(0.9);
        for x in [-1.0, 0.1, 0.8] {
            assert!((g.shift_arg(0.35).eval(x) - g.eval(x + 0.35)).norm() < 1e-14);
            let m = g.eval(x) * Complex64::from_polar(1.0, 2.0 * PI * 0.4 * x);
            assert!((g.modulate(0.4).eval(x) - m).norm() < 1e-14);
            assert!((g.reflect().eval(x) - g.eval(-x)).norm() < 1e-14);
        }
    }

    #[test]
    fn shift_diff_is_cancellation_free() {
        let g = Gaussian::new(0.5).centered(0.3).modulated(0.2);
        let t = 1e-17;
        let d = g.shift_diff(1.1, t);
        // derivative times t
        let h = 1e-6;
        let deriv = (g.eval(1.1 + h) - g.eval(1.1 - h)) / (2.0 * h);
        assert!((d / t - deriv).norm() < 1e-7 * deriv.norm());
        let z = Complex64::new(1e-3, -2e-3);
        let want = Complex64::new(z.re.exp() * z.im.cos() - 1.0, z.re.exp() * z.im.sin());
        assert!((cexpm1(z) - want).norm() < 1e-15);
        assert!((phase_m1(1e-20) - Complex64::new(0.0, 2.0 * PI * 1e-20)).norm() < 1e-30);
    }

    #[test]
    fn radius_bounds_tail() {
        let g = Gaussian::new(0.5).centered(1.5);
        let r = g.radius(1e-12);
        assert!(g.eval(r).norm() <= 1e-12 * 1.0001);
        assert!(g.eval(-r).norm() <= 1e-12);
    }

    #[test]
    fn cell_tail_dominates_direct_sum() {
        let g = Gaussian::new(1.0);
        let bound = g.cell_tail(-2.0, 2.0, 1.0, 0.0);
        let mut direct = 0.0;
        for k in 2..40 {
            direct += g.eval(k as f64).norm() + g.eval(-(k as f64)).norm();
        }
        assert!(bound >= direct && bound < 1e-4);
    }

    #[test]
    fn bump_transform_phase_reduction_agrees() {
        let b = Bump::default();
        for (n, d) in [(0, 1), (1, 2), (7, 3), (-41, 8)] {
            let x = Bump::hat_exact_phase(q(n, d), 2048);
            let y = b.hat(n as f64 / d as f64, 2048);
            assert!((x - y).norm() < 1e-13, "{n}/{d}");
            assert!(x.im.abs() < 1e-14, "even bump has real transform");
        }
        let (m0, _) = b.moments(4096);
        assert!((Bump::hat_exact_phase(q(0, 1), 4096).re - m0).abs() < 1e-15);
        // ∫ e^{-1/(1-x^2)} dx = 0.443993816168079...
        assert!((m0 - 0.443_993_816_168_079).abs() < 1e-12);
    }
}
