use num_integer::Integer;

use super::Certificate;
use crate::eigenlab::NestedFamily;
use crate::error::{Error, Result};
use crate::exactnum::{fmt_q, q, Registry, SymbolicPoint, Q};
use crate::fourier::Term;
use crate::measure::{PointMeasure, Weight};

/// `sum_{n <= N} sigma_n / (n^2 k_n)` and its realization on a window.
#[derive(Clone, Debug)]
pub struct KolountzakisSigma {
    pub term: Term,
    pub measure: PointMeasure,
    pub depth: usize,
    /// Exact period of the truncation, `lcm(k_1, ..., k_N)`.
    pub period: u64,
    /// `c_N = prod k_n`, also a period.
    pub c_n: u64,
    /// Adjacent atoms at distance `1/k_N` inside the window, when the family has them.
    pub close_pair: Option<(Q, Q)>,
    pub certificate: Certificate,
}

/// Half-width of the central gap of the first omitted term.
fn omitted_gap(family: &NestedFamily, depth: usize, next_k: Option<usize>) -> Q {
    let k_next = family
        .k_seq
        .get(depth)
        .copied()
        .or(next_k)
        .unwrap_or(2 * family.k_seq[depth - 1] + 8);
    q(k_next as i64, 4) - Q::from_integer(1)
}

pub fn kolountzakis_sigma(
    reg: &Registry,
    family: &NestedFamily,
    depth: usize,
    lo: Q,
    hi: Q,
    next_k: Option<usize>,
) -> Result<KolountzakisSigma> {
    if depth == 0 || depth > family.combs.len() {
        return Err(Error::Spec(format!(
            "depth {depth} outside 1..={}",
            family.combs.len()
        )));
    }
    if lo > hi {
        return Err(Error::Spec("empty window".into()));
    }
    if let (Some(&last), Some(nk)) = (family.k_seq.get(depth - 1), next_k) {
        if family.k_seq.len() == depth && nk < 2 * last + 8 {
            return Err(Error::Spec(format!("next k = {nk} breaks nesting after {last}")));
        }
    }
    let reach = if -lo > hi { -lo } else { hi };
    if reach >= omitted_gap(family, depth, next_k) {
        let need = (1..=family.combs.len()).find(|&d| reach < omitted_gap(family, d, next_k));
        return Err(Error::Coverage(match need {
            Some(d) => format!(
                "window [{}, {}] needs depth >= {d} for an exact truncation",
                fmt_q(&lo),
                fmt_q(&hi)
            ),
            None => format!(
                "window [{}, {}] exceeds every gap of the family; extend the k sequence",
                fmt_q(&lo),
                fmt_q(&hi)
            ),
        }));
    }
    let mut terms = Vec::with_capacity(depth);
    let mut period = 1u64;
    let mut c_n = 1u64;
    for n in 1..=depth {
        let k = family.k_seq[n - 1] as i64;
        let w = Weight::q(q(1, (n * n) as i64 * k));
        terms.push(Term::comb(family.combs[n - 1].clone()).scale(w));
        period = period.lcm(&(k as u64));
        c_n = c_n
            .checked_mul(k as u64)
            .ok_or(Error::Overflow("product of periods"))?;
    }
    let term = Term::Sum(terms);
    let measure = term
        .realize(reg, lo, hi)?
        .with_meta("construction", "kolountzakis")
        .with_meta("depth", depth)
        .with_meta("period", period)
        .with_meta("c_N", c_n);
    let close_pair = family.markers[depth - 1].close_pair.and_then(|(a, b)| {
        let k = family.k_seq[depth - 1] as i64;
        let (x, y) = (q(a, k), q(b, k));
        let inside = lo <= x && y <= hi;
        let nonzero = |p: Q| !measure.atom_weight(&SymbolicPoint::rational(p)).is_exact_zero();
        (inside && nonzero(x) && nonzero(y)).then_some((x, y))
    });
    let bound: f64 = (1..=depth).map(|n| 1.0 / (n * n) as f64).sum();
    let certificate = Certificate {
        construction: "kolountzakis".into(),
        window: Some((fmt_q(&lo), fmt_q(&hi))),
        depth: Some(depth),
        tail_bound: Some(0.0),
        ..Default::default()
    }
    .param("k_seq", format!("{:?}", &family.k_seq[..depth]))
    .param("lambda", family.lambda)
    .param("seed", family.seed)
    .param("weights", "1/(n^2 k_n)")
    .param("omitted_gap_halfwidth", fmt_q(&omitted_gap(family, depth, next_k)))
    .check("window_norm_bound", bound)
    .check("period", period)
    .check("c_N", c_n);
    Ok(KolountzakisSigma {
        term,
        measure,
        depth,
        period,
        c_n,
        close_pair,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenlab::nested_family;
    use crate::exactnum::qi;
    use crate::fourier::Lambda;
    use crate::measure::window_norm;

    #[test]
    fn small_family_truncation() {
        let reg = Registry::new();
        let fam = nested_family(&[4, 16], Lambda::One, 3).unwrap();
        let s = kolountzakis_sigma(&reg, &fam, 2, qi(-8), qi(8), Some(64)).unwrap();
        assert_eq!(s.period, 16);
        assert_eq!(s.c_n, 64);
        let w = window_norm(&s.measure, qi(1), qi(-8), qi(7)).unwrap();
        assert!(w.sup_mass <= 1.0 + 0.25 + 1e-12);
        // gap of the omitted term k = 64 is (-15, 15)
        let e = kolountzakis_sigma(&reg, &fam, 2, qi(-16), qi(16), Some(64)).unwrap_err();
        assert!(matches!(e, Error::Coverage(_)));
        let e1 = kolountzakis_sigma(&reg, &fam, 1, qi(-6), qi(6), None).unwrap_err();
        assert!(e1.to_string().contains("depth >= 2"), "{e1}");
    }
}
