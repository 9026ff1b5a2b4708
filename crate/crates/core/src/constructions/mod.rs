//! Explicit measures: series of nested eigenmeasures, shifted/modulated series,
//! Kahane-Salem measures and their convolution series, Guinand's measure and
//! small pedagogical examples.
//!
//! Truncations are exact on their coverage windows; each construction carries
//! a [`Certificate`] recording the window, depth, tail bounds and parameters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

mod favorov;
mod guinand;
mod kahane_salem;
mod kolountzakis;
mod pedagogical;

pub use favorov::{
    atom_identity_check, choose_bump_margins, favorov_pair, lemma_tech_bound, marker_shift_point,
    pi_coth_pi_check, series_descriptor, theorem_ex1_instance, weighted_derivative_norm,
    AtomVerdict, Ex1Instance, Ex1Params, FavorovPair, SeriesDescriptor, TailCertificate, TechBound,
    BUMP_NODES,
};
pub use guinand::{
    guinand_chi, guinand_comb, half_sqrt_point, r3_table, sum_three_squares, GUINAND_TAIL,
};
pub use kahane_salem::{
    full_growth_depth, ks_big_omega, ks_omega, ks_params, ks_theta, support_disjointness,
    theorem341_pair, theta_sup, GrowthWitness, KsOmega, KsParams, Thm341, Thm341Term,
    OMEGA_EXACT_CAP,
};
pub use kolountzakis::{kolountzakis_sigma, KolountzakisSigma};
pub use pedagogical::{
    factorial_example, kdelta_example, lattice_example, pedagogical_example,
    FACTORIAL_CAP,
};

/// Provenance record emitted next to every constructed measure.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub construction: String,
    /// Closed window `[lo, hi]` on which the truncation equals the full series.
    pub window: Option<(String, String)>,
    pub depth: Option<usize>,
    /// Bound on what the omitted terms contribute to any pairing statement.
    pub tail_bound: Option<f64>,
    pub params: BTreeMap<String, String>,
    pub checks: BTreeMap<String, String>,
}

impl Certificate {
    pub fn new(construction: &str) -> Self {
        Certificate {
            construction: construction.to_string(),
            ..Default::default()
        }
    }

    pub fn param(mut self, k: &str, v: impl ToString) -> Self {
        self.params.insert(k.to_string(), v.to_string());
        self
    }

    pub fn check(mut self, k: &str, v: impl ToString) -> Self {
        self.checks.insert(k.to_string(), v.to_string());
        self
    }
}
