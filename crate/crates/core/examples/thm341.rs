//! Disjointly supported pair with bounded transform and fast ball growth.
use comblab::constructions::{ks_params, theorem341_pair};
use comblab::exactnum::{qi, Registry};
use comblab::fourier::Lambda;

fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    let p = ks_params(&reg, "ks", 13)?;
    let t = theorem341_pair(&reg, &p, 4, 2, Lambda::One, 3, (qi(-8), qi(8)))?;
    println!("disjoint {} window norm {} gap {}", t.disjoint, t.sigma_hat_window_norm, t.approximant_gap);
    for g in &t.growth {
        println!("m={}: ball mass >= {:e}, target {:e}, holds {}", g.m, g.ball_mass_lower, g.omega_mass, g.holds);
    }
    Ok(())
}
