//! Kahane-Salem building blocks: omega, theta_n and the convolution Omega_m.
use comblab::constructions::{ks_big_omega, ks_omega, ks_params, ks_theta, theta_sup};
use comblab::exactnum::Registry;
use comblab::fourier::finite_fourier;

fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    let p = ks_params(&reg, "ks", 7)?;
    let w = ks_omega(&reg, p.a_ids(&reg)?[0], p.b_ids(&reg)?[0])?;
    let s = finite_fourier(&w)?.torus_sup(1e-12, 1_000_000)?;
    println!("omega: {} atoms, sup |omega^| in [{}, {}]", w.len(), s.lower, s.upper);
    for n in 1..=5 {
        let th = ks_theta(&reg, &p, n)?;
        let s = theta_sup(&reg, &p, n)?;
        println!("theta_{n}: {} atoms, sup <= {} (2^(3n/2) = {})", th.len(), s.upper, 2f64.powf(1.5 * n as f64));
    }
    let om = ks_big_omega(&reg, &p, 3, 7)?;
    println!("Omega_3: mass {}, sup |Omega^| in {:?}", om.mass(), om.hat_sup_interval());
    Ok(())
}
