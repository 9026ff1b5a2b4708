//! Unitary DFT identities and a periodic eigen-comb for each eigenvalue.
use comblab::eigenlab::{synthesize, EigenSpec};
use comblab::fourier::{dft_power, Lambda};
use num_complex::Complex64;

fn main() -> comblab::Result<()> {
    let x: Vec<Complex64> = (0..16).map(|j| Complex64::new(j as f64, (j * j % 5) as f64)).collect();
    let back = dft_power(&x, 4);
    let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("F^4 x - x: {err:e}");
    for lambda in [Lambda::One, Lambda::MinusOne, Lambda::I, Lambda::MinusI] {
        let (comb, rep) = synthesize(&EigenSpec::new(8, lambda, 1))?;
        println!(
            "m=8 lambda={lambda}: m {} residual {:e} gap-max {} route {:?}",
            comb.m, rep.eigen_residual, rep.gap_max_weight, rep.route
        );
    }
    Ok(())
}
