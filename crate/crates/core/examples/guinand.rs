//! Guinand's odd measure: r_3 values and a duality check against -i tau.
use comblab::constructions::{guinand_comb, r3_table};
use comblab::exactnum::Registry;
use comblab::fourier::{duality_residual, Lambda, Term};
use comblab::testfn::Gaussian;


fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    println!("r3(0..=10) = {:?}", r3_table(10));
    let tau = guinand_comb(&reg, 40)?;
    println!("{} atoms", tau.len());
    let t = Term::measure(tau);
    let g = [Gaussian::new(1.0).centered(0.3)];
    let r = duality_residual(&t, &t.clone().scale(Lambda::MinusI.to_weight()), &g, &reg)?;
    println!("duality residual {:e}", r.max_residual());
    Ok(())
}
