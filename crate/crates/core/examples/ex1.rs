//! A shifted/modulated series pair with infinite Bessel sums at bump-shaped test functions.
use comblab::constructions::theorem_ex1_instance;
use comblab::exactnum::Registry;
use comblab::fourier::Lambda;
use comblab::testfn::Bump;

fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    let inst = theorem_ex1_instance(&reg, Bump::default(), 3, Lambda::One, 11)?;
    println!("margin ratio {}", inst.params.margin_ratio);
    for (n, (e, m)) in inst.bessel_exact.iter().zip(&inst.bessel_measured).enumerate() {
        println!("depth {}: exact partial sum {e}, measured {m}", n + 1);
    }
    Ok(())
}
