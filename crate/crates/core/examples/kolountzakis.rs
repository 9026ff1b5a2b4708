//! Series of nested combs: window norm and the closest atom pair.
use comblab::constructions::kolountzakis_sigma;
use comblab::eigenlab::nested_family;
use comblab::exactnum::{qi, Registry};
use comblab::fourier::Lambda;
use comblab::measure::window_norm;

fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    let f = nested_family(&[4, 16, 64], Lambda::One, 7)?;
    let s = kolountzakis_sigma(&reg, &f, 3, qi(-30), qi(30), None)?;
    let w = window_norm(&s.measure, qi(1), qi(-30), qi(29))?;
    println!("atoms {} period {} sup_x |sigma|([x,x+1]) = {}", s.measure.len(), s.period, w.sup_mass);
    Ok(())
}
