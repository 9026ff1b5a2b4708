//! Growth, p-discreteness and almost-period diagnostics on the lattice and factorial examples.
use comblab::constructions::pedagogical_example;
use comblab::diagnostics::{almost_period_scan, doubling_ladder, growth_profile, p_discreteness_probe};
use comblab::exactnum::{qi, Registry};
use comblab::testfn::{Gaussian, TestFunction};

fn main() -> comblab::Result<()> {
    let reg = Registry::with_digits(60);
    let lat = pedagogical_example(&reg, "lattice", 512)?;
    let g = growth_profile(&lat, &doubling_ladder(qi(1), qi(512)))?;
    println!("lattice growth exponent {:.3} ({:?})", g.fitted_exponent, g.verdict);
    let ap = almost_period_scan(&lat, &TestFunction::Gaussian(Gaussian::new(1.0)), 1e-9, (-8.0, 8.0), 0.25, (-4.0, 4.0))?;
    println!("almost periods found: {}", ap.periods_found.len());
    let fac = pedagogical_example(&reg, "factorial", 8)?;
    let p = p_discreteness_probe(&fac.positions_f64(), &[(1.0, 3.0), (0.125, 1.0)]);
    for row in &p.rows {
        println!("c={} h={}: {:?}", row.c, row.h, row.result);
    }
    Ok(())
}
