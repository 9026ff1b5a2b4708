//! A nested family of eigen-combs with isolated unit markers.
use comblab::eigenlab::nested_family;
use comblab::fourier::Lambda;

fn main() -> comblab::Result<()> {
    let f = nested_family(&[4, 16, 64], Lambda::One, 7)?;
    for (n, (k, r)) in f.k_seq.iter().zip(&f.reports).enumerate() {
        println!("k={k}: residual {:e}, marker isolated: {}", r.eigen_residual, f.marker_isolated(n));
    }
    Ok(())
}
