//! Orbits of the CL map and trajectory averages over random 256-bit inputs.

use contlog::constants::{const_b_conjectured, const_d, const_h_conjectured};
use contlog::dynamics::{birkhoff_estimates, orbit, psi, transfer_apply_fn, BirkhoffConfig};
use contlog::numbers::rational;

fn main() -> contlog::Result<()> {
    let o = orbit(&rational(31, 75), 100)?;
    for s in &o.steps {
        println!("x = {:<8} branch {}   2 log|x|_2 = {:+.4}", s.x.to_string(), s.branch, s.dyadic_log);
    }

    let xs: Vec<f64> = (0..=8).map(|j| f64::from(j) / 8.0).collect();
    let image = transfer_apply_fn(psi, &xs, 1.0, 0.0, psi(0.0), 1e-12)?;
    let res = image.iter().zip(&xs).map(|(y, &x)| (y - psi(x)).abs()).fold(0.0, f64::max);
    println!("\n|H psi - psi| on 9 points: {res:.2e}");

    let r = birkhoff_estimates(BirkhoffConfig { bits: 256, samples: 10_000, seed: 1 })?;
    let (e, s) = (r.estimates, r.std_errors);
    let ln2 = std::f64::consts::LN_2;
    println!("\nS/K        {:.5} +- {:.5}   (D/log 2 = {:.5})", e.shift_rate, s.shift_rate, const_d() / ln2);
    println!("2 log q/K  {:.5} +- {:.5}   (H = {:.5}, conjectured)", e.entropy, s.entropy, const_h_conjectured());
    println!("rho/K      {:.5} +- {:.5}   (B + D = {:.5}, conjectured)", e.e2, s.e2, const_b_conjectured() + const_d());
    println!("e/K        {:.5} +- {:.5}   (1/2 under the conjecture)", e.valuation_rate, s.valuation_rate);
    Ok(())
}
