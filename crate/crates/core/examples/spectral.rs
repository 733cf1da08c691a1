//! Dominant eigenvalue of the transfer operator H_{t,v} and its Taylor
//! coefficients at (1, 0).

use contlog::constants::{const_a, const_d};
use contlog::dynamics::psi;
use contlog::spectral::{eigen, taylor_estimates, DEFAULT_TAIL_TOL};

fn main() -> contlog::Result<()> {
    let r = eigen(1.0, 0.0, 48, DEFAULT_TAIL_TOL)?;
    println!("lambda(1, 0) = {:.15}   |phi - psi| = {:.2e}", r.lambda, r.sup_distance(psi));

    println!("\n{:>5} {:>5} {:>18}", "t", "v", "lambda");
    for t in [0.8, 1.0, 1.2, 1.5, 2.0] {
        for v in [-0.3, 0.0, 0.3] {
            println!("{t:>5} {v:>5} {:>18.12}", eigen(t, v, 32, DEFAULT_TAIL_TOL)?.lambda);
        }
    }

    let te = taylor_estimates(48, 1e-3)?;
    println!("\nA: {:.9} (closed form {:.9})", te.a_est, const_a());
    println!("D: {:.9} (closed form {:.9})", te.d_est, const_d());
    Ok(())
}
