//! Partial sums of the Dirichlet series over expansion denominators.

use contlog::experiments::dirichlet_check;

fn main() -> contlog::Result<()> {
    for s in [1.5, 2.0, 3.0] {
        for n in [10, 100, 1_000, 10_000] {
            let c = dirichlet_check(s, n)?;
            println!("s = {s:<4} N = {n:>6}: {:.10} vs {:.10}  diff {:.2e}", c.partial_sum, c.zeta_ratio, c.deviation);
        }
    }
    Ok(())
}
