//! Expansions, continuants and the cost vector of an exponent sequence.

use contlog::{cf_eval, cl_run, continuants, cost_vector, Convention, ExponentSeq};
use num_bigint::BigUint;

fn main() -> contlog::Result<()> {
    for text in ["0", "1,2", "2,0", "1,2,2,1,0,0,0"] {
        let seq: ExponentSeq = text.parse()?;
        let cp = continuants(&seq);
        let c = cost_vector(&seq)?;
        println!("{seq:<18} = {:<8} P={} Q={} g={} R={}", cf_eval(&seq).to_string(), cp.p, cp.q, cp.g, cp.r);
        println!(
            "{:<18}   K={} S={} sigma={:.4} q={:.4} rho={:.4} r={:.4} q2={:.4}",
            "",
            c.k,
            c.s,
            c.sigma(),
            c.q(),
            c.rho(),
            c.r(),
            c.q2()
        );
    }

    // The expansion of a rational read back through the continuants.
    let (p, q) = (BigUint::from(355u32), BigUint::from(1131u32));
    let trace = cl_run(&p, &q, Convention::Canonical)?;
    let back = cf_eval(&trace.exponents);
    println!("\n{p}/{q} -> {} -> {back}", trace.exponents);
    Ok(())
}
