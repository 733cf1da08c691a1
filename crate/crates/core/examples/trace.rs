//! Execution table of the algorithm on (31, 75) under both conventions.
//!
//! cargo run --example trace [p q]

use contlog::{cl_run, Convention};
use num_bigint::BigUint;

fn main() -> contlog::Result<()> {
    let args: Vec<BigUint> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (p, q) = match args.as_slice() {
        [p, q] => (p.clone(), q.clone()),
        _ => (BigUint::from(31u32), BigUint::from(75u32)),
    };
    for convention in [Convention::Canonical, Convention::Greedy] {
        let trace = cl_run(&p, &q, convention)?;
        println!("{convention} convention");
        println!("{}", trace.to_table());
        println!("odd part of the gcd: {}\n", trace.odd_gcd);
    }
    Ok(())
}
