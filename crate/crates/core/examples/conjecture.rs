//! Two estimates of B + D and the comparison of D - B with log 2.

use contlog::experiments::{conjecture_test, ConjectureConfig};

fn main() -> contlog::Result<()> {
    let r = conjecture_test(ConjectureConfig {
        bits: 256,
        samples: 10_000,
        n_max: 1_000_000,
        pair_samples: 1_000_000,
        seed: 2024,
    })?;
    println!("trajectories: e2 = {:.5} +- {:.5}", r.birkhoff.estimates.e2, r.birkhoff.std_errors.e2);
    println!("               extrapolated in 1/bits: {:.5}", r.e2_extrapolated);
    println!("slopes:       {:.5} +- {:.5}", r.slope_rho_ratio, r.slope_rho_stderr);
    println!("conjectured:  {:.5}", r.conjectured);
    println!("D - B: {:.5} / {:.5}   log 2 = {:.5}", r.d_minus_b_birkhoff, r.d_minus_b_slope, r.log2);
    println!("{}", serde_json::to_string_pretty(&r).expect("serializable"));
    Ok(())
}
