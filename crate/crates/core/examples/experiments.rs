//! Mean costs over coprime pairs: an exhaustive table and a sampled slope
//! ladder, with the CSV written to stdout.

use contlog::constants::Cost;
use contlog::experiments::{mean_costs, slope_estimate, write_csv, OmegaSpec};

fn main() -> contlog::Result<()> {
    let exact = mean_costs(OmegaSpec::exhaustive(2_000))?;
    println!("exhaustive N = 2000, {} pairs", exact.pairs);
    for c in Cost::ALL {
        println!("  {:<6} mean {:>9.4}   ratio to K {:.4}", c.name(), exact.mean(c), exact.ratio(c));
    }

    let slopes = slope_estimate(1 << 20, 200_000, 7)?;
    println!("\nslopes between N = 2^16 and 2^20");
    for c in Cost::ALL {
        let e = slopes.slopes[&c];
        println!(
            "  {:<6} slope {:.4} +- {:.4}   ratio {:.4} +- {:.4}   theory {:.4}",
            c.name(),
            e.slope,
            e.slope_stderr,
            e.ratio_to_k,
            e.ratio_stderr,
            e.target_ratio
        );
    }
    println!();
    write_csv(&slopes.csv_rows(), std::io::stdout().lock())
}
