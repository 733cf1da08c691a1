//! The slow family (1, 2^n - 1) under both conventions.

use contlog::experiments::worstcase_scan;

fn main() -> contlog::Result<()> {
    let r = worstcase_scan(128)?;
    for row in r.rows.iter().filter(|row| row.n <= 10 || row.n % 32 == 0) {
        println!(
            "n = {:>3}  greedy K = {:>3} S = {:>5}   canonical K = {:>3} S = {:>5}",
            row.n, row.k_greedy, row.s_greedy, row.k_canonical, row.s_canonical
        );
    }
    println!("K slope {:.4} / {:.4}, S leading coefficient {:.4} / {:.4}", r.alpha[0], r.alpha[1], r.gamma[0], r.gamma[1]);
    println!("bounds hold: {}", r.bounds_hold);
    Ok(())
}
