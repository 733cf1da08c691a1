//! Closed-form constants and the table of growth constants M(c).

use contlog::constants::{const_e, e_bracket, e_tail_bound, m_table};

fn main() {
    print!("{}", m_table());
    println!();
    for terms in [1, 4, 16, 64] {
        println!("terms = {terms:>2}: E = {:.12}  (tail bound {:.1e})", const_e(terms), e_tail_bound(terms) / (4f64 / 3.0).ln());
    }
    println!("bracket = {:.12}", e_bracket(64));
}
