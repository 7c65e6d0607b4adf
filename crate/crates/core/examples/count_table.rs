//! Prints the table of tree and isomeric-class counts.
//!
//! ```text
//! cargo run --release --example count_table -- 20
//! ```

use isomer::stumps::{count_by_enumeration, count_by_recurrence, count_table_tsv};

fn main() {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let rows = count_by_recurrence(p);
    print!("{}", count_table_tsv(&rows));

    let check = p.min(14);
    let enumerated = count_by_enumeration(check, None).expect("no budget");
    assert_eq!(enumerated[..], rows[..check]);
    eprintln!("enumeration agrees through p = {check}");
}
