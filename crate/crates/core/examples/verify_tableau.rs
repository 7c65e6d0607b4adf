//! Vector and scalar order of the built-in methods.
//!
//! ```text
//! cargo run --release --example verify_tableau
//! ```

use isomer::conditions::{builtin, order_report};

fn main() {
    for (name, p) in [("euler", 3), ("rk4", 6), ("fake5", 6), ("fake6", 7)] {
        let tab = builtin(name).unwrap();
        let report = order_report(&tab, p).unwrap();
        println!(
            "{name:>6}: vector order {}, scalar order {}, ambiguous {}, D(1) {}",
            report.vector_order,
            report.scalar_order,
            report.ambiguous,
            if report.d1_holds() { "holds" } else { "fails" },
        );
        if let Some(g) = &report.g {
            println!("        g = {g}");
        }
    }
}
