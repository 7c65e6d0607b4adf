//! Nonzero residuals of individual trees and of isomeric classes, for a
//! method that is order 6 on scalar problems but only order 5 on systems.
//!
//! ```text
//! cargo run --release --example residuals
//! ```

use isomer::conditions::{builtin, residual_report, Subject};

fn main() {
    let tab = builtin("fake6").unwrap();
    for r in residual_report(&tab, 6, 6).iter().filter(|r| !r.is_zero()) {
        let label = match &r.subject {
            Subject::Tree(t) => format!("tree  {t}"),
            Subject::Class { signature, .. } => format!("class {signature}"),
        };
        println!("{label:<40} {:>28}  ≈ {:+.3e}", r.value.to_string(), r.value.to_f64());
    }
}
