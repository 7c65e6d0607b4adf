//! Lists the isomeric classes with more than one member, with their
//! atomic stump factorizations.
//!
//! ```text
//! cargo run --example isomeric_classes -- 7
//! ```

use isomer::stumps::classes;

fn main() {
    let max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    for p in 5..=max {
        let all = classes(p).expect("order >= 1");
        let multi: Vec<_> = all.iter().filter(|c| c.members.len() > 1).collect();
        println!("order {p}: {} classes, {} with isomers", all.len(), multi.len());
        for class in multi {
            let members: Vec<String> = class.members.iter().map(|t| t.to_string()).collect();
            println!("  {:<36} {}", class.signature.to_string(), members.join(" ~ "));
        }
    }
}
