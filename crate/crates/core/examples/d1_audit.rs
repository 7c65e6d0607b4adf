//! Which isomeric classes hold two or more trees whose root has several
//! children. Below order 7 there are none.
//!
//! ```text
//! cargo run --example d1_audit -- 8
//! ```

use isomer::conditions::d1_class_audit;

fn main() {
    let p: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let audit = d1_class_audit(p);
    for class in audit.flagged() {
        let members: Vec<String> = class.members.iter().map(|t| t.to_string()).collect();
        println!("order {} {}: {} of {} members", class.order, class.signature, class.not_reducible, members.len());
        println!("    {}", members.join(" "));
    }
    println!("{} flagged classes up to order {p}", audit.flagged().len());
}
