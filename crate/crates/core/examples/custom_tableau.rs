//! Loads a tableau from JSON and checks it exactly. Pass a file path, or
//! run without arguments to check Kutta's 3/8 rule.
//!
//! ```text
//! cargo run --example custom_tableau -- method.json
//! ```

use isomer::conditions::{order_report, LoadOptions, Tableau};

const THREE_EIGHTHS: &str = r#"{
  "name": "3/8 rule",
  "s": 4,
  "c": ["0", "1/3", "2/3", "1"],
  "A": [[], ["1/3"], ["-1/3", "1"], ["1", "-1", "1"]],
  "b": ["1/8", "3/8", "3/8", "1/8"]
}"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => THREE_EIGHTHS.to_string(),
    };
    let tab = match Tableau::from_json_str(&text, LoadOptions::default()) {
        Ok(tab) => tab,
        Err(e) => {
            eprintln!("invalid tableau: {e}");
            std::process::exit(1);
        }
    };
    let report = order_report(&tab, 6).unwrap();
    print!("{}", report.to_text(true));
}
