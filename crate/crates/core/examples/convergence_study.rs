//! Observed order of the two ambiguous methods on the spiral problems.
//! Writes one CSV per run into the given directory (default: current).
//!
//! ```text
//! cargo run --release --example convergence_study -- out/
//! ```

use std::path::PathBuf;

use isomer::conditions::builtin;
use isomer::ode::{convergence_study, spiral_scalar, spiral_vector, step_grid};

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["fake5", "fake6", "rk4"] {
        let tab = builtin(name).unwrap();
        for prob in [spiral_scalar(), spiral_vector()] {
            let steps = step_grid(&prob, 10f64.powf(-1.5), 10f64.powf(-0.75), 4).unwrap();
            let result = convergence_study(&tab, &prob, &steps).unwrap();
            let path = dir.join(format!("{name}-{}.csv", prob.name));
            std::fs::write(&path, result.to_csv()).unwrap();
            println!("{name:>5} {:<14} slope {:.2}  -> {}", prob.name, result.slope, path.display());
        }
    }
}
