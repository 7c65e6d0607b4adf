pub mod conditions;
pub mod exact;
pub mod parallel;
pub mod stumps;
pub mod trees;
pub mod ode;
pub mod cli;
