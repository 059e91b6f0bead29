//! Component-labelled CCS, completeness criteria on runs (progress,
//! justness, J-fairness, weak and strong fairness of components, full
//! fairness) and liveness checking of finite-state systems under each.

pub mod catalog;
pub mod ccs;
pub mod cli;
pub mod clts;
pub mod equivalence;
pub mod liveness;
pub mod runs;
