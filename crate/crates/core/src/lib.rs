//! Two encodings of CSP into an asynchronous name-passing CCS (the
//! asynchronous pi-calculus, in effect), plus the machinery to check — at
//! bounded desk scale — that they preserve behaviour: operational
//! correspondence, success sensitivity, translated-barb respect, divergence
//! reflection, lock invariants and distributability preservation, via weak
//! reduction bisimulation and coupled simulation over explored transition
//! systems.

pub mod names;
pub mod csp;
pub mod target;
// modules below are filled in bottom-up
// pub mod encoder;
// pub mod lts;
// pub mod equivalence;
// pub mod gen;
