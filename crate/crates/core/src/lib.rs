//! Exact symbolic and high-precision numeric engine for GKZ hypergeometric
//! quantum curves: spectral curves, topological recursion, WKB hierarchies,
//! quantum-curve reconstruction, saddle-point oracles and exact-WKB Stokes data
//! for the equivariant projective line.

pub mod exactalg;
pub mod curve;
pub mod oscillatory;
pub mod wkb;
pub mod reference;
pub mod toprec;
pub mod reconstruct;
pub mod stokes;
pub mod checks;
pub mod cli;
