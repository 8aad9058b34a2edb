//! Exact symbolic engine for D-modules attached to cyclic quivers.

pub mod coeffs;
pub mod connections;
pub mod diffops;
pub mod fourier;
pub mod levelt_turrittin;
pub mod linalg;
pub mod quivers;
pub mod series;
pub mod virasoro;
