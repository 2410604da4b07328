//! Ineliminable correlations of bipartite quantum states.
//!
//! A party holding `A` of a state `ρ_RA` applies a Stinespring isometry
//! `V: A → B ⊗ E`, keeps `B` and discards `E`. This crate measures how much
//! of the correlation with the reference `R` survives in `B` when at most
//! `ε` bits may leak into `E`, and provides:
//!
//! - [`qmat`]: tensor products, partial traces, Jacobi spectra, skew-Hermitian exponentials;
//! - [`entropics`]: von Neumann entropy, mutual and coherent information, in bits;
//! - [`states`]: canonical and seeded random states, purification, the state file schema;
//! - [`isometries`]: validated isometries and the closed-form decoupling constructions;
//! - [`pqd`]: decoupling scores, entropic bounds, the penalty-method optimizer and rate sweeps;
//! - [`scenarios`]: named, seeded pass/fail reproductions of the closed-form claims.

pub mod entropics;
pub mod error;
pub mod format;
pub mod isometries;
pub mod pqd;
pub mod qmat;
pub mod scenarios;
pub mod states;

pub use error::{Error, Result};
