//! Fixed-point and cycle statistics of random homomorphisms from a closed
//! surface group into `S_n`.
//!
//! The crate computes these statistics exactly by enumerating
//! `Hom(Γ_g, S_n)` for small `n`, estimates them by exactly uniform Monte
//! Carlo sampling for moderate `n`, and compares both against the exact
//! rational Poisson-limit predictions.

pub mod characters;
pub mod error;
pub mod partition;
pub mod hom_space;
pub mod limits;
pub mod perm;
pub mod stats;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
pub use partition::Partition;
pub use perm::{CycleType, HomPoint, Permutation};
pub use words::{Genus, Letter, Word};
