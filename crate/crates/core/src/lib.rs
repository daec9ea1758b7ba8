//! Search and verification toolkit for sunflower-free set families.
//!
//! * [`setcore`]: bitmask sets and immutable families.
//! * [`sunflower`]: exhaustive sunflower detection and certificates.
//! * [`search`]: orderly branch and bound for `φ(s, t)` and the Duke–Erdős
//!   maximum at small `n`.
//! * [`lowdim`]: the layered vector `φ̃` and its lexicographic maximiser.
//! * [`construct`]: explicit extremal families and exact counts.
//! * [`spectral`]: Johnson graphs, Laplacian gaps, Cheeger and
//!   Kruskal–Katona checkers.
//! * [`cli`]: the `workbench` command line, result cache and repro scenarios.

pub mod cli;
pub mod construct;
pub mod error;
pub mod lowdim;
pub mod search;
pub mod setcore;
pub mod spectral;
pub mod sunflower;

pub use error::{Error, Result};
pub use setcore::{Family, SetWord};
pub use sunflower::{CoreConstraint, SunflowerCert};
