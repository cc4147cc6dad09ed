//! Polynomial hypergroups: recurrence families, linearization and Haar
//! weights, dual objects, chain sequences and verification suites.

pub mod chainseq;
pub mod families;
pub mod hypergroup;
pub mod par;
pub mod scalar;
pub mod spectrum;
pub mod verify;
