//! Exact computations around simple homotopy theory: Whitehead and Gersten
//! torsion of chain equivalences over integral group rings of abelian
//! groups, chain-level checks of the K1 swindle and mapping-torus vanishing,
//! Whitehead-group infinitude verdicts for `Z x Z/n`, surjections of
//! unitriangular integer groups onto `Z`, and the derivation calculus of
//! minimal Sullivan algebras.

pub mod chains;
pub mod error;
pub mod groupring;
pub mod json;
pub mod nilgroups;
pub mod random;
pub mod sullivan;
pub mod torsion;
pub mod whgroups;

pub use error::{Error, Result};
