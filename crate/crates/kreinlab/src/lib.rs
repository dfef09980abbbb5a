#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod entropy;
pub mod krein;
pub mod numerics;
pub mod opuc;
pub mod ordexp;
pub mod parse;
pub mod potential;
pub mod report;
pub mod verify;

pub use potential::{Family, Potential, PotentialError, TailProfile};
