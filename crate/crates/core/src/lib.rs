//! Exact model theory for finite continuous-logic structures: evaluation,
//! ultrameans and powermeans, convex types, and affine approximation.

pub mod approx;
pub mod charge;
pub mod cli;
pub mod error;
pub mod formula;
pub mod gen;
pub mod lp;
pub mod mean;
pub mod rational;
pub mod signature;
pub mod structure;
pub mod types;

pub use charge::Charge;
pub use error::{Error, Result};
pub use formula::{Formula, Term};
pub use mean::{MeanOptions, MeanStructure};
pub use rational::Rational;
pub use signature::{Modulus, Signature};
pub use structure::{FiniteStructure, PNorm};
