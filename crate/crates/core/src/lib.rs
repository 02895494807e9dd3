//! Numerics for NC measures: positive linear functionals on the free disk
//! system, given by their moments `μ(L^α)` over words `α` in the free monoid.
//!
//! The crate builds truncated Fock spaces and GNS representations, evaluates
//! NC Herglotz and Cauchy transforms and their kernels at matrix points, and
//! splits a measure into parts absolutely continuous and singular with
//! respect to NC Lebesgue measure (the vacuum state).

pub mod classical;
pub mod error;
pub mod fock;
pub mod freemonoid;
pub mod gns;
pub mod lebesgue;
pub mod linalg;
pub mod ncmeasure;
pub mod spec;
pub mod transforms;

pub use error::{Error, Result};
pub use freemonoid::{enumerate_words, reduce_pair, PairReduction, Word};
pub use linalg::{CMat, C64};
pub use ncmeasure::MomentTable;
