//! Numerics for quasicentral moduli of multiplication tuples on generalized
//! Cantor sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`gauge`]: gauge functions, their inverses, `h(x) = 1/f^{-1}(1/x)` and Lambert W;
//! * [`fractal`]: the symmetric generalized Cantor set, generation words and cell geometry;
//! * [`seqnorm`]: weight sequences and the Lorentz-type norms `Phi_pi`;
//! * [`opmodel`]: finite step-function models of the multiplication tuple and
//!   commutator spectra against the averaging projections `P_L`;
//! * [`lab`]: experiment drivers returning rows plus pass/fail verdicts.
//!
//! All modulus quantities produced here are upper estimates obtained from the
//! canonical averaging projections; nothing in this crate bounds a modulus from below.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fractal;
pub mod gauge;
pub mod lab;
pub mod numfmt;
pub mod opmodel;
pub mod seqnorm;

pub use error::{Error, Result};
pub use fractal::{CantorComplex, Word};
pub use gauge::GaugeSpec;
pub use opmodel::{FiniteModel, SingularSpectrum};
pub use seqnorm::WeightSequence;
