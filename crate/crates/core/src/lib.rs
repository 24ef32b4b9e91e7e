// Index loops and NaN-rejecting comparisons are deliberate in the numeric
// kernels.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Spectral data of embeddings and bounded operators on harmonic function
//! spaces.
//!
//! The crate has two halves that check each other:
//!
//! * closed forms: the exact singular value spectrum of the restriction
//!   operator between harmonic Bergman spaces on concentric balls
//!   ([`ball`]), the algebra of stretched-exponential decay classes
//!   ([`expo`]) and the covering bounds they induce for general nested
//!   domains ([`covers`]);
//! * constructions: harmonic polynomial bases, exact sphere moments and
//!   Bergman Gram matrices ([`poly`], [`basis`]), numerical SVDs of
//!   embedding operators ([`embedding`]) and Galerkin discretizations of
//!   composition operators ([`galerkin`]).

pub mod basis;
pub mod ball;
pub mod covers;
pub mod dims;
pub mod embedding;
pub mod error;
pub mod expo;
pub mod galerkin;
pub mod geometry;
pub mod linalg;
pub mod poly;
pub mod quadrature;

pub use ball::{DecayBound, ExactBallSpectrum};
pub use covers::{Efficiency, RelativeCover};
pub use dims::Dimension;
pub use error::Error;
pub use expo::{ExponentialGauge, FiniteSpectrum};
pub use geometry::{BallSpec, DomainUnion, GeometryFile};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
