//! Polynomial value types: exact univariate polynomials and binary forms, and
//! floating-point trigonometric polynomials.

pub mod form;
pub mod rational;
pub mod roots;
pub mod trig;

pub use form::{BinaryForm, Dehomogenized, FormPair};
pub use rational::RatPoly;
pub use trig::TrigPoly;
