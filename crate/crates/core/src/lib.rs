//! Exact construction and verification of polynomial solutions for flag
//! partial differential equations, generalized Tricomi operators on trees,
//! and polynomial representations of so(n), sl(n) and G2.

pub mod dissip;
pub mod error;
pub mod exec;
pub mod family;
pub mod flagsolve;
pub mod ivp;
pub mod json;
pub mod kernel;
pub mod liemod;
pub mod linalg;
pub mod opalg;
pub mod poly;
pub mod scalar;
pub mod treetricomi;
pub mod trig;

pub use error::{Error, Result};
pub use opalg::{Operator, SeriesSolverConfig};
pub use poly::{GPoly, Poly, QPoly, Var};
pub use scalar::{Coefficient, Gaussian, QSqrt2, Rational};
pub use trig::TrigPoly;
