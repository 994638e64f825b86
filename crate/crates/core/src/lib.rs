//! Weighted Besov and Triebel–Lizorkin machinery on a periodic grid.
//!
//! The crate realizes `R^n` (`n = 1, 2`) as the torus `[-R, R)^n` sampled on a
//! uniform grid and provides dyadic cube averages, Muckenhoupt-type weight
//! constants, maximal operators, a Littlewood–Paley pair with its
//! analysis/synthesis transform, weighted function-space norms, and the
//! verification suites that compare them.

pub mod config;
pub mod error;
pub mod grid;
pub mod lpaley;
pub mod maximal;
pub mod report;
pub mod spaces;
pub mod spectral;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
