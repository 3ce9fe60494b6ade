//! Numerical toolkit for nonlocal parabolic equations driven by time-dependent
//! Lévy operators of stable-like order: measures and their structural checks,
//! Fourier symbols, a periodic spectral solver, weighted norms, maximal
//! functions, and the verification experiments built on them.

pub mod config;
pub mod error;
pub mod grid;
pub mod maximal;
pub mod measure;
pub mod norms;
pub mod plot;
pub mod quad;
pub mod solver;
pub mod special;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{Atom, LevyMeasure, Region, TimeDependentMeasure};
