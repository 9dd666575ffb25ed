//! Simulator and analysis toolkit for a 1D chemotaxis system with
//! degenerate fast diffusion, written in moving-front variables.
//!
//! Modules:
//! - [`profile`]: traveling-wave profile construction and tail analysis
//! - [`pde`]: Crank-Nicolson / Newton time stepping on a finite interval
//! - [`linalg`]: banded LU with partial pivoting
//! - [`diagnostics`]: change of variables, shift and speed estimation,
//!   weighted norms and stability functionals
//! - [`io`] and [`cli`]: CSV/JSON output and the command-line driver

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod pde;
pub mod profile;
pub mod quad;

mod util;

pub use error::{Error, Result};
