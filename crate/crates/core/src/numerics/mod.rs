//! Grids, quadrature, principal-value integrals, asymptotic fits and dense
//! complex solves.

mod fit;
mod grid;
mod linalg;
mod pv;

pub use fit::fit_inverse_powers;
pub use grid::{gregory_coefficients, integrate_samples, ComplexSamples, RealGrid};
pub use linalg::{solve_dense, DenseSolution};
pub use pv::{pv_integrate, pv_row, PvEndpoint};
