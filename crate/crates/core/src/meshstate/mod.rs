//! Grids, state vectors and the DoF layout.

mod dofs;
mod grid;
pub mod quadrature;
mod state;

pub use dofs::{dof_position, DofField1d, DofField2d, DofVector, Family};
pub use grid::{Field1, Field2, Grid1d, Grid2d, GHOST, MIN_CELLS};
pub use state::{identity, mat_dist, mat_mul, mat_vec, Mat, State};
