//! Complex dense matrices, matrix polynomials, truncated Laurent series, block solves.

pub mod laurent;
pub mod matrix;
pub mod poly;
pub mod solve;

pub use laurent::{series_inverse, LaurentBlock};
pub use matrix::CMatrix;
pub use poly::{anticommutator, commutator, miura, MatrixPoly};
pub use solve::{solve_block_col, solve_block_row, SolveReport};
